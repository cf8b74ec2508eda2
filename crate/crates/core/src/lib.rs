//! Feed-forward network training with an artificial bee colony.
//!
//! * [`nn`]: networks, forward pass, squared-error index, analytic gradient
//!   and the plain gradient-descent step.
//! * [`abc`]: the bee-colony trainer.
//! * [`ga`] / [`bp`]: genetic-algorithm and plain back-propagation baselines.
//! * [`datasets`]: UCI-layout file loading, normalization, one-hot targets.
//! * [`metrics`]: classification rate, per-cycle records, reports, curves.
//! * [`experiment`]: run orchestration and multi-seed comparison tables,
//!   shared by the `abcbp` binary and the Python bindings.

pub mod abc;
pub mod bp;
pub mod datasets;
pub mod error;
pub mod experiment;
pub mod ga;
pub mod metrics;
pub mod nn;

pub use abc::{AbcConfig, Colony, ProbMode, Role, ScoutPolicy, Solution, StepMode};
pub use bp::{BpConfig, BpMode};
pub use datasets::{Builtin, Column, Dataset, DatasetSpec};
pub use error::{Error, Result};
pub use ga::GaConfig;
pub use metrics::{Algo, IterationRecord, RunReport, StableCcr, Summary, TerminatedBy};
pub use nn::{Architecture, Network, TransferFunction};
