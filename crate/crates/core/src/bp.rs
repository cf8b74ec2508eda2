//! Plain back-propagation on a single network.

use serde::{Deserialize, Serialize};

use crate::abc::{stream, PHASE_BP, PHASE_INIT};
use crate::datasets::{self, Dataset};
use crate::error::{Error, Result};
use crate::metrics::{self, IterationRecord, RunReport, TerminatedBy, TrainerConfig};
use crate::nn::{self, Architecture};
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BpMode {
    /// One update per row, rows visited in a fresh shuffled order each epoch.
    Online,
    /// One summed full-batch update per epoch ([`nn::bp_step`]).
    Batch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BpConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub mode: BpMode,
    pub stability_window: usize,
    pub seed: u64,
}

impl Default for BpConfig {
    fn default() -> Self {
        Self {
            epochs: 100,
            learning_rate: 0.5,
            mode: BpMode::Online,
            stability_window: metrics::DEFAULT_STABILITY_WINDOW,
            seed: 0,
        }
    }
}

/// Initial weights and biases, uniform in `[0, 1)`, drawn from the same
/// stream the first bee-colony source uses.
pub fn initial_params(arch: &Architecture, seed: u64) -> Vec<f64> {
    let mut rng = stream(seed, 0, PHASE_INIT, 0);
    (0..arch.param_count()).map(|_| rng.random::<f64>()).collect()
}

/// Runs `epochs` epochs. Each record describes the network after that
/// epoch; role counts are zero. The online order of epoch `e` comes from
/// `stream(seed, e, PHASE_BP, 0)`.
pub fn run_bp(
    cfg: &BpConfig,
    arch: &Architecture,
    data: &Dataset,
    sink: &mut dyn FnMut(&IterationRecord),
) -> Result<(RunReport, Vec<f64>)> {
    if cfg.epochs < 1 {
        return Err(Error::config("epochs must be >= 1"));
    }
    if !(cfg.learning_rate.is_finite() && cfg.learning_rate >= 0.0) {
        return Err(Error::config("learning rate must be finite and >= 0"));
    }
    if cfg.stability_window < 1 {
        return Err(Error::config("stability window must be >= 1"));
    }
    if data.is_empty() {
        return Err(Error::EmptyDataset(data.name().to_owned()));
    }
    let mut net = arch.network(&initial_params(arch, cfg.seed))?;
    let mut records = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        net = match cfg.mode {
            BpMode::Batch => nn::bp_step(&net, data, cfg.learning_rate)?,
            BpMode::Online => {
                let order = datasets::permutation(data.len(), stream(cfg.seed, epoch, PHASE_BP, 0).random());
                nn::bp_epoch_online(&net, data, cfg.learning_rate, &order)?
            }
        };
        let sse = nn::total_sse(&net, data)? / data.len() as f64;
        let rec = IterationRecord {
            cycle: epoch,
            sse_best: sse,
            sse_avg: sse,
            ccr_avg: metrics::correct_classification_rate(&net, data)?,
            n_employed: 0,
            n_scout: 0,
        };
        sink(&rec);
        records.push(rec);
    }
    let summary = metrics::summarize(&records, cfg.stability_window, TerminatedBy::Mcn)?;
    let report = RunReport {
        schema_version: metrics::SCHEMA_VERSION.to_owned(),
        dataset: data.info(),
        architecture: arch.clone(),
        config: TrainerConfig::Bp(cfg.clone()),
        invocation: Vec::new(),
        records,
        summary,
    };
    Ok((report, net.to_params()))
}
