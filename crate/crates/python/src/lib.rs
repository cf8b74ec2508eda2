//! Python bindings for `abcbp`.
//!
//! Reports come back as plain dicts (the same document the CLI writes).

use std::path::PathBuf;

use abcbp::abc::{self, AbcConfig, ProbMode, ScoutPolicy, StepMode};
use abcbp::bp::{BpConfig, BpMode};
use abcbp::datasets::{self, Builtin, Column, DatasetSpec};
use abcbp::experiment::{self, DatasetSource, RunSpec};
use abcbp::metrics::{self, Algo};
use abcbp::nn::{self, Architecture};
use abcbp::{Error, GaConfig};
use pyo3::exceptions::{PyArithmeticError, PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: Error) -> PyErr {
    let msg = e.to_string();
    match e {
        Error::NumericOverflow(_) => PyArithmeticError::new_err(msg),
        Error::Io { .. } => PyOSError::new_err(msg),
        Error::State(_) => PyRuntimeError::new_err(msg),
        _ => PyValueError::new_err(msg),
    }
}

fn parse<T>(value: &str, what: &str, choices: &[(&str, T)]) -> PyResult<T>
where
    T: Copy,
{
    choices
        .iter()
        .find(|(name, _)| *name == value)
        .map(|(_, v)| *v)
        .ok_or_else(|| {
            let names: Vec<&str> = choices.iter().map(|(n, _)| *n).collect();
            PyValueError::new_err(format!("unknown {what} {value:?}; valid choices: {}", names.join(", ")))
        })
}

fn json_to_py<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

/// A classification dataset with one-hot targets.
#[pyclass(name = "Dataset", module = "abcbp_py", from_py_object)]
#[derive(Clone)]
struct PyDataset {
    inner: datasets::Dataset,
}

#[pymethods]
impl PyDataset {
    /// Loads one of the builtin UCI files (iris, wine, glass, soybean) from
    /// `data_dir`, defaulting to `$ABCBP_DATA_DIR` or `./data`.
    #[staticmethod]
    #[pyo3(signature = (name, data_dir=None, normalize=true))]
    fn load(name: &str, data_dir: Option<PathBuf>, normalize: bool) -> PyResult<Self> {
        let builtin: Builtin = name.parse().map_err(to_py)?;
        let dir = data_dir.unwrap_or_else(experiment::data_dir);
        let inner = datasets::load_builtin(builtin, &dir, normalize).map_err(to_py)?;
        Ok(Self { inner })
    }

    /// Loads a delimited file. Columns are `"first"`, `"last"` or an index.
    #[staticmethod]
    #[pyo3(signature = (path, class_column="last", id_columns=Vec::new(), delimiter=",", header=false, normalize=true))]
    fn from_csv(
        path: PathBuf,
        class_column: &str,
        id_columns: Vec<String>,
        delimiter: &str,
        header: bool,
        normalize: bool,
    ) -> PyResult<Self> {
        if delimiter.len() != 1 {
            return Err(PyValueError::new_err("delimiter must be a single byte"));
        }
        let spec = DatasetSpec {
            class_column: class_column.parse::<Column>().map_err(to_py)?,
            id_columns: id_columns
                .iter()
                .map(|c| c.parse::<Column>())
                .collect::<abcbp::Result<_>>()
                .map_err(to_py)?,
            delimiter: delimiter.as_bytes()[0],
            header,
            normalize,
        };
        let inner = datasets::load_csv(&path, &spec).map_err(to_py)?;
        Ok(Self { inner })
    }

    /// Builds a dataset from feature rows and integer labels.
    #[staticmethod]
    #[pyo3(signature = (features, labels, class_names=None, name="data"))]
    fn from_labels(
        features: Vec<Vec<f64>>,
        labels: Vec<usize>,
        class_names: Option<Vec<String>>,
        name: &str,
    ) -> PyResult<Self> {
        let class_names = class_names.unwrap_or_else(|| {
            let n = labels.iter().copied().max().map_or(0, |m| m + 1);
            (0..n).map(|c| c.to_string()).collect()
        });
        let inner = datasets::Dataset::from_labels(name, features, &labels, class_names).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name().to_owned()
    }

    #[getter]
    fn n_features(&self) -> usize {
        self.inner.n_features()
    }

    #[getter]
    fn n_classes(&self) -> usize {
        self.inner.n_classes()
    }

    #[getter]
    fn class_names(&self) -> Vec<String> {
        self.inner.class_names().to_vec()
    }

    #[getter]
    fn class_counts(&self) -> Vec<usize> {
        self.inner.class_counts()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset({:?}, rows={}, features={}, classes={})",
            self.inner.name(),
            self.inner.len(),
            self.inner.n_features(),
            self.inner.n_classes()
        )
    }

    fn features(&self, row: usize) -> PyResult<Vec<f64>> {
        self.check_row(row)?;
        Ok(self.inner.features_row(row).to_vec())
    }

    fn target(&self, row: usize) -> PyResult<Vec<f64>> {
        self.check_row(row)?;
        Ok(self.inner.target_row(row).to_vec())
    }

    fn label(&self, row: usize) -> PyResult<usize> {
        self.check_row(row)?;
        Ok(self.inner.label(row))
    }

    /// `(train, test)` after a seeded shuffle.
    fn split(&self, test_fraction: f64, seed: u64) -> PyResult<(Self, Self)> {
        let (train, test) = self.inner.split(test_fraction, seed).map_err(to_py)?;
        Ok((Self { inner: train }, Self { inner: test }))
    }
}

impl PyDataset {
    fn check_row(&self, row: usize) -> PyResult<()> {
        if row < self.inner.len() {
            Ok(())
        } else {
            Err(PyValueError::new_err(format!("row {row} out of range")))
        }
    }
}

/// Layered feed-forward network with logistic units.
#[pyclass(name = "Network", module = "abcbp_py", from_py_object)]
#[derive(Clone)]
struct PyNetwork {
    arch: Architecture,
    inner: nn::Network,
}

#[pymethods]
impl PyNetwork {
    /// Without `params`, weights are drawn uniformly from [0, 1) with `seed`.
    #[new]
    #[pyo3(signature = (inputs, hidden, outputs, params=None, seed=0))]
    fn new(inputs: usize, hidden: Vec<usize>, outputs: usize, params: Option<Vec<f64>>, seed: u64) -> PyResult<Self> {
        let arch = Architecture::new(inputs, &hidden, outputs).map_err(to_py)?;
        let params = params.unwrap_or_else(|| abcbp::bp::initial_params(&arch, seed));
        let inner = arch.network(&params).map_err(to_py)?;
        Ok(Self { arch, inner })
    }

    #[getter]
    fn param_count(&self) -> usize {
        self.inner.param_count()
    }

    /// Flattened parameters: layer by layer, weights row-major, then biases.
    #[getter]
    fn params(&self) -> Vec<f64> {
        self.inner.to_params()
    }

    fn predict(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.predict(&x).map_err(to_py)
    }

    /// Summed squared error over every row.
    fn sse(&self, data: &PyDataset) -> PyResult<f64> {
        nn::total_sse(&self.inner, &data.inner).map_err(to_py)
    }

    fn ccr(&self, data: &PyDataset) -> PyResult<f64> {
        metrics::correct_classification_rate(&self.inner, &data.inner).map_err(to_py)
    }

    fn gradient(&self, data: &PyDataset) -> PyResult<Vec<f64>> {
        nn::gradient(&self.inner, &data.inner).map_err(to_py)
    }

    /// One full-batch gradient step; returns a new network.
    fn bp_step(&self, data: &PyDataset, eta: f64) -> PyResult<Self> {
        let inner = nn::bp_step(&self.inner, &data.inner, eta).map_err(to_py)?;
        Ok(Self {
            arch: self.arch.clone(),
            inner,
        })
    }

    fn __repr__(&self) -> String {
        let sizes: Vec<String> = std::iter::once(self.inner.input_width())
            .chain(self.inner.layers().iter().map(|l| l.neurons()))
            .map(|s| s.to_string())
            .collect();
        format!("Network({})", sizes.join("-"))
    }
}

/// Bee movement step between the best fitness and a source's fitness.
#[pyfunction]
#[pyo3(signature = (f_best, f_j, epsilon=1e-12))]
fn move_bee(f_best: f64, f_j: f64, epsilon: f64) -> PyResult<f64> {
    if !(f_best.is_finite() && f_j.is_finite() && f_best >= 0.0 && f_j >= 0.0) {
        return Err(PyValueError::new_err("fitness values must be finite and >= 0"));
    }
    Ok(abc::move_bee(f_best, f_j, epsilon))
}

#[pyfunction]
fn classic_move(v: f64, neighbor: f64, r: f64) -> f64 {
    abc::classic_move(v, neighbor, r)
}

/// Onlooker selection probabilities; `mode` is `"classic"` or `"literal"`.
#[pyfunction]
#[pyo3(signature = (fitness, mode="classic", epsilon=1e-12))]
fn selection_probabilities(fitness: Vec<f64>, mode: &str, epsilon: f64) -> PyResult<Vec<f64>> {
    let mode = parse(mode, "probability mode", &[("classic", ProbMode::Classic), ("literal", ProbMode::Literal)])?;
    Ok(abc::probabilities_from_fitness(&fitness, mode, epsilon))
}

/// Training options shared by `run` and `compare`; mirrors the CLI flags.
#[allow(clippy::too_many_arguments)]
fn run_spec(
    algo: &str,
    hidden: Vec<usize>,
    population: usize,
    max_cycles: usize,
    learning_rate: f64,
    threshold: f64,
    step_mode: &str,
    prob_mode: &str,
    scout_policy: &str,
    hybrid_bp: bool,
    bp_mode: &str,
    crossover_rate: f64,
    mutation_rate: f64,
    mutation_sigma: f64,
    elitism: usize,
    stability_window: usize,
    split: Option<f64>,
    parallel: bool,
) -> PyResult<RunSpec> {
    let algo = parse(algo, "algorithm", &[("abc", Algo::Abc), ("ga", Algo::Ga), ("bp", Algo::Bp)])?;
    let abc = AbcConfig {
        population,
        max_cycles,
        learning_rate,
        ccr_threshold: threshold,
        step_mode: parse(
            step_mode,
            "step mode",
            &[("stochastic", StepMode::Stochastic), ("literal", StepMode::Literal), ("off", StepMode::Off)],
        )?,
        prob_mode: parse(prob_mode, "probability mode", &[("classic", ProbMode::Classic), ("literal", ProbMode::Literal)])?,
        scout_policy: parse(
            scout_policy,
            "scout policy",
            &[("greedy", ScoutPolicy::Greedy), ("replace", ScoutPolicy::Replace)],
        )?,
        hybrid_bp,
        stability_window,
        ..AbcConfig::default()
    };
    let ga = GaConfig {
        population,
        generations: max_cycles,
        crossover_rate,
        mutation_rate,
        mutation_sigma,
        elitism,
        stability_window,
        ..GaConfig::default()
    };
    let bp = BpConfig {
        epochs: max_cycles,
        learning_rate,
        mode: parse(bp_mode, "bp mode", &[("online", BpMode::Online), ("batch", BpMode::Batch)])?,
        stability_window,
        ..BpConfig::default()
    };
    Ok(RunSpec {
        algo,
        hidden,
        abc,
        ga,
        bp,
        split,
        parallel,
    })
}

/// Trains once and returns the run report as a dict.
#[pyfunction]
#[pyo3(signature = (
    data, algo="abc", seed=0, hidden=vec![5], population=10, max_cycles=100, learning_rate=0.5,
    threshold=95.0, step_mode="stochastic", prob_mode="classic", scout_policy="greedy",
    hybrid_bp=false, bp_mode="online", crossover_rate=0.9, mutation_rate=0.01,
    mutation_sigma=0.1, elitism=1, stability_window=10, split=None, parallel=false
))]
#[allow(clippy::too_many_arguments)]
fn run<'py>(
    py: Python<'py>,
    data: &PyDataset,
    algo: &str,
    seed: u64,
    hidden: Vec<usize>,
    population: usize,
    max_cycles: usize,
    learning_rate: f64,
    threshold: f64,
    step_mode: &str,
    prob_mode: &str,
    scout_policy: &str,
    hybrid_bp: bool,
    bp_mode: &str,
    crossover_rate: f64,
    mutation_rate: f64,
    mutation_sigma: f64,
    elitism: usize,
    stability_window: usize,
    split: Option<f64>,
    parallel: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let spec = run_spec(
        algo,
        hidden,
        population,
        max_cycles,
        learning_rate,
        threshold,
        step_mode,
        prob_mode,
        scout_policy,
        hybrid_bp,
        bp_mode,
        crossover_rate,
        mutation_rate,
        mutation_sigma,
        elitism,
        stability_window,
        split,
        parallel,
    )?;
    let report = py
        .detach(|| experiment::run_once(&spec, &data.inner, seed, &mut |_| {}))
        .map_err(to_py)?;
    json_to_py(py, &report.to_json())
}

/// Runs `algos` x `datasets` (builtin names) over `seeds`; returns the
/// comparison document as a dict with the text table under `"table"`.
#[pyfunction]
#[pyo3(signature = (
    datasets, algos=vec!["abc".to_owned(), "ga".to_owned()], seeds=vec![0, 1, 2, 3, 4], data_dir=None,
    normalize=true, hidden=vec![5], population=10, max_cycles=100, learning_rate=0.5,
    threshold=95.0, hybrid_bp=false, parallel=false
))]
#[allow(clippy::too_many_arguments)]
fn compare<'py>(
    py: Python<'py>,
    datasets: Vec<String>,
    algos: Vec<String>,
    seeds: Vec<u64>,
    data_dir: Option<PathBuf>,
    normalize: bool,
    hidden: Vec<usize>,
    population: usize,
    max_cycles: usize,
    learning_rate: f64,
    threshold: f64,
    hybrid_bp: bool,
    parallel: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let sources = datasets
        .iter()
        .map(|name| name.parse::<Builtin>().map(DatasetSource::Builtin))
        .collect::<abcbp::Result<Vec<_>>>()
        .map_err(to_py)?;
    let algos = algos
        .iter()
        .map(|a| parse(a.as_str(), "algorithm", &[("abc", Algo::Abc), ("ga", Algo::Ga), ("bp", Algo::Bp)]))
        .collect::<PyResult<Vec<_>>>()?;
    let spec = run_spec(
        "abc",
        hidden,
        population,
        max_cycles,
        learning_rate,
        threshold,
        "stochastic",
        "classic",
        "greedy",
        hybrid_bp,
        "online",
        0.9,
        0.01,
        0.1,
        1,
        metrics::DEFAULT_STABILITY_WINDOW,
        None,
        parallel,
    )?;
    let dir = data_dir.unwrap_or_else(experiment::data_dir);
    let cmp = py
        .detach(|| experiment::compare(&spec, &sources, &algos, &seeds, &dir, normalize))
        .map_err(to_py)?;
    let doc = json_to_py(py, &cmp.to_json())?;
    doc.cast::<PyDict>()?.set_item("table", cmp.render_table())?;
    Ok(doc)
}

#[pymodule]
fn abcbp_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDataset>()?;
    m.add_class::<PyNetwork>()?;
    m.add_function(wrap_pyfunction!(move_bee, m)?)?;
    m.add_function(wrap_pyfunction!(classic_move, m)?)?;
    m.add_function(wrap_pyfunction!(selection_probabilities, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add("SCHEMA_VERSION", metrics::SCHEMA_VERSION)?;
    Ok(())
}
