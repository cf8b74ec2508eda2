//! Run orchestration shared by the `abcbp` binary and the Python bindings:
//! dataset resolution, single seeded runs and multi-seed comparison tables.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::abc::{self, AbcConfig};
use crate::bp::{self, BpConfig};
use crate::datasets::{self, Builtin, Dataset, DatasetSpec};
use crate::error::{Error, Result};
use crate::ga::{self, GaConfig};
use crate::metrics::{Algo, IterationRecord, RunReport, StableCcr};
use crate::nn::Architecture;

/// Environment variable naming the directory that holds the UCI files.
pub const DATA_DIR_ENV: &str = "ABCBP_DATA_DIR";

/// `$ABCBP_DATA_DIR`, or `data` in the working directory.
pub fn data_dir() -> PathBuf {
    std::env::var_os(DATA_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("data"))
}

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSource {
    Builtin(Builtin),
    File { path: PathBuf, spec: DatasetSpec },
}

impl DatasetSource {
    pub fn label(&self) -> String {
        match self {
            DatasetSource::Builtin(b) => b.name().to_owned(),
            DatasetSource::File { path, .. } => path.display().to_string(),
        }
    }

    pub fn load(&self, dir: &Path, normalize: bool) -> Result<Dataset> {
        match self {
            DatasetSource::Builtin(b) => datasets::load_builtin(*b, dir, normalize),
            DatasetSource::File { path, spec } => datasets::load_csv(path, &DatasetSpec { normalize, ..spec.clone() }),
        }
    }
}

/// Everything needed to train one network, minus the seed.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub algo: Algo,
    pub hidden: Vec<usize>,
    pub abc: AbcConfig,
    pub ga: GaConfig,
    pub bp: BpConfig,
    /// Fraction of rows held out for a test-set rate; `None` trains on all.
    pub split: Option<f64>,
    pub parallel: bool,
}

impl Default for RunSpec {
    fn default() -> Self {
        Self {
            algo: Algo::Abc,
            hidden: vec![5],
            abc: AbcConfig::default(),
            ga: GaConfig::default(),
            bp: BpConfig::default(),
            split: None,
            parallel: false,
        }
    }
}

impl RunSpec {
    pub fn architecture(&self, data: &Dataset) -> Result<Architecture> {
        Architecture::new(data.n_features(), &self.hidden, data.n_classes())
    }
}

/// Trains once with `seed`. With a split, the report's summary carries the
/// held-out rate of the best network.
pub fn run_once(
    spec: &RunSpec,
    data: &Dataset,
    seed: u64,
    sink: &mut dyn FnMut(&IterationRecord),
) -> Result<RunReport> {
    let (train, test) = match spec.split {
        Some(fraction) => {
            let (train, test) = data.split(fraction, seed)?;
            (train, Some(test))
        }
        None => (data.clone(), None),
    };
    let arch = spec.architecture(&train)?;
    let (mut report, params) = match spec.algo {
        Algo::Abc => {
            let cfg = AbcConfig {
                seed,
                parallel: spec.parallel,
                ..spec.abc.clone()
            };
            let (report, colony) = abc::run_with_colony(&cfg, &arch, &train, &mut |rec, _| sink(rec))?;
            (report, colony.best().params.clone())
        }
        Algo::Ga => {
            let cfg = GaConfig {
                seed,
                parallel: spec.parallel,
                ..spec.ga.clone()
            };
            ga::run_ga(&cfg, &arch, &train, sink)?
        }
        Algo::Bp => bp::run_bp(&BpConfig { seed, ..spec.bp.clone() }, &arch, &train, sink)?,
    };
    if let Some(test) = test {
        let net = arch.network(&params)?;
        report.summary.test_ccr = Some(crate::metrics::correct_classification_rate(&net, &test)?);
    }
    Ok(report)
}

/// Runs every seed; in parallel when `spec.parallel` is set. Reports come
/// back in seed order either way.
pub fn run_seeds(spec: &RunSpec, data: &Dataset, seeds: &[u64]) -> Result<Vec<RunReport>> {
    let one = |&seed: &u64| run_once(spec, data, seed, &mut |_| {});
    if spec.parallel {
        seeds.par_iter().map(one).collect()
    } else {
        seeds.iter().map(one).collect()
    }
}

/// One algorithm on one dataset across seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub dataset: String,
    pub algo: Algo,
    pub seeds: Vec<u64>,
    pub median_final_sse: f64,
    pub best_final_sse: f64,
    /// Seed of the run with the lowest final SSE; the rates below are its.
    pub best_seed: u64,
    pub ccr_max: f64,
    pub ccr_min: f64,
    pub ccr_stable: StableCcr,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub schema_version: String,
    pub rows: Vec<ComparisonRow>,
}

pub const COMPARISON_SCHEMA: &str = "abcbp.comparison/1";

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Folds the reports of one algorithm/dataset pair into a table row.
pub fn comparison_row(dataset: &str, algo: Algo, seeds: &[u64], reports: &[RunReport]) -> Result<ComparisonRow> {
    if seeds.is_empty() || seeds.len() != reports.len() {
        return Err(Error::config("comparison needs one report per seed and at least one seed"));
    }
    let sse: Vec<f64> = reports.iter().map(|r| r.summary.final_sse).collect();
    let mut best = 0;
    for (i, &v) in sse.iter().enumerate() {
        if v < sse[best] {
            best = i;
        }
    }
    let s = &reports[best].summary;
    Ok(ComparisonRow {
        dataset: dataset.to_owned(),
        algo,
        seeds: seeds.to_vec(),
        median_final_sse: median(&sse),
        best_final_sse: sse[best],
        best_seed: seeds[best],
        ccr_max: s.ccr_max,
        ccr_min: s.ccr_min,
        ccr_stable: s.ccr_stable,
    })
}

/// Every `algo x dataset` pair over `seeds`, datasets outermost.
pub fn compare(
    spec: &RunSpec,
    sources: &[DatasetSource],
    algos: &[Algo],
    seeds: &[u64],
    dir: &Path,
    normalize: bool,
) -> Result<Comparison> {
    if seeds.is_empty() {
        return Err(Error::config("at least one seed is required"));
    }
    let mut rows = Vec::new();
    for source in sources {
        let data = source.load(dir, normalize)?;
        for &algo in algos {
            let spec = RunSpec { algo, ..spec.clone() };
            let reports = run_seeds(&spec, &data, seeds)?;
            rows.push(comparison_row(&source.label(), algo, seeds, &reports)?);
        }
    }
    Ok(Comparison {
        schema_version: COMPARISON_SCHEMA.to_owned(),
        rows,
    })
}

fn stable_cell(s: StableCcr) -> String {
    match s {
        StableCcr::Stable(v) => format!("{v:.2}"),
        StableCcr::NotStable => "not stable".to_owned(),
    }
}

impl Comparison {
    /// Aligned text table, one line per row.
    pub fn render_table(&self) -> String {
        let header = ["dataset", "algo", "seeds", "median sse", "best sse", "max", "min", "stable"];
        let cells: Vec<[String; 8]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    r.dataset.clone(),
                    r.algo.name().to_owned(),
                    r.seeds.len().to_string(),
                    format!("{:.4}", r.median_final_sse),
                    format!("{:.4}", r.best_final_sse),
                    format!("{:.2}", r.ccr_max),
                    format!("{:.2}", r.ccr_min),
                    stable_cell(r.ccr_stable),
                ]
            })
            .collect();
        let mut width = header.map(str::len);
        for row in &cells {
            for (w, c) in width.iter_mut().zip(row) {
                *w = (*w).max(c.len());
            }
        }
        let mut out = String::new();
        let mut line = |row: Vec<&str>| {
            let parts: Vec<String> = row
                .iter()
                .zip(width)
                .enumerate()
                .map(|(i, (c, w))| if i < 2 { format!("{c:<w$}") } else { format!("{c:>w$}") })
                .collect();
            let _ = writeln!(out, "{}", parts.join("  ").trim_end());
        };
        line(header.to_vec());
        for row in &cells {
            line(row.iter().map(String::as_str).collect());
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("comparison serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blobs() -> Dataset {
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for i in 0..12 {
            let c = i % 3;
            features.push(vec![c as f64 + 0.05 * (i / 3) as f64, 1.0 - c as f64 * 0.4]);
            labels.push(c);
        }
        Dataset::from_labels("blobs", features, &labels, vec!["a".into(), "b".into(), "c".into()]).unwrap()
    }

    fn quick(algo: Algo) -> RunSpec {
        RunSpec {
            algo,
            hidden: vec![3],
            abc: AbcConfig {
                max_cycles: 5,
                ..AbcConfig::default()
            },
            ga: GaConfig {
                generations: 5,
                ..GaConfig::default()
            },
            bp: BpConfig {
                epochs: 5,
                ..BpConfig::default()
            },
            ..RunSpec::default()
        }
    }

    #[test]
    fn median_cases() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(median(&[0.7]), 0.7);
    }

    #[test]
    fn run_once_each_algo() {
        let data = blobs();
        for algo in [Algo::Abc, Algo::Ga, Algo::Bp] {
            let spec = quick(algo);
            let a = run_once(&spec, &data, 3, &mut |_| {}).unwrap();
            let b = run_once(&spec, &data, 3, &mut |_| {}).unwrap();
            assert_eq!(a.to_json(), b.to_json());
            assert_eq!(a.config.algo(), algo);
            assert_eq!(a.summary.test_ccr, None);
        }
    }

    #[test]
    fn split_reports_test_rate() {
        let spec = RunSpec {
            split: Some(0.25),
            ..quick(Algo::Abc)
        };
        let report = run_once(&spec, &blobs(), 1, &mut |_| {}).unwrap();
        assert_eq!(report.dataset.rows, 9);
        let rate = report.summary.test_ccr.unwrap();
        assert!((0.0..=100.0).contains(&rate));
    }

    #[test]
    fn parallel_seeds_match_sequential() {
        let data = blobs();
        let seq = run_seeds(&quick(Algo::Abc), &data, &[0, 1, 2]).unwrap();
        let par = run_seeds(
            &RunSpec {
                parallel: true,
                ..quick(Algo::Abc)
            },
            &data,
            &[0, 1, 2],
        )
        .unwrap();
        let json = |r: &Vec<RunReport>| r.iter().map(RunReport::to_json).collect::<Vec<_>>();
        assert_eq!(json(&seq), json(&par));
    }

    #[test]
    fn identical_seeds_give_median_equal_best() {
        let data = blobs();
        let spec = quick(Algo::Ga);
        let reports = run_seeds(&spec, &data, &[4, 4, 4]).unwrap();
        let row = comparison_row("blobs", Algo::Ga, &[4, 4, 4], &reports).unwrap();
        assert_eq!(row.median_final_sse, row.best_final_sse);
        assert_eq!(row.best_seed, 4);
    }

    #[test]
    fn table_has_one_line_per_row() {
        let data = blobs();
        let rows = [Algo::Abc, Algo::Ga]
            .iter()
            .map(|&algo| {
                let reports = run_seeds(&quick(algo), &data, &[0]).unwrap();
                comparison_row("blobs", algo, &[0], &reports).unwrap()
            })
            .collect();
        let cmp = Comparison {
            schema_version: COMPARISON_SCHEMA.to_owned(),
            rows,
        };
        let table = cmp.render_table();
        assert_eq!(table.lines().count(), 3);
        assert!(table.lines().next().unwrap().starts_with("dataset"));
        let back: Comparison = serde_json::from_str(&cmp.to_json()).unwrap();
        assert_eq!(back, cmp);
    }

    #[test]
    fn row_needs_seeds() {
        assert!(comparison_row("x", Algo::Abc, &[], &[]).is_err());
    }
}
