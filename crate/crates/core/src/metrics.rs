//! Classification rate, per-cycle records, run summaries and their on-disk
//! formats (a JSON report and a CSV curve table).

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::abc::AbcConfig;
use crate::bp::BpConfig;
use crate::datasets::{Dataset, DatasetInfo};
use crate::error::{Error, Result};
use crate::ga::GaConfig;
use crate::nn::{Architecture, Network};

pub const SCHEMA_VERSION: &str = "abcbp.run_report/1";
pub const CURVES_HEADER: &str = "cycle,sse_best,sse_avg,ccr_avg";
pub const DEFAULT_STABILITY_WINDOW: usize = 10;

/// Index of the largest entry; the lowest index wins ties.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Percentage of rows whose argmax output matches the argmax target.
pub fn correct_classification_rate(net: &Network, data: &Dataset) -> Result<f64> {
    if data.n_features() != net.input_width() || data.n_classes() != net.output_width() {
        return Err(Error::shape(format!(
            "dataset is {}->{} but network is {}->{}",
            data.n_features(),
            data.n_classes(),
            net.input_width(),
            net.output_width()
        )));
    }
    let mut correct = 0usize;
    for i in 0..data.len() {
        let p = net.predict(data.features_row(i))?;
        if argmax(&p) == data.label(i) {
            correct += 1;
        }
    }
    Ok(100.0 * correct as f64 / data.len() as f64)
}

/// One optimizer cycle (or GA generation, or BP epoch).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub cycle: usize,
    /// Lowest per-solution mean SSE in the population.
    pub sse_best: f64,
    /// Population average of per-solution mean SSE.
    pub sse_avg: f64,
    /// Population average of per-solution classification rate, percent.
    pub ccr_avg: f64,
    pub n_employed: usize,
    pub n_scout: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminatedBy {
    Threshold,
    Mcn,
}

/// Stable classification rate, or the marker for a run whose rate was
/// still moving over the final window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StableCcr {
    Stable(f64),
    NotStable,
}

const NOT_STABLE: &str = "not_stable";

impl StableCcr {
    pub fn value(self) -> Option<f64> {
        match self {
            StableCcr::Stable(v) => Some(v),
            StableCcr::NotStable => None,
        }
    }
}

impl Serialize for StableCcr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            StableCcr::Stable(v) => s.serialize_f64(*v),
            StableCcr::NotStable => s.serialize_str(NOT_STABLE),
        }
    }
}

impl<'de> Deserialize<'de> for StableCcr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(StableCcr::Stable(v)),
            Raw::Str(s) if s == NOT_STABLE => Ok(StableCcr::NotStable),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("unexpected ccr_stable value {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    /// `sse_avg` of the last record.
    pub final_sse: f64,
    /// `sse_best` of the last record.
    pub final_sse_best: f64,
    pub ccr_max: f64,
    pub ccr_min: f64,
    pub ccr_stable: StableCcr,
    pub stability_window: usize,
    pub cycles_run: usize,
    pub terminated_by: TerminatedBy,
    /// Classification rate of the best solution on held-out rows, when a
    /// split was requested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_ccr: Option<f64>,
}

/// Max/min/stable reduction of a run's records.
///
/// The rate is stable when `ccr_avg` is bit-identical over the last `window`
/// records; runs shorter than the window are never stable.
pub fn summarize(records: &[IterationRecord], window: usize, terminated_by: TerminatedBy) -> Result<Summary> {
    let last = records
        .last()
        .ok_or_else(|| Error::State("cannot summarize an empty run".into()))?;
    if window == 0 {
        return Err(Error::config("stability window must be >= 1"));
    }
    let ccr_max = records.iter().map(|r| r.ccr_avg).fold(f64::NEG_INFINITY, f64::max);
    let ccr_min = records.iter().map(|r| r.ccr_avg).fold(f64::INFINITY, f64::min);
    let ccr_stable = if records.len() >= window
        && records[records.len() - window..]
            .iter()
            .all(|r| r.ccr_avg.to_bits() == last.ccr_avg.to_bits())
    {
        StableCcr::Stable(last.ccr_avg)
    } else {
        StableCcr::NotStable
    };
    Ok(Summary {
        final_sse: last.sse_avg,
        final_sse_best: last.sse_best,
        ccr_max,
        ccr_min,
        ccr_stable,
        stability_window: window,
        cycles_run: records.len(),
        terminated_by,
        test_ccr: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algo {
    Abc,
    Ga,
    Bp,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::Abc => "abc",
            Algo::Ga => "ga",
            Algo::Bp => "bp",
        }
    }
}

/// Full parameter snapshot of the trainer that produced a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algo", rename_all = "snake_case")]
pub enum TrainerConfig {
    Abc(AbcConfig),
    Ga(GaConfig),
    Bp(BpConfig),
}

impl TrainerConfig {
    pub fn algo(&self) -> Algo {
        match self {
            TrainerConfig::Abc(_) => Algo::Abc,
            TrainerConfig::Ga(_) => Algo::Ga,
            TrainerConfig::Bp(_) => Algo::Bp,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: String,
    pub dataset: DatasetInfo,
    pub architecture: Architecture,
    pub config: TrainerConfig,
    /// Command line that produced the report, when run from the CLI.
    #[serde(default)]
    pub invocation: Vec<String>,
    pub records: Vec<IterationRecord>,
    pub summary: Summary,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|source| Error::Io {
            path: parent.to_owned(),
            source,
        })?;
    }
    std::fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

pub fn write_report(report: &RunReport, path: &Path) -> Result<()> {
    write_file(path, &report.to_json())
}

pub fn read_report(path: &Path) -> Result<RunReport> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    RunReport::from_json(&text).map_err(|source| Error::Json {
        path: path.to_owned(),
        source,
    })
}

pub fn curves_csv(records: &[IterationRecord]) -> String {
    let mut out = String::with_capacity(32 * (records.len() + 1));
    out.push_str(CURVES_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(out, "{},{},{},{}", r.cycle, r.sse_best, r.sse_avg, r.ccr_avg);
    }
    out
}

pub fn write_curves(records: &[IterationRecord], path: &Path) -> Result<()> {
    write_file(path, &curves_csv(records))
}

/// One row of a curves file.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct CurveRow {
    pub cycle: usize,
    pub sse_best: f64,
    pub sse_avg: f64,
    pub ccr_avg: f64,
}

pub fn read_curves(path: &Path) -> Result<Vec<CurveRow>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::Parse {
        path: path.to_owned(),
        line: 0,
        message: e.to_string(),
    })?;
    reader
        .deserialize()
        .map(|row| {
            row.map_err(|e| Error::Parse {
                path: path.to_owned(),
                line: e.position().map_or(0, |p| p.line() as usize),
                message: e.to_string(),
            })
        })
        .collect()
}
