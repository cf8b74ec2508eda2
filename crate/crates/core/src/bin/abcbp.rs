//! Command-line driver: single runs and multi-seed comparison tables.
//!
//! Exit codes: 0 success, 1 configuration or usage error, 2 data or I/O
//! error, 3 numeric failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use abcbp::abc::{ProbMode, ScoutPolicy, StepMode};
use abcbp::bp::BpMode;
use abcbp::datasets::{Builtin, Column, DatasetSpec};
use abcbp::experiment::{self, DatasetSource, RunSpec};
use abcbp::metrics::{self, Algo, RunReport, StableCcr};
use abcbp::{AbcConfig, BpConfig, Error, GaConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "abcbp", version, about = "Train feed-forward networks with an artificial bee colony, GA or plain BP")]
#[command(args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    #[command(flatten)]
    run: RunArgs,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run several algorithms over several datasets and seeds and print a
    /// summary table.
    Compare(CompareArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Builtin dataset (iris, wine, glass, soybean) or a path to a delimited file.
    #[arg(long, default_value = "iris")]
    dataset: String,

    #[arg(long, value_enum, default_value_t = AlgoArg::Abc)]
    algo: AlgoArg,

    /// Single seed; ignored when --seeds is given.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Comma-separated seeds or a half-open range such as 0..5.
    #[arg(long)]
    seeds: Option<String>,

    /// Report path. With several seeds, `-seed<N>` is inserted before the extension.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Curves CSV path, named like --out.
    #[arg(long)]
    curves: Option<PathBuf>,

    #[command(flatten)]
    train: TrainArgs,
}

#[derive(Args, Debug)]
struct CompareArgs {
    /// Comma-separated builtin names or file paths.
    #[arg(long, default_value = "iris")]
    datasets: String,

    #[arg(long, value_enum, value_delimiter = ',', default_value = "abc,ga")]
    algos: Vec<AlgoArg>,

    #[arg(long, default_value = "0..5")]
    seeds: String,

    /// Structured comparison file.
    #[arg(long)]
    out: Option<PathBuf>,

    #[command(flatten)]
    train: TrainArgs,
}

#[derive(Args, Debug)]
struct TrainArgs {
    /// Population size (bee colony and GA).
    #[arg(long, default_value_t = 10)]
    pop: usize,

    /// Cycle budget; also the GA generation count and BP epoch count.
    #[arg(long, default_value_t = 100)]
    mcn: usize,

    /// Learning rate for plain BP and the hybrid BP epochs.
    #[arg(long, default_value_t = 0.5)]
    lr: f64,

    /// Stop once the average classification rate (percent) exceeds this.
    #[arg(long, default_value_t = 95.0)]
    threshold: f64,

    /// Hidden layer sizes, comma-separated.
    #[arg(long, value_delimiter = ',', default_value = "5")]
    hidden: Vec<usize>,

    #[arg(long, value_enum, default_value_t = StepModeArg::Stochastic)]
    step_mode: StepModeArg,

    #[arg(long, value_enum, default_value_t = ProbModeArg::Classic)]
    prob_mode: ProbModeArg,

    #[arg(long, value_enum, default_value_t = ScoutPolicyArg::Greedy)]
    scout_policy: ScoutPolicyArg,

    /// Give every worked food source one BP epoch per cycle.
    #[arg(long)]
    hybrid_bp: bool,

    #[arg(long, default_value_t = 1e6)]
    divergence_cap: f64,

    /// Cycles the rate must hold to count as stable.
    #[arg(long, default_value_t = metrics::DEFAULT_STABILITY_WINDOW)]
    stability_window: usize,

    #[arg(long, value_enum, default_value_t = BpModeArg::Online)]
    bp_mode: BpModeArg,

    #[arg(long, default_value_t = 0.9)]
    crossover_rate: f64,

    #[arg(long, default_value_t = 0.01)]
    mutation_rate: f64,

    #[arg(long, default_value_t = 0.1)]
    mutation_sigma: f64,

    #[arg(long, default_value_t = 1)]
    elitism: usize,

    /// Hold out this fraction of rows and report the test-set rate.
    #[arg(long)]
    split: Option<f64>,

    /// Evaluate candidates and seeds on all cores; output is unchanged.
    #[arg(long)]
    parallel: bool,

    /// Keep raw feature values instead of min-max scaling them.
    #[arg(long)]
    no_normalize: bool,

    /// Directory holding the UCI files [default: $ABCBP_DATA_DIR or ./data].
    #[arg(long)]
    data_dir: Option<PathBuf>,

    /// Class column of a file dataset: first, last or a 0-based index.
    #[arg(long, default_value = "last")]
    class_column: String,

    /// Columns of a file dataset to drop, comma-separated.
    #[arg(long, value_delimiter = ',')]
    id_columns: Vec<String>,

    #[arg(long, default_value = ",")]
    delimiter: String,

    /// The file dataset starts with a header line.
    #[arg(long)]
    header: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum AlgoArg {
    Abc,
    Ga,
    Bp,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum StepModeArg {
    Stochastic,
    Literal,
    Off,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ProbModeArg {
    Classic,
    Literal,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ScoutPolicyArg {
    Greedy,
    Replace,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum BpModeArg {
    Online,
    Batch,
}

impl From<AlgoArg> for Algo {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Abc => Algo::Abc,
            AlgoArg::Ga => Algo::Ga,
            AlgoArg::Bp => Algo::Bp,
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

/// Loads a dataset, pointing at the fetch script when a UCI file is missing.
fn load(source: &DatasetSource, t: &TrainArgs) -> Result<abcbp::Dataset, Failure> {
    source.load(&data_dir(t), !t.no_normalize).map_err(|e| {
        let missing = matches!(&e, Error::Io { source: io, .. } if io.kind() == std::io::ErrorKind::NotFound);
        let mut f = Failure::from(e);
        if missing && matches!(source, DatasetSource::Builtin(_)) {
            f.message.push_str(" (run scripts/fetch_data.sh, or point --data-dir / ABCBP_DATA_DIR at the UCI files)");
        }
        f
    })
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config(_) | Error::InputShape(_) | Error::State(_) => 1,
            Error::Parse { .. } | Error::EmptyDataset(_) | Error::Io { .. } | Error::Json { .. } => 2,
            Error::NumericOverflow(_) => 3,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn config_error(message: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        message: message.into(),
    }
}

fn parse_seeds(text: &str) -> Result<Vec<u64>, Failure> {
    let bad = || config_error(format!("invalid seed list {text:?}"));
    let seeds: Vec<u64> = if let Some((a, b)) = text.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().parse().map_err(|_| bad())?;
        (a..b).collect()
    } else {
        text.split(',')
            .map(|s| s.trim().parse().map_err(|_| bad()))
            .collect::<Result<_, _>>()?
    };
    if seeds.is_empty() {
        return Err(config_error("at least one seed is required"));
    }
    Ok(seeds)
}

fn source(name: &str, train: &TrainArgs) -> Result<DatasetSource, Failure> {
    if let Ok(builtin) = name.parse::<Builtin>() {
        return Ok(DatasetSource::Builtin(builtin));
    }
    let path = Path::new(name);
    if !path.is_file() {
        return Err(config_error(format!(
            "unknown dataset {name:?}; valid choices: iris, wine, glass, soybean, or a path to a file"
        )));
    }
    let delimiter = match train.delimiter.as_str() {
        "\\t" | "tab" => b'\t',
        d if d.len() == 1 => d.as_bytes()[0],
        d => return Err(config_error(format!("delimiter must be one byte, got {d:?}"))),
    };
    Ok(DatasetSource::File {
        path: path.to_owned(),
        spec: DatasetSpec {
            class_column: train.class_column.parse::<Column>()?,
            id_columns: train
                .id_columns
                .iter()
                .map(|c| c.parse::<Column>())
                .collect::<abcbp::Result<_>>()?,
            delimiter,
            header: train.header,
            normalize: !train.no_normalize,
        },
    })
}

fn run_spec(algo: Algo, t: &TrainArgs) -> Result<RunSpec, Failure> {
    let abc = AbcConfig {
        population: t.pop,
        max_cycles: t.mcn,
        learning_rate: t.lr,
        ccr_threshold: t.threshold,
        step_mode: match t.step_mode {
            StepModeArg::Stochastic => StepMode::Stochastic,
            StepModeArg::Literal => StepMode::Literal,
            StepModeArg::Off => StepMode::Off,
        },
        prob_mode: match t.prob_mode {
            ProbModeArg::Classic => ProbMode::Classic,
            ProbModeArg::Literal => ProbMode::Literal,
        },
        scout_policy: match t.scout_policy {
            ScoutPolicyArg::Greedy => ScoutPolicy::Greedy,
            ScoutPolicyArg::Replace => ScoutPolicy::Replace,
        },
        hybrid_bp: t.hybrid_bp,
        divergence_cap: t.divergence_cap,
        stability_window: t.stability_window,
        ..AbcConfig::default()
    };
    let ga = GaConfig {
        population: t.pop,
        generations: t.mcn,
        crossover_rate: t.crossover_rate,
        mutation_rate: t.mutation_rate,
        mutation_sigma: t.mutation_sigma,
        elitism: t.elitism,
        divergence_cap: t.divergence_cap,
        stability_window: t.stability_window,
        ..GaConfig::default()
    };
    let bp = BpConfig {
        epochs: t.mcn,
        learning_rate: t.lr,
        mode: match t.bp_mode {
            BpModeArg::Online => BpMode::Online,
            BpModeArg::Batch => BpMode::Batch,
        },
        stability_window: t.stability_window,
        ..BpConfig::default()
    };
    // Validate up front so a bad flag fails before any data is touched.
    match algo {
        Algo::Abc => abc.validate()?,
        Algo::Ga => ga.validate()?,
        Algo::Bp => {}
    }
    Ok(RunSpec {
        algo,
        hidden: t.hidden.clone(),
        abc,
        ga,
        bp,
        split: t.split,
        parallel: t.parallel,
    })
}

/// `path` itself for a single seed, else `stem-seed<N>.ext`.
fn seeded_path(path: &Path, seed: u64, many: bool) -> PathBuf {
    if !many {
        return path.to_owned();
    }
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}-seed{seed}.{}", ext.to_string_lossy()),
        None => format!("{stem}-seed{seed}"),
    };
    path.with_file_name(name)
}

fn summary_line(dataset: &str, seed: u64, report: &RunReport) -> String {
    let s = &report.summary;
    let stable = match s.ccr_stable {
        StableCcr::Stable(v) => format!("{v:.2}"),
        StableCcr::NotStable => "not_stable".to_owned(),
    };
    let mut line = format!(
        "{dataset} {} seed={seed} cycles={} terminated_by={} final_sse={:.6} ccr_max={:.2} ccr_min={:.2} ccr_stable={stable}",
        report.config.algo().name(),
        s.cycles_run,
        match s.terminated_by {
            metrics::TerminatedBy::Threshold => "threshold",
            metrics::TerminatedBy::Mcn => "mcn",
        },
        s.final_sse,
        s.ccr_max,
        s.ccr_min,
    );
    if let Some(t) = s.test_ccr {
        line.push_str(&format!(" test_ccr={t:.2}"));
    }
    line
}

fn data_dir(t: &TrainArgs) -> PathBuf {
    t.data_dir.clone().unwrap_or_else(experiment::data_dir)
}

fn run(args: RunArgs, invocation: Vec<String>) -> Result<(), Failure> {
    let seeds = match &args.seeds {
        Some(s) => parse_seeds(s)?,
        None => vec![args.seed],
    };
    let spec = run_spec(args.algo.into(), &args.train)?;
    let source = source(&args.dataset, &args.train)?;
    let data = load(&source, &args.train)?;
    let label = match &source {
        DatasetSource::Builtin(b) => b.name().to_owned(),
        DatasetSource::File { .. } => data.name().to_owned(),
    };
    let reports = experiment::run_seeds(&spec, &data, &seeds)?;
    let many = seeds.len() > 1;
    let algo = spec.algo.name();
    for (&seed, mut report) in seeds.iter().zip(reports) {
        report.invocation = invocation.clone();
        let out = args
            .out
            .clone()
            .unwrap_or_else(|| PathBuf::from(format!("results/{label}-{algo}.json")));
        let curves = args
            .curves
            .clone()
            .unwrap_or_else(|| PathBuf::from(format!("results/{label}-{algo}.csv")));
        metrics::write_report(&report, &seeded_path(&out, seed, many))?;
        metrics::write_curves(&report.records, &seeded_path(&curves, seed, many))?;
        println!("{}", summary_line(&label, seed, &report));
    }
    Ok(())
}

fn compare(args: CompareArgs) -> Result<(), Failure> {
    let seeds = parse_seeds(&args.seeds)?;
    let algos: Vec<Algo> = args.algos.iter().map(|&a| a.into()).collect();
    if algos.is_empty() {
        return Err(config_error("at least one algorithm is required"));
    }
    for &algo in &algos {
        run_spec(algo, &args.train)?;
    }
    let spec = run_spec(algos[0], &args.train)?;
    let sources = args
        .datasets
        .split(',')
        .map(|name| source(name.trim(), &args.train))
        .collect::<Result<Vec<_>, _>>()?;
    for source in &sources {
        load(source, &args.train)?;
    }
    let cmp = experiment::compare(
        &spec,
        &sources,
        &algos,
        &seeds,
        &data_dir(&args.train),
        !args.train.no_normalize,
    )?;
    print!("{}", cmp.render_table());
    let out = args.out.unwrap_or_else(|| PathBuf::from("results/comparison.json"));
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|source| Error::Io {
            path: parent.to_owned(),
            source,
        })?;
    }
    std::fs::write(&out, cmp.to_json()).map_err(|source| Error::Io { path: out, source })?;
    Ok(())
}

fn main() -> ExitCode {
    let invocation: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Some(Command::Compare(args)) => compare(args),
        None => run(cli.run, invocation),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
