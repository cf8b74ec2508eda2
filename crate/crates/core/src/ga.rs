//! Generational genetic algorithm over flattened network parameters, used
//! as the comparison baseline.
//!
//! Roulette selection on quality `1 / (1 + fitness)`, single-point
//! crossover, per-gene Gaussian mutation and elitism. Fitness and records
//! are the same as for the bee colony so curves line up.
//!
//! Each generation breeds from one ChaCha8 stream
//! (`abc::stream(seed, generation, PHASE_GA, 0)`). Per child pair the draw
//! order is: parent A, parent B, crossover coin, cut point (only when the
//! coin lands), then mutation of child A and of child B.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::abc::{evaluate_params, stream, Evaluation, PHASE_INIT};
use crate::datasets::Dataset;
use crate::error::{Error, Result};
use crate::metrics::{self, IterationRecord, RunReport, TerminatedBy, TrainerConfig};
use crate::nn::Architecture;

pub const PHASE_GA: u64 = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub population: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub mutation_sigma: f64,
    pub elitism: usize,
    pub divergence_cap: f64,
    pub stability_window: usize,
    pub seed: u64,
    #[serde(skip)]
    pub parallel: bool,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population: 10,
            generations: 100,
            crossover_rate: 0.9,
            mutation_rate: 0.01,
            mutation_sigma: 0.1,
            elitism: 1,
            divergence_cap: 1e6,
            stability_window: metrics::DEFAULT_STABILITY_WINDOW,
            seed: 0,
            parallel: false,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 1 {
            return Err(Error::config("population must be >= 1"));
        }
        if self.generations < 1 {
            return Err(Error::config("generations must be >= 1"));
        }
        if self.elitism >= self.population {
            return Err(Error::config("elitism must be smaller than the population"));
        }
        for (name, rate) in [("crossover", self.crossover_rate), ("mutation", self.mutation_rate)] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(Error::config(format!("{name} rate must be in [0, 1]")));
            }
        }
        if !(self.mutation_sigma.is_finite() && self.mutation_sigma >= 0.0) {
            return Err(Error::config("mutation sigma must be finite and >= 0"));
        }
        if self.stability_window < 1 {
            return Err(Error::config("stability window must be >= 1"));
        }
        Ok(())
    }
}

/// Roulette over non-negative weights; uniform when they sum to zero.
pub fn select_by_quality(quality: &[f64], rng: &mut impl Rng) -> usize {
    let total: f64 = quality.iter().sum();
    if !(total.is_finite() && total > 0.0) {
        return rng.random_range(0..quality.len());
    }
    let r = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &q) in quality.iter().enumerate() {
        if q > 0.0 {
            last_positive = i;
        }
        acc += q;
        if r < acc {
            return i;
        }
    }
    last_positive
}

/// Parent index, drawn proportionally to `1 / (1 + fitness)`.
pub fn ga_select(fitness: &[f64], rng: &mut impl Rng) -> usize {
    let quality: Vec<f64> = fitness.iter().map(|f| 1.0 / (1.0 + f)).collect();
    select_by_quality(&quality, rng)
}

/// Single-point crossover: with probability `crossover_rate` the suffixes
/// from a uniform cut in `1..len` are swapped.
pub fn ga_crossover(a: &[f64], b: &[f64], rng: &mut impl Rng, cfg: &GaConfig) -> Result<(Vec<f64>, Vec<f64>)> {
    if a.len() != b.len() {
        return Err(Error::shape(format!("parents have lengths {} and {}", a.len(), b.len())));
    }
    let mut ca = a.to_vec();
    let mut cb = b.to_vec();
    if rng.random::<f64>() < cfg.crossover_rate && a.len() >= 2 {
        let cut = rng.random_range(1..a.len());
        ca[cut..].copy_from_slice(&b[cut..]);
        cb[cut..].copy_from_slice(&a[cut..]);
    }
    Ok((ca, cb))
}

/// Each gene gets `N(0, mutation_sigma)` noise with probability
/// `mutation_rate`: one uniform draw per gene, then one normal draw for the
/// genes that mutate.
pub fn ga_mutate(params: &[f64], rng: &mut impl Rng, cfg: &GaConfig) -> Vec<f64> {
    let noise = Normal::new(0.0, cfg.mutation_sigma).expect("sigma validated");
    params
        .iter()
        .map(|&g| {
            if rng.random::<f64>() < cfg.mutation_rate {
                g + noise.sample(rng)
            } else {
                g
            }
        })
        .collect()
}

fn evaluate_all(pop: &[Vec<f64>], arch: &Architecture, data: &Dataset, cfg: &GaConfig) -> Result<Vec<Evaluation>> {
    let eval = |p: &Vec<f64>| evaluate_params(p, arch, data, cfg.divergence_cap);
    if cfg.parallel {
        pop.par_iter().map(eval).collect()
    } else {
        pop.iter().map(eval).collect()
    }
}

fn ranked(evals: &[Evaluation]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..evals.len()).collect();
    order.sort_by(|&a, &b| evals[a].fitness.total_cmp(&evals[b].fitness).then(a.cmp(&b)));
    order
}

fn record(generation: usize, evals: &[Evaluation]) -> IterationRecord {
    let n = evals.len() as f64;
    IterationRecord {
        cycle: generation,
        sse_best: evals.iter().map(|e| e.fitness).fold(f64::INFINITY, f64::min),
        sse_avg: evals.iter().map(|e| e.fitness).sum::<f64>() / n,
        ccr_avg: evals.iter().map(|e| e.ccr).sum::<f64>() / n,
        n_employed: 0,
        n_scout: 0,
    }
}

/// Evolves for `generations` generations; returns the report and the best
/// parameter vector of the final generation.
pub fn run_ga(
    cfg: &GaConfig,
    arch: &Architecture,
    data: &Dataset,
    sink: &mut dyn FnMut(&IterationRecord),
) -> Result<(RunReport, Vec<f64>)> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyDataset(data.name().to_owned()));
    }
    let len = arch.param_count();
    let mut pop: Vec<Vec<f64>> = (0..cfg.population)
        .map(|i| {
            let mut rng = stream(cfg.seed, 0, PHASE_INIT, i);
            (0..len).map(|_| rng.random::<f64>()).collect()
        })
        .collect();
    let mut evals = evaluate_all(&pop, arch, data, cfg)?;
    let mut records = Vec::with_capacity(cfg.generations);

    for generation in 1..=cfg.generations {
        let mut rng = stream(cfg.seed, generation, PHASE_GA, 0);
        let fitness: Vec<f64> = evals.iter().map(|e| e.fitness).collect();
        let order = ranked(&evals);

        let mut next: Vec<Vec<f64>> = order[..cfg.elitism].iter().map(|&i| pop[i].clone()).collect();
        let mut next_evals: Vec<Evaluation> = order[..cfg.elitism].iter().map(|&i| evals[i]).collect();
        let mut children = Vec::with_capacity(cfg.population - cfg.elitism);
        while children.len() < cfg.population - cfg.elitism {
            let a = ga_select(&fitness, &mut rng);
            let b = ga_select(&fitness, &mut rng);
            let (ca, cb) = ga_crossover(&pop[a], &pop[b], &mut rng, cfg)?;
            children.push(ga_mutate(&ca, &mut rng, cfg));
            if children.len() < cfg.population - cfg.elitism {
                children.push(ga_mutate(&cb, &mut rng, cfg));
            }
        }
        next_evals.extend(evaluate_all(&children, arch, data, cfg)?);
        next.extend(children);
        pop = next;
        evals = next_evals;

        let rec = record(generation, &evals);
        sink(&rec);
        records.push(rec);
    }

    let best = ranked(&evals)[0];
    let summary = metrics::summarize(&records, cfg.stability_window, TerminatedBy::Mcn)?;
    let report = RunReport {
        schema_version: metrics::SCHEMA_VERSION.to_owned(),
        dataset: data.info(),
        architecture: arch.clone(),
        config: TrainerConfig::Ga(cfg.clone()),
        invocation: Vec::new(),
        records,
        summary,
    };
    Ok((report, pop.swap_remove(best)))
}
