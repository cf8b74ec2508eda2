//! Bee-colony training of network parameters.
//!
//! Every food source is one flattened parameter vector whose fitness is the
//! mean per-row squared error of the network it encodes (lower is richer).
//! One cycle runs, in order:
//!
//! 1. scouts explore fresh random vectors drawn like the initial population;
//! 2. every employed bee moves its own source by the fitness-driven step of
//!    [`move_bee`], applied through [`apply_move`];
//! 3. onlooker bees pick sources by [`selection_probabilities`] and move them
//!    the same way;
//! 4. optionally (`hybrid_bp`) every source a bee worked this cycle (held by
//!    an employed or onlooker bee, or replaced by a scout) takes one online
//!    back-propagation epoch over the rows in a shuffled order, again kept
//!    only if it improves the source.
//!
//! Each candidate passes [`greedy_retain_or_revert`], so a source is only
//! replaced by a strictly better one. After the cycle the role counts react
//! to whether the population-average fitness improved ([`adjust_roles`]),
//! and the run stops once the average classification rate exceeds the
//! threshold or the cycle budget is spent.
//!
//! # Random streams
//!
//! All draws come from ChaCha8 streams keyed by `(seed, stream id)`, where
//! the id packs `cycle << 32 | phase << 24 | slot`. Phases are
//! [`PHASE_INIT`], [`PHASE_SCOUT`], [`PHASE_EMPLOYED`], [`PHASE_SELECT`],
//! [`PHASE_ONLOOKER`] and [`PHASE_BP`]; the slot is the solution index (or the onlooker
//! number). Because each candidate owns its stream, evaluating candidates in
//! parallel cannot change the sequence of draws.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datasets::Dataset;
use crate::error::{Error, Result};
use crate::metrics::{self, IterationRecord, RunReport, TerminatedBy, TrainerConfig};
use crate::nn::{self, Architecture};

pub const PHASE_INIT: u64 = 0;
pub const PHASE_SCOUT: u64 = 1;
pub const PHASE_EMPLOYED: u64 = 2;
pub const PHASE_SELECT: u64 = 3;
pub const PHASE_ONLOOKER: u64 = 4;
pub const PHASE_BP: u64 = 5;

/// RNG for one `(cycle, phase, slot)` triple.
pub fn stream(seed: u64, cycle: usize, phase: u64, slot: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((cycle as u64) << 32) | (phase << 24) | slot as u64);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepMode {
    /// Parameter `k` moves by `step * r_k`, `r_k ~ U[-1, 1]`.
    Stochastic,
    /// Every parameter moves by exactly `step`.
    Literal,
    /// Employed and onlooker bees do not move.
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbMode {
    /// `q_i = 1 / (1 + F_i)`, normalized.
    Classic,
    /// `q_i * max(|F_i - F_best|, eps)`, normalized.
    Literal,
}

/// What a scout does with the random vector it finds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoutPolicy {
    /// Keep it only if it beats the source it would replace.
    Greedy,
    /// Abandon the old source unconditionally.
    Replace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbcConfig {
    pub population: usize,
    pub max_cycles: usize,
    pub learning_rate: f64,
    /// Percent; the run stops once the average rate is strictly above it.
    pub ccr_threshold: f64,
    pub step_mode: StepMode,
    pub prob_mode: ProbMode,
    pub scout_policy: ScoutPolicy,
    pub hybrid_bp: bool,
    /// Fitness above this counts as divergent; also the sentinel fitness of
    /// a vector whose evaluation overflowed.
    pub divergence_cap: f64,
    pub epsilon: f64,
    pub stability_window: usize,
    pub seed: u64,
    /// Evaluate candidates on the rayon pool. Output is identical either way.
    #[serde(skip)]
    pub parallel: bool,
}

impl Default for AbcConfig {
    fn default() -> Self {
        Self {
            population: 10,
            max_cycles: 100,
            learning_rate: 0.5,
            ccr_threshold: 95.0,
            step_mode: StepMode::Stochastic,
            prob_mode: ProbMode::Classic,
            scout_policy: ScoutPolicy::Greedy,
            hybrid_bp: false,
            divergence_cap: 1e6,
            epsilon: 1e-12,
            stability_window: metrics::DEFAULT_STABILITY_WINDOW,
            seed: 0,
            parallel: false,
        }
    }
}

impl AbcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(Error::config("population must be >= 2"));
        }
        if self.max_cycles < 1 {
            return Err(Error::config("max cycles must be >= 1"));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return Err(Error::config("learning rate must be finite and >= 0"));
        }
        if !(0.0..=100.0).contains(&self.ccr_threshold) {
            return Err(Error::config("classification threshold must be a percentage"));
        }
        if !(self.divergence_cap.is_finite() && self.divergence_cap > 0.0) {
            return Err(Error::config("divergence cap must be finite and > 0"));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::config("epsilon must be finite and > 0"));
        }
        if self.stability_window < 1 {
            return Err(Error::config("stability window must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Employed,
    Onlooker,
    Scout,
}

/// One food source.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub params: Vec<f64>,
    pub fitness: Option<f64>,
    pub ccr: Option<f64>,
    pub role: Role,
}

impl Solution {
    pub fn new(params: Vec<f64>) -> Self {
        Self {
            params,
            fitness: None,
            ccr: None,
            role: Role::Employed,
        }
    }

    fn fitness_or_err(&self) -> Result<f64> {
        self.fitness
            .ok_or_else(|| Error::State("solution has not been evaluated".into()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Colony {
    pub solutions: Vec<Solution>,
    pub best_index: usize,
    pub n_employed: usize,
    pub n_scout: usize,
    pub cycle: usize,
    pub seed: u64,
}

impl Colony {
    pub fn len(&self) -> usize {
        self.solutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }

    pub fn n_onlooker(&self) -> usize {
        self.len() - self.n_employed - self.n_scout
    }

    pub fn fitnesses(&self) -> Result<Vec<f64>> {
        self.solutions.iter().map(Solution::fitness_or_err).collect()
    }

    pub fn average_fitness(&self) -> Result<f64> {
        Ok(self.fitnesses()?.iter().sum::<f64>() / self.len() as f64)
    }

    pub fn average_ccr(&self) -> Result<f64> {
        let total: f64 = self
            .solutions
            .iter()
            .map(|s| s.ccr.ok_or_else(|| Error::State("solution has not been evaluated".into())))
            .sum::<Result<f64>>()?;
        Ok(total / self.len() as f64)
    }

    pub fn best(&self) -> &Solution {
        &self.solutions[self.best_index]
    }

    /// Ranks sources by fitness (index breaks ties): the best `n_employed`
    /// are employed, the worst `n_scout` are scouts, the rest onlookers.
    /// Unevaluated colonies keep index order.
    pub fn assign_roles(&mut self) {
        let n = self.len();
        let mut order: Vec<usize> = (0..n).collect();
        if let Ok(f) = self.fitnesses() {
            order.sort_by(|&a, &b| f[a].total_cmp(&f[b]).then(a.cmp(&b)));
        }
        for (rank, &i) in order.iter().enumerate() {
            self.solutions[i].role = if rank < self.n_employed {
                Role::Employed
            } else if rank >= n - self.n_scout {
                Role::Scout
            } else {
                Role::Onlooker
            };
        }
    }

    fn check_counts(&self) {
        debug_assert!(self.n_scout >= 1 && self.n_scout < self.len());
        debug_assert!(self.n_employed >= 1 && self.n_employed + self.n_scout <= self.len());
    }
}

fn random_params(len: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..len).map(|_| rng.random::<f64>()).collect()
}

/// `N` sources with every parameter uniform in `[0, 1)`; one scout, the
/// rest employed.
pub fn init_population(cfg: &AbcConfig, arch: &Architecture) -> Result<Colony> {
    cfg.validate()?;
    let len = arch.param_count();
    let solutions = (0..cfg.population)
        .map(|i| Solution::new(random_params(len, &mut stream(cfg.seed, 0, PHASE_INIT, i))))
        .collect();
    let mut colony = Colony {
        solutions,
        best_index: 0,
        n_employed: cfg.population - 1,
        n_scout: 1,
        cycle: 0,
        seed: cfg.seed,
    };
    colony.assign_roles();
    Ok(colony)
}

/// Fitness and classification rate of one parameter vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub fitness: f64,
    pub ccr: f64,
}

/// Mean per-row SSE and CCR in a single pass. Anything that overflows is
/// pinned to `divergence_cap` with a zero rate.
pub fn evaluate_params(params: &[f64], arch: &Architecture, data: &Dataset, divergence_cap: f64) -> Result<Evaluation> {
    if data.n_features() != arch.inputs() || data.n_classes() != arch.outputs() {
        return Err(Error::shape(format!(
            "dataset is {}->{} but architecture is {}->{}",
            data.n_features(),
            data.n_classes(),
            arch.inputs(),
            arch.outputs()
        )));
    }
    let diverged = Evaluation {
        fitness: divergence_cap,
        ccr: 0.0,
    };
    let net = match arch.network(params) {
        Ok(net) => net,
        Err(Error::NumericOverflow(_)) => return Ok(diverged),
        Err(e) => return Err(e),
    };
    let mut sse = 0.0;
    let mut correct = 0usize;
    for i in 0..data.len() {
        let p = match net.predict(data.features_row(i)) {
            Ok(p) => p,
            Err(Error::NumericOverflow(_)) => return Ok(diverged),
            Err(e) => return Err(e),
        };
        sse += nn::sample_sse(data.target_row(i), &p)?;
        if metrics::argmax(&p) == data.label(i) {
            correct += 1;
        }
    }
    let fitness = sse / data.len() as f64;
    if !fitness.is_finite() {
        return Ok(diverged);
    }
    Ok(Evaluation {
        fitness,
        ccr: 100.0 * correct as f64 / data.len() as f64,
    })
}

fn evaluate_all(
    candidates: &[Vec<f64>],
    arch: &Architecture,
    data: &Dataset,
    cfg: &AbcConfig,
) -> Result<Vec<Evaluation>> {
    let eval = |p: &Vec<f64>| evaluate_params(p, arch, data, cfg.divergence_cap);
    if cfg.parallel {
        candidates.par_iter().map(eval).collect()
    } else {
        candidates.iter().map(eval).collect()
    }
}

/// Sets fitness and rate on every source, then refreshes the best index.
pub fn evaluate(mut colony: Colony, arch: &Architecture, data: &Dataset, cfg: &AbcConfig) -> Result<Colony> {
    let params: Vec<Vec<f64>> = colony.solutions.iter().map(|s| s.params.clone()).collect();
    for (sol, ev) in colony.solutions.iter_mut().zip(evaluate_all(&params, arch, data, cfg)?) {
        sol.fitness = Some(ev.fitness);
        sol.ccr = Some(ev.ccr);
    }
    colony.best_index = scout_best(&colony)?;
    Ok(colony)
}

/// Index of the lowest fitness; the lowest index wins ties.
pub fn scout_best(colony: &Colony) -> Result<usize> {
    let f = colony.fitnesses()?;
    if f.is_empty() {
        return Err(Error::State("empty colony".into()));
    }
    let mut best = 0;
    for (i, &v) in f.iter().enumerate().skip(1) {
        if v < f[best] {
            best = i;
        }
    }
    Ok(best)
}

/// Onlooker selection probabilities for a fitness vector.
///
/// Always sums to one: degenerate weightings fall back to uniform.
pub fn probabilities_from_fitness(fitness: &[f64], mode: ProbMode, epsilon: f64) -> Vec<f64> {
    let n = fitness.len();
    if n == 0 {
        return Vec::new();
    }
    let uniform = vec![1.0 / n as f64; n];
    let quality = |f: f64| if f.is_finite() && f >= 0.0 { 1.0 / (1.0 + f) } else { 0.0 };
    let weights: Vec<f64> = match mode {
        ProbMode::Classic => fitness.iter().map(|&f| quality(f)).collect(),
        ProbMode::Literal => {
            let best = fitness.iter().copied().fold(f64::INFINITY, f64::min);
            let distances: Vec<f64> = fitness.iter().map(|&f| (f - best).abs()).collect();
            if distances.iter().all(|&d| d < epsilon || d.is_nan()) {
                return uniform;
            }
            fitness
                .iter()
                .zip(&distances)
                .map(|(&f, &d)| quality(f) * d.max(epsilon))
                .collect()
        }
    };
    let total: f64 = weights.iter().sum();
    if !(total.is_finite() && total > 0.0) {
        return uniform;
    }
    weights.iter().map(|w| w / total).collect()
}

pub fn selection_probabilities(colony: &Colony, cfg: &AbcConfig) -> Result<Vec<f64>> {
    Ok(probabilities_from_fitness(&colony.fitnesses()?, cfg.prob_mode, cfg.epsilon))
}

/// Roulette draw over `probs` with one uniform number from `rng`.
pub fn roulette(probs: &[f64], rng: &mut impl Rng) -> usize {
    let r: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if r < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// Movement step of a bee at a source of fitness `f_j` toward the best
/// source `f_best`:
///
/// `(F_best - F_j) + exp(cos(F_best / F_j)) - ln(F_best * F_j)`
///
/// Inside the ratio and the logarithm both fitnesses are floored at `epsilon`.
pub fn move_bee(f_best: f64, f_j: f64, epsilon: f64) -> f64 {
    let fb = f_best.max(epsilon);
    let fj = f_j.max(epsilon);
    let step = (f_best - f_j) + (fb / fj).cos().exp() - (fb * fj).ln();
    assert!(step.is_finite(), "bee step is not finite for ({f_best}, {f_j})");
    step
}

/// Conventional bee move of one parameter toward/away from a neighbour.
#[inline]
pub fn classic_move(v: f64, neighbor: f64, r: f64) -> f64 {
    v + (v - neighbor) * r
}

/// Subtracts `step` from every parameter of `sol`.
///
/// In [`StepMode::Stochastic`] parameter `k` (canonical order) is instead
/// decremented by `step * r_k`, with one `U[-1, 1]` draw per parameter taken
/// from `rng` in order. The returned candidate is unevaluated.
pub fn apply_move(sol: &Solution, step: f64, mode: StepMode, rng: &mut impl Rng) -> Solution {
    let params = match mode {
        StepMode::Literal => sol.params.iter().map(|p| p - step).collect(),
        StepMode::Stochastic => sol
            .params
            .iter()
            .map(|p| p - step * rng.random_range(-1.0..=1.0))
            .collect(),
        StepMode::Off => sol.params.clone(),
    };
    Solution {
        params,
        fitness: None,
        ccr: None,
        role: sol.role,
    }
}

/// Acceptance rule on an already-evaluated candidate: it must be finite,
/// within the divergence cap and strictly better than `old`.
pub fn accepts(old_fitness: f64, candidate_fitness: f64, divergence_cap: f64) -> bool {
    candidate_fitness.is_finite() && candidate_fitness <= divergence_cap && candidate_fitness < old_fitness
}

/// Evaluates `candidate` and keeps it only if [`accepts`] says so;
/// otherwise `old` comes back untouched.
pub fn greedy_retain_or_revert(
    old: &Solution,
    candidate: Solution,
    data: &Dataset,
    arch: &Architecture,
    cfg: &AbcConfig,
) -> Result<(Solution, bool)> {
    let old_fitness = old.fitness_or_err()?;
    let ev = evaluate_params(&candidate.params, arch, data, cfg.divergence_cap)?;
    if accepts(old_fitness, ev.fitness, cfg.divergence_cap) {
        Ok((
            Solution {
                fitness: Some(ev.fitness),
                ccr: Some(ev.ccr),
                role: old.role,
                ..candidate
            },
            true,
        ))
    } else {
        Ok((old.clone(), false))
    }
}

/// Role-count update after a cycle.
///
/// An improving cycle retires one employed bee (floor 1); any other cycle
/// adds a scout (cap `N - 1`), taking the place of an employed bee when the
/// counts would exceed `N`. Roles are then re-ranked.
pub fn adjust_roles(mut colony: Colony, improved: bool) -> Colony {
    let n = colony.len();
    if improved {
        colony.n_employed = colony.n_employed.saturating_sub(1).max(1);
    } else {
        colony.n_scout = (colony.n_scout + 1).min(n - 1);
        if colony.n_employed + colony.n_scout > n {
            colony.n_employed = n - colony.n_scout;
        }
    }
    colony.assign_roles();
    colony.check_counts();
    colony
}

/// Greedy acceptance of pre-evaluated candidates, in order. Returns the
/// indices that changed.
fn accept_batch(
    colony: &mut Colony,
    targets: &[usize],
    candidates: Vec<Vec<f64>>,
    evals: Vec<Evaluation>,
    cfg: &AbcConfig,
    greedy: bool,
) -> Vec<usize> {
    let mut changed = Vec::new();
    for ((&i, params), ev) in targets.iter().zip(candidates).zip(evals) {
        let sol = &mut colony.solutions[i];
        let old = sol.fitness.expect("colony evaluated before a cycle");
        if !greedy || accepts(old, ev.fitness, cfg.divergence_cap) {
            sol.params = params;
            sol.fitness = Some(ev.fitness);
            sol.ccr = Some(ev.ccr);
            changed.push(i);
        }
    }
    changed
}

fn refresh_best(colony: &mut Colony) {
    colony.best_index = scout_best(colony).expect("colony evaluated");
}

fn record(colony: &Colony, cycle: usize) -> Result<IterationRecord> {
    let f = colony.fitnesses()?;
    Ok(IterationRecord {
        cycle,
        sse_best: f.iter().copied().fold(f64::INFINITY, f64::min),
        sse_avg: colony.average_fitness()?,
        ccr_avg: colony.average_ccr()?,
        n_employed: colony.n_employed,
        n_scout: colony.n_scout,
    })
}

/// Runs one cycle on an evaluated colony. Returns whether the average
/// fitness strictly improved.
pub fn step_cycle(colony: &mut Colony, arch: &Architecture, data: &Dataset, cfg: &AbcConfig) -> Result<bool> {
    colony.cycle += 1;
    let cycle = colony.cycle;
    let seed = colony.seed;
    let len = arch.param_count();
    let before = colony.average_fitness()?;
    let mut touched = vec![false; colony.len()];

    // Scouts.
    let scouts: Vec<usize> = (0..colony.len())
        .filter(|&i| colony.solutions[i].role == Role::Scout && i != colony.best_index)
        .collect();
    let candidates: Vec<Vec<f64>> = scouts
        .iter()
        .map(|&i| random_params(len, &mut stream(seed, cycle, PHASE_SCOUT, i)))
        .collect();
    let evals = evaluate_all(&candidates, arch, data, cfg)?;
    let greedy = cfg.scout_policy == ScoutPolicy::Greedy;
    for i in accept_batch(colony, &scouts, candidates, evals, cfg, greedy) {
        touched[i] = true;
    }
    refresh_best(colony);

    if cfg.step_mode != StepMode::Off {
        // Employed bees work their own sources.
        let f_best = colony.best().fitness_or_err()?;
        let employed: Vec<usize> = (0..colony.len())
            .filter(|&i| colony.solutions[i].role == Role::Employed)
            .collect();
        let candidates: Vec<Vec<f64>> = employed
            .iter()
            .map(|&i| {
                let sol = &colony.solutions[i];
                let step = move_bee(f_best, sol.fitness_or_err()?, cfg.epsilon);
                let mut rng = stream(seed, cycle, PHASE_EMPLOYED, i);
                Ok(apply_move(sol, step, cfg.step_mode, &mut rng).params)
            })
            .collect::<Result<_>>()?;
        let evals = evaluate_all(&candidates, arch, data, cfg)?;
        for i in accept_batch(colony, &employed, candidates, evals, cfg, true) {
            touched[i] = true;
        }
        refresh_best(colony);

        // Onlookers follow advertised sources.
        let n_onlooker = colony.n_onlooker();
        if n_onlooker > 0 {
            let probs = selection_probabilities(colony, cfg)?;
            let f_best = colony.best().fitness_or_err()?;
            let mut select_rng = stream(seed, cycle, PHASE_SELECT, 0);
            let sources: Vec<usize> = (0..n_onlooker).map(|_| roulette(&probs, &mut select_rng)).collect();
            let candidates: Vec<Vec<f64>> = sources
                .iter()
                .enumerate()
                .map(|(k, &i)| {
                    let sol = &colony.solutions[i];
                    let step = move_bee(f_best, sol.fitness_or_err()?, cfg.epsilon);
                    let mut rng = stream(seed, cycle, PHASE_ONLOOKER, k);
                    Ok(apply_move(sol, step, cfg.step_mode, &mut rng).params)
                })
                .collect::<Result<_>>()?;
            let evals = evaluate_all(&candidates, arch, data, cfg)?;
            for i in accept_batch(colony, &sources, candidates, evals, cfg, true) {
                touched[i] = true;
            }
            refresh_best(colony);
        }
    }

    if cfg.hybrid_bp {
        // Every source a bee worked this cycle: employed and onlooker
        // roles, plus anything a scout replaced.
        let targets: Vec<usize> = (0..colony.len())
            .filter(|&i| touched[i] || colony.solutions[i].role != Role::Scout)
            .collect();
        let step = |i: &usize| -> Result<Vec<f64>> {
            let params = &colony.solutions[*i].params;
            let net = arch.network(params)?;
            let order = crate::datasets::permutation(data.len(), stream(seed, cycle, PHASE_BP, *i).random());
            match nn::bp_epoch_online(&net, data, cfg.learning_rate, &order) {
                Ok(next) => Ok(next.to_params()),
                Err(Error::NumericOverflow(_)) => Ok(params.clone()),
                Err(e) => Err(e),
            }
        };
        let candidates: Vec<Vec<f64>> = if cfg.parallel {
            targets.par_iter().map(step).collect::<Result<_>>()?
        } else {
            targets.iter().map(step).collect::<Result<_>>()?
        };
        let evals = evaluate_all(&candidates, arch, data, cfg)?;
        accept_batch(colony, &targets, candidates, evals, cfg, true);
        refresh_best(colony);
    }

    Ok(colony.average_fitness()? < before)
}

/// Trains until the average classification rate exceeds the threshold or
/// `max_cycles` cycles have run. `sink` sees every cycle's record as it is
/// produced.
pub fn run(
    cfg: &AbcConfig,
    arch: &Architecture,
    data: &Dataset,
    sink: &mut dyn FnMut(&IterationRecord),
) -> Result<RunReport> {
    run_with_colony(cfg, arch, data, &mut |rec, _| sink(rec)).map(|(report, _)| report)
}

/// Like [`run`], but also returns the final colony.
pub fn run_with_colony(
    cfg: &AbcConfig,
    arch: &Architecture,
    data: &Dataset,
    sink: &mut dyn FnMut(&IterationRecord, &Colony),
) -> Result<(RunReport, Colony)> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyDataset(data.name().to_owned()));
    }
    let colony = init_population(cfg, arch)?;
    let mut colony = evaluate(colony, arch, data, cfg)?;
    colony.assign_roles();
    let mut records = Vec::with_capacity(cfg.max_cycles);
    let mut terminated_by = TerminatedBy::Mcn;
    while colony.cycle < cfg.max_cycles {
        let improved = step_cycle(&mut colony, arch, data, cfg)?;
        colony = adjust_roles(colony, improved);
        let rec = record(&colony, colony.cycle)?;
        sink(&rec, &colony);
        let ccr = rec.ccr_avg;
        records.push(rec);
        if ccr > cfg.ccr_threshold {
            terminated_by = TerminatedBy::Threshold;
            break;
        }
    }
    let summary = metrics::summarize(&records, cfg.stability_window, terminated_by)?;
    let report = RunReport {
        schema_version: metrics::SCHEMA_VERSION.to_owned(),
        dataset: data.info(),
        architecture: arch.clone(),
        config: TrainerConfig::Abc(cfg.clone()),
        invocation: Vec::new(),
        records,
        summary,
    };
    Ok((report, colony))
}
