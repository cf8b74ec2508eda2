#![allow(dead_code)]

use std::path::PathBuf;

use abcbp::datasets::{self, Builtin, Dataset};
use abcbp::nn::{self, Architecture, Network, TransferFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

pub fn load(builtin: Builtin) -> Dataset {
    datasets::load_builtin(builtin, &data_dir(), true).expect("dataset file present")
}

/// A random network with at most `max_params` parameters and a matching
/// random dataset of 2..=6 rows with one-hot or soft targets.
pub fn random_problem(seed: u64, max_params: usize) -> (Architecture, Network, Dataset) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let inputs = rng.random_range(1..=4);
        let layers = rng.random_range(0..=2);
        let hidden: Vec<usize> = (0..layers).map(|_| rng.random_range(1..=4)).collect();
        let outputs = rng.random_range(1..=3);
        let transfer = |rng: &mut ChaCha8Rng| {
            if rng.random_bool(0.75) {
                TransferFunction::Logistic
            } else {
                TransferFunction::Linear
            }
        };
        let mut sizes = vec![inputs];
        sizes.extend(&hidden);
        sizes.push(outputs);
        let arch = Architecture::with_transfers(sizes, transfer(&mut rng), transfer(&mut rng)).unwrap();
        if arch.param_count() > max_params {
            continue;
        }
        let params: Vec<f64> = (0..arch.param_count()).map(|_| rng.random_range(-1.5..1.5)).collect();
        let rows = rng.random_range(2..=6);
        let features: Vec<Vec<f64>> = (0..rows)
            .map(|_| (0..inputs).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let targets: Vec<Vec<f64>> = (0..rows)
            .map(|_| (0..outputs).map(|_| rng.random::<f64>()).collect())
            .collect();
        let data = Dataset::from_rows("random", features, targets).unwrap();
        let net = arch.network(&params).unwrap();
        return (arch, net, data);
    }
}

/// Central finite differences of the summed squared error.
pub fn numeric_gradient(net: &Network, data: &Dataset, h: f64) -> Vec<f64> {
    let base = net.to_params();
    (0..base.len())
        .map(|k| {
            let mut p = base.clone();
            p[k] = base[k] + h;
            let up = nn::total_sse(&net.with_params(&p).unwrap(), data).unwrap();
            p[k] = base[k] - h;
            let down = nn::total_sse(&net.with_params(&p).unwrap(), data).unwrap();
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Largest entrywise `|a - n| / max(|a|, |n|, floor)`.
pub fn max_relative_error(analytic: &[f64], numeric: &[f64], floor: f64) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(floor))
        .fold(0.0, f64::max)
}
