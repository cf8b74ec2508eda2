mod common;

use abcbp::abc::{self, AbcConfig, ProbMode, Solution};
use abcbp::datasets::Dataset;
use abcbp::metrics::{self, IterationRecord, StableCcr, TerminatedBy};
use abcbp::nn;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gradient_matches_finite_differences(seed in any::<u64>()) {
        let (_, net, data) = common::random_problem(seed, 30);
        let analytic = nn::gradient(&net, &data).unwrap();
        let numeric = common::numeric_gradient(&net, &data, 1e-5);
        let err = common::max_relative_error(&analytic, &numeric, 1e-6);
        prop_assert!(err < 1e-4, "relative error {err}");
    }

    #[test]
    fn bp_step_with_zero_rate_is_identity(seed in any::<u64>()) {
        let (_, net, data) = common::random_problem(seed, 30);
        let next = nn::bp_step(&net, &data, 0.0).unwrap();
        prop_assert_eq!(next.to_params(), net.to_params());
    }

    #[test]
    fn probabilities_normalized(
        fitness in prop::collection::vec(
            prop_oneof![Just(0.0), 0.0..1e-9, 0.0..10.0, 9.9e5..1e6],
            1..20,
        ),
        literal in any::<bool>(),
    ) {
        let mode = if literal { ProbMode::Literal } else { ProbMode::Classic };
        let p = abc::probabilities_from_fitness(&fitness, mode, 1e-12);
        prop_assert_eq!(p.len(), fitness.len());
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        prop_assert!(p.iter().all(|&x| (0.0..=1.0).contains(&x)));
    }

    #[test]
    fn move_bee_is_finite(
        fb in prop_oneof![Just(0.0), 0.0..1e-6, 0.0..1e6],
        fj in prop_oneof![Just(0.0), 0.0..1e-6, 0.0..1e6],
    ) {
        prop_assert!(abc::move_bee(fb, fj, 1e-12).is_finite());
    }

    #[test]
    fn stable_summary_ignores_duplicate_tail(
        rates in prop::collection::vec(0u32..5, 1..30),
        window in 1usize..12,
    ) {
        let records: Vec<IterationRecord> = rates
            .iter()
            .enumerate()
            .map(|(i, &r)| IterationRecord {
                cycle: i + 1,
                sse_best: 0.1,
                sse_avg: 0.2,
                ccr_avg: f64::from(r) * 10.0,
                n_employed: 1,
                n_scout: 1,
            })
            .collect();
        let s = metrics::summarize(&records, window, TerminatedBy::Mcn).unwrap();
        prop_assert!(s.ccr_min <= s.ccr_max);
        if let StableCcr::Stable(v) = s.ccr_stable {
            prop_assert!(s.ccr_min <= v && v <= s.ccr_max);
            let mut longer = records.clone();
            let mut dup = records.last().unwrap().clone();
            dup.cycle += 1;
            longer.push(dup);
            let t = metrics::summarize(&longer, window, TerminatedBy::Mcn).unwrap();
            prop_assert_eq!(t.ccr_stable, s.ccr_stable);
            prop_assert_eq!((t.ccr_max, t.ccr_min, t.final_sse), (s.ccr_max, s.ccr_min, s.final_sse));
        }
    }

    #[test]
    fn normalization_is_monotone_and_bounded(
        column in prop::collection::vec(-1e3f64..1e3, 2..20),
    ) {
        let features: Vec<Vec<f64>> = column.iter().map(|&v| vec![v, 1.0]).collect();
        let labels: Vec<usize> = (0..column.len()).map(|i| i % 3).collect();
        let mut data = Dataset::from_labels("p", features, &labels, vec!["a".into(), "b".into(), "c".into()]).unwrap();
        data.normalize();
        for i in 0..data.len() {
            let x = data.features_row(i);
            prop_assert!((0.0..=1.0).contains(&x[0]));
            prop_assert_eq!(x[1], 0.0);
            prop_assert_eq!(data.target_row(i).iter().sum::<f64>(), 1.0);
            prop_assert_eq!(data.label(i), labels[i]);
            for j in 0..data.len() {
                if column[i] < column[j] {
                    prop_assert!(x[0] <= data.features_row(j)[0]);
                }
            }
        }
    }

    #[test]
    fn rejected_candidate_leaves_bytes(seed in any::<u64>(), step in -50.0f64..50.0) {
        let (arch, net, data) = common::random_problem(seed, 30);
        let cfg = AbcConfig::default();
        let params = net.to_params();
        let fitness = nn::total_sse(&net, &data).unwrap() / data.len() as f64;
        let old = Solution {
            params: params.clone(),
            fitness: Some(fitness),
            ccr: Some(0.0),
            role: abc::Role::Employed,
        };
        let bits = |p: &[f64]| p.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        let mut rng = abc::stream(seed, 1, abc::PHASE_EMPLOYED, 0);
        for candidate in [
            abc::apply_move(&old, 0.0, abc::StepMode::Literal, &mut rng),
            abc::apply_move(&old, step, abc::StepMode::Stochastic, &mut rng),
        ] {
            let (kept, accepted) = abc::greedy_retain_or_revert(&old, candidate.clone(), &data, &arch, &cfg).unwrap();
            if accepted {
                prop_assert_eq!(bits(&kept.params), bits(&candidate.params));
                prop_assert!(kept.fitness.unwrap() < fitness);
            } else {
                prop_assert_eq!(bits(&kept.params), bits(&params));
                prop_assert_eq!(kept.fitness, Some(fitness));
            }
        }
    }
}
