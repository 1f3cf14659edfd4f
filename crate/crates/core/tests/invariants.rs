use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use zeno::harness::emit::{parse_csv, to_csv};
use zeno::harness::{builtin, run_sweep, Dynamics, ExperimentResult, RunMetadata};
use zeno::lindblad::{path_eval, GeneratorPath};
use zeno::random::{random_channel, random_gkls};
use zeno::superop::{classify_map, kraus_to_superop, norm_1to1_estimate};
use zeno::timedep::{reparameterize_path, theta_step};
use zeno::zeno_static::{projection_decay, ConvergenceRecord, NormKind, ZenoStaticScenario};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn theta_tracks_the_grid(n in 1usize..2000, m_frac in 0.0f64..1.0, i_frac in 0.0f64..1.0) {
        let m = 1 + ((n - 1) as f64 * m_frac) as usize;
        let i = 1 + ((n - 1) as f64 * i_frac) as usize;
        let th = theta_step(i, n, m).unwrap();
        prop_assert!(th > 0.0 && th <= 1.0);
        prop_assert!((th * m as f64 - (th * m as f64).round()).abs() <= 1e-9);
        if i < n {
            let next = theta_step(i + 1, n, m).unwrap();
            prop_assert!(next >= th);
            prop_assert!((next - i as f64 / n as f64).abs() <= 2.0 / m as f64 + 1e-15);
        }
    }

    #[test]
    fn theta_rejects_out_of_range(n in 1usize..100) {
        prop_assert!(theta_step(0, n, 1).is_err());
        prop_assert!(theta_step(n + 1, n, 1).is_err());
        prop_assert!(theta_step(1, n, n + 1).is_err());
    }

    #[test]
    fn kraus_channels_are_cptp(seed in any::<u64>(), d in 2usize..4, k in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = kraus_to_superop(&random_channel(&mut rng, d, k));
        let class = classify_map(&t, 1e-9);
        prop_assert!(class.cp && class.trace_preserving && class.is_channel());
    }

    #[test]
    fn norm_bounds_are_ordered(seed in any::<u64>(), d in 2usize..4, scale in 0.1f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = kraus_to_superop(&random_channel(&mut rng, d, 2)).scale(scale);
        let est = norm_1to1_estimate(&t, 4, 20, seed);
        prop_assert!(est.lower <= est.upper * (1.0 + 1e-12));
        // A trace-preserving positive map sends states to states, so the
        // induced norm is at least `scale`.
        prop_assert!(est.lower >= scale * (1.0 - 1e-9));
    }

    #[test]
    fn identity_reparameterization_preserves_path(seed in any::<u64>(), tau in 0.2f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let path = GeneratorPath::linear(random_gkls(&mut rng, 2), random_gkls(&mut rng, 2), tau).unwrap();
        let same = reparameterize_path(&path, &[(0.0, 0.0), (tau, tau)]).unwrap();
        for k in 0..=8 {
            let t = tau * k as f64 / 8.0;
            let gap = path_eval(&same, t).unwrap().distance(&path_eval(&path, t).unwrap());
            prop_assert!(gap <= 1e-12, "t = {}: {}", t, gap);
        }
    }

    #[test]
    fn csv_round_trip(rows in prop::collection::vec((1usize..1 << 20, 0.0f64..10.0), 0..20)) {
        let records: Vec<ConvergenceRecord> = rows
            .iter()
            .map(|&(n, error)| ConvergenceRecord { n, error, norm_kind: NormKind::Proxy })
            .collect();
        let result = ExperimentResult {
            scenario: "prop".into(),
            records: records.clone(),
            slope: None,
            final_error: None,
            metadata: RunMetadata {
                seed: 0,
                gap_min: 0.05,
                norm_kind: NormKind::Proxy,
                propagator_tol: None,
                limit_tol: None,
                wall_time_secs: 0.0,
            },
        };
        prop_assert_eq!(parse_csv(&to_csv(&result)).unwrap(), records);
    }
}

fn static_scenario(name: &str) -> ZenoStaticScenario {
    let cfg = builtin(name).unwrap();
    let Dynamics::Static(g) = &cfg.dynamics else { panic!("{name} is not static") };
    ZenoStaticScenario::new(cfg.measurement.superop(), g.superop().clone(), cfg.t, cfg.gap_min).unwrap()
}

#[test]
fn outside_part_decays_below_bound() {
    for name in ["classic_zeno", "damped_rabi", "random_gapped"] {
        let s = static_scenario(name);
        let n0 = s.min_admissible_n().unwrap();
        for n in [n0.max(16), n0.max(64)] {
            let (lhs, rhs) = projection_decay(&s, n, 32).unwrap();
            assert!(lhs <= rhs + 1e-12, "{name} n = {n}: {lhs} > {rhs}");
        }
    }
}

#[test]
fn errors_decrease_past_32() {
    for name in ["classic_zeno", "damped_rabi", "random_gapped"] {
        let cfg = builtin(name).unwrap().with_sweep(vec![32, 64, 128, 256, 512]).unwrap();
        let result = run_sweep(&cfg).unwrap();
        for w in result.records.windows(2) {
            assert!(w[1].error < w[0].error, "{name}: error({}) ≥ error({})", w[1].n, w[0].n);
        }
    }
}
