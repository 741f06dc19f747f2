use proptest::prelude::*;
use zamix::zamix_core::{run_trial, MagnitudeRule, MixingConfig, SegmentSpec, TrialSetup};
use zamix::{
    paper_scenario, read_config, run_experiment, steady_state_stats, write_config, Excitation,
    ExperimentConfig, FilterKind, FilterSpec, InputConfig, LearningCurves, RunOptions, Scale,
    ScenarioConfig,
};

fn small(runs: usize) -> ExperimentConfig {
    ExperimentConfig {
        scenario: ScenarioConfig {
            taps: 16,
            segments: vec![
                SegmentSpec {
                    duration: 600,
                    active: 16,
                    magnitude_rule: MagnitudeRule::Random,
                },
                SegmentSpec {
                    duration: 600,
                    active: 3,
                    magnitude_rule: MagnitudeRule::Random,
                },
            ],
            noise_variance: 1e-3,
        },
        input: InputConfig::White { variance: 1.0 },
        filter1: FilterSpec {
            kind: FilterKind::Apa,
            order: 2,
            step: 0.5,
            attractor: 0.0,
            regularization: None,
            proportionate: None,
        },
        filter2: FilterSpec {
            kind: FilterKind::Zaapa,
            order: 2,
            step: 0.5,
            attractor: 1e-4,
            regularization: None,
            proportionate: None,
        },
        mixing: MixingConfig::default(),
        runs,
        seed: 11,
        steady_window_fraction: 0.1,
    }
}

#[test]
fn worker_count_does_not_change_results() {
    let cfg = small(70);
    let one = run_experiment(
        &cfg,
        &RunOptions {
            workers: Some(1),
            ..RunOptions::default()
        },
    )
    .unwrap();
    let four = run_experiment(
        &cfg,
        &RunOptions {
            workers: Some(4),
            ..RunOptions::default()
        },
    )
    .unwrap();
    assert_eq!(one.curves, four.curves);
    assert_eq!(one.segments, four.segments);
}

#[test]
fn averaging_identical_trials_equals_one_trial() {
    let cfg = small(1);
    let sc = cfg.build_scenario().unwrap();
    let setup = TrialSetup {
        scenario: &sc,
        input: cfg.input.model(),
        filter1: cfg.filter1(),
        filter2: cfg.filter2(),
        mixing: cfg.mixing,
        seed: cfg.seed,
        initial_weights: None,
    };
    let collect = || {
        let mut v = Vec::new();
        run_trial(&setup, 0, |r, _| v.push(r.e_a1 * r.e_a1)).unwrap();
        v
    };
    let (a, b) = (collect(), collect());
    let single = run_experiment(&cfg, &RunOptions::default()).unwrap();
    for n in 0..a.len() {
        assert_eq!((a[n] + b[n]) / 2.0, single.curves.j1[n]);
    }
}

#[test]
fn curve_invariants() {
    let cfg = small(40);
    let res = run_experiment(&cfg, &RunOptions::default()).unwrap();
    let c = &res.curves;
    let lp = cfg.mixing.lambda_plus();
    assert_eq!(c.len(), 1200);
    assert_eq!(c.trials, 40);
    for n in 0..c.len() {
        assert!(c.j1[n] >= 0.0 && c.j2[n] >= 0.0 && c.j[n] >= 0.0);
        assert!(c.lambda[n] >= 1.0 - lp - 1e-12 && c.lambda[n] <= lp + 1e-12);
        assert!(c.j12[n].abs() <= (c.j1[n] * c.j2[n]).sqrt() * (1.0 + 1e-12) + 3.0 * c.se_j12[n]);
    }
    for (s, summary) in res.segments.iter().enumerate() {
        let st = steady_state_stats(c, &res.scenario, s, cfg.steady_window_fraction).unwrap();
        assert!((st.j1 - summary.j1.mean).abs() <= 1e-12 * st.j1.abs().max(1e-300));
        assert!((st.lambda - summary.lambda.mean).abs() < 1e-12);
    }
}

#[test]
fn tap_stats_cover_every_segment() {
    let cfg = small(8);
    let res = run_experiment(
        &cfg,
        &RunOptions {
            tap_stats: true,
            ..RunOptions::default()
        },
    )
    .unwrap();
    assert_eq!(res.taps.len(), 2);
    for t in &res.taps {
        assert_eq!(t.msd2.len(), 16);
        assert!(t.msd1.iter().all(|e| e.mean > 0.0));
        for i in 0..16 {
            assert!(t.cross[i].mean.abs() <= (t.msd1[i].mean * t.msd2[i].mean).sqrt() + 1e-15);
        }
    }
    // the non-sparse segment has no zero taps
    assert_eq!(res.taps[0].inactive_mean2.mean, 0.0);
}

#[test]
fn window_fraction_on_flat_segment() {
    let sc = small(1).build_scenario().unwrap();
    let mut c = LearningCurves::constant(1200, 1e-3, 8e-4, 7e-4, 8e-4, 0.2);
    // small deterministic ripple standing in for sampling noise
    for (n, x) in c.j1.iter_mut().enumerate() {
        *x *= 1.0 + 0.01 * ((n as f64) * 0.37).sin();
    }
    let full = steady_state_stats(&c, &sc, 1, 1.0).unwrap();
    let tail = steady_state_stats(&c, &sc, 1, 0.1).unwrap();
    assert!((full.j1 / tail.j1 - 1.0).abs() < 0.01);
}

#[test]
fn desk_preset_regimes() {
    let mut cfg = paper_scenario(Scale::Desk, Excitation::White);
    cfg.runs = 24;
    let res = run_experiment(&cfg, &RunOptions::default()).unwrap();
    let s = &res.segments;
    assert!(s[0].lambda.mean >= 0.9 * cfg.mixing.lambda_plus());
    assert!(s[2].j2.mean < s[2].j1.mean);
}

#[test]
fn config_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for cfg in [
        small(3),
        paper_scenario(Scale::Desk, Excitation::Ar1),
        paper_scenario(Scale::Full, Excitation::White),
    ] {
        let p = dir.path().join("c.json");
        write_config(&cfg, &p).unwrap();
        assert_eq!(read_config(&p).unwrap(), cfg);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn config_json_round_trips(
        taps in 1usize..300,
        noise in 0.0f64..1.0,
        pole in -0.99f64..0.99,
        rho in 0.0f64..1e-2,
        step in 0.01f64..1.99,
        eps in proptest::option::of(0.0f64..1.0),
        runs in 1usize..5000,
        seed in any::<u64>(),
        frac in 0.001f64..=1.0,
        mu_a in 0.1f64..1e4,
        papa in any::<bool>(),
    ) {
        let mut cfg = small(runs);
        cfg.scenario.taps = taps;
        cfg.scenario.noise_variance = noise;
        cfg.input = InputConfig::Ar1 { pole, variance: 1.0 + noise };
        cfg.filter2.attractor = rho;
        cfg.filter2.step = step;
        cfg.filter2.regularization = eps;
        if papa {
            cfg.filter2.kind = FilterKind::Zapapa;
            cfg.filter2.proportionate = Some(Default::default());
        }
        cfg.seed = seed;
        cfg.steady_window_fraction = frac;
        cfg.mixing.step = mu_a;
        let text = cfg.to_json().unwrap();
        let back = ExperimentConfig::from_json_str(&text, std::path::Path::new("mem")).unwrap();
        prop_assert_eq!(back, cfg);
    }
}
