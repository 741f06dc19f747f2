//! Monte-Carlo ensemble runs and steady-state estimation.
//!
//! EMSE is measured from the a-priori errors against the true system, so
//! `J1(n) = E[e_{a,1}²(n)]`, `J2(n) = E[e_{a,2}²(n)]`,
//! `J12(n) = E[e_{a,1}(n)e_{a,2}(n)]` and `J(n) = E[e_a²(n)]`.
//!
//! Trials run on a rayon pool in fixed-size blocks and are reduced in trial
//! order, so results do not depend on the worker count.

use std::ops::Range;

use rayon::prelude::*;
use zamix_core::{run_trial, Error as CoreError, SystemScenario, TrialSetup};

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};

const BLOCK: usize = 32;

#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Worker threads; rayon's default when `None`.
    pub workers: Option<usize>,
    /// Drop diverged trials instead of aborting.
    pub skip_diverged: bool,
    /// Collect per-tap weight-error statistics over each steady window.
    pub tap_stats: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            workers: None,
            skip_diverged: false,
            tap_stats: false,
        }
    }
}

/// Mean over trials and its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    sum: f64,
    sq: f64,
}

impl Moments {
    fn add(&mut self, x: f64) {
        self.sum += x;
        self.sq += x * x;
    }

    fn estimate(&self, n: usize) -> Estimate {
        let nf = n as f64;
        let mean = self.sum / nf;
        if n < 2 {
            return Estimate { mean, se: 0.0 };
        }
        let var = ((self.sq / nf - mean * mean) * nf / (nf - 1.0)).max(0.0);
        Estimate {
            mean,
            se: (var / nf).sqrt(),
        }
    }
}

/// Ensemble learning curves with per-iteration standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct LearningCurves {
    pub j1: Vec<f64>,
    pub j2: Vec<f64>,
    pub j12: Vec<f64>,
    pub j: Vec<f64>,
    pub lambda: Vec<f64>,
    pub se_j1: Vec<f64>,
    pub se_j2: Vec<f64>,
    pub se_j12: Vec<f64>,
    pub se_j: Vec<f64>,
    pub se_lambda: Vec<f64>,
    /// Trials that entered the averages.
    pub trials: usize,
}

impl LearningCurves {
    pub fn len(&self) -> usize {
        self.j1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.j1.is_empty()
    }

    /// Curves holding the given constant values (tests, synthetic input).
    pub fn constant(len: usize, j1: f64, j2: f64, j12: f64, j: f64, lambda: f64) -> Self {
        let z = vec![0.0; len];
        LearningCurves {
            j1: vec![j1; len],
            j2: vec![j2; len],
            j12: vec![j12; len],
            j: vec![j; len],
            lambda: vec![lambda; len],
            se_j1: z.clone(),
            se_j2: z.clone(),
            se_j12: z.clone(),
            se_j: z.clone(),
            se_lambda: z,
            trials: 1,
        }
    }
}

/// Time averages of the learning curves over a steady window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState {
    pub j1: f64,
    pub j2: f64,
    pub j12: f64,
    pub j: f64,
    pub lambda: f64,
}

/// Window-averaged quantities with across-trial standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentSummary {
    pub segment: usize,
    pub window: Range<usize>,
    pub j1: Estimate,
    pub j2: Estimate,
    pub j12: Estimate,
    pub j: Estimate,
    pub lambda: Estimate,
    pub j2_minus_j12: Estimate,
}

/// Per-tap weight-error statistics over one steady window, `w̃ = w_opt − w`.
#[derive(Debug, Clone, PartialEq)]
pub struct TapStats {
    pub segment: usize,
    pub mean1: Vec<Estimate>,
    pub mean2: Vec<Estimate>,
    pub msd1: Vec<Estimate>,
    pub msd2: Vec<Estimate>,
    pub cross: Vec<Estimate>,
    /// Per-trial average of `w̃₁` and `w̃₂` over the zero taps Z.
    pub inactive_mean1: Estimate,
    pub inactive_mean2: Estimate,
}

#[derive(Debug)]
pub struct ExperimentResult {
    pub scenario: SystemScenario,
    pub curves: LearningCurves,
    pub segments: Vec<SegmentSummary>,
    /// Empty unless `RunOptions::tap_stats` is set.
    pub taps: Vec<TapStats>,
    /// Trials dropped under `skip_diverged`.
    pub skipped: Vec<(u64, CoreError)>,
}

/// Final `fraction` of segment `segment`.
pub fn steady_window(
    scenario: &SystemScenario,
    segment: usize,
    fraction: f64,
) -> Result<Range<usize>> {
    let seg = scenario
        .segments
        .get(segment)
        .ok_or_else(|| HarnessError::Invalid(format!("no segment {segment}")))?;
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(HarnessError::Invalid(
            "window fraction must lie in (0, 1]".into(),
        ));
    }
    let len = (fraction * seg.duration as f64).floor() as usize;
    if len < 10 {
        return Err(HarnessError::Invalid(format!(
            "steady window of {len} samples is shorter than 10"
        )));
    }
    let end = scenario.segment_starts()[segment] + seg.duration;
    Ok(end - len..end)
}

pub fn steady_state_stats(
    curves: &LearningCurves,
    scenario: &SystemScenario,
    segment: usize,
    fraction: f64,
) -> Result<SteadyState> {
    let w = steady_window(scenario, segment, fraction)?;
    if w.end > curves.len() {
        return Err(HarnessError::Invalid(
            "segment extends past the curves".into(),
        ));
    }
    let avg = |v: &[f64]| v[w.clone()].iter().sum::<f64>() / w.len() as f64;
    Ok(SteadyState {
        j1: avg(&curves.j1),
        j2: avg(&curves.j2),
        j12: avg(&curves.j12),
        j: avg(&curves.j),
        lambda: avg(&curves.lambda),
    })
}

struct TrialOutput {
    // e_{a,1}², e_{a,2}², e_{a,1}e_{a,2}, e_a², λ per sample
    samples: Vec<[f64; 5]>,
    windows: Vec<[f64; 5]>,
    taps: Vec<[Vec<f64>; 5]>,
}

fn run_one(
    setup: &TrialSetup<'_>,
    windows: &[Range<usize>],
    tap_stats: bool,
    trial: u64,
) -> std::result::Result<TrialOutput, CoreError> {
    let n = setup.scenario.total_samples();
    let l = setup.scenario.taps;
    let mut out = TrialOutput {
        samples: Vec::with_capacity(n),
        windows: vec![[0.0; 5]; windows.len()],
        taps: if tap_stats {
            (0..windows.len())
                .map(|_| std::array::from_fn(|_| vec![0.0; l]))
                .collect()
        } else {
            Vec::new()
        },
    };
    run_trial(setup, trial, |r, v| {
        let row = [
            r.e_a1 * r.e_a1,
            r.e_a2 * r.e_a2,
            r.e_a1 * r.e_a2,
            r.e_a * r.e_a,
            r.lambda,
        ];
        out.samples.push(row);
        let s = r.segment;
        if windows[s].contains(&r.n) {
            for (acc, x) in out.windows[s].iter_mut().zip(row) {
                *acc += x;
            }
            if tap_stats {
                let [m1, m2, q1, q2, c] = &mut out.taps[s];
                for i in 0..l {
                    let d1 = v.w_opt[i] - v.w1[i];
                    let d2 = v.w_opt[i] - v.w2[i];
                    m1[i] += d1;
                    m2[i] += d2;
                    q1[i] += d1 * d1;
                    q2[i] += d2 * d2;
                    c[i] += d1 * d2;
                }
            }
        }
    })?;
    for (acc, w) in out.windows.iter_mut().zip(windows) {
        acc.iter_mut().for_each(|x| *x /= w.len() as f64);
    }
    for (t, w) in out.taps.iter_mut().zip(windows) {
        t.iter_mut().flatten().for_each(|x| *x /= w.len() as f64);
    }
    Ok(out)
}

fn diverged(e: &CoreError) -> bool {
    matches!(
        e,
        CoreError::Divergence { .. } | CoreError::NumericFailure(_)
    )
}

pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<ExperimentResult> {
    cfg.validate()?;
    let scenario = cfg.build_scenario()?;
    let windows = (0..scenario.segments.len())
        .map(|s| steady_window(&scenario, s, cfg.steady_window_fraction))
        .collect::<Result<Vec<_>>>()?;
    let setup = TrialSetup {
        scenario: &scenario,
        input: cfg.input.model(),
        filter1: cfg.filter1(),
        filter2: cfg.filter2(),
        mixing: cfg.mixing,
        seed: cfg.seed,
        initial_weights: None,
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = opts.workers {
        pool = pool.num_threads(w.max(1));
    }
    let pool = pool
        .build()
        .map_err(|e| HarnessError::Invalid(e.to_string()))?;

    let n = scenario.total_samples();
    let l = scenario.taps;
    let mut per_sample = vec![[Moments::default(); 5]; n];
    let mut per_window = vec![[Moments::default(); 6]; windows.len()];
    let mut per_tap: Vec<[Vec<Moments>; 5]> = if opts.tap_stats {
        (0..windows.len())
            .map(|_| std::array::from_fn(|_| vec![Moments::default(); l]))
            .collect()
    } else {
        Vec::new()
    };
    let mut pooled = vec![[Moments::default(); 2]; windows.len()];
    let zero_sets: Vec<Vec<usize>> = scenario.segments.iter().map(|s| s.inactive()).collect();
    let mut skipped = Vec::new();
    let mut kept = 0usize;

    let trials: Vec<u64> = (0..cfg.runs as u64).collect();
    for block in trials.chunks(BLOCK) {
        let results: Vec<_> = pool.install(|| {
            block
                .par_iter()
                .map(|&t| (t, run_one(&setup, &windows, opts.tap_stats, t)))
                .collect()
        });
        for (trial, res) in results {
            let out = match res {
                Ok(out) => out,
                Err(e) if opts.skip_diverged && diverged(&e) => {
                    skipped.push((trial, e));
                    continue;
                }
                Err(source) => return Err(HarnessError::Trial { trial, source }),
            };
            kept += 1;
            for (acc, row) in per_sample.iter_mut().zip(&out.samples) {
                for (m, &x) in acc.iter_mut().zip(row) {
                    m.add(x);
                }
            }
            for (acc, w) in per_window.iter_mut().zip(&out.windows) {
                for (m, &x) in acc.iter_mut().zip(w) {
                    m.add(x);
                }
                acc[5].add(w[1] - w[2]);
            }
            for ((acc, t), z) in pooled.iter_mut().zip(&out.taps).zip(&zero_sets) {
                if !z.is_empty() {
                    for (m, dev) in acc.iter_mut().zip(&t[..2]) {
                        m.add(z.iter().map(|&i| dev[i]).sum::<f64>() / z.len() as f64);
                    }
                }
            }
            for (acc, t) in per_tap.iter_mut().zip(&out.taps) {
                for (ms, xs) in acc.iter_mut().zip(t) {
                    for (m, &x) in ms.iter_mut().zip(xs) {
                        m.add(x);
                    }
                }
            }
        }
    }
    if kept == 0 {
        return Err(HarnessError::AllDiverged(cfg.runs));
    }

    let column = |k: usize| -> (Vec<f64>, Vec<f64>) {
        per_sample
            .iter()
            .map(|m| m[k].estimate(kept))
            .map(|e| (e.mean, e.se))
            .unzip()
    };
    let (j1, se_j1) = column(0);
    let (j2, se_j2) = column(1);
    let (j12, se_j12) = column(2);
    let (j, se_j) = column(3);
    let (lambda, se_lambda) = column(4);
    let curves = LearningCurves {
        j1,
        j2,
        j12,
        j,
        lambda,
        se_j1,
        se_j2,
        se_j12,
        se_j,
        se_lambda,
        trials: kept,
    };

    let segments = per_window
        .iter()
        .zip(&windows)
        .enumerate()
        .map(|(segment, (m, w))| SegmentSummary {
            segment,
            window: w.clone(),
            j1: m[0].estimate(kept),
            j2: m[1].estimate(kept),
            j12: m[2].estimate(kept),
            j: m[3].estimate(kept),
            lambda: m[4].estimate(kept),
            j2_minus_j12: m[5].estimate(kept),
        })
        .collect();
    let taps = per_tap
        .iter()
        .enumerate()
        .zip(&pooled)
        .map(|((segment, [m1, m2, q1, q2, c]), z)| {
            let est = |v: &Vec<Moments>| v.iter().map(|m| m.estimate(kept)).collect();
            TapStats {
                segment,
                mean1: est(m1),
                mean2: est(m2),
                msd1: est(q1),
                msd2: est(q2),
                cross: est(c),
                inactive_mean1: z[0].estimate(kept),
                inactive_mean2: z[1].estimate(kept),
            }
        })
        .collect();
    Ok(ExperimentResult {
        scenario,
        curves,
        segments,
        taps,
        skipped,
    })
}
