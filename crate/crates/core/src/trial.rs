//! One Monte-Carlo realization of the combined scheme.

use alloc::vec::Vec;

use crate::combination::{combine, CombinationState, MixingConfig};
use crate::error::{Error, Result};
use crate::filters::{FilterConfig, FilterState, RegressorBuffer};
use crate::linalg::dot;
use crate::signals::{SignalModel, SystemScenario};

/// Everything a trial needs besides its index.
#[derive(Debug, Clone)]
pub struct TrialSetup<'a> {
    pub scenario: &'a SystemScenario,
    pub input: SignalModel,
    /// Filter 1 (APA).
    pub filter1: FilterConfig,
    /// Filter 2 (ZA-APA or ZA-PAPA).
    pub filter2: FilterConfig,
    pub mixing: MixingConfig,
    pub seed: u64,
    /// Starting weights for both filters; zeros when `None`.
    pub initial_weights: Option<Vec<f64>>,
}

/// Per-sample a-priori errors, measured before any update at sample `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleRecord {
    pub n: usize,
    pub segment: usize,
    pub e_a1: f64,
    pub e_a2: f64,
    pub e_a: f64,
    pub lambda: f64,
}

/// Weights visible to the sink at sample `n` (before the update).
#[derive(Debug, Clone, Copy)]
pub struct TrialView<'a> {
    pub w1: &'a [f64],
    pub w2: &'a [f64],
    pub w_opt: &'a [f64],
}

/// Runs trial `trial` over the whole scenario, handing every sample to `sink`.
///
/// Filter and mixing states persist across segment switches.
pub fn run_trial<F>(setup: &TrialSetup<'_>, trial: u64, mut sink: F) -> Result<()>
where
    F: FnMut(&SampleRecord, &TrialView<'_>),
{
    let sc = setup.scenario;
    sc.validate()?;
    setup.input.validate()?;
    let (mut f1, mut f2) = match &setup.initial_weights {
        None => (
            FilterState::new(setup.filter1.clone())?,
            FilterState::new(setup.filter2.clone())?,
        ),
        Some(w) => (
            FilterState::with_weights(setup.filter1.clone(), w.clone())?,
            FilterState::with_weights(setup.filter2.clone(), w.clone())?,
        ),
    };
    let mut mix = CombinationState::new(&setup.mixing)?;
    let mut buf = RegressorBuffer::new(sc.taps, setup.filter1.order);
    let mut buf2 = (setup.filter2.order != setup.filter1.order)
        .then(|| RegressorBuffer::new(sc.taps, setup.filter2.order));

    for (n, obs) in sc.stream(&setup.input, setup.seed, trial).enumerate() {
        let w_opt = &sc.segments[obs.segment].w_opt;
        buf.push(&obs.u, obs.d)?;
        if let Some(b) = buf2.as_mut() {
            b.push(&obs.u, obs.d)?;
        }
        let y1 = dot(&obs.u, &f1.w);
        let y2 = dot(&obs.u, &f2.w);
        if !(y1.is_finite() && y2.is_finite()) {
            return Err(Error::Divergence { sample: n as u64 });
        }
        let e_a1 = f1.a_priori_error(&obs.u, w_opt);
        let e_a2 = f2.a_priori_error(&obs.u, w_opt);
        let lambda = mix.lambda();
        let out = combine(lambda, y1, y2, obs.d);
        let rec = SampleRecord {
            n,
            segment: obs.segment,
            e_a1,
            e_a2,
            e_a: lambda * e_a1 + (1.0 - lambda) * e_a2,
            lambda,
        };
        sink(
            &rec,
            &TrialView {
                w1: &f1.w,
                w2: &f2.w,
                w_opt,
            },
        );

        mix.update_a(out.e, y1, y2)?;
        f1.step(&buf)?;
        f2.step(buf2.as_ref().unwrap_or(&buf))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::{MagnitudeRule, SegmentSpec};
    use alloc::vec;
    use alloc::vec::Vec;

    fn setup(sc: &SystemScenario, noise_free_start: bool) -> TrialSetup<'_> {
        TrialSetup {
            scenario: sc,
            input: SignalModel::white(1.0),
            filter1: FilterConfig::apa(sc.taps, 2, 0.5, 2e-4),
            filter2: FilterConfig::za_apa(sc.taps, 2, 0.5, 0.0, 2e-4),
            mixing: MixingConfig::default(),
            seed: 42,
            initial_weights: noise_free_start.then(|| sc.segments[0].w_opt.clone()),
        }
    }

    #[test]
    fn converged_start_stays_converged() {
        let specs = [SegmentSpec {
            duration: 500,
            active: 3,
            magnitude_rule: MagnitudeRule::Random,
        }];
        let sc = SystemScenario::generate(8, &specs, 0.0, 1).unwrap();
        let s = setup(&sc, true);
        let mut worst: f64 = 0.0;
        run_trial(&s, 0, |r, _| {
            worst = worst.max(r.e_a1.abs()).max(r.e_a2.abs()).max(r.e_a.abs())
        })
        .unwrap();
        assert!(worst < 1e-12, "{worst}");
    }

    #[test]
    fn reproducible_and_lambda_bounded() {
        let specs = [
            SegmentSpec {
                duration: 300,
                active: 8,
                magnitude_rule: MagnitudeRule::Random,
            },
            SegmentSpec {
                duration: 300,
                active: 2,
                magnitude_rule: MagnitudeRule::Random,
            },
        ];
        let sc = SystemScenario::generate(8, &specs, 1e-3, 1).unwrap();
        let mut s = setup(&sc, false);
        s.filter2.attractor = 1e-4;
        let collect = |t| {
            let mut v: Vec<SampleRecord> = Vec::new();
            run_trial(&s, t, |r, _| v.push(*r)).unwrap();
            v
        };
        let a = collect(3);
        assert_eq!(a, collect(3));
        assert_ne!(a, collect(4));
        assert_eq!(a.len(), 600);
        let lp = s.mixing.lambda_plus();
        assert!(a.iter().all(|r| r.lambda >= 1.0 - lp && r.lambda <= lp));
        assert_eq!(a[299].segment, 0);
        assert_eq!(a[300].segment, 1);
    }

    #[test]
    fn view_exposes_a_priori_error_ingredients() {
        let specs = [SegmentSpec {
            duration: 50,
            active: 3,
            magnitude_rule: MagnitudeRule::Random,
        }];
        let sc = SystemScenario::generate(6, &specs, 1e-3, 2).unwrap();
        let s = setup(&sc, false);
        let stream: Vec<_> = sc.stream(&s.input, s.seed, 0).collect();
        run_trial(&s, 0, |r, v| {
            let u = &stream[r.n].u;
            let expect: f64 = u
                .iter()
                .zip(v.w_opt)
                .zip(v.w1)
                .map(|((u, o), w)| u * (o - w))
                .sum();
            assert!((expect - r.e_a1).abs() < 1e-12);
        })
        .unwrap();
    }

    #[test]
    fn divergence_propagates() {
        let specs = [SegmentSpec {
            duration: 10,
            active: 1,
            magnitude_rule: MagnitudeRule::Unit,
        }];
        let sc = SystemScenario::generate(2, &specs, 0.0, 2).unwrap();
        let mut s = setup(&sc, false);
        s.initial_weights = Some(vec![f64::MAX, f64::MAX]);
        s.filter1 = FilterConfig::apa(2, 1, 1.9, 1e-4);
        s.filter2 = FilterConfig::apa(2, 1, 1.9, 1e-4);
        let r = run_trial(&s, 0, |_, _| {});
        assert!(matches!(r, Err(Error::Divergence { sample: 0 })), "{r:?}");
    }
}
