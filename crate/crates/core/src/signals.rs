//! Input processes, observation noise and piecewise-constant unknown systems.
//!
//! Every random quantity is drawn from a ChaCha stream keyed by the
//! experiment seed and trial index, with separate stream ids for the
//! input process, the observation noise and the system draw. Equal seeds
//! give bit-identical streams.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Stream ids inside one ChaCha seed.
const INPUT_STREAM: u64 = 0;
const NOISE_STREAM: u64 = 1;
const SYSTEM_STREAM: u64 = 2;

/// RNG for `stream` of Monte-Carlo trial `trial` under `seed`.
pub fn trial_rng(seed: u64, trial: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ trial);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "lowercase"))]
pub enum InputKind {
    White,
    Ar1 { pole: f64 },
}

/// Stationary Gaussian input process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalModel {
    pub kind: InputKind,
    pub variance: f64,
}

impl SignalModel {
    pub fn white(variance: f64) -> Self {
        SignalModel {
            kind: InputKind::White,
            variance,
        }
    }

    pub fn ar1(pole: f64, variance: f64) -> Self {
        SignalModel {
            kind: InputKind::Ar1 { pole },
            variance,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.variance > 0.0) || !self.variance.is_finite() {
            return Err(Error::invalid("input variance must be positive"));
        }
        if let InputKind::Ar1 { pole } = self.kind {
            if !(pole.abs() < 1.0) {
                return Err(Error::invalid("AR(1) pole must lie in (-1, 1)"));
            }
        }
        Ok(())
    }

    /// Sample generator driven by `rng`.
    pub fn generator<R: Rng>(&self, rng: R) -> InputGenerator<R> {
        InputGenerator {
            model: *self,
            rng,
            prev: None,
        }
    }

    /// Lag-k autocovariance `σ²·α^|k|` (white: `σ²·δ_k`).
    pub fn autocovariance(&self, lag: usize) -> f64 {
        match self.kind {
            InputKind::White => {
                if lag == 0 {
                    self.variance
                } else {
                    0.0
                }
            }
            InputKind::Ar1 { pole } => self.variance * libm::pow(pole, lag as f64),
        }
    }
}

/// Infinite sample stream of a [`SignalModel`].
#[derive(Debug, Clone)]
pub struct InputGenerator<R> {
    model: SignalModel,
    rng: R,
    prev: Option<f64>,
}

impl<R: Rng> Iterator for InputGenerator<R> {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let sd = libm::sqrt(self.model.variance);
        let g: f64 = StandardNormal.sample(&mut self.rng);
        let x = match (self.model.kind, self.prev) {
            (InputKind::White, _) | (InputKind::Ar1 { .. }, None) => sd * g,
            (InputKind::Ar1 { pole }, Some(p)) => pole * p + libm::sqrt(1.0 - pole * pole) * sd * g,
        };
        self.prev = Some(x);
        Some(x)
    }
}

/// Draws `n` samples of `model` using the input stream of `seed`.
pub fn gen_input(model: &SignalModel, n: usize, seed: u64) -> Result<Vec<f64>> {
    model.validate()?;
    if n == 0 {
        return Err(Error::invalid("sample count must be at least 1"));
    }
    Ok(model
        .generator(trial_rng(seed, 0, INPUT_STREAM))
        .take(n)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum MagnitudeRule {
    /// Active taps are ±1.
    Unit,
    /// Active taps are N(0, 1).
    Random,
}

/// Draws an `taps`-long system with exactly `active` nonzero taps at
/// uniformly random positions. Returns the weights and the sorted support.
pub fn make_system<R: Rng>(
    taps: usize,
    active: usize,
    rule: MagnitudeRule,
    rng: &mut R,
) -> Result<(Vec<f64>, Vec<usize>)> {
    if active > taps {
        return Err(Error::invalid("active tap count exceeds filter length"));
    }
    let mut support = index::sample(rng, taps, active).into_vec();
    support.sort_unstable();
    let mut w = vec![0.0; taps];
    for &i in &support {
        // redraw exact zeros so the support size is exact
        w[i] = loop {
            let v = match rule {
                MagnitudeRule::Unit => {
                    if rng.random::<bool>() {
                        1.0
                    } else {
                        -1.0
                    }
                }
                MagnitudeRule::Random => StandardNormal.sample(rng),
            };
            if v != 0.0 {
                break v;
            }
        };
    }
    Ok((w, support))
}

/// Shape of one scenario segment before the system is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct SegmentSpec {
    pub duration: usize,
    #[cfg_attr(feature = "serde", serde(rename = "K"))]
    pub active: usize,
    pub magnitude_rule: MagnitudeRule,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub duration: usize,
    pub w_opt: Vec<f64>,
    /// Sorted indices of the nonzero taps (NZ).
    pub active: Vec<usize>,
}

impl Segment {
    /// Indices of the zero taps (Z).
    pub fn inactive(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.w_opt.len() - self.active.len());
        let mut it = self.active.iter().peekable();
        for i in 0..self.w_opt.len() {
            if it.peek() == Some(&&i) {
                it.next();
            } else {
                out.push(i);
            }
        }
        out
    }
}

/// Piecewise-constant unknown system with its noise level.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemScenario {
    pub taps: usize,
    pub segments: Vec<Segment>,
    pub noise_variance: f64,
}

impl SystemScenario {
    /// Draws a fresh system for every segment from the system stream of `seed`.
    pub fn generate(
        taps: usize,
        specs: &[SegmentSpec],
        noise_variance: f64,
        seed: u64,
    ) -> Result<Self> {
        if taps == 0 {
            return Err(Error::invalid("filter length must be positive"));
        }
        if specs.is_empty() {
            return Err(Error::invalid("scenario needs at least one segment"));
        }
        let mut rng = trial_rng(seed, 0, SYSTEM_STREAM);
        let segments = specs
            .iter()
            .map(|s| {
                let (w_opt, active) = make_system(taps, s.active, s.magnitude_rule, &mut rng)?;
                Ok(Segment {
                    duration: s.duration,
                    w_opt,
                    active,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let sc = SystemScenario {
            taps,
            segments,
            noise_variance,
        };
        sc.validate()?;
        Ok(sc)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.noise_variance >= 0.0) || !self.noise_variance.is_finite() {
            return Err(Error::invalid(
                "noise variance must be finite and non-negative",
            ));
        }
        for s in &self.segments {
            if s.duration == 0 {
                return Err(Error::invalid("segment durations must be at least 1"));
            }
            if s.w_opt.len() != self.taps {
                return Err(Error::invalid(
                    "segment system length differs from scenario length",
                ));
            }
            let nonzero = s.w_opt.iter().filter(|&&x| x != 0.0).count();
            if nonzero != s.active.len()
                || s.active
                    .iter()
                    .any(|&i| i >= self.taps || s.w_opt[i] == 0.0)
            {
                return Err(Error::invalid(
                    "active set does not match the system support",
                ));
            }
        }
        Ok(())
    }

    pub fn total_samples(&self) -> usize {
        self.segments.iter().map(|s| s.duration).sum()
    }

    /// Sample index at which each segment starts.
    pub fn segment_starts(&self) -> Vec<usize> {
        let mut acc = 0;
        self.segments
            .iter()
            .map(|s| {
                let start = acc;
                acc += s.duration;
                start
            })
            .collect()
    }

    /// Segment active at sample `n`, if any.
    pub fn segment_at(&self, n: usize) -> Option<usize> {
        let mut acc = 0;
        for (k, s) in self.segments.iter().enumerate() {
            acc += s.duration;
            if n < acc {
                return Some(k);
            }
        }
        None
    }

    /// Observation stream for Monte-Carlo trial `trial`.
    pub fn stream(&self, model: &SignalModel, seed: u64, trial: u64) -> ScenarioStream<'_> {
        ScenarioStream {
            scenario: self,
            input: model.generator(trial_rng(seed, trial, INPUT_STREAM)),
            noise: trial_rng(seed, trial, NOISE_STREAM),
            constant_input: None,
            window: vec![0.0; self.taps],
            head: 0,
            n: 0,
            segment: 0,
            segment_end: self.segments.first().map_or(0, |s| s.duration),
        }
    }
}

/// One sample of the identification problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    /// Regressor `[u(n), u(n-1), …, u(n-L+1)]`.
    pub u: Vec<f64>,
    pub d: f64,
    /// Noise sample added to `uᵀw_opt`.
    pub epsilon: f64,
    /// Segment whose system produced `d`.
    pub segment: usize,
}

/// Iterator over the observations of a scenario.
pub struct ScenarioStream<'a> {
    scenario: &'a SystemScenario,
    input: InputGenerator<ChaCha8Rng>,
    noise: ChaCha8Rng,
    constant_input: Option<f64>,
    // ring buffer of the last L input samples; `head` holds the newest
    window: Vec<f64>,
    head: usize,
    n: usize,
    segment: usize,
    segment_end: usize,
}

impl ScenarioStream<'_> {
    /// Replaces the random input with a constant (debugging aid).
    pub fn with_constant_input(mut self, value: f64) -> Self {
        self.constant_input = Some(value);
        self
    }
}

impl Iterator for ScenarioStream<'_> {
    type Item = Observation;

    fn next(&mut self) -> Option<Observation> {
        let sc = self.scenario;
        if self.segment >= sc.segments.len() {
            return None;
        }
        while self.n >= self.segment_end {
            self.segment += 1;
            if self.segment >= sc.segments.len() {
                return None;
            }
            self.segment_end += sc.segments[self.segment].duration;
        }
        let sample = match self.constant_input {
            Some(c) => c,
            None => self.input.next().unwrap_or(0.0),
        };
        let l = sc.taps;
        self.head = if self.n == 0 {
            0
        } else {
            (self.head + l - 1) % l
        };
        self.window[self.head] = sample;
        let u: Vec<f64> = (0..l).map(|k| self.window[(self.head + k) % l]).collect();

        let w_opt = &sc.segments[self.segment].w_opt;
        let g: f64 = StandardNormal.sample(&mut self.noise);
        let epsilon = libm::sqrt(sc.noise_variance) * g;
        let d = crate::linalg::dot(&u, w_opt) + epsilon;
        let obs = Observation {
            u,
            d,
            epsilon,
            segment: self.segment,
        };
        self.n += 1;
        Some(obs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    fn mean_var(x: &[f64]) -> (f64, f64) {
        let n = x.len() as f64;
        let m = x.iter().sum::<f64>() / n;
        let v = x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n;
        (m, v)
    }

    fn lag1(x: &[f64]) -> f64 {
        let (m, v) = mean_var(x);
        let c: f64 =
            x.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum::<f64>() / (x.len() - 1) as f64;
        c / v
    }

    #[test]
    fn white_variance() {
        let x = gen_input(&SignalModel::white(1.0), 200_000, 3).unwrap();
        let (_, v) = mean_var(&x);
        assert!((v - 1.0).abs() < 0.02, "{v}");
    }

    #[test]
    fn ar1_moments() {
        let x = gen_input(&SignalModel::ar1(0.8, 1.0), 200_000, 4).unwrap();
        let (_, v) = mean_var(&x);
        assert!((v - 1.0).abs() < 0.02, "{v}");
        assert!((lag1(&x) - 0.8).abs() < 0.02);
    }

    #[test]
    fn ar1_zero_pole_is_uncorrelated() {
        let x = gen_input(&SignalModel::ar1(0.0, 1.0), 200_000, 5).unwrap();
        assert!(lag1(&x).abs() < 4.0 / (x.len() as f64).sqrt());
    }

    #[test]
    fn signal_model_validation() {
        assert!(SignalModel::white(0.0).validate().is_err());
        assert!(SignalModel::ar1(1.0, 1.0).validate().is_err());
        assert!(gen_input(&SignalModel::white(1.0), 0, 0).is_err());
    }

    #[test]
    fn make_system_support() {
        let mut rng = trial_rng(1, 0, SYSTEM_STREAM);
        let (w, nz) = make_system(256, 16, MagnitudeRule::Random, &mut rng).unwrap();
        assert_eq!(w.iter().filter(|&&x| x != 0.0).count(), 16);
        assert_eq!(nz.len(), 16);
        let (w, _) = make_system(8, 8, MagnitudeRule::Unit, &mut rng).unwrap();
        assert!(w.iter().all(|&x| x == 1.0 || x == -1.0));
        let (w, nz) = make_system(8, 0, MagnitudeRule::Random, &mut rng).unwrap();
        assert!(w.iter().all(|&x| x == 0.0) && nz.is_empty());
        assert!(make_system(4, 5, MagnitudeRule::Unit, &mut rng).is_err());
    }

    #[test]
    fn inactive_is_complement() {
        let seg = Segment {
            duration: 1,
            w_opt: vec![0.0, 1.0, 0.0, -2.0],
            active: vec![1, 3],
        };
        assert_eq!(seg.inactive(), vec![0, 2]);
    }

    fn impulse_scenario(noise: f64) -> SystemScenario {
        let mut w = vec![0.0; 4];
        w[0] = 1.0;
        SystemScenario {
            taps: 4,
            segments: vec![Segment {
                duration: 50,
                w_opt: w,
                active: vec![0],
            }],
            noise_variance: noise,
        }
    }

    #[test]
    fn identity_channel_reproduces_input() {
        let sc = impulse_scenario(0.0);
        for obs in sc.stream(&SignalModel::white(1.0), 9, 0) {
            assert_eq!(obs.d, obs.u[0]);
            assert_eq!(obs.epsilon, 0.0);
        }
    }

    #[test]
    fn regressor_is_sliding_window_with_zero_prehistory() {
        let sc = impulse_scenario(0.0);
        let obs: Vec<Observation> = sc.stream(&SignalModel::white(1.0), 9, 0).collect();
        assert_eq!(obs.len(), 50);
        assert_eq!(&obs[0].u[1..], &[0.0, 0.0, 0.0]);
        for n in 1..obs.len() {
            for k in 1..4 {
                assert_eq!(obs[n].u[k], obs[n - 1].u[k - 1]);
            }
        }
    }

    #[test]
    fn constant_input_dc_gain() {
        let w = vec![0.5, -0.25, 1.0, 0.0];
        let sc = SystemScenario {
            taps: 4,
            segments: vec![Segment {
                duration: 10,
                w_opt: w,
                active: vec![0, 1, 2],
            }],
            noise_variance: 0.0,
        };
        let obs: Vec<Observation> = sc
            .stream(&SignalModel::white(1.0), 1, 0)
            .with_constant_input(1.0)
            .collect();
        for o in &obs[4..] {
            assert!((o.d - 1.25).abs() < 1e-15);
        }
    }

    #[test]
    fn segment_switch_changes_system() {
        let specs = [
            SegmentSpec {
                duration: 6000,
                active: 8,
                magnitude_rule: MagnitudeRule::Random,
            },
            SegmentSpec {
                duration: 10,
                active: 2,
                magnitude_rule: MagnitudeRule::Random,
            },
        ];
        let sc = SystemScenario::generate(8, &specs, 0.0, 5).unwrap();
        assert_ne!(sc.segments[0].w_opt, sc.segments[1].w_opt);
        let obs: Vec<Observation> = sc.stream(&SignalModel::white(1.0), 5, 0).collect();
        assert_eq!(obs.len(), 6010);
        assert_eq!(obs[5999].segment, 0);
        assert_eq!(obs[6000].segment, 1);
        let d0 = crate::linalg::dot(&obs[6000].u, &sc.segments[1].w_opt);
        assert_eq!(obs[6000].d, d0);
        assert_eq!(sc.segment_at(5999), Some(0));
        assert_eq!(sc.segment_at(6000), Some(1));
        assert_eq!(sc.segment_at(6010), None);
    }

    #[test]
    fn streams_are_reproducible_and_trial_dependent() {
        let specs = [SegmentSpec {
            duration: 100,
            active: 2,
            magnitude_rule: MagnitudeRule::Random,
        }];
        let sc = SystemScenario::generate(8, &specs, 1e-3, 5).unwrap();
        let m = SignalModel::ar1(0.5, 1.0);
        let a: Vec<_> = sc.stream(&m, 5, 3).collect();
        let b: Vec<_> = sc.stream(&m, 5, 3).collect();
        let c: Vec<_> = sc.stream(&m, 5, 4).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn noise_independent_of_input() {
        let specs = [SegmentSpec {
            duration: 100_000,
            active: 1,
            magnitude_rule: MagnitudeRule::Unit,
        }];
        let sc = SystemScenario::generate(1, &specs, 1.0, 8).unwrap();
        let obs: Vec<_> = sc.stream(&SignalModel::white(1.0), 8, 0).collect();
        let n = obs.len() as f64;
        let c: f64 = obs.iter().map(|o| o.u[0] * o.epsilon).sum::<f64>() / n;
        assert!(c.abs() <= 4.0 / n.sqrt());
    }

    #[test]
    fn ar1_regressor_covariance() {
        let model = SignalModel::ar1(0.8, 1.0);
        let specs = [SegmentSpec {
            duration: 100_000,
            active: 1,
            magnitude_rule: MagnitudeRule::Unit,
        }];
        let sc = SystemScenario::generate(6, &specs, 0.0, 2).unwrap();
        let mut r = [[0.0f64; 6]; 6];
        let mut count = 0.0;
        for o in sc.stream(&model, 2, 0).skip(6) {
            for i in 0..6 {
                for j in 0..6 {
                    r[i][j] += o.u[i] * o.u[j];
                }
            }
            count += 1.0;
        }
        for i in 0..6 {
            for j in 0..6 {
                let est = r[i][j] / count;
                let expect = model.autocovariance(i.abs_diff(j));
                assert!(
                    (est - expect).abs() < 0.05,
                    "R[{i}][{j}] = {est} vs {expect}"
                );
            }
        }
    }
}
