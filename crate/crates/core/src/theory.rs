//! Closed-form steady-state predictors for the APA / ZA-APA combination.
//!
//! All closed forms assume white input, so every eigenvalue of the input
//! covariance is `σ_u²` and every eigendirection is drawn with probability
//! `p = 1/L`. Per-tap quantities are the diagonal of the steady-state
//! weight-error covariance (MSD) for one tap class:
//!
//! * APA, every tap: `λ̃₁ = μ/(2−μ)·ξ⁰·E[1/r²]`
//! * ZA-APA, active tap: `λ̃₁ + ρ²(2−μβ)/(μ²β²(2−μ))`
//! * ZA-APA, inactive tap: positive root of
//!   `λ̃ = (μ²βξ⁰E[1/r²] + ρ²) / (μ(2−μ)β + 2ρ(1−μβ)√(2/π)/√λ̃)`
//! * cross, active tap: `λ̃₁`
//! * cross, inactive tap: `μ²ξ⁰βE[1/r²] / (μ(2−μ)β + ρ(1−μβ)√(2/π)/√λ̃₂)`
//!
//! The `*_truncated` variants drop the `ρ²` terms and exist only for
//! comparison.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::sign;
use crate::signals::{trial_rng, SignalModel};

const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_4;

/// Probability that a given eigendirection is among M draws: `1 − (1−p)^M`.
pub fn beta_of(p: f64, order: usize) -> f64 {
    1.0 - libm::pow(1.0 - p, order as f64)
}

/// `E[1/‖u‖²]` for white Gaussian input: `1/(σ_u²(L−2))`.
pub fn inv_r2_expectation(taps: usize, input_variance: f64) -> Result<f64> {
    if taps < 3 {
        return Err(Error::invalid("analytic E[1/r²] needs L >= 3"));
    }
    if !(input_variance > 0.0) {
        return Err(Error::invalid("input variance must be positive"));
    }
    Ok(1.0 / (input_variance * (taps - 2) as f64))
}

/// Monte-Carlo estimate of `E[1/‖u‖²]` over `samples` consecutive
/// regressors of a stationary input (the first `L−1` are discarded).
pub fn inv_r2_monte_carlo(
    model: &SignalModel,
    taps: usize,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    model.validate()?;
    if taps == 0 || samples == 0 {
        return Err(Error::invalid("need positive length and sample count"));
    }
    let mut rng = trial_rng(seed, 0, 0);
    let mut window: Vec<f64> = Vec::with_capacity(taps);
    let mut gen = model.generator(&mut rng);
    for _ in 0..taps {
        window.push(gen.next().unwrap_or(0.0));
    }
    let mut energy: f64 = window.iter().map(|x| x * x).sum();
    let mut head = 0;
    let mut acc = 0.0;
    for k in 0..samples {
        if k % 4096 == 0 {
            // re-sum to stop drift of the running energy
            energy = window.iter().map(|x| x * x).sum();
        }
        acc += 1.0 / energy;
        let x = gen.next().unwrap_or(0.0);
        energy += x * x - window[head] * window[head];
        window[head] = x;
        head = (head + 1) % taps;
    }
    Ok(acc / samples as f64)
}

/// Inputs shared by all predictors.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TheoryInputs {
    pub taps: usize,
    /// Number of active taps K = |NZ|.
    pub active: usize,
    pub order: usize,
    pub step: f64,
    pub attractor: f64,
    pub noise_variance: f64,
    pub input_variance: f64,
    /// Per-eigendirection selection probability p.
    pub p: f64,
    pub beta: f64,
    pub inv_r2: f64,
}

impl TheoryInputs {
    /// White-input specialization: `p = 1/L`, analytic `E[1/r²]`.
    pub fn white(
        taps: usize,
        active: usize,
        order: usize,
        step: f64,
        attractor: f64,
        noise_variance: f64,
        input_variance: f64,
    ) -> Result<Self> {
        let p = 1.0 / taps.max(1) as f64;
        let inputs = TheoryInputs {
            taps,
            active,
            order,
            step,
            attractor,
            noise_variance,
            input_variance,
            p,
            beta: beta_of(p, order),
            inv_r2: inv_r2_expectation(taps, input_variance)?,
        };
        inputs.validate()?;
        Ok(inputs)
    }

    pub fn with_attractor(self, attractor: f64) -> Self {
        TheoryInputs { attractor, ..self }
    }

    pub fn with_active(self, active: usize) -> Self {
        TheoryInputs { active, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.active > self.taps {
            return Err(Error::invalid("K must not exceed L"));
        }
        if self.order == 0 {
            return Err(Error::invalid("projection order must be at least 1"));
        }
        if !(self.step > 0.0 && self.step < 2.0) {
            return Err(Error::invalid("step size must lie in (0, 2)"));
        }
        if !(self.attractor >= 0.0) || !(self.noise_variance >= 0.0) || !(self.inv_r2 > 0.0) {
            return Err(Error::invalid(
                "attractor and noise must be non-negative, E[1/r²] positive",
            ));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::invalid("beta must lie in (0, 1]"));
        }
        Ok(())
    }

    /// `μ(2−μ)β`
    fn d(&self) -> f64 {
        self.step * (2.0 - self.step) * self.beta
    }

    /// `1 − μβ`
    fn q(&self) -> f64 {
        1.0 - self.step * self.beta
    }

    /// `μ²βξ⁰E[1/r²]`
    fn noise_drive(&self) -> f64 {
        self.step * self.step * self.beta * self.noise_variance * self.inv_r2
    }
}

/// APA per-tap MSD `μ/(2−μ)·ξ⁰·E[1/r²]`.
pub fn apa_msd_per_tap(inp: &TheoryInputs) -> f64 {
    inp.step / (2.0 - inp.step) * inp.noise_variance * inp.inv_r2
}

/// ZA-APA MSD of an active tap.
pub fn zaapa_msd_active(inp: &TheoryInputs) -> f64 {
    let (mu, b, rho) = (inp.step, inp.beta, inp.attractor);
    apa_msd_per_tap(inp) + rho * rho * (2.0 - mu * b) / (mu * mu * b * b * (2.0 - mu))
}

/// ZA-APA MSD of an inactive tap (square of the positive root).
pub fn zaapa_msd_inactive(inp: &TheoryInputs) -> f64 {
    let rho = inp.attractor;
    let a = SQRT_2_OVER_PI * rho * inp.q();
    let d = inp.d();
    let root = (-a + libm::sqrt(a * a + (inp.noise_drive() + rho * rho) * d)) / d;
    root * root
}

/// Right-hand side of the inactive-tap fixed-point equation evaluated at `msd`.
pub fn zaapa_inactive_fixed_point(inp: &TheoryInputs, msd: f64) -> f64 {
    let rho = inp.attractor;
    let num = inp.noise_drive() + rho * rho;
    if rho == 0.0 {
        return num / inp.d();
    }
    num / (inp.d() + 2.0 * rho * inp.q() * SQRT_2_OVER_PI / libm::sqrt(msd))
}

/// Inactive-tap MSD with the `ρ²` terms dropped.
pub fn zaapa_msd_inactive_truncated(inp: &TheoryInputs) -> f64 {
    let l1 = apa_msd_per_tap(inp);
    l1 - libm::sqrt(8.0 / PI) * inp.attractor * inp.q() / inp.d() * libm::sqrt(l1)
}

/// Cross MSD of an active tap (independent of ρ).
pub fn cross_msd_active(inp: &TheoryInputs) -> f64 {
    apa_msd_per_tap(inp)
}

/// Cross MSD of an inactive tap, using the exact ZA-APA inactive MSD.
pub fn cross_msd_inactive(inp: &TheoryInputs) -> f64 {
    let rho = inp.attractor;
    if rho == 0.0 {
        return apa_msd_per_tap(inp);
    }
    let s2 = libm::sqrt(zaapa_msd_inactive(inp));
    inp.noise_drive() / (inp.d() + rho * inp.q() * SQRT_2_OVER_PI / s2)
}

/// Cross MSD of an inactive tap with the `ρ²` terms dropped.
pub fn cross_msd_inactive_truncated(inp: &TheoryInputs) -> f64 {
    let l1 = apa_msd_per_tap(inp);
    let (mu, b) = (inp.step, inp.beta);
    let q = inp.q();
    let denom =
        libm::sqrt(mu * mu * mu * b * b * (2.0 - mu) * inp.noise_variance * inp.inv_r2 / (q * q));
    l1 - l1 * SQRT_2_OVER_PI * inp.attractor / denom
}

/// EMSE `σ_u²·(K·msd_active + (L−K)·msd_inactive)`.
pub fn emse_from_msd(
    msd_active: f64,
    msd_inactive: f64,
    active: usize,
    taps: usize,
    input_variance: f64,
) -> f64 {
    let k = active as f64;
    let z = taps.saturating_sub(active) as f64;
    input_variance * (k * msd_active + z * msd_inactive)
}

/// Largest ρ keeping `J2(∞) ≤ J1(∞)`; `None` when the bound is undefined
/// (non-positive denominator).
pub fn rho_bound_global(inp: &TheoryInputs) -> Option<f64> {
    let (mu, b) = (inp.step, inp.beta);
    let l = inp.taps as f64;
    let k = inp.active as f64;
    let z = l - k;
    let q = inp.q();
    let c = k * z * (2.0 - mu * b) * (8.0 / PI * q * q + 2.0 * mu * (2.0 - mu) * b)
        + k * k * (2.0 - mu * b) * (2.0 - mu * b) * (2.0 - mu)
        - z * z * (2.0 - mu) * mu * mu * b * b;
    if !(c > 0.0) {
        return None;
    }
    let num = 8.0 / PI * z * z * q * q * mu * mu * mu * b * b * inp.noise_variance * inp.inv_r2;
    Some(libm::sqrt(num / c))
}

/// Largest ρ for which an inactive tap keeps `λ̃₂ ≤ λ̃₁₂` (sparse Case I).
pub fn rho_bound_sparse_case(inp: &TheoryInputs) -> f64 {
    let (mu, b) = (inp.step, inp.beta);
    let q2 = inp.q() * inp.q();
    let num = 2.0 / PI * mu * mu * q2 * b * inp.noise_variance * inp.inv_r2;
    let den = mu * (2.0 - mu) * b + 2.0 / PI * q2;
    libm::sqrt(num / den)
}

/// Steady-state mean of `w_opt − w₂`: `ρ/(μβ)·sgn(w_opt,i)` on active taps, zero elsewhere.
pub fn mean_weight_deviation(inp: &TheoryInputs, w_opt: &[f64]) -> Vec<f64> {
    let m = inp.attractor / (inp.step * inp.beta);
    w_opt.iter().map(|&w| m * sign(w)).collect()
}

/// Convergence regime of the mixing parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Regime {
    /// λ → λ⁺: the combination follows APA.
    NonSparse,
    /// Interior stationary point with `J1 < J2`.
    SemiSparse,
    /// λ → 1 − λ⁺: the combination follows ZA-APA.
    SparseCaseI,
    /// Interior stationary point with `J2 < J1`.
    SparseCaseII,
}

impl core::fmt::Display for Regime {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            Regime::NonSparse => "non_sparse",
            Regime::SemiSparse => "semi_sparse",
            Regime::SparseCaseI => "sparse_caseI",
            Regime::SparseCaseII => "sparse_caseII",
        })
    }
}

/// Stationary mean of λ and the regime it implies.
pub fn lambda_infinity(j1: f64, j2: f64, j12: f64, lambda_plus: f64) -> Result<(f64, Regime)> {
    if !(j1 >= 0.0 && j2 >= 0.0) {
        return Err(Error::invalid("EMSEs must be non-negative"));
    }
    let dj1 = j1 - j12;
    let dj2 = j2 - j12;
    match (dj1 > 0.0, dj2 > 0.0) {
        (false, true) => Ok((lambda_plus, Regime::NonSparse)),
        (true, false) => Ok((1.0 - lambda_plus, Regime::SparseCaseI)),
        (true, true) => {
            let l = (dj2 / (dj1 + dj2)).clamp(1.0 - lambda_plus, lambda_plus);
            let regime = if j2 < j1 {
                Regime::SparseCaseII
            } else {
                Regime::SemiSparse
            };
            Ok((l, regime))
        }
        (false, false) => Err(Error::AnalysisViolation(alloc::format!(
            "cross-EMSE {j12:e} is not below either EMSE ({j1:e}, {j2:e})"
        ))),
    }
}

/// `λ̄²J1 + 2λ̄(1−λ̄)J12 + (1−λ̄)²J2`.
pub fn combined_emse_prediction(lambda: f64, j1: f64, j2: f64, j12: f64) -> f64 {
    let m = 1.0 - lambda;
    lambda * lambda * j1 + 2.0 * lambda * m * j12 + m * m * j2
}

/// Full set of steady-state predictions for one system.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SteadyStatePrediction {
    pub msd_apa: f64,
    pub msd_active: f64,
    pub msd_inactive: f64,
    pub cross_active: f64,
    pub cross_inactive: f64,
    pub j1: f64,
    pub j2: f64,
    pub j12: f64,
    pub lambda_inf: f64,
    pub regime: Regime,
    pub combined: f64,
    pub rho_bound_global: Option<f64>,
    pub rho_bound_sparse: f64,
}

pub fn predict(inp: &TheoryInputs, lambda_plus: f64) -> Result<SteadyStatePrediction> {
    inp.validate()?;
    let msd_apa = apa_msd_per_tap(inp);
    let msd_active = zaapa_msd_active(inp);
    let msd_inactive = zaapa_msd_inactive(inp);
    let cross_active = cross_msd_active(inp);
    let cross_inactive = cross_msd_inactive(inp);
    let (k, l, s2) = (inp.active, inp.taps, inp.input_variance);
    let j1 = emse_from_msd(msd_apa, msd_apa, k, l, s2);
    let j2 = emse_from_msd(msd_active, msd_inactive, k, l, s2);
    let j12 = emse_from_msd(cross_active, cross_inactive, k, l, s2);
    let (lambda_inf, regime) = lambda_infinity(j1, j2, j12, lambda_plus)?;
    Ok(SteadyStatePrediction {
        msd_apa,
        msd_active,
        msd_inactive,
        cross_active,
        cross_inactive,
        j1,
        j2,
        j12,
        lambda_inf,
        regime,
        combined: combined_emse_prediction(lambda_inf, j1, j2, j12),
        rho_bound_global: rho_bound_global(inp),
        rho_bound_sparse: rho_bound_sparse_case(inp),
    })
}

/// Monte-Carlo estimate of `E[sgn(w)·w]` for `w ~ N(0, σ²)`.
pub fn sign_correlation_monte_carlo(sigma: f64, samples: usize, seed: u64) -> f64 {
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = trial_rng(seed, 0, 7);
    let mut acc = 0.0;
    for _ in 0..samples {
        let g: f64 = StandardNormal.sample(&mut rng);
        let w = sigma * g;
        acc += sign(w) * w;
    }
    acc / samples as f64
}
