//! Convex mixing of the two component filters.
//!
//! The mixing weight is `λ = sigmoid(a)`, and `a` follows a stochastic
//! gradient on the squared combined error, clipped to `[−a⁺, a⁺]`.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Sigmoid `1/(1 + e^{−a})`.
pub fn lambda_of(a: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-a))
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct MixingConfig {
    /// Step size μ_a of the `a` update.
    pub step: f64,
    /// Clipping bound a⁺.
    pub a_plus: f64,
    /// Initial value a(0).
    pub a0: f64,
}

impl Default for MixingConfig {
    fn default() -> Self {
        MixingConfig {
            step: 100.0,
            a_plus: 4.0,
            a0: 0.0,
        }
    }
}

impl MixingConfig {
    /// `λ⁺ = sigmoid(a⁺)`.
    pub fn lambda_plus(&self) -> f64 {
        lambda_of(self.a_plus)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CombinationState {
    a: f64,
    a_plus: f64,
    step: f64,
    lambda: f64,
}

/// Outputs of one combination step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CombinedOutputs {
    pub y: f64,
    pub y1: f64,
    pub y2: f64,
    pub e: f64,
}

/// `y = λy1 + (1−λ)y2`, `e = d − y`.
pub fn combine(lambda: f64, y1: f64, y2: f64, d: f64) -> CombinedOutputs {
    let y = lambda * y1 + (1.0 - lambda) * y2;
    CombinedOutputs {
        y,
        y1,
        y2,
        e: d - y,
    }
}

/// Equivalent weight vector `λw1 + (1−λ)w2`.
pub fn combined_weight(lambda: f64, w1: &[f64], w2: &[f64]) -> Result<Vec<f64>> {
    if w1.len() != w2.len() {
        return Err(Error::invalid("component weight vectors differ in length"));
    }
    Ok(w1
        .iter()
        .zip(w2)
        .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
        .collect())
}

impl CombinationState {
    pub fn new(config: &MixingConfig) -> Result<Self> {
        if !(config.a_plus > 0.0) || !config.a_plus.is_finite() {
            return Err(Error::invalid("a_plus must be positive and finite"));
        }
        if !(config.step > 0.0) || !config.step.is_finite() {
            return Err(Error::invalid("mixing step must be positive and finite"));
        }
        if !config.a0.is_finite() {
            return Err(Error::invalid("a0 must be finite"));
        }
        let a = config.a0.clamp(-config.a_plus, config.a_plus);
        Ok(CombinationState {
            a,
            a_plus: config.a_plus,
            step: config.step,
            lambda: lambda_of(a),
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn lambda_plus(&self) -> f64 {
        lambda_of(self.a_plus)
    }

    /// `a ← clip(a + μ_a·e·(y1 − y2)·λ(1 − λ))`.
    pub fn update_a(&mut self, e: f64, y1: f64, y2: f64) -> Result<()> {
        if !(e.is_finite() && y1.is_finite() && y2.is_finite()) {
            return Err(Error::invalid("mixing update needs finite inputs"));
        }
        let l = self.lambda;
        let a = self.a + self.step * e * (y1 - y2) * l * (1.0 - l);
        self.a = a.clamp(-self.a_plus, self.a_plus);
        self.lambda = lambda_of(self.a);
        Ok(())
    }
}
