//! Affine-projection weight updates: APA, zero-attracting APA (ZA-APA),
//! zero-attracting proportionate APA (ZA-PAPA), and the NLMS with
//! orthogonal correction factors (NLMS-OCF) form used as an oracle.
//!
//! All variants share one update
//!
//! ```text
//! e  = d − Uᵀw
//! w ← w + μ·G·U·(εI + UᵀGU)⁻¹·e − ρ·sgn(w)
//! ```
//!
//! with `G = I` for APA/ZA-APA and `ρ = 0` for APA.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{self, dot, gram_of_columns, solve_spd, Matrix};

/// Proportionate gain parameters for ZA-PAPA.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct Proportionate {
    /// Activation floor constant: inactive taps get at least this fraction
    /// of the largest gain.
    pub activation: f64,
    /// Startup constant keeping the gains alive while `w ≈ 0`.
    pub startup: f64,
}

impl Default for Proportionate {
    fn default() -> Self {
        Proportionate {
            activation: 0.01,
            startup: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterConfig {
    pub taps: usize,
    /// Projection order M.
    pub order: usize,
    /// Step size μ in (0, 2).
    pub step: f64,
    /// Zero-attractor constant ρ.
    pub attractor: f64,
    /// Regularization ε added to the projection Gram matrix.
    pub regularization: f64,
    pub proportionate: Option<Proportionate>,
}

/// `1e-4·M·σ_u²`, small against the typical Gram diagonal `L·σ_u²`.
pub fn default_regularization(order: usize, input_variance: f64) -> f64 {
    1e-4 * order as f64 * input_variance
}

impl FilterConfig {
    pub fn apa(taps: usize, order: usize, step: f64, regularization: f64) -> Self {
        FilterConfig {
            taps,
            order,
            step,
            attractor: 0.0,
            regularization,
            proportionate: None,
        }
    }

    pub fn za_apa(
        taps: usize,
        order: usize,
        step: f64,
        attractor: f64,
        regularization: f64,
    ) -> Self {
        FilterConfig {
            attractor,
            ..FilterConfig::apa(taps, order, step, regularization)
        }
    }

    pub fn za_papa(
        taps: usize,
        order: usize,
        step: f64,
        attractor: f64,
        regularization: f64,
        gains: Proportionate,
    ) -> Self {
        FilterConfig {
            proportionate: Some(gains),
            ..FilterConfig::za_apa(taps, order, step, attractor, regularization)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.order == 0 || self.taps < self.order {
            return Err(Error::invalid("need M >= 1 and L >= M"));
        }
        if !(self.step > 0.0 && self.step < 2.0) {
            return Err(Error::invalid("step size must lie in (0, 2)"));
        }
        if !(self.attractor >= 0.0) || !self.attractor.is_finite() {
            return Err(Error::invalid(
                "zero-attractor constant must be finite and non-negative",
            ));
        }
        if !(self.regularization >= 0.0) || !self.regularization.is_finite() {
            return Err(Error::invalid(
                "regularization must be finite and non-negative",
            ));
        }
        if let Some(p) = self.proportionate {
            if !(p.activation > 0.0 && p.startup > 0.0) {
                return Err(Error::invalid("proportionate constants must be positive"));
            }
        }
        Ok(())
    }
}

/// The last M regressors and desired samples, newest first.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressorBuffer {
    columns: Vec<Vec<f64>>,
    desired: Vec<f64>,
}

impl RegressorBuffer {
    /// Zero-filled buffer of `order` regressors of length `taps`.
    pub fn new(taps: usize, order: usize) -> Self {
        RegressorBuffer {
            columns: vec![vec![0.0; taps]; order],
            desired: vec![0.0; order],
        }
    }

    /// Buffer holding exactly the given regressors (newest first).
    pub fn from_parts(columns: Vec<Vec<f64>>, desired: Vec<f64>) -> Result<Self> {
        let taps = columns.first().map_or(0, |c| c.len());
        if columns.is_empty()
            || columns.len() != desired.len()
            || columns.iter().any(|c| c.len() != taps)
        {
            return Err(Error::invalid("inconsistent regressor buffer dimensions"));
        }
        Ok(RegressorBuffer { columns, desired })
    }

    pub fn taps(&self) -> usize {
        self.columns[0].len()
    }

    pub fn order(&self) -> usize {
        self.columns.len()
    }

    /// Shifts in a new regressor, evicting the oldest.
    pub fn push(&mut self, u: &[f64], d: f64) -> Result<()> {
        if u.len() != self.taps() {
            return Err(Error::invalid(
                "regressor length differs from buffer length",
            ));
        }
        self.columns.rotate_right(1);
        self.columns[0].copy_from_slice(u);
        self.desired.rotate_right(1);
        self.desired[0] = d;
        Ok(())
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn desired(&self) -> &[f64] {
        &self.desired
    }

    /// Newest regressor u(n).
    pub fn newest(&self) -> &[f64] {
        &self.columns[0]
    }

    /// The `L×M` data matrix U(n).
    pub fn to_matrix(&self) -> Matrix {
        let cols: Vec<&[f64]> = self.columns.iter().map(|c| c.as_slice()).collect();
        Matrix::from_columns(&cols).expect("columns have equal length")
    }
}

/// Diagonal of the ZA-PAPA gain matrix with shaping function `shape`
/// applied to tap magnitudes.
pub fn gain_matrix_with(
    w: &[f64],
    activation: f64,
    startup: f64,
    shape: impl Fn(f64) -> f64,
) -> Vec<f64> {
    let shaped: Vec<f64> = w.iter().map(|x| shape(x.abs())).collect();
    let gamma_min = shaped.iter().copied().fold(startup, f64::max);
    let gamma: Vec<f64> = shaped
        .iter()
        .map(|&s| f64::max(activation * gamma_min, s))
        .collect();
    let mean = gamma.iter().sum::<f64>() / gamma.len() as f64;
    gamma.into_iter().map(|g| g / mean).collect()
}

/// Diagonal of the ZA-PAPA gain matrix with identity shaping.
pub fn gain_matrix(w: &[f64], activation: f64, startup: f64) -> Vec<f64> {
    gain_matrix_with(w, activation, startup, |x| x)
}

/// Weights of one adaptive filter plus its configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterState {
    pub w: Vec<f64>,
    pub config: FilterConfig,
    updates: u64,
}

impl FilterState {
    /// Zero-initialized filter.
    pub fn new(config: FilterConfig) -> Result<Self> {
        config.validate()?;
        Ok(FilterState {
            w: vec![0.0; config.taps],
            config,
            updates: 0,
        })
    }

    pub fn with_weights(config: FilterConfig, w: Vec<f64>) -> Result<Self> {
        config.validate()?;
        if w.len() != config.taps {
            return Err(Error::invalid("initial weights have the wrong length"));
        }
        Ok(FilterState {
            w,
            config,
            updates: 0,
        })
    }

    /// Number of updates applied so far.
    pub fn updates(&self) -> u64 {
        self.updates
    }

    /// Newest-sample output `u(n)ᵀw` and error vector `d − Uᵀw`.
    pub fn output_and_error(&self, buf: &RegressorBuffer) -> (f64, Vec<f64>) {
        let e: Vec<f64> = buf
            .columns
            .iter()
            .zip(&buf.desired)
            .map(|(u, d)| d - dot(u, &self.w))
            .collect();
        (dot(buf.newest(), &self.w), e)
    }

    /// A-priori error `uᵀ(w_opt − w)`.
    pub fn a_priori_error(&self, u: &[f64], w_opt: &[f64]) -> f64 {
        u.iter()
            .zip(w_opt)
            .zip(&self.w)
            .map(|((u, o), w)| u * (o - w))
            .sum()
    }

    fn check_buffer(&self, buf: &RegressorBuffer) -> Result<()> {
        if buf.taps() != self.config.taps || buf.order() != self.config.order {
            return Err(Error::invalid(
                "buffer dimensions differ from filter configuration",
            ));
        }
        Ok(())
    }

    /// Adds `μ·G·U·(εI + UᵀGU)⁻¹·e` to `w` (no attractor).
    fn projection_update(&mut self, buf: &RegressorBuffer, gains: Option<&[f64]>) -> Result<()> {
        let (_, e) = self.output_and_error(buf);
        let gram = gram_of_columns(&buf.columns, gains);
        if !e.iter().chain(gram.data()).all(|x| x.is_finite()) {
            return Err(Error::Divergence {
                sample: self.updates,
            });
        }
        let x = solve_spd(&gram, &e, self.config.regularization)?;
        let mu = self.config.step;
        for (u, xj) in buf.columns.iter().zip(&x) {
            let c = mu * xj;
            match gains {
                None => self.w.iter_mut().zip(u).for_each(|(w, u)| *w += c * u),
                Some(g) => self
                    .w
                    .iter_mut()
                    .zip(u)
                    .zip(g)
                    .for_each(|((w, u), g)| *w += c * g * u),
            }
        }
        Ok(())
    }

    fn attract(&mut self, sign_before: &[f64]) {
        let rho = self.config.attractor;
        if rho != 0.0 {
            self.w
                .iter_mut()
                .zip(sign_before)
                .for_each(|(w, s)| *w -= rho * s);
        }
    }

    fn finish(&mut self) -> Result<()> {
        let sample = self.updates;
        self.updates += 1;
        if self.w.iter().all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err(Error::Divergence { sample })
        }
    }

    /// Plain APA update; ignores the configured attractor and gains.
    pub fn apa_step(&mut self, buf: &RegressorBuffer) -> Result<()> {
        self.check_buffer(buf)?;
        self.projection_update(buf, None)?;
        self.finish()
    }

    /// APA update followed by `−ρ·sgn(w)` evaluated before the update.
    pub fn za_apa_step(&mut self, buf: &RegressorBuffer) -> Result<()> {
        self.check_buffer(buf)?;
        let s = linalg::sign_vector(&self.w);
        self.projection_update(buf, None)?;
        self.attract(&s);
        self.finish()
    }

    /// ZA-PAPA update with an explicit gain diagonal.
    pub fn za_papa_step_with_gains(&mut self, buf: &RegressorBuffer, gains: &[f64]) -> Result<()> {
        self.check_buffer(buf)?;
        if gains.len() != self.config.taps {
            return Err(Error::invalid("gain vector has the wrong length"));
        }
        let s = linalg::sign_vector(&self.w);
        self.projection_update(buf, Some(gains))?;
        self.attract(&s);
        self.finish()
    }

    /// ZA-PAPA update with gains from the current weights.
    pub fn za_papa_step(&mut self, buf: &RegressorBuffer) -> Result<()> {
        let p = self
            .config
            .proportionate
            .ok_or_else(|| Error::invalid("ZA-PAPA needs proportionate parameters"))?;
        let g = gain_matrix(&self.w, p.activation, p.startup);
        self.za_papa_step_with_gains(buf, &g)
    }

    /// Update selected by the configuration: ZA-PAPA when proportionate
    /// gains are configured, ZA-APA otherwise (APA when `ρ = 0`).
    pub fn step(&mut self, buf: &RegressorBuffer) -> Result<()> {
        if self.config.proportionate.is_some() {
            self.za_papa_step(buf)
        } else {
            self.za_apa_step(buf)
        }
    }

    /// NLMS with orthogonal correction factors over `recent = [(u(n), d(n)), (u(n-1), d(n-1)), …]`.
    ///
    /// Each older regressor contributes only its component orthogonal to the
    /// newer ones; components with relative squared norm below `1e-12` are
    /// dropped.
    pub fn nlms_ocf_step(&mut self, recent: &[(Vec<f64>, f64)]) -> Result<()> {
        if recent.is_empty() {
            return Err(Error::invalid("NLMS-OCF needs at least one regressor"));
        }
        if recent.iter().any(|(u, _)| u.len() != self.config.taps) {
            return Err(Error::invalid(
                "regressor length differs from filter length",
            ));
        }
        let mu = self.config.step;
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(recent.len());
        let mut wk = self.w.clone();
        for (k, (u, d)) in recent.iter().enumerate() {
            let mut comp = u.clone();
            for b in &basis {
                let c = dot(&comp, b) / dot(b, b);
                comp.iter_mut().zip(b).for_each(|(x, b)| *x -= c * b);
            }
            let norm2 = dot(&comp, &comp);
            let raw = dot(u, u);
            let keep = if k == 0 {
                norm2 > 0.0
            } else {
                norm2 >= 1e-12 * raw && norm2 > 0.0
            };
            if !keep {
                continue;
            }
            let ek = d - dot(&wk, u);
            let mu_k = mu * ek / norm2;
            wk.iter_mut().zip(&comp).for_each(|(w, c)| *w += mu_k * c);
            basis.push(comp);
        }
        self.w = wk;
        self.finish()
    }
}
