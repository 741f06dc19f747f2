//! Experiment configuration and its JSON form.
//!
//! ```json
//! {
//!   "scenario": {
//!     "L": 64,
//!     "segments": [{ "duration": 4000, "K": 4, "magnitude_rule": "random" }],
//!     "noise_variance": 0.001
//!   },
//!   "input": { "kind": "ar1", "pole": 0.8, "variance": 1.0 },
//!   "filter1": { "kind": "apa", "order": 4, "step": 0.5 },
//!   "filter2": { "kind": "zaapa", "order": 4, "step": 0.5, "attractor": 2.2e-5 },
//!   "mixing": { "step": 100.0, "a_plus": 4.0, "a0": 0.0 },
//!   "runs": 200,
//!   "seed": 7,
//!   "steady_window_fraction": 0.1
//! }
//! ```
//!
//! The unknown systems are not stored: they are redrawn from `seed`, so a
//! config fully determines an experiment.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use zamix_core::filters::default_regularization;
use zamix_core::{
    FilterConfig, MixingConfig, Proportionate, SegmentSpec, SignalModel, SystemScenario,
    TheoryInputs,
};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(rename = "L")]
    pub taps: usize,
    pub segments: Vec<SegmentSpec>,
    pub noise_variance: f64,
}

fn unit_variance() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum InputConfig {
    White {
        #[serde(default = "unit_variance")]
        variance: f64,
    },
    Ar1 {
        pole: f64,
        #[serde(default = "unit_variance")]
        variance: f64,
    },
}

impl InputConfig {
    pub fn model(&self) -> SignalModel {
        match *self {
            InputConfig::White { variance } => SignalModel::white(variance),
            InputConfig::Ar1 { pole, variance } => SignalModel::ar1(pole, variance),
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            InputConfig::White { variance } | InputConfig::Ar1 { variance, .. } => variance,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FilterKind {
    Apa,
    Zaapa,
    Zapapa,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterSpec {
    pub kind: FilterKind,
    pub order: usize,
    pub step: f64,
    #[serde(default)]
    pub attractor: f64,
    /// Defaults to `1e-4·M·σ_u²`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regularization: Option<f64>,
    /// ZA-PAPA gain constants; defaults apply when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proportionate: Option<Proportionate>,
}

impl FilterSpec {
    pub fn to_filter(&self, taps: usize, input_variance: f64) -> FilterConfig {
        let eps = self
            .regularization
            .unwrap_or_else(|| default_regularization(self.order, input_variance));
        match self.kind {
            FilterKind::Apa => FilterConfig::apa(taps, self.order, self.step, eps),
            FilterKind::Zaapa => {
                FilterConfig::za_apa(taps, self.order, self.step, self.attractor, eps)
            }
            FilterKind::Zapapa => FilterConfig::za_papa(
                taps,
                self.order,
                self.step,
                self.attractor,
                eps,
                self.proportionate.unwrap_or_default(),
            ),
        }
    }
}

fn default_window() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: ScenarioConfig,
    pub input: InputConfig,
    pub filter1: FilterSpec,
    pub filter2: FilterSpec,
    #[serde(default)]
    pub mixing: MixingConfig,
    pub runs: usize,
    pub seed: u64,
    #[serde(default = "default_window")]
    pub steady_window_fraction: f64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(HarnessError::Invalid(m.to_string()));
        if self.runs == 0 {
            return bad("runs must be at least 1");
        }
        if !(self.steady_window_fraction > 0.0 && self.steady_window_fraction <= 1.0) {
            return bad("steady_window_fraction must lie in (0, 1]");
        }
        if self.filter1.kind != FilterKind::Apa {
            return bad("filter1 must be an APA filter");
        }
        if self.filter2.kind == FilterKind::Apa {
            return bad("filter2 must be zaapa or zapapa");
        }
        self.input.model().validate()?;
        let s2 = self.input.variance();
        self.filter1.to_filter(self.scenario.taps, s2).validate()?;
        self.filter2.to_filter(self.scenario.taps, s2).validate()?;
        zamix_core::CombinationState::new(&self.mixing)?;
        Ok(())
    }

    /// Draws the piecewise-constant system from the experiment seed.
    pub fn build_scenario(&self) -> Result<SystemScenario> {
        let s = &self.scenario;
        Ok(SystemScenario::generate(
            s.taps,
            &s.segments,
            s.noise_variance,
            self.seed,
        )?)
    }

    pub fn filter1(&self) -> FilterConfig {
        self.filter1
            .to_filter(self.scenario.taps, self.input.variance())
    }

    pub fn filter2(&self) -> FilterConfig {
        self.filter2
            .to_filter(self.scenario.taps, self.input.variance())
    }

    /// White-input theory inputs for segment `segment` (ZA-APA as filter 2).
    pub fn theory_inputs(&self, segment: usize) -> Result<TheoryInputs> {
        let InputConfig::White { variance } = self.input else {
            return Err(HarnessError::Invalid(
                "closed-form predictions need white input".into(),
            ));
        };
        if self.filter2.kind != FilterKind::Zaapa {
            return Err(HarnessError::Invalid(
                "closed-form predictions model a ZA-APA filter 2".into(),
            ));
        }
        if self.filter1.order != self.filter2.order || self.filter1.step != self.filter2.step {
            return Err(HarnessError::Invalid(
                "closed-form predictions need matched M and μ".into(),
            ));
        }
        let seg = self
            .scenario
            .segments
            .get(segment)
            .ok_or_else(|| HarnessError::Invalid(format!("no segment {segment}")))?;
        Ok(TheoryInputs::white(
            self.scenario.taps,
            seg.active,
            self.filter2.order,
            self.filter2.step,
            self.filter2.attractor,
            self.scenario.noise_variance,
            variance,
        )?)
    }

    pub fn from_json_str(text: &str, origin: &Path) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            // serde_json already appends "at line L column C"
            HarnessError::Config {
                path: origin.to_path_buf(),
                message: format!("`{}`: {}", e.path(), e.inner()),
            }
        })?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

pub fn read_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    ExperimentConfig::from_json_str(&text, path)
}

pub fn write_config(cfg: &ExperimentConfig, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, cfg.to_json()? + "\n")?;
    Ok(())
}
