//! Three-segment identification scenarios: a non-sparse system, then a
//! semi-sparse one, then a highly sparse one.
//!
//! `Full` is the original 256-tap setup. `Desk` shrinks it to 64 taps so
//! it runs in CI; its ρ is the full-scale ρ times the ratio of the sparse
//! segment's ρ bounds at the two scales.

use zamix_core::theory::rho_bound_sparse_case;
use zamix_core::{MagnitudeRule, MixingConfig, SegmentSpec, TheoryInputs};

use crate::config::{ExperimentConfig, FilterKind, FilterSpec, InputConfig, ScenarioConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Scale {
    #[value(name = "paper-full")]
    Full,
    #[value(name = "paper-desk")]
    Desk,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Excitation {
    White,
    Ar1,
}

pub const NOISE_VARIANCE: f64 = 1e-3;
pub const STEP: f64 = 0.5;
pub const AR1_POLE: f64 = 0.8;
pub const FULL_RHO_WHITE: f64 = 8e-6;
pub const FULL_RHO_AR1: f64 = 3e-5;
pub const SEED: u64 = 20_140_601;

struct Shape {
    taps: usize,
    order: usize,
    duration: usize,
    active: [usize; 3],
    runs: usize,
    mixing_step: f64,
}

fn shape(scale: Scale) -> Shape {
    match scale {
        Scale::Full => Shape {
            taps: 256,
            order: 8,
            duration: 6000,
            active: [256, 80, 16],
            runs: 1000,
            mixing_step: 100.0,
        },
        Scale::Desk => Shape {
            taps: 64,
            order: 4,
            duration: 4000,
            active: [64, 20, 4],
            runs: 200,
            mixing_step: 100.0,
        },
    }
}

fn sparse_bound(scale: Scale) -> f64 {
    let s = shape(scale);
    let inp = TheoryInputs::white(s.taps, s.active[2], s.order, STEP, 0.0, NOISE_VARIANCE, 1.0)
        .expect("preset parameters are valid");
    rho_bound_sparse_case(&inp)
}

/// Desk-to-full ratio of the sparse-segment ρ bound.
pub fn rho_scale() -> f64 {
    sparse_bound(Scale::Desk) / sparse_bound(Scale::Full)
}

pub fn paper_scenario(scale: Scale, excitation: Excitation) -> ExperimentConfig {
    let s = shape(scale);
    let (input, full_rho) = match excitation {
        Excitation::White => (InputConfig::White { variance: 1.0 }, FULL_RHO_WHITE),
        Excitation::Ar1 => (
            InputConfig::Ar1 {
                pole: AR1_POLE,
                variance: 1.0,
            },
            FULL_RHO_AR1,
        ),
    };
    let rho = match scale {
        Scale::Full => full_rho,
        Scale::Desk => full_rho * rho_scale(),
    };
    let filter = |kind, attractor| FilterSpec {
        kind,
        order: s.order,
        step: STEP,
        attractor,
        regularization: None,
        proportionate: None,
    };
    ExperimentConfig {
        scenario: ScenarioConfig {
            taps: s.taps,
            segments: s
                .active
                .iter()
                .map(|&k| SegmentSpec {
                    duration: s.duration,
                    active: k,
                    magnitude_rule: MagnitudeRule::Random,
                })
                .collect(),
            noise_variance: NOISE_VARIANCE,
        },
        input,
        filter1: filter(FilterKind::Apa, 0.0),
        filter2: filter(FilterKind::Zaapa, rho),
        mixing: MixingConfig {
            step: s.mixing_step,
            ..MixingConfig::default()
        },
        runs: s.runs,
        seed: SEED,
        steady_window_fraction: 0.1,
    }
}
