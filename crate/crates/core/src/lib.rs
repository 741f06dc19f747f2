//! Sparse system identification with an adaptive convex combination of an
//! affine projection filter (APA) and a zero-attracting APA (ZA-APA or its
//! proportionate variant ZA-PAPA), plus closed-form steady-state
//! predictors for the component EMSEs, the cross-EMSE and the stationary
//! mixing weight.
//!
//! The crate is `no_std` and needs only `alloc`.
//!
//! * [`linalg`]: Gram matrices, Cholesky solves, sign vectors.
//! * [`signals`]: white / AR(1) inputs, sparse systems, scenario streams.
//! * [`filters`]: APA, ZA-APA, ZA-PAPA and NLMS-OCF updates.
//! * [`combination`]: sigmoid mixing with clipped gradient update.
//! * [`theory`]: steady-state MSD/EMSE predictors and ρ bounds.
//! * [`trial`]: one realization of the full scheme over a scenario.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod combination;
pub mod error;
pub mod filters;
pub mod linalg;
pub mod signals;
pub mod theory;
pub mod trial;

pub use combination::{CombinationState, MixingConfig};
pub use error::{Error, Result};
pub use filters::{FilterConfig, FilterState, Proportionate, RegressorBuffer};
pub use signals::{InputKind, MagnitudeRule, SegmentSpec, SignalModel, SystemScenario};
pub use theory::{Regime, SteadyStatePrediction, TheoryInputs};
pub use trial::{run_trial, SampleRecord, TrialSetup, TrialView};
