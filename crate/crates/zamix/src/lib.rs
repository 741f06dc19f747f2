//! Monte-Carlo harness, experiment configs, presets and CSV output for the
//! convex APA / ZA-APA combination in [`zamix_core`].

pub mod config;
pub mod error;
pub mod harness;
pub mod output;
pub mod presets;
pub mod report;
pub mod sweep;

pub use config::{
    read_config, write_config, ExperimentConfig, FilterKind, FilterSpec, InputConfig,
    ScenarioConfig,
};
pub use error::{HarnessError, Result};
pub use harness::{
    run_experiment, steady_state_stats, steady_window, Estimate, ExperimentResult, LearningCurves,
    RunOptions, SegmentSummary, SteadyState, TapStats,
};
pub use presets::{paper_scenario, Excitation, Scale};
pub use sweep::{parse_grid, sweep_rho, SweepRow};
pub use zamix_core;
