//! Text table of the closed-form steady-state predictions.

use std::fmt::Write;

use zamix_core::theory::predict;
use zamix_core::SteadyStatePrediction;

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::output::to_db;

/// Predictions for every segment of the configured scenario.
pub fn predictions(cfg: &ExperimentConfig) -> Result<Vec<SteadyStatePrediction>> {
    cfg.validate()?;
    let lp = cfg.mixing.lambda_plus();
    (0..cfg.scenario.segments.len())
        .map(|s| Ok(predict(&cfg.theory_inputs(s)?, lp)?))
        .collect()
}

pub fn prediction_table(cfg: &ExperimentConfig) -> Result<String> {
    let preds = predictions(cfg)?;
    let mut t = String::new();
    let _ = writeln!(
        t,
        "L={} M={} mu={} rho={:e} xi0={:e} lambda+={:.6}",
        cfg.scenario.taps,
        cfg.filter2.order,
        cfg.filter2.step,
        cfg.filter2.attractor,
        cfg.scenario.noise_variance,
        cfg.mixing.lambda_plus()
    );
    let _ = writeln!(
        t,
        "{:>3} {:>4} {:>12} {:>12} {:>12} {:>12} {:>8} {:>13} {:>12} {:>12}",
        "seg", "K", "J1", "J2", "J12", "J", "lambda", "regime", "rho_global", "rho_sparse"
    );
    for (s, (p, seg)) in preds.iter().zip(&cfg.scenario.segments).enumerate() {
        let global = p
            .rho_bound_global
            .map_or("none".to_string(), |b| format!("{b:.4e}"));
        let _ = writeln!(
            t,
            "{:>3} {:>4} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e} {:>8.4} {:>13} {:>12} {:>12.4e}",
            s,
            seg.active,
            p.j1,
            p.j2,
            p.j12,
            p.combined,
            p.lambda_inf,
            p.regime.to_string(),
            global,
            p.rho_bound_sparse
        );
        let _ = writeln!(
            t,
            "{:>3} {:>4} {:>9.2} dB {:>9.2} dB {:>9.2} dB {:>9.2} dB",
            "",
            "",
            to_db(p.j1),
            to_db(p.j2),
            to_db(p.j12),
            to_db(p.combined)
        );
    }
    Ok(t)
}
