//! Steady-state quantities as a function of the zero-attractor constant.

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::harness::{run_experiment, RunOptions, SegmentSummary};

/// Parses `lo:hi:steps` into `steps` log-spaced values from `lo` to `hi`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = || HarnessError::Invalid(format!("grid `{spec}` is not of the form lo:hi:steps"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [lo, hi, steps] = parts[..] else {
        return Err(bad());
    };
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    let steps: usize = steps.trim().parse().map_err(|_| bad())?;
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) || steps == 0 {
        return Err(HarnessError::Invalid(format!(
            "grid `{spec}` needs 0 < lo <= hi and steps >= 1"
        )));
    }
    if steps == 1 {
        return Ok(vec![lo]);
    }
    let r = (hi / lo).ln() / (steps - 1) as f64;
    Ok((0..steps)
        .map(|k| {
            if k + 1 == steps {
                hi
            } else {
                lo * (r * k as f64).exp()
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub rho: f64,
    pub summary: SegmentSummary,
}

/// Runs the experiment once per ρ and returns every segment's summary.
pub fn sweep_rho(cfg: &ExperimentConfig, rhos: &[f64], opts: &RunOptions) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for &rho in rhos {
        let mut c = cfg.clone();
        c.filter2.attractor = rho;
        let res = run_experiment(&c, opts)?;
        rows.extend(
            res.segments
                .into_iter()
                .map(|summary| SweepRow { rho, summary }),
        );
    }
    Ok(rows)
}
