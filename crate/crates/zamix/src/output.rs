//! CSV writers for learning curves and ρ sweeps.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use crate::error::Result;
use crate::harness::LearningCurves;
use crate::sweep::SweepRow;

/// `10·log10(x)`; negative values give NaN.
pub fn to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// One row per iteration under the header `iter,j1,j2,j12,j,lambda`.
///
/// With `db` the four EMSE columns are written in decibels and λ stays
/// linear. A negative cross-EMSE has no decibel value and is written as NaN.
pub fn write_curves<W: Write>(curves: &LearningCurves, out: W, db: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["iter", "j1", "j2", "j12", "j", "lambda"])?;
    let f = |x: f64| if db { to_db(x) } else { x };
    for n in 0..curves.len() {
        w.serialize((
            n,
            f(curves.j1[n]),
            f(curves.j2[n]),
            f(curves.j12[n]),
            f(curves.j[n]),
            curves.lambda[n],
        ))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_curves_to_path(
    curves: &LearningCurves,
    path: impl AsRef<Path>,
    db: bool,
) -> Result<()> {
    write_curves(curves, File::create(path)?, db)
}

/// Header `rho,segment,j1,j2,j12,j,lambda,j2_minus_j12,se_j2_minus_j12`.
pub fn write_sweep<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "rho",
        "segment",
        "j1",
        "j2",
        "j12",
        "j",
        "lambda",
        "j2_minus_j12",
        "se_j2_minus_j12",
    ])?;
    for r in rows {
        let s = &r.summary;
        w.serialize((
            r.rho,
            s.segment,
            s.j1.mean,
            s.j2.mean,
            s.j12.mean,
            s.j.mean,
            s.lambda.mean,
            s.j2_minus_j12.mean,
            s.j2_minus_j12.se,
        ))?;
    }
    w.flush()?;
    Ok(())
}
