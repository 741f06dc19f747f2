//! Shared pieces of the acceptance report.
//!
//! The checks live in `tests/acceptance.rs`. This crate exists so that the
//! target sorts after every other test target in the workspace.

use std::process::ExitCode;

use zamix::output::to_db;

pub struct Check {
    pub label: String,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(label: impl Into<String>, name: &'static str, pass: bool, detail: String) -> Self {
        Check {
            label: label.into(),
            name,
            pass,
            detail,
        }
    }
}

/// Prints one line per check plus a tally; fails if any check failed.
pub fn report(sections: &[(&str, Vec<Check>)]) -> ExitCode {
    let (mut passed, mut failed) = (0, 0);
    for (title, checks) in sections {
        println!("{title}");
        for c in checks {
            println!(
                "{} {} {}: {}",
                c.label,
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            );
            if c.pass {
                passed += 1;
            } else {
                failed += 1;
            }
        }
    }
    println!("{passed} passed, {failed} failed");
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

pub fn db_gap(a: f64, b: f64) -> f64 {
    to_db(a) - to_db(b)
}

pub fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    s / n as f64
}
