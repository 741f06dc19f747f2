use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use zamix::output::{write_curves, write_curves_to_path, write_sweep};
use zamix::report::prediction_table;
use zamix::zamix_core::theory::rho_bound_sparse_case;
use zamix::{
    paper_scenario, parse_grid, read_config, run_experiment, sweep_rho, Excitation,
    ExperimentConfig, FilterKind, HarnessError, Result, RunOptions, Scale,
};

#[derive(Parser)]
#[command(
    name = "zamix",
    version,
    about = "Convex APA / ZA-APA combination experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte-Carlo learning curves as CSV.
    Simulate {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        run: RunArgs,
        /// Output CSV (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write EMSE columns in dB.
        #[arg(long)]
        db: bool,
    },
    /// Closed-form steady-state predictions (white input, ZA-APA).
    Predict {
        #[command(flatten)]
        source: Source,
    },
    /// Steady-state EMSEs and λ over a log-spaced grid of ρ, as CSV.
    SweepRho {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        run: RunArgs,
        /// `lo:hi:steps`, log-spaced.
        #[arg(long)]
        grid: String,
        /// Read the grid as multiples of the last segment's sparse-case ρ bound.
        #[arg(long)]
        relative: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Source {
    /// Experiment config (JSON).
    #[arg(long, required_unless_present = "preset", conflicts_with = "preset")]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    preset: Option<Scale>,
    /// Input process for presets.
    #[arg(long, value_enum, default_value = "white", requires = "preset")]
    input: Excitation,
    /// Replace the kind of filter 2.
    #[arg(long, value_enum)]
    filter2: Option<FilterKind>,
}

impl Source {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = match (&self.config, self.preset) {
            (Some(path), _) => read_config(path)?,
            (None, Some(scale)) => paper_scenario(scale, self.input),
            (None, None) => return Err(HarnessError::Invalid("need --config or --preset".into())),
        };
        if let Some(kind) = self.filter2 {
            cfg.filter2.kind = kind;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    workers: Option<usize>,
    /// Drop diverged trials and report how many were skipped.
    #[arg(long)]
    skip_diverged: bool,
    /// Override the number of Monte-Carlo runs.
    #[arg(long)]
    runs: Option<usize>,
}

impl RunArgs {
    fn apply(&self, cfg: &mut ExperimentConfig) -> RunOptions {
        if let Some(r) = self.runs {
            cfg.runs = r;
        }
        RunOptions {
            workers: self.workers,
            skip_diverged: self.skip_diverged,
            tap_stats: false,
        }
    }
}

fn report_skipped(skipped: &[(u64, zamix::zamix_core::Error)]) {
    if skipped.is_empty() {
        return;
    }
    eprintln!("skipped {} diverged trial(s)", skipped.len());
    for (t, e) in skipped {
        eprintln!("  trial {t}: {e}");
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate {
            source,
            run,
            out,
            db,
        } => {
            let mut cfg = source.load()?;
            let opts = run.apply(&mut cfg);
            let res = run_experiment(&cfg, &opts)?;
            report_skipped(&res.skipped);
            for s in &res.segments {
                eprintln!(
                    "segment {}: J1 {:.4e}  J2 {:.4e}  J12 {:.4e}  J {:.4e}  lambda {:.4}",
                    s.segment, s.j1.mean, s.j2.mean, s.j12.mean, s.j.mean, s.lambda.mean
                );
            }
            match out {
                Some(p) => write_curves_to_path(&res.curves, p, db)?,
                None => write_curves(&res.curves, io::stdout().lock(), db)?,
            }
        }
        Command::Predict { source } => {
            let cfg = source.load()?;
            io::stdout().write_all(prediction_table(&cfg)?.as_bytes())?;
        }
        Command::SweepRho {
            source,
            run,
            grid,
            relative,
            out,
        } => {
            let mut cfg = source.load()?;
            let opts = run.apply(&mut cfg);
            let mut rhos = parse_grid(&grid)?;
            if relative {
                let last = cfg.scenario.segments.len() - 1;
                let bound = rho_bound_sparse_case(&cfg.theory_inputs(last)?);
                rhos.iter_mut().for_each(|r| *r *= bound);
            }
            let rows = sweep_rho(&cfg, &rhos, &opts)?;
            match out {
                Some(p) => write_sweep(&rows, std::fs::File::create(p)?)?,
                None => write_sweep(&rows, io::stdout().lock())?,
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
