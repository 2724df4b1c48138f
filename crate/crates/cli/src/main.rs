//! `tvflow`: runs flows, calibrations and bound checks from JSON configs.

mod commands;
mod config;
mod error;
mod io;
mod scenario;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use config::{load, load_scenario, QStarConfig};
use error::{CliError, CliResult};

/// Seed for randomized corpora (C* calibration).
const SEED_VAR: &str = "TVFLOW_SEED";

#[derive(Parser)]
#[command(name = "tvflow", version, about = "Total variation flows: exact solvers, minimizing movements, bounds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON config file.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Clone)]
struct Tol {
    /// Tolerance for the check.
    #[arg(long, value_name = "X")]
    tol: Option<f64>,
}

#[derive(Args, Clone)]
struct Checked {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    tol: Tol,
}

#[derive(Subcommand)]
enum Command {
    /// Run one or more scenario files (the `solver` field picks the flow).
    Run {
        /// Scenario files; repeat the flag for several.
        #[arg(long, value_name = "PATH", required = true, num_args = 1..)]
        config: Vec<PathBuf>,
        #[arg(long, value_name = "DIR", default_value = ".")]
        out: PathBuf,
        /// Worker threads when several scenarios are given.
        #[arg(long, value_name = "N", default_value_t = 1)]
        jobs: usize,
    },
    /// Exact flow of a periodic step function.
    #[command(name = "evolve-1d")]
    Evolve1d(Common),
    /// Exact flow of a radial stack.
    EvolveRadial(Common),
    /// Fourth-order flow of a ball.
    #[command(name = "evolve-4th")]
    Evolve4th(Common),
    /// Minimizing movements on a grid.
    EvolveMm(Common),
    /// Fractional flow on the periodic grid.
    EvolveFrac(Common),
    /// One prox step with its optimality certificate.
    Prox(Checked),
    /// Second-order calibrability (weighted interval or radial region).
    Calibrate(Common),
    /// Fourth-order calibration of a ball, exterior or annulus.
    #[command(name = "calibrate-4th")]
    Calibrate4th(Common),
    /// Extinction-time bound report.
    Bounds(Common),
    /// Jump monotonicity along a scenario's trajectory.
    CheckRegularity(Checked),
    /// Critical annulus ratio of the planar fourth-order flow.
    FindQstar {
        #[arg(long, value_name = "PATH")]
        config: Option<PathBuf>,
        #[arg(long, value_name = "DIR", default_value = ".")]
        out: PathBuf,
        #[command(flatten)]
        tol: Tol,
    },
}

fn seed() -> CliResult<u64> {
    match std::env::var(SEED_VAR) {
        Ok(s) => s.trim().parse().map_err(|_| CliError::schema(SEED_VAR, SEED_VAR, format!("not an unsigned integer: {s:?}"))),
        Err(_) => Ok(0),
    }
}

fn print<T: Serialize>(value: &T) {
    print!("{}", io::to_json(value));
}

fn evolve(c: &Common, solver: &str) -> CliResult<()> {
    let scn = load_scenario(&c.config, Some(solver))?;
    print(&scenario::run_scenario(&scn, &c.out, seed()?)?);
    Ok(())
}

/// Output directory of one scenario among several: `out/<file stem>`.
fn sub_dir(out: &Path, config: &Path, index: usize) -> PathBuf {
    let stem = config.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| format!("scenario-{index}"));
    out.join(stem)
}

fn run_many(configs: &[PathBuf], out: &Path, jobs: usize) -> CliResult<()> {
    let seed = seed()?;
    if configs.len() == 1 {
        let scn = load_scenario(&configs[0], None)?;
        print(&scenario::run_scenario(&scn, out, seed)?);
        return Ok(());
    }
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<CliResult<scenario::RunSummary>>>> = Mutex::new((0..configs.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..jobs.clamp(1, configs.len()) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= configs.len() {
                    break;
                }
                let r = load_scenario(&configs[i], None)
                    .and_then(|scn| scenario::run_scenario(&scn, &sub_dir(out, &configs[i], i), seed));
                results.lock().unwrap()[i] = Some(r);
            });
        }
    });
    let mut summaries = Vec::new();
    let mut first_err = None;
    for r in results.into_inner().unwrap().into_iter().flatten() {
        match r {
            Ok(s) => summaries.push(serde_json::to_value(s).expect("serializable")),
            Err(e) => {
                eprint!("{}", io::to_json(&e.to_json()));
                summaries.push(e.to_json());
                first_err.get_or_insert(e);
            }
        }
    }
    print(&summaries);
    match first_err {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Run { config, out, jobs } => run_many(&config, &out, jobs),
        Command::Evolve1d(c) => evolve(&c, "exact-1d"),
        Command::EvolveRadial(c) => evolve(&c, "exact-radial"),
        Command::Evolve4th(c) => evolve(&c, "fourth"),
        Command::EvolveMm(c) => evolve(&c, "minmov"),
        Command::EvolveFrac(c) => evolve(&c, "frac"),
        Command::Prox(Checked { common: c, tol: t }) => {
            let tol = t.tol.unwrap_or(1e-8);
            let report = commands::prox(&load(&c.config)?, &c.out, tol)?;
            print(&report);
            if report.get("valid") == Some(&serde_json::Value::Bool(false)) {
                return Err(CliError::Check(format!("prox certificate fails at tol {tol:e}")));
            }
            Ok(())
        }
        Command::Calibrate(c) => {
            print(&commands::calibrate(&load(&c.config)?, &c.out)?);
            Ok(())
        }
        Command::Calibrate4th(c) => {
            print(&commands::calibrate_4th(&load(&c.config)?, &c.out)?);
            Ok(())
        }
        Command::Bounds(c) => {
            print(&commands::bounds(&load(&c.config)?, &c.out, seed()?)?);
            Ok(())
        }
        Command::CheckRegularity(Checked { common: c, tol: t }) => {
            let report = commands::check_regularity(&load_scenario(&c.config, None)?, &c.out, t.tol.unwrap_or(1e-9))?;
            print(&report);
            if report.clean {
                Ok(())
            } else {
                Err(CliError::Check(format!("{} regularity violations", report.jumps.violations.len())))
            }
        }
        Command::FindQstar { config, out, tol } => {
            let n = match config {
                Some(path) => load::<QStarConfig>(&path)?.n,
                None => 2,
            };
            print(&commands::qstar(n, tol.tol.unwrap_or(1e-6), &out)?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprint!("{}", io::to_json(&e.to_json()));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
