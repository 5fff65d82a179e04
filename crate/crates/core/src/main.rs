//! Command-line face of the workbench.
//!
//! Exit codes: 0 success, 2 validation error, 3 hypothesis failure without
//! --force, 4 all solves failed.

use clap::{Parser, Subcommand};
use fracctrl::experiment::{
    check_hypotheses, fmt17, load_config, run_beta_sweep, simulate, sweep_to_csv, ExperimentError,
};
use fracctrl::mittag_leffler::{ml, MlParams};
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_VALIDATION: u8 = 2;
const EXIT_HYPOTHESES: u8 = 3;
const EXIT_ALL_FAILED: u8 = 4;

#[derive(Parser)]
#[command(
    name = "fracctrl",
    about = "Numerical workbench for fractional-order feedback control: \
             Mittag-Leffler evaluation, hypothesis checks, mild-solution \
             solves, and beta-sweep approximate-controllability experiments"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate the two-parameter Mittag-Leffler function E_{alpha,beta}(x), x <= 0
    MlEval {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        /// Absolute tolerance target
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        /// Power-series term cap
        #[arg(long, default_value_t = 400)]
        max_terms: usize,
    },
    /// Run every hypothesis check for a configured problem and report
    CheckHypotheses {
        config: PathBuf,
    },
    /// Solve one regularization level and emit the trajectory CSV
    Simulate {
        config: PathBuf,
        #[arg(long)]
        beta: f64,
        /// Output CSV path (defaults to the config's `out`, else stdout)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Proceed even if hypothesis checks fail
        #[arg(long)]
        force: bool,
    },
    /// Run the beta-sweep experiment and emit the sweep CSV
    SweepBeta {
        config: PathBuf,
        /// Output CSV path (defaults to the config's `out`, else stdout)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Concurrent solves (0 = one thread per core)
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Proceed even if hypothesis checks fail
        #[arg(long)]
        force: bool,
    },
}

fn write_or_print(out: Option<PathBuf>, fallback: Option<String>, text: &str) -> Result<(), String> {
    let target = out.or(fallback.map(PathBuf::from));
    match target {
        Some(path) => {
            std::fs::write(&path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
            eprintln!("wrote {}", path.display());
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn gate_hypotheses(
    cfg: &fracctrl::experiment::ExperimentConfig,
    force: bool,
) -> Result<bool, ExperimentError> {
    let report = check_hypotheses(cfg)?;
    eprint!("{}", report.render());
    if !report.all_passed() && !force {
        eprintln!("hypothesis checks failed; pass --force to run anyway");
        return Ok(false);
    }
    Ok(true)
}

fn run() -> Result<(), (u8, String)> {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::MlEval {
            alpha,
            beta,
            x,
            tol,
            max_terms,
        } => {
            let params = MlParams {
                alpha,
                beta,
                series_tol: tol,
                max_terms,
            };
            let v = ml(&params, x).map_err(|e| (EXIT_VALIDATION, e.to_string()))?;
            println!("{}", fmt17(v));
            Ok(())
        }
        Cmd::CheckHypotheses { config } => {
            let cfg = load_config(&config).map_err(|e| (EXIT_VALIDATION, e.to_string()))?;
            let report = check_hypotheses(&cfg).map_err(|e| (EXIT_VALIDATION, e.to_string()))?;
            print!("{}", report.render());
            if report.all_passed() {
                Ok(())
            } else {
                Err((EXIT_HYPOTHESES, "hypothesis checks failed".into()))
            }
        }
        Cmd::Simulate {
            config,
            beta,
            out,
            force,
        } => {
            let cfg = load_config(&config).map_err(|e| (EXIT_VALIDATION, e.to_string()))?;
            if !gate_hypotheses(&cfg, force).map_err(|e| (EXIT_VALIDATION, e.to_string()))? {
                return Err((EXIT_HYPOTHESES, "hypothesis gate".into()));
            }
            let (report, csv) = simulate(&cfg, beta).map_err(|e| (EXIT_VALIDATION, e.to_string()))?;
            if !report.contraction.passed {
                eprintln!(
                    "warning: contraction condition violated (margin {:.3e}); Picard may not converge",
                    report.contraction.margin
                );
            }
            write_or_print(out, cfg.out.clone(), &csv).map_err(|e| (EXIT_VALIDATION, e))?;
            eprintln!(
                "beta = {beta:.3e}: converged = {}, iterations = {}, residual = {:.3e}, terminal error = {}",
                report.converged,
                report.iterations,
                report.residual,
                fmt17(report.trajectory.terminal().sub(&cfg.z_d_vector()).norm()),
            );
            if !report.converged {
                return Err((EXIT_ALL_FAILED, "solve did not converge".into()));
            }
            Ok(())
        }
        Cmd::SweepBeta {
            config,
            out,
            jobs,
            force,
        } => {
            let cfg = load_config(&config).map_err(|e| (EXIT_VALIDATION, e.to_string()))?;
            if !gate_hypotheses(&cfg, force).map_err(|e| (EXIT_VALIDATION, e.to_string()))? {
                return Err((EXIT_HYPOTHESES, "hypothesis gate".into()));
            }
            let records =
                run_beta_sweep(&cfg, jobs).map_err(|e| (EXIT_VALIDATION, e.to_string()))?;
            let csv = sweep_to_csv(&records);
            write_or_print(out, cfg.out.clone(), &csv).map_err(|e| (EXIT_VALIDATION, e))?;
            for r in &records {
                eprintln!(
                    "beta = {:.3e}: converged = {}, iterations = {}, terminal error = {}",
                    r.beta,
                    r.converged,
                    r.iterations,
                    fmt17(r.terminal_error)
                );
            }
            if records.iter().all(|r| !r.converged) {
                return Err((EXIT_ALL_FAILED, "every solve failed".into()));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
