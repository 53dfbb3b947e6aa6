//! `dirapprox` command-line front end: one subcommand per operation, JSON in,
//! JSON or CSV out.
//!
//! Exit codes: 0 success, 2 invalid input, 3 numerical failure
//! (non-convergence or a failed check), 4 resource limit.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "dirapprox", version, about = "Dirichlet polynomial approximation toolkit")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand; each one only reads those it needs.
#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// JSON input file.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Degree N (overrides the input; for rational fits, every piece).
    #[arg(long, global = true)]
    pub degree: Option<usize>,
    /// σ for seminorms and constrained fits; σ0 for sup-norms.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub sigma: Option<f64>,
    /// Seminorm budget ε (constrained fits) or target χ-error (chordal check).
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    /// Acceptance tolerance of the command (see the subcommand help).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Boundary sample spacing h (interior spacing 5h).
    #[arg(long, global = true)]
    pub density: Option<f64>,
    /// Seed for randomized inputs and searches.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a polynomial at points: {"polynomial", "points"}.
    Eval,
    /// Shift P(s) ↦ P(s + δ): {"polynomial", "delta"}.
    Shift,
    /// ‖P‖_σ = Σ|a_n| n^{-σ}: {"polynomial", "sigma"}.
    Seminorm,
    /// Sampled sup of |P| over Re s ≥ σ0: {"polynomial", "sigma0"?, "plan"?}.
    Supnorm,
    /// Abscissa estimates for a coefficient rule: {"rule", "truncation"}.
    Abscissa,
    /// Bohr lift {"polynomial"} or its inverse {"lifted"}.
    BohrLift,
    /// Half-plane vs polydisc sup comparison; random p from --seed/--degree without input. --tol sets the relative tolerance.
    BohrCheck,
    /// Minimax fit: {"set", "density"?, "target", "degree", "options"?}. --tol sets the solver stopping tolerance.
    Fit,
    /// Fit with ‖h − f‖_σ ≤ ε: adds {"f", "sigma", "eps"}. --tol sets the sup-error needed to count as converged.
    FitConstrained,
    /// Laurent decomposition: {"set", "density"?, "target", "anchors", "points"?, "options"?}.
    Laurent,
    /// Rational Dirichlet fit: {"set", "density"?, "target", "anchors", "degrees", "options"?, "laurent"?}.
    RationalFit,
    /// Build a universal schedule: {"family", "options"?}. --tol overrides every entry's tolerance.
    UniversalBuild,
    /// Verify a schedule: the universal-build output, optionally with "verify" options.
    UniversalVerify,
    /// χ-uniform convergence of ζ partial sums: {"interval", "ladder", "eps"}, all optional.
    ChordalCheck {
        /// Also write the "N,chi_sup_error" table here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Minimax errors along degrees as CSV "N,minimax_error": {"set", "density"?, "target", "degrees", "options"?}.
    ConvergenceStudy,
}

fn main() -> ExitCode {
    if let Ok(v) = std::env::var("DIRAPPROX_THREADS") {
        match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => dirapprox::set_thread_limit(n),
            _ => {
                eprintln!("error: DIRAPPROX_THREADS must be a positive integer, got {v:?}");
                return ExitCode::from(2);
            }
        }
    }
    let cli = Cli::parse();
    let common = cli.common;
    let outcome = match cli.command {
        Command::Eval => commands::eval(&common),
        Command::Shift => commands::shift(&common),
        Command::Seminorm => commands::seminorm(&common),
        Command::Supnorm => commands::supnorm(&common),
        Command::Abscissa => commands::abscissa(&common),
        Command::BohrLift => commands::bohr_lift(&common),
        Command::BohrCheck => commands::bohr_check(&common),
        Command::Fit => commands::fit(&common),
        Command::FitConstrained => commands::fit_constrained(&common),
        Command::Laurent => commands::laurent(&common),
        Command::RationalFit => commands::rational_fit(&common),
        Command::UniversalBuild => commands::universal_build(&common),
        Command::UniversalVerify => commands::universal_verify(&common),
        Command::ChordalCheck { csv } => commands::chordal_check(&common, csv.as_deref()),
        Command::ConvergenceStudy => commands::convergence_study(&common),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
