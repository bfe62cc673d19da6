//! `curvlab`: command-line access to canonical curvature tensors, structure
//! group membership, block-model invariants and the `M_f` invariant `α_f`.
//!
//! Exit codes: 0 success (or member), 1 non-member or failed self-test,
//! 2 unreadable or malformed input, 3 validation failure, 4 singular matrix,
//! 5 inconsistent block permutation, 6 degenerate block, 7 degenerate
//! Hessian. Every failure prints one line starting with `error:`.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "curvlab",
    version,
    about = "Canonical curvature tensors and their structure groups"
)]
struct Cli {
    /// Relative tolerance for structure-group membership.
    #[arg(long, global = true, default_value_t = 1e-8, value_parser = positive)]
    tol_membership: f64,

    /// Relative singular-value threshold for kernels and ranks.
    #[arg(long, global = true, default_value_t = 1e-10, value_parser = positive)]
    tol_kernel: f64,

    /// Relative tolerance for the curvature identities of built tensors.
    #[arg(long, global = true, default_value_t = 1e-12, value_parser = positive)]
    tol_construction: f64,

    /// Random seed.
    #[arg(long, global = true, env = "CURVLAB_SEED", default_value_t = 42)]
    seed: u64,

    /// Output format (each command has its own default).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Write the main output to FILE instead of standard output.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,

    /// More detail on standard error.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build R_φ from a form file and report its signature and kernel.
    BuildRphi { form: PathBuf },
    /// Test a matrix against the structure group of a block model.
    CheckMembership { model: PathBuf, matrix: PathBuf },
    /// Scalar curvature, Ricci spectrum and block sectional curvatures.
    Invariants { model: PathBuf },
    /// α_f and the ambient scalar curvature of M_f at a list of points.
    MfAlpha { poly: PathBuf, points: PathBuf },
    /// Run the acceptance suite (reduced sample counts unless --full).
    Selftest {
        #[arg(long)]
        full: bool,
    },
}

/// Settings shared by every command.
#[derive(Debug, Clone)]
pub struct CliConfig {
    pub tol_membership: f64,
    pub tol_kernel: f64,
    pub tol_construction: f64,
    pub seed: u64,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub verbose: u8,
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(v) => Err(format!("tolerance must be positive, got {v}")),
        Err(e) => Err(e.to_string()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments");
            eprintln!("error: {}", first.trim_start_matches("error: "));
            return ExitCode::from(2);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    let cfg = CliConfig {
        tol_membership: cli.tol_membership,
        tol_kernel: cli.tol_kernel,
        tol_construction: cli.tol_construction,
        seed: cli.seed,
        format: cli.format,
        out: cli.out,
        verbose: cli.verbose,
    };
    let result = match cli.command {
        Command::BuildRphi { form } => commands::build_rphi(&cfg, &form),
        Command::CheckMembership { model, matrix } => commands::check_membership(&cfg, &model, &matrix),
        Command::Invariants { model } => commands::invariants(&cfg, &model),
        Command::MfAlpha { poly, points } => commands::mf_alpha(&cfg, &poly, &points),
        Command::Selftest { full } => commands::selftest(&cfg, full),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message.replace('\n', " "));
            ExitCode::from(e.code)
        }
    }
}
