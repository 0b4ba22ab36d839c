//! Argument definitions and dispatch for the `khab` binary.

mod commands;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use khab_core::{Error, GridSpec};

/// Exit status of a finished command.
pub const EXIT_OK: u8 = 0;
pub const EXIT_IO: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_DIVERGENT: u8 = 3;
pub const EXIT_ILL_CONDITIONED: u8 = 4;

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) => EXIT_IO,
        Error::Domain(_) | Error::Config(_) | Error::Range { .. } | Error::Parse(_) => EXIT_USAGE,
        Error::Divergent(_) | Error::NotConverged(_) | Error::NonFinite { .. } => EXIT_DIVERGENT,
        Error::IllConditioned(_) => EXIT_ILL_CONDITIONED,
    }
}

#[derive(Debug, Parser)]
#[command(name = "khab", version, about = "Logarithmic kernels, their integral transform and its inverse")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate A_n and its derivative on a grid in (0, 1].
    Kernel(KernelArgs),
    /// Direct transform of q on a t-grid.
    Transform(TransformArgs),
    /// Inverse transform of g on a t-grid.
    Invert(InvertArgs),
    /// Check premise and conclusion of the conjectured bound for one q.
    Check(CheckArgs),
    /// Run a parameter sweep from a JSON config.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct Output {
    /// Output file, written atomically; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Tolerances {
    /// Relative quadrature tolerance.
    #[arg(long)]
    pub tol_rel: Option<f64>,
    /// Absolute quadrature tolerance.
    #[arg(long)]
    pub tol_abs: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InterpArg {
    Cubic,
    Linear,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    #[arg(long)]
    pub n: usize,
    /// "log:<min>:<max>:<count>" or "lin:<min>:<max>:<count>".
    #[arg(long)]
    pub grid: GridSpec,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    /// q as a power-law mix (.json) or samples (.csv).
    #[arg(long)]
    pub q: PathBuf,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub grid: GridSpec,
    /// Interpolation of sampled input.
    #[arg(long, value_enum, default_value = "cubic")]
    pub interp: InterpArg,
    #[command(flatten)]
    pub tol: Tolerances,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    /// Closed form for power-law input, numeric otherwise.
    Analytic,
    Numeric,
}

#[derive(Debug, Args)]
pub struct InvertArgs {
    /// g as a power-law mix (.json) or samples (.csv).
    #[arg(long)]
    pub g: PathBuf,
    #[arg(long)]
    pub n: usize,
    /// Points at which to invert. Defaults to the interior sample points of a sampled g.
    #[arg(long)]
    pub grid: Option<GridSpec>,
    #[arg(long, value_enum, default_value = "analytic")]
    pub mode: ModeArg,
    /// Local fit window size (default 2(n+4)+1).
    #[arg(long)]
    pub window: Option<usize>,
    /// Local fit degree (default n+7).
    #[arg(long)]
    pub degree: Option<usize>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// "extremal", or a power-law mix (.json) or samples (.csv).
    #[arg(long)]
    pub q: String,
    /// Multiplier applied to q.
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub n: usize,
    /// Premise grid.
    #[arg(long, default_value = "log:0.01:100:200")]
    pub grid: GridSpec,
    #[arg(long)]
    pub tol_premise: Option<f64>,
    #[arg(long)]
    pub tol_ratio: Option<f64>,
    #[command(flatten)]
    pub tol: Tolerances,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// JSON file with alphas, ns, family, grid and tolerances.
    #[arg(long)]
    pub config: PathBuf,
    /// Also write every full report as JSON here.
    #[arg(long)]
    pub json_out: Option<PathBuf>,
    #[command(flatten)]
    pub output: Output,
}

/// Runs the parsed command and returns its exit status.
pub fn run(cli: Cli) -> u8 {
    let outcome = match cli.command {
        Command::Kernel(a) => commands::kernel(&a),
        Command::Transform(a) => commands::transform(&a),
        Command::Invert(a) => commands::invert(&a),
        Command::Check(a) => commands::check(&a),
        Command::Sweep(a) => commands::sweep(&a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
