#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod grid;
mod output;

pub const WORKERS_ENV: &str = "ADIABATIC_LAB_WORKERS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl From<adiabatic_lab::Error> for CliError {
    fn from(e: adiabatic_lab::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Numerical(_) => 2,
            _ => 1,
        }
    }
}

/// Exact spectra, gap scaling, mean-field phase diagram, concurrence and
/// adiabatic dynamics for the two-parameter spin model H(s, alpha).
///
/// Grids are `start..end:count` (count defaults to 10) or comma lists; `inf`
/// is accepted for alpha. Every CSV has a header row and ends with a
/// `# meta: {...}` JSON line. Reals are written with 17 significant digits.
#[derive(Debug, Parser)]
#[command(name = "adiabatic-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// CSV destination (stdout if omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write a JSON summary here
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// Worker threads; ADIABATIC_LAB_WORKERS takes precedence when set
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Lowest levels along s.
    ///
    /// Columns: s, e_0, ..., e_{levels-1}
    Spectrum(commands::SpectrumArgs),
    /// Density of states at s = 0 and s = 1, analytic and exact.
    ///
    /// Columns: series, omega, density, density_normalized.
    /// series is analytic_s0, analytic_s1_full, analytic_s1_sector (evaluated
    /// on the omega grid, normalized by their trapezoid integral),
    /// empirical_s0, empirical_s1 (degeneracy-weighted histograms at bin
    /// centers; density integrates to 2^n) or binned_s1_full (the analytic
    /// s = 1 density averaged over the same bins).
    Dos(commands::DosArgs),
    /// Mean-field <s_x> over the alpha-s plane.
    ///
    /// Columns: alpha, s, sx. The JSON summary lists the critical point and the
    /// transition found at each alpha.
    PhaseDiagram(commands::PhaseDiagramArgs),
    /// Overlaps and Dicke weights of the two lowest states along s.
    ///
    /// Columns: s, state, energy, overlap_x, overlap_z, w_0, ..., w_n.
    /// The JSON summary lists the anti-crossings and the s1 < s_c < s2 cascade.
    Anatomy(commands::AnatomyArgs),
    /// Ground-state rescaled concurrence C_R = 1 - 4 <S_y^2> / n.
    ///
    /// Columns: alpha, s, c_r
    Concurrence(commands::ConcurrenceArgs),
    /// Minimum gap versus n with power and exponential fits.
    ///
    /// Columns: n, s_star, gap_min. Both fits are in the meta line.
    GapScaling(commands::GapScalingArgs),
    /// Final ground-state fidelity versus total time T.
    ///
    /// Columns: t, fidelity, norm_drift, steps. With --target: n, t_star,
    /// inverse_gap_sq.
    Dynamics(commands::DynamicsArgs),
    /// Compare the tridiagonal path with the full 2^n construction.
    ///
    /// Prints one PASS/FAIL line per n. Columns (with --out): n, alpha, s,
    /// block_deviation, sector_deviation, full_spectrum_deviation,
    /// gauge_deviation, pass.
    OracleCheck(commands::OracleCheckArgs),
}

fn worker_count(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        let n = v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| {
                CliError::Validation(format!(
                    "{WORKERS_ENV} must be a positive integer, got `{v}`"
                ))
            })?;
        return Ok(Some(n));
    }
    match flag {
        Some(0) => Err(CliError::Validation("--workers must be positive".into())),
        other => Ok(other),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let common = match &cli.command {
        Command::Spectrum(a) => &a.common,
        Command::Dos(a) => &a.common,
        Command::PhaseDiagram(a) => &a.common,
        Command::Anatomy(a) => &a.common,
        Command::Concurrence(a) => &a.common,
        Command::GapScaling(a) => &a.common,
        Command::Dynamics(a) => &a.common,
        Command::OracleCheck(a) => &a.common,
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = worker_count(common.workers)? {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Validation(format!("cannot start worker pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Spectrum(a) => commands::spectrum(a),
        Command::Dos(a) => commands::dos(a),
        Command::PhaseDiagram(a) => commands::phase_diagram(a),
        Command::Anatomy(a) => commands::anatomy(a),
        Command::Concurrence(a) => commands::concurrence(a),
        Command::GapScaling(a) => commands::gap_scaling(a),
        Command::Dynamics(a) => commands::dynamics(a),
        Command::OracleCheck(a) => commands::oracle_check(a),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
