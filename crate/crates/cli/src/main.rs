mod commands;
mod output;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

/// Semiclassical scattering experiments: exact and WKB phase shifts,
/// hard-disk reflection phases, and circle equidistribution diagnostics.
#[derive(Parser)]
#[command(name = "phaselab", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Run seed recorded in JSON metadata.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Stamp JSON metadata with wall-clock time (breaks byte determinism).
    #[arg(long, global = true)]
    pub timestamp: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args)]
pub struct PotentialArgs {
    /// Path to a potential JSON file, or the JSON object inline.
    #[arg(long, value_name = "PATH|JSON")]
    pub potential: String,
    /// Incident energy E; h and the amplitude are rescaled so E = 1.
    #[arg(long, default_value_t = 1.0)]
    pub energy: f64,
}

#[derive(Args)]
pub struct OutputArgs {
    /// Output path; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write a gnuplot script next to --out.
    #[arg(long, requires = "out")]
    pub plots: bool,
}

#[derive(Args)]
pub struct TableArgs {
    /// Ambient dimension, 2 through 9.
    #[arg(long, value_name = "D")]
    pub dim: u32,
    /// Semiclassical parameters, comma separated.
    #[arg(long = "h", value_name = "LIST", value_delimiter = ',', required = true)]
    pub h_list: Vec<f64>,
    /// Largest angular momentum; default ceil(1.6 R / h).
    #[arg(long)]
    pub lmax: Option<u32>,
    /// Exclusion window around the deflection bad set and around alpha = 0.
    #[arg(long, default_value_t = 0.05)]
    pub epsilon: f64,
    /// Exponent in the trivial-regime threshold alpha >= R + h^kappa.
    #[arg(long, default_value_t = 0.5)]
    pub kappa: f64,
}

#[derive(Subcommand)]
pub enum Command {
    /// Deflection angle, sojourn time, and phase generator of a potential.
    Classical {
        #[command(flatten)]
        potential: PotentialArgs,
        /// Number of impact parameters on (0, R].
        #[arg(long, default_value_t = 512)]
        grid: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Exact and WKB scattering phases for each angular momentum.
    Phaseshifts {
        #[command(flatten)]
        potential: PotentialArgs,
        #[command(flatten)]
        table: TableArgs,
        /// Radius where the free solution is matched; default 2 R.
        #[arg(long, value_name = "R_MATCH")]
        r_match: Option<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// WKB phases only; no radial solves.
    Wkb {
        #[command(flatten)]
        potential: PotentialArgs,
        #[command(flatten)]
        table: TableArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Hard-disk reflection phases: exact Hankel ratio vs geometric phase.
    Disk {
        #[arg(long, default_value_t = 2)]
        dim: u32,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        /// Wavenumbers, comma separated.
        #[arg(long = "k", alias = "k-list", value_name = "LIST", value_delimiter = ',', required = true)]
        k_list: Vec<f64>,
        /// Largest alpha = nu/k to tabulate; default R.
        #[arg(long, value_name = "ALPHA")]
        alpha_max: Option<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Arc discrepancy and Erdos-Turan bound of a weighted circle ensemble.
    Discrepancy {
        /// CSV of argument,weight rows.
        #[arg(
            long,
            value_name = "PATH",
            required_unless_present = "from_table",
            conflicts_with = "from_table"
        )]
        input: Option<PathBuf>,
        /// Phase-shift or disk table CSV; uses beta_exact or x_exact.
        #[arg(long, value_name = "PATH")]
        from_table: Option<PathBuf>,
        /// Keep only table rows with alpha <= this bound.
        #[arg(long, value_name = "ALPHA")]
        alpha_max: Option<f64>,
        /// Harmonics in the Erdos-Turan bound; default floor(sqrt(K)).
        #[arg(long, value_name = "M")]
        et_harmonics: Option<u32>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Error-vs-h and discrepancy-vs-h convergence experiment.
    Sweep {
        #[command(flatten)]
        potential: PotentialArgs,
        #[command(flatten)]
        table: TableArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Nontrapping and monotone-deflection checks for a potential file.
    CheckPotential {
        #[command(flatten)]
        potential: PotentialArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Cross-validation table for the Bessel evaluators.
    #[command(hide = true)]
    SpecfunSelftest {
        #[command(flatten)]
        output: OutputArgs,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
