//! `pcavity` — config-driven pipeline for graded square-lattice
//! photonic-crystal microcavities: lattice generation, 2D FDTD runs, mode
//! analysis, steady-state laser modeling, and measurement fitting.
//!
//! Exit codes: 0 success, 2 configuration error, 3 compute error.

mod commands;
mod manifest;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "pcavity", version, about)]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Clone)]
struct GlobalOpts {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; every file the command writes lands here.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads (0 = all cores). Results are thread-count independent.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Memory cap in MB for grids and snapshots.
    #[arg(long, global = true, default_value_t = 2048)]
    max_mem: usize,
    /// Chatty progress on standard error.
    #[arg(long, global = true, default_value_t = false)]
    verbose: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate the graded hole pattern and its dielectric map.
    Lattice,
    /// Run the 2D FDTD solver on the configured lattice (or a vacuum box).
    Simulate,
    /// Analyze simulation outputs.
    #[command(subcommand)]
    Modes(ModesCmd),
    /// Steady-state rate-equation modeling.
    #[command(subcommand)]
    Laser(LaserCmd),
    /// Fit measured data files.
    #[command(subcommand)]
    Fit(FitCmd),
}

#[derive(Debug, Subcommand)]
enum ModesCmd {
    /// Extract resonances from the probe records of a finished run.
    Resonances {
        /// Directory written by `simulate`.
        #[arg(long)]
        run: PathBuf,
        #[arg(long, default_value_t = 0.18)]
        band_lo: f64,
        #[arg(long, default_value_t = 0.32)]
        band_hi: f64,
        #[arg(long, default_value_t = 5)]
        max_modes: usize,
    },
    /// Effective mode volume from the best stored snapshot.
    Volume {
        #[arg(long)]
        run: PathBuf,
        /// Mode frequency (a/lambda); defaults to the run's source center.
        #[arg(long)]
        freq: Option<f64>,
    },
    /// Fourier-space light-cone fraction of a snapshot component.
    Lightcone {
        /// Directory written by `simulate` (uses its best snapshot), or
        /// give --snapshot explicitly.
        #[arg(long)]
        run: Option<PathBuf>,
        /// Snapshot base path (without extension).
        #[arg(long)]
        snapshot: Option<PathBuf>,
        #[arg(long)]
        freq: Option<f64>,
        #[arg(long, default_value = "ex")]
        component: String,
        /// Tukey taper fraction applied before the transform.
        #[arg(long, default_value_t = 0.1)]
        taper: f64,
    },
    /// Gaussian fit to the energy-density envelope of the best snapshot.
    Envelope {
        #[arg(long)]
        run: PathBuf,
        /// Running-max window in cells; defaults to one lattice constant.
        #[arg(long)]
        window_cells: Option<usize>,
    },
}

#[derive(Debug, Subcommand)]
enum LaserCmd {
    /// Solve one steady state at a given external peak pump power.
    Steady {
        #[arg(long)]
        pump_uw: f64,
    },
    /// L-L curve over the configured pump grid.
    Ll,
    /// Threshold from the gain-equals-loss condition.
    Threshold,
}

#[derive(Debug, Subcommand)]
enum FitCmd {
    /// Lorentzian linewidth fit of a spectrum CSV (wavelength_nm, power_arb).
    Lorentzian {
        #[arg(long)]
        data: PathBuf,
    },
    /// Two-segment threshold fit of an L-L CSV (pump_uW, line_arb, background_arb).
    Threshold {
        #[arg(long)]
        data: PathBuf,
    },
    /// cos^2 polarizer-angle fit (angle_deg, power_arb).
    Polarization {
        #[arg(long)]
        data: PathBuf,
    },
    /// Pump-position overlap prediction from a mode envelope.
    Overlap {
        /// Envelope report JSON from `modes envelope` (optional when the
        /// mode sigmas are given in [fit]).
        #[arg(long)]
        envelope: Option<PathBuf>,
    },
}

/// Errors mapped to process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad or missing configuration / input description: exit 2.
    Config(String),
    /// Failure while computing or writing results: exit 3.
    Compute(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Compute(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Compute(m) => m,
        }
    }
}

impl From<pcavity_core::config::ConfigError> for CliError {
    fn from(e: pcavity_core::config::ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<pcavity_core::io::IoError> for CliError {
    fn from(e: pcavity_core::io::IoError) -> Self {
        CliError::Compute(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.global.threads > 0 {
        // a failed build means a pool already exists; that is fine
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.global.threads)
            .build_global();
    }
    let result = match &cli.command {
        Command::Lattice => commands::lattice::run(&cli.global),
        Command::Simulate => commands::simulate::run(&cli.global),
        Command::Modes(cmd) => commands::modes::run(&cli.global, cmd),
        Command::Laser(cmd) => commands::laser::run(&cli.global, cmd),
        Command::Fit(cmd) => commands::fit::run(&cli.global, cmd),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
