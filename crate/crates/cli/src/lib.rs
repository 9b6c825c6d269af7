//! Command-line front end: configuration, verification suite and table export.

pub mod config;
pub mod error;
pub mod report;
pub mod suite;
pub mod tables;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use config::{Format, RunConfig, Tolerances};
pub use error::CliError;
pub use suite::{run_suite, Check, Status, VerificationSummary};
pub use tables::export_tables;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "matorth", version, about = "Matrix-valued orthogonal polynomials for a Gaussian weight family")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub options: Options,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Structure matrices, operator coefficients and W(t) on the grid
    Structure,
    /// Run the verification suite; exit status 1 if any check fails
    Verify,
    /// Monic orthogonal polynomials (and explicit P_n for N = 2)
    Orthopoly,
    /// Recurrence coefficient tables
    Recurrence,
    /// Norms and normalization sequences
    Norms,
    /// Convergence of A_n/sqrt(n) to its limit (N = 2)
    Asymptotics,
    /// Write every table to the --out directory, one file per table
    Export,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FormatArg {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct Options {
    /// Matrix size N
    #[arg(long, global = true, default_value_t = config::DEFAULT_SIZE)]
    pub size: usize,
    /// Comma-separated a_1..a_{N-1} as "re" or "re+imi"; a single value is used for every index
    #[arg(long, global = true, default_value = config::DEFAULT_A, allow_hyphen_values = true)]
    pub a: String,
    #[arg(long, global = true, default_value_t = config::DEFAULT_B)]
    pub b: f64,
    #[arg(long, global = true, default_value_t = config::DEFAULT_NMAX)]
    pub nmax: usize,
    /// Evaluation points as lo:hi:count
    #[arg(long, global = true, default_value = config::DEFAULT_GRID, allow_hyphen_values = true)]
    pub grid: String,
    #[arg(long = "tol-abs", global = true, default_value_t = config::DEFAULT_TOL_ABS)]
    pub tol_abs: f64,
    #[arg(long = "tol-rel", global = true, default_value_t = config::DEFAULT_TOL_REL)]
    pub tol_rel: f64,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Json)]
    pub format: FormatArg,
    /// Output file (directory for export); stdout otherwise
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Adds a randomized-parameter sweep to verify, reproducible for a fixed seed
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Number of random parameter sets in the sweep
    #[arg(long, global = true, default_value_t = config::DEFAULT_DRAWS)]
    pub draws: usize,
}

impl Options {
    /// Validates every option before any computation.
    pub fn to_config(&self) -> Result<RunConfig, CliError> {
        let a = config::parse_a_list(&self.a)?;
        let params = config::build_params(self.size, &a, self.b)?;
        Ok(RunConfig {
            params,
            nmax: self.nmax,
            t_grid: config::parse_grid(&self.grid)?,
            tolerances: Tolerances {
                abs: config::check_tolerance("tol-abs", self.tol_abs)?,
                rel: config::check_tolerance("tol-rel", self.tol_rel)?,
            },
            output: self.out.clone(),
            format: match self.format {
                FormatArg::Json => Format::Json,
                FormatArg::Csv => Format::Csv,
            },
            seed: self.seed,
            draws: self.draws,
        })
    }
}

fn emit(config: &RunConfig, body: &str) -> Result<(), CliError> {
    match &config.output {
        Some(path) => std::fs::write(path, body).map_err(|e| CliError::io(path, e)),
        None => std::io::stdout()
            .write_all(body.as_bytes())
            .map_err(|e| CliError::io("<stdout>", e)),
    }
}

/// Runs a parsed command line and returns the process exit status.
pub fn run(cli: &Cli) -> i32 {
    let config = match cli.options.to_config() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let outcome = match cli.command {
        Command::Verify => {
            let summary = run_suite(&config);
            emit(&config, &report::render_summary(&config, &summary))
                .map(|()| if summary.pass() { EXIT_PASS } else { EXIT_FAIL })
        }
        Command::Export => export_tables(&config).map(|paths| {
            for p in paths {
                eprintln!("wrote {}", p.display());
            }
            EXIT_PASS
        }),
        Command::Structure => emit(&config, &report::render_structure(&config)).map(|()| EXIT_PASS),
        Command::Orthopoly => report::render_orthopoly(&config).and_then(|s| emit(&config, &s)).map(|()| EXIT_PASS),
        Command::Recurrence => report::render_recurrence(&config).and_then(|s| emit(&config, &s)).map(|()| EXIT_PASS),
        Command::Norms => report::render_norms(&config).and_then(|s| emit(&config, &s)).map(|()| EXIT_PASS),
        Command::Asymptotics => report::render_asymptotics(&config).and_then(|s| emit(&config, &s)).map(|()| EXIT_PASS),
    };
    outcome.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        EXIT_CONFIG
    })
}
