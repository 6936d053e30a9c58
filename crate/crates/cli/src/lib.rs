//! Command-line front end: JSON element and isomorphism documents, and
//! commands that report verdicts with exit codes 0 (holds), 1 (does not
//! hold) and 2 (bad input).

use std::ffi::OsString;
use std::fmt::Display;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use speclat::ToleranceConfig;

mod commands;
pub mod doc;
pub mod report;
mod selftest;

pub use report::{Report, Verdict, Witness};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn input(field: impl Display, err: impl Display) -> Self {
        Self::Input(format!("{field}: {err}"))
    }

    pub(crate) fn in_file(self, path: &Path) -> Self {
        match self {
            Self::Input(m) => Self::Input(format!("{}: {m}", path.display())),
            other => other,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "speclat",
    version,
    about = "Spectral order toolkit for Hermitian matrices and direct sums of matrix algebras"
)]
struct Cli {
    /// Print the report as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Eigenvalues closer than this form one breakpoint.
    #[arg(long = "tol-eig", global = true, value_name = "EPS")]
    tol_eig: Option<f64>,
    /// Threshold for hermiticity, idempotency and numerical rank.
    #[arg(long = "tol-proj", global = true, value_name = "EPS")]
    tol_proj: Option<f64>,
    /// Max-norm threshold for reconstructed elements.
    #[arg(long = "tol-recon", global = true, value_name = "EPS")]
    tol_recon: Option<f64>,
    /// Seed for every randomized check.
    #[arg(long, global = true, env = "SPECLAT_SEED", default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decide x ⪯ y in the spectral order.
    Order { x: PathBuf, y: PathBuf },
    /// Spectral infimum of the inputs.
    Meet {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Spectral supremum of the inputs.
    Join {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Spectral family of each block.
    Family { input: PathBuf },
    /// Positive and negative parts.
    Posneg { input: PathBuf },
    /// Is the element a positive multiple of an atomic projection?
    Atoms { input: PathBuf },
    /// Is the element central? Otherwise search for a distributivity witness.
    Center {
        input: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
    },
    /// Apply an isomorphism to an element.
    ApplyIso {
        iso: PathBuf,
        input: PathBuf,
        /// Also write the image to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Treat the isomorphism as a black box and recover its structure.
    Decompose { iso: PathBuf },
    /// Check order preservation (and orthogonality with --ortho) on samples.
    VerifyIso {
        iso: PathBuf,
        #[arg(long)]
        ortho: bool,
        #[arg(long, default_value_t = 500)]
        trials: usize,
    },
    /// Run the built-in invariant suite.
    Selftest {
        #[arg(long, default_value_t = 50)]
        trials: usize,
    },
}

/// What a command produced. `report` is absent only for usage and input
/// errors, in which case `text` holds the message.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub code: i32,
    pub report: Option<Report>,
    pub text: String,
}

pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            return Outcome {
                code,
                report: None,
                text: e.to_string(),
            };
        }
    };
    let json = cli.json;
    match dispatch(cli) {
        Ok(report) => Outcome {
            code: if report.passed() { 0 } else { 1 },
            text: if json {
                report.to_json() + "\n"
            } else {
                report.to_text()
            },
            report: Some(report),
        },
        Err(e) => Outcome {
            code: 2,
            report: None,
            text: format!("error: {e}\n"),
        },
    }
}

fn tolerances(cli: &Cli) -> Result<ToleranceConfig, CliError> {
    let d = ToleranceConfig::default();
    ToleranceConfig::new(
        cli.tol_eig.unwrap_or(d.eps_eig),
        cli.tol_proj.unwrap_or(d.eps_proj),
        cli.tol_recon.unwrap_or(d.eps_recon),
    )
    .map_err(|e| CliError::Usage(e.to_string()))
}

fn dispatch(cli: Cli) -> Result<Report, CliError> {
    let tol = tolerances(&cli)?;
    let ctx = commands::Context::new(tol, cli.seed);
    match &cli.command {
        Command::Order { x, y } => commands::order(&ctx, x, y),
        Command::Meet { inputs } => commands::lattice(&ctx, inputs, commands::LatticeOp::Meet),
        Command::Join { inputs } => commands::lattice(&ctx, inputs, commands::LatticeOp::Join),
        Command::Family { input } => commands::family(&ctx, input),
        Command::Posneg { input } => commands::posneg(&ctx, input),
        Command::Atoms { input } => commands::atoms(&ctx, input),
        Command::Center { input, trials } => commands::center(&ctx, input, *trials),
        Command::ApplyIso { iso, input, out } => {
            commands::apply_iso(&ctx, iso, input, out.as_deref())
        }
        Command::Decompose { iso } => commands::decompose(&ctx, iso),
        Command::VerifyIso { iso, ortho, trials } => {
            commands::verify_iso(&ctx, iso, *ortho, *trials)
        }
        Command::Selftest { trials } => Ok(selftest::run(&ctx, *trials)),
    }
}
