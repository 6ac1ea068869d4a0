//! `selfdual` command-line front end.
//!
//! Exit codes: 0 success or PASS, 1 FAIL verdict, 2 usage error,
//! 3 degenerate input or failed construction.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use selfdual::construction::{CanonicalChoice, DEFAULT_RETRIES};
use selfdual::Error;

#[derive(Parser, Debug)]
#[command(name = "selfdual", version, about = "Self-dual polygons in projective space")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub run: RunConfig,
}

#[derive(Args, Debug, Clone)]
pub struct RunConfig {
    /// Relative rank tolerance (approximate arithmetic).
    #[arg(long, global = true, env = "SELFDUAL_TOL", default_value_t = selfdual::numeric::DEFAULT_TOL)]
    pub tol: f64,
    /// Gaussian-rational arithmetic instead of complex floating point.
    #[arg(long, global = true)]
    pub exact: bool,
    /// RNG seed; required by every randomized command.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    #[arg(long, global = true, default_value_t = DEFAULT_RETRIES)]
    pub retries: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    Plain,
    Alternating,
    Auto,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build an m-self-dual polygon and its certificate.
    Construct {
        #[arg(long, allow_hyphen_values = true, required_unless_present = "preset")]
        m: Option<i64>,
        #[arg(long, required_unless_present = "preset")]
        n: Option<usize>,
        #[arg(long, required_unless_present = "preset")]
        k: Option<usize>,
        /// identity, symplectic, f=F, s=S1,S2 or angles=A/D,...
        #[arg(long)]
        canonical: Option<CanonicalChoice>,
        /// Named preset; overrides --m/--n/--k/--canonical.
        #[arg(long, conflicts_with_all = ["m", "n", "k", "canonical"])]
        preset: Option<String>,
        /// Allow complex vertices from the start.
        #[arg(long)]
        complex: bool,
        /// Write the polygon document here; the certificate goes to stdout.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        certificate: Option<PathBuf>,
    },
    /// Dual polygon, as a polygon in the dual space.
    Dual {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Test m-self-duality; exit 1 with the residual when it fails.
    Check {
        #[arg(long, allow_hyphen_values = true)]
        m: i64,
        #[arg(long)]
        input: PathBuf,
    },
    /// Canonical form of the self-duality bilinear form.
    Classify {
        #[arg(long, allow_hyphen_values = true)]
        m: i64,
        #[arg(long)]
        input: PathBuf,
    },
    /// Closed-form moduli dimensions.
    Dim {
        #[arg(long, allow_hyphen_values = true, required_unless_present = "sweep")]
        m: Option<i64>,
        #[arg(long, required_unless_present = "sweep")]
        n: Option<usize>,
        #[arg(long, required_unless_present = "sweep")]
        k: Option<usize>,
        /// Every valid (m, n, k) with n <= nmax, k <= kmax, as CSV.
        #[arg(long)]
        sweep: bool,
        #[arg(long, default_value_t = 14)]
        nmax: usize,
        #[arg(long, default_value_t = 4)]
        kmax: usize,
    },
    /// Tangent-space dimension estimate at constructed polygons.
    EstimateDim {
        #[arg(long, allow_hyphen_values = true)]
        m: i64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        canonical: Option<CanonicalChoice>,
        /// Compare the modal estimate with the closed form; exit 1 on mismatch.
        #[arg(long)]
        compare: bool,
    },
    /// Gale transform.
    Gale {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "auto")]
        convention: ConventionArg,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Generalized pentagram map.
    Pentagram {
        #[arg(long)]
        input: PathBuf,
        /// Comma-separated I; defaults to the conjectured rule for k.
        #[arg(long = "I", value_delimiter = ',')]
        i: Option<Vec<usize>>,
        /// Comma-separated J; defaults to all ones.
        #[arg(long = "J", value_delimiter = ',')]
        j: Option<Vec<usize>>,
        #[arg(long, default_value_t = 1)]
        iterations: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Conjecture sweep over random (k+3)-gons, one CSV row per trial.
    Conjecture {
        #[arg(long, default_value_t = 2)]
        kmin: usize,
        #[arg(long)]
        kmax: usize,
        /// Largest k run in exact arithmetic (--exact: all of them).
        #[arg(long, default_value_t = selfdual::pentagram::EXACT_K_MAX)]
        exact_max: usize,
    },
    /// Closed polyline OBJ of a real polygon in P^3.
    ExportObj {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

/// Error carrying its exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Degenerate(String),
    Io(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::SingularMatrix
            | Error::DegenerateSpan { .. }
            | Error::DegenerateMeet { .. }
            | Error::DegenerateConfiguration(_)
            | Error::DegenerateFrequencies(_)
            | Error::InfeasibleConstraints(_)
            | Error::ConstructionFailed { .. }
            | Error::RankUnstable(_)
            | Error::KernelDefect(_)
            | Error::ChartFailure { .. }
            | Error::ClassificationFailure(_) => Self::Degenerate(msg),
            Error::InsufficientPoints { .. }
            | Error::ParityError { .. }
            | Error::Precondition(_)
            | Error::GcdViolation { .. }
            | Error::ExactUnsupported(_)
            | Error::DimensionMismatch(_)
            | Error::Parse(_) => Self::Usage(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

/// Outcome of a successful run.
#[derive(Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match commands::run(&cli) {
        Ok(Verdict::Pass) => ExitCode::SUCCESS,
        Ok(Verdict::Fail) => ExitCode::from(1),
        Err(e) => {
            let (code, kind, msg) = match e {
                CliError::Usage(m) => (2, "usage", m),
                CliError::Io(m) => (2, "io", m),
                CliError::Degenerate(m) => (3, "degenerate", m),
            };
            eprintln!("selfdual: {kind} error: {msg}");
            ExitCode::from(code)
        }
    }
}
