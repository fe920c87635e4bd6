//! Command-line front end for `semilin-core`.
//!
//! Exit codes: 0 when every residual passes, 2 when a verification fails
//! or the mathematics has no solution, 1 for usage and parse errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use semilin_core::scalar::{Rational, Scalar};

mod commands;
pub mod doc;

#[derive(Parser, Debug)]
#[command(name = "semilin", version, about = "Jet-level normal forms for Lie algebra actions and symplectic, b-symplectic and Poisson structures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    settings: Settings,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Check the structure constants and the bracket relations of a representation.
    VerifyRep,
    /// Formal linearization of a representation with a fixed point at the origin.
    Linearize,
    /// Darboux coordinates for a symplectic form.
    Darboux,
    /// Darboux coordinates commuting with a linear action.
    EquivariantDarboux,
    /// Cotangent lift of a representation.
    CotangentLift,
    /// Moment map of the cotangent lift.
    MomentMap,
    /// Orbit dimension at the points listed in the input.
    OrbitDim,
    /// Rank of the moment map over a grid or a seeded random box (CSV).
    StrataScan,
    /// b-Darboux coordinates for a b-symplectic form or its Poisson dual.
    BDarboux,
    /// Splitting coordinates for a Poisson bivector.
    Split,
    /// Built-in numeric demonstrations.
    Demo {
        #[arg(value_enum)]
        which: Demo,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Demo {
    /// Orbit ranks of the flat perturbation of the linear sl(2) action.
    CairnsGhys,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Field {
    #[default]
    Exact,
    Float,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Settings {
    /// JSON input document.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Jet order (defaults to the order in the input).
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..))]
    pub order: Option<u32>,
    /// Coefficient field.
    #[arg(long, global = true, value_enum, default_value_t = Field::Exact)]
    pub field: Field,
    /// Seed for randomized scans.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Number of random samples.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Output file (reports or CSV); standard output otherwise.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Largest residual accepted as zero (exact residuals must vanish unless set).
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
}

/// Residuals of floating-point runs pass below this unless `--tolerance` is given.
pub const DEFAULT_FLOAT_TOLERANCE: f64 = 1e-9;

impl Settings {
    fn input(&self) -> Result<&Path, Failure> {
        self.input
            .as_deref()
            .ok_or_else(|| Failure::Usage("this subcommand needs --input".into()))
    }

    fn passes<S: Scalar>(&self, r: &S) -> bool {
        match (S::EXACT, self.tolerance) {
            (true, None) => r.is_zero(),
            (_, tol) => r.magnitude() <= tol.unwrap_or(DEFAULT_FLOAT_TOLERANCE),
        }
    }
}

/// A text report, plus CSV data for scans.
#[derive(Debug, Default)]
pub struct Output {
    report: String,
    csv: Option<String>,
}

impl Output {
    fn report(report: String) -> Self {
        Output { report, csv: None }
    }

    fn with_csv(summary: Result<Output, Failure>, csv: String) -> Result<Output, Failure> {
        match summary {
            Ok(out) => Ok(Output { csv: Some(csv), ..out }),
            Err(Failure::Verify { report, reason, .. }) => Err(Failure::Verify {
                report,
                reason,
                csv: Some(csv),
            }),
            Err(e) => Err(e),
        }
    }
}

#[derive(Debug)]
pub enum Failure {
    /// Bad flags, unreadable or malformed input.
    Usage(String),
    /// A library operation found no solution or rejected the input.
    Math(String),
    /// The command ran but a residual check failed.
    Verify {
        report: String,
        reason: String,
        csv: Option<String>,
    },
}

impl From<semilin_core::Error> for Failure {
    fn from(e: semilin_core::Error) -> Self {
        match e {
            semilin_core::Error::Parse(_) => Failure::Usage(e.to_string()),
            _ => Failure::Math(e.to_string()),
        }
    }
}

fn dispatch<S: Scalar>(command: Command, settings: &Settings) -> Result<Output, Failure> {
    match command {
        Command::VerifyRep => commands::verify_rep::<S>(settings),
        Command::Linearize => commands::linearize::<S>(settings),
        Command::Darboux => commands::darboux_cmd::<S>(settings),
        Command::EquivariantDarboux => commands::equivariant_darboux_cmd::<S>(settings),
        Command::CotangentLift => commands::cotangent_lift_cmd::<S>(settings),
        Command::MomentMap => commands::moment_map_cmd::<S>(settings),
        Command::OrbitDim => commands::orbit_dim::<S>(settings),
        Command::StrataScan => commands::strata_scan_cmd::<S>(settings),
        Command::BDarboux => commands::b_darboux_cmd::<S>(settings),
        Command::Split => commands::split::<S>(settings),
        Command::Demo { which: Demo::CairnsGhys } => commands::demo_cairns_ghys(settings),
    }
}

/// Writes the report to `--out` or stdout; with CSV, the CSV takes that
/// place and the report goes to stdout (or stderr when the CSV is on stdout).
fn emit(out: &Output, settings: &Settings) -> std::io::Result<()> {
    let stdout = std::io::stdout();
    match (&out.csv, &settings.out) {
        (None, None) => stdout.lock().write_all(out.report.as_bytes()),
        (None, Some(path)) => std::fs::write(path, &out.report),
        (Some(csv), None) => {
            stdout.lock().write_all(csv.as_bytes())?;
            std::io::stderr().write_all(out.report.as_bytes())
        }
        (Some(csv), Some(path)) => {
            std::fs::write(path, csv)?;
            stdout.lock().write_all(out.report.as_bytes())
        }
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let settings = &cli.settings;
    let result = match settings.field {
        Field::Exact => dispatch::<Rational>(cli.command, settings),
        Field::Float => dispatch::<f64>(cli.command, settings),
    };
    let (output, code, message) = match result {
        Ok(out) => (out, 0, None),
        Err(Failure::Usage(m)) => (Output::default(), 1, Some(m)),
        Err(Failure::Math(m)) => (Output::default(), 2, Some(m)),
        Err(Failure::Verify { report, reason, csv }) => (Output { report, csv }, 2, Some(format!("verification failed: {reason}"))),
    };
    if !output.report.is_empty() || output.csv.is_some() {
        if let Err(e) = emit(&output, settings) {
            eprintln!("error: cannot write output: {e}");
            return 1;
        }
    }
    if let Some(m) = message {
        eprintln!("error: {m}");
    }
    code
}
