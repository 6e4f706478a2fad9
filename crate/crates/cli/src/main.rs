mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "freespace-lab", version, about = "Kantorovich-Rubinstein norms and extremal molecules of finite metric spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SpaceArgs {
    /// A space JSON file, or `gallery:NAME:N`.
    #[arg(long)]
    pub space: String,
    /// Replace every distance `d` by `d^P` with `0 < P < 1`.
    #[arg(long, value_name = "P")]
    pub snowflake: Option<String>,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Command {
    /// Check the metric axioms; exits with 2 when any fails.
    Validate {
        #[command(flatten)]
        #[serde(flatten)]
        space: SpaceArgs,
    },
    /// Points of the metric segment between two points.
    Segment {
        #[command(flatten)]
        #[serde(flatten)]
        space: SpaceArgs,
        #[arg(long, num_args = 2, value_names = ["X", "Y"])]
        pair: Vec<String>,
    },
    /// Free-space norm of an element.
    Norm {
        #[command(flatten)]
        #[serde(flatten)]
        space: SpaceArgs,
        #[arg(long)]
        element: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Both)]
        method: Method,
    },
    /// Certified extreme/denting/strongly exposed classification of molecules.
    Classify {
        #[command(flatten)]
        #[serde(flatten)]
        space: SpaceArgs,
        #[arg(long, num_args = 2, value_names = ["X", "Y"])]
        pair: Option<Vec<String>>,
        /// Number of (Z) levels to certify.
        #[arg(long, default_value_t = 20)]
        depth: usize,
        /// Comma-separated, strictly decreasing, e.g. `1,1/2,1/4`.
        #[arg(long, value_name = "LIST")]
        eps_grid: Option<String>,
        #[arg(long, default_value_t = 10)]
        oracle_cap: usize,
        /// Exit with 1 unless this property is proven on every reported row.
        #[arg(long, value_enum)]
        assert: Option<AssertProperty>,
    },
    /// Vertices of the unit ball by brute force.
    Oracle {
        #[command(flatten)]
        #[serde(flatten)]
        space: SpaceArgs,
        #[arg(long, default_value_t = 10)]
        oracle_cap: usize,
    },
    /// Norm attainment of a given function or of random ones.
    Attain {
        #[command(flatten)]
        #[serde(flatten)]
        space: SpaceArgs,
        #[arg(long, conflicts_with = "random", required_unless_present = "random")]
        function: Option<PathBuf>,
        #[arg(long, value_name = "K")]
        random: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Write a truncated gallery space.
    Gallery {
        #[arg(long)]
        name: String,
        #[arg(long = "N", value_name = "N")]
        n: usize,
    },
    /// Molecules in the slice `<f, .> > 1 - alpha` and its diameter.
    Slice {
        #[command(flatten)]
        #[serde(flatten)]
        space: SpaceArgs,
        #[arg(long)]
        function: PathBuf,
        #[arg(long)]
        alpha: String,
        /// Report the molecule-restricted diameter only.
        #[arg(long)]
        restrict: bool,
    },
    /// Re-verify the evidence in a classify report.
    Check {
        #[arg(long)]
        report: PathBuf,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Dual,
    Primal,
    Both,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AssertProperty {
    Extreme,
    ExposedByFxy,
    Denting,
    StronglyExposed,
}

/// How a run ends.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, unreadable or malformed input.
    Input(String),
    /// The run completed but an asserted property or a check failed.
    Assertion(String),
}

impl From<freespace_core::Error> for Failure {
    fn from(e: freespace_core::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("FREESPACE_LAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Input(format!("FREESPACE_LAB_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Input(e.to_string()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = configure_threads().and_then(|()| commands::run(&cli.command, cli.format, cli.out.as_deref()));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Assertion(msg)) => {
            eprintln!("freespace-lab: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("freespace-lab: error: {msg}");
            ExitCode::from(2)
        }
    }
}
