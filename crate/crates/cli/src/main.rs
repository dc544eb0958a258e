mod commands;
mod formats;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wellcond_core::Family;

/// Greedy selection of well-conditioned column subsets.
#[derive(Parser, Debug)]
#[command(name = "wellcond", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the greedy selection and write a certification report.
    Select(SelectArgs),
    /// Re-check a stored report against its input matrix.
    Verify(VerifyArgs),
    /// Compare greedy selection with random and first-R baselines.
    Bench(BenchArgs),
    /// Write a generated matrix to a file.
    Generate(GenerateArgs),
}

#[derive(Args, Debug, Clone)]
pub struct MatrixSource {
    /// Matrix file (CSV rows or MatrixMarket dense array).
    #[arg(long, conflicts_with = "generate")]
    pub input: Option<PathBuf>,
    /// Synthetic matrix family.
    #[arg(long, value_parser = parse_family, requires_all = ["n", "p"])]
    pub generate: Option<Family>,
    /// Rows of the generated matrix.
    #[arg(long)]
    pub n: Option<usize>,
    /// Columns of the generated matrix.
    #[arg(long)]
    pub p: Option<usize>,
    /// Generator seed (default 0).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Angle of the near-parallel pair, in radians.
    #[arg(long, default_value_t = 0.0)]
    pub theta: f64,
    /// Distinct columns in duplicated_columns.
    #[arg(long, default_value_t = 1)]
    pub distinct: usize,
    /// Spike weight in the spiked family.
    #[arg(long, default_value_t = 1.0)]
    pub spike: f64,
    /// Normalize columns instead of rejecting non-unit input.
    #[arg(long)]
    pub auto_normalize: bool,
}

#[derive(Args, Debug)]
pub struct SelectArgs {
    #[command(flatten)]
    pub source: MatrixSource,
    #[arg(long, allow_negative_numbers = true)]
    pub epsilon: f64,
    /// Use the secular-equation update instead of dense recomputation.
    #[arg(long)]
    pub fast_path: bool,
    /// Envelope slack for certification, in (0, 1e-3].
    #[arg(long, default_value_t = 1e-8)]
    pub cert_tol: f64,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
    pub format: ReportFormat,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// JSON report written by `select`.
    #[arg(long)]
    pub report: PathBuf,
    #[command(flatten)]
    pub source: MatrixSource,
    #[arg(long, default_value_t = 1e-8)]
    pub cert_tol: f64,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[command(flatten)]
    pub source: MatrixSource,
    #[arg(long, allow_negative_numbers = true)]
    pub epsilon: f64,
    /// Random-subset trials.
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Seed for the random baseline; defaults to the generator seed or 0.
    #[arg(long)]
    pub baseline_seed: Option<u64>,
    #[arg(long)]
    pub fast_path: bool,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ReportFormat::Csv)]
    pub format: ReportFormat,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub source: MatrixSource,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = MatrixFormat::Csv)]
    pub format: MatrixFormat,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    Csv,
    Mtx,
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse().map_err(|e: wellcond_core::Error| e.to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // help and version are not failures; every usage error exits 1
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Select(a) => commands::select(&a),
        Command::Verify(a) => commands::verify(&a),
        Command::Bench(a) => commands::bench(&a),
        Command::Generate(a) => commands::generate(&a),
    };
    match result {
        Ok(outcome) => outcome.exit_code(),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
