use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "riesz-stab",
    version,
    about = "Minimal Riesz-energy configurations and stability certificates for pair potentials",
    after_help = "Environment:\n  RIESZ_STAB_THREADS  worker threads for parallel stages (default: all cores)\n\n\
                  A run can also be described in a TOML file: `riesz-stab --config run.toml`.\n\
                  The file holds `command = \"<subcommand>\"` plus long flag names as keys;\n\
                  flags given after it on the command line take precedence."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Minimize the Riesz s-energy of N points in a cube or ball.
    Minimize(MinimizeArgs),
    /// Closed-form potential-theory constants for (d, s).
    Constants(ConstantsArgs),
    /// Classify a potential as S, SS or SSS and compute its constants.
    /// Exit status: 0 certified, 2 unknown, 3 unstable.
    Certify(CertifyArgs),
    /// Test a stored certificate on random configurations; exit status 1 on a violation.
    Verify(VerifyArgs),
    /// Sweep the rib or the exponent and emit a CSV table.
    Scan(ScanArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScanFormat {
    Csv,
    Table,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Output format.
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MinimizeArgs {
    /// Space dimension d.
    #[arg(short = 'd', long = "dimension")]
    pub dimension: usize,
    /// Riesz exponent s (> 0).
    #[arg(short = 's', long = "exponent", allow_negative_numbers = true)]
    pub exponent: f64,
    /// Number of points N.
    #[arg(short = 'N', long = "points")]
    pub points: usize,
    /// Domain as `cube:<rib>` (centred at the origin) or `ball:<radius>`.
    #[arg(long, default_value = "cube:1")]
    pub domain: String,
    /// Random starts [default: 8 + 2N].
    #[arg(long)]
    pub starts: Option<usize>,
    /// Seed of the start generator.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Stop when the projected-gradient norm drops below tol * N.
    #[arg(long = "grad-tol", default_value_t = 1e-9)]
    pub grad_tol: f64,
    /// Iteration cap per start.
    #[arg(long = "max-iters", default_value_t = 50_000)]
    pub max_iters: usize,
    /// Also write the best configuration as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct ConstantsArgs {
    #[arg(short = 'd', long = "dimension")]
    pub dimension: usize,
    #[arg(short = 's', long = "exponent", allow_negative_numbers = true)]
    pub exponent: f64,
    /// Ball radius for the energy integrals.
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    /// Cube rib for the cell constants.
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// Core strength phi0.
    #[arg(long, default_value_t = 1.0)]
    pub phi0: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    /// Potential description (TOML).
    #[arg(long)]
    pub potential: PathBuf,
    /// Comma-separated ribs, tried in order [default: core_radius * 2^-k, k = 0..7].
    #[arg(long = "lambda-grid", value_delimiter = ',')]
    pub lambda_grid: Option<Vec<f64>>,
    /// Energy margin epsilon [default: 0 for s = 0, a quarter of the margin for 0 < s < d, C_d/10 for s = d].
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Largest N minimized for the cell energies when 0 < s < d.
    #[arg(long, default_value_t = 48)]
    pub budget: usize,
    /// Random starts per minimization.
    #[arg(long, default_value_t = 12)]
    pub starts: usize,
    /// Seed of the minimizer.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Lattice truncation for v0 [default: automatic].
    #[arg(long)]
    pub truncation: Option<usize>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub potential: PathBuf,
    /// Certificate JSON written by `certify`.
    #[arg(long)]
    pub certificate: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    /// Configuration sizes are drawn from 2..=n-max.
    #[arg(long = "n-max", default_value_t = 20)]
    pub n_max: usize,
    /// Rib of the sampling box [0, rib)^d.
    #[arg(long = "box-rib", default_value_t = 10.0)]
    pub box_rib: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Sweep {
    Lambda,
    S,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// Swept quantity.
    #[arg(long, value_enum)]
    pub over: Sweep,
    /// First grid value.
    #[arg(long)]
    pub from: f64,
    /// Last grid value.
    #[arg(long)]
    pub to: f64,
    /// Number of grid points; the rib grid is geometric, the exponent grid linear.
    #[arg(long, default_value_t = 8)]
    pub steps: usize,
    /// Potential description, required for `--over lambda`.
    #[arg(long)]
    pub potential: Option<PathBuf>,
    /// Dimension, required for `--over s`.
    #[arg(short = 'd', long = "dimension")]
    pub dimension: Option<usize>,
    /// Ball radius for `--over s`.
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    /// Cube rib for `--over s`.
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1.0)]
    pub phi0: f64,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: ScanFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
