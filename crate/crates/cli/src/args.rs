use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "hamsim", version, about = "Sampling-based simulation of exp(iHt)ψ")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one evolution and report the requested amplitudes as JSON.
    Evolve(EvolveArgs),
    /// Run seeded trials over a parameter grid and report errors as CSV.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RunMode {
    Psd,
    Hermitian,
    /// Unit-trace psd Hamiltonian, run through the psd path.
    Density,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    #[value(name = "M")]
    Samples,
    #[value(name = "K")]
    Order,
    #[value(name = "t")]
    Time,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GridScale {
    Lin,
    Log,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// COO Hamiltonian file.
    #[arg(long, value_name = "PATH", conflicts_with = "family", required_unless_present = "family")]
    pub hamiltonian: Option<PathBuf>,

    /// Built-in family: inverse-diag, random-sparse-psd, random-sparse-hermitian, rank-r-psd, laplacian-path.
    #[arg(long, value_name = "NAME", requires = "n")]
    pub family: Option<String>,

    /// Qubit count for --family.
    #[arg(long, value_name = "N", requires = "family")]
    pub n: Option<u32>,

    /// Off-diagonal entries per row for the random sparse families.
    #[arg(long, value_name = "S")]
    pub row_nnz: Option<usize>,

    /// Rank for rank-r-psd.
    #[arg(long, value_name = "R")]
    pub rank: Option<usize>,

    /// Factor support size for rank-r-psd.
    #[arg(long, value_name = "S")]
    pub support: Option<usize>,

    /// Multiplier applied to the normalized family matrix.
    #[arg(long, value_name = "X")]
    pub scale: Option<f64>,

    /// Seed for randomized families.
    #[arg(long, value_name = "U64", default_value_t = 0)]
    pub family_seed: u64,

    /// State file (`n <q>` header, then `i re im` lines).
    #[arg(long, value_name = "PATH", conflicts_with = "basis")]
    pub state: Option<PathBuf>,

    /// Start from a computational basis state, decimal or 0b-prefixed.
    #[arg(long, value_name = "INDEX")]
    pub basis: Option<String>,

    /// Algorithm; defaults to the Hamiltonian's declared mode.
    #[arg(long, value_enum)]
    pub mode: Option<RunMode>,

    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub t: f64,

    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,

    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,

    /// Override the planned sample count M.
    #[arg(long, value_name = "M")]
    pub samples: Option<usize>,

    /// Override the planned truncation order K.
    #[arg(long, value_name = "K")]
    pub order: Option<usize>,

    #[arg(long, value_name = "U64", default_value_t = 0)]
    pub seed: u64,

    /// Hermitian mode: do not subtract tr(H)/2ⁿ from the diagonal.
    #[arg(long)]
    pub no_trace_shift: bool,

    /// Certified upper bound on ‖H‖ used by the planner instead of power iteration.
    #[arg(long, value_name = "X")]
    pub norm_bound: Option<f64>,

    /// Rows per accumulation block.
    #[arg(long, value_name = "N")]
    pub block_size: Option<usize>,

    /// Output file; stdout when absent.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub common: Common,

    /// Comma-separated basis indices, decimal or 0b-prefixed; defaults to the support of ψ.
    #[arg(long, value_name = "IDX[,IDX…]", conflicts_with = "full_state", value_delimiter = ',')]
    pub amplitude: Vec<String>,

    /// Report every amplitude (n ≤ 24).
    #[arg(long)]
    pub full_state: bool,

    /// Compare against dense exact evolution (n ≤ 12).
    #[arg(long)]
    pub exact: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,

    /// Parameter to vary.
    #[arg(long, value_enum, alias = "axis")]
    pub sweep: Axis,

    /// `a:b:steps`, inclusive of both ends.
    #[arg(long, value_name = "a:b:steps")]
    pub grid: String,

    /// Spacing of grid points; M defaults to log, K and t to lin.
    #[arg(long, value_enum)]
    pub grid_scale: Option<GridScale>,

    /// Seeded trials per grid point.
    #[arg(long, value_name = "R", default_value_t = 10)]
    pub trials: u64,
}
