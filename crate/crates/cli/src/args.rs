use std::path::PathBuf;

use affinv_core::CostFunction;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "affinv",
    version,
    about = "Verify affine-invariant cost functions on positive definite matrices"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the five invariance identity checks and the scalar-surjectivity probe.
    Check(CheckArgs),
    /// Estimate the kernel of H for a det-factoring cost.
    Kernel(KernelArgs),
    /// Minimum covariance determinant location estimate of a CSV dataset.
    Mcd(McdArgs),
    /// Factor a determinant-one matrix into elementary matrices.
    Decompose(DecomposeArgs),
    /// Print a commutator witness for an elementary matrix.
    Commutator(CommutatorArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Report destination; stdout when omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct TrialArgs {
    /// Cost selector: det | qdet:<a> | trace | identity.
    #[arg(long, default_value = "det", value_parser = parse_cost)]
    pub cost: CostFunction,
    /// Dimensions, as a range `1..6` (inclusive) or a list `1,3,5`.
    #[arg(long, default_value = "1..6", value_parser = parse_dims)]
    pub dims: Dims,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Relative tolerance for comparing cost values.
    #[arg(long, default_value_t = affinv_core::cost::DEFAULT_REL_TOL)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub trial: TrialArgs,
    /// Trials per check and dimension.
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    /// Condition-number cap for sampled GL and SL matrices.
    #[arg(long, default_value_t = affinv_core::harness::DEFAULT_MAX_COND)]
    pub max_cond: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    #[command(flatten)]
    pub trial: TrialArgs,
    /// Trials for the factorization precondition checks.
    #[arg(long, default_value_t = 32)]
    pub trials: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct McdArgs {
    /// CSV file, one point per row, optional header.
    #[arg(long, short)]
    pub input: PathBuf,
    /// Subset size, between dimension + 1 and the number of points.
    #[arg(long)]
    pub h: usize,
    #[arg(long, default_value = "det", value_parser = parse_cost)]
    pub cost: CostFunction,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    /// Matrix text file.
    #[arg(long, short)]
    pub input: PathBuf,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CommutatorArgs {
    #[arg(long)]
    pub n: usize,
    /// Row index, 1-based.
    #[arg(long)]
    pub i: usize,
    /// Column index, 1-based.
    #[arg(long)]
    pub j: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

fn parse_cost(s: &str) -> Result<CostFunction, String> {
    s.parse()
        .map_err(|e: affinv_core::cost::CostError| e.to_string())
}

/// A dimension list; a newtype so clap treats it as one value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dims(pub Vec<usize>);

pub fn parse_dims(s: &str) -> Result<Dims, String> {
    let bad = || format!("invalid dimension list {s:?}: expected `lo..hi` or `a,b,c`");
    let dims: Vec<usize> = if let Some((lo, hi)) = s.split_once("..") {
        let lo: usize = lo.trim().parse().map_err(|_| bad())?;
        let hi: usize = hi
            .trim()
            .trim_start_matches('=')
            .parse()
            .map_err(|_| bad())?;
        if lo > hi {
            return Err(bad());
        }
        (lo..=hi).collect()
    } else {
        s.split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|_| bad()))
            .collect::<Result<_, _>>()?
    };
    if dims.is_empty()
        || dims
            .iter()
            .any(|&n| n == 0 || n > affinv_core::linalg::MAX_DIM)
    {
        return Err(bad());
    }
    Ok(Dims(dims))
}
