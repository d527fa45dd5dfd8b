use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sphericity_core::mc::SamplerKind;

#[derive(Debug, Parser)]
#[command(
    name = "sphericity",
    version,
    about = "Likelihood-ratio sphericity test for two-step monotone incomplete normal data",
    after_help = "Exit codes: 0 success, 1 usage or parse error, 2 numerical error."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the LR statistic and p-values for a sample CSV.
    Stat(StatArgs),
    /// Minimize BOUND1-4 over the (v, c) grid.
    Bounds(BoundsArgs),
    /// Monte Carlo study of the null distribution for one or more designs.
    Simulate(SimulateArgs),
    /// Rerun one of the reference table configurations (table1-table9).
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Design given either by degrees of freedom or by sample sizes.
#[derive(Debug, Clone, Default, Args)]
pub struct DesignArgs {
    /// n = N - 1.
    #[arg(long)]
    pub n: Option<usize>,
    /// n1 = N1 - 1.
    #[arg(long)]
    pub n1: Option<usize>,
    /// Number of complete rows.
    #[arg(long = "N1")]
    pub big_n1: Option<usize>,
    /// Number of partial rows.
    #[arg(long = "N2")]
    pub big_n2: Option<usize>,
    /// Dimension of the always-observed block.
    #[arg(long)]
    pub p1: Option<usize>,
    /// Dimension of the block missing from partial rows.
    #[arg(long)]
    pub p2: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Config file: `key = value` lines or a flat JSON object. Flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output path (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Round CSV values to the precision of the reference tables.
    #[arg(long)]
    pub pretty: bool,
    /// Cap on worker threads.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct StatArgs {
    /// Sample CSV with header x1,...,xp; partial rows leave the last p2 cells empty.
    pub data: PathBuf,
    #[command(flatten)]
    pub design: DesignArgs,
    /// Edgeworth expansion order for the p-value.
    #[arg(long)]
    pub order: Option<usize>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub design: DesignArgs,
    /// Replay designs from the p1,p2,n,n1 or p1,p2,N1,N2 columns of a CSV.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Expansion order s.
    #[arg(long)]
    pub order: Option<usize>,
    /// Spacing of the v and c grids.
    #[arg(long)]
    pub grid_step: Option<f64>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub design: DesignArgs,
    /// Replay designs (and an optional alpha column) from a CSV.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Nominal levels; repeat the flag or separate with commas.
    #[arg(long, value_delimiter = ',')]
    pub alpha: Vec<f64>,
    #[arg(long)]
    pub reps: Option<u64>,
    /// Falls back to the SPHERICITY_SEED environment variable.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub order: Option<usize>,
    #[arg(long, value_parser = parse_sampler)]
    pub sampler: Option<SamplerKind>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    /// table1 ... table9.
    pub table: String,
    #[arg(long)]
    pub reps: Option<u64>,
    /// Falls back to the SPHERICITY_SEED environment variable.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub order: Option<usize>,
    #[arg(long)]
    pub grid_step: Option<f64>,
    /// Emit only the deterministic columns.
    #[arg(long)]
    pub no_mc: bool,
    #[command(flatten)]
    pub common: CommonArgs,
}

fn parse_sampler(s: &str) -> Result<SamplerKind, String> {
    s.parse().map_err(|e: sphericity_core::Error| e.to_string())
}
