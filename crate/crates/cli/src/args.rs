use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use unitselect_core::Estimator;

#[derive(Debug, Parser)]
#[command(name = "unitselect", version, about = "Bounds, audits and simulations for unit selection")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bound the benefit of each group and rank the groups.
    Bounds(BoundsArgs),
    /// Compare an A/B-test heuristic with the benefit bounds.
    Compare(CompareArgs),
    /// Generate a study file from ground-truth response types.
    Simulate(SimulateArgs),
    /// Check closed-form bounds against brute-force grid enumeration.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimatorArg {
    Midpoint,
    Lower,
    Upper,
}

impl From<EstimatorArg> for Estimator {
    fn from(e: EstimatorArg) -> Self {
        match e {
            EstimatorArg::Midpoint => Estimator::Midpoint,
            EstimatorArg::Lower => Estimator::Lower,
            EstimatorArg::Upper => Estimator::Upper,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, env = "UNITSELECT_FORMAT", default_value = "table")]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct BoundsArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "midpoint")]
    pub estimator: EstimatorArg,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Heuristic weights `A,B` for `A·P(y_x) - B·P(y_x')`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weights {
    pub a: f64,
    pub b: f64,
}

impl FromStr for Weights {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s
            .split_once(',')
            .ok_or_else(|| format!("expected `A,B`, got `{s}`"))?;
        let parse = |t: &str| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("`{t}` is not a finite number"))
        };
        Ok(Weights {
            a: parse(a)?,
            b: parse(b)?,
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Heuristic weights, e.g. `--ab 1,1`.
    #[arg(long, allow_hyphen_values = true)]
    pub ab: Weights,
    #[arg(long, value_enum, default_value = "midpoint")]
    pub estimator: EstimatorArg,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long, default_value_t = 750)]
    pub n_per_arm: u64,
    #[arg(long, default_value_t = 0)]
    pub n_obs: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Emit rounded expected counts instead of sampling.
    #[arg(long)]
    pub exact: bool,
    /// Output path; `-` writes to stdout.
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
    /// Worker threads; output does not depend on this.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    pub grid_step: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}
