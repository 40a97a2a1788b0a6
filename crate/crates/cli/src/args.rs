use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "urp", version, about = "Payload allocation under strict reliability for multi-antenna links")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Largest payload meeting the error target, per method.
    Rate(RateArgs),
    /// Sweep one parameter (or run a figure preset) and write CSV.
    Sweep(SweepArgs),
    /// Monte Carlo estimate of the error probability at a fixed payload.
    Simulate(SimulateArgs),
    /// Run named consistency checks and report pass/fail as JSON lines.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Args)]
pub struct TopologyArgs {
    /// Topology JSON file (`r0`, `alpha`, `interferers` or `path_losses`).
    #[arg(long, env = "URP_TOPOLOGY", conflicts_with_all = ["beta", "eta"])]
    pub topology: Option<PathBuf>,
    /// Aggregate interference parameter; use with --eta instead of a topology file.
    #[arg(long, env = "URP_BETA", requires = "eta")]
    pub beta: Option<f64>,
    /// Number of interferers.
    #[arg(long, env = "URP_ETA", requires = "beta")]
    pub eta: Option<u32>,
}

#[derive(Debug, Clone, Args)]
pub struct LinkArgs {
    /// Receive antennas.
    #[arg(long = "M", env = "URP_M")]
    pub antennas: Option<u32>,
    /// Blocklength in channel uses.
    #[arg(long = "n", env = "URP_N")]
    pub blocklength: Option<u32>,
    /// Error target.
    #[arg(long, env = "URP_EPS")]
    pub eps: Option<f64>,
    #[arg(long, env = "URP_SCHEME", value_enum, default_value_t = SchemeArg::Sc)]
    pub scheme: SchemeArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Sc,
    Mrc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Exact,
    Approx,
    Fb,
    Closed,
    Numeric,
}

#[derive(Debug, Clone, Args)]
pub struct RateArgs {
    #[command(flatten)]
    pub topology: TopologyArgs,
    #[command(flatten)]
    pub link: LinkArgs,
    /// Methods to evaluate (comma separated); defaults to every method of the scheme.
    #[arg(long, env = "URP_METHOD", value_enum, value_delimiter = ',')]
    pub method: Vec<MethodArg>,
    /// Emit one JSON record per method.
    #[arg(long, env = "URP_JSON")]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AxisArg {
    Eps,
    Beta,
    M,
    N,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Named figure recipe.
    #[arg(long, env = "URP_PRESET", conflicts_with_all = ["axis", "values"])]
    pub preset: Option<String>,
    /// Parameter to vary.
    #[arg(long, value_enum, requires = "values")]
    pub axis: Option<AxisArg>,
    /// Axis values, comma separated and strictly increasing.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub values: Vec<f64>,
    #[command(flatten)]
    pub topology: TopologyArgs,
    #[command(flatten)]
    pub link: LinkArgs,
    #[arg(long, env = "URP_METHOD", value_enum, value_delimiter = ',')]
    pub method: Vec<MethodArg>,
    /// Output path; standard output when absent.
    #[arg(long, env = "URP_OUT")]
    pub out: Option<PathBuf>,
    #[arg(long, env = "URP_WORKERS", default_value_t = 1)]
    pub workers: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SemanticsArg {
    Asymptotic,
    Fb,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Full simulation spec as JSON; the remaining flags are then ignored.
    #[arg(long, env = "URP_SPEC")]
    pub spec: Option<PathBuf>,
    #[command(flatten)]
    pub topology: TopologyArgs,
    #[command(flatten)]
    pub link: LinkArgs,
    /// Payload in bits.
    #[arg(long, env = "URP_K")]
    pub k: Option<u64>,
    #[arg(long, env = "URP_SEMANTICS", value_enum, default_value_t = SemanticsArg::Asymptotic)]
    pub semantics: SemanticsArg,
    #[arg(long, env = "URP_TRIALS", value_parser = parse_count, default_value = "1000000")]
    pub trials: u64,
    #[arg(long, env = "URP_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, env = "URP_WORKERS", default_value_t = 1)]
    pub workers: usize,
    /// Run even when the trial count cannot resolve --eps.
    #[arg(long, env = "URP_ALLOW_UNDERPOWERED")]
    pub allow_underpowered: bool,
    /// Average the conditional error probability instead of drawing errors (fb semantics).
    #[arg(long, env = "URP_VARIANCE_REDUCED")]
    pub variance_reduced: bool,
    /// Also write the report line to this file.
    #[arg(long, env = "URP_OUT")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScopeArg {
    Tails,
    Bounds,
    Montecarlo,
    All,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[arg(value_enum, default_value_t = ScopeArg::All)]
    pub scope: ScopeArg,
    #[arg(long, env = "URP_TRIALS", value_parser = parse_count, default_value = "10000000")]
    pub trials: u64,
    #[arg(long, env = "URP_SEED", default_value_t = 7)]
    pub seed: u64,
    #[arg(long, env = "URP_WORKERS", default_value_t = 1)]
    pub workers: usize,
    #[arg(long, env = "URP_ALLOW_UNDERPOWERED")]
    pub allow_underpowered: bool,
}

/// Accepts plain integers and integral scientific notation such as `1e7`.
fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    match s.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.fract() == 0.0 && v <= u64::MAX as f64 => Ok(v as u64),
        _ => Err(format!("`{s}` is not a nonnegative integer")),
    }
}
