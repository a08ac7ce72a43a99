use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use posveri::tasks::{EPS0_BB84, EPS0_ROUTING};

#[derive(Parser, Debug)]
#[command(name = "posveri", version, about = "Position-verification laboratory: honest provers, garden-hose attacks, the SMP reduction and bound audits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub run: RunConfig,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Options shared by every command.
#[derive(Args, Debug, Clone)]
pub struct RunConfig {
    /// Seed for stochastic commands (required by those).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long, short, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json", global = true)]
    pub format: Format,
    /// Referee threshold for routing tasks.
    #[arg(long, default_value_t = EPS0_ROUTING, global = true)]
    pub eps0_routing: f64,
    /// Referee threshold for BB84 tasks.
    #[arg(long, default_value_t = EPS0_BB84, global = true)]
    pub eps0_bb84: f64,
    /// Largest number of measurement branches enumerated exactly.
    #[arg(long, default_value_t = 1 << 20, global = true)]
    pub branch_limit: usize,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Runs the honest provers over every input.
    Honest(HonestArgs),
    /// Builds the inner-product garden-hose protocol and checks it.
    Gardenhose(GardenhoseArgs),
    /// Runs the SMP reduction on a strategy.
    Reduce(ReduceArgs),
    /// Randomized inequality batteries.
    Invariants(InvariantArgs),
    /// Evaluates the closed-form bounds.
    Bounds(BoundsArgs),
}

#[derive(Args, Debug)]
pub struct HonestArgs {
    #[arg(long, default_value = "routing")]
    pub task: String,
    #[arg(long = "f", default_value = "ip")]
    pub function: String,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum WiringArg {
    Full,
    Pruned,
}

#[derive(Args, Debug)]
pub struct GardenhoseArgs {
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long, value_enum, default_value = "pruned")]
    pub wiring: WiringArg,
    /// Cross-check every input by simulating the teleportation chain (n ≤ 2).
    #[arg(long)]
    pub quantum_verify: bool,
}

#[derive(Args, Debug)]
pub struct ReduceArgs {
    /// Strategy JSON file.
    #[arg(long, conflicts_with = "builtin")]
    pub strategy: Option<PathBuf>,
    /// Library strategy: identity, empty, x_only_routing, x_only_bb84,
    /// constant_bb84:<p0>, depolarized:<p> or gardenhose.
    #[arg(long)]
    pub builtin: Option<String>,
    #[arg(long = "f", default_value = "ip")]
    pub function: String,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// Monte-Carlo samples per input instead of exhaustive enumeration.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Decode and replay every k-th branch; 0 disables.
    #[arg(long, default_value_t = 1)]
    pub verify_every: usize,
    /// Referee threshold; the task default when absent.
    #[arg(long)]
    pub eps0: Option<f64>,
    /// Allowance on the Markov bound in sampled mode.
    #[arg(long, default_value_t = 0.05)]
    pub slack: f64,
    /// Include one record per branch in JSON output (always on for CSV).
    #[arg(long)]
    pub records: bool,
}

#[derive(Args, Debug)]
pub struct InvariantArgs {
    #[arg(long, default_value_t = 1000)]
    pub cit: usize,
    #[arg(long, default_value_t = 1000)]
    pub continuity: usize,
    #[arg(long, default_value_t = 100)]
    pub routing_floor: usize,
    #[arg(long, default_value_t = 100)]
    pub disjointness: usize,
    #[arg(long, default_value_t = 100)]
    pub bb84_uncertainty: usize,
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    /// Input half-lengths, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16,32,64,128,256,512")]
    pub n: Vec<usize>,
    /// Errors, comma separated; the grid 0, 0.05, …, 0.45 when absent.
    #[arg(long, value_delimiter = ',')]
    pub eps: Vec<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub delta: f64,
    #[arg(long)]
    pub q: Option<usize>,
    #[arg(long)]
    pub cg: Option<usize>,
    #[arg(long)]
    pub cm: Option<usize>,
    /// Bits naming a gate.
    #[arg(long, default_value_t = 2)]
    pub bpc: usize,
    /// Referee threshold used for the Markov scaling in the audit.
    #[arg(long)]
    pub eps0: Option<f64>,
    #[arg(long = "function", default_value = "ip")]
    pub function: String,
    /// Circuit depth for the depth trade-off.
    #[arg(long)]
    pub d: Option<f64>,
    /// Audit the built-in strategy corpus instead.
    #[arg(long)]
    pub corpus: bool,
    /// Samples per input for sampled corpus entries.
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
}
