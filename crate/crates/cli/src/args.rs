use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use rscsim::decoder::EdgeWeighting;
use rscsim::freqplan::SigmaInterpretation;
use rscsim::noise::ModelKind;
use rscsim::MemoryBasis;

/// Rotated surface code memory simulator, matching decoder and frequency planner.
#[derive(Debug, Parser)]
#[command(name = "rscsim", version, propagate_version = true)]
pub struct Cli {
    /// Worker threads (defaults to all cores). Outputs do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Dump the lattice: qubits, stabilizers, logical chains and bus layout
    Lattice(LatticeArgs),
    /// Dump one syndrome-extraction cycle
    Schedule(LatticeArgs),
    /// Run a memory experiment at one (d, p) point
    Simulate(SimulateArgs),
    /// Scan distances and rates, then fit the threshold crossing
    Threshold(ThresholdArgs),
    /// Decode detection events against a saved matching graph
    Decode(DecodeArgs),
    /// Assign frequency classes and estimate collision yield
    Freqplan(FreqplanArgs),
    /// Re-run a manifest and check its output checksums
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Emit {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JsonOnly {
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelArg {
    CodeCapacity,
    Phenom,
    Circuit,
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::CodeCapacity => ModelKind::CodeCapacity,
            ModelArg::Phenom => ModelKind::Phenomenological,
            ModelArg::Circuit => ModelKind::CircuitLevel,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MemoryArg {
    /// Store |0> and protect the Z logical
    #[default]
    Z,
    /// Store |+> and protect the X logical
    X,
}

impl From<MemoryArg> for MemoryBasis {
    fn from(m: MemoryArg) -> Self {
        match m {
            MemoryArg::Z => MemoryBasis::Z,
            MemoryArg::X => MemoryBasis::X,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightingArg {
    Unit,
    LogLikelihood,
}

impl From<WeightingArg> for EdgeWeighting {
    fn from(w: WeightingArg) -> Self {
        match w {
            WeightingArg::Unit => EdgeWeighting::Unit,
            WeightingArg::LogLikelihood => EdgeWeighting::LogLikelihood,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SigmaReading {
    /// The disorder figure is one standard deviation
    #[default]
    StdDev,
    /// The disorder figure is a full 4-sigma spread
    Spread,
}

impl From<SigmaReading> for SigmaInterpretation {
    fn from(s: SigmaReading) -> Self {
        match s {
            SigmaReading::StdDev => SigmaInterpretation::StdDev,
            SigmaReading::Spread => SigmaInterpretation::Spread,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LatticeArgs {
    /// Code distance (odd)
    #[arg(long, short = 'd')]
    pub distance: usize,
    #[arg(long, value_enum, default_value = "json")]
    pub emit: JsonOnly,
    /// Output file (stdout if absent)
    #[arg(long, short = 'o')]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    /// Code distance (odd)
    #[arg(long, short = 'd')]
    pub distance: usize,
    /// Rounds per shot [default: d, or 1 for code capacity]
    #[arg(long)]
    pub rounds: Option<usize>,
    #[arg(long, value_enum, required_unless_present = "preset", conflicts_with = "preset")]
    pub model: Option<ModelArg>,
    /// Physical error rate
    #[arg(long, required_unless_present = "preset", conflicts_with = "preset")]
    pub p: Option<f64>,
    /// Measurement error rate for the phenom model [default: p]
    #[arg(long)]
    pub q: Option<f64>,
    /// Circuit-level rate from a named gate error: drag-1q, dp-gate, cr-gate, rip-gate, target
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long, default_value_t = 10_000)]
    pub shots: u64,
    /// Seed for all randomness; drawn and printed if absent
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value = "z")]
    pub memory: MemoryArg,
    /// Edge weights [default: log-likelihood]
    #[arg(long, value_enum)]
    pub weighting: Option<WeightingArg>,
    /// Emit one row per shot instead of the aggregate
    #[arg(long)]
    pub per_shot: bool,
    #[arg(long, value_enum, default_value = "csv")]
    pub emit: Emit,
    /// Output file (stdout if absent)
    #[arg(long, short = 'o')]
    pub out: Option<PathBuf>,
    /// Also write the matching graph as JSON
    #[arg(long)]
    pub graph_out: Option<PathBuf>,
    /// Also write every shot's detection events as a JSON array
    #[arg(long)]
    pub events_out: Option<PathBuf>,
}

/// Every option may also be given in the `--config` TOML file, under the
/// same name with underscores; flags take precedence.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdArgs {
    /// TOML file with any of the options below
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub model: Option<ModelArg>,
    /// Comma-separated odd distances
    #[arg(long, value_delimiter = ',')]
    pub distances: Vec<usize>,
    /// Comma-separated physical rates (overrides --p-min/--p-max/--points)
    #[arg(long, value_delimiter = ',')]
    pub rates: Vec<f64>,
    /// Lowest rate of a log-spaced scan
    #[arg(long)]
    pub p_min: Option<f64>,
    /// Highest rate of a log-spaced scan
    #[arg(long)]
    pub p_max: Option<f64>,
    /// Number of log-spaced rates
    #[arg(long)]
    pub points: Option<usize>,
    /// Measurement error rate for the phenom model [default: p]
    #[arg(long)]
    pub q: Option<f64>,
    /// Rounds per shot [default: d, or 1 for code capacity]
    #[arg(long)]
    pub rounds: Option<usize>,
    /// Shots per point [default: 10000]
    #[arg(long)]
    pub shots: Option<u64>,
    /// Seed for all randomness; drawn and printed if absent
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub memory: Option<MemoryArg>,
    #[arg(long, value_enum)]
    pub weighting: Option<WeightingArg>,
    #[arg(long, value_enum)]
    pub emit: Option<Emit>,
    /// Output file (stdout if absent)
    #[arg(long, short = 'o')]
    pub out: Option<PathBuf>,
    /// Also write the fitted threshold as JSON
    #[arg(long)]
    pub fit_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DecodeArgs {
    /// Matching graph JSON (as written by simulate --graph-out)
    #[arg(long)]
    pub graph: PathBuf,
    /// JSON array of detection event sets (as written by simulate --events-out)
    #[arg(long)]
    pub events: PathBuf,
    #[arg(long, value_enum, default_value = "json")]
    pub emit: Emit,
    /// Output file (stdout if absent)
    #[arg(long, short = 'o')]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FreqplanArgs {
    /// Code distance (odd)
    #[arg(long, short = 'd')]
    pub distance: usize,
    /// Junction disorder figure in MHz
    #[arg(long, default_value_t = 280.0)]
    pub sigma_mhz: f64,
    /// How to read --sigma-mhz
    #[arg(long, value_enum, default_value = "std-dev")]
    pub sigma_reading: SigmaReading,
    #[arg(long, default_value_t = 10_000)]
    pub samples: u64,
    /// Seed for all randomness; drawn and printed if absent
    #[arg(long)]
    pub seed: Option<u64>,
    /// Window for degenerate 0-1 transitions (MHz)
    #[arg(long, default_value_t = 17.0)]
    pub w1_mhz: f64,
    /// Window for 0-1 against 1-2 transitions (MHz)
    #[arg(long, default_value_t = 4.0)]
    pub w2_mhz: f64,
    /// Window for two-photon 0-2 transitions (MHz)
    #[arg(long, default_value_t = 4.0)]
    pub w3_mhz: f64,
    #[arg(long, value_enum, default_value = "csv")]
    pub emit: Emit,
    /// Output file (stdout if absent)
    #[arg(long, short = 'o')]
    pub out: Option<PathBuf>,
    /// Also write the class plan as JSON
    #[arg(long)]
    pub plan_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ReplayArgs {
    /// Manifest written by an earlier run
    pub manifest: PathBuf,
}

impl Command {
    pub fn seed(&self) -> Option<Option<u64>> {
        match self {
            Command::Simulate(a) => Some(a.seed),
            Command::Threshold(a) => Some(a.seed),
            Command::Freqplan(a) => Some(a.seed),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::Lattice(_) => "lattice",
            Command::Schedule(_) => "schedule",
            Command::Simulate(_) => "simulate",
            Command::Threshold(_) => "threshold",
            Command::Decode(_) => "decode",
            Command::Freqplan(_) => "freqplan",
            Command::Replay(_) => "replay",
        }
    }
}
