use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use perc_core::graphs::{self, Graph};
use serde::Serialize;

use crate::error::{config, CliResult};
use crate::experiments::ExperimentArgs;

#[derive(Debug, Parser)]
#[command(name = "perclab", version, about = "Bond percolation laboratory for finite transitive graphs")]
pub struct Cli {
    /// Worker thread cap (results do not depend on it).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output prefix: writes PREFIX.jsonl, PREFIX.csv, PREFIX.summary.json.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print a graph as JSON.
    Gen(GenArgs),
    /// Independent replicas at one parameter.
    Sim(SimArgs),
    /// Edge-insertion sweeps, read off at every grid parameter.
    Sweep(SweepArgs),
    /// Monotone estimate of p ↦ P_p(‖K1‖ ≥ α).
    Curve(CurveArgs),
    /// p_c(α, δ) by stochastic bisection.
    Threshold(ThresholdArgs),
    /// p_c(β, 1-δ) / p_c(β, δ).
    Ratio(RatioArgs),
    /// Two-point function from a source vertex.
    Twopoint(TwoPointArgs),
    /// Samples of the monotone coupling ω_q ⊆ ω_p.
    Couple(CoupleArgs),
    /// Sandcastle frequencies at probe vertices.
    Sandcastle(SandcastleArgs),
    /// Activation probability of an edge set.
    Activate(ActivateArgs),
    /// Balanced edge separator.
    Separator(SeparatorArgs),
    /// Orbit-based decomposition search.
    Molecular(MolecularArgs),
    /// Monte Carlo against exact enumeration on the small-graph battery.
    OracleValidate(OracleArgs),
    /// Named reproduction experiment.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Cycle,
    Torus,
    Hypercube,
    Complete,
    /// complete(n) □ complete(2).
    KnBoxK2,
    AbelianCayley,
    MolecularChain,
    PathPair,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GraphArgs {
    #[arg(long, value_enum)]
    pub family: Option<Family>,
    /// Vertex count (cycle, complete), block size (kn-box-k2,
    /// molecular-chain) or path length (path-pair).
    #[arg(long)]
    pub n: Option<usize>,
    /// Torus side lengths.
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
    /// Hypercube dimension.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Abelian Cayley moduli.
    #[arg(long, value_delimiter = ',')]
    pub moduli: Option<Vec<usize>>,
    /// Abelian Cayley generators, e.g. "1,0;0,1".
    #[arg(long, allow_hyphen_values = true)]
    pub generators: Option<String>,
    /// Molecular chain window exponent.
    #[arg(long)]
    pub exponent: Option<f64>,
    /// Graph JSON file (as printed by `gen`) instead of a family.
    #[arg(long, conflicts_with = "family")]
    pub graph: Option<PathBuf>,
}

fn need<T: Copy>(v: Option<T>, name: &str, family: &str) -> CliResult<T> {
    v.ok_or_else(|| config(format!("family {family} needs --{name}")))
}

impl GraphArgs {
    pub fn build(&self) -> CliResult<Graph> {
        if let Some(path) = &self.graph {
            let text = std::fs::read_to_string(path).map_err(|e| config(format!("cannot read graph {}: {e}", path.display())))?;
            return Ok(Graph::from_json_str(&text)?);
        }
        let family = self.family.ok_or_else(|| config("either --family or --graph is required"))?;
        let g = match family {
            Family::Cycle => graphs::cycle(need(self.n, "n", "cycle")?)?,
            Family::Complete => graphs::complete(need(self.n, "n", "complete")?)?,
            Family::Torus => graphs::torus(self.dims.as_deref().ok_or_else(|| config("family torus needs --dims"))?)?,
            Family::Hypercube => graphs::hypercube(need(self.dim, "dim", "hypercube")?)?,
            Family::KnBoxK2 => {
                let n = need(self.n, "n", "kn-box-k2")?;
                graphs::cartesian_product(&graphs::complete(n)?, &graphs::complete(2)?)?
            }
            Family::AbelianCayley => {
                let moduli = self.moduli.as_deref().ok_or_else(|| config("family abelian-cayley needs --moduli"))?;
                let text = self.generators.as_deref().ok_or_else(|| config("family abelian-cayley needs --generators"))?;
                graphs::abelian_cayley(moduli, &parse_generators(text)?)?
            }
            Family::MolecularChain => graphs::molecular_chain(need(self.n, "n", "molecular-chain")?, self.exponent.unwrap_or(0.3))?,
            Family::PathPair => graphs::path_pair(need(self.n, "n", "path-pair")?)?,
        };
        Ok(g)
    }
}

fn parse_generators(text: &str) -> CliResult<Vec<Vec<i64>>> {
    text.split(';')
        .map(|g| {
            g.split(',')
                .map(|x| x.trim().parse::<i64>().map_err(|_| config(format!("bad generator entry `{x}`"))))
                .collect()
        })
        .collect()
}

/// Either an explicit list or an evenly spaced grid.
#[derive(Debug, Clone, Args, Serialize)]
pub struct GridArgs {
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
    #[arg(long)]
    pub p_min: Option<f64>,
    #[arg(long)]
    pub p_max: Option<f64>,
    #[arg(long, default_value_t = 101)]
    pub points: usize,
}

impl GridArgs {
    pub fn build(&self) -> CliResult<Vec<f64>> {
        if let Some(g) = &self.grid {
            if self.p_min.is_some() || self.p_max.is_some() {
                return Err(config("give either --grid or --p-min/--p-max"));
            }
            return Ok(g.clone());
        }
        let lo = self.p_min.unwrap_or(0.0);
        let hi = self.p_max.unwrap_or(1.0);
        if lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) || self.points < 2 {
            return Err(config("need p_min < p_max and at least 2 points"));
        }
        let k = (self.points - 1) as f64;
        Ok((0..self.points).map(|i| lo + (hi - lo) * i as f64 / k).collect())
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GenArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value_t = 1000)]
    pub replicas: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Also estimate P(‖K1‖ ≥ α).
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, default_value_t = 4096)]
    pub replicas: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Direct,
    SweepPool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CurveArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, default_value_t = 2000)]
    pub replicas: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Method::SweepPool)]
    pub method: Method,
    /// Also compute I, Q (bound 4/δ) and the Markov check at ε = 4.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Number of sprinkling-sequence terms built inside Q (needs --delta).
    #[arg(long)]
    pub sprinkle: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SearchArgs {
    #[arg(long, default_value_t = 1e-3)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Method::SweepPool)]
    pub method: Method,
    /// Normal quantile for probe decisions.
    #[arg(long)]
    pub z: Option<f64>,
    #[arg(long)]
    pub initial_replicas: Option<u64>,
    #[arg(long)]
    pub max_replicas: Option<u64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ThresholdArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub delta: f64,
    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RatioArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long)]
    pub beta: f64,
    #[arg(long)]
    pub delta: f64,
    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TwoPointArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value_t = 0)]
    pub source: usize,
    #[arg(long, default_value_t = 1000)]
    pub replicas: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CoupleArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long)]
    pub q: f64,
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value_t = 1000)]
    pub replicas: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SandcastleArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub q: f64,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub beta: f64,
    #[arg(long, default_value_t = 500)]
    pub replicas: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Inner conditional replicas per scored cluster.
    #[arg(long, default_value_t = 64)]
    pub inner: u64,
    /// Probability level of the sandcastle definition.
    #[arg(long, default_value_t = 0.5)]
    pub level: f64,
    /// Probe vertices (default: 8 evenly spread).
    #[arg(long, value_delimiter = ',')]
    pub probes: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ActivateArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub alpha: f64,
    /// Edges of H as "u-v" pairs, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub edges: Option<Vec<String>>,
    /// Use a declared edge orbit as H.
    #[arg(long, conflicts_with = "edges")]
    pub orbit: Option<usize>,
    #[arg(long, default_value_t = 1000)]
    pub replicas: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeparatorModeArg {
    /// Exact up to 24 vertices, heuristic above.
    Auto,
    Exact,
    Heuristic,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SeparatorArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long, default_value_t = 1.0 / 3.0)]
    pub theta: f64,
    #[arg(long, value_enum, default_value_t = SeparatorModeArg::Auto)]
    pub mode: SeparatorModeArg,
    /// Annealing moves per restart.
    #[arg(long)]
    pub budget: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MolecularArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Allowed |F| / |V|.
    #[arg(long, default_value_t = 2.0)]
    pub c: f64,
    #[arg(long, default_value_t = 16)]
    pub m_max: usize,
    /// Balance parameter for the separator witness.
    #[arg(long, default_value_t = 1.0 / 3.0)]
    pub theta: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OracleArgs {
    #[arg(long, default_value_t = 100_000)]
    pub replicas: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Minimum fraction of passing cells.
    #[arg(long, default_value_t = 0.95)]
    pub min_pass_fraction: f64,
}
