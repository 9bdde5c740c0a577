//! Resolved run configuration. Every output embeds one of these, and
//! `--config` replays it.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use gauge_frontier::{ChannelSpec, InputPoint};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
}

fn json_format() -> Format {
    Format::Json
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "json_format")]
    pub format: Format,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_grid: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<ChannelSpec>,
    pub command: Command,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    Dist(DistCmd),
    Pack(PackCmd),
    Frontier(FrontierCmd),
    Classify(ClassifyCmd),
    Simulate(SimulateCmd),
    Dmt(DmtCmd),
    Szego(SzegoCmd),
    Cutoff(CutoffCmd),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Dist(_) => "dist",
            Command::Pack(_) => "pack",
            Command::Frontier(_) => "frontier",
            Command::Classify(_) => "classify",
            Command::Simulate(_) => "simulate",
            Command::Dmt(_) => "dmt",
            Command::Szego(_) => "szego",
            Command::Cutoff(_) => "cutoff",
        }
    }

    /// Whether the command runs against a channel spec.
    pub fn needs_spec(&self) -> bool {
        matches!(
            self,
            Command::Pack(_) | Command::Frontier(_) | Command::Classify(_) | Command::Simulate(_) | Command::Cutoff(_)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum DistLaw {
    /// Bhattacharyya distance between zero-mean scalar laws.
    Scale,
    /// KL divergence between zero-mean scalar laws.
    Kl,
    /// Squared Hellinger distance between zero-mean scalar laws.
    Hellinger,
    /// Chernoff distance of order `s` between zero-mean scalar laws.
    Chernoff,
    /// Bhattacharyya distance, equal covariances.
    SameCov,
    /// Bhattacharyya distance, equal (zero) means.
    SameMean,
    /// Rayleigh-averaged coefficient from the eigenvalues of `D D^†`.
    AvgRayleigh,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct DistCmd {
    #[arg(value_enum)]
    pub law: DistLaw,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v1: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v2: Option<f64>,
    /// Chernoff order, default 1/2.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    /// Mean vector, e.g. `1+2i,0`.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu1: Option<String>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu2: Option<String>,
    /// Shared covariance, rows split by `;`. Defaults to `I`.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cov: Option<String>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cov1: Option<String>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cov2: Option<String>,
    /// Eigenvalues of `D D^†`, comma separated.
    #[arg(long, value_delimiter = ',')]
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub eigs: Vec<f64>,
    /// Receive antennas.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    /// Cross-check against quadrature (or Monte Carlo for avg-rayleigh).
    #[arg(long)]
    #[serde(default)]
    pub oracle: bool,
    /// Monte Carlo trials for the avg-rayleigh oracle.
    #[arg(long, default_value_t = 100_000)]
    #[serde(default = "default_oracle_trials")]
    pub trials: u64,
}

fn default_oracle_trials() -> u64 {
    100_000
}

fn default_budget() -> u64 {
    2_000_000
}

fn default_restarts() -> usize {
    16
}

fn default_divergence_factor() -> f64 {
    4.0
}

fn default_same_band() -> f64 {
    0.25
}

fn default_sim_trials() -> u64 {
    100_000
}

fn default_max_trials() -> u64 {
    gauge_frontier::mc::DEFAULT_MAX_TRIALS
}

fn default_confidence() -> f64 {
    3.0
}

fn default_steps() -> u32 {
    4
}

fn one() -> usize {
    1
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PackMethod {
    /// Best construction and converse for the channel class.
    #[default]
    Auto,
    /// Random coding with expurgation (lower bound only).
    Expurgate,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct PackCmd {
    /// Distance threshold in bits.
    #[arg(long)]
    pub delta: f64,
    #[arg(long, value_enum, default_value_t = PackMethod::Auto)]
    #[serde(default)]
    pub method: PackMethod,
    /// Pair-evaluation budget for expurgation.
    #[arg(long, default_value_t = 2_000_000)]
    #[serde(default = "default_budget")]
    pub budget: u64,
    /// Rate estimate capping the expurgation schedule.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r0: Option<f64>,
    #[arg(long)]
    #[serde(default)]
    pub no_certificate: bool,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[command(group = clap::ArgGroup::new("load").required(true).args(["k", "r"]))]
pub struct FrontierCmd {
    /// Codebook size.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    /// Multiplexing gain; K follows the channel's rate gauge.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    /// Random-search restarts for matrix channels.
    #[arg(long, default_value_t = 16)]
    #[serde(default = "default_restarts")]
    pub trials: usize,
    /// Greedy candidate pool size.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidates: Option<usize>,
    #[arg(long)]
    #[serde(default)]
    pub no_certificate: bool,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ClassifyCmd {
    /// Ratio growth (last over mid-grid) that counts as divergent.
    #[arg(long, default_value_t = 4.0)]
    #[serde(default = "default_divergence_factor")]
    pub divergence_factor: f64,
    /// Relative band around 1 that counts as bounded.
    #[arg(long, default_value_t = 0.25)]
    #[serde(default = "default_same_band")]
    pub same_band: f64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["frontier", "codebook"]))]
pub struct SimulateCmd {
    /// Simulate the frontier certificate of this size.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frontier: Option<usize>,
    /// JSON file with a list of inputs.
    #[arg(long)]
    #[serde(skip)]
    pub codebook: Option<PathBuf>,
    #[arg(skip)]
    #[serde(default, rename = "codebook", skip_serializing_if = "Option::is_none")]
    pub codebook_points: Option<Vec<InputPoint>>,
    /// Independent channel uses per message.
    #[arg(long, default_value_t = 1)]
    #[serde(default = "one")]
    pub uses: usize,
    #[arg(long, default_value_t = 100_000)]
    #[serde(default = "default_sim_trials")]
    pub trials: u64,
    #[arg(long, default_value_t = gauge_frontier::mc::DEFAULT_MAX_TRIALS)]
    #[serde(default = "default_max_trials")]
    pub max_trials: u64,
    #[arg(long, default_value_t = 3.0)]
    #[serde(default = "default_confidence")]
    pub confidence: f64,
    /// Keep the trial count fixed even when the bound is unresolvable.
    #[arg(long)]
    #[serde(default)]
    pub no_escalate: bool,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct DmtCmd {
    #[arg(long)]
    pub m: u32,
    #[arg(long)]
    pub n: u32,
    /// Multiplexing gains, e.g. `0,1/2,1.5`. Defaults to a uniform grid.
    #[arg(long, value_delimiter = ',')]
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub r: Vec<String>,
    /// Grid points per unit of r when `--r` is absent.
    #[arg(long, default_value_t = 4)]
    #[serde(default = "default_steps")]
    pub steps: u32,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SzegoCmd {
    #[arg(long)]
    pub beta: f64,
    #[arg(long, default_value_t = 1.0)]
    #[serde(default = "unit")]
    pub c_beta: f64,
    #[arg(long, default_value_t = 1.0)]
    #[serde(default = "unit")]
    pub power: f64,
    /// Single SNR when no grid is given.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    /// Block lengths for the on-off pair distance, e.g. `64,128,256`.
    #[arg(long, value_delimiter = ',')]
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub t: Vec<usize>,
    /// Receive antennas for the pair distance.
    #[arg(long, default_value_t = 1)]
    #[serde(default = "one")]
    pub n: usize,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["frontier", "codebook"]))]
pub struct CutoffCmd {
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frontier: Option<usize>,
    #[arg(long)]
    #[serde(skip)]
    pub codebook: Option<PathBuf>,
    #[arg(skip)]
    #[serde(default, rename = "codebook", skip_serializing_if = "Option::is_none")]
    pub codebook_points: Option<Vec<InputPoint>>,
    /// Input probabilities; uniform if absent.
    #[arg(long, value_delimiter = ',')]
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub weights: Vec<f64>,
}

/// Pull a config out of a config file or any output file.
pub fn extract(text: &str) -> Result<RunConfig, String> {
    let json = match text.strip_prefix("# config: ") {
        Some(rest) => rest.lines().next().unwrap_or("").to_string(),
        None => text.to_string(),
    };
    let value: serde_json::Value = serde_json::from_str(&json).map_err(|e| format!("config is not JSON: {e}"))?;
    let inner = match value.get("config") {
        Some(c) if value.get("command").is_none() => c.clone(),
        _ => value,
    };
    serde_json::from_value(inner).map_err(|e| format!("invalid config: {e}"))
}
