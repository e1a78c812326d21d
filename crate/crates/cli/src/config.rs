//! TOML experiment configuration: one file per run, one section per command.
//! The schema is versioned and unknown keys are rejected.

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub schema_version: u32,
    pub approx: Option<ApproxConfig>,
    pub clamp: Option<ClampConfig>,
    pub certify: Option<CertifyConfig>,
    pub norm: Option<NormConfig>,
    pub sde_compare: Option<SdeCompareConfig>,
    pub bounds: Option<BoundsConfig>,
    pub flow: Option<FlowConfig>,
    pub gen_paths: Option<GenPathsConfig>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<ConfigFile> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let config: ConfigFile = toml::from_str(&text).context("parsing config")?;
        if config.schema_version != SCHEMA_VERSION {
            bail!(
                "unsupported schema_version {} (this build reads {SCHEMA_VERSION})",
                config.schema_version
            );
        }
        Ok(config)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApproxConfig {
    /// Target function of `x`.
    pub f: String,
    /// The box K as `[lo, hi]`.
    pub k: [f64; 2],
    /// Enlargement margin c.
    pub margin: f64,
    pub eps: f64,
    /// "relu" or "squash".
    pub mode: String,
    /// Squash mode only: activation tag ("logistic", "tanh", "ratsig").
    pub rho1: Option<String>,
    /// Squash mode only.
    pub zeta: Option<f64>,
    #[serde(default = "default_network_out")]
    pub network_out: String,
    pub knot_budget: Option<usize>,
    pub cert_grid: Option<usize>,
}

fn default_network_out() -> String {
    "network.txt".to_string()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClampConfig {
    /// Path to the inner network (relative paths resolve against the config).
    pub network: String,
    /// Clamp bound C >= sup_J |phi1|.
    pub bound: f64,
    pub k: [f64; 2],
    pub margin: f64,
    #[serde(default = "default_network_out")]
    pub network_out: String,
    pub grid_points: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifyConfig {
    pub network: String,
    /// "analytic_lipschitz" or "clamped_support".
    pub mode: String,
    /// clamped_support only: the kernel box and margin defining the support.
    pub k: Option<[f64; 2]>,
    pub margin: Option<f64>,
    pub grid_points: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormConfig {
    /// "weighted" or "box".
    pub kind: String,
    /// Reference function of `x`.
    pub f: String,
    pub network: String,
    /// weighted: sweep radius.
    pub radius: Option<f64>,
    /// box: `[lo, hi]`.
    pub k: Option<[f64; 2]>,
    pub grid_points: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientSpec {
    /// Expressions, one per output component (`t`, `x`/`x1..xk`).
    pub exprs: Option<Vec<String>>,
    /// Or a serialized network file.
    pub network: Option<String>,
    /// Whether a network coefficient takes time as its first input.
    #[serde(default)]
    pub time_input: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SdeCompareConfig {
    pub horizon: f64,
    pub x0: Vec<f64>,
    pub noise_dim: usize,
    pub p: f64,
    pub paths: usize,
    pub steps: usize,
    pub seed: u64,
    pub drift: CoefficientSpec,
    pub diffusion: CoefficientSpec,
    pub approx_drift: CoefficientSpec,
    pub approx_diffusion: CoefficientSpec,
    /// Box for the achieved-delta sweep (scalar state only).
    pub k: Option<[f64; 2]>,
    /// Fail the run if the estimate exceeds this.
    pub assert_max: Option<f64>,
    /// Optional delta sweep: extra approximating pairs, plotted if present.
    #[serde(default)]
    pub sweep: Vec<SweepEntry>,
    /// Fail the run if sweep estimates are not non-increasing.
    #[serde(default)]
    pub assert_monotone: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepEntry {
    pub label: String,
    pub drift: CoefficientSpec,
    pub diffusion: CoefficientSpec,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    /// "lipschitz" or "holder".
    pub kind: String,
    pub eps: f64,
    pub horizon: f64,
    /// Lipschitz case.
    pub p: Option<f64>,
    pub lipschitz: Option<f64>,
    pub growth: Option<f64>,
    pub net_growth: Option<f64>,
    pub x0: Option<Vec<f64>>,
    /// Holder case.
    pub gamma: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub delta: Option<f64>,
    /// Holder: also search for an admissible (alpha, beta, delta) witness.
    #[serde(default)]
    pub witness_search: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowConfig {
    pub v1: String,
    pub v2: String,
    /// Start points (scalar state).
    pub x_values: Vec<f64>,
    pub horizon: f64,
    pub lipschitz: f64,
    pub eps_w: f64,
    pub steps: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenPathsConfig {
    pub horizon: f64,
    pub x0: Vec<f64>,
    pub noise_dim: usize,
    pub paths: usize,
    pub steps: usize,
    pub seed: u64,
    pub drift: CoefficientSpec,
    pub diffusion: CoefficientSpec,
    /// "trajectories" (default) or "increments".
    #[serde(default = "default_dump")]
    pub dump: String,
    /// Optional sup-moment order; adds a summary row (requires growth).
    pub moment_q: Option<f64>,
    /// Declared linear-growth constant for moment estimation.
    pub declared_growth: Option<f64>,
}

fn default_dump() -> String {
    "trajectories".to_string()
}
