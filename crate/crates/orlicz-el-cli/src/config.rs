//! Declarative instance configuration: one TOML file describes one
//! instance. Unknown keys are rejected so typos surface as parse errors
//! with the offending field named.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use sha2::{Digest, Sha256};

use orlicz_el::nfunction::{builtin, Family, NFunction};

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct InstanceConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub lagrangian: LagrangianConfig,
    /// Growth gauge of the lower bound; defaults to the instance's registry
    /// gauge.
    pub phi: Option<FamilyConfig>,
    /// Gauge chain for the sublinearity/coercivity checks; when absent the
    /// chain checks are skipped.
    pub hypotheses: Option<HypothesesConfig>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub output: OutputConfig,
    /// Ordering-relation reports to include in `analyze`.
    #[serde(default)]
    pub ordering: Vec<OrderingConfig>,
    /// Families to analyze in config mode (defaults to `phi`).
    #[serde(default)]
    pub analyze: Vec<FamilyConfig>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_period")]
    pub period: f64,
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    #[serde(default = "default_dim")]
    pub dim: usize,
}

fn default_period() -> f64 {
    1.0
}
fn default_nodes() -> usize {
    256
}
fn default_dim() -> usize {
    1
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { period: 1.0, nodes: 256, dim: 1 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LagrangianConfig {
    #[serde(default = "default_lagrangian")]
    pub name: String,
    pub sigma: Option<f64>,
}

fn default_lagrangian() -> String {
    "quadratic_tracking".to_string()
}

impl Default for LagrangianConfig {
    fn default() -> Self {
        Self { name: default_lagrangian(), sigma: None }
    }
}

/// An N-function family selection: `family` plus its parameter.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    #[serde(default)]
    pub family: FamilyName,
    pub p: Option<f64>,
    pub n: Option<u32>,
    pub k: Option<u32>,
}

#[derive(Debug, Clone, Copy, Deserialize, Default, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum FamilyName {
    #[default]
    Power,
    ExpFamily,
    LogPerturbed,
}

impl FamilyConfig {
    pub fn to_family(self) -> Result<Family> {
        match self.family {
            FamilyName::Power => {
                let p = self.p.context("field 'p' is required for family = \"power\"")?;
                Ok(Family::Power(p))
            }
            FamilyName::ExpFamily => {
                let n = self.n.context("field 'n' is required for family = \"exp_family\"")?;
                Ok(Family::ExpFamily(n))
            }
            FamilyName::LogPerturbed => {
                let k =
                    self.k.context("field 'k' is required for family = \"log_perturbed\"")?;
                Ok(Family::LogPerturbed(k))
            }
        }
    }

    pub fn to_nfunction(self) -> Result<NFunction> {
        Ok(builtin(self.to_family()?)?)
    }

    /// Parses inline CLI parameters: `--family NAME` with `--p/--n/--k`.
    pub fn from_cli(name: &str, p: Option<f64>, n: Option<u32>, k: Option<u32>) -> Result<Self> {
        let family = match name {
            "power" => FamilyName::Power,
            "exp_family" => FamilyName::ExpFamily,
            "log_perturbed" => FamilyName::LogPerturbed,
            other => bail!(
                "unknown value '{other}' for field 'family' (expected power, exp_family or log_perturbed)"
            ),
        };
        Ok(Self { family, p, n, k })
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HypothesesConfig {
    pub p0: f64,
    pub p1: f64,
    /// Exponent of the fitted power minorant (must sit below the lower
    /// index of the growth gauge).
    pub nu: f64,
    /// Override for the conjugate gauge in the coercivity denominator;
    /// defaults to the conjugate of `power(p1)`.
    pub psi1: Option<FamilyConfig>,
    #[serde(default = "default_radii_min")]
    pub radii_min: f64,
    #[serde(default = "default_radii_max")]
    pub radii_max: f64,
    #[serde(default = "default_radii_points")]
    pub radii_points: usize,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
}

fn default_radii_min() -> f64 {
    1.0
}
fn default_radii_max() -> f64 {
    1e15
}
fn default_radii_points() -> usize {
    16
}
fn default_threshold() -> f64 {
    1e2
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_gradient_tolerance")]
    pub gradient_tolerance: f64,
    /// `zero`, `constant`, or `mean_search`.
    #[serde(default = "default_init")]
    pub init: String,
    #[serde(default)]
    pub init_value: f64,
    #[serde(default = "default_mean_radius")]
    pub mean_radius: f64,
}

fn default_max_iterations() -> usize {
    50_000
}
fn default_gradient_tolerance() -> f64 {
    1e-8
}
fn default_init() -> String {
    "mean_search".to_string()
}
fn default_mean_radius() -> f64 {
    1.0
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iterations: default_max_iterations(),
            gradient_tolerance: default_gradient_tolerance(),
            init: default_init(),
            init_value: 0.0,
            mean_radius: default_mean_radius(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_verify_nodes")]
    pub grid_nodes: usize,
    #[serde(default = "default_period")]
    pub period: f64,
    /// Negative-control hook: scales the Sobolev/Wirtinger constants.
    #[serde(default = "default_scale")]
    pub sobolev_scale: f64,
    /// Families swept; defaults to power(2), power(3), exp_family(2).
    #[serde(default)]
    pub families: Vec<FamilyConfig>,
}

fn default_samples() -> usize {
    10_000
}
fn default_verify_nodes() -> usize {
    64
}
fn default_scale() -> f64 {
    1.0
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            samples: default_samples(),
            grid_nodes: default_verify_nodes(),
            period: default_period(),
            sobolev_scale: default_scale(),
            families: Vec::new(),
        }
    }
}

impl VerifyConfig {
    pub fn families_or_default(&self) -> Vec<FamilyConfig> {
        if !self.families.is_empty() {
            return self.families.clone();
        }
        vec![
            FamilyConfig { family: FamilyName::Power, p: Some(2.0), n: None, k: None },
            FamilyConfig { family: FamilyName::Power, p: Some(3.0), n: None, k: None },
            FamilyConfig { family: FamilyName::ExpFamily, p: None, n: Some(2), k: None },
        ]
    }
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrderingConfig {
    pub lhs: FamilyConfig,
    pub rhs: FamilyConfig,
    /// `stronger`, `essentially_stronger`, or `completely_stronger`.
    pub relation: String,
    #[serde(default = "default_a_min")]
    pub a_min: f64,
    #[serde(default = "default_a_max")]
    pub a_max: f64,
    #[serde(default = "default_a_points")]
    pub a_points: usize,
    #[serde(default = "default_x_min")]
    pub x_min: f64,
    #[serde(default = "default_x_max")]
    pub x_max: f64,
    #[serde(default = "default_x_points")]
    pub x_points: usize,
}

fn default_a_min() -> f64 {
    1e-3
}
fn default_a_max() -> f64 {
    1e3
}
fn default_a_points() -> usize {
    61
}
fn default_x_min() -> f64 {
    1e-8
}
fn default_x_max() -> f64 {
    1e16
}
fn default_x_points() -> usize {
    481
}

/// Loads and parses a config file; returns the config together with the
/// sha256 of the raw bytes (the audit-trail hash embedded in reports).
pub fn load(path: &Path) -> Result<(InstanceConfig, String)> {
    let raw = std::fs::read(path)
        .with_context(|| format!("cannot read config file {}", path.display()))?;
    let hash = hex_digest(&raw);
    let text = String::from_utf8(raw).context("config file is not valid UTF-8")?;
    let config: InstanceConfig = toml::from_str(&text)
        .with_context(|| format!("cannot parse config file {}", path.display()))?;
    Ok((config, hash))
}

/// Hash for runs without a config file (inline flags): digest of a
/// canonical description string.
pub fn inline_hash(description: &str) -> String {
    hex_digest(description.as_bytes())
}

fn hex_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}
