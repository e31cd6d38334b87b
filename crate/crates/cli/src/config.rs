//! JSON experiment configuration.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use frameavg::lattice::MAX_DIM;
use frameavg::{AveragingKind, HamiltonianSpec, LatticeSpec, PerturbationSpec};
use serde::Deserialize;

use crate::error::CliError;

/// Environment variable that may lower the lattice dimension guard.
pub const MAX_DIM_ENV: &str = "FRAMEAVG_MAX_DIM";

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub name: String,
    #[serde(default)]
    pub couplings: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KickConfig {
    #[serde(default)]
    pub site: usize,
    #[serde(default = "default_generator")]
    pub generator: String,
    #[serde(default = "default_strength")]
    pub strength: f64,
}

fn default_generator() -> String {
    "X".into()
}

fn default_strength() -> f64 {
    0.7
}

impl Default for KickConfig {
    fn default() -> Self {
        Self { site: 0, generator: default_generator(), strength: default_strength() }
    }
}

/// A temporal scale: a number or the string `"inf"`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum TauConfig {
    Finite(f64),
    Named(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum AveragingConfig {
    #[serde(rename = "uniform-spatial")]
    Uniform {},
    #[serde(rename = "weighted-spatial")]
    Weighted {
        #[serde(rename = "R")]
        r: f64,
    },
    #[serde(rename = "temporal")]
    Temporal { tau: TauConfig },
}

impl AveragingConfig {
    pub fn to_kind(&self) -> Result<AveragingKind<f64>, CliError> {
        let kind = match self {
            AveragingConfig::Uniform {} => AveragingKind::Uniform,
            AveragingConfig::Weighted { r } => AveragingKind::Weighted { r: *r },
            AveragingConfig::Temporal { tau: TauConfig::Finite(t) } => AveragingKind::Temporal { tau: Some(*t) },
            AveragingConfig::Temporal { tau: TauConfig::Named(s) } if s == "inf" => {
                AveragingKind::Temporal { tau: None }
            }
            AveragingConfig::Temporal { tau: TauConfig::Named(s) } => {
                return Err(CliError::Config(format!("averaging.tau: expected a number or \"inf\", got {s:?}")))
            }
        };
        kind.validate().map_err(|e| CliError::Config(format!("averaging: {e}")))?;
        Ok(kind)
    }
}

/// The document as written.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub model: ModelConfig,
    pub sizes: Vec<usize>,
    pub beta: f64,
    #[serde(default)]
    pub kick: KickConfig,
    #[serde(default = "default_averaging")]
    pub averaging: Vec<AveragingConfig>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
    #[serde(default)]
    pub tolerance_overrides: BTreeMap<String, f64>,
}

fn default_averaging() -> Vec<AveragingConfig> {
    vec![AveragingConfig::Uniform {}]
}

/// Validated configuration.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub model: HamiltonianSpec,
    pub sizes: Vec<usize>,
    pub beta: f64,
    pub kick: KickConfig,
    pub averaging: Vec<AveragingKind<f64>>,
    pub seed: u64,
    pub output_path: Option<PathBuf>,
    pub tolerance_overrides: BTreeMap<String, f64>,
    pub max_dim: usize,
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text, max_dim_from_env()?).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn from_json(text: &str, max_dim: usize) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let inner = e.inner();
            CliError::Config(format!(
                "line {} column {}, field `{}`: {inner}",
                inner.line(),
                inner.column(),
                e.path()
            ))
        })?;
        Self::validate(raw, max_dim)
    }

    fn validate(raw: RawConfig, max_dim: usize) -> Result<Self, CliError> {
        let cfg_err = |m: String| CliError::Config(m);
        let model = HamiltonianSpec::from_named(&raw.model.name, &raw.model.couplings)
            .map_err(|e| cfg_err(format!("model: {e}")))?;
        if raw.sizes.is_empty() {
            return Err(cfg_err("sizes: at least one lattice size is required".into()));
        }
        if raw.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(cfg_err(format!("sizes: must be strictly ascending, got {:?}", raw.sizes)));
        }
        for &n in &raw.sizes {
            LatticeSpec::with_max_dim(n, 2, max_dim).map_err(|e| cfg_err(format!("sizes: N = {n} refused: {e}")))?;
        }
        if !(raw.beta.is_finite() && raw.beta >= 0.0) {
            return Err(cfg_err(format!("beta: must be finite and non-negative, got {}", raw.beta)));
        }
        PerturbationSpec::<f64>::pauli(raw.kick.site, &raw.kick.generator, raw.kick.strength)
            .map_err(|e| cfg_err(format!("kick: {e}")))?;
        if let Some(&n) = raw.sizes.iter().find(|&&n| raw.kick.site >= n) {
            return Err(cfg_err(format!("kick.site: {} is outside the N = {n} chain", raw.kick.site)));
        }
        if raw.averaging.is_empty() {
            return Err(cfg_err("averaging: at least one averaging kind is required".into()));
        }
        let averaging = raw.averaging.iter().map(AveragingConfig::to_kind).collect::<Result<Vec<_>, _>>()?;
        for (name, &value) in &raw.tolerance_overrides {
            if !(value.is_finite() && value >= 0.0) {
                return Err(cfg_err(format!("tolerance_overrides.{name}: must be a non-negative number")));
            }
        }
        Ok(Self {
            model,
            sizes: raw.sizes,
            beta: raw.beta,
            kick: raw.kick,
            averaging,
            seed: raw.seed,
            output_path: raw.output_path,
            tolerance_overrides: raw.tolerance_overrides,
            max_dim,
        })
    }

    pub fn perturbation(&self) -> PerturbationSpec<f64> {
        PerturbationSpec::pauli(self.kick.site, &self.kick.generator, self.kick.strength).expect("validated")
    }

    pub fn lattice(&self, n: usize) -> Result<LatticeSpec, CliError> {
        LatticeSpec::with_max_dim(n, 2, self.max_dim).map_err(|e| CliError::Config(format!("N = {n}: {e}")))
    }
}

/// The lattice guard, lowered by [`MAX_DIM_ENV`] when set.
pub fn max_dim_from_env() -> Result<usize, CliError> {
    match std::env::var(MAX_DIM_ENV) {
        Ok(v) => {
            let parsed: usize = v
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("{MAX_DIM_ENV}: expected a positive integer, got {v:?}")))?;
            Ok(parsed.min(MAX_DIM))
        }
        Err(_) => Ok(MAX_DIM),
    }
}
