//! Run configuration: a single JSON document with a schema version, plus
//! command-line overrides.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use kernelpath::{
    DomainBox, Error, InnovationDist, InnovationSpec, KernelSpec, NodeSet, QuadratureRule, Result,
};

pub const SCHEMA_VERSION: u32 = 1;

/// A point grid given either as a per-axis resolution or as explicit points.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Resolution { resolution: usize },
    Points { points: Vec<Vec<f64>> },
}

impl GridSpec {
    pub fn to_nodes(&self, domain: &DomainBox) -> Result<NodeSet> {
        match self {
            GridSpec::Resolution { resolution } => {
                if domain.dim() == 1 {
                    NodeSet::grid_1d(domain.clone(), *resolution)
                } else {
                    NodeSet::grid(domain.clone(), *resolution)
                }
            }
            GridSpec::Points { points } => {
                let dim = domain.dim();
                let mut flat = Vec::with_capacity(points.len() * dim);
                for p in points {
                    if p.len() != dim {
                        return Err(Error::InvalidSpec(format!(
                            "point {p:?} does not match domain dimension {dim}"
                        )));
                    }
                    flat.extend_from_slice(p);
                }
                NodeSet::new(dim, flat, domain.clone())
            }
        }
    }
}

fn default_resolution() -> GridSpec {
    GridSpec::Resolution { resolution: 201 }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpansionKind {
    Newton,
    Kl,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExpansionConfig {
    pub kind: ExpansionKind,
    /// Basis size / truncation level N.
    pub n: usize,
    /// P-greedy stop tolerance on the sup residual (Newton).
    #[serde(default)]
    pub greedy_tol: f64,
    /// Quadrature rule for the Nyström grid (KL).
    #[serde(default = "default_rule")]
    pub quadrature_rule: QuadratureRule,
    /// Quadrature points per axis (KL).
    #[serde(default = "default_quad_points")]
    pub quadrature_points: usize,
}

fn default_rule() -> QuadratureRule {
    QuadratureRule::Midpoint
}

fn default_quad_points() -> usize {
    500
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub m: usize,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self { m: 100 }
    }
}

/// Parameters of the smoothness-gap suite.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GapConfig {
    pub m: f64,
    pub dim: usize,
    pub probes: Vec<f64>,
    #[serde(default = "default_gap_n_max")]
    pub n_max: usize,
}

fn default_gap_n_max() -> usize {
    10_000
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InnovationConfig {
    pub dist: InnovationDist,
    pub seed: u64,
    #[serde(default)]
    pub stream: u64,
}

impl InnovationConfig {
    pub fn to_spec(&self) -> InnovationSpec {
        InnovationSpec {
            dist: self.dist,
            seed: self.seed,
            stream: self.stream,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutputConfig {
    #[serde(default = "default_out_dir")]
    pub dir: PathBuf,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: default_out_dir(),
        }
    }
}

/// The complete run configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub schema_version: u32,
    pub kernel: KernelSpec,
    pub domain: DomainBox,
    /// Candidate grid for greedy selection / Newton nodes.
    #[serde(default = "default_resolution")]
    pub candidates: GridSpec,
    /// Evaluation grid for ensembles, certificates, and bound checks.
    #[serde(default = "default_resolution")]
    pub eval_grid: GridSpec,
    pub expansion: ExpansionConfig,
    pub innovations: InnovationConfig,
    #[serde(default)]
    pub ensemble: EnsembleConfig,
    #[serde(default)]
    pub gap: Option<GapConfig>,
    #[serde(default)]
    pub outputs: OutputConfig,
}

impl RunConfig {
    /// Loads and validates a configuration file.
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path)?;
        let config: RunConfig = serde_json::from_slice(&bytes)
            .map_err(|e| Error::InvalidSpec(format!("config parse error: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidSpec(format!(
                "unsupported config schema_version {}, expected {SCHEMA_VERSION}",
                self.schema_version
            )));
        }
        self.kernel.validate()?;
        if self.kernel.dim != self.domain.dim() {
            return Err(Error::InvalidSpec(format!(
                "kernel dimension {} does not match domain dimension {}",
                self.kernel.dim,
                self.domain.dim()
            )));
        }
        if self.expansion.n == 0 {
            return Err(Error::InvalidSpec("expansion.n must be positive".into()));
        }
        if self.ensemble.m == 0 {
            return Err(Error::InvalidSpec("ensemble.m must be positive".into()));
        }
        if let Some(gap) = &self.gap {
            if gap.probes.is_empty() {
                return Err(Error::InvalidSpec("gap.probes must be nonempty".into()));
            }
        }
        Ok(())
    }

    /// Applies command-line overrides on top of the file values.
    pub fn apply_overrides(&mut self, seed: Option<u64>, out: Option<PathBuf>) {
        if let Some(seed) = seed {
            self.innovations.seed = seed;
        }
        if let Some(out) = out {
            self.outputs.dir = out;
        }
    }
}
