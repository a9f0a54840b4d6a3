//! JSON experiment configs. Every config carries a `schema` tag and unknown
//! fields are rejected.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use decoupling_core::channel::BuiltinParams;
use decoupling_core::coding::SubspaceMode;
use decoupling_core::{CMatrix, Channel, ChannelDocument, DensityOperator, SeededSource, TensorSpace, C64};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub const DECOUPLE_SCHEMA: &str = "decoupling-lab/decouple/v1";
pub const CODE_SCHEMA: &str = "decoupling-lab/code/v1";
pub const CAPACITY_SCHEMA: &str = "decoupling-lab/capacity/v1";
pub const TYPICALITY_SCHEMA: &str = "decoupling-lab/typicality/v1";

/// A channel, either built in, random, inline Kraus operators or a file
/// holding a channel document.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelSpec {
    Builtin {
        name: String,
        #[serde(default)]
        d: Option<usize>,
        #[serde(default)]
        p: Option<f64>,
        #[serde(default)]
        gamma: Option<f64>,
    },
    Random {
        in_dim: usize,
        out_dim: usize,
        kraus_count: usize,
        seed: u64,
    },
    Kraus(ChannelDocument),
    File(PathBuf),
}

impl ChannelSpec {
    pub fn build(&self, base: &Path) -> Result<Channel> {
        Ok(match self {
            ChannelSpec::Builtin { name, d, p, gamma } => Channel::builtin(
                name,
                &BuiltinParams {
                    d: *d,
                    p: *p,
                    gamma: *gamma,
                },
            )?,
            ChannelSpec::Random {
                in_dim,
                out_dim,
                kraus_count,
                seed,
            } => Channel::random(*in_dim, *out_dim, *kraus_count, &mut SeededSource::new(*seed).rng())?,
            ChannelSpec::Kraus(doc) => Channel::from_document(doc)?,
            ChannelSpec::File(path) => {
                let path = base.join(path);
                let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
                Channel::from_json(&text).with_context(|| format!("parsing {}", path.display()))?
            }
        })
    }
}

/// Input state `φ^{A'}`.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PhiSpec {
    #[default]
    MaximallyMixed,
    Diagonal(Vec<f64>),
    /// Rows of `[re, im]` pairs.
    Matrix(Vec<Vec<[f64; 2]>>),
}

impl PhiSpec {
    pub fn build(&self, d: usize) -> Result<DensityOperator> {
        let space = TensorSpace::single("A'", d)?;
        let m = match self {
            PhiSpec::MaximallyMixed => return Ok(DensityOperator::maximally_mixed(space)),
            PhiSpec::Diagonal(p) => {
                if p.len() != d {
                    bail!("phi: {} diagonal entries for a {d}-dimensional input", p.len());
                }
                CMatrix::from_diagonal(&decoupling_core::CVector::from_iterator(d, p.iter().map(|&x| C64::new(x, 0.0))))
            }
            PhiSpec::Matrix(rows) => {
                if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                    bail!("phi: matrix must be {d}x{d}");
                }
                CMatrix::from_fn(d, d, |i, j| C64::new(rows[i][j][0], rows[i][j][1]))
            }
        };
        Ok(DensityOperator::new(space, m)?)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InstanceSource {
    /// `Ψ^{SE}` is the Choi state of the complementary channel.
    Channel(ChannelSpec),
    /// `Ψ^{SE}` is the Choi state of a random channel `S' → E`.
    Random { s_dim: usize, e_dim: usize, kraus_count: usize },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceConfig {
    pub id: String,
    pub source: InstanceSource,
    #[serde(rename = "R_dim")]
    pub r_dim: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricName {
    HsSquared,
    Trace,
    TraceSquared,
}

fn default_metrics() -> Vec<MetricName> {
    vec![MetricName::HsSquared, MetricName::Trace]
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoupleConfig {
    pub schema: String,
    pub seed: u64,
    pub n_samples: usize,
    #[serde(default = "default_metrics")]
    pub metrics: Vec<MetricName>,
    /// Also report the finite Weyl-operator average.
    #[serde(default = "yes")]
    pub weyl: bool,
    pub instances: Vec<InstanceConfig>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeConfig {
    pub schema: String,
    pub channel: ChannelSpec,
    #[serde(default)]
    pub phi: PhiSpec,
    pub n: usize,
    #[serde(rename = "R_dim")]
    pub r_dim: usize,
    pub trials: usize,
    #[serde(default = "default_delta")]
    pub delta: f64,
    pub seed: u64,
    #[serde(default)]
    pub subspace_mode: SubspaceMode,
}

fn default_delta() -> f64 {
    0.3
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacityConfig {
    pub schema: String,
    pub channel: ChannelSpec,
    /// Number of channel copies.
    #[serde(default = "one")]
    pub n: usize,
    pub restarts: usize,
    pub iterations: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TypicalityConfig {
    pub schema: String,
    pub channel: ChannelSpec,
    #[serde(default)]
    pub phi: PhiSpec,
    pub n: usize,
    pub delta: f64,
}

/// Reads and validates a config; errors carry the file name, line and column.
pub fn load<T: DeserializeOwned>(path: &Path, schema: &str, get_schema: impl Fn(&T) -> &str) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let cfg: T = serde_json::from_str(&text).map_err(|e| {
        anyhow::anyhow!("{}:{}:{}: {}", path.display(), e.line(), e.column(), e)
    })?;
    let found = get_schema(&cfg);
    if found != schema {
        bail!("{}: field `schema`: expected \"{schema}\", found \"{found}\"", path.display());
    }
    Ok(cfg)
}

pub fn validate_id(id: &str) -> Result<()> {
    if id.is_empty() || id.contains([',', '"', '\n', '\r']) {
        bail!("instance id {id:?} must be non-empty and free of commas, quotes and newlines");
    }
    Ok(())
}
