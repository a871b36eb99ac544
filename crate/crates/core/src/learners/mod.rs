//! Target functions built from private datasets: each learner knows how to
//! fit itself to a dataset and what its public sensitivity bound is.

mod erm;
mod kde;
pub(crate) mod linalg;
mod logistic;
mod naive_bayes;
mod priestley_chao;

use serde::{Deserialize, Serialize};

pub use erm::{Erm, ErmConfig, Kernel, Loss};
pub use kde::{Kde, KdeConfig};
pub use logistic::{LogisticOutput, LogisticRegression};
pub use naive_bayes::{product_kde_sensitivity, Likelihood, NaiveBayes};
pub use priestley_chao::{PcRegression, PcRegressionConfig};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::mechanism::{Smoothness, TargetFunction};

/// Density of the standard normal at 0.
pub const GAUSSIAN_PEAK: f64 = 0.398_942_280_401_432_7;

pub fn gaussian_kernel(u: f64) -> f64 {
    GAUSSIAN_PEAK * (-0.5 * u * u).exp()
}

pub trait Learner: Send + Sync {
    fn ell(&self) -> usize;

    fn smoothness(&self) -> Smoothness;

    /// Sensitivity bound for datasets of `n` records.
    fn sensitivity(&self, n: usize) -> Result<f64>;

    /// Checks preconditions and trains on `data`.
    fn fit(&self, data: &Dataset) -> Result<TargetFunction>;
}

fn check_dimension(data: &Dataset, ell: usize) -> Result<()> {
    if data.ell() != ell {
        return Err(Error::Shape(format!(
            "dataset has {} features, learner expects {ell}",
            data.ell()
        )));
    }
    Ok(())
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be positive and finite, got {v}")))
    }
}

/// Serializable description of a learner, shared by the CLI and experiment
/// configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "kebab-case")]
pub enum LearnerConfig {
    Kde {
        ell: usize,
        bandwidth: f64,
    },
    PcRegression {
        bandwidth: f64,
        label_bound: f64,
        gap_constant: f64,
    },
    NaiveBayes {
        ell: usize,
        bandwidth: f64,
        #[serde(default = "default_likelihood")]
        likelihood: Likelihood,
    },
    Erm {
        ell: usize,
        c: f64,
        loss: Loss,
        kernel: Kernel,
        #[serde(default = "default_label_bound")]
        label_bound: f64,
    },
    Logistic {
        ell: usize,
        c: f64,
        output: LogisticOutput,
    },
}

fn default_likelihood() -> Likelihood {
    Likelihood::Kde
}

fn default_label_bound() -> f64 {
    1.0
}

impl LearnerConfig {
    pub fn build(&self) -> Result<Box<dyn Learner>> {
        Ok(match self {
            Self::Kde { ell, bandwidth } => Box::new(Kde::new(KdeConfig::isotropic(*bandwidth, *ell)?)?),
            Self::PcRegression {
                bandwidth,
                label_bound,
                gap_constant,
            } => Box::new(PcRegression::new(PcRegressionConfig {
                bandwidth: *bandwidth,
                label_bound: *label_bound,
                gap_constant: *gap_constant,
            })?),
            Self::NaiveBayes {
                ell,
                bandwidth,
                likelihood,
            } => Box::new(NaiveBayes::new(*bandwidth, *ell, *likelihood)?),
            Self::Erm {
                ell,
                c,
                loss,
                kernel,
                label_bound,
            } => Box::new(Erm::new(
                ErmConfig {
                    c: *c,
                    loss: *loss,
                    kernel: *kernel,
                    label_bound: *label_bound,
                    ..ErmConfig::default()
                },
                *ell,
            )?),
            Self::Logistic { ell, c, output } => Box::new(LogisticRegression::new(*c, *ell, *output)?),
        })
    }

    /// Builds a config from a learner id and `key=value` pairs. Dotted keys
    /// address nested tables (`kernel.type=rbf`); `ell` defaults to
    /// `default_ell` when the learner takes one.
    pub fn from_params(id: &str, params: &[(String, String)], default_ell: usize) -> Result<Self> {
        let mut table = toml::Table::new();
        table.insert("id".into(), toml::Value::String(id.into()));
        if id != "pc-regression" {
            table.insert("ell".into(), toml::Value::Integer(default_ell as i64));
        }
        for (key, raw) in params {
            let value = if let Ok(i) = raw.parse::<i64>() {
                toml::Value::Integer(i)
            } else if let Ok(f) = raw.parse::<f64>() {
                toml::Value::Float(f)
            } else {
                toml::Value::String(raw.clone())
            };
            let mut path: Vec<&str> = key.split('.').collect();
            let leaf = path.pop().filter(|k| !k.is_empty()).ok_or_else(|| Error::Config(format!("empty parameter name in {key:?}")))?;
            let mut slot = &mut table;
            for part in path {
                slot = slot
                    .entry(part)
                    .or_insert_with(|| toml::Value::Table(toml::Table::new()))
                    .as_table_mut()
                    .ok_or_else(|| Error::Config(format!("parameter {part:?} is not a table")))?;
            }
            slot.insert(leaf.into(), value);
        }
        table
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(format!("learner {id:?}: {}", e.message())))
    }

    pub fn ell(&self) -> usize {
        match self {
            Self::PcRegression { .. } => 1,
            Self::Kde { ell, .. }
            | Self::NaiveBayes { ell, .. }
            | Self::Erm { ell, .. }
            | Self::Logistic { ell, .. } => *ell,
        }
    }
}
