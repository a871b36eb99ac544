use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{check_dimension, gaussian_kernel, positive, Learner, GAUSSIAN_PEAK};
use crate::dataset::{Dataset, LabelKind};
use crate::error::{Error, Result};
use crate::mechanism::{Smoothness, TargetFunction};

/// Variance floor for the maximum-likelihood Gaussian fit.
pub const VARIANCE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Likelihood {
    GaussianParametric,
    Kde,
}

/// Two-class naive Bayes score
/// `F(y) = P(+) prod_i p(y_i|+) - P(-) prod_i p(y_i|-)`; predict `+` when
/// `F(y) >= 0`.
#[derive(Debug, Clone)]
pub struct NaiveBayes {
    bandwidth: f64,
    ell: usize,
    likelihood: Likelihood,
}

/// `2 (1/n + (2^ell - 1) / (n sqrt(2 pi) b))`. Sound when `ell == 1` or when
/// every per-axis kernel density is at most one (`b >= 1/sqrt(2 pi)`).
pub fn product_kde_sensitivity(n: usize, ell: usize, bandwidth: f64) -> f64 {
    let n = n as f64;
    let cross_terms = 2f64.powi(ell as i32) - 1.0;
    2.0 * (1.0 / n + cross_terms / (n * (2.0 * PI).sqrt() * bandwidth))
}

impl NaiveBayes {
    pub fn new(bandwidth: f64, ell: usize, likelihood: Likelihood) -> Result<Self> {
        positive("bandwidth", bandwidth)?;
        if ell == 0 {
            return Err(Error::Config("ell must be positive".into()));
        }
        Ok(Self {
            bandwidth,
            ell,
            likelihood,
        })
    }

    /// Sign prediction of a fitted score.
    pub fn predict(score: f64) -> f64 {
        if score >= 0.0 {
            1.0
        } else {
            -1.0
        }
    }
}

impl Learner for NaiveBayes {
    fn ell(&self) -> usize {
        self.ell
    }

    fn smoothness(&self) -> Smoothness {
        Smoothness::Smooth
    }

    fn sensitivity(&self, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(Error::Precondition("empty dataset".into()));
        }
        let ell = self.ell as i32;
        Ok(match self.likelihood {
            Likelihood::Kde => {
                let peak = GAUSSIAN_PEAK / self.bandwidth;
                if self.ell == 1 || peak <= 1.0 {
                    product_kde_sensitivity(n, self.ell, self.bandwidth)
                } else {
                    // per-axis densities reach `peak > 1`: each class term moves
                    // by at most (1 + ell) peak^ell / n
                    2.0 * (1.0 + self.ell as f64) * peak.powi(ell) / n as f64
                }
            }
            // each class term lies in [0, peak^ell]
            Likelihood::GaussianParametric => 2.0 * (2.0 * PI * VARIANCE_FLOOR).powf(-0.5 * ell as f64),
        })
    }

    fn fit(&self, data: &Dataset) -> Result<TargetFunction> {
        check_dimension(data, self.ell)?;
        if data.label_kind() != LabelKind::Sign {
            return Err(Error::Precondition("naive Bayes needs sign labels".into()));
        }
        let n = data.len() as f64;
        let split = |sign: f64| -> Vec<Vec<f64>> {
            data.records()
                .iter()
                .filter(|r| r.label_or_zero() == sign)
                .map(|r| r.features.clone())
                .collect()
        };
        let pos = split(1.0);
        let neg = split(-1.0);
        if pos.is_empty() || neg.is_empty() {
            return Err(Error::Degenerate("naive Bayes needs both classes present".into()));
        }
        let pos = ClassModel::fit(&pos, n, self.likelihood, self.bandwidth);
        let neg = ClassModel::fit(&neg, n, self.likelihood, self.bandwidth);
        TargetFunction::new(self.ell, self.sensitivity(data.len())?, Smoothness::Smooth, move |y| {
            pos.score(y) - neg.score(y)
        })
    }
}

enum AxisModel {
    Kde(Vec<Vec<f64>>),
    Gaussian(Vec<(f64, f64)>),
}

struct ClassModel {
    prior: f64,
    axes: AxisModel,
    bandwidth: f64,
}

impl ClassModel {
    fn fit(points: &[Vec<f64>], n: f64, likelihood: Likelihood, bandwidth: f64) -> Self {
        let m = points.len() as f64;
        let ell = points[0].len();
        let column = |i: usize| points.iter().map(|p| p[i]).collect::<Vec<f64>>();
        let axes = match likelihood {
            Likelihood::Kde => AxisModel::Kde((0..ell).map(column).collect()),
            Likelihood::GaussianParametric => AxisModel::Gaussian(
                (0..ell)
                    .map(|i| {
                        let xs = column(i);
                        let mean = xs.iter().sum::<f64>() / m;
                        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / m;
                        (mean, var.max(VARIANCE_FLOOR))
                    })
                    .collect(),
            ),
        };
        Self {
            prior: m / n,
            axes,
            bandwidth,
        }
    }

    /// `P(l) * prod_i p(y_i | l)`.
    fn score(&self, y: &[f64]) -> f64 {
        let likelihood: f64 = match &self.axes {
            AxisModel::Kde(columns) => columns
                .iter()
                .zip(y)
                .map(|(xs, yi)| {
                    xs.iter().map(|x| gaussian_kernel((yi - x) / self.bandwidth)).sum::<f64>()
                        / (xs.len() as f64 * self.bandwidth)
                })
                .product(),
            AxisModel::Gaussian(params) => params
                .iter()
                .zip(y)
                .map(|(&(mean, var), yi)| (-(yi - mean).powi(2) / (2.0 * var)).exp() / (2.0 * PI * var).sqrt())
                .product(),
        };
        self.prior * likelihood
    }
}
