use std::f64::consts::PI;

use super::linalg::{cholesky, forward_substitute, is_symmetric};
use super::{check_dimension, positive, Learner};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::mechanism::{Smoothness, TargetFunction};

/// Gaussian kernel with covariance (bandwidth) matrix `H`.
#[derive(Debug, Clone, PartialEq)]
pub struct KdeConfig {
    ell: usize,
    bandwidth_matrix: Vec<f64>,
}

impl KdeConfig {
    /// `H = b^2 I`.
    pub fn isotropic(bandwidth: f64, ell: usize) -> Result<Self> {
        positive("bandwidth", bandwidth)?;
        let mut h = vec![0.0; ell * ell];
        for i in 0..ell {
            h[i * ell + i] = bandwidth * bandwidth;
        }
        Self::from_matrix(h, ell)
    }

    pub fn from_matrix(bandwidth_matrix: Vec<f64>, ell: usize) -> Result<Self> {
        if ell == 0 || bandwidth_matrix.len() != ell * ell {
            return Err(Error::Config(format!(
                "bandwidth matrix must be {ell}x{ell}, got {} entries",
                bandwidth_matrix.len()
            )));
        }
        if !is_symmetric(&bandwidth_matrix, ell, 1e-12) {
            return Err(Error::Config("bandwidth matrix must be symmetric".into()));
        }
        Ok(Self { ell, bandwidth_matrix })
    }

    pub fn bandwidth_matrix(&self) -> &[f64] {
        &self.bandwidth_matrix
    }
}

#[derive(Debug, Clone)]
pub struct Kde {
    ell: usize,
    chol: Vec<f64>,
    /// `1 / sqrt((2 pi)^ell det H)`, the kernel's maximum.
    peak: f64,
}

impl Kde {
    pub fn new(config: KdeConfig) -> Result<Self> {
        let ell = config.ell;
        let chol = cholesky(&config.bandwidth_matrix, ell)
            .ok_or_else(|| Error::Config("bandwidth matrix is not positive definite".into()))?;
        let sqrt_det: f64 = (0..ell).map(|i| chol[i * ell + i]).product();
        let peak = 1.0 / ((2.0 * PI).powf(ell as f64 / 2.0) * sqrt_det);
        if !(peak.is_finite() && sqrt_det > 0.0) {
            return Err(Error::Config("bandwidth matrix is singular".into()));
        }
        Ok(Self { ell, chol, peak })
    }

    pub fn kernel(&self, u: &[f64]) -> f64 {
        let z = forward_substitute(&self.chol, self.ell, u);
        self.peak * (-0.5 * z.iter().map(|v| v * v).sum::<f64>()).exp()
    }
}

impl Learner for Kde {
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
        Ok(self.peak / n as f64)
    }

    fn fit(&self, data: &Dataset) -> Result<TargetFunction> {
        check_dimension(data, self.ell)?;
        let points: Vec<Vec<f64>> = data.records().iter().map(|r| r.features.clone()).collect();
        let kde = self.clone();
        let n = points.len() as f64;
        TargetFunction::new(self.ell, self.sensitivity(data.len())?, Smoothness::Smooth, move |y| {
            let mut u = vec![0.0; y.len()];
            points
                .iter()
                .map(|d| {
                    for ((ui, yi), di) in u.iter_mut().zip(y).zip(d) {
                        *ui = yi - di;
                    }
                    kde.kernel(&u)
                })
                .sum::<f64>()
                / n
        })
    }
}
