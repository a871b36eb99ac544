//! Kernel regularized empirical risk minimization
//!
//! ```text
//! min_f  (C/n) sum_i L(l_i, f(d_i)) + ||f||^2 / 2
//! ```
//!
//! over the RKHS of `K`. The minimizer is `f = sum_i beta_i K(., d_i)` with
//! `beta_i = alpha_i l_i`. Hinge loss is solved by dual coordinate ascent on
//! the box-constrained SVM dual; logistic and square loss by functional
//! gradient descent on `beta`.

use serde::{Deserialize, Serialize};

use super::linalg::{cholesky, dot, mat_vec, max_eigenvalue_bound};
use super::{check_dimension, positive, Learner};
use crate::dataset::{Dataset, LabelKind};
use crate::error::{Error, Result};
use crate::mechanism::{Smoothness, TargetFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Loss {
    Hinge,
    Logistic,
    Square,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Kernel {
    /// `exp(-||x - y||^2 / (2 sigma^2))`
    Rbf { sigma: f64 },
    Linear,
}

impl Kernel {
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            Self::Rbf { sigma } => {
                let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                (-d2 / (2.0 * sigma * sigma)).exp()
            }
            Self::Linear => dot(x, y),
        }
    }

    /// `sup_{y in [0,1]^ell} K(y, y)`.
    pub fn sup_diagonal(&self, ell: usize) -> f64 {
        match self {
            Self::Rbf { .. } => 1.0,
            Self::Linear => ell as f64,
        }
    }

    fn smoothness(&self) -> Smoothness {
        match self {
            Self::Rbf { .. } => Smoothness::Smooth,
            Self::Linear => Smoothness::Linear,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErmConfig {
    /// Regularization trade-off `C`.
    pub c: f64,
    pub loss: Loss,
    pub kernel: Kernel,
    /// Public bound on `|l|`, used for the square-loss Lipschitz constant.
    pub label_bound: f64,
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl Default for ErmConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            loss: Loss::Hinge,
            kernel: Kernel::Rbf { sigma: 1.0 },
            label_bound: 1.0,
            max_iterations: 100_000,
            tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Erm {
    config: ErmConfig,
    ell: usize,
}

/// Representer coefficients of a trained predictor.
#[derive(Debug, Clone)]
pub struct KernelPredictor {
    pub centers: Vec<Vec<f64>>,
    pub beta: Vec<f64>,
    pub kernel: Kernel,
}

impl KernelPredictor {
    pub fn predict(&self, y: &[f64]) -> f64 {
        self.centers
            .iter()
            .zip(&self.beta)
            .map(|(d, b)| b * self.kernel.eval(y, d))
            .sum()
    }
}

impl Erm {
    pub fn new(config: ErmConfig, ell: usize) -> Result<Self> {
        positive("C", config.c)?;
        positive("label bound", config.label_bound)?;
        positive("tolerance", config.tolerance)?;
        if let Kernel::Rbf { sigma } = config.kernel {
            positive("sigma", sigma)?;
        }
        if ell == 0 {
            return Err(Error::Config("ell must be positive".into()));
        }
        Ok(Self { config, ell })
    }

    /// Lipschitz constant `M` of the loss in its prediction argument over
    /// the reachable prediction range.
    pub fn lipschitz(&self) -> f64 {
        match self.config.loss {
            Loss::Hinge | Loss::Logistic => 1.0,
            Loss::Square => {
                let b = self.config.label_bound;
                let kappa = self.config.kernel.sup_diagonal(self.ell).sqrt();
                // ||f|| <= sqrt(2 C L(l, 0)) and L(l, 0) = l^2 <= b^2
                let sup_f = kappa * (2.0 * self.config.c * b * b).sqrt();
                2.0 * (b + sup_f)
            }
        }
    }

    pub fn train(&self, data: &Dataset) -> Result<KernelPredictor> {
        check_dimension(data, self.ell)?;
        let labels: Vec<f64> = data.records().iter().map(|r| r.label_or_zero()).collect();
        match (self.config.loss, data.label_kind()) {
            (Loss::Hinge | Loss::Logistic, LabelKind::Sign) => {}
            (Loss::Square, LabelKind::Real | LabelKind::Sign) => {
                if let Some(l) = labels.iter().find(|l| l.abs() > self.config.label_bound) {
                    return Err(Error::Precondition(format!(
                        "label {l} exceeds the declared bound {}",
                        self.config.label_bound
                    )));
                }
            }
            (loss, kind) => {
                return Err(Error::Precondition(format!("{loss:?} loss cannot use {kind:?} labels")));
            }
        }
        let centers: Vec<Vec<f64>> = data.records().iter().map(|r| r.features.clone()).collect();
        let n = centers.len();
        let mut gram = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = self.config.kernel.eval(&centers[i], &centers[j]);
                gram[i * n + j] = v;
                gram[j * n + i] = v;
            }
        }
        let mut jittered = gram.clone();
        for i in 0..n {
            jittered[i * n + i] += 1e-8;
        }
        if cholesky(&jittered, n).is_none() {
            return Err(Error::Config("kernel Gram matrix is not positive semi-definite".into()));
        }
        let beta = match self.config.loss {
            Loss::Hinge => self.dual_coordinate_ascent(&gram, &labels)?,
            Loss::Logistic | Loss::Square => self.gradient_descent(&gram, &labels)?,
        };
        Ok(KernelPredictor {
            centers,
            beta,
            kernel: self.config.kernel,
        })
    }

    /// `(C/n) sum L(l_i, f(d_i)) + ||f||^2 / 2` for `f = sum beta_i K(., d_i)`.
    pub fn objective(&self, gram: &[f64], labels: &[f64], beta: &[f64]) -> f64 {
        let n = labels.len();
        let f = mat_vec(gram, n, beta);
        let risk: f64 = labels.iter().zip(&f).map(|(&l, &fi)| self.loss(l, fi)).sum();
        self.config.c / n as f64 * risk + 0.5 * dot(beta, &f)
    }

    fn loss(&self, l: f64, f: f64) -> f64 {
        match self.config.loss {
            Loss::Hinge => (1.0 - l * f).max(0.0),
            Loss::Logistic => softplus(-l * f),
            Loss::Square => (l - f) * (l - f),
        }
    }

    fn loss_derivative(&self, l: f64, f: f64) -> f64 {
        match self.config.loss {
            Loss::Hinge => unreachable!("hinge loss is solved in the dual"),
            Loss::Logistic => -l * sigmoid(-l * f),
            Loss::Square => 2.0 * (f - l),
        }
    }

    fn dual_coordinate_ascent(&self, gram: &[f64], labels: &[f64]) -> Result<Vec<f64>> {
        let n = labels.len();
        let upper = self.config.c / n as f64;
        let mut alpha = vec![0.0; n];
        // f_j = sum_i alpha_i l_i K_ij
        let mut f = vec![0.0; n];
        for i in 0..n {
            // a point with K(x,x) = 0 has a zero Gram row, so its dual term is linear
            if gram[i * n + i] <= 0.0 {
                alpha[i] = upper;
            }
        }
        let mut gap = f64::INFINITY;
        for _ in 0..self.config.max_iterations {
            for i in 0..n {
                let kii = gram[i * n + i];
                if kii <= 0.0 {
                    continue;
                }
                let grad = labels[i] * f[i] - 1.0;
                let updated = (alpha[i] - grad / kii).clamp(0.0, upper);
                let delta = updated - alpha[i];
                if delta != 0.0 {
                    alpha[i] = updated;
                    let scale = delta * labels[i];
                    for (fj, kij) in f.iter_mut().zip(&gram[i * n..(i + 1) * n]) {
                        *fj += scale * kij;
                    }
                }
            }
            let beta: Vec<f64> = alpha.iter().zip(labels).map(|(a, l)| a * l).collect();
            let norm2 = dot(&beta, &f);
            let primal = upper * labels.iter().zip(&f).map(|(l, fi)| (1.0 - l * fi).max(0.0)).sum::<f64>() + 0.5 * norm2;
            let dual = alpha.iter().sum::<f64>() - 0.5 * norm2;
            gap = primal - dual;
            if gap <= self.config.tolerance * primal.abs().max(1e-300) || gap <= 1e-15 {
                return Ok(beta);
            }
        }
        Err(Error::Training {
            iterations: self.config.max_iterations,
            residual: gap,
        })
    }

    fn gradient_descent(&self, gram: &[f64], labels: &[f64]) -> Result<Vec<f64>> {
        let n = labels.len();
        let scale = self.config.c / n as f64;
        let curvature = match self.config.loss {
            Loss::Logistic => 0.25,
            _ => 2.0,
        };
        let step = 1.0 / (1.0 + scale * curvature * max_eigenvalue_bound(gram, n));
        let mut beta = vec![0.0; n];
        let mut f = vec![0.0; n];
        let mut residual = f64::INFINITY;
        for _ in 0..self.config.max_iterations {
            // functional gradient expressed in representer coordinates
            let r: Vec<f64> = (0..n)
                .map(|i| scale * self.loss_derivative(labels[i], f[i]) + beta[i])
                .collect();
            let kr = mat_vec(gram, n, &r);
            residual = dot(&r, &kr).max(0.0).sqrt();
            if residual <= self.config.tolerance {
                return Ok(beta);
            }
            for i in 0..n {
                beta[i] -= step * r[i];
                f[i] -= step * kr[i];
            }
        }
        Err(Error::Training {
            iterations: self.config.max_iterations,
            residual,
        })
    }
}

pub(crate) fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

pub(crate) fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

impl Learner for Erm {
    fn ell(&self) -> usize {
        self.ell
    }

    fn smoothness(&self) -> Smoothness {
        self.config.kernel.smoothness()
    }

    /// `2 M C sup K(y,y) / n`: the objective is 1-strongly convex, so one
    /// replaced record moves the minimizer by at most `2 M C sqrt(sup K) / n`
    /// in the RKHS norm.
    fn sensitivity(&self, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(Error::Precondition("empty dataset".into()));
        }
        Ok(2.0 * self.lipschitz() * self.config.c / n as f64 * self.config.kernel.sup_diagonal(self.ell))
    }

    fn fit(&self, data: &Dataset) -> Result<TargetFunction> {
        let predictor = self.train(data)?;
        TargetFunction::new(self.ell, self.sensitivity(data.len())?, self.smoothness(), move |y| {
            predictor.predict(y)
        })
    }
}
