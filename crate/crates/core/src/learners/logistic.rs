use serde::{Deserialize, Serialize};

use super::erm::{sigmoid, softplus};
use super::linalg::dot;
use super::{check_dimension, positive, Learner};
use crate::dataset::{Dataset, LabelKind};
use crate::error::{Error, Result};
use crate::mechanism::{Smoothness, TargetFunction};

const GRADIENT_TOLERANCE: f64 = 1e-9;
const MAX_ITERATIONS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogisticOutput {
    /// `<w, y>`
    Margin,
    /// `1 / (1 + exp(-<w, y>))`
    Sigmoid,
}

/// Linear logistic regression minimizing
/// `(C/n) sum_i log(1 + exp(-l_i <w, d_i>)) + ||w||^2 / 2`.
#[derive(Debug, Clone)]
pub struct LogisticRegression {
    c: f64,
    ell: usize,
    output: LogisticOutput,
}

impl LogisticRegression {
    pub fn new(c: f64, ell: usize, output: LogisticOutput) -> Result<Self> {
        positive("C", c)?;
        if ell == 0 {
            return Err(Error::Config("ell must be positive".into()));
        }
        Ok(Self { c, ell, output })
    }

    /// Minimizer `w*` of the regularized log-loss, by full-gradient descent.
    pub fn train(&self, data: &Dataset) -> Result<Vec<f64>> {
        check_dimension(data, self.ell)?;
        if data.label_kind() != LabelKind::Sign {
            return Err(Error::Precondition("logistic regression needs sign labels".into()));
        }
        for (i, r) in data.records().iter().enumerate() {
            let norm = dot(&r.features, &r.features).sqrt();
            if norm > 1.0 + 1e-12 {
                return Err(Error::Precondition(format!("record {i}: feature norm {norm} exceeds 1")));
            }
        }
        let n = data.len() as f64;
        let scale = self.c / n;
        let records = data.records();
        let curvature: f64 = records.iter().map(|r| dot(&r.features, &r.features)).sum();
        let step = 1.0 / (1.0 + 0.25 * scale * curvature);
        let mut w = vec![0.0; self.ell];
        let mut grad_norm = f64::INFINITY;
        for _ in 0..MAX_ITERATIONS {
            let mut grad = w.clone();
            for r in records {
                let l = r.label_or_zero();
                let weight = -scale * l * sigmoid(-l * dot(&w, &r.features));
                for (g, x) in grad.iter_mut().zip(&r.features) {
                    *g += weight * x;
                }
            }
            grad_norm = dot(&grad, &grad).sqrt();
            if grad_norm <= GRADIENT_TOLERANCE {
                return Ok(w);
            }
            for (wi, g) in w.iter_mut().zip(&grad) {
                *wi -= step * g;
            }
        }
        Err(Error::Training {
            iterations: MAX_ITERATIONS,
            residual: grad_norm,
        })
    }

    pub fn objective(&self, data: &Dataset, w: &[f64]) -> f64 {
        let risk: f64 = data
            .records()
            .iter()
            .map(|r| softplus(-r.label_or_zero() * dot(w, &r.features)))
            .sum();
        self.c / data.len() as f64 * risk + 0.5 * dot(w, w)
    }
}

impl Learner for LogisticRegression {
    fn ell(&self) -> usize {
        self.ell
    }

    fn smoothness(&self) -> Smoothness {
        match self.output {
            LogisticOutput::Margin => Smoothness::Linear,
            LogisticOutput::Sigmoid => Smoothness::Smooth,
        }
    }

    /// Neighbouring minimizers satisfy `||w - w'|| <= 2C/n` and `||y|| <= sqrt(ell)`.
    fn sensitivity(&self, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(Error::Precondition("empty dataset".into()));
        }
        let margin = 2.0 * self.c * (self.ell as f64).sqrt() / n as f64;
        Ok(match self.output {
            LogisticOutput::Margin => margin,
            LogisticOutput::Sigmoid => margin / 4.0,
        })
    }

    fn fit(&self, data: &Dataset) -> Result<TargetFunction> {
        let w = self.train(data)?;
        let output = self.output;
        TargetFunction::new(self.ell, self.sensitivity(data.len())?, self.smoothness(), move |y| {
            let m = dot(&w, y);
            match output {
                LogisticOutput::Margin => m,
                LogisticOutput::Sigmoid => sigmoid(m),
            }
        })
    }
}
