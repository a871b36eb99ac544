//! Synthetic workloads: a one-dimensional Gaussian mixture for density
//! estimation and a two-class Gaussian sample for classification.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, LabelKind, Record};
use crate::error::{Error, Result};
use crate::learners::linalg::cholesky;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub mean: f64,
    pub variance: f64,
    pub weight: f64,
}

/// Density-estimation workload: `N(0.5, 0.02)` and `N(0.75, 0.005)` with
/// weights 0.4 and 0.6 (second parameter is the variance).
pub fn reference_mixture() -> Vec<MixtureComponent> {
    vec![
        MixtureComponent {
            mean: 0.5,
            variance: 0.02,
            weight: 0.4,
        },
        MixtureComponent {
            mean: 0.75,
            variance: 0.005,
            weight: 0.6,
        },
    ]
}

/// One Gaussian class: mean vector and row-major covariance matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianClass {
    pub mean: Vec<f64>,
    pub covariance: Vec<f64>,
}

/// Classification workload: positives around `[0.3, 0.5]` with covariance
/// `0.01 I`, negatives around `[0.6, 0.4]` with covariance
/// `0.01 [1, 0.8; 0.8, 1.5]`.
pub fn reference_two_class() -> [GaussianClass; 2] {
    [
        GaussianClass {
            mean: vec![0.3, 0.5],
            covariance: vec![0.01, 0.0, 0.0, 0.01],
        },
        GaussianClass {
            mean: vec![0.6, 0.4],
            covariance: vec![0.01, 0.008, 0.008, 0.015],
        },
    ]
}

/// `n` i.i.d. draws from the mixture, each coordinate drawn independently
/// from the chosen component and clamped to `[0, 1]`.
pub fn generate_mixture_data(n: usize, components: &[MixtureComponent], seed: u64, ell: usize) -> Result<Dataset> {
    if components.is_empty() {
        return Err(Error::Config("mixture needs at least one component".into()));
    }
    let total: f64 = components.iter().map(|c| c.weight).sum();
    if (total - 1.0).abs() > 1e-9 || components.iter().any(|c| !(c.weight >= 0.0)) {
        return Err(Error::Config(format!("mixture weights must be nonnegative and sum to 1, got {total}")));
    }
    if let Some(c) = components.iter().find(|c| !(c.variance > 0.0 && c.variance.is_finite())) {
        return Err(Error::Config(format!("mixture variance must be positive, got {}", c.variance)));
    }
    let pick = WeightedIndex::new(components.iter().map(|c| c.weight))
        .map_err(|e| Error::Config(format!("mixture weights: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let records = (0..n)
        .map(|_| {
            let c = &components[pick.sample(&mut rng)];
            let sd = c.variance.sqrt();
            let features = (0..ell)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    (c.mean + sd * z).clamp(0.0, 1.0)
                })
                .collect();
            Record::unlabeled(features)
        })
        .collect();
    Dataset::new(ell, LabelKind::None, records)
}

/// `n_per_class` positives from `classes[0]` followed by `n_per_class`
/// negatives from `classes[1]`, clamped to the unit cube.
pub fn generate_two_class_gaussian(n_per_class: usize, classes: &[GaussianClass; 2], seed: u64) -> Result<Dataset> {
    let ell = classes[0].mean.len();
    let mut factors = Vec::with_capacity(2);
    for class in classes {
        if class.mean.len() != ell || class.covariance.len() != ell * ell {
            return Err(Error::Config(format!(
                "class parameters must have dimension {ell} (mean) and {} (covariance)",
                ell * ell
            )));
        }
        let l = cholesky(&class.covariance, ell)
            .ok_or_else(|| Error::Config("class covariance is not positive definite".into()))?;
        factors.push(l);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(2 * n_per_class);
    for ((class, l), label) in classes.iter().zip(&factors).zip([1.0, -1.0]) {
        for _ in 0..n_per_class {
            let z: Vec<f64> = (0..ell).map(|_| StandardNormal.sample(&mut rng)).collect();
            let features = (0..ell)
                .map(|i| {
                    let offset: f64 = (0..=i).map(|j| l[i * ell + j] * z[j]).sum();
                    (class.mean[i] + offset).clamp(0.0, 1.0)
                })
                .collect();
            records.push(Record::labeled(features, label));
        }
    }
    Dataset::new(ell, LabelKind::Sign, records)
}
