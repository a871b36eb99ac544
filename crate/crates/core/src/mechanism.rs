//! The Bernstein mechanism: Laplace perturbation of lattice evaluations and
//! evaluation of the released synopsis.

use std::fmt;
use std::sync::Arc;

use rand::distr::{Distribution, Open01};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::basis::{evaluate_tensor, BasisParams, BasisTable, CoefficientField, Limits};
use crate::error::{Error, Result};

/// `(epsilon, delta)`; `delta == 0` means pure differential privacy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrivacyBudget {
    pub epsilon: f64,
    pub delta: f64,
}

impl PrivacyBudget {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::Budget(format!("epsilon must be positive and finite, got {epsilon}")));
        }
        if !(0.0..1.0).contains(&delta) {
            return Err(Error::Budget(format!("delta must lie in [0, 1), got {delta}")));
        }
        Ok(Self { epsilon, delta })
    }

    pub fn pure(epsilon: f64) -> Result<Self> {
        Self::new(epsilon, 0.0)
    }

    pub fn is_pure(&self) -> bool {
        self.delta == 0.0
    }
}

/// `(alpha, beta)` accuracy request: error at most `alpha` with probability
/// at least `1 - beta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccuracyTarget {
    pub beta: f64,
    pub alpha: Option<f64>,
}

impl AccuracyTarget {
    pub fn new(beta: f64, alpha: Option<f64>) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::Domain(format!("beta must lie in (0, 1), got {beta}")));
        }
        Ok(Self { beta, alpha })
    }
}

/// Regularity class of the released function family, which drives the
/// cover-size rule and the predicted error exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "lowercase")]
pub enum Smoothness {
    /// `(2h, T)`-smooth for the iteration order in use.
    Smooth,
    /// `(gamma, L)`-Hölder continuous.
    Hoelder { gamma: f64 },
    Linear,
}

type Evaluator = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// A query function already bound to its private dataset, paired with a
/// public sensitivity bound.
#[derive(Clone)]
pub struct TargetFunction {
    ell: usize,
    sensitivity: f64,
    smoothness: Smoothness,
    evaluator: Arc<Evaluator>,
}

impl fmt::Debug for TargetFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TargetFunction")
            .field("ell", &self.ell)
            .field("sensitivity", &self.sensitivity)
            .field("smoothness", &self.smoothness)
            .finish_non_exhaustive()
    }
}

impl TargetFunction {
    pub fn new<F>(ell: usize, sensitivity: f64, smoothness: Smoothness, evaluator: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        if ell == 0 {
            return Err(Error::Domain("target dimension must be positive".into()));
        }
        if !(sensitivity >= 0.0 && sensitivity.is_finite()) {
            return Err(Error::Domain(format!("sensitivity must be finite and >= 0, got {sensitivity}")));
        }
        Ok(Self {
            ell,
            sensitivity,
            smoothness,
            evaluator: Arc::new(evaluator),
        })
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn sensitivity(&self) -> f64 {
        self.sensitivity
    }

    pub fn smoothness(&self) -> Smoothness {
        self.smoothness
    }

    pub fn evaluate(&self, y: &[f64]) -> f64 {
        (self.evaluator)(y)
    }

    /// Same evaluator with a different declared sensitivity.
    pub fn with_sensitivity(&self, sensitivity: f64) -> Result<Self> {
        if !(sensitivity >= 0.0 && sensitivity.is_finite()) {
            return Err(Error::Domain(format!("sensitivity must be finite and >= 0, got {sensitivity}")));
        }
        Ok(Self {
            sensitivity,
            ..self.clone()
        })
    }
}

fn check_scale_inputs(sensitivity: f64, epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Budget(format!("epsilon must be positive and finite, got {epsilon}")));
    }
    if !(sensitivity >= 0.0 && sensitivity.is_finite()) {
        return Err(Error::Domain(format!("sensitivity must be finite and >= 0, got {sensitivity}")));
    }
    Ok(())
}

fn lattice_count(k: usize, ell: usize) -> f64 {
    (k as f64 + 1.0).powi(ell as i32)
}

/// Pure-DP perturbation scale `S (k+1)^ell / epsilon`.
pub fn laplace_scale(sensitivity: f64, k: usize, ell: usize, epsilon: f64) -> Result<f64> {
    check_scale_inputs(sensitivity, epsilon)?;
    Ok(sensitivity * lattice_count(k, ell) / epsilon)
}

/// Approximate-DP scale `2 S sqrt(2 (k+1)^ell ln(1/delta)) / epsilon`.
pub fn laplace_scale_approx(sensitivity: f64, k: usize, ell: usize, epsilon: f64, delta: f64) -> Result<f64> {
    check_scale_inputs(sensitivity, epsilon)?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Budget(format!("delta must lie in (0, 1), got {delta}")));
    }
    Ok(2.0 * sensitivity * (2.0 * lattice_count(k, ell) * (1.0 / delta).ln()).sqrt() / epsilon)
}

/// Scale for the recorded budget: the pure formula when `delta == 0`.
pub fn scale_for_budget(sensitivity: f64, k: usize, ell: usize, budget: &PrivacyBudget) -> Result<f64> {
    if budget.is_pure() {
        laplace_scale(sensitivity, k, ell, budget.epsilon)
    } else {
        laplace_scale_approx(sensitivity, k, ell, budget.epsilon, budget.delta)
    }
}

/// One draw from `Lap(scale)` by inverse CDF: `u` uniform on `(-1/2, 1/2)`,
/// `-scale * sign(u) * ln(1 - 2|u|)`.
pub fn sample_laplace<R: Rng + ?Sized>(scale: f64, rng: &mut R) -> Result<f64> {
    if !(scale >= 0.0 && scale.is_finite()) {
        return Err(Error::Domain(format!("Laplace scale must be finite and >= 0, got {scale}")));
    }
    if scale == 0.0 {
        return Ok(0.0);
    }
    let r: f64 = Open01.sample(rng);
    let u = r - 0.5;
    if u == 0.0 {
        return Ok(0.0);
    }
    Ok(-scale * u.signum() * (1.0 - 2.0 * u.abs()).ln())
}

/// The generator behind every noise draw for a given seed.
pub fn noise_rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Cover size balancing approximation error against noise, floored and
/// clamped to at least 1.
pub fn choose_k(target: &TargetFunction, h: usize, epsilon: f64, beta: f64) -> Result<usize> {
    choose_k_for(target.smoothness(), target.sensitivity(), target.ell(), h, epsilon, beta)
}

pub fn choose_k_for(
    smoothness: Smoothness,
    sensitivity: f64,
    ell: usize,
    h: usize,
    epsilon: f64,
    beta: f64,
) -> Result<usize> {
    if smoothness == Smoothness::Linear {
        return Ok(1);
    }
    check_scale_inputs(sensitivity, epsilon)?;
    AccuracyTarget::new(beta, None)?;
    if sensitivity == 0.0 {
        return Err(Error::Degenerate("zero sensitivity: every cover size is admissible".into()));
    }
    let ratio = epsilon / (sensitivity * (1.0 / beta).ln());
    let exponent = match smoothness {
        Smoothness::Smooth => {
            if h == 0 {
                return Err(Error::Domain("iteration order h must be positive".into()));
            }
            1.0 / (h + ell) as f64
        }
        Smoothness::Hoelder { gamma } => {
            check_gamma(gamma)?;
            2.0 / (gamma + 2.0 * ell as f64)
        }
        Smoothness::Linear => unreachable!(),
    };
    let k = ratio.powf(exponent).floor();
    let cap = Limits::default().max_k as f64;
    Ok(k.clamp(1.0, cap) as usize)
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma <= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("Hoelder exponent must lie in (0, 1], got {gamma}")))
    }
}

/// Dominant term of the accuracy guarantee with unit constant. Only an
/// order-of-magnitude indication: the hidden constants are unknown.
pub fn predicted_error_bound(
    smoothness: Smoothness,
    sensitivity: f64,
    h: usize,
    ell: usize,
    epsilon: f64,
    beta: f64,
) -> Result<f64> {
    check_scale_inputs(sensitivity, epsilon)?;
    AccuracyTarget::new(beta, None)?;
    let base = sensitivity * (1.0 / beta).ln() / epsilon;
    let exponent = match smoothness {
        Smoothness::Smooth => h as f64 / (ell + h) as f64,
        Smoothness::Hoelder { gamma } => {
            check_gamma(gamma)?;
            gamma / (2.0 * ell as f64 + gamma)
        }
        Smoothness::Linear => 1.0,
    };
    Ok(base.powf(exponent))
}

/// The private release: perturbed lattice evaluations plus metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Synopsis {
    pub params: BasisParams,
    pub noisy_values: CoefficientField,
    pub lambda: f64,
    pub budget: PrivacyBudget,
    pub sensitivity: f64,
    pub rng_seed: u64,
}

impl Synopsis {
    /// Reassembles a synopsis, checking that `lambda` matches the scale
    /// formula for the recorded budget and sensitivity.
    pub fn from_parts(
        params: BasisParams,
        values: Vec<f64>,
        lambda: f64,
        budget: PrivacyBudget,
        sensitivity: f64,
        rng_seed: u64,
    ) -> Result<Self> {
        params.validate(&Limits::default())?;
        let noisy_values = CoefficientField::new(params.lattice(), values)?;
        let expected = scale_for_budget(sensitivity, params.k, params.ell, &budget)?;
        if (expected - lambda).abs() > 1e-12 * expected.abs().max(1.0) {
            return Err(Error::Config(format!(
                "recorded lambda {lambda} disagrees with scale formula value {expected}"
            )));
        }
        Ok(Self {
            params,
            noisy_values,
            lambda,
            budget,
            sensitivity,
            rng_seed,
        })
    }

    pub fn evaluate(&self, table: &BasisTable, y: &[f64]) -> Result<f64> {
        evaluate_synopsis(self, table, y)
    }

    pub fn ell(&self) -> usize {
        self.params.ell
    }
}

/// Adds i.i.d. `Lap(lambda)` noise to every lattice value, consuming the
/// seeded stream in canonical lattice order.
pub fn perturb(exact: &CoefficientField, lambda: f64, seed: u64) -> Result<CoefficientField> {
    let mut rng = noise_rng(seed);
    let values = exact
        .values()
        .iter()
        .map(|v| sample_laplace(lambda, &mut rng).map(|z| v + z))
        .collect::<Result<Vec<_>>>()?;
    CoefficientField::new(exact.grid(), values)
}

/// Evaluates the target on the lattice (no noise).
pub fn lattice_values(target: &TargetFunction, params: BasisParams) -> Result<CoefficientField> {
    if target.ell() != params.ell {
        return Err(Error::Shape(format!(
            "target is {}-dimensional but params request ell={}",
            target.ell(),
            params.ell
        )));
    }
    crate::basis::approximate(|y| target.evaluate(y), params)
}

/// Releases `target` under `budget`. The returned synopsis holds no
/// reference to the dataset behind the target.
pub fn sanitize(target: &TargetFunction, params: BasisParams, budget: PrivacyBudget, seed: u64) -> Result<Synopsis> {
    let lambda = scale_for_budget(target.sensitivity(), params.k, params.ell, &budget)?;
    if target.sensitivity() == 0.0 {
        log::warn!("target declares zero sensitivity; releasing lattice values without noise");
    }
    let exact = lattice_values(target, params)?;
    let noisy_values = perturb(&exact, lambda, seed)?;
    Ok(Synopsis {
        params,
        noisy_values,
        lambda,
        budget,
        sensitivity: target.sensitivity(),
        rng_seed: seed,
    })
}

fn check_table(syn: &Synopsis, table: &BasisTable) -> Result<()> {
    if table.params() != syn.params {
        return Err(Error::Shape(format!(
            "basis table built for {:?} but synopsis uses {:?}",
            table.params(),
            syn.params
        )));
    }
    Ok(())
}

/// Iterated Bernstein polynomial of the noisy lattice values at `y`.
pub fn evaluate_synopsis(syn: &Synopsis, table: &BasisTable, y: &[f64]) -> Result<f64> {
    check_table(syn, table)?;
    evaluate_tensor(&syn.noisy_values, table, y)
}

/// Index of the lattice node nearest to `y` along one axis; ties go to the
/// smaller index.
pub fn nearest_node(y: f64, k: usize) -> usize {
    let scaled = y * k as f64;
    ((scaled - 0.5).ceil().max(0.0) as usize).min(k)
}

/// Piecewise-constant comparison method: the noisy value at the lattice
/// point nearest to `y` in the sup norm.
pub fn baseline_evaluate(raw: &Synopsis, y: &[f64]) -> Result<f64> {
    let grid = raw.noisy_values.grid();
    if y.len() != grid.ell {
        return Err(Error::Shape(format!("query has {} coordinates, expected {}", y.len(), grid.ell)));
    }
    let mut nu = Vec::with_capacity(y.len());
    for &c in y {
        if !(0.0..=1.0).contains(&c) {
            return Err(Error::Domain(format!("query coordinate {c} outside [0, 1]")));
        }
        nu.push(nearest_node(c, grid.k));
    }
    Ok(raw.noisy_values.values()[grid.flat_index(&nu)])
}
