use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::data::{generate_mixture_data, generate_two_class_gaussian, GaussianClass, MixtureComponent};
use super::derive_seed;
use crate::basis::{contract_on_grid, grid_points, unit_grid, BasisParams, BasisTable, CoefficientField, Limits};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::learners::LearnerConfig;
use crate::mechanism::{choose_k, lattice_values, nearest_node, perturb, scale_for_budget, PrivacyBudget, TargetFunction};

/// Where an experiment's private dataset comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DataSource {
    Mixture {
        n: usize,
        components: Vec<MixtureComponent>,
        seed: u64,
        #[serde(default = "one")]
        ell: usize,
    },
    TwoClassGaussian {
        n_per_class: usize,
        classes: [GaussianClass; 2],
        seed: u64,
    },
    /// A dataset file; relative paths resolve against the spec's directory.
    File { path: PathBuf },
}

fn one() -> usize {
    1
}

impl DataSource {
    pub fn load(&self, base: Option<&Path>) -> Result<Dataset> {
        match self {
            Self::Mixture {
                n,
                components,
                seed,
                ell,
            } => generate_mixture_data(*n, components, *seed, *ell),
            Self::TwoClassGaussian {
                n_per_class,
                classes,
                seed,
            } => generate_two_class_gaussian(*n_per_class, classes, *seed),
            Self::File { path } => {
                let full = match base {
                    Some(dir) if path.is_relative() => dir.join(path),
                    _ => path.clone(),
                };
                Dataset::parse(&std::fs::read_to_string(full)?)
            }
        }
    }
}

/// Cover size: a fixed `k`, or `"auto"` to use the balancing rule per cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawCoverSize", into = "RawCoverSize")]
pub enum CoverSize {
    Fixed(usize),
    Auto,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawCoverSize {
    Number(usize),
    Text(String),
}

impl TryFrom<RawCoverSize> for CoverSize {
    type Error = Error;

    fn try_from(raw: RawCoverSize) -> Result<Self> {
        match raw {
            RawCoverSize::Number(k) => Ok(Self::Fixed(k)),
            RawCoverSize::Text(s) => s.parse(),
        }
    }
}

impl From<CoverSize> for RawCoverSize {
    fn from(k: CoverSize) -> Self {
        match k {
            CoverSize::Fixed(k) => Self::Number(k),
            CoverSize::Auto => Self::Text("auto".into()),
        }
    }
}

impl FromStr for CoverSize {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Self::Auto);
        }
        s.parse::<usize>()
            .map(Self::Fixed)
            .map_err(|_| Error::Config(format!("k must be a positive integer or \"auto\", got {s:?}")))
    }
}

impl fmt::Display for CoverSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Fixed(k) => write!(f, "{k}"),
            Self::Auto => f.write_str("auto"),
        }
    }
}

fn default_beta() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub learner: LearnerConfig,
    pub data: DataSource,
    pub epsilon_grid: Vec<f64>,
    #[serde(default)]
    pub delta: f64,
    pub h_grid: Vec<usize>,
    pub k: CoverSize,
    pub repeats: usize,
    #[serde(default = "default_beta")]
    pub beta: f64,
    /// Points per axis of the evaluation grid; defaults to
    /// `max(201, 10k + 1)`.
    #[serde(default)]
    pub grid_resolution: Option<usize>,
    /// Replaces the learner's declared sensitivity.
    #[serde(default)]
    pub sensitivity_override: Option<f64>,
    pub seed: u64,
}

pub fn default_grid_resolution(k: usize) -> usize {
    (10 * k + 1).max(201)
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.repeats == 0 {
            return bad("repeats must be at least 1".into());
        }
        if self.epsilon_grid.is_empty() {
            return bad("epsilon grid is empty".into());
        }
        if self.h_grid.is_empty() {
            return bad("h grid is empty".into());
        }
        for &eps in &self.epsilon_grid {
            PrivacyBudget::new(eps, self.delta)?;
        }
        if let Some(&h) = self.h_grid.iter().find(|&&h| h == 0 || h > Limits::default().max_h) {
            return bad(format!("h must lie in 1..={}, got {h}", Limits::default().max_h));
        }
        if self.k == CoverSize::Fixed(0) {
            return bad("k must be at least 1".into());
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return bad(format!("beta must lie in (0, 1), got {}", self.beta));
        }
        if let Some(m) = self.grid_resolution.filter(|&m| m < 2) {
            return bad(format!("grid resolution must be at least 2, got {m}"));
        }
        if let Some(s) = self.sensitivity_override.filter(|s| !(*s >= 0.0 && s.is_finite())) {
            return bad(format!("sensitivity override must be finite and >= 0, got {s}"));
        }
        let ell = self.learner.ell();
        if ell == 0 || ell > 2 {
            return bad(format!("experiments support ell in 1..=2, got {ell}"));
        }
        Ok(())
    }

    pub fn cell_count(&self) -> usize {
        self.epsilon_grid.len() * self.h_grid.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Mechanism,
    Baseline,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Self::Mechanism => "mechanism",
            Self::Baseline => "baseline",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CellOutcome {
    Completed,
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub index: usize,
    pub epsilon: f64,
    pub h: usize,
    pub k: Option<usize>,
    pub lambda: Option<f64>,
    pub grid: Option<usize>,
    /// Sup error of the noiseless iterated Bernstein approximation.
    pub approximation_error: Option<f64>,
    pub outcome: CellOutcome,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepeatRecord {
    pub cell: usize,
    pub repeat: usize,
    pub seed: u64,
    pub mechanism: f64,
    pub baseline: f64,
    /// Sup over the grid of the noise polynomial alone.
    pub noise: f64,
}

impl RepeatRecord {
    pub fn error(&self, method: Method) -> f64 {
        match method {
            Method::Mechanism => self.mechanism,
            Method::Baseline => self.baseline,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub beta: f64,
    pub cells: Vec<CellSummary>,
    pub records: Vec<RepeatRecord>,
}

impl ExperimentReport {
    pub fn records_for(&self, cell: usize) -> impl Iterator<Item = &RepeatRecord> {
        self.records.iter().filter(move |r| r.cell == cell)
    }

    pub fn failed_cells(&self) -> Vec<&CellSummary> {
        self.cells
            .iter()
            .filter(|c| matches!(c.outcome, CellOutcome::Failed(_)))
            .collect()
    }

    fn errors(&self, cell: usize, method: Method) -> Vec<f64> {
        self.records_for(cell).map(|r| r.error(method)).collect()
    }

    pub fn mean(&self, cell: usize, method: Method) -> Option<f64> {
        let e = self.errors(cell, method);
        (!e.is_empty()).then(|| e.iter().sum::<f64>() / e.len() as f64)
    }

    pub fn mean_noise(&self, cell: usize) -> Option<f64> {
        let e: Vec<f64> = self.records_for(cell).map(|r| r.noise).collect();
        (!e.is_empty()).then(|| e.iter().sum::<f64>() / e.len() as f64)
    }

    /// Empirical `(1 - beta)` quantile of the sup error.
    pub fn quantile(&self, cell: usize, method: Method) -> Option<f64> {
        let mut e = self.errors(cell, method);
        if e.is_empty() {
            return None;
        }
        e.sort_by(f64::total_cmp);
        let rank = ((1.0 - self.beta) * e.len() as f64).ceil() as usize;
        Some(e[rank.clamp(1, e.len()) - 1])
    }

    /// One row per cell, repeat and method, then mean and quantile rows per
    /// cell and method.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("row,cell,epsilon,h,k,lambda,repeat,method,sup_error,status\n");
        let opt = |v: Option<String>| v.unwrap_or_default();
        for cell in &self.cells {
            let head = format!(
                "{},{},{},{},{}",
                cell.index,
                cell.epsilon,
                cell.h,
                opt(cell.k.map(|k| k.to_string())),
                opt(cell.lambda.map(|l| l.to_string()))
            );
            if let CellOutcome::Failed(msg) = &cell.outcome {
                let msg = msg.replace([',', '\n'], ";");
                let _ = writeln!(out, "failed,{head},,,,failed: {msg}");
                continue;
            }
            for r in self.records_for(cell.index) {
                for method in [Method::Mechanism, Method::Baseline] {
                    let _ = writeln!(out, "repeat,{head},{},{},{},ok", r.repeat, method.name(), r.error(method));
                }
            }
            for method in [Method::Mechanism, Method::Baseline] {
                for (kind, value) in [("mean", self.mean(cell.index, method)), ("quantile", self.quantile(cell.index, method))] {
                    if let Some(v) = value {
                        let _ = writeln!(out, "{kind},{head},,{},{v},ok", method.name());
                    }
                }
            }
        }
        out
    }
}

struct PreparedCell {
    exact: CoefficientField,
    lambda: f64,
    m: usize,
    basis: Vec<f64>,
    approx: Vec<f64>,
    truth: std::sync::Arc<Vec<f64>>,
    nearest: Vec<usize>,
}

/// Evaluates `target` once per grid resolution.
struct TruthCache<'a> {
    target: &'a TargetFunction,
    grids: HashMap<usize, std::sync::Arc<Vec<f64>>>,
}

impl TruthCache<'_> {
    fn get(&mut self, m: usize) -> std::sync::Arc<Vec<f64>> {
        let target = self.target;
        self.grids
            .entry(m)
            .or_insert_with(|| {
                let points = grid_points(m, target.ell());
                std::sync::Arc::new(points.par_iter().map(|y| target.evaluate(y)).collect())
            })
            .clone()
    }
}

/// Flat lattice index of the node nearest to each grid point.
fn nearest_indices(k: usize, m: usize, ell: usize) -> Vec<usize> {
    let axis: Vec<usize> = unit_grid(m).map(|y| nearest_node(y, k)).collect();
    let mut out = vec![0usize];
    for _ in 0..ell {
        out = out
            .iter()
            .flat_map(|&prefix| axis.iter().map(move |&nu| prefix * (k + 1) + nu))
            .collect();
    }
    out
}

fn prepare_cell(
    spec: &ExperimentSpec,
    target: &TargetFunction,
    cache: &mut TruthCache<'_>,
    epsilon: f64,
    h: usize,
    summary: &mut CellSummary,
) -> Result<PreparedCell> {
    let ell = target.ell();
    let k = match spec.k {
        CoverSize::Fixed(k) => k,
        CoverSize::Auto => choose_k(target, h, epsilon, spec.beta)?,
    };
    summary.k = Some(k);
    let params = BasisParams::new(k, h, ell)?;
    let budget = PrivacyBudget::new(epsilon, spec.delta)?;
    let lambda = scale_for_budget(target.sensitivity(), k, ell, &budget)?;
    summary.lambda = Some(lambda);
    let m = spec.grid_resolution.unwrap_or_else(|| default_grid_resolution(k));
    summary.grid = Some(m);
    let table = BasisTable::build(params)?;
    let exact = lattice_values(target, params)?;
    let basis = table.iterated_basis_matrix(m);
    let approx = contract_on_grid(exact.values(), &basis, k + 1, m, ell);
    let truth = cache.get(m);
    summary.approximation_error = Some(max_abs_diff(&approx, &truth));
    Ok(PreparedCell {
        exact,
        lambda,
        m,
        basis,
        approx,
        truth,
        nearest: nearest_indices(k, m, ell),
    })
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn run_repeat(cell: &PreparedCell, seed: u64) -> Result<(f64, f64, f64)> {
    let noisy = perturb(&cell.exact, cell.lambda, seed)?;
    let grid = cell.exact.grid();
    let noise: Vec<f64> = noisy.values().iter().zip(cell.exact.values()).map(|(a, b)| a - b).collect();
    let noise_grid = contract_on_grid(&noise, &cell.basis, grid.k + 1, cell.m, grid.ell);
    let mut mechanism = 0.0f64;
    let mut noise_sup = 0.0f64;
    let mut baseline = 0.0f64;
    for i in 0..cell.truth.len() {
        mechanism = mechanism.max((cell.approx[i] + noise_grid[i] - cell.truth[i]).abs());
        noise_sup = noise_sup.max(noise_grid[i].abs());
        baseline = baseline.max((noisy.values()[cell.nearest[i]] - cell.truth[i]).abs());
    }
    Ok((mechanism, baseline, noise_sup))
}

/// Runs every `(epsilon, h)` cell of `spec` for `spec.repeats` repeats.
/// The mechanism and the baseline share each repeat's noisy lattice values.
/// `base` resolves relative dataset paths.
pub fn run_utility_experiment(spec: &ExperimentSpec, base: Option<&Path>) -> Result<ExperimentReport> {
    spec.validate()?;
    let data = spec.data.load(base)?;
    let mut cells: Vec<CellSummary> = spec
        .epsilon_grid
        .iter()
        .flat_map(|&epsilon| spec.h_grid.iter().map(move |&h| (epsilon, h)))
        .enumerate()
        .map(|(index, (epsilon, h))| CellSummary {
            index,
            epsilon,
            h,
            k: None,
            lambda: None,
            grid: None,
            approximation_error: None,
            outcome: CellOutcome::Completed,
        })
        .collect();
    let trained = spec.learner.build().and_then(|learner| {
        let target = learner.fit(&data)?;
        match spec.sensitivity_override {
            Some(s) => target.with_sensitivity(s),
            None => Ok(target),
        }
    });
    let target = match trained {
        Ok(t) => t,
        Err(e) => {
            log::error!("training failed: {e}");
            for cell in &mut cells {
                cell.outcome = CellOutcome::Failed(format!("training failed: {e}"));
            }
            return Ok(ExperimentReport {
                beta: spec.beta,
                cells,
                records: Vec::new(),
            });
        }
    };
    let mut cache = TruthCache {
        target: &target,
        grids: HashMap::new(),
    };
    let prepared: Vec<Option<PreparedCell>> = cells
        .iter_mut()
        .map(|cell| match prepare_cell(spec, &target, &mut cache, cell.epsilon, cell.h, cell) {
            Ok(p) => Some(p),
            Err(e) => {
                log::warn!("cell {} (epsilon={}, h={}) failed: {e}", cell.index, cell.epsilon, cell.h);
                cell.outcome = CellOutcome::Failed(e.to_string());
                None
            }
        })
        .collect();
    let jobs: Vec<(usize, usize)> = prepared
        .iter()
        .enumerate()
        .filter(|(_, p)| p.is_some())
        .flat_map(|(c, _)| (0..spec.repeats).map(move |r| (c, r)))
        .collect();
    let results: Vec<(usize, usize, u64, Result<(f64, f64, f64)>)> = jobs
        .par_iter()
        .map(|&(c, r)| {
            let seed = derive_seed(spec.seed, c as u64, r as u64);
            let cell = prepared[c].as_ref().expect("job for prepared cell");
            (c, r, seed, run_repeat(cell, seed))
        })
        .collect();
    let mut records = Vec::with_capacity(results.len());
    for (cell, repeat, seed, outcome) in results {
        match outcome {
            Ok((mechanism, baseline, noise)) => records.push(RepeatRecord {
                cell,
                repeat,
                seed,
                mechanism,
                baseline,
                noise,
            }),
            Err(e) => cells[cell].outcome = CellOutcome::Failed(e.to_string()),
        }
    }
    let failed: Vec<usize> = cells
        .iter()
        .filter(|c| matches!(c.outcome, CellOutcome::Failed(_)))
        .map(|c| c.index)
        .collect();
    records.retain(|r| !failed.contains(&r.cell));
    Ok(ExperimentReport {
        beta: spec.beta,
        cells,
        records,
    })
}
