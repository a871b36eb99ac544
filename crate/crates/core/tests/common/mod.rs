#![allow(dead_code)]

use bernstein_mechanism::dataset::{Dataset, Record};
use bernstein_mechanism::learners::Learner;
use bernstein_mechanism::Error;

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / lx.len() as f64;
    let my = ly.iter().sum::<f64>() / ly.len() as f64;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

pub struct BruteForce {
    /// Largest `sup_y |F_D(y) - F_D'(y)|` over all admissible neighbours.
    pub worst: f64,
    pub neighbours: usize,
}

/// Replaces each record of `base` by each record of `pool` in turn and
/// measures the largest change of the fitted function over `grid`.
/// Replacements outside the learner's domain are skipped.
pub fn brute_force_sensitivity(learner: &dyn Learner, base: &Dataset, pool: &[Record], grid: &[Vec<f64>]) -> BruteForce {
    let reference = learner.fit(base).expect("base dataset must be admissible");
    let values: Vec<f64> = grid.iter().map(|y| reference.evaluate(y)).collect();
    let mut worst = 0.0f64;
    let mut neighbours = 0;
    for index in 0..base.len() {
        for record in pool {
            let Ok(neighbour) = base.replaced(index, record.clone()) else {
                continue;
            };
            let fitted = match learner.fit(&neighbour) {
                Ok(f) => f,
                Err(Error::Precondition(_) | Error::Degenerate(_)) => continue,
                Err(e) => panic!("unexpected failure: {e}"),
            };
            neighbours += 1;
            for (y, v) in grid.iter().zip(&values) {
                worst = worst.max((fitted.evaluate(y) - v).abs());
            }
        }
    }
    BruteForce { worst, neighbours }
}
