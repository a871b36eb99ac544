//! Monte Carlo tail of the noise polynomial
//! `V(y) = sum_nu Z_nu prod_i b^(h)_{nu_i,k}(y_i)` with `Z_nu ~ Lap(lambda)`.

use rayon::prelude::*;

use crate::basis::{contract_on_grid, BasisParams, BasisTable};
use crate::error::{Error, Result};
use crate::mechanism::{noise_rng, sample_laplace};

use super::derive_seed;

pub const TAIL_GRID: usize = 201;
pub const MIN_TRIALS: usize = 10_000;
const CHUNK: usize = 1_000;

#[derive(Debug, Clone, PartialEq)]
pub struct TailRow {
    pub tau: f64,
    /// Fraction of trials with `max_y |V(y)| >= tau`.
    pub empirical: f64,
    /// `exp(-tau / (C lambda))` with `C = (2^h - 1)^ell`.
    pub stated_bound: f64,
    /// Binomial standard error at the stated bound.
    pub standard_error: f64,
    /// `1 - (1 - exp(-tau / (C lambda)))^((k+1)^ell)`, which follows from
    /// `max |V| <= C max |Z|`.
    pub union_bound: f64,
    pub union_standard_error: f64,
    /// Fraction of trials with `|V(1/2, ..., 1/2)| >= tau`.
    pub pointwise_empirical: f64,
}

impl TailRow {
    pub fn exceeds_stated(&self) -> bool {
        self.empirical > self.stated_bound + 3.0 * self.standard_error
    }

    pub fn exceeds_union(&self) -> bool {
        self.empirical > self.union_bound + 3.0 * self.union_standard_error
    }

    pub fn pointwise_exceeds_stated(&self) -> bool {
        self.pointwise_empirical > self.stated_bound + 3.0 * self.standard_error
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailReport {
    pub params: BasisParams,
    pub lambda: f64,
    pub trials: usize,
    pub constant: f64,
    pub rows: Vec<TailRow>,
}

impl TailReport {
    /// Rows where the empirical tail exceeds the stated bound by more than
    /// three standard errors.
    pub fn flagged(&self) -> Vec<&TailRow> {
        self.rows.iter().filter(|r| r.exceeds_stated()).collect()
    }
}

fn binomial_se(p: f64, trials: f64) -> f64 {
    (p * (1.0 - p) / trials).sqrt()
}

/// Draws `trials` noise vectors, evaluates `V` on the `201^ell` grid and
/// tabulates `P[max |V| >= tau]` for every `tau`.
pub fn concentration_tail_check(
    params: BasisParams,
    lambda: f64,
    trials: usize,
    taus: &[f64],
    seed: u64,
) -> Result<TailReport> {
    if trials < MIN_TRIALS {
        return Err(Error::Config(format!("need at least {MIN_TRIALS} trials, got {trials}")));
    }
    if params.ell > 2 {
        return Err(Error::Capacity(format!("tail check supports ell <= 2, got {}", params.ell)));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!("lambda must be finite and >= 0, got {lambda}")));
    }
    let table = BasisTable::build(params)?;
    let basis = table.iterated_basis_matrix(TAIL_GRID);
    let centre = table.iterated_basis_vector(0.5)?;
    let n = params.k + 1;
    let lattice_len = n.pow(params.ell as u32);
    let chunks = trials.div_ceil(CHUNK);
    let samples: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|chunk| -> Result<Vec<(f64, f64)>> {
            let mut rng = noise_rng(derive_seed(seed, chunk as u64, 0));
            let count = CHUNK.min(trials - chunk * CHUNK);
            let mut out = Vec::with_capacity(count);
            let mut z = vec![0.0; lattice_len];
            for _ in 0..count {
                for slot in z.iter_mut() {
                    *slot = sample_laplace(lambda, &mut rng)?;
                }
                let values = contract_on_grid(&z, &basis, n, TAIL_GRID, params.ell);
                let max = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let point = contract_on_grid(&z, &centre, n, 1, params.ell)[0];
                out.push((max, point.abs()));
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let constant = (2f64.powi(params.h as i32) - 1.0).powi(params.ell as i32);
    let t = trials as f64;
    let rows = taus
        .iter()
        .map(|&tau| {
            let empirical = samples.iter().filter(|s| s.0 >= tau).count() as f64 / t;
            let pointwise_empirical = samples.iter().filter(|s| s.1 >= tau).count() as f64 / t;
            let stated_bound = if lambda == 0.0 {
                if tau > 0.0 {
                    0.0
                } else {
                    1.0
                }
            } else {
                (-tau / (constant * lambda)).exp()
            };
            let union_bound = 1.0 - (1.0 - stated_bound).powi(lattice_len as i32);
            TailRow {
                tau,
                empirical,
                stated_bound,
                standard_error: binomial_se(stated_bound, t),
                union_bound,
                union_standard_error: binomial_se(union_bound, t),
                pointwise_empirical,
            }
        })
        .collect();
    Ok(TailReport {
        params,
        lambda,
        trials,
        constant,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_noise_has_empty_tail() {
        let r = concentration_tail_check(BasisParams::new(4, 1, 1).unwrap(), 0.0, 10_000, &[0.1, 1.0], 0).unwrap();
        assert!(r.rows.iter().all(|row| row.empirical == 0.0 && row.stated_bound == 0.0));
    }

    #[test]
    fn too_few_trials_rejected() {
        assert!(concentration_tail_check(BasisParams::new(4, 1, 1).unwrap(), 1.0, 100, &[1.0], 0).is_err());
    }

    #[test]
    fn union_bound_holds() {
        let r = concentration_tail_check(BasisParams::new(5, 2, 1).unwrap(), 1.0, 20_000, &[1.0, 3.0, 6.0, 10.0], 4)
            .unwrap();
        assert!(r.rows.iter().all(|row| !row.exceeds_union()));
        assert!(r.rows.iter().all(|row| !row.pointwise_exceeds_stated()));
    }
}
