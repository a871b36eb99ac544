//! The database family behind the `Omega(S(F)/epsilon)` lower bound.
//!
//! Over the domain `X = {0, 1/(V+8), ..., 1}^ell` with `N + 1 = (V+9)^ell`
//! elements (indices `0..=N`), the linear query
//!
//! ```text
//! F(D, y) = eta * (d_0 + ... + d_{N-7} + 2 d_{N-6} + ... + 8 d_N + <y, 1>)
//! ```
//!
//! weights index `N - 8 + w` by `w` for `w = 2..=8` and every other index by
//! one. Database `D_j` holds `V` unit entries at indices `0..V` and `c =
//! floor(1/epsilon)` copies of the element at index `N + 1 - j`, whose weight
//! is `9 - j`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const DATABASE_COUNT: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct LowerBoundWitness {
    pub v: usize,
    pub epsilon: f64,
    pub eta: f64,
    pub ell: usize,
    pub c: u64,
    pub n: u64,
    pub databases: Vec<Vec<u64>>,
}

impl LowerBoundWitness {
    /// Largest histogram index `N`.
    pub fn last_index(&self) -> usize {
        self.databases[0].len() - 1
    }

    /// Coefficient of `d_i` in `F`, in units of `eta`.
    pub fn weight(&self, index: usize) -> u64 {
        let last = self.last_index();
        if index + 7 <= last {
            1
        } else {
            (index + 8 - last) as u64
        }
    }

    pub fn evaluate(&self, database: &[u64], y: &[f64]) -> f64 {
        let counts: f64 = database
            .iter()
            .enumerate()
            .map(|(i, &d)| (self.weight(i) * d) as f64)
            .sum();
        self.eta * (counts + y.iter().sum::<f64>())
    }

    /// Sensitivity of `F` from its coefficient pattern: moving one record
    /// changes `F` by at most `eta (max weight - min weight)`.
    pub fn sensitivity(&self) -> f64 {
        let weights = (0..=self.last_index()).map(|i| self.weight(i));
        let max = weights.clone().max().unwrap_or(0);
        let min = weights.min().unwrap_or(0);
        self.eta * (max - min) as f64
    }

    /// Checks sizes, pairwise distances, separation at `probes` random
    /// queries, and `S(F) = 7 eta`.
    pub fn verify(&self, probes: usize, seed: u64) -> Result<()> {
        let fail = |msg: String| Err(Error::Construction(msg));
        if self.databases.len() != DATABASE_COUNT {
            return fail(format!("expected {DATABASE_COUNT} databases, got {}", self.databases.len()));
        }
        for (j, db) in self.databases.iter().enumerate() {
            let size: u64 = db.iter().sum();
            if size != self.n {
                return fail(format!("database {} has {size} entries, expected {}", j + 1, self.n));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let queries: Vec<Vec<f64>> = (0..probes)
            .map(|_| (0..self.ell).map(|_| rng.random::<f64>()).collect())
            .collect();
        let separation = self.c as f64 * self.eta;
        for i in 0..DATABASE_COUNT {
            for j in i + 1..DATABASE_COUNT {
                let (a, b) = (&self.databases[i], &self.databases[j]);
                let l1: u64 = a.iter().zip(b).map(|(x, y)| x.abs_diff(*y)).sum();
                if l1 != 2 * self.c {
                    return fail(format!("databases {} and {} are {l1} apart, expected {}", i + 1, j + 1, 2 * self.c));
                }
                let reference = self.evaluate(a, &[0.0; 0]) - self.evaluate(b, &[0.0; 0]);
                for y in &queries {
                    let gap = self.evaluate(a, y) - self.evaluate(b, y);
                    if gap.abs() < separation * (1.0 - 1e-12) {
                        return fail(format!(
                            "databases {} and {} separated by {gap} < c eta = {separation}",
                            i + 1,
                            j + 1
                        ));
                    }
                    if (gap - reference).abs() > 1e-9 * reference.abs().max(1.0) {
                        return fail(format!("difference of databases {} and {} depends on y", i + 1, j + 1));
                    }
                }
            }
        }
        let s = self.sensitivity();
        if (s - 7.0 * self.eta).abs() > 1e-12 * self.eta {
            return fail(format!("S(F) = {s}, expected 7 eta = {}", 7.0 * self.eta));
        }
        Ok(())
    }
}

pub fn build_lower_bound_witness(v: usize, epsilon: f64, eta: f64, ell: usize) -> Result<LowerBoundWitness> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Budget(format!("epsilon must be positive and finite, got {epsilon}")));
    }
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::Domain(format!("eta must be positive and finite, got {eta}")));
    }
    if ell == 0 {
        return Err(Error::Domain("ell must be positive".into()));
    }
    let size = (v + 9)
        .checked_pow(ell as u32)
        .filter(|&s| s <= 100_000_000)
        .ok_or_else(|| Error::Capacity(format!("domain ({})^{ell} is too large", v + 9)))?;
    let last = size - 1;
    let c = (1.0 / epsilon).floor() as u64;
    let databases = (1..=DATABASE_COUNT)
        .map(|j| {
            let mut d = vec![0u64; size];
            for slot in &mut d[..v] {
                *slot = 1;
            }
            d[last + 1 - j] += c;
            d
        })
        .collect();
    let witness = LowerBoundWitness {
        v,
        epsilon,
        eta,
        ell,
        c,
        n: v as u64 + c,
        databases,
    };
    witness.verify(20, v as u64 ^ epsilon.to_bits())?;
    Ok(witness)
}
