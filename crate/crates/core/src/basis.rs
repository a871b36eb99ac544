//! Bernstein basis polynomials, the iterated Bernstein operator and
//! tensor-product evaluation over the lattice `{0, 1/k, ..., 1}^ell`.
//!
//! The iterated basis of order `h` is obtained from the lattice sampling
//! matrix `M[mu][nu] = b_{nu,k}(mu/k)`:
//!
//! ```text
//! b^(h)(y) = sum_{i=1..h} C(h,i) (-1)^(i-1) * b(y)^T M^(i-1)
//! ```
//!
//! so every query after table construction costs `O(k^2)` per axis.

use crate::error::{Error, Result};

/// Degree above which binomial coefficients are evaluated in log space.
const LOG_SPACE_DEGREE: usize = 60;

/// Resource caps guarding table and lattice construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Limits {
    pub max_k: usize,
    pub max_h: usize,
    pub max_lattice_points: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            max_k: 10_000,
            max_h: 16,
            max_lattice_points: 100_000_000,
        }
    }
}

/// Lattice degree `k`, iteration order `h` and dimension `ell`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct BasisParams {
    pub k: usize,
    pub h: usize,
    pub ell: usize,
}

impl BasisParams {
    pub fn new(k: usize, h: usize, ell: usize) -> Result<Self> {
        let params = Self { k, h, ell };
        params.validate(&Limits::default())?;
        Ok(params)
    }

    pub fn validate(&self, limits: &Limits) -> Result<()> {
        if self.k == 0 || self.h == 0 || self.ell == 0 {
            return Err(Error::Domain(format!(
                "k, h and ell must be positive (got k={}, h={}, ell={})",
                self.k, self.h, self.ell
            )));
        }
        if self.k > limits.max_k {
            return Err(Error::Capacity(format!("k={} exceeds maximum {}", self.k, limits.max_k)));
        }
        if self.h > limits.max_h {
            return Err(Error::Capacity(format!("h={} exceeds maximum {}", self.h, limits.max_h)));
        }
        lattice_size(self.k, self.ell, limits.max_lattice_points).map(|_| ())
    }

    pub fn lattice(&self) -> LatticeGrid {
        LatticeGrid { k: self.k, ell: self.ell }
    }
}

fn lattice_size(k: usize, ell: usize, cap: usize) -> Result<usize> {
    let mut size = 1usize;
    for _ in 0..ell {
        size = size
            .checked_mul(k + 1)
            .filter(|&s| s <= cap)
            .ok_or_else(|| Error::Capacity(format!("(k+1)^ell = {}^{} exceeds {} lattice points", k + 1, ell, cap)))?;
    }
    Ok(size)
}

/// Binomial coefficient `C(k, nu)` as a float.
pub fn binomial(k: usize, nu: usize) -> f64 {
    if nu > k {
        return 0.0;
    }
    if k > LOG_SPACE_DEGREE {
        return ln_binomial(k, nu).exp();
    }
    let nu = nu.min(k - nu);
    let mut c = 1.0f64;
    for i in 0..nu {
        c = c * (k - i) as f64 / (i + 1) as f64;
    }
    c.round()
}

fn ln_binomial(k: usize, nu: usize) -> f64 {
    let nu = nu.min(k - nu);
    (0..nu).map(|i| ((k - i) as f64).ln() - ((i + 1) as f64).ln()).sum()
}

fn check_unit(y: f64) -> Result<()> {
    if (0.0..=1.0).contains(&y) {
        Ok(())
    } else {
        Err(Error::Domain(format!("query coordinate {y} outside [0, 1]")))
    }
}

/// `b_{nu,k}(y) = C(k,nu) y^nu (1-y)^(k-nu)`, with `0^0 = 1`.
pub fn bernstein_basis(nu: usize, k: usize, y: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::Domain("degree k must be positive".into()));
    }
    if nu > k {
        return Err(Error::Domain(format!("basis index {nu} outside [0, {k}]")));
    }
    check_unit(y)?;
    Ok(basis_unchecked(nu, k, y))
}

fn basis_unchecked(nu: usize, k: usize, y: f64) -> f64 {
    let r = k - nu;
    if y == 0.0 {
        return if nu == 0 { 1.0 } else { 0.0 };
    }
    if y == 1.0 {
        return if r == 0 { 1.0 } else { 0.0 };
    }
    if k > LOG_SPACE_DEGREE {
        (ln_binomial(k, nu) + nu as f64 * y.ln() + r as f64 * (1.0 - y).ln()).exp()
    } else {
        binomial(k, nu) * y.powi(nu as i32) * (1.0 - y).powi(r as i32)
    }
}

/// All `k+1` basis polynomials of degree `k` at `y`.
pub fn basis_vector(k: usize, y: f64) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(Error::Domain("degree k must be positive".into()));
    }
    check_unit(y)?;
    Ok(basis_vector_unchecked(k, y))
}

fn basis_vector_unchecked(k: usize, y: f64) -> Vec<f64> {
    if k <= LOG_SPACE_DEGREE || y == 0.0 || y == 1.0 {
        return (0..=k).map(|nu| basis_unchecked(nu, k, y)).collect();
    }
    let (ly, lz) = (y.ln(), (1.0 - y).ln());
    let mut ln_choose = 0.0;
    let mut out = Vec::with_capacity(k + 1);
    for nu in 0..=k {
        out.push((ln_choose + nu as f64 * ly + (k - nu) as f64 * lz).exp());
        ln_choose += ((k - nu) as f64).ln() - ((nu + 1) as f64).ln();
    }
    out
}

/// Precomputed operator matrix `M`, its powers `M^0..M^(h-1)` and the
/// combined iterated-basis matrix.
#[derive(Debug, Clone)]
pub struct BasisTable {
    params: BasisParams,
    operator: Vec<f64>,
    powers: Vec<Vec<f64>>,
    combined: Vec<f64>,
}

impl BasisTable {
    pub fn build(params: BasisParams) -> Result<Self> {
        Self::build_with_limits(params, &Limits::default())
    }

    pub fn build_with_limits(params: BasisParams, limits: &Limits) -> Result<Self> {
        params.validate(limits)?;
        let k = params.k;
        let n = k + 1;
        let mut operator = vec![0.0; n * n];
        for mu in 0..n {
            let row = basis_vector_unchecked(k, mu as f64 / k as f64);
            operator[mu * n..(mu + 1) * n].copy_from_slice(&row);
        }

        let mut identity = vec![0.0; n * n];
        for i in 0..n {
            identity[i * n + i] = 1.0;
        }
        let mut powers = Vec::with_capacity(params.h);
        powers.push(identity);
        for i in 1..params.h {
            let next = matmul(&powers[i - 1], &operator, n);
            powers.push(next);
        }

        let mut combined = vec![0.0; n * n];
        for (i, power) in powers.iter().enumerate() {
            // term index i+1 in the alternating binomial sum
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            let weight = sign * binomial(params.h, i + 1);
            for (c, p) in combined.iter_mut().zip(power) {
                *c += weight * p;
            }
        }

        Ok(Self {
            params,
            operator,
            powers,
            combined,
        })
    }

    pub fn params(&self) -> BasisParams {
        self.params
    }

    /// Row-major `(k+1) x (k+1)` matrix with `M[mu][nu] = b_{nu,k}(mu/k)`.
    pub fn operator_matrix(&self) -> &[f64] {
        &self.operator
    }

    /// `M^0 ..= M^(h-1)`, each row-major.
    pub fn matrix_powers(&self) -> &[Vec<f64>] {
        &self.powers
    }

    /// `(b^(h)_{0,k}(y), ..., b^(h)_{k,k}(y))`.
    pub fn iterated_basis_vector(&self, y: f64) -> Result<Vec<f64>> {
        check_unit(y)?;
        Ok(self.iterated_unchecked(y))
    }

    fn iterated_unchecked(&self, y: f64) -> Vec<f64> {
        let n = self.params.k + 1;
        let b = basis_vector_unchecked(self.params.k, y);
        if self.params.h == 1 {
            return b;
        }
        let mut out = vec![0.0; n];
        for (mu, &weight) in b.iter().enumerate() {
            if weight == 0.0 {
                continue;
            }
            let row = &self.combined[mu * n..(mu + 1) * n];
            for (o, r) in out.iter_mut().zip(row) {
                *o += weight * r;
            }
        }
        out
    }

    /// Iterated basis sampled at `m` equispaced points of `[0, 1]`, as an
    /// `m x (k+1)` row-major matrix.
    pub fn iterated_basis_matrix(&self, m: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(m * (self.params.k + 1));
        for y in unit_grid(m) {
            out.extend(self.iterated_unchecked(y));
        }
        out
    }
}

fn matmul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        for l in 0..n {
            let a_il = a[i * n + l];
            if a_il == 0.0 {
                continue;
            }
            let b_row = &b[l * n..(l + 1) * n];
            let c_row = &mut c[i * n..(i + 1) * n];
            for (cv, bv) in c_row.iter_mut().zip(b_row) {
                *cv += a_il * bv;
            }
        }
    }
    c
}

/// `m` equispaced points `0, 1/(m-1), ..., 1` (just `0` when `m == 1`).
pub fn unit_grid(m: usize) -> impl Iterator<Item = f64> + Clone {
    let denom = m.saturating_sub(1).max(1) as f64;
    (0..m).map(move |i| i as f64 / denom)
}

/// The lattice cover `{0, 1/k, ..., 1}^ell`, enumerated row-major with the
/// last axis varying fastest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatticeGrid {
    pub k: usize,
    pub ell: usize,
}

impl LatticeGrid {
    pub fn new(k: usize, ell: usize) -> Result<Self> {
        if k == 0 || ell == 0 {
            return Err(Error::Domain("lattice needs k >= 1 and ell >= 1".into()));
        }
        lattice_size(k, ell, Limits::default().max_lattice_points)?;
        Ok(Self { k, ell })
    }

    pub fn len(&self) -> usize {
        (self.k + 1).pow(self.ell as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn multi_index(&self, mut index: usize) -> Vec<usize> {
        let n = self.k + 1;
        let mut nu = vec![0; self.ell];
        for slot in nu.iter_mut().rev() {
            *slot = index % n;
            index /= n;
        }
        nu
    }

    pub fn flat_index(&self, nu: &[usize]) -> usize {
        nu.iter().fold(0, |acc, &v| acc * (self.k + 1) + v)
    }

    pub fn point(&self, index: usize) -> Vec<f64> {
        self.multi_index(index)
            .into_iter()
            .map(|v| v as f64 / self.k as f64)
            .collect()
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(|i| self.point(i))
    }
}

/// Values attached to every lattice point, in canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientField {
    grid: LatticeGrid,
    values: Vec<f64>,
}

impl CoefficientField {
    pub fn new(grid: LatticeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Shape(format!(
                "{} coefficients supplied for a lattice of {} points",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Evaluation {
                point: grid.point(i),
                value: values[i],
            });
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> LatticeGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

fn check_compatible(coeffs: &CoefficientField, table: &BasisTable) -> Result<()> {
    let p = table.params();
    let g = coeffs.grid();
    if g.k != p.k || g.ell != p.ell {
        return Err(Error::Shape(format!(
            "coefficients on (k={}, ell={}) but basis table built for (k={}, ell={})",
            g.k, g.ell, p.k, p.ell
        )));
    }
    Ok(())
}

/// `sum_nu coeffs[nu] * prod_i b^(h)_{nu_i,k}(y_i)`.
pub fn evaluate_tensor(coeffs: &CoefficientField, table: &BasisTable, y: &[f64]) -> Result<f64> {
    check_compatible(coeffs, table)?;
    let ell = table.params().ell;
    if y.len() != ell {
        return Err(Error::Shape(format!("query has {} coordinates, expected {ell}", y.len())));
    }
    for &c in y {
        check_unit(c)?;
    }
    let n = table.params().k + 1;
    let mut current = coeffs.values().to_vec();
    // contract the fastest (last) axis first
    for &coord in y.iter().rev() {
        let b = table.iterated_unchecked(coord);
        current = current
            .chunks_exact(n)
            .map(|chunk| chunk.iter().zip(&b).map(|(c, w)| c * w).sum())
            .collect();
    }
    Ok(current[0])
}

/// Evaluates the tensor-product approximation on the uniform `m^ell` grid,
/// returning values row-major with the last axis fastest.
pub fn evaluate_on_grid(coeffs: &CoefficientField, table: &BasisTable, m: usize) -> Result<Vec<f64>> {
    check_compatible(coeffs, table)?;
    let basis = table.iterated_basis_matrix(m);
    Ok(contract_on_grid(coeffs.values(), &basis, table.params().k + 1, m, table.params().ell))
}

/// Mode products of a `(n)^ell` tensor with an `m x n` matrix along every
/// axis, giving an `m^ell` tensor.
pub(crate) fn contract_on_grid(values: &[f64], basis: &[f64], n: usize, m: usize, ell: usize) -> Vec<f64> {
    let mut dims = vec![n; ell];
    let mut current = values.to_vec();
    for axis in (0..ell).rev() {
        let outer: usize = dims[..axis].iter().product();
        let inner: usize = dims[axis + 1..].iter().product();
        let mut next = vec![0.0; outer * m * inner];
        for o in 0..outer {
            for i in 0..m {
                let row = &basis[i * n..(i + 1) * n];
                let dst = &mut next[(o * m + i) * inner..(o * m + i + 1) * inner];
                for (nu, &w) in row.iter().enumerate() {
                    if w == 0.0 {
                        continue;
                    }
                    let src = &current[(o * n + nu) * inner..(o * n + nu + 1) * inner];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d += w * s;
                    }
                }
            }
        }
        dims[axis] = m;
        current = next;
    }
    current
}

/// Samples `f` on the lattice for `params`.
pub fn approximate<F>(f: F, params: BasisParams) -> Result<CoefficientField>
where
    F: Fn(&[f64]) -> f64,
{
    params.validate(&Limits::default())?;
    let grid = params.lattice();
    let mut values = Vec::with_capacity(grid.len());
    for point in grid.points() {
        let value = f(&point);
        if !value.is_finite() {
            return Err(Error::Evaluation { point, value });
        }
        values.push(value);
    }
    CoefficientField::new(grid, values)
}

/// Points of the uniform `m^ell` grid, row-major with the last axis fastest.
pub fn grid_points(m: usize, ell: usize) -> Vec<Vec<f64>> {
    let axis: Vec<f64> = unit_grid(m).collect();
    let total = m.pow(ell as u32);
    (0..total)
        .map(|mut idx| {
            let mut p = vec![0.0; ell];
            for slot in p.iter_mut().rev() {
                *slot = axis[idx % m];
                idx /= m;
            }
            p
        })
        .collect()
}
