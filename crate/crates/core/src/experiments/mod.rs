//! Desk-scale empirical studies: utility of the mechanism against the
//! nearest-lattice-point baseline, the Monte Carlo concentration check, and
//! the lower-bound database family.

mod data;
mod tail;
mod utility;
mod witness;

pub use data::{
    generate_mixture_data, generate_two_class_gaussian, reference_mixture, reference_two_class, GaussianClass,
    MixtureComponent,
};
pub use tail::{concentration_tail_check, TailReport, TailRow, MIN_TRIALS, TAIL_GRID};
pub use utility::{
    default_grid_resolution, run_utility_experiment, CellOutcome, CellSummary, CoverSize, DataSource, ExperimentReport,
    ExperimentSpec, Method, RepeatRecord,
};
pub use witness::{build_lower_bound_witness, LowerBoundWitness, DATABASE_COUNT};

use crate::basis::grid_points;

/// Mixes a master seed with two indices into an independent stream seed.
pub fn derive_seed(master: u64, a: u64, b: u64) -> u64 {
    let mut x = splitmix(master);
    x = splitmix(x ^ a.wrapping_mul(0xA24B_AED4_963E_E407));
    splitmix(x ^ b.wrapping_mul(0x9FB2_1C65_1E98_DF25))
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `max |f_true - f_released|` over the uniform `m^ell` grid including the
/// endpoints. This is a lower estimate of the supremum over the cube.
pub fn sup_error<F, G>(f_true: F, f_released: G, m: usize, ell: usize) -> f64
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> f64,
{
    grid_points(m, ell)
        .iter()
        .map(|y| (f_true(y) - f_released(y)).abs())
        .fold(0.0, f64::max)
}

/// Fraction of paired values whose signs agree, treating zero as positive.
pub fn sign_agreement(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "sign_agreement needs equally long slices");
    if a.is_empty() {
        return 1.0;
    }
    let agree = a.iter().zip(b).filter(|(x, y)| (**x >= 0.0) == (**y >= 0.0)).count();
    agree as f64 / a.len() as f64
}
