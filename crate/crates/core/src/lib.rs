//! Differentially private release of functions through iterated Bernstein
//! polynomial approximation.
//!
//! A [`TargetFunction`] bound to a private dataset is evaluated on the
//! lattice `{0, 1/k, ..., 1}^ell`, each value is perturbed with Laplace
//! noise, and the resulting [`Synopsis`] answers arbitrary queries in the unit
//! cube without further access to the data.

pub mod basis;
pub mod dataset;
pub mod error;
pub mod experiments;
pub mod learners;
pub mod mechanism;
pub mod persist;

pub use basis::{BasisParams, BasisTable, CoefficientField, LatticeGrid, Limits};
pub use dataset::{Dataset, LabelKind, Record};
pub use error::{Error, Result};
pub use learners::{Learner, LearnerConfig};
pub use mechanism::{
    choose_k, evaluate_synopsis, predicted_error_bound, sanitize, PrivacyBudget, Smoothness, Synopsis, TargetFunction,
};
