//! Dense complex matrices and the spectral machinery every other module
//! builds on.

mod matrix;
mod spectral;

pub use matrix::{block_compose, block_split, BlockGrid, ComplexMatrix};
pub use spectral::{
    definiteness, definiteness_at_scale, eigenvalues, hermitian_eigen, is_hermitian, moore_penrose,
    numerical_rank, operator_norm, spectral_radius, sqrt_psd, svd, Definiteness, DefinitenessVerdict, Svd,
};
pub(crate) use spectral::pinv_from_svd;

pub use num_complex::Complex64;

use serde::{Deserialize, Serialize};

/// Relative tolerance with an absolute floor.
///
/// Every exact `≤ 0` / `≥ 0` / `= 0` judgment is realized as a comparison
/// against `rel_eps·scale + abs_eps`, where `scale` is the natural magnitude
/// of the quantity being judged.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub rel_eps: f64,
    pub abs_eps: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { rel_eps: 1e-10, abs_eps: 1e-12 }
    }
}

impl Tolerance {
    pub fn new(rel_eps: f64, abs_eps: f64) -> Self {
        assert!(rel_eps >= 0.0 && abs_eps >= 0.0, "tolerances must be nonnegative");
        Self { rel_eps, abs_eps }
    }

    /// `rel_eps·scale + abs_eps`.
    pub fn bound(&self, scale: f64) -> f64 {
        self.rel_eps * scale + self.abs_eps
    }

    /// Same tolerance with both components multiplied by `factor`.
    pub fn widened(&self, factor: f64) -> Self {
        Self { rel_eps: self.rel_eps * factor, abs_eps: self.abs_eps * factor }
    }
}
