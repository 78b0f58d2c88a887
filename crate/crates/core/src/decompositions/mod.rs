//! Drazin inverse and core–nilpotent structure, the orthogonal
//! range–kernel split, polar decomposition with the Aluthge and Duggal
//! transforms, and Andô's block-PSD criterion.

mod ando;
mod drazin;
mod polar;
mod split;

pub use ando::{ando_check, AndoReport};
pub use drazin::{
    core_nilpotent, drazin_index, drazin_inverse, drazin_residuals, CoreNilpotent, DrazinIndex, DrazinInverse,
    DrazinResiduals,
};
pub use polar::{aluthge, duggal, polar, PolarParts};
pub use split::{range_kernel_split, RangeKernelSplit};

use crate::matrix_core::{Complex64, ComplexMatrix};

/// Rotates each column so that its largest-modulus entry (first one on ties)
/// is real and positive. Makes SVD-derived bases canonical.
pub(crate) fn normalize_column_phases(m: &ComplexMatrix) -> ComplexMatrix {
    let mut out = m.clone().into_inner();
    for j in 0..out.ncols() {
        let mut pivot = Complex64::new(0.0, 0.0);
        for i in 0..out.nrows() {
            if out[(i, j)].norm() > pivot.norm() * (1.0 + 1e-12) {
                pivot = out[(i, j)];
            }
        }
        if pivot.norm() > 0.0 {
            let phase = pivot.conj() / pivot.norm();
            for i in 0..out.nrows() {
                out[(i, j)] *= phase;
            }
        }
    }
    ComplexMatrix::from_inner(out)
}
