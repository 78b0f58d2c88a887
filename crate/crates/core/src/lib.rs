//! A finite-dimensional laboratory for higher-order defect operators.
//!
//! For a square matrix `T`, a Hermitian weight `P` and an order `m ≥ 1`, the
//! defect operator is
//!
//! ```text
//! Δᵐ(P) = (I − L_{T*} R_T)ᵐ (P) = Σⱼ (−1)ʲ C(m,j) T*ʲ P Tʲ
//! ```
//!
//! and `T` is called `(m,P)`-expansive, contractive or isometric when `Δᵐ(P)`
//! is negative semidefinite, positive semidefinite or zero. The crate
//! computes these operators, the Drazin inverse and core–nilpotent
//! splitting, polar/Aluthge/Duggal transforms, and checks a family of
//! structural theorems about expansive operators on generated fixtures.
//!
//! Modules:
//! - [`matrix_core`]: dense complex matrices, definiteness, spectra.
//! - [`decompositions`]: Drazin inverse, core–nilpotent and range–kernel
//!   splits, polar decomposition, Aluthge/Duggal transforms, Andô's criterion.
//! - [`expansivity`]: the defect operator and its classification.
//! - [`theorem_lab`]: one verifier per theorem, plus the suite runner.
//! - [`generators`]: seeded fixture families.

pub mod decompositions;
pub mod error;
pub mod expansivity;
pub mod generators;
pub mod matrix_core;
pub mod theorem_lab;

pub use error::{OplabError, Result};
pub use matrix_core::{ComplexMatrix, Complex64, Tolerance};

// The guide under `book/` is compiled as doctests so its snippets stay honest.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/defect.md")]
    mod defect {}
    #[doc = include_str!("../../../book/src/drazin.md")]
    mod drazin {}
    #[doc = include_str!("../../../book/src/transforms.md")]
    mod transforms {}
    #[doc = include_str!("../../../book/src/theorems.md")]
    mod theorems {}
    #[doc = include_str!("../../../book/src/fixtures.md")]
    mod fixtures {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
