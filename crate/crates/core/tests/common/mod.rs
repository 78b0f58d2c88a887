#![allow(dead_code)]

use nalgebra::DMatrix;
use oplab::generators::{gen_haar_unitary, gen_nilpotent, FixtureRng};
use oplab::matrix_core::operator_norm;
use oplab::{Complex64, ComplexMatrix};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn real(rows: &[&[f64]]) -> ComplexMatrix {
    ComplexMatrix::from_real_rows(rows)
}

pub fn dist(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    operator_norm(&(a - b))
}

pub fn haar(seed: u64, d: usize) -> ComplexMatrix {
    gen_haar_unitary(&mut FixtureRng::new(seed, 0), d).unwrap()
}

pub fn nilpotent(seed: u64, d: usize, index: usize) -> ComplexMatrix {
    gen_nilpotent(&mut FixtureRng::new(seed, 1), d, index).unwrap()
}

/// Pascal's triangle in u128, independent of the library's binomials.
pub fn pascal(m: usize) -> Vec<u128> {
    let mut row = vec![1u128];
    for _ in 0..m {
        let mut next = vec![1u128; row.len() + 1];
        for j in 1..row.len() {
            next[j] = row[j - 1] + row[j];
        }
        row = next;
    }
    row
}

/// Oracle for `Σⱼ (−1)ʲ C(m,j) T*ʲ P Tʲ`, straight on nalgebra.
pub fn oracle_binomial(t: &ComplexMatrix, p: &ComplexMatrix, m: usize) -> DMatrix<Complex64> {
    let t = t.inner();
    let coeffs = pascal(m);
    let mut acc = DMatrix::<Complex64>::zeros(t.nrows(), t.ncols());
    let mut term = p.inner().clone();
    for (j, &cj) in coeffs.iter().enumerate() {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        acc += term.map(|z| z * (sign * cj as f64));
        term = t.adjoint() * term * t;
    }
    acc
}

/// Oracle for `(I − L_{T*}R_T)ᵐ(P)`.
pub fn oracle_iterated(t: &ComplexMatrix, p: &ComplexMatrix, m: usize) -> DMatrix<Complex64> {
    let t = t.inner();
    let mut s = p.inner().clone();
    for _ in 0..m {
        s = &s - t.adjoint() * &s * t;
    }
    s
}

/// Largest `Σⱼ C(m,j)·‖T‖^{2j}·‖P‖`, the natural size of the defect's terms.
pub fn term_scale(t: &ComplexMatrix, p: &ComplexMatrix, m: usize) -> f64 {
    let (nt, np) = (operator_norm(t), operator_norm(p));
    pascal(m).iter().enumerate().map(|(j, &cj)| cj as f64 * nt.powi(2 * j as i32) * np).sum()
}

/// Extreme eigenvalues of a Hermitian matrix via nalgebra's solver.
pub fn eig_range(h: &ComplexMatrix) -> (f64, f64) {
    let sym = h.hermitian_part().into_inner();
    let e = nalgebra::SymmetricEigen::new(sym).eigenvalues;
    (e.min(), e.max())
}

pub fn wrap(m: DMatrix<Complex64>) -> ComplexMatrix {
    let entries = (0..m.nrows()).flat_map(|i| (0..m.ncols()).map(move |j| (i, j))).map(|(i, j)| m[(i, j)]).collect();
    ComplexMatrix::from_row_major(m.nrows(), m.ncols(), entries).unwrap()
}
