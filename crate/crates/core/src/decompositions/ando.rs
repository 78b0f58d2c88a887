use serde::{Deserialize, Serialize};

use crate::error::{OplabError, Result};
use crate::matrix_core::{
    block_split, definiteness, hermitian_eigen, operator_norm, Complex64, ComplexMatrix, DefinitenessVerdict,
    Tolerance,
};

/// Outcome of the block-PSD test `P = [[P₁₁, P₁₂], [P₂₁, P₂₂]] ≥ 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AndoReport {
    pub is_psd: bool,
    pub verdict: DefinitenessVerdict,
    /// `C` with `P₂₁ = P₂₂^{1/2}·C·P₁₁^{1/2}`, present when `P ≥ 0`.
    pub contraction: Option<ComplexMatrix>,
    pub contraction_norm: Option<f64>,
    /// ‖P₂₂^{1/2}·C·P₁₁^{1/2} − P₂₁‖.
    pub reconstruction_residual: Option<f64>,
}

/// Square root and pseudo-inverse square root of a PSD block. Eigenvalues
/// `λ ≤ floor` are treated as zero in the pseudo-inverse.
fn sqrt_pair(block: &ComplexMatrix, floor: f64) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let (values, vectors) = hermitian_eigen(block)?;
    let root: Vec<Complex64> = values.iter().map(|&l| Complex64::new(l.max(0.0).sqrt(), 0.0)).collect();
    let inv_root: Vec<Complex64> = values
        .iter()
        .map(|&l| Complex64::new(if l > floor { 1.0 / l.sqrt() } else { 0.0 }, 0.0))
        .collect();
    let rebuild = |diag: &[Complex64]| (&(&vectors * &ComplexMatrix::diagonal(diag)) * &vectors.adjoint()).hermitian_part();
    Ok((rebuild(&root), rebuild(&inv_root)))
}

/// Andô's criterion: when `P ≥ 0`, returns the minimal-norm contraction
/// `C = (P₂₂^{1/2})†·P₂₁·(P₁₁^{1/2})†`.
pub fn ando_check(p: &ComplexMatrix, d1: usize, tol: &Tolerance) -> Result<AndoReport> {
    if !p.is_square() || d1 == 0 || d1 >= p.rows() {
        return Err(OplabError::Dimension(format!(
            "ando_check needs a square matrix and 0 < d1 < dim, got {}x{} with d1 = {d1}",
            p.rows(),
            p.cols()
        )));
    }
    let verdict = definiteness(p, tol)?;
    if !verdict.verdict.is_psd() {
        return Ok(AndoReport {
            is_psd: false,
            verdict,
            contraction: None,
            contraction_norm: None,
            reconstruction_residual: None,
        });
    }
    let blocks = block_split(&p.hermitian_part(), d1)?;
    let floor = tol.bound(operator_norm(p));
    let (root11, pinv11) = sqrt_pair(&blocks.b11, floor)?;
    let (root22, pinv22) = sqrt_pair(&blocks.b22, floor)?;
    let c = &(&pinv22 * &blocks.b21) * &pinv11;
    let residual = operator_norm(&(&(&root22 * &c) * &root11 - &blocks.b21));
    Ok(AndoReport {
        is_psd: true,
        verdict,
        contraction_norm: Some(operator_norm(&c)),
        contraction: Some(c),
        reconstruction_residual: Some(residual),
    })
}
