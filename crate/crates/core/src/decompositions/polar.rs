use serde::{Deserialize, Serialize};

use crate::error::{OplabError, Result};
use crate::matrix_core::{numerical_rank, svd, Complex64, ComplexMatrix, Tolerance};

/// `M = u·p` with `p = (M*M)^{1/2}` and `u` a partial isometry vanishing on
/// `ker M`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolarParts {
    pub u: ComplexMatrix,
    pub p: ComplexMatrix,
    /// `p^{1/2}`, kept alongside since both transforms need it.
    pub p_sqrt: ComplexMatrix,
}

impl PolarParts {
    /// `p^{1/2}·u·p^{1/2}`.
    pub fn aluthge(&self) -> ComplexMatrix {
        &(&self.p_sqrt * &self.u) * &self.p_sqrt
    }

    /// `p·u`.
    pub fn duggal(&self) -> ComplexMatrix {
        &self.p * &self.u
    }
}

/// Polar decomposition through the SVD `M = W·Σ·V*`: `p = V·Σ·V*` and
/// `u = W_r·V_r*` over the singular values above `rel_eps·σ_max`.
pub fn polar(m: &ComplexMatrix, tol: &Tolerance) -> Result<PolarParts> {
    if !m.is_square() {
        return Err(OplabError::Dimension(format!("polar needs a square matrix, got {}x{}", m.rows(), m.cols())));
    }
    let d = m.rows();
    if d == 0 {
        let e = ComplexMatrix::zeros(0, 0);
        return Ok(PolarParts { u: e.clone(), p: e.clone(), p_sqrt: e });
    }
    let dec = svd(m)?;
    let rank = numerical_rank(&dec.sigma, tol.rel_eps * dec.sigma[0]);
    let weighted = |f: fn(f64) -> f64| {
        let diag: Vec<Complex64> = dec.sigma.iter().map(|&s| Complex64::new(f(s), 0.0)).collect();
        (&(&dec.v * &ComplexMatrix::diagonal(&diag)) * &dec.v.adjoint()).hermitian_part()
    };
    let p = weighted(|s| s);
    let p_sqrt = weighted(f64::sqrt);
    let u = &dec.u.columns(0, rank) * &dec.v.columns(0, rank).adjoint();
    Ok(PolarParts { u, p, p_sqrt })
}

/// Aluthge transform `|M|^{1/2}·U·|M|^{1/2}`.
pub fn aluthge(m: &ComplexMatrix, tol: &Tolerance) -> Result<ComplexMatrix> {
    Ok(polar(m, tol)?.aluthge())
}

/// Duggal transform `|M|·U`.
pub fn duggal(m: &ComplexMatrix, tol: &Tolerance) -> Result<ComplexMatrix> {
    Ok(polar(m, tol)?.duggal())
}
