//! Spectral primitives: Hermitian eigenanalysis, definiteness verdicts, SVD
//! based norms and pseudo-inverses, and the general (Schur) spectrum.
//!
//! Eigen and Schur kernels come from `nalgebra`, the SVD from `faer`; this
//! module fixes the conventions layered on top (sorting, rank cutoffs,
//! tolerance scaling).

use nalgebra::{DMatrix, Schur, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{ComplexMatrix, Tolerance};
use crate::error::{OplabError, Result};

/// Sign class of a Hermitian matrix in the Loewner order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Definiteness {
    #[serde(rename = "PSD")]
    Psd,
    #[serde(rename = "NSD")]
    Nsd,
    #[serde(rename = "ZERO")]
    Zero,
    #[serde(rename = "INDEFINITE")]
    Indefinite,
}

impl Definiteness {
    /// `≥ 0` holds (PSD or ZERO).
    pub fn is_psd(self) -> bool {
        matches!(self, Definiteness::Psd | Definiteness::Zero)
    }

    /// `≤ 0` holds (NSD or ZERO).
    pub fn is_nsd(self) -> bool {
        matches!(self, Definiteness::Nsd | Definiteness::Zero)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefinitenessVerdict {
    pub is_hermitian: bool,
    pub min_eig: f64,
    pub max_eig: f64,
    pub verdict: Definiteness,
}

/// Thin SVD `M = U·diag(σ)·V*` with σ sorted descending.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub sigma: Vec<f64>,
    pub v: ComplexMatrix,
}

pub fn svd(m: &ComplexMatrix) -> Result<Svd> {
    let k = m.rows().min(m.cols());
    if k == 0 {
        return Ok(Svd {
            u: ComplexMatrix::zeros(m.rows(), 0),
            sigma: Vec::new(),
            v: ComplexMatrix::zeros(m.cols(), 0),
        });
    }
    let src = faer::Mat::<Complex64>::from_fn(m.rows(), m.cols(), |i, j| m.inner()[(i, j)]);
    let dec = if m.is_square() { src.svd() } else { src.thin_svd() }
        .map_err(|e| OplabError::Numerical { message: format!("SVD did not converge: {e:?}"), residuals: vec![] })?;
    let (u, v, s) = (dec.U(), dec.V(), dec.S().column_vector());
    Ok(Svd {
        u: ComplexMatrix::from_inner(DMatrix::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, j)])),
        sigma: (0..k).map(|i| s[i].re).collect(),
        v: ComplexMatrix::from_inner(DMatrix::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)])),
    })
}

/// Number of singular values strictly above `cutoff`.
pub fn numerical_rank(sigma: &[f64], cutoff: f64) -> usize {
    sigma.iter().filter(|&&s| s > cutoff).count()
}

fn require_square(m: &ComplexMatrix, what: &str) -> Result<()> {
    if m.is_square() {
        Ok(())
    } else {
        Err(OplabError::Dimension(format!("{what} needs a square matrix, got {}x{}", m.rows(), m.cols())))
    }
}

/// Largest singular value; zero for empty matrices.
pub fn operator_norm(m: &ComplexMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    svd(m).map(|s| s.sigma[0]).unwrap_or_else(|_| m.frobenius_norm())
}

/// Full spectrum from the complex Schur form. Finite-dimensional, so this is
/// also the approximate point spectrum.
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<Complex64>> {
    require_square(m, "eigenvalues")?;
    let d = m.rows();
    if d == 0 {
        return Ok(Vec::new());
    }
    let schur = Schur::try_new(m.inner().clone(), f64::EPSILON, 10_000 * (d + 1)).ok_or_else(|| {
        OplabError::Numerical { message: "Schur iteration did not converge".into(), residuals: vec![] }
    })?;
    let (_, t) = schur.unpack();
    Ok((0..d).map(|i| t[(i, i)]).collect())
}

pub fn spectral_radius(m: &ComplexMatrix) -> Result<f64> {
    Ok(eigenvalues(m)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Hermitian check: `‖M − M*‖ ≤ rel_eps·‖M‖ + abs_eps`.
pub fn is_hermitian(m: &ComplexMatrix, tol: &Tolerance) -> Result<bool> {
    require_square(m, "is_hermitian")?;
    Ok(hermitian_defect(m) <= tol.bound(operator_norm(m)))
}

fn hermitian_defect(m: &ComplexMatrix) -> f64 {
    operator_norm(&(m - m.adjoint()))
}

/// Eigenpairs of the Hermitian part of `m`, eigenvalues ascending.
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    require_square(m, "hermitian_eigen")?;
    let d = m.rows();
    if d == 0 {
        return Ok((Vec::new(), ComplexMatrix::zeros(0, 0)));
    }
    let sym = m.hermitian_part();
    let eig = SymmetricEigen::try_new(sym.into_inner(), f64::EPSILON, 0).ok_or_else(|| {
        OplabError::Numerical { message: "Hermitian eigensolver did not converge".into(), residuals: vec![] }
    })?;
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = nalgebra::DMatrix::zeros(d, d);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok((values, ComplexMatrix::from_inner(vectors)))
}

/// Loewner-order verdict with the default spectral scale of one.
pub fn definiteness(m: &ComplexMatrix, tol: &Tolerance) -> Result<DefinitenessVerdict> {
    definiteness_at_scale(m, tol, 1.0)
}

/// Loewner-order verdict where the tolerance floor is `rel_eps·scale`.
///
/// Callers that build `m` out of large cancelling terms pass the magnitude of
/// those terms as `scale`, so that cancellation noise is not mistaken for sign.
pub fn definiteness_at_scale(m: &ComplexMatrix, tol: &Tolerance, scale: f64) -> Result<DefinitenessVerdict> {
    require_square(m, "definiteness")?;
    let defect = hermitian_defect(m);
    if defect > tol.bound(operator_norm(m).max(scale)) {
        return Err(OplabError::NotHermitian { defect_norm: defect });
    }
    let (values, _) = hermitian_eigen(m)?;
    let min_eig = values.first().copied().unwrap_or(0.0);
    let max_eig = values.last().copied().unwrap_or(0.0);
    let threshold = tol.bound(min_eig.abs().max(max_eig.abs()).max(scale));
    let psd = min_eig >= -threshold;
    let nsd = max_eig <= threshold;
    let verdict = match (psd, nsd) {
        (true, true) => Definiteness::Zero,
        (true, false) => Definiteness::Psd,
        (false, true) => Definiteness::Nsd,
        (false, false) => Definiteness::Indefinite,
    };
    Ok(DefinitenessVerdict { is_hermitian: true, min_eig, max_eig, verdict })
}

/// Principal square root of a PSD matrix; eigenvalues within tolerance of
/// zero from below are clamped.
pub fn sqrt_psd(m: &ComplexMatrix, tol: &Tolerance) -> Result<ComplexMatrix> {
    let verdict = definiteness(m, tol)?;
    if !verdict.verdict.is_psd() {
        return Err(OplabError::Domain(format!(
            "square root of a non-PSD matrix (min eigenvalue {:e})",
            verdict.min_eig
        )));
    }
    psd_function(m, f64::sqrt)
}

/// `V·f(Λ)·V*` for the Hermitian part of `m`, with negative eigenvalues
/// clamped to zero before `f` is applied.
pub(crate) fn psd_function(m: &ComplexMatrix, f: impl Fn(f64) -> f64) -> Result<ComplexMatrix> {
    let (values, vectors) = hermitian_eigen(m)?;
    let scaled: Vec<Complex64> = values.iter().map(|&l| Complex64::new(f(l.max(0.0)), 0.0)).collect();
    let out = &(&vectors * &ComplexMatrix::diagonal(&scaled)) * &vectors.adjoint();
    Ok(out.hermitian_part())
}

/// Moore–Penrose inverse; singular values below `rel_eps·σ_max` count as zero.
pub fn moore_penrose(m: &ComplexMatrix, tol: &Tolerance) -> ComplexMatrix {
    let Ok(dec) = svd(m) else {
        return ComplexMatrix::zeros(m.cols(), m.rows());
    };
    let sigma_max = dec.sigma.first().copied().unwrap_or(0.0);
    let rank = numerical_rank(&dec.sigma, tol.rel_eps * sigma_max);
    pinv_from_svd(&dec, rank, m.rows(), m.cols())
}

/// Pseudo-inverse keeping exactly the `rank` leading singular triplets.
pub(crate) fn pinv_from_svd(dec: &Svd, rank: usize, rows: usize, cols: usize) -> ComplexMatrix {
    if rank == 0 {
        return ComplexMatrix::zeros(cols, rows);
    }
    let inv: Vec<Complex64> = dec.sigma[..rank].iter().map(|&s| Complex64::new(1.0 / s, 0.0)).collect();
    let v = dec.v.columns(0, rank);
    let u = dec.u.columns(0, rank);
    &(&v * &ComplexMatrix::diagonal(&inv)) * &u.adjoint()
}
