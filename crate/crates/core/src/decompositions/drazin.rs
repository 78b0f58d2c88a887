use serde::{Deserialize, Serialize};

use super::normalize_column_phases;
use crate::error::{OplabError, Result};
use crate::matrix_core::{numerical_rank, operator_norm, pinv_from_svd, svd, ComplexMatrix, Tolerance};

/// Drazin index together with the rank profile that decided it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DrazinIndex {
    pub index: usize,
    /// `ranks[k]` is the numerical rank of `T^k`, for `k = 0..=index + 1`.
    pub ranks: Vec<usize>,
    /// Some singular value of a power sat within a factor of ten of the
    /// rank cutoff, so the rank decision is fragile.
    pub ill_conditioned: bool,
}

/// Rank cutoff for `T^k`: `rel_eps·‖T‖^k + abs_eps`.
///
/// Scaling by `‖T‖^k` rather than `σ_max(T^k)` keeps roundoff in the powers of
/// a nilpotent part from being counted as rank.
pub(crate) fn power_cutoff(norm_t: f64, k: usize, tol: &Tolerance) -> f64 {
    tol.bound(norm_t.powi(k as i32))
}

fn near_cliff(sigma: &[f64], cutoff: f64) -> bool {
    cutoff > 0.0 && sigma.iter().any(|&s| s > cutoff / 10.0 && s < cutoff * 10.0)
}

fn require_square(t: &ComplexMatrix) -> Result<()> {
    if t.is_square() {
        Ok(())
    } else {
        Err(OplabError::Dimension(format!("expected a square matrix, got {}x{}", t.rows(), t.cols())))
    }
}

/// Smallest `k ≥ 0` with `rank(T^{k+1}) = rank(T^k)`; zero iff `T` is invertible.
pub fn drazin_index(t: &ComplexMatrix, tol: &Tolerance) -> Result<DrazinIndex> {
    require_square(t)?;
    let d = t.rows();
    let norm_t = operator_norm(t);
    let mut ranks = vec![d];
    let mut ill_conditioned = false;
    let mut power = ComplexMatrix::identity(d);
    for k in 1..=d + 1 {
        power = &power * t;
        let cutoff = power_cutoff(norm_t, k, tol);
        let dec = svd(&power)?;
        ill_conditioned |= near_cliff(&dec.sigma, cutoff);
        ranks.push(numerical_rank(&dec.sigma, cutoff));
        if ranks[k] == ranks[k - 1] {
            return Ok(DrazinIndex { index: k - 1, ranks, ill_conditioned });
        }
    }
    // Exact ranks stabilize by k = d; getting here means roundoff made them oscillate.
    Err(OplabError::Decomposition(format!("rank sequence {ranks:?} of the powers never stabilized")))
}

/// Residual norms of the three defining identities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DrazinResiduals {
    /// ‖T_d·T − T·T_d‖
    pub commutator: f64,
    /// ‖T_d²·T − T_d‖
    pub outer: f64,
    /// ‖T^{p+1}·T_d − T^p‖
    pub power: f64,
}

impl DrazinResiduals {
    pub fn max(&self) -> f64 {
        self.commutator.max(self.outer).max(self.power)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DrazinInverse {
    pub inverse: ComplexMatrix,
    pub index: usize,
    pub residuals: DrazinResiduals,
    pub ill_conditioned: bool,
}

pub fn drazin_residuals(t: &ComplexMatrix, td: &ComplexMatrix, index: usize) -> DrazinResiduals {
    let tp = t.pow(index);
    DrazinResiduals {
        commutator: operator_norm(&(td * t - t * td)),
        outer: operator_norm(&(&(td * td) * t - td)),
        power: operator_norm(&(&(&tp * t) * td - &tp)),
    }
}

/// Drazin inverse `T_d = T^k (T^{2k+1})^† T^k`, `k` the Drazin index.
///
/// The pseudo-inverse keeps exactly `rank(T^k)` singular triplets of
/// `T^{2k+1}`, the rank it must have once the rank sequence has stabilized.
pub fn drazin_inverse(t: &ComplexMatrix, tol: &Tolerance) -> Result<DrazinInverse> {
    let idx = drazin_index(t, tol)?;
    let k = idx.index;
    let rank = idx.ranks[k];
    let tk = t.pow(k);
    let big = t.pow(2 * k + 1);
    let dec = svd(&big)?;
    let pinv = pinv_from_svd(&dec, rank, big.rows(), big.cols());
    let inverse = &(&tk * &pinv) * &tk;
    let residuals = drazin_residuals(t, &inverse, k);
    let scale = 1.0 + operator_norm(t).powi(2 * k as i32 + 1);
    let limit = 1e3 * tol.bound(scale);
    if residuals.max() > limit {
        return Err(OplabError::Numerical {
            message: format!("Drazin identities violated beyond {limit:e}"),
            residuals: vec![residuals.commutator, residuals.outer, residuals.power],
        });
    }
    Ok(DrazinInverse { inverse, index: k, residuals, ill_conditioned: idx.ill_conditioned })
}

/// `T = T₁ ⊕ T₂` on `range(T^p) ⊕ ker(T^p)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoreNilpotent {
    pub index: usize,
    /// Orthonormal basis of `range(T^p)` followed by one of `ker(T^p)`.
    pub basis: ComplexMatrix,
    pub t1: ComplexMatrix,
    pub t2: ComplexMatrix,
    /// Whether `range(T^p) ⊥ ker(T^p)`.
    pub orthogonal: bool,
    /// ‖R*K‖ for the two orthonormal bases.
    pub cross_gram: f64,
    /// Largest off-diagonal block of `basis⁻¹·T·basis`.
    pub coupling_residual: f64,
    /// ‖t2^p‖.
    pub nilpotent_residual: f64,
    /// ‖basis·diag(t1, t2)·basis⁻¹ − T‖.
    pub reconstruction_residual: f64,
    pub ill_conditioned: bool,
}

impl CoreNilpotent {
    pub fn core_dim(&self) -> usize {
        self.t1.rows()
    }

    pub fn nilpotent_dim(&self) -> usize {
        self.t2.rows()
    }
}

pub fn core_nilpotent(t: &ComplexMatrix, tol: &Tolerance) -> Result<CoreNilpotent> {
    let idx = drazin_index(t, tol)?;
    let p = idx.index;
    let d = t.rows();
    let r = idx.ranks[p];
    let dec = svd(&t.pow(p))?;
    let range = normalize_column_phases(&dec.u.columns(0, r));
    let kernel = normalize_column_phases(&dec.v.columns(r, d - r));
    let basis = ComplexMatrix::hstack(&range, &kernel)?;

    let basis_sigma = svd(&basis)?.sigma;
    let smallest = basis_sigma.last().copied().unwrap_or(1.0);
    if smallest <= 1e3 * tol.bound(1.0) {
        return Err(OplabError::Decomposition(format!(
            "range and kernel of T^{p} are not numerically complementary (σ_min of basis {smallest:e})"
        )));
    }
    let inv = basis
        .try_inverse()
        .ok_or_else(|| OplabError::Decomposition("core-nilpotent basis is singular".into()))?;
    let conj = &(&inv * t) * &basis;
    let t1 = conj.submatrix(0, 0, r, r);
    let t2 = conj.submatrix(r, r, d - r, d - r);
    let coupling_residual = operator_norm(&conj.submatrix(0, r, r, d - r))
        .max(operator_norm(&conj.submatrix(r, 0, d - r, r)));
    let cross_gram = operator_norm(&(range.adjoint() * &kernel));
    let nilpotent_residual = operator_norm(&t2.pow(p));
    let rebuilt = &(&basis * &t1.direct_sum(&t2)) * &inv;
    let reconstruction_residual = operator_norm(&(rebuilt - t));

    Ok(CoreNilpotent {
        index: p,
        basis,
        t1,
        t2,
        orthogonal: cross_gram <= tol.widened(100.0).bound(1.0),
        cross_gram,
        coupling_residual,
        nilpotent_residual,
        reconstruction_residual,
        ill_conditioned: idx.ill_conditioned,
    })
}
