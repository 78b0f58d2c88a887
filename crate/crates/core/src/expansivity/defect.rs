use serde::{Deserialize, Serialize};

use crate::error::{OplabError, Result};
use crate::matrix_core::{
    definiteness, definiteness_at_scale, operator_norm, sqrt_psd, Complex64, ComplexMatrix, Definiteness,
    DefinitenessVerdict, Tolerance,
};

/// Largest order for which every `C(m, j)` fits in a `u64`.
pub const MAX_ORDER: u32 = 62;

/// Relative agreement required between the binomial sum and the iterated map.
const CROSS_CHECK_REL: f64 = 1e-10;

/// Inputs of `Δᵐ_{S*,S}(P)` with `S = Tⁿ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectSpec {
    pub t: ComplexMatrix,
    /// Hermitian weight; PSD is not required here.
    pub p: ComplexMatrix,
    pub m: u32,
    /// The operator is `Tⁿ`; `n = 1` is the plain defect.
    pub n: u32,
}

impl DefectSpec {
    pub fn new(t: ComplexMatrix, p: ComplexMatrix, m: u32) -> Self {
        Self { t, p, m, n: 1 }
    }

    pub fn with_power(mut self, n: u32) -> Self {
        self.n = n;
        self
    }

    fn validate(&self, tol: &Tolerance) -> Result<()> {
        if !self.t.is_square() || !self.p.is_square() || self.t.rows() != self.p.rows() {
            return Err(OplabError::Dimension(format!(
                "operator {}x{} and weight {}x{} must be square of equal size",
                self.t.rows(),
                self.t.cols(),
                self.p.rows(),
                self.p.cols()
            )));
        }
        if self.m == 0 || self.m > MAX_ORDER {
            return Err(OplabError::Precondition(format!("order m = {} outside 1..={MAX_ORDER}", self.m)));
        }
        if self.n == 0 {
            return Err(OplabError::Precondition("power n must be at least 1".into()));
        }
        let herm_defect = operator_norm(&(&self.p - self.p.adjoint()));
        if herm_defect > tol.bound(operator_norm(&self.p)) {
            return Err(OplabError::NotHermitian { defect_norm: herm_defect });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Class {
    Expansive,
    Contractive,
    Isometric,
}

/// Classes implied by a verdict. ZERO counts as all three.
pub fn classes_of(verdict: Definiteness) -> Vec<Class> {
    let mut out = Vec::new();
    if verdict.is_nsd() {
        out.push(Class::Expansive);
    }
    if verdict.is_psd() {
        out.push(Class::Contractive);
    }
    if verdict == Definiteness::Zero {
        out.push(Class::Isometric);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectResult {
    pub m: u32,
    /// `Δᵐ(P)`, exactly Hermitian after symmetrization.
    pub delta: ComplexMatrix,
    pub verdict: DefinitenessVerdict,
    pub classes: Vec<Class>,
    /// `Σⱼ C(m,j)·‖S*ʲ P Sʲ‖_F`, the size of the terms that cancel in the sum.
    /// The definiteness tolerance is relative to this.
    pub term_scale: f64,
    /// ‖binomial sum − iterated map‖.
    pub cross_check_residual: f64,
    /// `‖P‖·(1 + ‖S‖²)ᵐ`, the scale the cross-check is relative to.
    pub cross_check_scale: f64,
}

impl DefectResult {
    pub fn is_expansive(&self) -> bool {
        self.verdict.verdict.is_nsd()
    }

    pub fn is_contractive(&self) -> bool {
        self.verdict.verdict.is_psd()
    }

    pub fn is_isometric(&self) -> bool {
        self.verdict.verdict == Definiteness::Zero
    }

    /// Tolerance applied to the eigenvalues of `delta`.
    pub fn eigen_threshold(&self, tol: &Tolerance) -> f64 {
        let v = &self.verdict;
        tol.bound(v.min_eig.abs().max(v.max_eig.abs()).max(self.term_scale))
    }
}

/// Exact `C(m, j)` for `m ≤ 62`.
pub fn binomial(m: u32, j: u32) -> u64 {
    assert!(m <= MAX_ORDER && j <= m);
    let j = j.min(m - j) as u64;
    let mut acc: u64 = 1;
    for i in 0..j {
        // acc·(m − i) is divisible by (i + 1) and stays below 2⁶⁴ for m ≤ 62.
        acc = acc * (m as u64 - i) / (i + 1);
    }
    acc
}

/// `Σⱼ (−1)ʲ C(m,j)·S*ʲ·P·Sʲ` and the term scale.
fn binomial_sum(s: &ComplexMatrix, p: &ComplexMatrix, m: u32) -> (ComplexMatrix, f64) {
    let d = s.rows();
    let mut total = ComplexMatrix::zeros(d, d);
    let mut scale = 0.0;
    let mut power = ComplexMatrix::identity(d);
    for j in 0..=m {
        if j > 0 {
            power = &power * s;
        }
        let term = &(&power.adjoint() * p) * &power;
        let coeff = binomial(m, j) as f64;
        scale += coeff * term.frobenius_norm();
        let signed = if j % 2 == 0 { coeff } else { -coeff };
        total = total + term.scale(signed);
    }
    (total, scale)
}

/// `m`-fold application of `X ↦ X − S*·X·S` to `P`.
fn iterated_map(s: &ComplexMatrix, p: &ComplexMatrix, m: u32) -> ComplexMatrix {
    let adj = s.adjoint();
    (0..m).fold(p.clone(), |x, _| {
        let sandwich = &(&adj * &x) * s;
        x - sandwich
    })
}

/// Computes `Δᵐ(P)` twice (binomial sum and iterated map), cross-checks the
/// two, and classifies the symmetrized binomial result.
pub fn defect(spec: &DefectSpec, tol: &Tolerance) -> Result<DefectResult> {
    spec.validate(tol)?;
    let s = spec.t.pow(spec.n as usize);
    let (sum, term_scale) = binomial_sum(&s, &spec.p, spec.m);
    let iterated = iterated_map(&s, &spec.p, spec.m);

    let cross_check_residual = operator_norm(&(&sum - &iterated));
    let norm_s = operator_norm(&s);
    let cross_check_scale = operator_norm(&spec.p) * (1.0 + norm_s * norm_s).powi(spec.m as i32);
    let allowed = CROSS_CHECK_REL.max(tol.rel_eps) * cross_check_scale + tol.abs_eps;
    if cross_check_residual > allowed {
        return Err(OplabError::Numerical {
            message: format!("binomial sum and iterated map disagree beyond {allowed:e}"),
            residuals: vec![cross_check_residual, cross_check_scale],
        });
    }

    let delta = sum.hermitian_part();
    let verdict = definiteness_at_scale(&delta, tol, term_scale)?;
    Ok(DefectResult {
        m: spec.m,
        classes: classes_of(verdict.verdict),
        delta,
        verdict,
        term_scale,
        cross_check_residual,
        cross_check_scale,
    })
}

/// `Δ̃ᵐ(P) = (L_{T*}R_T − I)ᵐ(P) = (−1)ᵐ·Δᵐ(P)`, by sign flip of [`defect`].
///
/// The verdict and classes describe the sign of the returned (flipped) matrix.
pub fn defect_tilde(spec: &DefectSpec, tol: &Tolerance) -> Result<DefectResult> {
    let mut r = defect(spec, tol)?;
    if spec.m % 2 == 1 {
        r.delta = -r.delta;
        let v = r.verdict;
        r.verdict = DefinitenessVerdict {
            is_hermitian: v.is_hermitian,
            min_eig: -v.max_eig,
            max_eig: -v.min_eig,
            verdict: match v.verdict {
                Definiteness::Psd => Definiteness::Nsd,
                Definiteness::Nsd => Definiteness::Psd,
                other => other,
            },
        };
        r.classes = classes_of(r.verdict.verdict);
    }
    Ok(r)
}

fn require_psd(p: &ComplexMatrix, tol: &Tolerance) -> Result<DefinitenessVerdict> {
    let v = definiteness(p, tol)?;
    if !v.verdict.is_psd() {
        return Err(OplabError::Domain(format!("weight must be PSD (min eigenvalue {:e})", v.min_eig)));
    }
    Ok(v)
}

/// ‖T*PT − P‖.
pub fn p_isometry_residual(t: &ComplexMatrix, p: &ComplexMatrix) -> f64 {
    operator_norm(&(&(&t.adjoint() * p) * t - p))
}

/// `T*PT = P` within `rel_eps·(1 + ‖P‖)`; `P` must be PSD.
pub fn is_p_isometric(t: &ComplexMatrix, p: &ComplexMatrix, tol: &Tolerance) -> Result<bool> {
    if !t.is_square() || t.rows() != p.rows() {
        return Err(OplabError::Dimension("operator and weight sizes differ".into()));
    }
    require_psd(p, tol)?;
    Ok(p_isometry_residual(t, p) <= tol.rel_eps * (1.0 + operator_norm(p)))
}

/// `(m,P)`-isometric: the defect verdict is ZERO.
pub fn is_mp_isometric(spec: &DefectSpec, tol: &Tolerance) -> Result<bool> {
    Ok(defect(spec, tol)?.is_isometric())
}

/// The P-seminorm `‖P^{1/2}x‖`.
pub fn seminorm_p(x: &[Complex64], p: &ComplexMatrix, tol: &Tolerance) -> Result<f64> {
    if x.len() != p.rows() || !p.is_square() {
        return Err(OplabError::Dimension(format!("vector of length {} against a {}x{} weight", x.len(), p.rows(), p.cols())));
    }
    require_psd(p, tol)?;
    let root = sqrt_psd(p, tol)?;
    Ok(root.matvec(x).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
}

/// `(‖P^{-1/2}‖⁻², ‖P^{1/2}‖²)`, the constants with
/// `lo·‖x‖² ≤ ‖x‖²_P ≤ hi·‖x‖²`; `None` when `P` is not invertible.
pub fn norm_equivalence_bounds(p: &ComplexMatrix, tol: &Tolerance) -> Result<Option<(f64, f64)>> {
    let v = require_psd(p, tol)?;
    if v.min_eig <= tol.bound(v.max_eig) {
        return Ok(None);
    }
    Ok(Some((v.min_eig, v.max_eig)))
}
