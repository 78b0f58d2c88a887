use serde::{Deserialize, Serialize};
use serde_json::json;

use super::verifiers::verdict_json;
use super::{power_coefficients, TheoremVerdict};
use crate::decompositions::{polar, range_kernel_split};
use crate::error::{OplabError, Result};
use crate::expansivity::{defect, DefectResult, DefectSpec};
use crate::matrix_core::{
    block_compose, definiteness, hermitian_eigen, operator_norm, BlockGrid, Complex64, ComplexMatrix,
    DefinitenessVerdict, Tolerance,
};

/// The operators built from `Tⁿ = [[T₁ⁿ, X], [0, 0]]` and `T₁ⁿ = U₁P₁`,
/// all in the basis of `range(Tⁿ) ⊕ ker(T*ⁿ)`:
///
/// ```text
/// A = [[P₁^{1/2}U₁P₁^{1/2}, P₁^{1/2}X], [0, 0]]    B = [[P₁U₁, P₁X], [0, 0]]
/// D = [[I, U₁*X], [X*U₁, X*X]]                       C = Q₁·D·Q₁
/// Q₁ = P₁^{1/2} ⊕ I₂                                 Q = Q₁² = P₁ ⊕ I₂
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thm10Bundle {
    pub n: usize,
    pub m: u32,
    pub d1: usize,
    pub d2: usize,
    pub basis: ComplexMatrix,
    pub t1n: ComplexMatrix,
    pub x: ComplexMatrix,
    pub u1: ComplexMatrix,
    pub p1: ComplexMatrix,
    pub a: ComplexMatrix,
    pub b: ComplexMatrix,
    pub c: ComplexMatrix,
    pub d: ComplexMatrix,
    pub q1: ComplexMatrix,
    pub q: ComplexMatrix,
    /// `Δᵐ_{A*,A}(C)`.
    pub a_defect: DefinitenessVerdict,
    /// `Δᵐ_{B*,B}(D)`.
    pub b_defect: DefinitenessVerdict,
    /// `[[I₁, X], [X*, X*X]] − I`.
    pub side_condition: DefinitenessVerdict,
    /// `Δᵐ_{B*,B}(I)`; asserted NSD only when the side condition holds.
    pub b_plain_defect: DefinitenessVerdict,
    /// `Δᵐ_{A*,A}(Q)`; asserted NSD only when the side condition holds.
    pub a_q_defect: DefinitenessVerdict,
}

impl Thm10Bundle {
    pub fn side_condition_holds(&self) -> bool {
        self.side_condition.verdict.is_psd()
    }
}

fn compose(b11: ComplexMatrix, b12: ComplexMatrix, b21: ComplexMatrix, b22: ComplexMatrix) -> Result<ComplexMatrix> {
    block_compose(&BlockGrid { b11, b12, b21, b22 })
}

fn weighted(values: &[f64], vectors: &ComplexMatrix, f: impl Fn(f64) -> f64) -> ComplexMatrix {
    let diag: Vec<Complex64> = values.iter().map(|&l| Complex64::new(f(l), 0.0)).collect();
    (&(vectors * &ComplexMatrix::diagonal(&diag)) * &vectors.adjoint()).hermitian_part()
}

fn defect_of(t: &ComplexMatrix, p: &ComplexMatrix, m: u32, tol: &Tolerance) -> Result<DefectResult> {
    defect(&DefectSpec::new(t.clone(), p.clone(), m), tol)
}

/// Builds the bundle and checks the transform theorem on it.
///
/// The premise is `T ∈ (m, |Tⁿ|²)`-expansive. When it fails and the
/// construction is impossible (`T₁ⁿ` singular), the bundle is `None` and the
/// verdict is vacuous.
pub fn thm10_construct(
    t: &ComplexMatrix,
    n: usize,
    m: u32,
    tol: &Tolerance,
) -> Result<(Option<Thm10Bundle>, TheoremVerdict)> {
    let tn = t.pow(n);
    let weight = (tn.adjoint() * &tn).hermitian_part();
    let premise = defect_of(t, &weight, m, tol)?;
    let premises_met = premise.is_expansive();

    let split = range_kernel_split(t, n, tol)?;
    let (d1, d2) = (split.d1, split.d2);
    let t1n = split.t1n().clone();
    let x = split.x().clone();
    let parts = polar(&t1n, tol)?;
    let (p1_eig, p1_vec) = hermitian_eigen(&parts.p)?;
    let p1_min = p1_eig.first().copied().unwrap_or(1.0);
    if d1 > 0 && p1_min <= 1e3 * tol.bound(operator_norm(&parts.p)) {
        if !premises_met {
            let witness = json!({ "m": m, "n": n, "premise": verdict_json(&premise.verdict), "constructed": false });
            return Ok((None, TheoremVerdict::new("range_kernel_transforms", false, true, witness)));
        }
        return Err(OplabError::Decomposition(format!("T₁ⁿ is singular (σ_min = {p1_min:e}); no polar split")));
    }

    let u1 = parts.u.clone();
    let p1 = parts.p.clone();
    let p1_half = parts.p_sqrt.clone();
    let p1_inv_half = weighted(&p1_eig, &p1_vec, |l| 1.0 / l.sqrt());
    let i2 = ComplexMatrix::identity(d2);
    let z21 = ComplexMatrix::zeros(d2, d1);
    let z22 = ComplexMatrix::zeros(d2, d2);

    let a = compose(parts.aluthge(), &p1_half * &x, z21.clone(), z22.clone())?;
    let b = compose(parts.duggal(), &p1 * &x, z21.clone(), z22.clone())?;
    let ux = &u1.adjoint() * &x;
    let d = compose(ComplexMatrix::identity(d1), ux.clone(), ux.adjoint(), x.adjoint() * &x)?.hermitian_part();
    let q1 = p1_half.direct_sum(&i2);
    let q1_inv = p1_inv_half.direct_sum(&i2);
    let q = p1.direct_sum(&i2);
    let c = (&(&q1 * &d) * &q1).hermitian_part();

    let a_defect = defect_of(&a, &c, m, tol)?;
    let b_defect = defect_of(&b, &d, m, tol)?;
    let side_matrix = compose(ComplexMatrix::identity(d1), x.clone(), x.adjoint(), x.adjoint() * &x)?
        - ComplexMatrix::identity(d1 + d2);
    let side_condition = definiteness(&side_matrix.hermitian_part(), tol)?;
    let b_plain = defect_of(&b, &ComplexMatrix::identity(d1 + d2), m, tol)?;
    let a_q = defect_of(&a, &q, m, tol)?;

    // Conclusions may exceed zero by what the premise does, carried through
    // the power expansion and the congruences B ↦ M⁻¹·(·)·M⁻¹, A ↦ Q₁·(·)·Q₁.
    let excess = if premises_met { premise.verdict.max_eig.max(0.0) } else { 0.0 };
    let alpha_sum: f64 = power_coefficients(m, n as u32).iter().sum();
    let norm_t = operator_norm(t).max(1.0);
    let m_inv = if d1 > 0 { (1.0 / p1_min).max(1.0) } else { 1.0 };
    let q1_sq = operator_norm(&q);
    let carried_b = m_inv * m_inv * alpha_sum * norm_t.powi(2 * m as i32 * (n as i32 - 1)) * excess;
    let allowed_b = b_defect.eigen_threshold(tol) + carried_b;
    let allowed_a = a_defect.eigen_threshold(tol) + q1_sq * carried_b;
    let side_slack = (-side_condition.min_eig).max(0.0);
    let allowed_b_plain = b_plain.eigen_threshold(tol) + carried_b + side_slack;
    let allowed_a_q = a_q.eigen_threshold(tol) + q1_sq * (carried_b + side_slack);

    let assertion_i = a_defect.verdict.max_eig <= allowed_a;
    let assertion_ii = b_defect.verdict.max_eig <= allowed_b;
    let side_holds = side_condition.verdict.is_psd();
    let assertion_iii = b_plain.verdict.max_eig <= allowed_b_plain;
    let assertion_iv = a_q.verdict.max_eig <= allowed_a_q;

    let scale_b = 1.0 + operator_norm(&b).powi(2) * (1.0 + operator_norm(&d));
    let identity_tol = tol.widened(100.0);
    let residual = |lhs: ComplexMatrix, rhs: ComplexMatrix| operator_norm(&(lhs - rhs));
    let ac = residual(&(&a.adjoint() * &c) * &a, &(&a.adjoint() * &q) * &a);
    let bd = residual(&(&b.adjoint() * &d) * &b, b.adjoint() * &b);
    let similarity = residual(a.clone(), &(&q1_inv * &b) * &q1);
    let congruence = residual(c.clone(), &(&q1 * &d) * &q1);
    let d_verdict = definiteness(&d, tol)?;
    let scale_a = scale_b * q1_sq.max(1.0) * operator_norm(&q1_inv).powi(2).max(1.0);
    let identities_ok = ac <= identity_tol.bound(scale_a)
        && bd <= identity_tol.bound(scale_b)
        && similarity <= identity_tol.bound(operator_norm(&b) * operator_norm(&q1) * operator_norm(&q1_inv))
        && congruence <= identity_tol.bound(operator_norm(&c).max(1.0))
        && d_verdict.verdict.is_psd();

    let holds = assertion_i && assertion_ii && identities_ok && (!side_holds || (assertion_iii && assertion_iv));
    let witness = json!({
        "m": m,
        "n": n,
        "d1": d1,
        "d2": d2,
        "constructed": true,
        "premise": verdict_json(&premise.verdict),
        "x_norm": operator_norm(&x),
        "a_c_defect": verdict_json(&a_defect.verdict),
        "b_d_defect": verdict_json(&b_defect.verdict),
        "allowed_a_c": allowed_a,
        "allowed_b_d": allowed_b,
        "assertion_i": assertion_i,
        "assertion_ii": assertion_ii,
        "side_condition": verdict_json(&side_condition),
        "side_condition_holds": side_holds,
        "b_plain_defect": verdict_json(&b_plain.verdict),
        "a_q_defect": verdict_json(&a_q.verdict),
        "assertion_iii": assertion_iii,
        "assertion_iv": assertion_iv,
        "identities": {
            "aca_minus_aqa": ac,
            "bdb_minus_bb": bd,
            "a_minus_q1inv_b_q1": similarity,
            "c_minus_q1_d_q1": congruence,
            "d_min_eig": d_verdict.min_eig,
            "ok": identities_ok,
        },
    });
    let bundle = Thm10Bundle {
        n,
        m,
        d1,
        d2,
        basis: split.basis,
        t1n,
        x,
        u1,
        p1,
        a,
        b,
        c,
        d,
        q1,
        q,
        a_defect: a_defect.verdict,
        b_defect: b_defect.verdict,
        side_condition,
        b_plain_defect: b_plain.verdict,
        a_q_defect: a_q.verdict,
    };
    Ok((Some(bundle), TheoremVerdict::new("range_kernel_transforms", premises_met, holds, witness)))
}
