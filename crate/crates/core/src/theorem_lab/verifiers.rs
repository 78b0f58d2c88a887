use serde_json::{json, Value};

use super::TheoremVerdict;
use crate::decompositions::{ando_check, core_nilpotent, drazin_index};
use crate::error::{OplabError, Result};
use crate::expansivity::{defect, defect_tilde, p_isometry_residual, DefectResult, DefectSpec};
use crate::matrix_core::{
    block_split, definiteness, eigenvalues, operator_norm, svd, ComplexMatrix, DefinitenessVerdict, Tolerance,
};

/// How far a premise `Δ ≤ 0` may actually sit above zero: the positive part
/// of the largest eigenvalue plus the classification threshold.
pub(crate) fn nsd_slack(r: &DefectResult, tol: &Tolerance) -> f64 {
    r.verdict.max_eig.max(0.0) + r.eigen_threshold(tol)
}

fn psd_slack(r: &DefectResult, tol: &Tolerance) -> f64 {
    (-r.verdict.min_eig).max(0.0) + r.eigen_threshold(tol)
}

pub(crate) fn verdict_json(v: &DefinitenessVerdict) -> Value {
    json!({ "verdict": v.verdict, "min_eig": v.min_eig, "max_eig": v.max_eig })
}

pub(crate) fn require_psd_weight(p: &ComplexMatrix, tol: &Tolerance) -> Result<DefinitenessVerdict> {
    let v = definiteness(p, tol)?;
    if !v.verdict.is_psd() {
        return Err(OplabError::Precondition(format!("weight must be PSD (min eigenvalue {:e})", v.min_eig)));
    }
    Ok(v)
}

/// `C(a, b)` in floating point; exact for the small arguments used here.
fn binomial_f64(a: u32, b: u32) -> f64 {
    (0..b).fold(1.0, |acc, i| acc * (a - i) as f64 / (i + 1) as f64)
}

/// Coefficients of `(1 + x + … + x^{n−1})^m`.
///
/// Since `1 − xⁿ = (1 − x)(1 + … + x^{n−1})`, these are the nonnegative
/// weights with `Δᵐ_{Tⁿ}(P) = Σⱼ αⱼ·T*ʲ·Δᵐ_T(P)·Tʲ`.
pub fn power_coefficients(m: u32, n: u32) -> Vec<f64> {
    let mut out = vec![1.0];
    for _ in 0..m {
        let mut next = vec![0.0; out.len() + n as usize - 1];
        for (i, &c) in out.iter().enumerate() {
            for slot in &mut next[i..i + n as usize] {
                *slot += c;
            }
        }
        out = next;
    }
    out
}

fn defect_of(t: &ComplexMatrix, p: &ComplexMatrix, m: u32, tol: &Tolerance) -> Result<DefectResult> {
    defect(&DefectSpec::new(t.clone(), p.clone(), m), tol)
}

/// Powers of an expansive operator stay expansive.
///
/// Besides the verdict at each power, the witness records how well the
/// expansion `Σⱼ αⱼ·T*ʲ·Δᵐ(P)·Tʲ` reproduces `Δᵐ_{Tⁿ}(P)`.
pub fn verify_power_stability(
    t: &ComplexMatrix,
    p: &ComplexMatrix,
    m: u32,
    n_max: u32,
    tol: &Tolerance,
) -> Result<TheoremVerdict> {
    if n_max < 2 {
        return Err(OplabError::Precondition(format!("n_max must be at least 2, got {n_max}")));
    }
    let base = defect_of(t, p, m, tol)?;
    let premises_met = base.is_expansive();
    let excess = if premises_met { base.verdict.max_eig.max(0.0) } else { 0.0 };
    let norm_t = operator_norm(t).max(1.0);

    let mut holds = true;
    let mut powers = Vec::new();
    for n in 2..=n_max {
        let r = defect(&DefectSpec::new(t.clone(), p.clone(), m).with_power(n), tol)?;
        let alpha = power_coefficients(m, n);
        let amplification = alpha.iter().sum::<f64>() * norm_t.powi((2 * m * (n - 1)) as i32);
        let allowed = r.eigen_threshold(tol) + amplification * excess;
        let ok = r.verdict.max_eig <= allowed;
        holds &= ok;

        let mut expansion = ComplexMatrix::zeros(t.rows(), t.cols());
        let mut tj = ComplexMatrix::identity(t.rows());
        for (j, &a) in alpha.iter().enumerate() {
            if j > 0 {
                tj = &tj * t;
            }
            expansion = expansion + (&(&tj.adjoint() * &base.delta) * &tj).scale(a);
        }
        powers.push(json!({
            "n": n,
            "defect": verdict_json(&r.verdict),
            "allowed_max_eig": allowed,
            "nsd": ok,
            "expansion_residual": operator_norm(&(&r.delta - &expansion)),
            "expansion_scale": r.term_scale,
        }));
    }
    Ok(TheoremVerdict::new(
        "power_stability",
        premises_met,
        holds,
        json!({ "m": m, "base": verdict_json(&base.verdict), "powers": powers }),
    ))
}

/// An operator with a nontrivial nilpotent part is never `m`-expansive.
pub fn verify_no_singular_expansive(t: &ComplexMatrix, m: u32, tol: &Tolerance) -> Result<TheoremVerdict> {
    let idx = drazin_index(t, tol)?;
    let premises_met = idx.index >= 1;
    let r = defect_of(t, &ComplexMatrix::identity(t.rows()), m, tol)?;
    let holds = !r.is_expansive();
    // For a unit x with Tx = 0 only the j = 0 term survives: ⟨Δx, x⟩ = 1.
    let kernel_rayleigh = if premises_met {
        let dec = svd(t)?;
        let x: Vec<_> = (0..t.rows()).map(|i| dec.v.get(i, t.rows() - 1)).collect();
        let dx = r.delta.matvec(&x);
        Some(x.iter().zip(&dx).map(|(a, b)| (a.conj() * b).re).sum::<f64>())
    } else {
        None
    };
    Ok(TheoremVerdict::new(
        "no_singular_expansive",
        premises_met,
        holds,
        json!({
            "m": m,
            "drazin_index": idx.index,
            "ranks": idx.ranks,
            "ill_conditioned": idx.ill_conditioned,
            "defect": verdict_json(&r.verdict),
            "kernel_rayleigh": kernel_rayleigh,
            // Drazin invertible and expansive: excluded by the unrestricted statement.
            "literal_reading_contradicted": !premises_met && r.is_expansive(),
        }),
    ))
}

fn nilpotency_index(t2: &ComplexMatrix, tol: &Tolerance) -> Option<usize> {
    let norm = operator_norm(t2).max(1.0);
    let mut power = ComplexMatrix::identity(t2.rows());
    for k in 1..=t2.rows() {
        power = &power * t2;
        if operator_norm(&power) <= 1e3 * tol.bound(norm.powi(k as i32)) {
            return Some(k);
        }
    }
    None
}

/// `T = T₁ ⊕ T₂` is `(m,P)`-expansive iff `P = P₁₁ ⊕ 0` and `Δ̃ᵐ_{T_d}(P) ≤ 0`.
///
/// Both directions are evaluated; `premises_met` is true when at least one
/// direction's hypothesis holds. The forward direction also checks the
/// nilpotent anchor `T₂^{*(q−1)}·P₂₂·T₂^{q−1} ≤ 0`, and the witness carries
/// the chain `T₂^{*(q−r)}P₂₂T₂^{q−r} − C(m+r−2, r−1)·anchor`.
pub fn verify_weight_decomposition(
    t1: &ComplexMatrix,
    t2: &ComplexMatrix,
    p: &ComplexMatrix,
    m: u32,
    tol: &Tolerance,
) -> Result<TheoremVerdict> {
    let (d1, d2) = (t1.rows(), t2.rows());
    if !t1.is_square() || !t2.is_square() || d1 == 0 || d2 == 0 || p.rows() != d1 + d2 || !p.is_square() {
        return Err(OplabError::Dimension(format!(
            "need square nonempty blocks and a {0}x{0} weight, got {d1}x{1}, {d2}x{2}, {3}x{4}",
            d1 + d2,
            t1.cols(),
            t2.cols(),
            p.rows(),
            p.cols()
        )));
    }
    let sigma = svd(t1)?.sigma;
    let norm_t1 = sigma[0];
    if sigma[d1 - 1] <= 1e3 * tol.bound(norm_t1) {
        return Err(OplabError::Precondition(format!("t1 is singular (σ_min = {:e})", sigma[d1 - 1])));
    }
    let q = nilpotency_index(t2, tol)
        .ok_or_else(|| OplabError::Precondition("t2 is not nilpotent".into()))?;
    require_psd_weight(p, tol)?;
    let t1_inv = t1.try_inverse().ok_or_else(|| OplabError::Precondition("t1 is singular".into()))?;

    let t = t1.direct_sum(t2);
    let td = t1_inv.direct_sum(&ComplexMatrix::zeros(d2, d2));
    let delta = defect_of(&t, p, m, tol)?;
    let tilde = defect_tilde(&DefectSpec::new(td, p.clone(), m), tol)?;
    let blocks = block_split(p, d1)?;
    let norm_p = operator_norm(p);
    let norm_p11 = operator_norm(&blocks.b11);
    let p22 = operator_norm(&blocks.b22);
    let p21 = operator_norm(&blocks.b21);
    let p12 = operator_norm(&blocks.b12);

    // Forward: (m,P)-expansive ⇒ P₂₂ = 0, P₂₁ = 0 (through Andô), Δ̃ over T_d ≤ 0.
    let forward_premise = delta.is_expansive();
    let tau = nsd_slack(&delta, tol);
    let p22_bound = (tau * (1.0 + norm_p)).sqrt() + tol.bound(norm_p);
    let p21_bound = (p22_bound * norm_p11).sqrt() + tol.bound(norm_p);
    let inv_amp = operator_norm(&t1_inv).max(1.0).powi(2 * m as i32);
    let tilde_allowed = tilde.eigen_threshold(tol) + inv_amp * delta.verdict.max_eig.max(0.0);
    let t2_anchor = t2.pow(q - 1);
    let anchor = &(&t2_anchor.adjoint() * &blocks.b22) * &t2_anchor;
    let anchor_eig = definiteness(&anchor.hermitian_part(), tol)?;
    let anchor_allowed = tau * operator_norm(t2).max(1.0).powi(2 * (q as i32 - 1)) + tol.bound(norm_p);
    let forward_conclusion = p22 <= p22_bound
        && p21 <= p21_bound
        && p12 <= p21_bound
        && tilde.verdict.max_eig <= tilde_allowed
        && anchor_eig.max_eig <= anchor_allowed;

    // Reverse: P = P₁₁ ⊕ 0 and Δ̃ over T_d ≤ 0 ⇒ (m,P)-expansive.
    let split_tol = tol.bound(norm_p);
    let reverse_premise = p22 <= split_tol && p21 <= split_tol && tilde.is_expansive();
    let norm_t = operator_norm(&t).max(1.0);
    let contamination = 2f64.powi(m as i32) * norm_t.powi(2 * m as i32) * (p22 + 2.0 * p21);
    let reverse_allowed = delta.eigen_threshold(tol)
        + norm_t1.max(1.0).powi(2 * m as i32) * tilde.verdict.max_eig.max(0.0)
        + contamination;
    let reverse_conclusion = delta.verdict.max_eig <= reverse_allowed;

    let chain: Vec<Value> = (1..=q)
        .map(|r| {
            let tr = t2.pow(q - r);
            let lhs = &(&tr.adjoint() * &blocks.b22) * &tr;
            let coeff = binomial_f64(m + r as u32 - 2, r as u32 - 1);
            let gap = (lhs - anchor.scale(coeff)).hermitian_part();
            let eig = crate::matrix_core::hermitian_eigen(&gap).map(|(v, _)| v.last().copied().unwrap_or(0.0));
            json!({ "r": r, "coefficient": coeff, "gap_max_eig": eig.unwrap_or(f64::NAN) })
        })
        .collect();
    let ando = ando_check(p, d1, tol)?;

    let holds = (!forward_premise || forward_conclusion) && (!reverse_premise || reverse_conclusion);
    Ok(TheoremVerdict::new(
        "weight_decomposition",
        forward_premise || reverse_premise,
        holds,
        json!({
            "m": m,
            "nilpotency_index": q,
            "defect": verdict_json(&delta.verdict),
            "tilde_defect_drazin": verdict_json(&tilde.verdict),
            "forward": {
                "premise": forward_premise,
                "conclusion": forward_conclusion,
                "p22_norm": p22,
                "p21_norm": p21,
                "p12_norm": p12,
                "p22_bound": p22_bound,
                "p21_bound": p21_bound,
                "tilde_allowed_max_eig": tilde_allowed,
                "anchor_max_eig": anchor_eig.max_eig,
                "anchor_allowed": anchor_allowed,
            },
            "reverse": {
                "premise": reverse_premise,
                "conclusion": reverse_conclusion,
                "allowed_max_eig": reverse_allowed,
            },
            "chain": chain,
            "ando_contraction_norm": ando.contraction_norm,
        }),
    ))
}

/// A `(2,P)`-expansive operator with an orthogonal core–nilpotent split is a P-isometry.
pub fn verify_two_expansive_isometry(t: &ComplexMatrix, p: &ComplexMatrix, tol: &Tolerance) -> Result<TheoremVerdict> {
    require_psd_weight(p, tol)?;
    let r = defect_of(t, p, 2, tol)?;
    let cn = core_nilpotent(t, tol)?;
    let premises_met = r.is_expansive() && cn.orthogonal;
    let residual = p_isometry_residual(t, p);
    let norm_p = operator_norm(p);
    let norm_t = operator_norm(t);
    let bound = (nsd_slack(&r, tol) * (1.0 + norm_p)).sqrt()
        + tol.widened(100.0).bound(norm_p * (1.0 + norm_t * norm_t));
    Ok(TheoremVerdict::new(
        "two_expansive_isometry",
        premises_met,
        residual <= bound,
        json!({
            "defect": verdict_json(&r.verdict),
            "orthogonal": cn.orthogonal,
            "cross_gram": cn.cross_gram,
            "drazin_index": cn.index,
            "isometry_residual": residual,
            "bound": bound,
        }),
    ))
}

/// `(2, T*T)`-expansive forces the invertible block to be unitary.
pub fn verify_unitary_nilpotent_structure(t: &ComplexMatrix, tol: &Tolerance) -> Result<TheoremVerdict> {
    let gram = (t.adjoint() * t).hermitian_part();
    let r = defect_of(t, &gram, 2, tol)?;
    let premises_met = r.is_expansive();
    let cn = core_nilpotent(t, tol)?;
    let k = cn.core_dim();
    let unitarity = operator_norm(&(cn.t1.adjoint() * &cn.t1 - ComplexMatrix::identity(k)));
    let norm_t = operator_norm(t);
    let bound = (nsd_slack(&r, tol) * (1.0 + norm_t * norm_t)).sqrt()
        + tol.widened(100.0).bound(1.0 + norm_t * norm_t);
    Ok(TheoremVerdict::new(
        "unitary_nilpotent_structure",
        premises_met,
        unitarity <= bound,
        json!({
            "defect": verdict_json(&r.verdict),
            "core_dim": k,
            "nilpotent_dim": cn.nilpotent_dim(),
            "drazin_index": cn.index,
            "orthogonal": cn.orthogonal,
            "coupling_residual": cn.coupling_residual,
            "nilpotent_residual": cn.nilpotent_residual,
            "unitarity_residual": unitarity,
            "bound": bound,
        }),
    ))
}

/// `(m,P)`-expansive and `(m−2,P)`-contractive ⇒ `(m−1,P)`-isometric.
pub fn verify_sandwich_isometry(t: &ComplexMatrix, p: &ComplexMatrix, m: u32, tol: &Tolerance) -> Result<TheoremVerdict> {
    if m < 2 {
        return Err(OplabError::Precondition(format!("sandwich needs m ≥ 2, got {m}")));
    }
    require_psd_weight(p, tol)?;
    let top = defect_of(t, p, m, tol)?;
    let mid = defect_of(t, p, m - 1, tol)?;
    let low = if m > 2 { Some(defect_of(t, p, m - 2, tol)?) } else { None };
    let premises_met = top.is_expansive() && low.as_ref().is_none_or(|r| r.is_contractive());
    let tau = nsd_slack(&top, tol) + low.as_ref().map_or(0.0, |r| psd_slack(r, tol));
    let scale = mid.term_scale.max(operator_norm(p));
    let residual = operator_norm(&mid.delta);
    let bound = (tau * scale.max(1.0)).sqrt() + tol.widened(100.0).bound(scale);
    Ok(TheoremVerdict::new(
        "sandwich_isometry",
        premises_met,
        residual <= bound,
        json!({
            "m": m,
            "top": verdict_json(&top.verdict),
            "middle": verdict_json(&mid.verdict),
            "low": low.as_ref().map(|r| verdict_json(&r.verdict)),
            "middle_norm": residual,
            "middle_scale": scale,
            "bound": bound,
        }),
    ))
}

/// Spectral consequences of `(m,P)`-expansivity for invertible `P`.
///
/// An eigenpair `Tx = λx` gives `(1 − |λ|²)ᵐ·⟨Px, x⟩ = ⟨Δx, x⟩ ≤ τ`, so the
/// moduli may deviate from the exact statements by `(τ/λ_min(P))^{1/m}`.
pub fn spectral_constraints(t: &ComplexMatrix, p: &ComplexMatrix, m: u32, tol: &Tolerance) -> Result<TheoremVerdict> {
    let pv = require_psd_weight(p, tol)?;
    if pv.min_eig <= tol.bound(pv.max_eig) {
        return Err(OplabError::Precondition(format!("weight must be invertible (min eigenvalue {:e})", pv.min_eig)));
    }
    let r = defect_of(t, p, m, tol)?;
    let premises_met = r.is_expansive();
    let norm_t = operator_norm(t);
    let eig = eigenvalues(t)?;
    let moduli: Vec<f64> = eig.iter().map(|z| z.norm()).collect();
    let slack = (nsd_slack(&r, tol) / pv.min_eig).powf(1.0 / m as f64) + 1e2 * tol.bound(norm_t);

    let min_modulus = moduli.iter().copied().fold(f64::INFINITY, f64::min);
    let max_deviation = moduli.iter().map(|&x| (x - 1.0).abs()).fold(0.0, f64::max);
    let nonzero = min_modulus > tol.widened(100.0).bound(norm_t);
    let moduli_ok = if m.is_multiple_of(2) { max_deviation <= slack } else { min_modulus >= 1.0 - slack };
    let norm_ok = norm_t >= 1.0 - slack;
    Ok(TheoremVerdict::new(
        "spectral_constraints",
        premises_met,
        nonzero && moduli_ok && norm_ok,
        json!({
            "m": m,
            "defect": verdict_json(&r.verdict),
            "eigenvalue_moduli": moduli,
            "min_modulus": min_modulus,
            "max_unit_deviation": max_deviation,
            "operator_norm": norm_t,
            "slack": slack,
            "nonzero_spectrum": nonzero,
            "moduli_ok": moduli_ok,
            "norm_ok": norm_ok,
        }),
    ))
}
