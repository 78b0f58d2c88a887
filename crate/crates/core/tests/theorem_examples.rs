mod common;

use common::{c, dist, eig_range, haar, nilpotent, real};
use oplab::decompositions::{drazin_inverse, duggal};
use oplab::expansivity::{defect, defect_tilde, DefectSpec};
use oplab::matrix_core::{definiteness, operator_norm, Definiteness};
use oplab::theorem_lab::*;
use oplab::{ComplexMatrix, OplabError, Tolerance};

fn tol() -> Tolerance {
    Tolerance::default()
}

fn gram(t: &ComplexMatrix) -> ComplexMatrix {
    t.adjoint() * t
}

fn idempotent() -> ComplexMatrix {
    real(&[&[1.0, 1.0], &[0.0, 0.0]])
}

fn jordan2() -> ComplexMatrix {
    real(&[&[0.0, 1.0], &[0.0, 0.0]])
}

fn unit_block(d1: usize, d2: usize) -> ComplexMatrix {
    ComplexMatrix::identity(d1).direct_sum(&ComplexMatrix::zeros(d2, d2))
}

#[test]
fn power_stability_unitary() {
    let u = haar(1, 4);
    let v = verify_power_stability(&u, &ComplexMatrix::identity(4), 2, 5, &tol()).unwrap();
    assert!(v.premises_met && v.holds);
    assert_eq!(v.witness["powers"].as_array().unwrap().len(), 4);
}

#[test]
fn power_stability_scalar_two() {
    let t = real(&[&[2.0]]);
    let v = verify_power_stability(&t, &ComplexMatrix::identity(1), 1, 4, &tol()).unwrap();
    assert!(v.premises_met && v.holds);
    // Δ¹ at power n is 1 − 4ⁿ.
    for (k, row) in v.witness["powers"].as_array().unwrap().iter().enumerate() {
        let n = k as i32 + 2;
        let got = row["defect"]["max_eig"].as_f64().unwrap();
        assert!((got - (1.0 - 4f64.powi(n))).abs() < 1e-9);
    }
}

#[test]
fn power_stability_idempotent_defects_vanish() {
    let t = idempotent();
    let v = verify_power_stability(&t, &gram(&t), 2, 4, &tol()).unwrap();
    assert!(v.premises_met && v.holds);
    for row in v.witness["powers"].as_array().unwrap() {
        assert_eq!(row["defect"]["verdict"], "ZERO");
    }
}

#[test]
fn power_stability_needs_two_powers() {
    let err = verify_power_stability(&idempotent(), &ComplexMatrix::identity(2), 1, 1, &tol()).unwrap_err();
    assert!(matches!(err, OplabError::Precondition(_)));
}

#[test]
fn no_singular_expansive_idempotent() {
    let v = verify_no_singular_expansive(&idempotent(), 1, &tol()).unwrap();
    assert!(v.premises_met && v.holds);
    // T*T = [[1,1],[1,1]], so I − T*T = [[0,−1],[−1,0]] has eigenvalues ±1.
    let (lo, hi) = eig_range(&(ComplexMatrix::identity(2) - gram(&idempotent())));
    assert!((lo + 1.0).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
    assert_eq!(v.witness["defect"]["verdict"], "INDEFINITE");
}

#[test]
fn no_singular_expansive_jordan_block() {
    let v = verify_no_singular_expansive(&jordan2(), 2, &tol()).unwrap();
    assert!(v.premises_met && v.holds);
    let w = &v.witness["defect"];
    assert!((w["min_eig"].as_f64().unwrap() + 1.0).abs() < 1e-12);
    assert!((w["max_eig"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn no_singular_expansive_unitary_is_vacuous() {
    let v = verify_no_singular_expansive(&haar(2, 3), 3, &tol()).unwrap();
    assert!(!v.premises_met);
    assert!(!v.is_counterexample());
    assert_eq!(v.witness["literal_reading_contradicted"], true);
}

#[test]
fn weight_decomposition_unitary_plus_nilpotent() {
    let (u, n) = (haar(3, 2), nilpotent(3, 3, 3));
    let v = verify_weight_decomposition(&u, &n, &unit_block(2, 3), 2, &tol()).unwrap();
    assert!(v.premises_met && v.holds, "{}", v.witness);
    assert_eq!(v.witness["forward"]["premise"], true);
    assert_eq!(v.witness["reverse"]["premise"], true);
    assert_eq!(v.witness["nilpotency_index"], 3);
}

#[test]
fn weight_decomposition_scalar_tilde() {
    let (t1, t2) = (real(&[&[2.0]]), real(&[&[0.0]]));
    let p = unit_block(1, 1);
    let v = verify_weight_decomposition(&t1, &t2, &p, 1, &tol()).unwrap();
    assert!(v.premises_met && v.holds);
    assert_eq!(v.witness["forward"]["conclusion"], true);
    // T_d = 1/2 ⊕ 0, so Δ̃¹ = T_d*·P·T_d − P = diag(1/4 − 1, 0).
    let td = drazin_inverse(&t1.direct_sum(&t2), &tol()).unwrap().inverse;
    assert!(dist(&td, &real(&[&[0.5, 0.0], &[0.0, 0.0]])) < 1e-14);
    let tilde = defect_tilde(&DefectSpec::new(td, p, 1), &tol()).unwrap();
    assert!((tilde.delta.get(0, 0).re + 0.75).abs() < 1e-14);
    assert!((v.witness["tilde_defect_drazin"]["min_eig"].as_f64().unwrap() + 0.75).abs() < 1e-12);
}

#[test]
fn weight_decomposition_full_identity_blocks_forward_premise() {
    let (u, n) = (haar(4, 2), nilpotent(4, 2, 2));
    let v = verify_weight_decomposition(&u, &n, &ComplexMatrix::identity(4), 1, &tol()).unwrap();
    assert_eq!(v.witness["forward"]["premise"], false);
    assert!(!v.premises_met);
    assert!(v.witness["forward"]["p22_norm"].as_f64().unwrap() > 0.5);
}

#[test]
fn weight_decomposition_checks_block_premises() {
    let p = ComplexMatrix::identity(4);
    let singular = real(&[&[1.0, 0.0], &[0.0, 0.0]]);
    let err = verify_weight_decomposition(&singular, &jordan2(), &p, 1, &tol()).unwrap_err();
    assert!(matches!(err, OplabError::Precondition(_)));
    let err = verify_weight_decomposition(&haar(5, 2), &haar(6, 2), &p, 1, &tol()).unwrap_err();
    assert!(matches!(err, OplabError::Precondition(_)));
}

#[test]
fn two_expansive_isometry_examples() {
    let u = haar(7, 3);
    let v = verify_two_expansive_isometry(&u, &ComplexMatrix::identity(3), &tol()).unwrap();
    assert!(v.premises_met && v.holds);

    let t = haar(8, 2).direct_sum(&nilpotent(8, 2, 2));
    let p = unit_block(2, 2);
    let v = verify_two_expansive_isometry(&t, &p, &tol()).unwrap();
    assert!(v.premises_met && v.holds);
    // T*PT = U*U ⊕ 0 = P.
    assert!(dist(&(&(&t.adjoint() * &p) * &t), &p) < 1e-14);

    let v = verify_two_expansive_isometry(&real(&[&[2.0]]), &real(&[&[1.0]]), &tol()).unwrap();
    assert!(!v.premises_met);
    assert!((v.witness["defect"]["max_eig"].as_f64().unwrap() - 9.0).abs() < 1e-12);
}

#[test]
fn unitary_nilpotent_structure_examples() {
    // U ⊕ 0 meets the (2,|T|²) premise; with a nonzero nilpotent block the
    // premise fails and the verdict holds vacuously.
    let t = haar(9, 3).direct_sum(&ComplexMatrix::zeros(2, 2));
    let v = verify_unitary_nilpotent_structure(&t, &tol()).unwrap();
    assert!(v.premises_met && v.holds);

    let t = haar(9, 3).direct_sum(&nilpotent(9, 2, 2));
    let v = verify_unitary_nilpotent_structure(&t, &tol()).unwrap();
    assert!(v.holds && !v.is_counterexample());

    let t = haar(10, 2).scale(2.0).direct_sum(&nilpotent(10, 2, 2));
    let v = verify_unitary_nilpotent_structure(&t, &tol()).unwrap();
    assert!(!v.premises_met);

    let v = verify_unitary_nilpotent_structure(&haar(11, 4), &tol()).unwrap();
    assert!(v.premises_met && v.holds);
    assert_eq!(v.witness["nilpotent_dim"], 0);
}

#[test]
fn two_u_block_defect_matches_scalar_formula() {
    // On the invertible block of 2U ⊕ N: Δ²(|T|²) = (1 − 4)²·4·I = 36·I.
    let t = haar(12, 2).scale(2.0);
    let r = defect(&DefectSpec::new(t.clone(), gram(&t), 2), &tol()).unwrap();
    assert!(dist(&r.delta, &ComplexMatrix::identity(2).scale(36.0)) < 1e-10);
}

#[test]
fn sandwich_isometry_examples() {
    let v = verify_sandwich_isometry(&haar(13, 3), &ComplexMatrix::identity(3), 3, &tol()).unwrap();
    assert!(v.premises_met && v.holds);

    let t = haar(14, 2).direct_sum(&nilpotent(14, 2, 2));
    let v = verify_sandwich_isometry(&t, &unit_block(2, 2), 2, &tol()).unwrap();
    assert!(v.premises_met && v.holds);

    let v = verify_sandwich_isometry(&real(&[&[2.0]]), &real(&[&[1.0]]), 2, &tol()).unwrap();
    assert!(!v.premises_met);

    let err = verify_sandwich_isometry(&haar(15, 2), &ComplexMatrix::identity(2), 1, &tol()).unwrap_err();
    assert!(matches!(err, OplabError::Precondition(_)));
}

#[test]
fn spectral_constraints_examples() {
    let v = spectral_constraints(&haar(16, 4), &ComplexMatrix::identity(4), 2, &tol()).unwrap();
    assert!(v.premises_met && v.holds);

    let v = spectral_constraints(&real(&[&[2.0]]), &real(&[&[1.0]]), 1, &tol()).unwrap();
    assert!(v.premises_met && v.holds);
    assert!((v.witness["operator_norm"].as_f64().unwrap() - 2.0).abs() < 1e-14);

    let t = real(&[&[2.0, 0.0], &[1.0, 2.0]]);
    let v = spectral_constraints(&t, &ComplexMatrix::identity(2), 1, &tol()).unwrap();
    assert!(v.premises_met && v.holds);
    let expected = ((9.0 + 17f64.sqrt()) / 2.0).sqrt();
    assert!((v.witness["operator_norm"].as_f64().unwrap() - expected).abs() < 1e-12);
    for modulus in v.witness["eigenvalue_moduli"].as_array().unwrap() {
        assert!((modulus.as_f64().unwrap() - 2.0).abs() < 1e-7);
    }
}

#[test]
fn spectral_constraints_rejects_singular_weight() {
    let err = spectral_constraints(&haar(17, 2), &unit_block(1, 1), 2, &tol()).unwrap_err();
    assert!(matches!(err, OplabError::Precondition(_)));
}

#[test]
fn thm10_idempotent() {
    let (bundle, v) = thm10_construct(&idempotent(), 1, 2, &tol()).unwrap();
    let b = bundle.unwrap();
    assert!(v.premises_met && v.holds, "{}", v.witness);
    assert_eq!((b.d1, b.d2), (1, 1));
    let ones = real(&[&[1.0, 1.0], &[1.0, 1.0]]);
    // The basis is e₁, e₂ up to phase; conjugating back lands in the
    // original coordinates.
    let back = |m: &ComplexMatrix| &(&b.basis * m) * &b.basis.adjoint();
    assert!(dist(&back(&b.a), &idempotent()) < 1e-12);
    assert!(dist(&back(&b.b), &idempotent()) < 1e-12);
    assert!(dist(&back(&b.c), &ones) < 1e-12);
    assert!(dist(&back(&b.d), &ones) < 1e-12);
    assert!(dist(&b.q, &ComplexMatrix::identity(2)) < 1e-12);
    assert_eq!(b.a_defect.verdict, Definiteness::Zero);
    assert_eq!(b.b_defect.verdict, Definiteness::Zero);
    assert!(!b.side_condition_holds());
    assert_eq!(b.side_condition.verdict, Definiteness::Indefinite);
    // B is not 2-expansive: Δ²_B(I) = I − D is indefinite.
    assert_eq!(b.b_plain_defect.verdict, Definiteness::Indefinite);
}

#[test]
fn thm10_invertible_lower_triangular() {
    let t = real(&[&[2.0, 0.0], &[1.0, 2.0]]);
    let (bundle, v) = thm10_construct(&t, 1, 1, &tol()).unwrap();
    let b = bundle.unwrap();
    assert!(v.premises_met && v.holds, "{}", v.witness);
    assert_eq!((b.d1, b.d2, b.x.cols()), (2, 0, 0));
    assert!(b.side_condition_holds());
    assert!(b.b_plain_defect.verdict.is_nsd());
    assert!(b.a_q_defect.verdict.is_nsd());
    // B = duggal(T) in the split basis; B*B − I has the spectrum of T*T − I.
    let bd = duggal(&t, &tol()).unwrap();
    assert!(dist(&(&(&b.basis * &b.b) * &b.basis.adjoint()), &bd) < 1e-12);
    let gap = definiteness(&(gram(&bd) - ComplexMatrix::identity(2)), &tol()).unwrap();
    assert_eq!(gap.verdict, Definiteness::Psd);
    let (lo, _) = eig_range(&(gram(&t) - ComplexMatrix::identity(2)));
    assert!((gap.min_eig - lo).abs() < 1e-12);
}

#[test]
fn thm10_unitary_collapses() {
    let u = haar(18, 4);
    let (bundle, v) = thm10_construct(&u, 2, 3, &tol()).unwrap();
    let b = bundle.unwrap();
    assert!(v.premises_met && v.holds);
    for verdict in [&b.a_defect, &b.b_defect, &b.b_plain_defect, &b.a_q_defect] {
        assert_eq!(verdict.verdict, Definiteness::Zero);
    }
    assert!(operator_norm(&(&b.p1 - &ComplexMatrix::identity(4))) < 1e-12);
}

#[test]
fn thm10_complex_entries() {
    let t = ComplexMatrix::from_rows(&[&[c(0.0, 1.0), c(0.5, -0.5)], &[c(0.0, 0.0), c(0.0, 0.0)]]);
    let (bundle, v) = thm10_construct(&t, 2, 3, &tol()).unwrap();
    assert!(v.premises_met && v.holds, "{}", v.witness);
    assert_eq!(bundle.unwrap().d2, 1);
}

#[test]
fn verdicts_are_deterministic() {
    let t = haar(19, 3).direct_sum(&nilpotent(19, 2, 2));
    let p = unit_block(3, 2);
    let a = verify_sandwich_isometry(&t, &p, 3, &tol()).unwrap();
    let b = verify_sandwich_isometry(&t, &p, 3, &tol()).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}
