mod common;

use common::{dist, oracle_binomial, oracle_iterated, term_scale, wrap};
use oplab::decompositions::*;
use oplab::expansivity::{defect, is_mp_isometric, seminorm_p, norm_equivalence_bounds, DefectSpec};
use oplab::generators::*;
use oplab::matrix_core::*;
use oplab::theorem_lab::*;
use oplab::{Complex64, ComplexMatrix, Tolerance};
use proptest::prelude::*;

fn tol() -> Tolerance {
    Tolerance::default()
}

fn hermitian(rng: &mut FixtureRng, d: usize) -> ComplexMatrix {
    rng.gaussian_matrix(d, d, 1.0).hermitian_part()
}

fn low_rank(rng: &mut FixtureRng, d: usize, rank: usize) -> ComplexMatrix {
    &rng.gaussian_matrix(d, rank, 1.0) * &rng.gaussian_matrix(rank, d, 1.0)
}

fn rel(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    dist(a, b) / (1.0 + operator_norm(a).max(operator_norm(b)))
}

/// Greedy nearest-neighbour matching distance between two spectra.
fn spectrum_gap(a: &[Complex64], b: &[Complex64]) -> f64 {
    let mut pool = b.to_vec();
    let mut worst: f64 = 0.0;
    for x in a {
        let (k, d) = pool
            .iter()
            .enumerate()
            .map(|(k, y)| (k, (x - y).norm()))
            .min_by(|l, r| l.1.total_cmp(&r.1))
            .unwrap();
        worst = worst.max(d);
        pool.swap_remove(k);
    }
    worst
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn definiteness_is_unitarily_invariant(seed in any::<u64>(), d in 1usize..=8, kind in 0u8..4) {
        let rng = &mut FixtureRng::new(seed, 0);
        let h = match kind {
            0 => gen_psd(rng, d, 100.0).unwrap(),
            1 => gen_psd(rng, d, 100.0).unwrap().scale(-1.0),
            2 => hermitian(rng, d),
            _ => ComplexMatrix::zeros(d, d),
        };
        let v = gen_haar_unitary(rng, d).unwrap();
        let moved = (&(&v.adjoint() * &h) * &v).hermitian_part();
        let (a, b) = (definiteness(&h, &tol()).unwrap(), definiteness(&moved, &tol().widened(10.0)).unwrap());
        let a_wide = definiteness(&h, &tol().widened(10.0)).unwrap();
        // A verdict may only get weaker by being re-decided at 10x tolerance.
        prop_assert!(a.verdict == b.verdict || a_wide.verdict == b.verdict, "{:?} vs {:?}", a, b);
    }

    #[test]
    fn sqrt_squares_back(seed in any::<u64>(), d in 1usize..=16, log_cap in 0.0f64..8.0) {
        let m = gen_psd(&mut FixtureRng::new(seed, 0), d, 10f64.powf(log_cap)).unwrap();
        let s = sqrt_psd(&m, &tol()).unwrap();
        prop_assert!(definiteness(&s, &tol()).unwrap().verdict.is_psd());
        prop_assert!(dist(&(&s * &s), &m) <= 1e-8 * operator_norm(&m));
    }

    #[test]
    fn penrose_identities(seed in any::<u64>(), d in 1usize..=16, rank_frac in 0.0f64..1.0) {
        let rank = ((d as f64) * rank_frac) as usize;
        let m = low_rank(&mut FixtureRng::new(seed, 0), d, rank);
        let x = moore_penrose(&m, &tol());
        let s = 1.0 + operator_norm(&m) * operator_norm(&x);
        prop_assert!(dist(&(&(&m * &x) * &m), &m) <= 1e-8 * s * operator_norm(&m).max(1.0));
        prop_assert!(dist(&(&(&x * &m) * &x), &x) <= 1e-8 * s * operator_norm(&x).max(1.0));
        let (mx, xm) = (&m * &x, &x * &m);
        prop_assert!(dist(&mx.adjoint(), &mx) <= 1e-8 * s);
        prop_assert!(dist(&xm.adjoint(), &xm) <= 1e-8 * s);
    }

    #[test]
    fn symmetrized_spectrum_is_real(seed in any::<u64>(), d in 1usize..=12) {
        let h = FixtureRng::new(seed, 0).gaussian_matrix(d, d, 1.0).hermitian_part();
        let scale = operator_norm(&h).max(1.0);
        for z in eigenvalues(&h).unwrap() {
            prop_assert!(z.im.abs() <= 64.0 * f64::EPSILON * scale);
        }
    }

    #[test]
    fn block_round_trip_is_exact(seed in any::<u64>(), d in 2usize..=10, cut in 0.0f64..1.0) {
        let m = FixtureRng::new(seed, 0).gaussian_matrix(d, d, 1.0);
        let d1 = 1 + ((d - 1) as f64 * cut) as usize;
        let d1 = d1.min(d - 1);
        prop_assert_eq!(block_compose(&block_split(&m, d1).unwrap()).unwrap(), m);
    }

    #[test]
    fn matrix_json_round_trips(seed in any::<u64>(), r in 1usize..=6, c in 1usize..=6) {
        let m = FixtureRng::new(seed, 0).gaussian_matrix(r, c, 3.0);
        let text = serde_json::to_string(&m).unwrap();
        let back: ComplexMatrix = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, m);
    }

    #[test]
    fn drazin_identities(seed in any::<u64>(), d1 in 0usize..=6, d2 in 1usize..=4, oblique in any::<bool>()) {
        let rng = &mut FixtureRng::new(seed, 0);
        let t = if oblique && d1 > 0 {
            gen_oblique_drazin(rng, d1, d2).unwrap()
        } else {
            let index = rng.int(1, d2);
            let n = gen_nilpotent(rng, d2, index).unwrap();
            if d1 == 0 { n } else { gen_haar_unitary(rng, d1).unwrap().direct_sum(&n) }
        };
        let r = drazin_inverse(&t, &tol()).unwrap();
        let bound = 1e-8 * (1.0 + operator_norm(&t).powi(2 * r.index as i32 + 1));
        prop_assert!(r.residuals.max() <= bound, "{:?} vs {bound:e}", r.residuals);
    }

    #[test]
    fn core_nilpotent_reassembles(seed in any::<u64>(), d1 in 1usize..=5, d2 in 1usize..=4) {
        let t = gen_oblique_drazin(&mut FixtureRng::new(seed, 0), d1, d2).unwrap();
        let cn = core_nilpotent(&t, &tol()).unwrap();
        let inv = cn.basis.try_inverse().unwrap();
        let back = &(&cn.basis * &cn.t1.direct_sum(&cn.t2)) * &inv;
        prop_assert!(rel(&back, &t) <= 1e-8);
        prop_assert!(operator_norm(&cn.t2.pow(cn.index)) <= 1e-10 * (1.0 + operator_norm(&t)).powi(cn.index as i32));
    }

    #[test]
    fn split_basis_is_unitary(seed in any::<u64>(), d in 1usize..=10, family in 0u8..4, n in 1usize..=3) {
        let rng = &mut FixtureRng::new(seed, 0);
        let t = match family {
            0 => gen_gaussian(rng, d, 1.0).unwrap(),
            1 => { let k = rng.int(0, d - 1); gen_singular(rng, d, k).unwrap() }
            2 => { let k = rng.int(1, d); gen_nilpotent(rng, d, k).unwrap() }
            _ => { let d2 = rng.int(1, 3); gen_coupled_kernel(rng, d, d2).unwrap() }
        };
        let s = range_kernel_split(&t, n, &tol()).unwrap();
        let k = s.basis.rows();
        prop_assert!(dist(&(s.basis.adjoint() * &s.basis), &ComplexMatrix::identity(k)) <= 1e-12);
        prop_assert_eq!(s.d1 + s.d2, k);
    }

    #[test]
    fn polar_reconstructs(seed in any::<u64>(), d in 1usize..=10, rank_frac in 0.0f64..=1.0) {
        let rank = ((d as f64) * rank_frac).round() as usize;
        let m = low_rank(&mut FixtureRng::new(seed, 0), d, rank);
        let parts = polar(&m, &tol()).unwrap();
        prop_assert!(dist(&(&parts.u * &parts.p), &m) <= 1e-10 * (1.0 + operator_norm(&m)));
        let proj = parts.u.adjoint() * &parts.u;
        prop_assert!(dist(&(&proj * &proj), &proj) <= 1e-10);
        prop_assert!(dist(&proj.adjoint(), &proj) <= 1e-10);
    }

    #[test]
    fn transforms_preserve_spectrum(seed in any::<u64>(), d in 1usize..=8) {
        let rng = &mut FixtureRng::new(seed, 0);
        let m = gen_gaussian(rng, d, 1.0).unwrap() + ComplexMatrix::identity(d).scale(3.0);
        let base = eigenvalues(&m).unwrap();
        for t in [aluthge(&m, &tol()).unwrap(), duggal(&m, &tol()).unwrap()] {
            let gap = spectrum_gap(&base, &eigenvalues(&t).unwrap());
            prop_assert!(gap <= 1e-8 * (1.0 + operator_norm(&m)), "gap {gap:e}");
        }
    }

    #[test]
    fn ando_round_trip(seed in any::<u64>(), d in 2usize..=10, cut in 0.0f64..1.0, rank_frac in 0.2f64..=1.0) {
        let rng = &mut FixtureRng::new(seed, 0);
        let rank = ((d as f64) * rank_frac).ceil() as usize;
        let g = rng.gaussian_matrix(d, rank, 1.0);
        let p = (&g * &g.adjoint()).hermitian_part();
        let d1 = (1 + ((d - 1) as f64 * cut) as usize).min(d - 1);
        let r = ando_check(&p, d1, &tol()).unwrap();
        prop_assert!(r.is_psd);
        prop_assert!(r.contraction_norm.unwrap() <= 1.0 + 1e-10);
        prop_assert!(r.reconstruction_residual.unwrap() <= 1e-8 * (1.0 + operator_norm(&p)));
    }

    #[test]
    fn defect_matches_both_oracles(seed in any::<u64>(), d in 1usize..=12, m in 1u32..=6) {
        let rng = &mut FixtureRng::new(seed, 0);
        let t = rng.gaussian_matrix(d, d, 1.0 / (d as f64).sqrt());
        let p = hermitian(rng, d);
        let r = defect(&DefectSpec::new(t.clone(), p.clone(), m), &tol()).unwrap();
        let scale = term_scale(&t, &p, m as usize);
        let binom = wrap(oracle_binomial(&t, &p, m as usize));
        let iter = wrap(oracle_iterated(&t, &p, m as usize));
        prop_assert!(dist(&r.delta, &binom) <= 1e-10 * scale);
        prop_assert!(dist(&r.delta, &iter) <= 1e-10 * scale);
    }

    #[test]
    fn defect_is_hermitian(seed in any::<u64>(), d in 1usize..=10, m in 1u32..=6) {
        let rng = &mut FixtureRng::new(seed, 0);
        let t = rng.gaussian_matrix(d, d, 0.5);
        let p = hermitian(rng, d);
        let r = defect(&DefectSpec::new(t, p, m), &tol()).unwrap();
        prop_assert!(dist(&r.delta.adjoint(), &r.delta) <= 1e-12 * r.term_scale.max(1.0));
    }

    #[test]
    fn defect_is_linear_in_the_weight(seed in any::<u64>(), d in 1usize..=8, m in 1u32..=5, a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let rng = &mut FixtureRng::new(seed, 0);
        let t = rng.gaussian_matrix(d, d, 0.5);
        let (p, q) = (hermitian(rng, d), hermitian(rng, d));
        let run = |w: ComplexMatrix| defect(&DefectSpec::new(t.clone(), w, m), &tol()).unwrap();
        let (rp, rq) = (run(p.clone()), run(q.clone()));
        let combined = run(p.scale(a) + q.scale(b));
        let expected = rp.delta.scale(a) + rq.delta.scale(b);
        let scale = a.abs() * rp.term_scale + b.abs() * rq.term_scale;
        prop_assert!(dist(&combined.delta, &expected) <= 1e-10 * scale.max(1.0));
    }

    #[test]
    fn defect_is_unitarily_covariant(seed in any::<u64>(), d in 1usize..=8, m in 1u32..=5) {
        let rng = &mut FixtureRng::new(seed, 0);
        let t = rng.gaussian_matrix(d, d, 0.5);
        let p = hermitian(rng, d);
        let v = gen_haar_unitary(rng, d).unwrap();
        let conj = |x: &ComplexMatrix| &(&v.adjoint() * x) * &v;
        let base = defect(&DefectSpec::new(t.clone(), p.clone(), m), &tol()).unwrap();
        let moved = defect(&DefectSpec::new(conj(&t), conj(&p).hermitian_part(), m), &tol()).unwrap();
        prop_assert!(dist(&moved.delta, &conj(&base.delta)) <= 1e-10 * base.term_scale.max(1.0));
        prop_assert_eq!(moved.verdict.verdict, base.verdict.verdict);
    }

    #[test]
    fn isometry_propagates_upward(seed in any::<u64>(), d1 in 1usize..=4, d2 in 1usize..=3, m in 1u32..=4, kind in 0u8..3) {
        let rng = &mut FixtureRng::new(seed, 0);
        let (t, p) = match kind {
            0 => (gen_haar_unitary(rng, d1 + d2).unwrap(), ComplexMatrix::identity(d1 + d2)),
            1 => { let t = gen_coupled_kernel(rng, d1, d2).unwrap(); let p = t.adjoint() * &t; (t, p) }
            _ => gen_similar_unitary(rng, d1 + d2, 0.3).unwrap(),
        };
        prop_assert!(is_mp_isometric(&DefectSpec::new(t.clone(), p.clone(), m), &tol()).unwrap());
        prop_assert!(is_mp_isometric(&DefectSpec::new(t, p, m + 1), &tol()).unwrap());
    }

    #[test]
    fn seminorm_within_equivalence_bounds(seed in any::<u64>(), d in 1usize..=8) {
        let rng = &mut FixtureRng::new(seed, 0);
        let p = gen_psd(rng, d, 1e4).unwrap();
        let x: Vec<Complex64> = (0..d).map(|_| rng.complex_normal()).collect();
        let norm2: f64 = x.iter().map(|z| z.norm_sqr()).sum();
        let (lo, hi) = norm_equivalence_bounds(&p, &tol()).unwrap().unwrap();
        let s = seminorm_p(&x, &p, &tol()).unwrap();
        prop_assert!(s * s >= lo * norm2 * (1.0 - 1e-10));
        prop_assert!(s * s <= hi * norm2 * (1.0 + 1e-10));
    }

    #[test]
    fn genspec_is_reproducible(seed in any::<u64>(), stream in any::<u64>(), d1 in 1usize..=4, d2 in 1usize..=3, m in 1u32..=4) {
        let families = [
            Family::HaarUnitary { dim: d1 + d2 },
            Family::Nilpotent { dim: d1 + d2, index: d2 },
            Family::Psd { dim: d1, condition_cap: 50.0 },
            Family::DrazinPair { d1, d2, m },
            Family::CoupledKernel { d1, d2 },
            Family::ExpansiveInvertible { dim: d1, m: 2 * m - 1 },
        ];
        for family in families {
            let spec = GenSpec::new(seed, stream, family);
            let text = serde_json::to_string(&spec).unwrap();
            let again: GenSpec = serde_json::from_str(&text).unwrap();
            prop_assert_eq!(spec.generate().unwrap(), again.generate().unwrap());
        }
    }

    #[test]
    fn generated_fixtures_meet_their_premises(seed in any::<u64>(), d1 in 1usize..=4, d2 in 1usize..=3, m in 1u32..=4) {
        let rng = &mut FixtureRng::new(seed, 0);
        let pair = gen_drazin_pair(rng, d1, d2, m).unwrap();
        prop_assert!(defect(&DefectSpec::new(pair.t.clone(), pair.p.clone(), m), &tol()).unwrap().is_expansive());
        prop_assert_eq!(drazin_index(&pair.t, &tol()).unwrap().index, pair.nilpotency_index);

        let t = gen_coupled_kernel(rng, d1, d2).unwrap();
        let gram = t.adjoint() * &t;
        prop_assert!(defect(&DefectSpec::new(t, gram, m), &tol()).unwrap().is_isometric());

        let odd = 2 * m - 1;
        let e = gen_expansive_invertible(rng, d1 + d2, odd).unwrap();
        let id = ComplexMatrix::identity(d1 + d2);
        prop_assert!(defect(&DefectSpec::new(e.clone(), id.clone(), 1), &tol()).unwrap().is_expansive());
        prop_assert!(defect(&DefectSpec::new(e, id, odd), &tol()).unwrap().is_expansive());

        let psd = gen_psd(rng, d1 + d2, 1e3).unwrap();
        prop_assert!(definiteness(&psd, &tol()).unwrap().verdict.is_psd());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn thm10_bundle_identities(seed in any::<u64>(), d1 in 1usize..=5, d2 in 1usize..=4, m in 1u32..=4, n in 1usize..=2) {
        let t = gen_coupled_kernel(&mut FixtureRng::new(seed, 0), d1, d2).unwrap();
        let (bundle, v) = thm10_construct(&t, n, m, &tol()).unwrap();
        let b = bundle.unwrap();
        prop_assert!(v.premises_met && v.holds, "{}", v.witness);
        let q1_inv = b.q1.try_inverse().unwrap();
        let scale = 1.0 + operator_norm(&b.b) * operator_norm(&b.q1) * operator_norm(&q1_inv);
        prop_assert!(dist(&b.a, &(&(&q1_inv * &b.b) * &b.q1)) <= 1e-8 * scale);
        prop_assert!(dist(&b.c, &(&(&b.q1 * &b.d) * &b.q1)) <= 1e-8 * (1.0 + operator_norm(&b.c)));
        prop_assert!(definiteness(&b.d, &tol()).unwrap().verdict.is_psd());
    }

    #[test]
    fn spectral_constraints_on_two_isometries(seed in any::<u64>(), d in 1usize..=8, spread in 0.0f64..0.5) {
        let (t, p) = gen_similar_unitary(&mut FixtureRng::new(seed, 0), d, spread).unwrap();
        let v = spectral_constraints(&t, &p, 2, &tol()).unwrap();
        prop_assert!(v.premises_met && v.holds);
        prop_assert!(v.witness["max_unit_deviation"].as_f64().unwrap() <= 1e-8);
    }

    #[test]
    fn verifiers_are_pure(seed in any::<u64>(), d1 in 1usize..=3, d2 in 1usize..=3) {
        let pair = gen_drazin_pair(&mut FixtureRng::new(seed, 0), d1, d2, 2).unwrap();
        let run = || {
            [
                verify_power_stability(&pair.t, &pair.p, 2, 3, &tol()).unwrap(),
                verify_no_singular_expansive(&pair.t, 2, &tol()).unwrap(),
                verify_weight_decomposition(&pair.t1, &pair.t2, &pair.p, 2, &tol()).unwrap(),
                verify_two_expansive_isometry(&pair.t, &pair.p, &tol()).unwrap(),
                verify_sandwich_isometry(&pair.t, &pair.p, 2, &tol()).unwrap(),
            ]
        };
        let (a, b) = (run(), run());
        prop_assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        for v in &a {
            prop_assert!(!v.is_counterexample(), "{}", v.witness);
        }
    }
}
