//! Seeded fixture families.
//!
//! Randomness comes from ChaCha20 (`rand_chacha`), a counter-based generator.
//! A fixture is addressed by `(seed, stream)`: the seed keys the cipher via
//! `seed_from_u64` and the stream id selects the ChaCha nonce, so distinct
//! streams are independent and any one of them can be regenerated alone.
//! The suite runner lays stream ids out as
//! `theorem_ordinal << 48 | instance << 8 | slot` (see [`stream_id`]).
//!
//! Every family checks the property it promises before returning, so
//! fixtures are certified rather than best-effort.

use nalgebra::QR;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{OplabError, Result};
use crate::expansivity::{defect, DefectSpec};
use crate::matrix_core::{operator_norm, svd, Complex64, ComplexMatrix, Tolerance};

/// Builds the stream id for `slot` of `instance` under `theorem_ordinal`.
pub fn stream_id(theorem_ordinal: u64, instance: u64, slot: u8) -> u64 {
    assert!(theorem_ordinal < (1 << 16) && instance < (1 << 40));
    (theorem_ordinal << 48) | (instance << 8) | slot as u64
}

pub struct FixtureRng(ChaCha20Rng);

impl FixtureRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self(rng)
    }

    pub fn normal(&mut self) -> f64 {
        self.0.sample(StandardNormal)
    }

    /// Circular complex Gaussian with `E|z|² = 1`.
    pub fn complex_normal(&mut self) -> Complex64 {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Complex64::new(h * self.normal(), h * self.normal())
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.0.random::<f64>()
    }

    /// Uniform integer in `lo..=hi`.
    pub fn int(&mut self, lo: usize, hi: usize) -> usize {
        self.0.random_range(lo..=hi)
    }

    pub fn unit_phase(&mut self) -> Complex64 {
        Complex64::from_polar(1.0, self.uniform(0.0, std::f64::consts::TAU))
    }

    pub fn gaussian_matrix(&mut self, rows: usize, cols: usize, scale: f64) -> ComplexMatrix {
        let entries = (0..rows * cols).map(|_| self.complex_normal() * scale).collect();
        ComplexMatrix::from_row_major(rows, cols, entries).expect("finite Gaussian entries")
    }
}

fn unitarity_defect(u: &ComplexMatrix) -> f64 {
    operator_norm(&(u.adjoint() * u - ComplexMatrix::identity(u.cols())))
}

/// Haar unitary: QR of a complex Gaussian matrix with the phases of `R`'s
/// diagonal moved into `Q`, so the factorization is unique.
pub fn gen_haar_unitary(rng: &mut FixtureRng, d: usize) -> Result<ComplexMatrix> {
    if d == 0 {
        return Err(OplabError::Precondition("dimension must be at least 1".into()));
    }
    let g = rng.gaussian_matrix(d, d, 1.0);
    let qr = QR::new(g.into_inner());
    let (q, r) = (qr.q(), qr.r());
    let phases: Vec<Complex64> = (0..d)
        .map(|i| {
            let z = r[(i, i)];
            if z.norm() > 0.0 {
                z / z.norm()
            } else {
                Complex64::new(1.0, 0.0)
            }
        })
        .collect();
    let u = ComplexMatrix::from_inner(q) * ComplexMatrix::diagonal(&phases);
    let defect = unitarity_defect(&u);
    if defect > 1e-12 {
        return Err(OplabError::Generation(format!("Haar sample not unitary to 1e-12 (defect {defect:e})")));
    }
    Ok(u)
}

/// Nilpotent matrix of exact index `index`: a block-diagonal strictly upper
/// triangular matrix (largest block of size `index`) in a Haar basis.
pub fn gen_nilpotent(rng: &mut FixtureRng, d: usize, index: usize) -> Result<ComplexMatrix> {
    if index == 0 || index > d {
        return Err(OplabError::Precondition(format!("nilpotency index {index} outside 1..={d}")));
    }
    let mut sizes = vec![index];
    let mut remaining = d - index;
    while remaining > 0 {
        let s = rng.int(1, index.min(remaining));
        sizes.push(s);
        remaining -= s;
    }
    let mut s = ComplexMatrix::zeros(0, 0);
    for &size in &sizes {
        let mut block = vec![Complex64::new(0.0, 0.0); size * size];
        for i in 0..size {
            for j in i + 1..size {
                block[i * size + j] = if j == i + 1 {
                    rng.unit_phase() * rng.uniform(0.5, 1.0)
                } else {
                    rng.complex_normal() * 0.3
                };
            }
        }
        s = s.direct_sum(&ComplexMatrix::from_row_major(size, size, block)?);
    }
    let v = gen_haar_unitary(rng, d)?;
    let n = &(&v * &s) * &v.adjoint();

    let scale = operator_norm(&n).max(1.0).powi(index as i32);
    let top = operator_norm(&n.pow(index));
    let below = operator_norm(&n.pow(index - 1));
    if top > 1e-12 * scale || (index > 1 && below < 0.5f64.powi(index as i32)) {
        return Err(OplabError::Generation(format!(
            "nilpotent draw failed certification (‖N^k‖ = {top:e}, ‖N^(k-1)‖ = {below:e})"
        )));
    }
    Ok(n)
}

/// Hermitian PSD with eigenvalues log-uniform in `[cap^{-1/2}, cap^{1/2}]`.
pub fn gen_psd(rng: &mut FixtureRng, d: usize, condition_cap: f64) -> Result<ComplexMatrix> {
    if condition_cap < 1.0 {
        return Err(OplabError::Precondition(format!("condition cap {condition_cap} below 1")));
    }
    let half = 0.5 * condition_cap.ln();
    let eig: Vec<f64> = (0..d).map(|_| rng.uniform(-half, half).exp()).collect();
    let v = gen_haar_unitary(rng, d)?;
    Ok((&(&v * &ComplexMatrix::real_diagonal(&eig)) * &v.adjoint()).hermitian_part())
}

/// Operator `T = c·U ⊕ N` with weight `P = P₁₁ ⊕ 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DrazinPair {
    pub t: ComplexMatrix,
    pub p: ComplexMatrix,
    pub t1: ComplexMatrix,
    pub t2: ComplexMatrix,
    pub p11: ComplexMatrix,
    pub nilpotency_index: usize,
}

/// `U` is Haar, `N` nilpotent, and `P₁₁ = αI + β(U + U*)/2 + γ(U² + U*²)/2`
/// is positive definite and commutes with `U`, so `U*P₁₁U = P₁₁` and the
/// defect of every order vanishes on the support of `P`.
pub fn gen_drazin_pair(rng: &mut FixtureRng, d1: usize, d2: usize, m: u32) -> Result<DrazinPair> {
    if d1 == 0 || d2 == 0 {
        return Err(OplabError::Precondition("gen_drazin_pair needs d1, d2 ≥ 1".into()));
    }
    let u = gen_haar_unitary(rng, d1)?;
    let beta = rng.uniform(-1.0, 1.0);
    let gamma = rng.uniform(-1.0, 1.0);
    let alpha = beta.abs() + gamma.abs() + rng.uniform(0.5, 1.5);
    let u2 = &u * &u;
    let p11 = (ComplexMatrix::identity(d1).scale(alpha)
        + (&u + u.adjoint()).scale(0.5 * beta)
        + (&u2 + u2.adjoint()).scale(0.5 * gamma))
    .hermitian_part();
    let nilpotency_index = rng.int(1, d2);
    let t2 = gen_nilpotent(rng, d2, nilpotency_index)?;
    let t1 = u;
    let pair = DrazinPair {
        t: t1.direct_sum(&t2),
        p: p11.direct_sum(&ComplexMatrix::zeros(d2, d2)),
        t1,
        t2,
        p11,
        nilpotency_index,
    };
    let r = defect(&DefectSpec::new(pair.t.clone(), pair.p.clone(), m.max(1)), &Tolerance::default())?;
    if !r.is_expansive() {
        return Err(OplabError::Generation("Drazin pair is not (m,P)-expansive".into()));
    }
    Ok(pair)
}

/// `T = [[U, X], [0, 0]]` with `U` Haar on the first `d1` coordinates.
///
/// Every power `T^{j+1}` has Gram matrix `[[I, U*X], [X*U, X*X]] = T*T`, so
/// `T` is `(m, T*T)`-isometric for every `m`.
pub fn gen_coupled_kernel(rng: &mut FixtureRng, d1: usize, d2: usize) -> Result<ComplexMatrix> {
    if d1 == 0 || d2 == 0 {
        return Err(OplabError::Precondition("gen_coupled_kernel needs d1, d2 ≥ 1".into()));
    }
    let u = gen_haar_unitary(rng, d1)?;
    let x = rng.gaussian_matrix(d1, d2, 0.5);
    let top = ComplexMatrix::hstack(&u, &x)?;
    let bottom = ComplexMatrix::zeros(d2, d1 + d2);
    let mut entries = top.to_row_major();
    entries.extend(bottom.to_row_major());
    ComplexMatrix::from_row_major(d1 + d2, d1 + d2, entries)
}

const EXPANSIVE_BUDGET: usize = 50;

/// `c·U·L` with `U` Haar, `L` unit lower triangular and `σ_min ≥ 1`,
/// rejection sampled. Odd `m > 1` draws are additionally certified
/// `m`-expansive. For even `m` the only invertible candidates with
/// `σ_min ≥ 1` and `det L = 1` are unitary, so a Haar unitary is returned.
///
/// Higher odd orders reject strongly non-normal draws, so the strictly lower
/// part of `L` starts smaller for `m > 1` and shrinks by 15% after every
/// rejection; as it vanishes the draw tends to the expansive `c·U`.
pub fn gen_expansive_invertible(rng: &mut FixtureRng, d: usize, m: u32) -> Result<ComplexMatrix> {
    if m.is_multiple_of(2) {
        return gen_haar_unitary(rng, d);
    }
    let tol = Tolerance::default();
    let mut spread = if m > 1 { 0.1 } else { 0.5 };
    for _ in 0..EXPANSIVE_BUDGET {
        let u = gen_haar_unitary(rng, d)?;
        let c = rng.uniform(1.2, 2.0);
        let mut l = ComplexMatrix::identity(d).into_inner();
        for i in 0..d {
            for j in 0..i {
                l[(i, j)] = rng.complex_normal() * (spread / (d as f64).sqrt());
            }
        }
        spread *= 0.85;
        let t = (&u * &ComplexMatrix::from_inner(l)).scale(c);
        let sigma_min = svd(&t)?.sigma.last().copied().unwrap_or(0.0);
        if sigma_min < 1.0 {
            continue;
        }
        if m > 1 {
            let r = defect(&DefectSpec::new(t.clone(), ComplexMatrix::identity(d), m), &tol)?;
            if !r.is_expansive() {
                continue;
            }
        }
        return Ok(t);
    }
    Err(OplabError::Generation(format!("no {m}-expansive draw within {EXPANSIVE_BUDGET} tries")))
}

/// `W·Σ·V*` with Haar `W`, `V` and exactly `rank` nonzero singular values in `[0.3, 2]`.
pub fn gen_singular(rng: &mut FixtureRng, d: usize, rank: usize) -> Result<ComplexMatrix> {
    if rank >= d {
        return Err(OplabError::Precondition(format!("rank {rank} must be below dimension {d}")));
    }
    let w = gen_haar_unitary(rng, d)?;
    let v = gen_haar_unitary(rng, d)?;
    let sigma: Vec<f64> = (0..d).map(|i| if i < rank { rng.uniform(0.3, 2.0) } else { 0.0 }).collect();
    Ok(&(&w * &ComplexMatrix::real_diagonal(&sigma)) * &v.adjoint())
}

/// Non-normal P-isometry: `T = S⁻¹·U·S` with `P = S*·S`, `S = I + spread·G`.
pub fn gen_similar_unitary(rng: &mut FixtureRng, d: usize, spread: f64) -> Result<(ComplexMatrix, ComplexMatrix)> {
    for _ in 0..EXPANSIVE_BUDGET {
        let s = ComplexMatrix::identity(d) + rng.gaussian_matrix(d, d, spread / (d as f64).sqrt());
        let sigma = svd(&s)?.sigma;
        if sigma.last().copied().unwrap_or(0.0) < 0.2 {
            continue;
        }
        let inv = s.try_inverse().ok_or_else(|| OplabError::Generation("similarity not invertible".into()))?;
        let u = gen_haar_unitary(rng, d)?;
        let t = &(&inv * &u) * &s;
        let p = (s.adjoint() * &s).hermitian_part();
        return Ok((t, p));
    }
    Err(OplabError::Generation("no well-conditioned similarity within budget".into()))
}

/// `S·(c·U ⊕ N)·S⁻¹` for a random similarity `S = I + 0.3·G`; the
/// core and nilpotent subspaces are then oblique.
pub fn gen_oblique_drazin(rng: &mut FixtureRng, d1: usize, d2: usize) -> Result<ComplexMatrix> {
    let d = d1 + d2;
    let core = if d1 > 0 { gen_haar_unitary(rng, d1)?.scale(rng.uniform(0.7, 1.3)) } else { ComplexMatrix::zeros(0, 0) };
    let nil = if d2 > 0 {
        let index = rng.int(1, d2);
        gen_nilpotent(rng, d2, index)?
    } else {
        ComplexMatrix::zeros(0, 0)
    };
    for _ in 0..EXPANSIVE_BUDGET {
        let s = ComplexMatrix::identity(d) + rng.gaussian_matrix(d, d, 0.3 / (d as f64).sqrt());
        if svd(&s)?.sigma.last().copied().unwrap_or(0.0) < 0.3 {
            continue;
        }
        let inv = s.try_inverse().ok_or_else(|| OplabError::Generation("similarity not invertible".into()))?;
        return Ok(&(&s * &core.direct_sum(&nil)) * &inv);
    }
    Err(OplabError::Generation("no well-conditioned similarity within budget".into()))
}

/// `W·(U ⊕ 0)·W*` with `U`, `W` Haar: a unitary plus a zero nilpotent part
/// on orthogonal subspaces.
pub fn gen_unitary_plus_zero(rng: &mut FixtureRng, d1: usize, d2: usize) -> Result<ComplexMatrix> {
    let u = gen_haar_unitary(rng, d1)?;
    let w = gen_haar_unitary(rng, d1 + d2)?;
    Ok(&(&w * &u.direct_sum(&ComplexMatrix::zeros(d2, d2))) * &w.adjoint())
}

/// Unstructured complex Gaussian matrix with entry variance `scale²/d`.
pub fn gen_gaussian(rng: &mut FixtureRng, d: usize, scale: f64) -> Result<ComplexMatrix> {
    if d == 0 {
        return Err(OplabError::Precondition("dimension must be at least 1".into()));
    }
    Ok(rng.gaussian_matrix(d, d, scale / (d as f64).sqrt()))
}

/// Fixture families addressable from a [`GenSpec`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    HaarUnitary { dim: usize },
    Nilpotent { dim: usize, index: usize },
    Psd { dim: usize, condition_cap: f64 },
    DrazinPair { d1: usize, d2: usize, m: u32 },
    CoupledKernel { d1: usize, d2: usize },
    ExpansiveInvertible { dim: usize, m: u32 },
    Singular { dim: usize, rank: usize },
    SimilarUnitary { dim: usize, spread: f64 },
    ObliqueDrazin { d1: usize, d2: usize },
    /// `scale·U` with `U` Haar.
    ScaledUnitary { dim: usize, scale: f64 },
    UnitaryPlusZero { d1: usize, d2: usize },
    Gaussian { dim: usize, scale: f64 },
}

impl Family {
    /// Operator dimensions: `[d]`, or `[d1, d2]` for two-block families.
    pub fn dims(&self) -> Vec<usize> {
        match *self {
            Family::HaarUnitary { dim }
            | Family::Nilpotent { dim, .. }
            | Family::Psd { dim, .. }
            | Family::ExpansiveInvertible { dim, .. }
            | Family::Singular { dim, .. }
            | Family::SimilarUnitary { dim, .. }
            | Family::ScaledUnitary { dim, .. }
            | Family::Gaussian { dim, .. } => vec![dim],
            Family::DrazinPair { d1, d2, .. }
            | Family::CoupledKernel { d1, d2 }
            | Family::ObliqueDrazin { d1, d2 }
            | Family::UnitaryPlusZero { d1, d2 } => vec![d1, d2],
        }
    }

    pub fn dim(&self) -> usize {
        self.dims().iter().sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub seed: u64,
    pub stream: u64,
    #[serde(flatten)]
    pub family: Family,
}

/// A generated operator, with its weight when the family supplies one.
#[derive(Clone, Debug, PartialEq)]
pub struct Fixture {
    pub t: ComplexMatrix,
    pub p: Option<ComplexMatrix>,
}

impl GenSpec {
    pub fn new(seed: u64, stream: u64, family: Family) -> Self {
        Self { seed, stream, family }
    }

    /// Regenerates the fixture; identical specs give bit-identical matrices.
    pub fn generate(&self) -> Result<Fixture> {
        let rng = &mut FixtureRng::new(self.seed, self.stream);
        let single = |t| Ok(Fixture { t, p: None });
        match self.family {
            Family::HaarUnitary { dim } => single(gen_haar_unitary(rng, dim)?),
            Family::Nilpotent { dim, index } => single(gen_nilpotent(rng, dim, index)?),
            Family::Psd { dim, condition_cap } => single(gen_psd(rng, dim, condition_cap)?),
            Family::DrazinPair { d1, d2, m } => {
                let pair = gen_drazin_pair(rng, d1, d2, m)?;
                Ok(Fixture { t: pair.t, p: Some(pair.p) })
            }
            Family::CoupledKernel { d1, d2 } => single(gen_coupled_kernel(rng, d1, d2)?),
            Family::ExpansiveInvertible { dim, m } => single(gen_expansive_invertible(rng, dim, m)?),
            Family::Singular { dim, rank } => single(gen_singular(rng, dim, rank)?),
            Family::SimilarUnitary { dim, spread } => {
                let (t, p) = gen_similar_unitary(rng, dim, spread)?;
                Ok(Fixture { t, p: Some(p) })
            }
            Family::ObliqueDrazin { d1, d2 } => single(gen_oblique_drazin(rng, d1, d2)?),
            Family::ScaledUnitary { dim, scale } => single(gen_haar_unitary(rng, dim)?.scale(scale)),
            Family::UnitaryPlusZero { d1, d2 } => single(gen_unitary_plus_zero(rng, d1, d2)?),
            Family::Gaussian { dim, scale } => single(gen_gaussian(rng, dim, scale)?),
        }
    }
}
