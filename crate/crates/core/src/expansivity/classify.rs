use serde::{Deserialize, Serialize};

use super::defect::{defect, is_p_isometric, Class, DefectSpec};
use crate::error::{OplabError, Result};
use crate::matrix_core::{eigenvalues, operator_norm, ComplexMatrix, Definiteness, Tolerance};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationRow {
    pub m: u32,
    pub verdict: Definiteness,
    pub min_eig: f64,
    pub max_eig: f64,
    pub classes: Vec<Class>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralSummary {
    /// `[re, im]` pairs.
    pub eigenvalues: Vec<[f64; 2]>,
    pub eigenvalue_moduli: Vec<f64>,
    pub operator_norm: f64,
    pub spectral_radius: f64,
}

impl SpectralSummary {
    pub fn of(t: &ComplexMatrix) -> Result<Self> {
        let eig = eigenvalues(t)?;
        let moduli: Vec<f64> = eig.iter().map(|z| z.norm()).collect();
        Ok(Self {
            eigenvalues: eig.iter().map(|z| [z.re, z.im]).collect(),
            spectral_radius: moduli.iter().copied().fold(0.0, f64::max),
            eigenvalue_moduli: moduli,
            operator_norm: operator_norm(t),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub rows: Vec<ClassificationRow>,
    /// `None` when the weight is not PSD, where P-isometry is undefined.
    pub p_isometric: Option<bool>,
    pub spectral: SpectralSummary,
}

/// Defect verdicts for `m = 1..=m_max`, plus P-isometry and spectral data.
pub fn classify(t: &ComplexMatrix, p: &ComplexMatrix, m_max: u32, tol: &Tolerance) -> Result<ClassificationReport> {
    if m_max == 0 {
        return Err(OplabError::Precondition("m_max must be at least 1".into()));
    }
    let rows = (1..=m_max)
        .map(|m| {
            let r = defect(&DefectSpec::new(t.clone(), p.clone(), m), tol)?;
            Ok(ClassificationRow {
                m,
                verdict: r.verdict.verdict,
                min_eig: r.verdict.min_eig,
                max_eig: r.verdict.max_eig,
                classes: r.classes,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let p_isometric = match is_p_isometric(t, p, tol) {
        Ok(b) => Some(b),
        Err(OplabError::Domain(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(ClassificationReport { rows, p_isometric, spectral: SpectralSummary::of(t)? })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn scalar_two_alternates() {
        let r = classify(&ComplexMatrix::real_diagonal(&[2.0]), &ComplexMatrix::identity(1), 3, &tol()).unwrap();
        let classes: Vec<_> = r.rows.iter().map(|row| row.classes.clone()).collect();
        assert_eq!(classes, vec![vec![Class::Expansive], vec![Class::Contractive], vec![Class::Expansive]]);
        // (1 − 4)² = 9
        assert!((r.rows[1].max_eig - 9.0).abs() < 1e-12);
        assert_eq!(r.p_isometric, Some(false));
        assert!((r.spectral.operator_norm - 2.0).abs() < 1e-14);
    }

    #[test]
    fn rotation_is_isometric_in_every_row() {
        let (c, s) = (0.6, 0.8);
        let t = ComplexMatrix::from_real_rows(&[&[c, -s], &[s, c]]);
        let r = classify(&t, &ComplexMatrix::identity(2), 4, &tol()).unwrap();
        assert!(r.rows.iter().all(|row| row.verdict == Definiteness::Zero));
        assert_eq!(r.p_isometric, Some(true));
    }

    #[test]
    fn nilpotent_is_contractive_not_expansive() {
        let t = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let r = classify(&t, &ComplexMatrix::identity(2), 1, &tol()).unwrap();
        assert_eq!(r.rows[0].verdict, Definiteness::Psd);
        assert_eq!(r.rows[0].classes, vec![Class::Contractive]);
        assert!((r.rows[0].max_eig - 1.0).abs() < 1e-15 && r.rows[0].min_eig.abs() < 1e-15);
    }

    #[test]
    fn indefinite_weight_has_no_p_isometry_answer() {
        let p = ComplexMatrix::real_diagonal(&[1.0, -1.0]);
        let r = classify(&ComplexMatrix::identity(2), &p, 1, &tol()).unwrap();
        assert_eq!(r.p_isometric, None);
    }

    #[test]
    fn report_serializes_with_uppercase_verdicts() {
        let r = classify(&ComplexMatrix::real_diagonal(&[2.0]), &ComplexMatrix::identity(1), 1, &tol()).unwrap();
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["rows"][0]["verdict"], "NSD");
        assert_eq!(json["rows"][0]["classes"][0], "expansive");
    }
}
