//! The defect operator `Δᵐ_{T*,T}(P)`, its sign classification,
//! P-isometries and the P-seminorm.

mod classify;
mod defect;

pub use classify::{classify, ClassificationReport, ClassificationRow, SpectralSummary};
pub use defect::{
    binomial, classes_of, defect, defect_tilde, is_mp_isometric, is_p_isometric, norm_equivalence_bounds,
    p_isometry_residual, seminorm_p, Class, DefectResult, DefectSpec, MAX_ORDER,
};
