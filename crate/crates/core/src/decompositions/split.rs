use serde::{Deserialize, Serialize};

use super::drazin::power_cutoff;
use super::normalize_column_phases;
use crate::error::{OplabError, Result};
use crate::matrix_core::{block_split, numerical_rank, operator_norm, svd, BlockGrid, ComplexMatrix, Tolerance};

/// `T` and `Tⁿ` written in the orthogonal decomposition
/// `range(Tⁿ) ⊕ ker(T*ⁿ)`.
///
/// In that basis `Tⁿ = [[T₁ⁿ, X], [0, 0]]` and `T = [[T₁, *], [0, T₂]]`
/// with `T₂ⁿ = 0`. The lower blocks are returned as computed (not zeroed);
/// their sizes are reported in the residual fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RangeKernelSplit {
    pub n: usize,
    pub d1: usize,
    pub d2: usize,
    /// Unitary; first `d1` columns span `range(Tⁿ)`.
    pub basis: ComplexMatrix,
    /// Blocks of `basis*·Tⁿ·basis`; `b11 = T₁ⁿ`, `b12 = X`.
    pub power_blocks: BlockGrid,
    /// Blocks of `basis*·T·basis`; `b11 = T₁`, `b22 = T₂`.
    pub t_blocks: BlockGrid,
    /// Largest lower block of the conjugated `Tⁿ`.
    pub power_lower_residual: f64,
    /// ‖lower-left block of the conjugated `T`‖.
    pub t_lower_left_residual: f64,
    /// ‖T₂ⁿ‖.
    pub t2_power_residual: f64,
}

impl RangeKernelSplit {
    pub fn t1n(&self) -> &ComplexMatrix {
        &self.power_blocks.b11
    }

    pub fn x(&self) -> &ComplexMatrix {
        &self.power_blocks.b12
    }
}

pub fn range_kernel_split(t: &ComplexMatrix, n: usize, tol: &Tolerance) -> Result<RangeKernelSplit> {
    if !t.is_square() {
        return Err(OplabError::Dimension(format!("expected a square matrix, got {}x{}", t.rows(), t.cols())));
    }
    if n == 0 {
        return Err(OplabError::Precondition("power n must be at least 1".into()));
    }
    let d = t.rows();
    let tn = t.pow(n);
    let cutoff = power_cutoff(operator_norm(t), n, tol);
    let dec = svd(&tn)?;
    let d1 = numerical_rank(&dec.sigma, cutoff);
    // Left singular vectors past the rank span ker(T*ⁿ) = range(Tⁿ)^⊥.
    let basis = normalize_column_phases(&dec.u);

    let conj_power = &(&basis.adjoint() * &tn) * &basis;
    let power_blocks = block_split(&conj_power, d1)?;
    let power_lower_residual = operator_norm(&power_blocks.b21).max(operator_norm(&power_blocks.b22));
    let bound = 10.0 * cutoff + 1e3 * f64::EPSILON * operator_norm(&tn) * d.max(1) as f64;
    if power_lower_residual > bound {
        return Err(OplabError::Split { residual: power_lower_residual, bound });
    }

    let conj_t = &(&basis.adjoint() * t) * &basis;
    let t_blocks = block_split(&conj_t, d1)?;
    let t_lower_left_residual = operator_norm(&t_blocks.b21);
    let t2_power_residual = operator_norm(&t_blocks.b22.pow(n));

    Ok(RangeKernelSplit {
        n,
        d1,
        d2: d - d1,
        basis,
        power_blocks,
        t_blocks,
        power_lower_residual,
        t_lower_left_residual,
        t2_power_residual,
    })
}
