use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{OplabError, Result};

/// Dense complex matrix; the finite-dimensional stand-in for every operator.
///
/// Entries are always finite. Zero-sized matrices are allowed so that empty
/// blocks of a splitting (for instance `X` when the kernel summand is trivial)
/// can be carried around without special cases.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct ComplexMatrix(DMatrix<Complex64>);

/// Wire form: `{"rows": r, "cols": c, "data": [[[re, im], ...], ...]}`.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixJson {
    rows: usize,
    cols: usize,
    data: Vec<Vec<[f64; 2]>>,
}

impl TryFrom<MatrixJson> for ComplexMatrix {
    type Error = String;

    fn try_from(json: MatrixJson) -> std::result::Result<Self, String> {
        if json.data.len() != json.rows {
            return Err(format!("expected {} rows, found {}", json.rows, json.data.len()));
        }
        let mut entries = Vec::with_capacity(json.rows * json.cols);
        for (i, row) in json.data.iter().enumerate() {
            if row.len() != json.cols {
                return Err(format!("ragged row {i}: expected {} entries, found {}", json.cols, row.len()));
            }
            entries.extend(row.iter().map(|[re, im]| Complex64::new(*re, *im)));
        }
        ComplexMatrix::from_row_major(json.rows, json.cols, entries).map_err(|e| e.to_string())
    }
}

impl From<ComplexMatrix> for MatrixJson {
    fn from(m: ComplexMatrix) -> Self {
        let data = (0..m.rows())
            .map(|i| (0..m.cols()).map(|j| [m.0[(i, j)].re, m.0[(i, j)].im]).collect())
            .collect();
        MatrixJson { rows: m.rows(), cols: m.cols(), data }
    }
}

impl ComplexMatrix {
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(OplabError::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(OplabError::Domain("matrix entries must be finite".into()));
        }
        Ok(Self(DMatrix::from_row_iterator(rows, cols, entries)))
    }

    /// Builds a real matrix from rows; panics on ragged input. Meant for literals.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        let entries = rows.iter().flat_map(|row| row.iter().map(|&x| Complex64::new(x, 0.0)));
        Self::from_row_major(r, c, entries.collect()).expect("finite literal")
    }

    /// Builds a complex matrix from rows; panics on ragged input.
    pub fn from_rows(rows: &[&[Complex64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self::from_row_major(r, c, rows.iter().flat_map(|row| row.iter().copied()).collect())
            .expect("finite literal")
    }

    pub fn scalar(z: Complex64) -> Self {
        Self(DMatrix::from_element(1, 1, z))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn diagonal(values: &[Complex64]) -> Self {
        Self(DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(values)))
    }

    pub fn real_diagonal(values: &[f64]) -> Self {
        let v: Vec<Complex64> = values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::diagonal(&v)
    }

    pub(crate) fn from_inner(m: DMatrix<Complex64>) -> Self {
        Self(m)
    }

    pub fn inner(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.rows() == 0 || self.cols() == 0
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    /// Row-major copy of the entries.
    pub fn to_row_major(&self) -> Vec<Complex64> {
        (0..self.rows())
            .flat_map(|i| (0..self.cols()).map(move |j| self.0[(i, j)]))
            .collect()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.map(|z| z * s))
    }

    pub fn scale_complex(&self, s: Complex64) -> Self {
        Self(self.0.map(|z| z * s))
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    /// `self^k` by repeated squaring; `k = 0` gives the identity.
    pub fn pow(&self, k: usize) -> Self {
        assert!(self.is_square(), "pow of a non-square matrix");
        let mut result = Self::identity(self.rows());
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = &result * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Powers `self^0, ..., self^k` by successive multiplication.
    pub fn powers(&self, k: usize) -> Vec<Self> {
        let mut out = Vec::with_capacity(k + 1);
        out.push(Self::identity(self.rows()));
        for j in 1..=k {
            let next = &out[j - 1] * self;
            out.push(next);
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Hermitian part `(M + M*)/2`.
    pub fn hermitian_part(&self) -> Self {
        Self((&self.0 + self.0.adjoint()) * Complex64::new(0.5, 0.0))
    }

    pub fn columns(&self, start: usize, count: usize) -> Self {
        Self(self.0.columns(start, count).into_owned())
    }

    pub fn submatrix(&self, row: usize, col: usize, rows: usize, cols: usize) -> Self {
        Self(self.0.view((row, col), (rows, cols)).into_owned())
    }

    pub fn hstack(left: &Self, right: &Self) -> Result<Self> {
        if left.rows() != right.rows() {
            return Err(OplabError::Dimension(format!(
                "hstack of {} and {} rows",
                left.rows(),
                right.rows()
            )));
        }
        let mut m = DMatrix::zeros(left.rows(), left.cols() + right.cols());
        m.view_mut((0, 0), (left.rows(), left.cols())).copy_from(&left.0);
        m.view_mut((0, left.cols()), (right.rows(), right.cols())).copy_from(&right.0);
        Ok(Self(m))
    }

    /// `self ⊕ other`, block diagonal.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let (r1, c1) = (self.rows(), self.cols());
        let mut m = DMatrix::zeros(r1 + other.rows(), c1 + other.cols());
        m.view_mut((0, 0), (r1, c1)).copy_from(&self.0);
        m.view_mut((r1, c1), (other.rows(), other.cols())).copy_from(&other.0);
        Self(m)
    }

    /// Exact inverse via LU; `None` when LU reports singularity.
    pub fn try_inverse(&self) -> Option<Self> {
        if self.rows() == 0 {
            return Some(self.clone());
        }
        self.0.clone().try_inverse().map(Self)
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.cols(), "vector length mismatch");
        (0..self.rows())
            .map(|i| (0..self.cols()).map(|j| self.0[(i, j)] * x[j]).sum())
            .collect()
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexMatrix {}x{} [", self.rows(), self.cols())?;
        for i in 0..self.rows() {
            write!(f, "\n  ")?;
            for j in 0..self.cols() {
                let z = self.0[(i, j)];
                write!(f, "{:+.6e}{:+.6e}i  ", z.re, z.im)?;
            }
        }
        write!(f, "\n]")
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $op:tt, $check:expr) => {
        impl $tr<&ComplexMatrix> for &ComplexMatrix {
            type Output = ComplexMatrix;
            fn $method(self, rhs: &ComplexMatrix) -> ComplexMatrix {
                let check: fn(&ComplexMatrix, &ComplexMatrix) -> bool = $check;
                assert!(
                    check(self, rhs),
                    "incompatible shapes {}x{} and {}x{}",
                    self.rows(),
                    self.cols(),
                    rhs.rows(),
                    rhs.cols()
                );
                ComplexMatrix(&self.0 $op &rhs.0)
            }
        }
        impl $tr<ComplexMatrix> for ComplexMatrix {
            type Output = ComplexMatrix;
            fn $method(self, rhs: ComplexMatrix) -> ComplexMatrix {
                &self $op &rhs
            }
        }
        impl $tr<&ComplexMatrix> for ComplexMatrix {
            type Output = ComplexMatrix;
            fn $method(self, rhs: &ComplexMatrix) -> ComplexMatrix {
                &self $op rhs
            }
        }
        impl $tr<ComplexMatrix> for &ComplexMatrix {
            type Output = ComplexMatrix;
            fn $method(self, rhs: ComplexMatrix) -> ComplexMatrix {
                self $op &rhs
            }
        }
    };
}

binop!(Add, add, +, |a, b| a.rows() == b.rows() && a.cols() == b.cols());
binop!(Sub, sub, -, |a, b| a.rows() == b.rows() && a.cols() == b.cols());
binop!(Mul, mul, *, |a, b| a.cols() == b.rows());

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-&self.0)
    }
}

impl Neg for ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-self.0)
    }
}

/// The 2×2 block grid `[[b11, b12], [b21, b22]]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockGrid {
    pub b11: ComplexMatrix,
    pub b12: ComplexMatrix,
    pub b21: ComplexMatrix,
    pub b22: ComplexMatrix,
}

/// Assembles `[[b11, b12], [b21, b22]]`; blocks must be conformable.
pub fn block_compose(grid: &BlockGrid) -> Result<ComplexMatrix> {
    let BlockGrid { b11, b12, b21, b22 } = grid;
    let (r1, c1) = (b11.rows(), b11.cols());
    let (r2, c2) = (b22.rows(), b22.cols());
    let conformable = b12.rows() == r1
        && b12.cols() == c2
        && b21.rows() == r2
        && b21.cols() == c1;
    if !conformable {
        return Err(OplabError::Dimension(format!(
            "non-conformable blocks: 11 {}x{}, 12 {}x{}, 21 {}x{}, 22 {}x{}",
            r1,
            c1,
            b12.rows(),
            b12.cols(),
            b21.rows(),
            b21.cols(),
            r2,
            c2
        )));
    }
    let mut m = DMatrix::zeros(r1 + r2, c1 + c2);
    m.view_mut((0, 0), (r1, c1)).copy_from(b11.inner());
    m.view_mut((0, c1), (r1, c2)).copy_from(b12.inner());
    m.view_mut((r1, 0), (r2, c1)).copy_from(b21.inner());
    m.view_mut((r1, c1), (r2, c2)).copy_from(b22.inner());
    Ok(ComplexMatrix(m))
}

/// Splits a square matrix after its first `d1` rows and columns.
///
/// `d1` may be `0` or the full dimension, in which case some blocks are empty.
pub fn block_split(m: &ComplexMatrix, d1: usize) -> Result<BlockGrid> {
    if !m.is_square() {
        return Err(OplabError::Dimension(format!(
            "block_split needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let d = m.rows();
    if d1 > d {
        return Err(OplabError::Dimension(format!("split point {d1} exceeds dimension {d}")));
    }
    let d2 = d - d1;
    Ok(BlockGrid {
        b11: m.submatrix(0, 0, d1, d1),
        b12: m.submatrix(0, d1, d1, d2),
        b21: m.submatrix(d1, 0, d2, d1),
        b22: m.submatrix(d1, d1, d2, d2),
    })
}
