//! Small dense linear algebra: vectors, row-major matrices, singular values.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Deref;

use crate::math;

/// Relative orthogonality target for the Jacobi sweeps.
const JACOBI_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 200;
/// Singular values below this fraction of the Frobenius norm are reported as 0.
pub const RANK_CLAMP: f64 = 1e-10;

/// Errors raised by constructors and shape-checked products.
#[derive(Clone, Debug, PartialEq)]
pub enum LinalgError {
    /// A vector or matrix with no entries.
    Empty,
    /// An entry is NaN or infinite.
    NonFinite {
        /// Position of the first offending entry in storage order.
        index: usize,
    },
    /// Operand dimensions do not line up.
    DimensionMismatch {
        /// Dimension required by the other operand.
        expected: usize,
        /// Dimension supplied.
        found: usize,
    },
}

impl fmt::Display for LinalgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinalgError::Empty => write!(f, "empty vector or matrix"),
            LinalgError::NonFinite { index } => write!(f, "non-finite entry at index {index}"),
            LinalgError::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
        }
    }
}

impl core::error::Error for LinalgError {}

fn check_finite(entries: &[f64]) -> Result<(), LinalgError> {
    match entries.iter().position(|x| !x.is_finite()) {
        Some(index) => Err(LinalgError::NonFinite { index }),
        None => Ok(()),
    }
}

/// A point of `R^k` with `k >= 1` and finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct Vector(Vec<f64>);

impl Vector {
    /// Validates dimension and finiteness.
    pub fn new(entries: Vec<f64>) -> Result<Self, LinalgError> {
        if entries.is_empty() {
            return Err(LinalgError::Empty);
        }
        check_finite(&entries)?;
        Ok(Vector(entries))
    }

    /// Copies a slice into a checked vector.
    pub fn from_slice(entries: &[f64]) -> Result<Self, LinalgError> {
        Self::new(entries.to_vec())
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        math::norm(&self.0)
    }

    /// Unwraps the entries.
    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for Vector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl AsRef<[f64]> for Vector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Euclidean norm of a slice.
pub fn norm(v: &[f64]) -> f64 {
    math::norm(v)
}

/// A dense row-major matrix with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Builds a matrix from row-major storage.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, LinalgError> {
        if rows == 0 || cols == 0 {
            return Err(LinalgError::Empty);
        }
        if data.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        check_finite(&data)?;
        Ok(Matrix { rows, cols, data })
    }

    /// Builds a matrix from equal-length rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, LinalgError> {
        let cols = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(LinalgError::DimensionMismatch {
                    expected: cols,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    /// All-zero matrix. Panics on a zero dimension.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Identity of order `n`.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Number of rows.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of columns.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Entry `(i, j)`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub(crate) fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    /// Row `i` as a slice.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Row-major storage.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Rows as owned vectors, convenient for serialisation.
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    /// The transpose.
    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |a, &x| a.max(math::abs(x)))
    }
}

/// Row vector times matrix: `x_j = sum_i y_i M[i][j]`.
pub fn left_mul(y: &[f64], m: &Matrix) -> Result<Vector, LinalgError> {
    if y.len() != m.rows {
        return Err(LinalgError::DimensionMismatch {
            expected: m.rows,
            found: y.len(),
        });
    }
    let mut out = vec![0.0; m.cols];
    for (i, &yi) in y.iter().enumerate() {
        if yi == 0.0 {
            continue;
        }
        for (o, &mij) in out.iter_mut().zip(m.row(i)) {
            *o += yi * mij;
        }
    }
    Vector::new(out)
}

/// Square root of the sum of squared entries.
pub fn frobenius_norm(m: &Matrix) -> f64 {
    math::norm(&m.data)
}

/// Singular values in descending order, `min(rows, cols)` of them.
///
/// One-sided Jacobi: pairs of rows are rotated until mutually orthogonal,
/// after which the row norms are the singular values. Values below
/// [`RANK_CLAMP`] times the Frobenius norm are set to exactly zero.
pub fn singular_values(m: &Matrix) -> Vec<f64> {
    let work = if m.rows <= m.cols {
        m.clone()
    } else {
        m.transpose()
    };
    let (r, c) = (work.rows, work.cols);
    let mut a = work.data;

    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..r {
            for q in (p + 1)..r {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for k in 0..c {
                    let (ap, aq) = (a[p * c + k], a[q * c + k]);
                    alpha += ap * ap;
                    beta += aq * aq;
                    gamma += ap * aq;
                }
                if gamma == 0.0 || math::abs(gamma) <= JACOBI_TOL * math::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (math::abs(zeta) + math::sqrt(1.0 + zeta * zeta));
                let cs = 1.0 / math::sqrt(1.0 + t * t);
                let sn = cs * t;
                for k in 0..c {
                    let (ap, aq) = (a[p * c + k], a[q * c + k]);
                    a[p * c + k] = cs * ap - sn * aq;
                    a[q * c + k] = sn * ap + cs * aq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let frob = frobenius_norm(m);
    let mut sv: Vec<f64> = (0..r)
        .map(|i| {
            let s = math::norm(&a[i * c..(i + 1) * c]);
            if s < RANK_CLAMP * frob {
                0.0
            } else {
                s
            }
        })
        .collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

/// Smallest singular value counted on the row (dual) side: `min_{|y|=1} |y M|`.
///
/// Exactly zero when `rows > cols`.
pub fn min_singular_value(m: &Matrix) -> f64 {
    if m.rows > m.cols {
        return 0.0;
    }
    singular_values(m).last().copied().unwrap_or(0.0)
}

/// Solves `A x = b` for square `A` by Gaussian elimination with partial
/// pivoting. Returns `None` when a pivot falls below `1e-13 * max|A|`.
pub fn solve_linear(a: &Matrix, b: &[f64]) -> Option<Vec<f64>> {
    let n = a.rows;
    if a.cols != n || b.len() != n {
        return None;
    }
    let scale = a.max_abs();
    if scale == 0.0 {
        return None;
    }
    let mut m = a.data.clone();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| math::abs(m[i * n + col]).total_cmp(&math::abs(m[j * n + col])))
            .unwrap_or(col);
        if math::abs(m[piv * n + col]) <= 1e-13 * scale {
            return None;
        }
        if piv != col {
            for k in 0..n {
                m.swap(col * n + k, piv * n + k);
            }
            rhs.swap(col, piv);
        }
        for i in (col + 1)..n {
            let factor = m[i * n + col] / m[col * n + col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                m[i * n + k] -= factor * m[col * n + k];
            }
            rhs[i] -= factor * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = rhs[i];
        for k in (i + 1)..n {
            s -= m[i * n + k] * x[k];
        }
        x[i] = s / m[i * n + i];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn left_mul_examples() {
        let id = Matrix::identity(2);
        assert_eq!(left_mul(&[1.0, 0.0], &id).unwrap().as_ref(), &[1.0, 0.0]);

        let m = Matrix::from_rows(&[[3.0, 4.0, 5.0], [6.0, 7.0, 8.0]]).unwrap();
        assert_eq!(
            left_mul(&[1.0, 2.0], &m).unwrap().as_ref(),
            &[15.0, 18.0, 21.0]
        );

        let r = 1.0 / math::sqrt(2.0);
        let m = Matrix::from_rows(&[[1.0, 0.0], [0.0, r], [0.0, r]]).unwrap();
        let x = left_mul(&[0.3, -1.2, 2.5], &m).unwrap();
        assert_eq!(x[0], 0.3);
        assert!((x[1] - (-1.2 + 2.5) * r).abs() < 1e-15);
    }

    #[test]
    fn left_mul_rejects_bad_shape() {
        let m = Matrix::identity(3);
        assert_eq!(
            left_mul(&[1.0, 2.0], &m),
            Err(LinalgError::DimensionMismatch {
                expected: 3,
                found: 2
            })
        );
    }

    #[test]
    fn constructors_validate() {
        assert_eq!(Vector::new(vec![]), Err(LinalgError::Empty));
        assert_eq!(
            Vector::new(vec![1.0, f64::NAN]),
            Err(LinalgError::NonFinite { index: 1 })
        );
        assert!(Matrix::new(2, 2, vec![1.0; 3]).is_err());
        assert!(Matrix::new(1, 2, vec![1.0, f64::INFINITY]).is_err());
    }

    #[test]
    fn singular_value_examples() {
        assert_eq!(min_singular_value(&Matrix::identity(2)), 1.0);
        let two = Matrix::from_rows(&[[2.0, 0.0], [0.0, 2.0]]).unwrap();
        assert_eq!(min_singular_value(&two), 2.0);
        for k in 0..20 {
            let t = 0.37 * k as f64;
            let (c, s) = (libm::cos(t), libm::sin(t));
            let m = Matrix::from_rows(&[[c, c], [-s, -s]]).unwrap();
            assert_eq!(min_singular_value(&m), 0.0, "t = {t}");
        }
    }

    #[test]
    fn frobenius_examples() {
        assert!((frobenius_norm(&Matrix::identity(2)) - math::sqrt(2.0)).abs() < 1e-15);
        assert_eq!(
            frobenius_norm(&Matrix::from_rows(&[[3.0, 4.0]]).unwrap()),
            5.0
        );
        let two = Matrix::from_rows(&[[2.0, 0.0], [0.0, 2.0]]).unwrap();
        assert!((frobenius_norm(&two) - 2.0 * math::sqrt(2.0)).abs() < 1e-15);
    }

    #[test]
    fn tall_matrix_has_zero_minimum() {
        let m = Matrix::from_rows(&[[1.0, 2.0], [3.0, 5.0], [7.0, 11.0]]).unwrap();
        assert_eq!(min_singular_value(&m), 0.0);
        assert_eq!(singular_values(&m).len(), 2);
    }

    #[test]
    fn solves_small_system() {
        let a = Matrix::from_rows(&[[0.0, 2.0], [3.0, 1.0]]).unwrap();
        let x = solve_linear(&a, &[4.0, 5.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 2.0).abs() < 1e-15);
        let sing = Matrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]).unwrap();
        assert!(solve_linear(&sing, &[1.0, 1.0]).is_none());
    }
}
