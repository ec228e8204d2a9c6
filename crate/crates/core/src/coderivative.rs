//! The coderivative `D*f(z)`: the transpose of the Jacobian where `f` is
//! differentiable, with exact emptiness results on known singular loci.

use alloc::vec;
use alloc::vec::Vec;

use crate::autodiff::{jacobian_ad, jacobian_fd, probe_differentiability};
use crate::linalg::{left_mul, LinalgError, Matrix, Vector};
use crate::mapping::Mapping;

/// Radius used when a user mapping has to be probed numerically.
pub const PROBE_RADIUS: f64 = 1e-4;

/// Coderivative of a single-valued map at a point.
#[derive(Clone, Debug, PartialEq)]
pub enum Coderivative {
    /// Single-valued: `y -> y M` with `M` of shape `m x n`.
    Defined(Matrix),
    /// Single-valued on duals with `y_k = 0` for every `k` in `zero_duals`,
    /// empty otherwise.
    Restricted {
        /// `m x n` matrix applied on the admissible duals.
        matrix: Matrix,
        /// Dual coordinates that must vanish.
        zero_duals: Vec<usize>,
    },
    /// Empty for every nonzero dual; the zero dual maps to the origin.
    Empty {
        /// Input dimension `n`.
        input_dim: usize,
    },
    /// Not differentiable and nothing exact is known.
    UndefinedPoint,
}

/// Report tag of a [`Coderivative`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoderivativeStatus {
    /// See [`Coderivative::Defined`].
    Defined,
    /// See [`Coderivative::Restricted`].
    Restricted,
    /// See [`Coderivative::Empty`].
    Empty,
    /// See [`Coderivative::UndefinedPoint`].
    UndefinedPoint,
}

impl CoderivativeStatus {
    /// Snake-case tag used in reports.
    pub fn as_str(self) -> &'static str {
        match self {
            CoderivativeStatus::Defined => "defined",
            CoderivativeStatus::Restricted => "restricted",
            CoderivativeStatus::Empty => "empty",
            CoderivativeStatus::UndefinedPoint => "undefined_point",
        }
    }
}

impl Coderivative {
    /// Status tag.
    pub fn status(&self) -> CoderivativeStatus {
        match self {
            Coderivative::Defined(_) => CoderivativeStatus::Defined,
            Coderivative::Restricted { .. } => CoderivativeStatus::Restricted,
            Coderivative::Empty { .. } => CoderivativeStatus::Empty,
            Coderivative::UndefinedPoint => CoderivativeStatus::UndefinedPoint,
        }
    }

    /// The matrix, when one is attached.
    pub fn matrix(&self) -> Option<&Matrix> {
        match self {
            Coderivative::Defined(m) | Coderivative::Restricted { matrix: m, .. } => Some(m),
            _ => None,
        }
    }
}

/// Result of applying a coderivative to a dual vector.
#[derive(Clone, Debug, PartialEq)]
pub enum Applied {
    /// The unique element.
    Value(Vector),
    /// The empty set.
    Empty,
    /// No information at this point.
    Undefined,
}

/// Coderivative of `f` at `z`.
///
/// Known loci are handled from the mapping's own description. Otherwise a
/// point flagged as singular is probed numerically: if the probe passes, the
/// transposed difference Jacobian is used.
pub fn coderivative_matrix<M: Mapping + ?Sized>(f: &M, z: &[f64]) -> Coderivative {
    if z.len() != f.input_dim() {
        return Coderivative::UndefinedPoint;
    }
    if f.singular_reason(z).is_none() {
        return match jacobian_ad(f, z) {
            Ok(j) => Coderivative::Defined(j.transpose()),
            Err(_) => Coderivative::UndefinedPoint,
        };
    }
    if let Some(known) = f.locus_coderivative(z) {
        return known;
    }
    if probe_differentiability(f, z, PROBE_RADIUS).differentiable {
        if let Ok(j) = jacobian_fd(f, z, None) {
            return Coderivative::Defined(j.transpose());
        }
    }
    Coderivative::UndefinedPoint
}

/// Applies a coderivative to the dual `y` (length `m`).
pub fn apply(result: &Coderivative, y: &[f64]) -> Result<Applied, LinalgError> {
    match result {
        Coderivative::Defined(m) => left_mul(y, m).map(Applied::Value),
        Coderivative::Restricted { matrix, zero_duals } => {
            if y.len() != matrix.rows() {
                return Err(LinalgError::DimensionMismatch {
                    expected: matrix.rows(),
                    found: y.len(),
                });
            }
            if zero_duals.iter().any(|&k| y[k] != 0.0) {
                Ok(Applied::Empty)
            } else {
                left_mul(y, matrix).map(Applied::Value)
            }
        }
        Coderivative::Empty { input_dim } => {
            if y.iter().all(|&v| v == 0.0) {
                Vector::new(vec![0.0; *input_dim]).map(Applied::Value)
            } else {
                Ok(Applied::Empty)
            }
        }
        Coderivative::UndefinedPoint => Ok(Applied::Undefined),
    }
}
