//! The [`Mapping`] abstraction shared by catalog and user-defined maps.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::coderivative::Coderivative;
use crate::dual::{DomainError, Dual};
use crate::linalg::Matrix;

/// Failure to evaluate a mapping.
#[derive(Clone, Debug, PartialEq)]
pub enum EvalError {
    /// A function left its domain of differentiability.
    Domain(DomainError),
    /// A component came out NaN or infinite.
    NonFinite {
        /// Index of the offending output component.
        component: usize,
    },
    /// Input of the wrong length.
    Dimension {
        /// Required input dimension.
        expected: usize,
        /// Supplied input dimension.
        found: usize,
    },
    /// Anything else a user-supplied evaluator wants to report.
    Other(String),
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::Domain(e) => write!(f, "{e}"),
            EvalError::NonFinite { component } => {
                write!(f, "component {} is not finite", component + 1)
            }
            EvalError::Dimension { expected, found } => {
                write!(f, "expected a point in R^{expected}, got R^{found}")
            }
            EvalError::Other(msg) => f.write_str(msg),
        }
    }
}

impl core::error::Error for EvalError {}

impl From<DomainError> for EvalError {
    fn from(e: DomainError) -> Self {
        EvalError::Domain(e)
    }
}

/// Structural norm relation between input and output.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormIdentity {
    /// `|f(x)| = |x|`.
    Preserving,
    /// `|f(x)| = |x|^2`.
    ExpandingSquare,
    /// `|f(x)| = 1`.
    ConstantOne,
    /// `|f(x)| >= |x|`.
    ExpandingGe,
    /// No declared relation.
    None,
}

impl NormIdentity {
    /// Lower-case tag used in reports.
    pub fn as_str(self) -> &'static str {
        match self {
            NormIdentity::Preserving => "preserving",
            NormIdentity::ExpandingSquare => "expanding-square",
            NormIdentity::ConstantOne => "constant-one",
            NormIdentity::ExpandingGe => "expanding-ge",
            NormIdentity::None => "none",
        }
    }
}

/// Whether an oracle value is attained or only bounds the constant from above.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleKind {
    /// The covering constant equals the value.
    Exact,
    /// The covering constant is at most the value.
    UpperBound,
}

impl OracleKind {
    /// Lower-case tag used in reports.
    pub fn as_str(self) -> &'static str {
        match self {
            OracleKind::Exact => "exact",
            OracleKind::UpperBound => "upper_bound",
        }
    }
}

/// A closed-form covering constant or bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleValue {
    /// Exact or upper bound.
    pub kind: OracleKind,
    /// Non-negative finite value.
    pub value: f64,
}

impl OracleValue {
    /// Exact constant.
    pub fn exact(value: f64) -> Self {
        OracleValue {
            kind: OracleKind::Exact,
            value,
        }
    }

    /// Upper bound.
    pub fn upper_bound(value: f64) -> Self {
        OracleValue {
            kind: OracleKind::UpperBound,
            value,
        }
    }
}

/// A map `R^n -> R^m` that can be evaluated on dual numbers.
///
/// Plain evaluation runs the dual evaluator with zero derivatives, so
/// values and derivatives always come from the same code path.
pub trait Mapping {
    /// Identifier used in reports.
    fn name(&self) -> &str;

    /// Input dimension `n`.
    fn input_dim(&self) -> usize;

    /// Output dimension `m`.
    fn output_dim(&self) -> usize;

    /// Evaluates on dual numbers. `x.len()` is `input_dim()`.
    fn eval_dual(&self, x: &[Dual]) -> Result<Vec<Dual>, EvalError>;

    /// `Some(description)` when `z` lies where the map is known not to be
    /// differentiable.
    fn singular_reason(&self, z: &[f64]) -> Option<String>;

    /// Closed-form Jacobian (`n x m`), when available off the singular locus.
    fn analytic_jacobian(&self, _z: &[f64]) -> Option<Matrix> {
        None
    }

    /// Exact knowledge of the coderivative at a point of the singular locus.
    fn locus_coderivative(&self, _z: &[f64]) -> Option<Coderivative> {
        None
    }

    /// Declared norm relation.
    fn norm_identity(&self) -> NormIdentity {
        NormIdentity::None
    }

    /// Closed-form covering constant at `z`, if one is registered.
    fn covering_oracle(&self, _z: &[f64]) -> Option<Result<OracleValue, String>> {
        None
    }

    /// Evaluates at a real point.
    fn eval(&self, x: &[f64]) -> Result<Vec<f64>, EvalError> {
        let xs: Vec<Dual> = x.iter().map(|&v| Dual::constant(v)).collect();
        Ok(eval_checked(self, &xs)?
            .into_iter()
            .map(|d| d.value)
            .collect())
    }
}

/// Dual evaluation with dimension and finiteness checks.
pub fn eval_checked<M: Mapping + ?Sized>(f: &M, x: &[Dual]) -> Result<Vec<Dual>, EvalError> {
    if x.len() != f.input_dim() {
        return Err(EvalError::Dimension {
            expected: f.input_dim(),
            found: x.len(),
        });
    }
    let out = f.eval_dual(x)?;
    if out.len() != f.output_dim() {
        return Err(EvalError::Other(alloc::format!(
            "evaluator returned {} components, expected {}",
            out.len(),
            f.output_dim()
        )));
    }
    if let Some(component) = out.iter().position(|d| !d.is_finite()) {
        return Err(EvalError::NonFinite { component });
    }
    Ok(out)
}
