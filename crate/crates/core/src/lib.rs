//! Numerical toolkit for single-valued maps `f: R^n -> R^m`.
//!
//! The crate computes Jacobians by forward-mode dual numbers and central
//! differences, materialises the coderivative `D*f(z) = grad f(z)^T`, and
//! estimates the covering constant
//!
//! ```text
//! alpha(f, z, w) = sup_{eta > 0} inf { sigma_min(D*f(x)) : x in B(z, eta), f(x) in B(w, eta) }
//! ```
//!
//! by a shrinking-ball search. A catalog of worked mappings with known
//! constants doubles as a test oracle, and [`amz`] solves parameterised
//! coincidence equations `F(x) = G(x, p)` with an a-posteriori distance
//! certificate.
//!
//! Conventions: points are row vectors. A Jacobian is stored `n x m` with
//! entry `(j, i) = d f_i / d x_j`; the coderivative matrix is its `m x n`
//! transpose and acts on dual vectors from the left.
//!
//! The crate is `no_std` and needs only `alloc`.
#![no_std]
#![warn(missing_docs)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod amz;
pub mod autodiff;
pub mod catalog;
pub mod coderivative;
pub mod covering;
pub mod dual;
pub mod linalg;
pub mod mapping;
mod math;
pub mod sampling;

pub use autodiff::{
    jacobian_ad, jacobian_fd, probe_differentiability, AdError, DifferentiabilityReport,
};
pub use catalog::{CatalogError, MappingSpec};
pub use coderivative::{apply, coderivative_matrix, Applied, Coderivative, CoderivativeStatus};
pub use covering::{BallSpec, CoveringError, CoveringEstimate, CoveringMethod, SamplingConfig};
pub use dual::Dual;
pub use linalg::{frobenius_norm, left_mul, min_singular_value, LinalgError, Matrix, Vector};
pub use mapping::{EvalError, Mapping, NormIdentity, OracleKind, OracleValue};
