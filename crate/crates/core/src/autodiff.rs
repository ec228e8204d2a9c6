//! Jacobians by dual numbers and central differences, and a numerical
//! differentiability probe.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::dual::Dual;
use crate::linalg::{left_mul, Matrix};
use crate::mapping::{eval_checked, EvalError, Mapping};
use crate::math;
use crate::sampling::sphere_directions;

/// Number of probe directions.
pub const PROBE_DIRECTIONS: usize = 16;
/// Relative remainder tolerance of the probe.
pub const PROBE_TOL: f64 = 1e-4;

/// Failure to produce a Jacobian.
#[derive(Clone, Debug, PartialEq)]
pub enum AdError {
    /// The point lies on the mapping's non-differentiability locus.
    NonDifferentiable {
        /// The offending point.
        point: Vec<f64>,
        /// What vanishes there.
        reason: String,
    },
    /// Evaluation failed at the point or at a stencil point.
    Eval(EvalError),
    /// Non-positive or non-finite step.
    InvalidStep(f64),
}

impl fmt::Display for AdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AdError::NonDifferentiable { point, reason } => {
                write!(f, "not differentiable at {point:?}: {reason}")
            }
            AdError::Eval(e) => write!(f, "evaluation failed: {e}"),
            AdError::InvalidStep(h) => write!(f, "step must be positive and finite, got {h}"),
        }
    }
}

impl core::error::Error for AdError {}

impl From<EvalError> for AdError {
    fn from(e: EvalError) -> Self {
        AdError::Eval(e)
    }
}

fn check_dim<M: Mapping + ?Sized>(f: &M, z: &[f64]) -> Result<(), AdError> {
    if z.len() != f.input_dim() {
        return Err(AdError::Eval(EvalError::Dimension {
            expected: f.input_dim(),
            found: z.len(),
        }));
    }
    Ok(())
}

/// Jacobian `n x m` with entry `(j, i) = d f_i / d x_j`, one dual pass per
/// input coordinate.
pub fn jacobian_ad<M: Mapping + ?Sized>(f: &M, z: &[f64]) -> Result<Matrix, AdError> {
    check_dim(f, z)?;
    if let Some(reason) = f.singular_reason(z) {
        return Err(AdError::NonDifferentiable {
            point: z.to_vec(),
            reason,
        });
    }
    let (n, m) = (f.input_dim(), f.output_dim());
    let mut jac = Matrix::zeros(n, m);
    let mut x: Vec<Dual> = z.iter().map(|&v| Dual::constant(v)).collect();
    for j in 0..n {
        x[j].deriv = 1.0;
        let out = eval_checked(f, &x)?;
        x[j].deriv = 0.0;
        for (i, d) in out.iter().enumerate() {
            jac.set(j, i, d.deriv);
        }
    }
    Ok(jac)
}

/// Default central-difference step `cbrt(eps) * max(1, |z|)`.
pub fn default_step(z: &[f64]) -> f64 {
    math::cbrt(f64::EPSILON) * math::norm(z).max(1.0)
}

/// Central-difference Jacobian (`n x m`). `h = None` uses [`default_step`].
pub fn jacobian_fd<M: Mapping + ?Sized>(
    f: &M,
    z: &[f64],
    h: Option<f64>,
) -> Result<Matrix, AdError> {
    check_dim(f, z)?;
    let h = h.unwrap_or_else(|| default_step(z));
    if !(h > 0.0 && h.is_finite()) {
        return Err(AdError::InvalidStep(h));
    }
    let (n, m) = (f.input_dim(), f.output_dim());
    let mut jac = Matrix::zeros(n, m);
    let mut x = z.to_vec();
    for j in 0..n {
        x[j] = z[j] + h;
        let plus = f.eval(&x)?;
        x[j] = z[j] - h;
        let minus = f.eval(&x)?;
        x[j] = z[j];
        for i in 0..m {
            jac.set(j, i, (plus[i] - minus[i]) / (2.0 * h));
        }
    }
    Ok(jac)
}

/// Outcome of [`probe_differentiability`].
#[derive(Clone, Debug, PartialEq)]
pub struct DifferentiabilityReport {
    /// Probed point.
    pub point: Vec<f64>,
    /// Whether every remainder stayed within tolerance.
    pub differentiable: bool,
    /// Largest first-order remainder norm seen (infinite if an evaluation failed).
    pub directional_spread: f64,
    /// Number of remainder evaluations.
    pub probes: usize,
}

/// Checks the first-order remainder `|f(z+tv) - f(z) - t v J| / t` along
/// [`PROBE_DIRECTIONS`] directions at scales `radius`, `radius/8`,
/// `radius/64`, with `J` the central-difference Jacobian at `z`.
///
/// `z` is differentiable when the largest remainder is at most
/// `1e-4 * max(1, |f(z)|)`. Failed evaluations count as non-differentiable.
pub fn probe_differentiability<M: Mapping + ?Sized>(
    f: &M,
    z: &[f64],
    radius: f64,
) -> DifferentiabilityReport {
    let failed = |probes| DifferentiabilityReport {
        point: z.to_vec(),
        differentiable: false,
        directional_spread: f64::INFINITY,
        probes,
    };
    if !(radius > 0.0 && radius.is_finite()) || z.len() != f.input_dim() {
        return failed(0);
    }
    let (fz, jac) = match (f.eval(z), jacobian_fd(f, z, None)) {
        (Ok(fz), Ok(jac)) => (fz, jac),
        _ => return failed(0),
    };
    let tol = PROBE_TOL * math::norm(&fz).max(1.0);
    let mut spread = 0.0_f64;
    let mut probes = 0;
    for v in sphere_directions(z.len(), PROBE_DIRECTIONS, 0) {
        let lin = match left_mul(&v, &jac) {
            Ok(l) => l,
            Err(_) => return failed(probes),
        };
        for t in [radius, radius / 8.0, radius / 64.0] {
            probes += 1;
            let x: Vec<f64> = z.iter().zip(&v).map(|(a, b)| a + t * b).collect();
            let fx = match f.eval(&x) {
                Ok(fx) => fx,
                Err(_) => return failed(probes),
            };
            let rem: Vec<f64> = (0..fx.len())
                .map(|i| (fx[i] - fz[i] - t * lin[i]) / t)
                .collect();
            spread = spread.max(math::norm(&rem));
        }
    }
    DifferentiabilityReport {
        point: z.to_vec(),
        differentiable: spread <= tol,
        directional_spread: spread,
        probes,
    }
}
