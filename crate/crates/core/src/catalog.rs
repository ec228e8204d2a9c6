//! Worked mappings with closed-form Jacobians, singular loci, norm relations
//! and covering constants.
//!
//! | name    | map                                              | covering constant             |
//! |---------|--------------------------------------------------|-------------------------------|
//! | `ex4_3` | `(x1, x2/sqrt2, x2/sqrt2)`                       | 0                             |
//! | `ex4_4` | `(x1, x1 x2, x2)`                                | 0                             |
//! | `f5_1`  | `((x1^2-x2^2)/|x|, 2 x1 x2/|x|)`, `0 -> 0`       | 1                             |
//! | `g5_11` | `f5_1` on `(x1,x2)` and on `(x3,x4)`             | 1 away from the origin        |
//! | `h5_18` | `(x1^2-x2^2, 2x1x2, x3^2-x4^2, 2x3x4)/|x|`       | 0 or at most `1/sqrt2`        |
//! | `ex6_1` | `(sqrt(x1^2+x2^2), x3)`                          | 1 off the `x3` axis           |
//! | `ex6_2` | `(x1 x2, x1 x3)`                                 | `|z1|`                        |
//! | `ex6_3` | `(x1^2 x3, x2^2 x3)`                             | at most `2|z1 z3|` if `z1=z2` |
//! | `ex6_4` | `(x1, x2)/(1+x3^2)`                              | `1/(1+z3^2)`                  |
//! | `ex6_5` | `(x1, x2)`                                       | 1                             |
//! | `ex6_6` | `(sin(x1+x2), cos(x1+x2))`                       | 0                             |
//! | `ex6_7` | `(x1^2-x2^2, 2 x1 x2)`                           | `2|z|`                        |
//! | `ex6_8` | `(e^(x1+x2), e^(-x1-x2))`                        | 0                             |
//! | `ex6_9` | `(ln(1+|x|^2), 1/(1+|x|^2))`                     | 0                             |
//! | `ex6_10`| `x/|x|`, `0 -> 0`                                | 0 away from the origin        |
//! | `ex6_11`| `(x1^2, x2^2)/|x|`, `0 -> 0`                     | bounded, see [`oracle_constant`] |

use alloc::borrow::ToOwned;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;
use core::fmt;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::coderivative::Coderivative;
use crate::dual::Dual;
use crate::linalg::Matrix;
use crate::mapping::{EvalError, Mapping, NormIdentity, OracleValue};
use crate::math;

type EvalFn = fn(&[Dual]) -> Result<Vec<Dual>, EvalError>;
type JacobianFn = fn(&[f64]) -> Matrix;
type LocusFn = fn(&[f64]) -> Option<&'static str>;
type OracleFn = fn(&[f64]) -> Result<OracleValue, &'static str>;
type LocusCoderivativeFn = fn(&[f64]) -> Coderivative;

/// A registered mapping.
#[derive(Clone, Copy)]
pub struct MappingSpec {
    /// Registry key.
    pub name: &'static str,
    /// Input dimension.
    pub n: usize,
    /// Output dimension.
    pub m: usize,
    /// Formula in the inline expression syntax, or a prose description for
    /// piecewise maps.
    pub formula: &'static str,
    /// Declared norm relation.
    pub norm_identity: NormIdentity,
    /// Second partials exist and are continuous off the singular locus.
    pub twice_differentiable_off_locus: bool,
    eval: EvalFn,
    jacobian: JacobianFn,
    locus: LocusFn,
    oracle: Option<OracleFn>,
    locus_coderivative: Option<LocusCoderivativeFn>,
}

impl fmt::Debug for MappingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MappingSpec")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("m", &self.m)
            .field("norm_identity", &self.norm_identity)
            .finish_non_exhaustive()
    }
}

impl MappingSpec {
    /// Whether a covering oracle is registered.
    pub fn has_oracle(&self) -> bool {
        self.oracle.is_some()
    }

    /// Kind of oracle as a report tag, `"none"` when there is none.
    ///
    /// Oracles whose kind depends on the point report `"mixed"`.
    pub fn oracle_tag(&self) -> &'static str {
        match self.name {
            _ if self.oracle.is_none() => "none",
            "h5_18" | "ex6_11" => "mixed",
            "ex6_3" => "upper_bound",
            _ => "exact",
        }
    }
}

impl Mapping for MappingSpec {
    fn name(&self) -> &str {
        self.name
    }

    fn input_dim(&self) -> usize {
        self.n
    }

    fn output_dim(&self) -> usize {
        self.m
    }

    fn eval_dual(&self, x: &[Dual]) -> Result<Vec<Dual>, EvalError> {
        (self.eval)(x)
    }

    fn singular_reason(&self, z: &[f64]) -> Option<String> {
        (self.locus)(z).map(ToOwned::to_owned)
    }

    fn analytic_jacobian(&self, z: &[f64]) -> Option<Matrix> {
        if z.len() != self.n || (self.locus)(z).is_some() {
            return None;
        }
        Some((self.jacobian)(z))
    }

    fn locus_coderivative(&self, z: &[f64]) -> Option<Coderivative> {
        match self.locus_coderivative {
            Some(f) if (self.locus)(z).is_some() => Some(f(z)),
            _ => None,
        }
    }

    fn norm_identity(&self) -> NormIdentity {
        self.norm_identity
    }

    fn covering_oracle(&self, z: &[f64]) -> Option<Result<OracleValue, String>> {
        self.oracle.map(|o| o(z).map_err(ToOwned::to_owned))
    }
}

/// Registry lookups and oracle preconditions.
#[derive(Clone, Debug, PartialEq)]
pub enum CatalogError {
    /// No mapping with that name.
    NotFound {
        /// Requested name.
        name: String,
    },
    /// The mapping has no covering oracle.
    NoOracle {
        /// Mapping name.
        name: &'static str,
    },
    /// The point violates the oracle's side condition.
    Precondition {
        /// The condition that must hold.
        condition: String,
    },
    /// The point has the wrong dimension.
    Dimension {
        /// Required dimension.
        expected: usize,
        /// Supplied dimension.
        found: usize,
    },
}

impl fmt::Display for CatalogError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CatalogError::NotFound { name } => {
                write!(f, "unknown mapping `{name}`; available: ")?;
                for (i, s) in CATALOG.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    f.write_str(s.name)?;
                }
                Ok(())
            }
            CatalogError::NoOracle { name } => write!(f, "`{name}` has no covering oracle"),
            CatalogError::Precondition { condition } => f.write_str(condition),
            CatalogError::Dimension { expected, found } => {
                write!(f, "expected a point in R^{expected}, got R^{found}")
            }
        }
    }
}

impl core::error::Error for CatalogError {}

/// Every registered mapping.
pub fn all() -> &'static [MappingSpec] {
    &CATALOG
}

/// Looks a mapping up by name.
pub fn get(name: &str) -> Result<&'static MappingSpec, CatalogError> {
    CATALOG
        .iter()
        .find(|s| s.name == name)
        .ok_or_else(|| CatalogError::NotFound {
            name: name.to_owned(),
        })
}

/// Closed-form covering constant or bound at `z`.
///
/// For `ex6_11` this is the tightest of `1/sqrt2`,
/// `2|z1 z2| / sqrt(z1^4 + z2^4)` and the exact zero on the axes.
pub fn oracle_constant(spec: &MappingSpec, z: &[f64]) -> Result<OracleValue, CatalogError> {
    if z.len() != spec.n {
        return Err(CatalogError::Dimension {
            expected: spec.n,
            found: z.len(),
        });
    }
    let oracle = spec
        .oracle
        .ok_or(CatalogError::NoOracle { name: spec.name })?;
    oracle(z).map_err(|c| CatalogError::Precondition {
        condition: c.to_owned(),
    })
}

/// Checks the declared norm relation at `samples` pseudo-random points of
/// `[-3, 3]^n`, to `1e-10` relative.
///
/// Returns `false` when no relation is declared.
pub fn verify_norm_identity(spec: &MappingSpec, samples: usize) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6e6f726d);
    let mut uniform = move || (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    let close = |a: f64, b: f64| math::abs(a - b) <= 1e-10 * b.max(1e-300);
    for _ in 0..samples {
        let x: Vec<f64> = (0..spec.n).map(|_| 6.0 * uniform() - 3.0).collect();
        let fx = match spec.eval(&x) {
            Ok(v) => v,
            Err(_) => return false,
        };
        let (nx, nf) = (math::norm(&x), math::norm(&fx));
        let ok = match spec.norm_identity {
            NormIdentity::Preserving => close(nf, nx),
            NormIdentity::ExpandingSquare => close(nf, nx * nx),
            NormIdentity::ConstantOne => close(nf, 1.0),
            NormIdentity::ExpandingGe => nf >= nx * (1.0 - 1e-10),
            NormIdentity::None => false,
        };
        if !ok {
            return false;
        }
    }
    true
}

fn c(v: f64) -> Dual {
    Dual::constant(v)
}

fn is_origin(x: &[Dual]) -> bool {
    x.iter().all(|d| d.value == 0.0)
}

fn mat(rows: &[&[f64]]) -> Matrix {
    Matrix::from_rows(rows).expect("closed-form Jacobian has finite entries")
}

// (x1^2 - x2^2, 2 x1 x2) / |x|, with the origin sent to itself.
fn fold_pair(a: Dual, b: Dual) -> Result<[Dual; 2], EvalError> {
    if a.value == 0.0 && b.value == 0.0 {
        return Ok([c(0.0), c(0.0)]);
    }
    let r = (a * a + b * b).sqrt()?;
    Ok([(a * a - b * b) / r, 2.0 * a * b / r])
}

// Jacobian block of `fold_pair`, rows are inputs.
fn fold_pair_jacobian(z1: f64, z2: f64) -> [[f64; 2]; 2] {
    let s = z1 * z1 + z2 * z2;
    let r3 = s * math::sqrt(s);
    [
        [(z1 * z1 + 3.0 * z2 * z2) * z1 / r3, 2.0 * z2 * z2 * z2 / r3],
        [
            -(3.0 * z1 * z1 + z2 * z2) * z2 / r3,
            2.0 * z1 * z1 * z1 / r3,
        ],
    ]
}

fn origin_locus(z: &[f64]) -> Option<&'static str> {
    z.iter()
        .all(|&v| v == 0.0)
        .then_some("the norm |x| vanishes")
}

fn no_locus(_: &[f64]) -> Option<&'static str> {
    None
}

fn pair_locus(z: &[f64]) -> Option<&'static str> {
    if z[0] == 0.0 && z[1] == 0.0 {
        Some("x1^2 + x2^2 vanishes")
    } else if z[2] == 0.0 && z[3] == 0.0 {
        Some("x3^2 + x4^2 vanishes")
    } else {
        None
    }
}

fn first_pair_locus(z: &[f64]) -> Option<&'static str> {
    (z[0] == 0.0 && z[1] == 0.0).then_some("x1^2 + x2^2 vanishes")
}

fn empty_at(z: &[f64]) -> Coderivative {
    Coderivative::Empty { input_dim: z.len() }
}

// At a point where one pair vanishes and the other does not, the
// coderivative exists only for duals vanishing on the degenerate pair, and
// then acts as the folding block on the other pair.
fn pair_locus_coderivative(z: &[f64]) -> Coderivative {
    let first_zero = z[0] == 0.0 && z[1] == 0.0;
    let second_zero = z[2] == 0.0 && z[3] == 0.0;
    if first_zero && second_zero {
        return empty_at(z);
    }
    let (live, dead) = if first_zero { (2, 0) } else { (0, 2) };
    let block = fold_pair_jacobian(z[live], z[live + 1]);
    let mut m = Matrix::zeros(4, 4);
    for (j, row) in block.iter().enumerate() {
        for (i, v) in row.iter().enumerate() {
            // transpose of the Jacobian block
            m.set(live + i, live + j, *v);
        }
    }
    Coderivative::Restricted {
        matrix: m,
        zero_duals: vec![dead, dead + 1],
    }
}

fn ex4_3(x: &[Dual]) -> Result<Vec<Dual>, EvalError> {
    Ok(vec![
        x[0],
        x[1] / core::f64::consts::SQRT_2,
        x[1] / core::f64::consts::SQRT_2,
    ])
}

fn ex4_3_jac(_: &[f64]) -> Matrix {
    mat(&[&[1.0, 0.0, 0.0], &[0.0, FRAC_1_SQRT_2, FRAC_1_SQRT_2]])
}

fn ex4_4(x: &[Dual]) -> Result<Vec<Dual>, EvalError> {
    Ok(vec![x[0], x[0] * x[1], x[1]])
}

fn ex4_4_jac(z: &[f64]) -> Matrix {
    mat(&[&[1.0, z[1], 0.0], &[0.0, z[0], 1.0]])
}

fn f5_1(x: &[Dual]) -> Result<Vec<Dual>, EvalError> {
    Ok(fold_pair(x[0], x[1])?.to_vec())
}

fn f5_1_jac(z: &[f64]) -> Matrix {
    let b = fold_pair_jacobian(z[0], z[1]);
    mat(&[&b[0], &b[1]])
}

fn g5_11(x: &[Dual]) -> Result<Vec<Dual>, EvalError> {
    let [a, b] = fold_pair(x[0], x[1])?;
    let [p, q] = fold_pair(x[2], x[3])?;
    Ok(vec![a, b, p, q])
}

fn g5_11_jac(z: &[f64]) -> Matrix {
    let u = fold_pair_jacobian(z[0], z[1]);
    let v = fold_pair_jacobian(z[2], z[3]);
    mat(&[
        &[u[0][0], u[0][1], 0.0, 0.0],
        &[u[1][0], u[1][1], 0.0, 0.0],
        &[0.0, 0.0, v[0][0], v[0][1]],
        &[0.0, 0.0, v[1][0], v[1][1]],
    ])
}

fn h5_18(x: &[Dual]) -> Result<Vec<Dual>, EvalError> {
    if is_origin(x) {
        return Ok(vec![c(0.0); 4]);
    }
    let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3]).sqrt()?;
    Ok(vec![
        (x[0] * x[0] - x[1] * x[1]) / r,
        2.0 * x[0] * x[1] / r,
        (x[2] * x[2] - x[3] * x[3]) / r,
        2.0 * x[2] * x[3] / r,
    ])
}

// d(N_i / |x|)/dx_k = (dN_i/dx_k |x|^2 - N_i x_k) / |x|^3
fn h5_18_jac(z: &[f64]) -> Matrix {
    let s: f64 = z.iter().map(|v| v * v).sum();
    let r3 = s * math::sqrt(s);
    let num = [
        z[0] * z[0] - z[1] * z[1],
        2.0 * z[0] * z[1],
        z[2] * z[2] - z[3] * z[3],
        2.0 * z[2] * z[3],
    ];
    let grad = [
        [2.0 * z[0], -2.0 * z[1], 0.0, 0.0],
        [2.0 * z[1], 2.0 * z[0], 0.0, 0.0],
        [0.0, 0.0, 2.0 * z[2], -2.0 * z[3]],
        [0.0, 0.0, 2.0 * z[3], 2.0 * z[2]],
    ];
    let mut m = Matrix::zeros(4, 4);
    for k in 0..4 {
        for i in 0..4 {
            m.set(k, i, (grad[i][k] * s - num[i] * z[k]) / r3);
        }
    }
    m
}

fn ex6_1(x: &[Dual]) -> Result<Vec<Dual>, EvalError> {
    Ok(vec![(x[0] * x[0] + x[1] * x[1]).sqrt()?, x[2]])
}

fn ex6_1_jac(z: &[f64]) -> Matrix {
    let r = math::sqrt(z[0] * z[0] + z[1] * z[1]);
    mat(&[&[z[0] / r, 0.0], &[z[1] / r, 0.0], &[0.0, 1.0]])
}

fn ex6_2(x: &[Dual]) -> Result<Vec<Dual>, EvalError> {
    Ok(vec![x[0] * x[1], x[0] * x[2]])
}

fn ex6_2_jac(z: &[f64]) -> Matrix {
    mat(&[&[z[1], z[2]], &[z[0], 0.0], &[0.0, z[0]]])
}

fn ex6_3(x: &[Dual]) -> Result<Vec<Dual>, EvalError> {
    Ok(vec![x[0] * x[0] * x[2], x[1] * x[1] * x[2]])
}

fn ex6_3_jac(z: &[f64]) -> Matrix {
    mat(&[
        &[2.0 * z[0] * z[2], 0.0],
        &[0.0, 2.0 * z[1] * z[2]],
        &[z[0] * z[0], z[1] * z[1]],
    ])
}

fn ex6_4(x: &[Dual]) -> Result<Vec<Dual>, EvalError> {
    let d = 1.0 + x[2] * x[2];
    Ok(vec![x[0] / d, x[1] / d])
}

fn ex6_4_jac(z: &[f64]) -> Matrix {
    let d = 1.0 + z[2] * z[2];
    mat(&[
        &[1.0 / d, 0.0],
        &[0.0, 1.0 / d],
        &[-2.0 * z[0] * z[2] / (d * d), -2.0 * z[1] * z[2] / (d * d)],
    ])
}

fn ex6_5(x: &[Dual]) -> Result<Vec<Dual>, EvalError> {
    Ok(vec![x[0], x[1]])
}

fn ex6_5_jac(_: &[f64]) -> Matrix {
    mat(&[&[1.0, 0.0], &[0.0, 1.0], &[0.0, 0.0]])
}

fn ex6_6(x: &[Dual]) -> Result<Vec<Dual>, EvalError> {
    let t = x[0] + x[1];
    Ok(vec![t.sin(), t.cos()])
}

fn ex6_6_jac(z: &[f64]) -> Matrix {
    let (s, co) = (libm::sin(z[0] + z[1]), libm::cos(z[0] + z[1]));
    mat(&[&[co, -s], &[co, -s]])
}

fn ex6_7(x: &[Dual]) -> Result<Vec<Dual>, EvalError> {
    Ok(vec![x[0] * x[0] - x[1] * x[1], 2.0 * x[0] * x[1]])
}

fn ex6_7_jac(z: &[f64]) -> Matrix {
    mat(&[&[2.0 * z[0], 2.0 * z[1]], &[-2.0 * z[1], 2.0 * z[0]]])
}

fn ex6_8(x: &[Dual]) -> Result<Vec<Dual>, EvalError> {
    let t = x[0] + x[1];
    Ok(vec![t.exp(), (-t).exp()])
}

fn ex6_8_jac(z: &[f64]) -> Matrix {
    let (e, f) = (libm::exp(z[0] + z[1]), libm::exp(-z[0] - z[1]));
    mat(&[&[e, -f], &[e, -f]])
}

fn ex6_9(x: &[Dual]) -> Result<Vec<Dual>, EvalError> {
    let d = 1.0 + x[0] * x[0] + x[1] * x[1];
    Ok(vec![d.ln()?, d.recip()])
}

fn ex6_9_jac(z: &[f64]) -> Matrix {
    let d = 1.0 + z[0] * z[0] + z[1] * z[1];
    mat(&[
        &[2.0 * z[0] / d, -2.0 * z[0] / (d * d)],
        &[2.0 * z[1] / d, -2.0 * z[1] / (d * d)],
    ])
}

fn ex6_10(x: &[Dual]) -> Result<Vec<Dual>, EvalError> {
    if is_origin(x) {
        return Ok(vec![c(0.0); 2]);
    }
    let r = (x[0] * x[0] + x[1] * x[1]).sqrt()?;
    Ok(vec![x[0] / r, x[1] / r])
}

fn ex6_10_jac(z: &[f64]) -> Matrix {
    let s = z[0] * z[0] + z[1] * z[1];
    let r3 = s * math::sqrt(s);
    mat(&[
        &[z[1] * z[1] / r3, -z[0] * z[1] / r3],
        &[-z[0] * z[1] / r3, z[0] * z[0] / r3],
    ])
}

fn ex6_11(x: &[Dual]) -> Result<Vec<Dual>, EvalError> {
    if is_origin(x) {
        return Ok(vec![c(0.0); 2]);
    }
    let r = (x[0] * x[0] + x[1] * x[1]).sqrt()?;
    Ok(vec![x[0] * x[0] / r, x[1] * x[1] / r])
}

fn ex6_11_jac(z: &[f64]) -> Matrix {
    let (a, b) = (z[0], z[1]);
    let s = a * a + b * b;
    let r3 = s * math::sqrt(s);
    mat(&[
        &[(a * a * a + 2.0 * a * b * b) / r3, -b * b * a / r3],
        &[-a * a * b / r3, (b * b * b + 2.0 * b * a * a) / r3],
    ])
}

fn exact_zero(_: &[f64]) -> Result<OracleValue, &'static str> {
    Ok(OracleValue::exact(0.0))
}

fn exact_one(_: &[f64]) -> Result<OracleValue, &'static str> {
    Ok(OracleValue::exact(1.0))
}

const NONZERO: &str = "z̄ ≠ θ required";

fn g5_11_oracle(z: &[f64]) -> Result<OracleValue, &'static str> {
    if z.iter().all(|&v| v == 0.0) {
        return Err(NONZERO);
    }
    Ok(OracleValue::exact(1.0))
}

fn h5_18_oracle(z: &[f64]) -> Result<OracleValue, &'static str> {
    if z.iter().all(|&v| v == 0.0) {
        return Err(NONZERO);
    }
    if (z[0] == 0.0 && z[1] == 0.0) || (z[2] == 0.0 && z[3] == 0.0) {
        return Ok(OracleValue::exact(0.0));
    }
    let a = math::abs(z[0]);
    if z.iter().all(|&v| math::abs(math::abs(v) - a) <= 1e-12 * a) {
        return Ok(OracleValue::upper_bound(FRAC_1_SQRT_2));
    }
    Err("z̄1 = z̄2 = 0, z̄3 = z̄4 = 0, or |z̄1| = |z̄2| = |z̄3| = |z̄4| required")
}

fn ex6_1_oracle(z: &[f64]) -> Result<OracleValue, &'static str> {
    if z[0] * z[0] + z[1] * z[1] > 0.0 {
        Ok(OracleValue::exact(1.0))
    } else {
        Err("z̄1² + z̄2² > 0 required")
    }
}

fn ex6_2_oracle(z: &[f64]) -> Result<OracleValue, &'static str> {
    Ok(OracleValue::exact(math::abs(z[0])))
}

fn ex6_3_oracle(z: &[f64]) -> Result<OracleValue, &'static str> {
    if z[0] == z[1] {
        Ok(OracleValue::upper_bound(2.0 * math::abs(z[0] * z[2])))
    } else {
        Err("z̄1 = z̄2 required")
    }
}

fn ex6_4_oracle(z: &[f64]) -> Result<OracleValue, &'static str> {
    Ok(OracleValue::exact(1.0 / (1.0 + z[2] * z[2])))
}

fn ex6_7_oracle(z: &[f64]) -> Result<OracleValue, &'static str> {
    Ok(OracleValue::exact(2.0 * math::norm(z)))
}

fn ex6_10_oracle(z: &[f64]) -> Result<OracleValue, &'static str> {
    if z[0] == 0.0 && z[1] == 0.0 {
        Err(NONZERO)
    } else {
        Ok(OracleValue::exact(0.0))
    }
}

fn ex6_11_oracle(z: &[f64]) -> Result<OracleValue, &'static str> {
    let (a, b) = (z[0], z[1]);
    if a == 0.0 && b == 0.0 {
        return Err(NONZERO);
    }
    if a * b == 0.0 {
        return Ok(OracleValue::exact(0.0));
    }
    let ratio = 2.0 * math::abs(a * b) / math::sqrt(a * a * a * a + b * b * b * b);
    Ok(OracleValue::upper_bound(ratio.min(FRAC_1_SQRT_2)))
}

static CATALOG: [MappingSpec; 16] = [
    MappingSpec {
        name: "ex4_3",
        n: 2,
        m: 3,
        formula: "x1, x2/sqrt(2), x2/sqrt(2)",
        norm_identity: NormIdentity::Preserving,
        twice_differentiable_off_locus: true,
        eval: ex4_3,
        jacobian: ex4_3_jac,
        locus: no_locus,
        oracle: Some(exact_zero),
        locus_coderivative: None,
    },
    MappingSpec {
        name: "ex4_4",
        n: 2,
        m: 3,
        formula: "x1, x1*x2, x2",
        norm_identity: NormIdentity::ExpandingGe,
        twice_differentiable_off_locus: true,
        eval: ex4_4,
        jacobian: ex4_4_jac,
        locus: no_locus,
        oracle: Some(exact_zero),
        locus_coderivative: None,
    },
    MappingSpec {
        name: "f5_1",
        n: 2,
        m: 2,
        formula: "((x1^2-x2^2)/|x|, 2*x1*x2/|x|) off the origin, origin to origin",
        norm_identity: NormIdentity::Preserving,
        twice_differentiable_off_locus: true,
        eval: f5_1,
        jacobian: f5_1_jac,
        locus: origin_locus,
        oracle: Some(exact_one),
        locus_coderivative: Some(empty_at),
    },
    MappingSpec {
        name: "g5_11",
        n: 4,
        m: 4,
        formula: "f5_1 applied to (x1,x2) and to (x3,x4)",
        norm_identity: NormIdentity::Preserving,
        twice_differentiable_off_locus: true,
        eval: g5_11,
        jacobian: g5_11_jac,
        locus: pair_locus,
        oracle: Some(g5_11_oracle),
        locus_coderivative: Some(pair_locus_coderivative),
    },
    MappingSpec {
        name: "h5_18",
        n: 4,
        m: 4,
        formula: "(x1^2-x2^2, 2*x1*x2, x3^2-x4^2, 2*x3*x4)/|x| off the origin, origin to origin",
        norm_identity: NormIdentity::None,
        twice_differentiable_off_locus: true,
        eval: h5_18,
        jacobian: h5_18_jac,
        locus: origin_locus,
        oracle: Some(h5_18_oracle),
        locus_coderivative: None,
    },
    MappingSpec {
        name: "ex6_1",
        n: 3,
        m: 2,
        formula: "sqrt(x1^2+x2^2), x3",
        norm_identity: NormIdentity::Preserving,
        twice_differentiable_off_locus: true,
        eval: ex6_1,
        jacobian: ex6_1_jac,
        locus: first_pair_locus,
        oracle: Some(ex6_1_oracle),
        locus_coderivative: None,
    },
    MappingSpec {
        name: "ex6_2",
        n: 3,
        m: 2,
        formula: "x1*x2, x1*x3",
        norm_identity: NormIdentity::None,
        twice_differentiable_off_locus: true,
        eval: ex6_2,
        jacobian: ex6_2_jac,
        locus: no_locus,
        oracle: Some(ex6_2_oracle),
        locus_coderivative: None,
    },
    MappingSpec {
        name: "ex6_3",
        n: 3,
        m: 2,
        formula: "x1^2*x3, x2^2*x3",
        norm_identity: NormIdentity::None,
        twice_differentiable_off_locus: true,
        eval: ex6_3,
        jacobian: ex6_3_jac,
        locus: no_locus,
        oracle: Some(ex6_3_oracle),
        locus_coderivative: None,
    },
    MappingSpec {
        name: "ex6_4",
        n: 3,
        m: 2,
        formula: "x1/(1+x3^2), x2/(1+x3^2)",
        norm_identity: NormIdentity::None,
        twice_differentiable_off_locus: true,
        eval: ex6_4,
        jacobian: ex6_4_jac,
        locus: no_locus,
        oracle: Some(ex6_4_oracle),
        locus_coderivative: None,
    },
    MappingSpec {
        name: "ex6_5",
        n: 3,
        m: 2,
        formula: "x1, x2+0*x3",
        norm_identity: NormIdentity::None,
        twice_differentiable_off_locus: true,
        eval: ex6_5,
        jacobian: ex6_5_jac,
        locus: no_locus,
        oracle: Some(exact_one),
        locus_coderivative: None,
    },
    MappingSpec {
        name: "ex6_6",
        n: 2,
        m: 2,
        formula: "sin(x1+x2), cos(x1+x2)",
        norm_identity: NormIdentity::ConstantOne,
        twice_differentiable_off_locus: true,
        eval: ex6_6,
        jacobian: ex6_6_jac,
        locus: no_locus,
        oracle: Some(exact_zero),
        locus_coderivative: None,
    },
    MappingSpec {
        name: "ex6_7",
        n: 2,
        m: 2,
        formula: "x1^2-x2^2, 2*x1*x2",
        norm_identity: NormIdentity::ExpandingSquare,
        twice_differentiable_off_locus: true,
        eval: ex6_7,
        jacobian: ex6_7_jac,
        locus: no_locus,
        oracle: Some(ex6_7_oracle),
        locus_coderivative: None,
    },
    MappingSpec {
        name: "ex6_8",
        n: 2,
        m: 2,
        formula: "exp(x1+x2), exp(-x1-x2)",
        norm_identity: NormIdentity::None,
        twice_differentiable_off_locus: true,
        eval: ex6_8,
        jacobian: ex6_8_jac,
        locus: no_locus,
        oracle: Some(exact_zero),
        locus_coderivative: None,
    },
    MappingSpec {
        name: "ex6_9",
        n: 2,
        m: 2,
        formula: "ln(1+x1^2+x2^2), 1/(1+x1^2+x2^2)",
        norm_identity: NormIdentity::None,
        twice_differentiable_off_locus: true,
        eval: ex6_9,
        jacobian: ex6_9_jac,
        locus: no_locus,
        oracle: Some(exact_zero),
        locus_coderivative: None,
    },
    MappingSpec {
        name: "ex6_10",
        n: 2,
        m: 2,
        formula: "(x1, x2)/|x| off the origin, origin to origin",
        norm_identity: NormIdentity::None,
        twice_differentiable_off_locus: true,
        eval: ex6_10,
        jacobian: ex6_10_jac,
        locus: origin_locus,
        oracle: Some(ex6_10_oracle),
        locus_coderivative: None,
    },
    MappingSpec {
        name: "ex6_11",
        n: 2,
        m: 2,
        formula: "(x1^2, x2^2)/|x| off the origin, origin to origin",
        norm_identity: NormIdentity::None,
        twice_differentiable_off_locus: true,
        eval: ex6_11,
        jacobian: ex6_11_jac,
        locus: origin_locus,
        oracle: Some(ex6_11_oracle),
        locus_coderivative: None,
    },
];
