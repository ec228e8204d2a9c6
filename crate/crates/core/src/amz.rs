//! Parameterised coincidence equations `F(x) = G(x, p)`.
//!
//! If `G(., p)` is `beta`-Lipschitz near `x_bar` and `beta < alpha` with
//! `alpha` below the covering constant of `F` at `(x_bar, F(x_bar))`, a
//! solution `sigma(p)` exists with
//!
//! ```text
//! |sigma(p) - x_bar| <= |G(x_bar, p) - F(x_bar)| / (alpha - beta).
//! ```
//!
//! Solutions are found by damped Newton iteration on `F - G` and the
//! distance bound is checked afterwards.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::autodiff::{jacobian_ad, jacobian_fd};
use crate::catalog;
use crate::covering::BallSpec;
use crate::linalg::{solve_linear, Matrix};
use crate::mapping::{EvalError, Mapping};
use crate::math;
use crate::sampling::{ball_points, sphere_directions};

/// Default residual tolerance.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Newton iteration cap.
pub const MAX_ITERATIONS: usize = 200;
/// Cap on gradient steps taken when the Jacobian is singular.
pub const MAX_FALLBACK_STEPS: usize = 50;
/// Safety factor applied to sampled Lipschitz ratios.
pub const LIPSCHITZ_INFLATION: f64 = 1.1;
/// Slack in the distance-bound check.
pub const BOUND_SLACK: f64 = 1e-9;

/// The perturbation `G(x, p)`.
pub type Perturbation<'a, P> = dyn Fn(&[f64], &P) -> Result<Vec<f64>, EvalError> + 'a;

/// Parameter-only shift `omega(p)`.
pub type Shift<'a, P> = dyn Fn(&P) -> Result<Vec<f64>, EvalError> + 'a;

/// Failures of the coincidence solver.
#[derive(Clone, Debug, PartialEq)]
pub enum AmzError {
    /// Malformed problem data.
    Precondition(String),
    /// `beta < alpha` or a similar hypothesis fails.
    Hypothesis(String),
    /// Newton did not reach the tolerance.
    NonConvergence {
        /// Last iterate.
        sigma: Vec<f64>,
        /// Its residual norm.
        residual: f64,
        /// Iterations spent.
        iterations: usize,
    },
    /// Evaluation failed.
    Eval(EvalError),
}

impl fmt::Display for AmzError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AmzError::Precondition(s) => write!(f, "precondition violated: {s}"),
            AmzError::Hypothesis(s) => write!(f, "hypothesis violated: {s}"),
            AmzError::NonConvergence {
                residual,
                iterations,
                ..
            } => write!(
                f,
                "no convergence after {iterations} iterations, residual {residual:e}"
            ),
            AmzError::Eval(e) => write!(f, "evaluation failed: {e}"),
        }
    }
}

impl core::error::Error for AmzError {}

impl From<EvalError> for AmzError {
    fn from(e: EvalError) -> Self {
        AmzError::Eval(e)
    }
}

/// A coincidence problem around `(x_bar, y_bar)`.
pub struct AmzProblem<'a, P> {
    f: &'a dyn Mapping,
    g: Box<Perturbation<'a, P>>,
    x_bar: Vec<f64>,
    y_bar: Vec<f64>,
    region: BallSpec,
    beta: f64,
    alpha: f64,
}

impl<P> fmt::Debug for AmzProblem<'_, P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AmzProblem")
            .field("f", &self.f.name())
            .field("x_bar", &self.x_bar)
            .field("y_bar", &self.y_bar)
            .field("region", &self.region)
            .field("beta", &self.beta)
            .field("alpha", &self.alpha)
            .finish_non_exhaustive()
    }
}

impl<'a, P> AmzProblem<'a, P> {
    /// Validates `F: R^n -> R^n`, `|F(x_bar) - y_bar| <= 1e-9` and
    /// `0 <= beta < alpha`.
    pub fn new(
        f: &'a dyn Mapping,
        g: Box<Perturbation<'a, P>>,
        x_bar: Vec<f64>,
        y_bar: Vec<f64>,
        region: BallSpec,
        beta: f64,
        alpha: f64,
    ) -> Result<Self, AmzError> {
        let n = f.input_dim();
        if f.output_dim() != n {
            return Err(AmzError::Precondition(format!(
                "F must map R^n to R^n, got R^{n} -> R^{}",
                f.output_dim()
            )));
        }
        if x_bar.len() != n || y_bar.len() != n || region.center().len() != n {
            return Err(AmzError::Precondition(
                "x̄, ȳ and the region must live in R^n".into(),
            ));
        }
        let fx = f.eval(&x_bar)?;
        if math::dist(&fx, &y_bar) > 1e-9 {
            return Err(AmzError::Precondition("ȳ = F(x̄) required".into()));
        }
        if !(beta >= 0.0 && beta < alpha && alpha.is_finite()) {
            return Err(AmzError::Hypothesis(format!(
                "0 <= beta < alpha required, got beta = {beta}, alpha = {alpha}"
            )));
        }
        Ok(AmzProblem {
            f,
            g,
            x_bar,
            y_bar,
            region,
            beta,
            alpha,
        })
    }

    /// Base point.
    pub fn x_bar(&self) -> &[f64] {
        &self.x_bar
    }

    /// `F(x_bar)`.
    pub fn y_bar(&self) -> &[f64] {
        &self.y_bar
    }

    /// Lipschitz region of `G`.
    pub fn region(&self) -> &BallSpec {
        &self.region
    }

    /// Lipschitz modulus of `G`.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Covering rate used in the bound.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Evaluates `G(x, p)`.
    pub fn g(&self, x: &[f64], p: &P) -> Result<Vec<f64>, EvalError> {
        (self.g)(x, p)
    }

    fn residual(&self, x: &[f64], p: &P) -> Result<Vec<f64>, EvalError> {
        let fx = self.f.eval(x)?;
        let gx = (self.g)(x, p)?;
        if gx.len() != fx.len() {
            return Err(EvalError::Dimension {
                expected: fx.len(),
                found: gx.len(),
            });
        }
        Ok(fx.iter().zip(&gx).map(|(a, b)| a - b).collect())
    }

    // Jacobian of the residual in equation-by-variable layout.
    fn residual_jacobian(&self, x: &[f64], p: &P) -> Result<Matrix, EvalError> {
        let n = x.len();
        let jf = match jacobian_ad(self.f, x) {
            Ok(j) => j,
            Err(_) => jacobian_fd(self.f, x, None).map_err(|e| EvalError::Other(format!("{e}")))?,
        };
        let h = crate::autodiff::default_step(x);
        let mut a = Matrix::zeros(n, n);
        let mut xp = x.to_vec();
        for j in 0..n {
            xp[j] = x[j] + h;
            let plus = (self.g)(&xp, p)?;
            xp[j] = x[j] - h;
            let minus = (self.g)(&xp, p)?;
            xp[j] = x[j];
            for i in 0..n {
                a.set(i, j, jf.get(j, i) - (plus[i] - minus[i]) / (2.0 * h));
            }
        }
        Ok(a)
    }
}

/// A certified solution `sigma(p)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoincidenceSolution<P> {
    /// Grid parameter.
    pub parameter: P,
    /// The solution.
    pub sigma: Vec<f64>,
    /// `|F(sigma) - G(sigma, p)|`.
    pub residual: f64,
    /// `|G(x_bar, p) - y_bar| / (alpha - beta)`.
    pub bound_rhs: f64,
    /// `|sigma - x_bar| <= bound_rhs + 1e-9`.
    pub bound_holds: bool,
    /// Newton iterations taken.
    pub iterations: usize,
    /// Gradient steps taken at singular Jacobians.
    pub fallback_steps: usize,
}

/// Largest sampled ratio `|G(x,p) - G(x',p)| / |x - x'|` over the region,
/// times 1.1.
///
/// Half of the `2 * pairs` samples are spread across the region and half
/// are short pairs that see the local slope.
pub fn estimate_lipschitz<P>(
    g: &Perturbation<'_, P>,
    p: &P,
    region: &BallSpec,
    pairs: usize,
    seed: u64,
) -> Result<f64, AmzError> {
    if pairs < 100 {
        return Err(AmzError::Precondition(format!(
            "at least 100 pairs required, got {pairs}"
        )));
    }
    let n = region.center().len();
    let r = region.radius();
    let spread = ball_points(region.center(), r, 2 * pairs, seed);
    let inner = ball_points(region.center(), r * (1.0 - 1e-3), pairs, seed ^ 0x11b);
    let dirs = sphere_directions(n, pairs, seed ^ 0x22c);
    let delta = 1e-4 * r;

    let mut best = 0.0_f64;
    let mut ratio = |x: &[f64], y: &[f64]| -> Result<(), AmzError> {
        let d = math::dist(x, y);
        if d > 0.0 {
            let (gx, gy) = (g(x, p)?, g(y, p)?);
            best = best.max(math::dist(&gx, &gy) / d);
        }
        Ok(())
    };
    for w in spread.chunks_exact(2) {
        ratio(&w[0], &w[1])?;
    }
    for (x, v) in inner.iter().zip(&dirs) {
        let y: Vec<f64> = x.iter().zip(v).map(|(a, b)| a + delta * b).collect();
        ratio(x, &y)?;
    }
    Ok(LIPSCHITZ_INFLATION * best)
}

/// Solves `F(x) = G(x, p)` from `x_bar`.
pub fn solve_coincidence<P: Clone>(
    problem: &AmzProblem<'_, P>,
    p: &P,
    tol: f64,
) -> Result<CoincidenceSolution<P>, AmzError> {
    solve_from(problem, p, tol, problem.x_bar())
}

/// Solves `F(x) = G(x, p)` by damped Newton iteration from `x0`.
pub fn solve_from<P: Clone>(
    problem: &AmzProblem<'_, P>,
    p: &P,
    tol: f64,
    x0: &[f64],
) -> Result<CoincidenceSolution<P>, AmzError> {
    if !(tol > 0.0) || x0.len() != problem.x_bar.len() {
        return Err(AmzError::Precondition(
            "positive tolerance and x0 in R^n required".into(),
        ));
    }
    let mut x = x0.to_vec();
    let mut r = problem.residual(&x, p)?;
    let mut rn = math::norm(&r);
    let (mut iterations, mut fallback_steps) = (0, 0);
    let fail = |x: Vec<f64>, residual, iterations| AmzError::NonConvergence {
        sigma: x,
        residual,
        iterations,
    };

    while rn > tol {
        if iterations >= MAX_ITERATIONS {
            return Err(fail(x, rn, iterations));
        }
        iterations += 1;
        let a = problem.residual_jacobian(&x, p)?;
        let neg_r: Vec<f64> = r.iter().map(|v| -v).collect();
        let dir = match solve_linear(&a, &neg_r) {
            Some(d) => d,
            None => {
                if fallback_steps >= MAX_FALLBACK_STEPS {
                    return Err(fail(x, rn, iterations));
                }
                fallback_steps += 1;
                // steepest descent on |R|^2 / 2
                (0..x.len())
                    .map(|j| -(0..r.len()).map(|i| a.get(i, j) * r[i]).sum::<f64>())
                    .collect()
            }
        };
        let mut t = 1.0;
        let mut accepted = false;
        while t >= 1e-12 {
            let cand: Vec<f64> = x.iter().zip(&dir).map(|(a, d)| a + t * d).collect();
            if let Ok(rc) = problem.residual(&cand, p) {
                let rcn = math::norm(&rc);
                if rcn < rn {
                    x = cand;
                    r = rc;
                    rn = rcn;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            return Err(fail(x, rn, iterations));
        }
    }

    let gx = (problem.g)(&problem.x_bar, p)?;
    let bound_rhs = math::dist(&gx, &problem.y_bar) / (problem.alpha - problem.beta);
    let bound_holds = math::dist(&x, &problem.x_bar) <= bound_rhs + BOUND_SLACK;
    Ok(CoincidenceSolution {
        parameter: p.clone(),
        sigma: x,
        residual: rn,
        bound_rhs,
        bound_holds,
        iterations,
        fallback_steps,
    })
}

/// Solves over a grid. With `warm_start`, each solve starts from the
/// previous solution (falling back to `x_bar` after a failure).
pub fn solve_grid<P: Clone>(
    problem: &AmzProblem<'_, P>,
    grid: &[P],
    tol: f64,
    warm_start: bool,
) -> Vec<Result<CoincidenceSolution<P>, AmzError>> {
    let mut start = problem.x_bar.clone();
    grid.iter()
        .map(|p| {
            let res = solve_from(problem, p, tol, &start);
            if warm_start {
                start = match &res {
                    Ok(s) => s.sigma.clone(),
                    Err(_) => problem.x_bar.clone(),
                };
            }
            res
        })
        .collect()
}

/// A grid solution together with the gap in the norm identity
/// `|G(sigma, p)|^2 = |F(sigma)|^2`, the right side written in closed form.
#[derive(Clone, Debug, PartialEq)]
pub struct CertifiedSolution<P> {
    /// The solve result.
    pub solution: CoincidenceSolution<P>,
    /// Absolute gap in the norm identity.
    pub identity_gap: f64,
}

/// A perturbation `G(x, p) = h(x, p) + omega(p)` given by its two parts.
pub struct PerturbationParts<'a, P> {
    /// State-dependent part `h(x, p)`.
    pub h: Box<Perturbation<'a, P>>,
    /// Shift `omega(p)`.
    pub omega: Box<Shift<'a, P>>,
}

fn combined<'a, P: 'a>(parts: &'a PerturbationParts<'a, P>) -> Box<Perturbation<'a, P>> {
    Box::new(move |x: &[f64], p: &P| {
        let h = (parts.h)(x, p)?;
        let w = (parts.omega)(p)?;
        if h.len() != w.len() {
            return Err(EvalError::Dimension {
                expected: h.len(),
                found: w.len(),
            });
        }
        Ok(h.iter().zip(&w).map(|(a, b)| a + b).collect())
    })
}

#[allow(clippy::too_many_arguments)]
fn certify<'a, P: Clone + 'a>(
    f: &'a dyn Mapping,
    parts: &'a PerturbationParts<'a, P>,
    x_bar: &[f64],
    region: BallSpec,
    cover: f64,
    grid: &[P],
    tol: f64,
    seed: u64,
    identity_rhs: fn(&[f64]) -> f64,
) -> Result<Vec<CertifiedSolution<P>>, AmzError> {
    let g = combined(parts);
    let mut beta = 0.0_f64;
    for p in grid {
        beta = beta.max(estimate_lipschitz(&*g, p, &region, 200, seed)?);
    }
    if beta >= cover {
        return Err(AmzError::Hypothesis(format!(
            "Lipschitz modulus {beta} must stay below the covering rate {cover}"
        )));
    }
    let alpha = 0.5 * (beta + cover);
    let y_bar = f.eval(x_bar)?;
    let problem = AmzProblem::new(f, g, x_bar.to_vec(), y_bar, region, beta, alpha)?;
    let mut out = Vec::with_capacity(grid.len());
    for res in solve_grid(&problem, grid, tol, true) {
        let solution = res?;
        let gs = problem.g(&solution.sigma, &solution.parameter)?;
        let lhs: f64 = gs.iter().map(|v| v * v).sum();
        let identity_gap = math::abs(lhs - identity_rhs(&solution.sigma));
        out.push(CertifiedSolution {
            solution,
            identity_gap,
        });
    }
    Ok(out)
}

/// Solves `(x1^2 - x2^2, 2 x1 x2) = h(x, p) + omega(p)` over a grid.
///
/// The covering constant of the squaring map is `2|x| >= |x_bar|` on
/// `B(x_bar, |x_bar|/2)`, so `beta` is sampled there, must stay below
/// `|x_bar|`, and `alpha = (beta + |x_bar|) / 2`.
pub fn certify_squaring<'a, P: Clone + 'a>(
    parts: &'a PerturbationParts<'a, P>,
    x_bar: &[f64],
    grid: &[P],
    tol: f64,
    seed: u64,
) -> Result<Vec<CertifiedSolution<P>>, AmzError> {
    let f: &'static dyn Mapping = catalog::get("ex6_7").expect("registered");
    if x_bar.len() != 2 {
        return Err(AmzError::Precondition("x̄ ∈ R^2 required".into()));
    }
    let nx = math::norm(x_bar);
    if nx == 0.0 {
        return Err(AmzError::Precondition("x̄ ≠ θ required".into()));
    }
    let region = BallSpec::new(x_bar.to_vec(), nx / 2.0)
        .map_err(|e| AmzError::Precondition(format!("{e}")))?;
    certify(f, parts, x_bar, region, nx, grid, tol, seed, |s| {
        let (a, b) = (s[0] * s[0] - s[1] * s[1], 2.0 * s[0] * s[1]);
        a * a + b * b
    })
}

/// Solves `fold(x) = h(x, p) + omega(p)` over a grid, where `fold` is the
/// norm-preserving map `((x1^2-x2^2)/|x|, 2 x1 x2/|x|)` with covering
/// constant 1 everywhere.
///
/// `beta` is sampled on `B(x_bar, region_radius)`, must stay below 1, and
/// `alpha = (beta + 1) / 2`.
pub fn certify_folding<'a, P: Clone + 'a>(
    parts: &'a PerturbationParts<'a, P>,
    x_bar: &[f64],
    region_radius: f64,
    grid: &[P],
    tol: f64,
    seed: u64,
) -> Result<Vec<CertifiedSolution<P>>, AmzError> {
    let f: &'static dyn Mapping = catalog::get("f5_1").expect("registered");
    if x_bar.len() != 2 || math::norm(x_bar) == 0.0 {
        return Err(AmzError::Precondition("x̄ ∈ R^2 \\ {θ} required".into()));
    }
    let region = BallSpec::new(x_bar.to_vec(), region_radius)
        .map_err(|e| AmzError::Precondition(format!("{e}")))?;
    certify(f, parts, x_bar, region, 1.0, grid, tol, seed, |s| {
        s[0] * s[0] + s[1] * s[1]
    })
}
