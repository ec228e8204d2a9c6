//! Covering constant estimation by shrinking balls.
//!
//! For each radius `eta` the estimator minimises `sigma_min(D*f(z))` over
//! points `z` of `B(z_bar, eta)` with `f(z)` in `B(w_bar, eta)`, then reads
//! the constant off the smallest radius. Maps into a higher-dimensional space
//! have constant zero and skip the search.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::autodiff::jacobian_ad;
use crate::linalg::{frobenius_norm, min_singular_value};
use crate::mapping::{EvalError, Mapping};
use crate::math;
use crate::sampling::{ball_points, sphere_directions, MAX_DIM};

/// Smallest accepted sample count per radius.
pub const MIN_SAMPLES: usize = 64;
/// Tolerance on `|f(z_bar) - w_bar|`.
pub const CENTER_TOL: f64 = 1e-9;
/// Relative change between the last two radii that counts as converged.
pub const CONVERGENCE_TOL: f64 = 1e-4;
/// Smallest radius a schedule may reach.
pub const MIN_ETA: f64 = 1e-6;

/// Errors from the covering estimator.
#[derive(Clone, Debug, PartialEq)]
pub enum CoveringError {
    /// A stated precondition does not hold.
    Precondition(String),
    /// Every sample of the ball sits on the singular locus or maps outside
    /// the target ball.
    DegenerateBall {
        /// Radius of the offending ball.
        eta: f64,
    },
    /// The radius schedule is unusable.
    InvalidSchedule(String),
    /// A theorem hypothesis fails, e.g. `n < m` for the Frobenius bound.
    Hypothesis(String),
    /// Evaluation of the mapping failed at the centre.
    Eval(EvalError),
}

impl fmt::Display for CoveringError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoveringError::Precondition(s) => write!(f, "precondition violated: {s}"),
            CoveringError::DegenerateBall { eta } => {
                write!(f, "no admissible sample in the ball of radius {eta}")
            }
            CoveringError::InvalidSchedule(s) => write!(f, "invalid radius schedule: {s}"),
            CoveringError::Hypothesis(s) => write!(f, "hypothesis violated: {s}"),
            CoveringError::Eval(e) => write!(f, "evaluation failed: {e}"),
        }
    }
}

impl core::error::Error for CoveringError {}

impl From<EvalError> for CoveringError {
    fn from(e: EvalError) -> Self {
        CoveringError::Eval(e)
    }
}

/// Closed ball `B(center, radius)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BallSpec {
    center: Vec<f64>,
    radius: f64,
}

impl BallSpec {
    /// Checks that the radius is positive and finite and the centre finite.
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self, CoveringError> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(CoveringError::Precondition(format!(
                "ball radius must be positive and finite, got {radius}"
            )));
        }
        if center.is_empty() || center.iter().any(|v| !v.is_finite()) {
            return Err(CoveringError::Precondition(
                "ball centre must be finite".into(),
            ));
        }
        Ok(BallSpec { center, radius })
    }

    /// Centre.
    pub fn center(&self) -> &[f64] {
        &self.center
    }

    /// Radius.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Membership test.
    pub fn contains(&self, x: &[f64]) -> bool {
        math::dist(x, &self.center) <= self.radius
    }
}

/// Sampler settings.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SamplingConfig {
    /// Interior points per radius (at least [`MIN_SAMPLES`]).
    pub samples: usize,
    /// Coordinate-descent sweeps around the best sample.
    pub refine_iterations: usize,
    /// Seed of the low-discrepancy shift.
    pub seed: u64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            samples: 256,
            refine_iterations: 50,
            seed: 0,
        }
    }
}

/// How the value was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoveringMethod {
    /// `m > n`: the constant is zero without search.
    DimensionZero,
    /// Shrinking-ball infimum of the smallest singular value.
    SvdLimit,
}

impl CoveringMethod {
    /// Snake-case tag used in reports.
    pub fn as_str(self) -> &'static str {
        match self {
            CoveringMethod::DimensionZero => "dimension_zero",
            CoveringMethod::SvdLimit => "svd_limit",
        }
    }
}

/// One radius of the schedule with its infimum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScheduleEntry {
    /// Ball radius.
    pub eta: f64,
    /// Infimum found over that ball.
    pub inf: f64,
}

/// Estimated covering constant.
#[derive(Clone, Debug, PartialEq)]
pub struct CoveringEstimate {
    /// The estimate, the infimum at the smallest radius.
    pub value: f64,
    /// How it was obtained.
    pub method: CoveringMethod,
    /// Radii with their infima, radii decreasing and infima nondecreasing.
    pub schedule: Vec<ScheduleEntry>,
    /// Frobenius norm of the Jacobian at the centre, or at the nearest
    /// differentiable sample when the centre is singular.
    pub frobenius_cap: f64,
    /// The last two infima agree to [`CONVERGENCE_TOL`] relative.
    pub converged: bool,
    /// Interior samples per radius.
    pub samples_per_eta: usize,
}

/// Geometric schedule `eta0, eta0/factor, ...` with `steps` radii.
pub fn geometric_schedule(eta0: f64, factor: f64, steps: usize) -> Result<Vec<f64>, CoveringError> {
    if !(eta0 > 0.0 && eta0.is_finite()) {
        return Err(CoveringError::InvalidSchedule(format!(
            "eta0 must be positive, got {eta0}"
        )));
    }
    if !(factor > 1.0 && factor.is_finite()) {
        return Err(CoveringError::InvalidSchedule(format!(
            "factor must exceed 1, got {factor}"
        )));
    }
    if steps == 0 {
        return Err(CoveringError::InvalidSchedule(
            "at least one step required".into(),
        ));
    }
    let mut out = Vec::with_capacity(steps);
    let mut eta = eta0;
    for _ in 0..steps {
        out.push(eta);
        eta /= factor;
    }
    Ok(out)
}

/// Default schedule: `eta0 = max(0.5, 0.1 |z_bar|)`, factor 4, eight radii.
pub fn default_schedule(z_bar: &[f64]) -> Vec<f64> {
    let eta0 = (0.1 * math::norm(z_bar)).max(0.5);
    geometric_schedule(eta0, 4.0, 8).expect("default schedule parameters are valid")
}

fn check_schedule(schedule: &[f64]) -> Result<(), CoveringError> {
    let last = *schedule
        .last()
        .ok_or_else(|| CoveringError::InvalidSchedule("empty schedule".into()))?;
    if schedule.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(CoveringError::InvalidSchedule(
            "radii must be strictly decreasing".into(),
        ));
    }
    if !(last >= MIN_ETA) || !schedule[0].is_finite() {
        return Err(CoveringError::InvalidSchedule(format!(
            "radii must lie in [{MIN_ETA}, inf), got {last}"
        )));
    }
    Ok(())
}

struct Search<'a, M: Mapping + ?Sized> {
    f: &'a M,
    z_bar: &'a [f64],
    w_bar: &'a [f64],
    eta: f64,
}

impl<M: Mapping + ?Sized> Search<'_, M> {
    // sigma_min at an admissible point, None otherwise.
    fn objective(&self, z: &[f64]) -> Option<f64> {
        if math::dist(z, self.z_bar) > self.eta || self.f.singular_reason(z).is_some() {
            return None;
        }
        let fz = self.f.eval(z).ok()?;
        if math::dist(&fz, self.w_bar) > self.eta {
            return None;
        }
        let jac = jacobian_ad(self.f, z).ok()?;
        Some(min_singular_value(&jac.transpose()))
    }

    fn project(&self, mut z: Vec<f64>) -> Vec<f64> {
        let d = math::dist(&z, self.z_bar);
        if d > self.eta {
            let s = self.eta / d * (1.0 - 1e-15);
            for (zi, ci) in z.iter_mut().zip(self.z_bar) {
                *zi = ci + (*zi - ci) * s;
            }
        }
        z
    }

    fn refine(&self, mut x: Vec<f64>, mut best: f64, iterations: usize) -> (Vec<f64>, f64) {
        let mut step = self.eta / 4.0;
        for _ in 0..iterations {
            if best == 0.0 || step < self.eta * 1e-12 {
                break;
            }
            let mut improved = false;
            for j in 0..x.len() {
                for sign in [1.0, -1.0] {
                    let mut cand = x.clone();
                    cand[j] += sign * step;
                    let cand = self.project(cand);
                    if let Some(v) = self.objective(&cand) {
                        if v < best {
                            best = v;
                            x = cand;
                            improved = true;
                        }
                    }
                }
            }
            if !improved {
                step /= 2.0;
            }
        }
        (x, best)
    }
}

fn check_dims<M: Mapping + ?Sized>(f: &M, z_bar: &[f64]) -> Result<(), CoveringError> {
    if z_bar.len() != f.input_dim() {
        return Err(CoveringError::Precondition(format!(
            "point has dimension {}, mapping expects {}",
            z_bar.len(),
            f.input_dim()
        )));
    }
    if z_bar.len() > MAX_DIM {
        return Err(CoveringError::Precondition(format!(
            "input dimension {} exceeds the sampler limit {MAX_DIM}",
            z_bar.len()
        )));
    }
    Ok(())
}

/// Infimum of `sigma_min(D*f(z))` over sampled `z` in `B(z_bar, eta)` with
/// `f(z)` in `B(w_bar, eta)`, skipping singular points.
///
/// Samples are `z_bar` itself, `samples` interior low-discrepancy points,
/// `samples / 4` boundary points, followed by coordinate descent from the
/// best one.
pub fn inf_over_ball<M: Mapping + ?Sized>(
    f: &M,
    z_bar: &[f64],
    w_bar: &[f64],
    eta: f64,
    config: &SamplingConfig,
) -> Result<f64, CoveringError> {
    check_dims(f, z_bar)?;
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(CoveringError::Precondition(format!(
            "eta must be positive, got {eta}"
        )));
    }
    if config.samples < MIN_SAMPLES {
        return Err(CoveringError::Precondition(format!(
            "at least {MIN_SAMPLES} samples required, got {}",
            config.samples
        )));
    }
    let fz = f.eval(z_bar)?;
    if w_bar.len() != fz.len() || math::dist(&fz, w_bar) > CENTER_TOL * math::norm(w_bar).max(1.0) {
        return Err(CoveringError::Precondition("w̄ = f(z̄) required".into()));
    }

    let search = Search {
        f,
        z_bar,
        w_bar,
        eta,
    };
    let n = z_bar.len();
    let mut candidates = Vec::with_capacity(config.samples + config.samples / 4 + 1);
    candidates.push(z_bar.to_vec());
    candidates.extend(ball_points(z_bar, eta, config.samples, config.seed));
    for d in sphere_directions(n, config.samples / 4, config.seed ^ 0x5eed) {
        candidates.push(z_bar.iter().zip(&d).map(|(c, v)| c + eta * v).collect());
    }

    let mut best: Option<(Vec<f64>, f64)> = None;
    for z in candidates {
        let z = search.project(z);
        if let Some(v) = search.objective(&z) {
            if best.as_ref().is_none_or(|(_, b)| v < *b) {
                best = Some((z, v));
            }
        }
    }
    let (x, v) = best.ok_or(CoveringError::DegenerateBall { eta })?;
    Ok(search.refine(x, v, config.refine_iterations).1)
}

/// Frobenius norm of the Jacobian at `z`, an upper bound for the covering
/// constant when `n >= m`.
pub fn frobenius_bound<M: Mapping + ?Sized>(f: &M, z: &[f64]) -> Result<f64, CoveringError> {
    if f.input_dim() < f.output_dim() {
        return Err(CoveringError::Hypothesis(format!(
            "n >= m required, mapping is R^{} -> R^{}",
            f.input_dim(),
            f.output_dim()
        )));
    }
    check_dims(f, z)?;
    if let Some(reason) = f.singular_reason(z) {
        return Err(CoveringError::Precondition(format!(
            "point is singular: {reason}"
        )));
    }
    let jac = jacobian_ad(f, z).map_err(|e| CoveringError::Precondition(format!("{e}")))?;
    Ok(frobenius_norm(&jac))
}

// Frobenius norm at z_bar, or at the nearest differentiable sample of a ball.
fn frobenius_cap<M: Mapping + ?Sized>(f: &M, z_bar: &[f64], eta: f64, seed: u64) -> f64 {
    if let Ok(j) = jacobian_ad(f, z_bar) {
        return frobenius_norm(&j);
    }
    let mut pts = ball_points(z_bar, eta, 4 * MIN_SAMPLES, seed);
    pts.sort_by(|a, b| math::dist(a, z_bar).total_cmp(&math::dist(b, z_bar)));
    pts.iter()
        .find_map(|p| jacobian_ad(f, p).ok())
        .map_or(f64::INFINITY, |j| frobenius_norm(&j))
}

/// Estimates the covering constant of `f` at `z_bar` (with `w_bar = f(z_bar)`)
/// along a strictly decreasing radius schedule.
///
/// Infima of nested balls are reduced by minimum from the small radii
/// upward, so the reported trace is nondecreasing as the radius shrinks.
pub fn estimate<M: Mapping + ?Sized>(
    f: &M,
    z_bar: &[f64],
    schedule: &[f64],
    config: &SamplingConfig,
) -> Result<CoveringEstimate, CoveringError> {
    check_dims(f, z_bar)?;
    check_schedule(schedule)?;
    let w_bar = f.eval(z_bar)?;
    let frobenius_cap = frobenius_cap(f, z_bar, schedule[0], config.seed);

    if f.output_dim() > f.input_dim() {
        return Ok(CoveringEstimate {
            value: 0.0,
            method: CoveringMethod::DimensionZero,
            schedule: Vec::new(),
            frobenius_cap,
            converged: true,
            samples_per_eta: 0,
        });
    }

    let mut infs = Vec::with_capacity(schedule.len());
    for &eta in schedule {
        infs.push(inf_over_ball(f, z_bar, &w_bar, eta, config)?);
    }
    for k in (0..infs.len().saturating_sub(1)).rev() {
        infs[k] = infs[k].min(infs[k + 1]);
    }
    let value = *infs.last().expect("schedule is nonempty");
    let converged = match infs.len() {
        0 | 1 => false,
        k => {
            let (a, b) = (infs[k - 2], infs[k - 1]);
            math::abs(b - a) <= CONVERGENCE_TOL * math::abs(b) || (a == 0.0 && b == 0.0)
        }
    };
    Ok(CoveringEstimate {
        value,
        method: CoveringMethod::SvdLimit,
        schedule: schedule
            .iter()
            .zip(&infs)
            .map(|(&eta, &inf)| ScheduleEntry { eta, inf })
            .collect(),
        frobenius_cap,
        converged,
        samples_per_eta: config.samples,
    })
}
