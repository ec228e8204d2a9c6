//! Coincidence solves driven by a line-oriented `key = value` file.
//!
//! ```text
//! # F and the perturbation G(x, s) = h(x, s) + omega(s)
//! mapping = ex6_7
//! h = 0.05*x1, 0.05*x2
//! omega = 1, 0
//! x_bar = 1, 0
//! grid = 0:1:11
//! tol = 1e-10
//! region_radius = 0.5
//! ```
//!
//! Components may also be given one per key (`h1`, `h2`, `omega1`, ...).

use std::collections::BTreeMap;

use covkit_core::amz::{
    certify_folding, certify_squaring, estimate_lipschitz, solve_grid, AmzError, AmzProblem,
    CertifiedSolution, CoincidenceSolution, PerturbationParts, DEFAULT_TOL,
};
use covkit_core::covering::{default_schedule, estimate, BallSpec, SamplingConfig};
use covkit_core::mapping::{EvalError, OracleKind};
use serde::Serialize;

use crate::expr::{ExprList, Scope};
use crate::{parse_vector, CliError, MappingSource};

/// Uniform parameter grid `start:end:count`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    /// First parameter.
    pub start: f64,
    /// Last parameter.
    pub end: f64,
    /// Number of points.
    pub count: usize,
}

impl Grid {
    /// Parses `start:end:count`.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let bad =
            || CliError::Precondition(format!("grid must read start:end:count, got `{text}`"));
        let parts: Vec<&str> = text.split(':').map(str::trim).collect();
        let [a, b, k] = parts.as_slice() else {
            return Err(bad());
        };
        let start: f64 = a.parse().map_err(|_| bad())?;
        let end: f64 = b.parse().map_err(|_| bad())?;
        let count: usize = k.parse().map_err(|_| bad())?;
        if count == 0 || !start.is_finite() || !end.is_finite() || (count == 1 && start != end) {
            return Err(bad());
        }
        Ok(Grid { start, end, count })
    }

    /// The grid points in order.
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.end - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| self.start + step * i as f64)
            .collect()
    }
}

/// A parsed solve file.
#[derive(Clone, Debug)]
pub struct SolveConfig {
    /// Catalog name or inline expression for `F`.
    pub mapping: MappingSource,
    /// `h(x, s)`.
    pub h: ExprList,
    /// `omega(s)`.
    pub omega: ExprList,
    /// Base point.
    pub x_bar: Vec<f64>,
    /// Parameter grid.
    pub grid: Grid,
    /// Residual tolerance.
    pub tol: f64,
    /// Radius of the region where the modulus of `G` is sampled.
    pub region_radius: Option<f64>,
}

fn components(map: &BTreeMap<String, String>, key: &str) -> Option<String> {
    if let Some(v) = map.get(key) {
        return Some(v.clone());
    }
    let parts: Vec<&String> = (1..).map_while(|i| map.get(&format!("{key}{i}"))).collect();
    (!parts.is_empty()).then(|| {
        parts
            .iter()
            .map(|s| s.as_str())
            .collect::<Vec<_>>()
            .join(", ")
    })
}

impl SolveConfig {
    /// Parses the file contents. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                CliError::Precondition(format!("line {}: expected key = value", i + 1))
            })?;
            let key = k.trim().to_string();
            if map.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(CliError::Precondition(format!(
                    "line {}: duplicate key `{key}`",
                    i + 1
                )));
            }
        }
        let need = |k: &str| {
            components(&map, k)
                .ok_or_else(|| CliError::Precondition(format!("config key `{k}` required")))
        };
        let mapping = MappingSource::from_text(&need("mapping")?);
        let h = ExprList::parse(&need("h")?, Scope::PERTURBATION)?;
        let omega = ExprList::parse(&need("omega")?, Scope::SHIFT)?;
        let x_bar = parse_vector(&need("x_bar")?)?;
        let grid = Grid::parse(&need("grid")?)?;
        let number = |k: &str| -> Result<Option<f64>, CliError> {
            map.get(k)
                .map(|v| {
                    v.parse::<f64>()
                        .map_err(|_| CliError::Precondition(format!("`{k}` must be a number")))
                })
                .transpose()
        };
        let tol = number("tol")?.unwrap_or(DEFAULT_TOL);
        let region_radius = number("region_radius")?;
        let known = [
            "mapping",
            "h",
            "omega",
            "x_bar",
            "grid",
            "tol",
            "region_radius",
        ];
        if let Some(k) = map.keys().find(|k| {
            let base = k.trim_end_matches(|c: char| c.is_ascii_digit());
            !known.contains(&k.as_str())
                && !(base != k.as_str() && (base == "h" || base == "omega"))
        }) {
            return Err(CliError::Precondition(format!("unknown config key `{k}`")));
        }
        if h.len() != omega.len() || h.len() != x_bar.len() {
            return Err(CliError::Precondition(format!(
                "h, omega and x_bar must have equal length, got {}, {}, {}",
                h.len(),
                omega.len(),
                x_bar.len()
            )));
        }
        if h.arity() > x_bar.len() {
            return Err(CliError::Precondition(format!(
                "h uses x{} but x̄ ∈ R^{}",
                h.arity(),
                x_bar.len()
            )));
        }
        if !(tol > 0.0) {
            return Err(CliError::Precondition("tol > 0 required".into()));
        }
        Ok(SolveConfig {
            mapping,
            h,
            omega,
            x_bar,
            grid,
            tol,
            region_radius,
        })
    }
}

/// One grid point of a solve report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolvePoint {
    /// Parameter value.
    pub parameter: f64,
    /// `"success"` or `"non_convergence"`.
    pub status: &'static str,
    /// Solution, or the last iterate on failure.
    pub sigma: Vec<f64>,
    /// Residual norm.
    pub residual: f64,
    /// Distance bound, absent on failure.
    pub bound_rhs: Option<f64>,
    /// Whether the distance bound holds, absent on failure.
    pub bound_holds: Option<bool>,
    /// Newton iterations.
    pub iterations: usize,
    /// Gap in the norm identity of `F`, when one is known.
    pub identity_gap: Option<f64>,
}

/// Outcome of a solve.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveResult {
    /// Covering rate used for `F` at `x_bar`.
    pub covering: f64,
    /// Sampled modulus of `G`.
    pub beta: f64,
    /// Midpoint rate `(beta + covering) / 2`.
    pub alpha: f64,
    /// Per-parameter results.
    pub solutions: Vec<SolvePoint>,
}

impl SolveResult {
    /// Whether every grid point converged.
    pub fn all_converged(&self) -> bool {
        self.solutions.iter().all(|s| s.status == "success")
    }
}

fn success(s: CoincidenceSolution<f64>, gap: Option<f64>) -> SolvePoint {
    SolvePoint {
        parameter: s.parameter,
        status: "success",
        sigma: s.sigma,
        residual: s.residual,
        bound_rhs: Some(s.bound_rhs),
        bound_holds: Some(s.bound_holds),
        iterations: s.iterations,
        identity_gap: gap,
    }
}

fn point(p: f64, r: Result<CoincidenceSolution<f64>, AmzError>) -> Result<SolvePoint, CliError> {
    match r {
        Ok(s) => Ok(success(s, None)),
        Err(AmzError::NonConvergence {
            sigma,
            residual,
            iterations,
        }) => Ok(SolvePoint {
            parameter: p,
            status: "non_convergence",
            sigma,
            residual,
            bound_rhs: None,
            bound_holds: None,
            iterations,
            identity_gap: None,
        }),
        Err(e) => Err(e.into()),
    }
}

fn certified(v: Vec<CertifiedSolution<f64>>) -> Vec<SolvePoint> {
    v.into_iter()
        .map(|c| success(c.solution, Some(c.identity_gap)))
        .collect()
}

/// Runs the solve. The squaring and folding catalog maps use their closed
/// covering rates and report the norm identity gap; any other square map
/// uses its exact oracle when available and the sampled estimate otherwise.
pub fn run_solve(cfg: &SolveConfig, grid: &[f64], seed: u64) -> Result<SolveResult, CliError> {
    let f = cfg.mapping.resolve()?;
    if f.input_dim() != cfg.x_bar.len() || f.output_dim() != cfg.x_bar.len() {
        return Err(CliError::Precondition(format!(
            "F must map R^{0} to R^{0} for x̄ ∈ R^{0}, got R^{1} -> R^{2}",
            cfg.x_bar.len(),
            f.input_dim(),
            f.output_dim()
        )));
    }
    let parts = PerturbationParts {
        h: Box::new(|x: &[f64], s: &f64| cfg.h.eval(x, *s)),
        omega: Box::new(|s: &f64| cfg.omega.eval(&[], *s)),
    };
    let g = |x: &[f64], s: &f64| -> Result<Vec<f64>, EvalError> {
        let (h, w) = ((parts.h)(x, s)?, (parts.omega)(s)?);
        Ok(h.iter().zip(&w).map(|(a, b)| a + b).collect())
    };
    let nx = cfg.x_bar.iter().map(|v| v * v).sum::<f64>().sqrt();
    let radius = cfg.region_radius.unwrap_or(nx / 2.0);
    let region = BallSpec::new(cfg.x_bar.clone(), radius)
        .map_err(|e| CliError::Precondition(e.to_string()))?;
    let beta = grid
        .iter()
        .map(|p| estimate_lipschitz(&g, p, &region, 200, seed))
        .try_fold(0.0_f64, |acc, b| b.map(|b| acc.max(b)))?;

    let name = f.name().to_string();
    let closed = match name.as_str() {
        _ if !matches!(cfg.mapping, MappingSource::Catalog(_)) => None,
        "ex6_7" => Some(nx),
        "f5_1" => Some(1.0),
        _ => None,
    };
    if let Some(cover) = closed {
        let res = if name == "ex6_7" {
            if cfg.region_radius.is_some_and(|r| r != nx / 2.0) {
                return Err(CliError::Precondition(
                    "the squaring map fixes region_radius = |x̄|/2".into(),
                ));
            }
            certify_squaring(&parts, &cfg.x_bar, grid, cfg.tol, seed)
        } else {
            certify_folding(&parts, &cfg.x_bar, radius, grid, cfg.tol, seed)
        };
        match res {
            Ok(sols) => {
                let alpha = 0.5 * (beta + cover);
                return Ok(SolveResult {
                    covering: cover,
                    beta,
                    alpha,
                    solutions: certified(sols),
                });
            }
            // rerun point by point for a partial report
            Err(AmzError::NonConvergence { .. }) => {}
            Err(e) => return Err(e.into()),
        }
    }

    let oracle = f
        .covering_oracle(&cfg.x_bar)
        .and_then(Result::ok)
        .filter(|o| o.kind == OracleKind::Exact);
    let cover = match (closed, oracle) {
        (Some(c), _) => c,
        (None, Some(o)) => o.value,
        (None, None) => {
            let config = SamplingConfig {
                seed,
                ..SamplingConfig::default()
            };
            estimate(&*f, &cfg.x_bar, &default_schedule(&cfg.x_bar), &config)?.value
        }
    };
    if beta >= cover {
        return Err(AmzError::Hypothesis(format!(
            "Lipschitz modulus {beta} must stay below the covering rate {cover}"
        ))
        .into());
    }
    let alpha = 0.5 * (beta + cover);
    let y_bar = f.eval(&cfg.x_bar)?;
    let problem = AmzProblem::new(
        &*f,
        Box::new(g),
        cfg.x_bar.clone(),
        y_bar,
        region,
        beta,
        alpha,
    )?;
    let solutions = solve_grid(&problem, grid, cfg.tol, true)
        .into_iter()
        .zip(grid)
        .map(|(r, &p)| point(p, r))
        .collect::<Result<_, _>>()?;
    Ok(SolveResult {
        covering: cover,
        beta,
        alpha,
        solutions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_points() {
        assert_eq!(Grid::parse("0:1:3").unwrap().points(), vec![0.0, 0.5, 1.0]);
        assert_eq!(Grid::parse("2:2:1").unwrap().points(), vec![2.0]);
        assert!(Grid::parse("0:1").is_err());
        assert!(Grid::parse("0:1:0").is_err());
    }

    #[test]
    fn config_with_split_components() {
        let cfg = SolveConfig::parse(
            "mapping = ex6_7\nh1 = 0.05*x1\nh2 = 0.05*x2 # second\nomega1 = 1\nomega2 = 0\nx_bar = 1,0\ngrid = 0:1:3\n",
        )
        .unwrap();
        assert_eq!(cfg.h.len(), 2);
        assert_eq!(cfg.tol, DEFAULT_TOL);
        assert!(SolveConfig::parse("mapping = ex6_7\nbogus = 1").is_err());
        assert!(SolveConfig::parse("mapping = ex6_7\nh = x1\nh = x2").is_err());
    }
}
