//! Command-line front end for `covkit-core`.
//!
//! [`run`] turns a [`RunConfig`] into an exit code and a serialized report;
//! the binary only parses flags and prints.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod expr;
pub mod solve;

use std::ops::Deref;

use covkit_core::amz::AmzError;
use covkit_core::autodiff::{jacobian_ad, AdError};
use covkit_core::catalog::{self, CatalogError, MappingSpec};
use covkit_core::coderivative::{apply, coderivative_matrix, Applied, Coderivative};
use covkit_core::covering::{
    default_schedule, estimate, geometric_schedule, CoveringError, SamplingConfig,
};
use covkit_core::linalg::{LinalgError, Matrix};
use covkit_core::mapping::{EvalError, Mapping};
use serde::Serialize;
use thiserror::Error;

use crate::expr::{ExprMapping, ParseError};
use crate::solve::{run_solve, Grid, SolveConfig, SolveResult};

/// Exit code for success.
pub const EXIT_OK: i32 = 0;
/// Exit code for violated preconditions and bad input.
pub const EXIT_PRECONDITION: i32 = 2;
/// Exit code for a solve that did not converge everywhere.
pub const EXIT_NONCONVERGENCE: i32 = 3;

/// Failures surfaced to the user.
#[derive(Debug, Error)]
pub enum CliError {
    /// Unknown catalog name.
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    /// Inline expression did not parse.
    #[error(transparent)]
    Parse(#[from] ParseError),
    /// Any violated condition, named.
    #[error("{0}")]
    Precondition(String),
    /// Evaluation failed.
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
    /// Derivative unavailable.
    #[error(transparent)]
    Ad(#[from] AdError),
    /// Covering estimation failed.
    #[error(transparent)]
    Covering(#[from] CoveringError),
    /// Solver failure.
    #[error(transparent)]
    Amz(#[from] AmzError),
    /// Dimension mismatch in linear algebra.
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    /// Output serialization failed.
    #[error("cannot write report: {0}")]
    Output(String),
}

impl CliError {
    /// Process exit code for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Amz(AmzError::NonConvergence { .. }) => EXIT_NONCONVERGENCE,
            _ => EXIT_PRECONDITION,
        }
    }
}

/// Parses `1,2,3`, optionally wrapped in parentheses or brackets.
pub fn parse_vector(text: &str) -> Result<Vec<f64>, CliError> {
    let t = text
        .trim()
        .trim_start_matches(['(', '['])
        .trim_end_matches([')', ']']);
    if t.trim().is_empty() {
        return Ok(Vec::new());
    }
    t.split(',')
        .map(|s| {
            let s = s.trim().replace('\u{2212}', "-");
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::Precondition(format!("`{s}` is not a finite number")))
        })
        .collect()
}

/// Where a mapping comes from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MappingSource {
    /// A catalog entry by name.
    Catalog(String),
    /// An inline expression.
    Expr(String),
}

impl MappingSource {
    /// Bare identifiers other than `x1..x9` name catalog entries; anything
    /// else is an expression.
    pub fn from_text(text: &str) -> Self {
        let t = text.trim();
        let ident = t.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
            && t.chars().next().is_some_and(|c| c.is_ascii_alphabetic());
        let variable = t.len() == 2 && t.starts_with('x') && t.as_bytes()[1].is_ascii_digit();
        if ident && !variable {
            MappingSource::Catalog(t.to_string())
        } else {
            MappingSource::Expr(t.to_string())
        }
    }

    /// Text shown in reports.
    pub fn label(&self) -> &str {
        match self {
            MappingSource::Catalog(s) | MappingSource::Expr(s) => s,
        }
    }

    /// Looks up or parses the mapping.
    pub fn resolve(&self) -> Result<Resolved, CliError> {
        Ok(match self {
            MappingSource::Catalog(name) => Resolved::Catalog(catalog::get(name)?),
            MappingSource::Expr(e) => Resolved::Expr(ExprMapping::parse(e)?),
        })
    }
}

/// A ready mapping.
#[derive(Debug)]
pub enum Resolved {
    /// Catalog entry.
    Catalog(&'static MappingSpec),
    /// Parsed expression.
    Expr(ExprMapping),
}

impl Deref for Resolved {
    type Target = dyn Mapping;

    fn deref(&self) -> &(dyn Mapping + 'static) {
        match self {
            Resolved::Catalog(s) => *s,
            Resolved::Expr(e) => e,
        }
    }
}

/// Subcommands.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// List the catalog.
    Catalog,
    /// Jacobian at a point.
    Jacobian,
    /// Coderivative matrix at a point, optionally applied to a dual.
    Coderivative,
    /// Covering constant estimate.
    Covering,
    /// Coincidence solve from a config file.
    Solve,
}

/// Report encoding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum OutputFormat {
    /// Nested JSON.
    #[default]
    Json,
    /// Flat rows with a header.
    Csv,
}

/// Everything one run needs.
#[derive(Clone, Debug)]
pub struct RunConfig {
    /// What to do.
    pub command: Command,
    /// Mapping, unused by `catalog` and `solve`.
    pub mapping: Option<MappingSource>,
    /// Base point.
    pub point: Vec<f64>,
    /// Radius schedule; the default schedule for the point when absent.
    pub eta_schedule: Option<Vec<f64>>,
    /// Interior samples per radius.
    pub samples: usize,
    /// Report encoding.
    pub output: OutputFormat,
    /// Sampling seed.
    pub seed: u64,
    /// Dual vector for `coderivative`.
    pub dual: Option<Vec<f64>>,
    /// Require the closed-form constant for `covering` and report it.
    pub check_oracle: bool,
    /// Parsed solve file.
    pub solve: Option<SolveConfig>,
    /// Grid overriding the one in the solve file.
    pub param_grid: Option<Grid>,
    /// Residual tolerance overriding the one in the solve file.
    pub tol: Option<f64>,
}

impl RunConfig {
    /// A config with default sampling settings.
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            mapping: None,
            point: Vec::new(),
            eta_schedule: None,
            samples: SamplingConfig::default().samples,
            output: OutputFormat::Json,
            seed: 0,
            dual: None,
            check_oracle: false,
            solve: None,
            param_grid: None,
            tol: None,
        }
    }
}

/// Builds a geometric schedule from optional flags, filling gaps from the
/// default schedule for `point`. `None` when no flag is given.
pub fn schedule_from_flags(
    point: &[f64],
    eta0: Option<f64>,
    factor: Option<f64>,
    steps: Option<usize>,
) -> Result<Option<Vec<f64>>, CliError> {
    if eta0.is_none() && factor.is_none() && steps.is_none() {
        return Ok(None);
    }
    let d = default_schedule(point);
    let s = geometric_schedule(
        eta0.unwrap_or(d[0]),
        factor.unwrap_or(4.0),
        steps.unwrap_or(d.len()),
    )?;
    Ok(Some(s))
}

/// Process outcome.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    /// Exit code.
    pub code: i32,
    /// Report for standard output, possibly partial.
    pub report: Option<String>,
    /// Diagnostic for standard error.
    pub diagnostic: Option<String>,
}

/// Report envelope.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    /// Subcommand.
    pub command: Command,
    /// Mapping label, null for `catalog`.
    pub mapping: Option<String>,
    /// Base point.
    pub point: Vec<f64>,
    /// Command-specific payload.
    pub result: ResultBody,
    /// Run settings.
    pub provenance: Provenance,
}

/// Settings that reproduce a report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Provenance {
    /// Sampling seed.
    pub seed: u64,
    /// Interior samples per radius.
    pub samples: usize,
    /// Crate version.
    pub version: &'static str,
}

/// Command-specific report payloads.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ResultBody {
    /// `catalog`.
    Catalog {
        /// One entry per mapping.
        mappings: Vec<CatalogEntry>,
    },
    /// `jacobian`.
    Jacobian {
        /// `f(z)`.
        value: Vec<f64>,
        /// `n x m` rows, row `j` holding the partials in `x_j`.
        rows: Vec<Vec<f64>>,
    },
    /// `coderivative`.
    Coderivative(CoderivativeBody),
    /// `covering`.
    Covering(CoveringBody),
    /// `solve`.
    Solve(SolveResult),
}

/// A catalog listing line.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CatalogEntry {
    /// Identifier.
    pub name: &'static str,
    /// Input dimension.
    pub n: usize,
    /// Output dimension.
    pub m: usize,
    /// Formula.
    pub formula: &'static str,
    /// `exact`, `upper_bound`, `mixed` or `none`.
    pub oracle: &'static str,
    /// Declared norm relation.
    pub norm_identity: &'static str,
}

/// Coderivative payload.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoderivativeBody {
    /// `defined`, `restricted`, `empty` or `undefined_point`.
    pub status: &'static str,
    /// `m x n` rows, null when there is no matrix.
    pub matrix: Option<Vec<Vec<f64>>>,
    /// Dual coordinates forced to zero by a restricted result.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zero_duals: Option<Vec<usize>>,
    /// Image of the requested dual.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub applied: Option<AppliedBody>,
}

/// Image of a dual vector.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AppliedBody {
    /// The dual.
    pub dual: Vec<f64>,
    /// `value`, `empty` or `undefined`.
    pub kind: &'static str,
    /// The image, when there is one.
    pub value: Option<Vec<f64>>,
}

/// Covering payload.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoveringBody {
    /// Estimated constant.
    pub value: f64,
    /// `dimension_zero` or `svd_limit`.
    pub method: &'static str,
    /// Last two infima agree.
    pub converged: bool,
    /// Frobenius upper bound, null when infinite.
    pub frobenius_cap: Option<f64>,
    /// Trace along the radius schedule.
    pub schedule: Vec<EtaEntry>,
    /// Closed-form constant, when requested.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleBody>,
}

/// One radius of the schedule.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EtaEntry {
    /// Radius.
    pub eta: f64,
    /// Sampled infimum.
    pub inf: f64,
}

/// Closed-form constant.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleBody {
    /// `exact` or `upper_bound`.
    pub kind: &'static str,
    /// Value.
    pub value: f64,
}

fn rows(m: &Matrix) -> Vec<Vec<f64>> {
    m.to_rows()
}

fn resolve_at(cfg: &RunConfig) -> Result<Resolved, CliError> {
    let src = cfg
        .mapping
        .as_ref()
        .ok_or_else(|| CliError::Precondition("--mapping or --expr required".into()))?;
    let f = src.resolve()?;
    if cfg.point.len() != f.input_dim() {
        return Err(CliError::Precondition(format!(
            "point has dimension {}, mapping expects {}",
            cfg.point.len(),
            f.input_dim()
        )));
    }
    Ok(f)
}

fn body(cfg: &RunConfig) -> Result<ResultBody, CliError> {
    Ok(match cfg.command {
        Command::Catalog => ResultBody::Catalog {
            mappings: catalog::all()
                .iter()
                .map(|s| CatalogEntry {
                    name: s.name,
                    n: s.n,
                    m: s.m,
                    formula: s.formula,
                    oracle: s.oracle_tag(),
                    norm_identity: s.norm_identity.as_str(),
                })
                .collect(),
        },
        Command::Jacobian => {
            let f = resolve_at(cfg)?;
            let value = f.eval(&cfg.point)?;
            ResultBody::Jacobian {
                value,
                rows: rows(&jacobian_ad(&*f, &cfg.point)?),
            }
        }
        Command::Coderivative => {
            let f = resolve_at(cfg)?;
            f.eval(&cfg.point)?;
            let c = coderivative_matrix(&*f, &cfg.point);
            let zero_duals = match &c {
                Coderivative::Restricted { zero_duals, .. } => {
                    Some(zero_duals.iter().map(|i| i + 1).collect())
                }
                _ => None,
            };
            let applied = match &cfg.dual {
                None => None,
                Some(y) => {
                    let (kind, value) = match apply(&c, y)? {
                        Applied::Value(v) => ("value", Some(v.into_inner())),
                        Applied::Empty => ("empty", None),
                        Applied::Undefined => ("undefined", None),
                    };
                    Some(AppliedBody {
                        dual: y.clone(),
                        kind,
                        value,
                    })
                }
            };
            ResultBody::Coderivative(CoderivativeBody {
                status: c.status().as_str(),
                matrix: c.matrix().map(rows),
                zero_duals,
                applied,
            })
        }
        Command::Covering => {
            let f = resolve_at(cfg)?;
            let oracle = if cfg.check_oracle {
                let o = f
                    .covering_oracle(&cfg.point)
                    .ok_or_else(|| {
                        CliError::Precondition(format!("no closed-form constant for {}", f.name()))
                    })?
                    .map_err(CliError::Precondition)?;
                Some(OracleBody {
                    kind: o.kind.as_str(),
                    value: o.value,
                })
            } else {
                None
            };
            let schedule = cfg
                .eta_schedule
                .clone()
                .unwrap_or_else(|| default_schedule(&cfg.point));
            let sampling = SamplingConfig {
                samples: cfg.samples,
                seed: cfg.seed,
                ..SamplingConfig::default()
            };
            let e = estimate(&*f, &cfg.point, &schedule, &sampling)?;
            ResultBody::Covering(CoveringBody {
                value: e.value,
                method: e.method.as_str(),
                converged: e.converged,
                frobenius_cap: Some(e.frobenius_cap).filter(|v| v.is_finite()),
                schedule: e
                    .schedule
                    .iter()
                    .map(|s| EtaEntry {
                        eta: s.eta,
                        inf: s.inf,
                    })
                    .collect(),
                oracle,
            })
        }
        Command::Solve => {
            let sc = cfg
                .solve
                .as_ref()
                .ok_or_else(|| CliError::Precondition("--config required for solve".into()))?;
            let mut sc = sc.clone();
            if let Some(t) = cfg.tol {
                if !(t > 0.0) {
                    return Err(CliError::Precondition("tol > 0 required".into()));
                }
                sc.tol = t;
            }
            let grid = cfg.param_grid.unwrap_or(sc.grid).points();
            ResultBody::Solve(run_solve(&sc, &grid, cfg.seed)?)
        }
    })
}

fn mapping_label(cfg: &RunConfig) -> Option<String> {
    match cfg.command {
        Command::Catalog => None,
        Command::Solve => cfg.solve.as_ref().map(|s| s.mapping.label().to_string()),
        _ => cfg.mapping.as_ref().map(|m| m.label().to_string()),
    }
}

fn point_of(cfg: &RunConfig) -> Vec<f64> {
    match (cfg.command, &cfg.solve) {
        (Command::Solve, Some(s)) => s.x_bar.clone(),
        _ => cfg.point.clone(),
    }
}

fn csv_out(body: &ResultBody) -> Result<String, CliError> {
    let err = |e: csv::Error| CliError::Output(e.to_string());
    let mut w = csv::WriterBuilder::new()
        .flexible(true)
        .from_writer(Vec::new());
    let num = |v: f64| v.to_string();
    match body {
        ResultBody::Catalog { mappings } => {
            w.write_record(["name", "n", "m", "oracle"]).map_err(err)?;
            for e in mappings {
                w.write_record([e.name, &e.n.to_string(), &e.m.to_string(), e.oracle])
                    .map_err(err)?;
            }
        }
        ResultBody::Jacobian { rows, .. } => {
            let m = rows.first().map_or(0, Vec::len);
            w.write_record((1..=m).map(|i| format!("f{i}")))
                .map_err(err)?;
            for r in rows {
                w.write_record(r.iter().map(|v| num(*v))).map_err(err)?;
            }
        }
        ResultBody::Coderivative(c) => {
            w.write_record(["status", c.status]).map_err(err)?;
            for r in c.matrix.iter().flatten() {
                w.write_record(r.iter().map(|v| num(*v))).map_err(err)?;
            }
        }
        ResultBody::Covering(c) => {
            w.write_record(["eta", "inf"]).map_err(err)?;
            for e in &c.schedule {
                w.write_record([num(e.eta), num(e.inf)]).map_err(err)?;
            }
        }
        ResultBody::Solve(s) => {
            let n = s.solutions.first().map_or(0, |p| p.sigma.len());
            let mut head = vec!["parameter".to_string(), "status".to_string()];
            head.extend((1..=n).map(|i| format!("sigma{i}")));
            head.extend(["residual", "bound_rhs", "bound_holds", "iterations"].map(String::from));
            w.write_record(&head).map_err(err)?;
            for p in &s.solutions {
                let mut rec = vec![num(p.parameter), p.status.to_string()];
                rec.extend(p.sigma.iter().map(|v| num(*v)));
                rec.push(num(p.residual));
                rec.push(p.bound_rhs.map(num).unwrap_or_default());
                rec.push(p.bound_holds.map(|b| b.to_string()).unwrap_or_default());
                rec.push(p.iterations.to_string());
                w.write_record(&rec).map_err(err)?;
            }
        }
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Output(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Output(e.to_string()))
}

/// Builds the report for `cfg` without encoding it.
pub fn build_report(cfg: &RunConfig) -> Result<Report, CliError> {
    Ok(Report {
        command: cfg.command,
        mapping: mapping_label(cfg),
        point: point_of(cfg),
        result: body(cfg)?,
        provenance: Provenance {
            seed: cfg.seed,
            samples: cfg.samples,
            version: env!("CARGO_PKG_VERSION"),
        },
    })
}

fn encode(report: &Report, format: OutputFormat) -> Result<String, CliError> {
    match format {
        OutputFormat::Json => serde_json::to_string_pretty(report)
            .map(|s| s + "\n")
            .map_err(|e| CliError::Output(e.to_string())),
        OutputFormat::Csv => csv_out(&report.result),
    }
}

/// Runs one command. Exit code 0 on success, 2 on a violated condition
/// (the diagnostic names it) and 3 when a solve leaves grid points
/// unconverged, in which case the partial report is still returned.
pub fn run(cfg: &RunConfig) -> Outcome {
    let fail = |e: CliError| Outcome {
        code: e.exit_code(),
        report: None,
        diagnostic: Some(e.to_string()),
    };
    let report = match build_report(cfg) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    let text = match encode(&report, cfg.output) {
        Ok(t) => t,
        Err(e) => return fail(e),
    };
    match &report.result {
        ResultBody::Solve(s) if !s.all_converged() => Outcome {
            code: EXIT_NONCONVERGENCE,
            report: Some(text),
            diagnostic: Some("some grid points did not converge".into()),
        },
        _ => Outcome {
            code: EXIT_OK,
            report: Some(text),
            diagnostic: None,
        },
    }
}
