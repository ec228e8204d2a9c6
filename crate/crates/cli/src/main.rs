use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use covkit::solve::{Grid, SolveConfig};
use covkit::{
    parse_vector, run, schedule_from_flags, CliError, Command, MappingSource, OutputFormat,
    RunConfig, EXIT_PRECONDITION,
};

#[derive(Parser)]
#[command(
    name = "covkit",
    version,
    about = "Derivatives, coderivatives and covering constants of maps R^n -> R^m"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// List the built-in mappings.
    Catalog(Common),
    /// Jacobian (n x m, row j holds the partials in x_j).
    Jacobian(Common),
    /// Coderivative matrix, optionally applied to a dual vector.
    Coderivative(Common),
    /// Covering constant estimate along a shrinking radius schedule.
    Covering(Common),
    /// Coincidence solve F(x) = h(x, s) + omega(s) over a parameter grid.
    Solve(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct Common {
    /// Catalog mapping name.
    #[arg(long, conflicts_with = "expr")]
    mapping: Option<String>,
    /// Inline mapping, e.g. "x1*x2, x1*x3".
    #[arg(long)]
    expr: Option<String>,
    /// Base point, e.g. 1,2,3.
    #[arg(long, allow_hyphen_values = true)]
    point: Option<String>,
    /// Dual vector for coderivative.
    #[arg(long, allow_hyphen_values = true)]
    dual: Option<String>,
    /// Parameter grid start:end:count for solve.
    #[arg(long, allow_hyphen_values = true)]
    param_grid: Option<String>,
    /// Solve config file.
    #[arg(long)]
    config: Option<std::path::PathBuf>,
    /// First radius of the schedule.
    #[arg(long)]
    eta0: Option<f64>,
    /// Ratio between consecutive radii.
    #[arg(long)]
    eta_factor: Option<f64>,
    /// Number of radii.
    #[arg(long)]
    eta_steps: Option<usize>,
    /// Interior samples per radius.
    #[arg(long, default_value_t = 256)]
    samples: usize,
    /// Sampling seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    output: Format,
    /// Residual tolerance for solve.
    #[arg(long)]
    tol: Option<f64>,
    /// Also report the closed-form covering constant; fail when its side
    /// conditions do not hold.
    #[arg(long)]
    check_oracle: bool,
}

fn config(command: Command, c: Common) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::new(command);
    cfg.mapping = match (c.mapping, c.expr) {
        (Some(m), _) => Some(MappingSource::Catalog(m)),
        (None, Some(e)) => Some(MappingSource::Expr(e)),
        _ => None,
    };
    cfg.point = c
        .point
        .as_deref()
        .map(parse_vector)
        .transpose()?
        .unwrap_or_default();
    cfg.dual = c.dual.as_deref().map(parse_vector).transpose()?;
    cfg.eta_schedule = schedule_from_flags(&cfg.point, c.eta0, c.eta_factor, c.eta_steps)?;
    cfg.samples = c.samples;
    cfg.seed = c.seed;
    cfg.output = match c.output {
        Format::Json => OutputFormat::Json,
        Format::Csv => OutputFormat::Csv,
    };
    cfg.tol = c.tol;
    cfg.check_oracle = c.check_oracle;
    cfg.param_grid = c.param_grid.as_deref().map(Grid::parse).transpose()?;
    if let Some(path) = c.config {
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::Precondition(format!("cannot read {}: {e}", path.display())))?;
        cfg.solve = Some(SolveConfig::parse(&text)?);
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common) = match cli.command {
        Cmd::Catalog(c) => (Command::Catalog, c),
        Cmd::Jacobian(c) => (Command::Jacobian, c),
        Cmd::Coderivative(c) => (Command::Coderivative, c),
        Cmd::Covering(c) => (Command::Covering, c),
        Cmd::Solve(c) => (Command::Solve, c),
    };
    let outcome = match config(command, common) {
        Ok(cfg) => run(&cfg),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_PRECONDITION as u8);
        }
    };
    if let Some(r) = &outcome.report {
        let _ = std::io::stdout().write_all(r.as_bytes());
    }
    if let Some(d) = &outcome.diagnostic {
        eprintln!("error: {d}");
    }
    ExitCode::from(outcome.code as u8)
}
