//! `greenlab`: solve radial Green's functions on closed rotationally
//! symmetric manifolds, evaluate the monotone level-set functionals, and run
//! the verification battery.
//!
//! Exit codes: 0 on success, 1 when a verification check fails, 2 on
//! configuration or infrastructure errors.

use clap::{Args, Parser, Subcommand};
use greenlab::config::{ConfigError, EmitFormat, InjectSpec, KChoice, ManifoldSpec, RunConfig};
use greenlab::fields::RadialFieldTable;
use greenlab::functionals::{Evaluator, FunctionalSet};
use greenlab::output;
use greenlab::solver::solve;
use greenlab::verify::run_battery;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "greenlab",
    about = "Green's function laboratory for the comparison operator -Δ + n(n-2)k/4 \
             on closed rotationally symmetric manifolds"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve the radial profile and write green.csv / solve.json.
    Solve(RunArgs),
    /// Evaluate the level-set functionals and write functionals.csv.
    Functionals(RunArgs),
    /// Run the verification battery and write report.json / report.txt.
    Verify(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Full run configuration as a JSON document; replaces the other flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Manifold family: model | s3 | perturbed | custom.
    #[arg(long, default_value = "model")]
    family: String,
    /// Dimension (≥ 3).
    #[arg(long)]
    n: Option<u32>,
    /// Comparison constant, or "auto" for the admissible k*.
    #[arg(long, default_value = "auto")]
    k: String,
    /// Perturbation strength; `verify` accepts a comma-separated sweep.
    #[arg(long)]
    eps: Option<String>,
    /// Comma-separated β list (default: (n-2)/(n-1), 1, 2, 3).
    #[arg(long)]
    beta: Option<String>,
    /// Interior grid points.
    #[arg(long)]
    grid: Option<usize>,
    /// Geometric grid density near the poles.
    #[arg(long)]
    per_decade: Option<usize>,
    /// Integrator relative tolerance.
    #[arg(long)]
    rtol: Option<f64>,
    /// Level-grid size.
    #[arg(long)]
    r_points: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// csv | json | both.
    #[arg(long, default_value = "both")]
    format: String,
    /// Fault injection (test-only): mis_normalize=F or inflate_k=F.
    #[arg(long)]
    inject: Option<String>,
    /// Custom warp expression (with --f1, --f2, --length).
    #[arg(long)]
    f: Option<String>,
    #[arg(long)]
    f1: Option<String>,
    #[arg(long)]
    f2: Option<String>,
    #[arg(long)]
    length: Option<f64>,
}

fn parse_list(s: &str, what: &str) -> Result<Vec<f64>, ConfigError> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| ConfigError::Invalid(format!("bad {what} value \"{t}\"")))
        })
        .collect()
}

impl RunArgs {
    /// Build one config per eps value (`verify` sweeps; other commands take a
    /// single value).
    fn to_configs(&self, allow_sweep: bool) -> Result<Vec<RunConfig>, ConfigError> {
        if let Some(path) = &self.config {
            return Ok(vec![RunConfig::from_file(path)?]);
        }
        let eps_list: Vec<Option<f64>> = match &self.eps {
            None => vec![None],
            Some(s) => {
                let values = parse_list(s, "eps")?;
                if values.len() > 1 && !allow_sweep {
                    return Err(ConfigError::Invalid(
                        "eps sweeps are only supported by `verify`".into(),
                    ));
                }
                values.into_iter().map(Some).collect()
            }
        };
        let n = self
            .n
            .ok_or_else(|| ConfigError::Invalid("--n is required (n must be ≥ 3)".into()))?;
        let k: KChoice = self.k.parse()?;
        let beta = match &self.beta {
            None => None,
            Some(s) => Some(parse_list(s, "beta")?),
        };
        let mut configs = Vec::new();
        for eps in eps_list {
            let manifold = match self.family.as_str() {
                "model" => ManifoldSpec::Model,
                "s3" => ManifoldSpec::S3,
                "perturbed" => ManifoldSpec::Perturbed {
                    eps: eps.ok_or_else(|| {
                        ConfigError::Invalid("the perturbed family requires --eps".into())
                    })?,
                },
                "custom" => ManifoldSpec::Custom {
                    f: required(&self.f, "--f")?,
                    f1: required(&self.f1, "--f1")?,
                    f2: required(&self.f2, "--f2")?,
                    length: self
                        .length
                        .ok_or_else(|| ConfigError::Invalid("custom requires --length".into()))?,
                },
                other => {
                    return Err(ConfigError::Invalid(format!(
                        "unknown family \"{other}\" (expected model, s3, perturbed, custom)"
                    )))
                }
            };
            let mut grid = greenlab::config::GridSpec::default();
            if let Some(i) = self.grid {
                grid.interior = i;
            }
            if let Some(p) = self.per_decade {
                grid.per_decade = p;
            }
            let cfg = RunConfig {
                schema_version: 1,
                manifold,
                n,
                k,
                beta: beta.clone(),
                r_points: self.r_points.unwrap_or(200),
                grid,
                rtol: self.rtol.unwrap_or(1e-12),
                out: self.out.clone(),
                format: self.format.parse::<EmitFormat>()?,
                inject: match &self.inject {
                    None => None,
                    Some(s) => Some(InjectSpec::parse_flag(s)?),
                },
                tolerances: Default::default(),
            };
            cfg.validate()?;
            configs.push(cfg);
        }
        Ok(configs)
    }
}

fn required(opt: &Option<String>, flag: &str) -> Result<String, ConfigError> {
    opt.clone().ok_or_else(|| ConfigError::Invalid(format!("custom requires {flag}")))
}

enum CliError {
    Config(String),
    Infra(String),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Infra(format!("io error: {e}"))
    }
}

impl From<greenlab::solver::SolverError> for CliError {
    fn from(e: greenlab::solver::SolverError) -> Self {
        CliError::Infra(e.to_string())
    }
}

fn cmd_solve(cfg: &RunConfig) -> Result<(), CliError> {
    let profile = cfg.build_profile()?;
    let k = cfg.resolve_k(&profile);
    let green = solve(&profile, k, &cfg.solve_options())?;
    if green.diagnostics.k_exceeds_admissible {
        eprintln!(
            "warning: k = {k} exceeds the admissible k* = {}; proceeding for exploration",
            green.diagnostics.k_star
        );
    }
    let table = RadialFieldTable::build(&green);
    let paths = output::write_solve_outputs(
        &cfg.out,
        &table,
        cfg.format != EmitFormat::Json,
        cfg.format != EmitFormat::Csv,
    )?;
    for p in paths {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn cmd_functionals(cfg: &RunConfig) -> Result<(), CliError> {
    let profile = cfg.build_profile()?;
    let k = cfg.resolve_k(&profile);
    let green = solve(&profile, k, &cfg.solve_options())?;
    let table = RadialFieldTable::build(&green);
    let ev = Evaluator::new(&table);
    let r = ev.level_grid(cfg.r_points);
    let betas = cfg.beta.clone().unwrap_or_else(|| FunctionalSet::default_betas(cfg.n));
    let set = FunctionalSet::compute(&ev, &r, &betas);
    let paths = output::write_functionals_outputs(&cfg.out, &set)?;
    for p in paths {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn cmd_verify(cfg: &RunConfig, suffix: &str) -> Result<bool, CliError> {
    let profile = cfg.build_profile()?;
    let k_choice = match cfg.k {
        KChoice::Auto => None,
        KChoice::Value(k) => Some(k),
    };
    let battery = cfg.battery_config()?;
    let report =
        run_battery(&profile, k_choice, &battery).map_err(|e| CliError::Infra(e.to_string()))?;
    let paths = output::write_report_outputs(&cfg.out, &report, suffix)?;
    for p in paths {
        println!("wrote {}", p.display());
    }
    println!(
        "{}: {} passed, {} failed, {} skipped",
        report.summary.verdict,
        report.summary.passed,
        report.summary.failed,
        report.summary.skipped
    );
    Ok(report.all_passed())
}

fn run() -> Result<bool, CliError> {
    let cli = Cli::parse();
    match &cli.cmd {
        Cmd::Solve(args) => {
            for cfg in args.to_configs(false)? {
                cmd_solve(&cfg)?;
            }
            Ok(true)
        }
        Cmd::Functionals(args) => {
            for cfg in args.to_configs(false)? {
                cmd_functionals(&cfg)?;
            }
            Ok(true)
        }
        Cmd::Verify(args) => {
            let configs = args.to_configs(true)?;
            let sweep = configs.len() > 1;
            let mut all = true;
            for cfg in &configs {
                let suffix = if sweep {
                    match &cfg.manifold {
                        ManifoldSpec::Perturbed { eps } => format!("_eps{eps}"),
                        _ => String::new(),
                    }
                } else {
                    String::new()
                };
                all &= cmd_verify(cfg, &suffix)?;
            }
            Ok(all)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Infra(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
