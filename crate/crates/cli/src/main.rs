//! `plasticwalk` command-line front end.
//!
//! Exit codes: 0 on success, 1 when a walk fails a constraint or a run
//! fails, 2 on usage, parse and configuration errors.

mod output;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use plasticwalk::config::{ExperimentConfig, OutputFormat};
use plasticwalk::limits::{check_time_limit_l, time_hamiltonian, ConstraintReport};
use plasticwalk::plastic::{check_plastic, enumerate_terms, spacetime_hamiltonian};
use plasticwalk::verify::{dispersion, spacetime_convergence, time_convergence, ConvergenceResult};
use plasticwalk::{lattice::SpinorField, Error, Execution, JetMode, KGrid, Mat2, WalkConfig, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use output::{derivative, render_sum, shift, Cell, Sink, SCHEMA_VERSION};

#[derive(Parser)]
#[command(
    name = "plasticwalk",
    version,
    about = "2D+1 quantum walks and their continuum limits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML experiment configuration; defaults apply when omitted
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output file; stdout when omitted
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[arg(long, global = true, value_parser = ["csv", "json"])]
    format: Option<String>,

    /// Overrides the config seed
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for the data-parallel kernels
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    threads: Option<u16>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Check the continuous-time or plastic limit constraints
    Check,
    /// Emit the continuous-time lattice Hamiltonian
    Hamiltonian,
    /// Emit the continuous-spacetime PDE generator
    Pde,
    /// Step a seeded random field and report the norm drift
    Simulate,
    /// Convergence of the walk to its limit over the eps list
    Converge,
    /// Eigenphases of the walk over the momentum grid
    Dispersion,
    /// List the exponent-matching terms of the squared walk
    Terms,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    fn domain(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidConfig(_)
            | Error::InvalidRational(_)
            | Error::InvalidJet(_)
            | Error::ExponentOutOfRange { .. }
            | Error::ModeMismatch { .. }
            | Error::TimeScaling
            | Error::Shape { .. } => 2,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::domain(format!("cannot write output: {e}"))
    }
}

type CliResult = Result<u8, Failure>;

struct Context {
    cfg: ExperimentConfig,
    sink: Sink,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> CliResult {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n as usize)
            .build_global()
            .map_err(|e| Failure::usage(e.to_string()))?;
    }
    let mut cfg = match &cli.config {
        Some(p) => {
            let text =
                std::fs::read_to_string(p).map_err(|e| Failure::usage(format!("cannot read {}: {e}", p.display())))?;
            ExperimentConfig::from_toml_str(&text)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let format = match cli.format.as_deref() {
        Some(f) => f.parse::<OutputFormat>()?,
        None => cfg.output.format,
    };
    let path = cli
        .output
        .clone()
        .or_else(|| cfg.output.path.clone().map(PathBuf::from));
    let ctx = Context {
        cfg,
        sink: Sink { format, path },
    };
    match cli.command {
        Command::Check => cmd_check(&ctx),
        Command::Hamiltonian => cmd_hamiltonian(&ctx),
        Command::Pde => cmd_pde(&ctx),
        Command::Simulate => cmd_simulate(&ctx),
        Command::Converge => cmd_converge(&ctx),
        Command::Dispersion => cmd_dispersion(&ctx),
        Command::Terms => cmd_terms(&ctx),
    }
}

fn header(command: &str) -> Value {
    json!({ "schema_version": SCHEMA_VERSION, "command": command })
}

fn limit_name(walk: &WalkConfig) -> &'static str {
    match walk.mode() {
        JetMode::Time => "time",
        JetMode::Plastic => "plastic",
    }
}

fn report(ctx: &Context, walk: &WalkConfig) -> ConstraintReport {
    match walk.mode() {
        JetMode::Time => check_time_limit_l(walk, ctx.cfg.run.l),
        JetMode::Plastic => check_plastic(walk, walk.a_exp, walk.coin_x.b_exp),
    }
}

fn first_failure(rep: &ConstraintReport) -> String {
    rep.conditions
        .iter()
        .find(|c| !c.satisfied)
        .map(|c| format!("constraint `{}` violated (residual {:.3e})", c.name, c.residual))
        .unwrap_or_default()
}

fn cmd_check(ctx: &Context) -> CliResult {
    let walk = ctx.cfg.walk_config()?;
    let rep = report(ctx, &walk);
    for c in &rep.conditions {
        eprintln!("{}: {} (residual {:.3e})", c.name, c.satisfied, c.residual);
    }
    let mut summary = header("check");
    summary["limit"] = json!(limit_name(&walk));
    summary["passed"] = json!(rep.passed);
    let rows = rep
        .conditions
        .iter()
        .map(|c| {
            let witness: Vec<String> = c.witness.iter().map(|(k, v)| format!("{k}={v}")).collect();
            vec![
                Cell::Text(c.name.clone()),
                Cell::Text(c.satisfied.to_string()),
                Cell::Float(c.residual),
                Cell::Text(witness.join(";")),
            ]
        })
        .collect();
    match ctx.sink.format {
        OutputFormat::Json => {
            summary["conditions"] = serde_json::to_value(&rep.conditions).expect("serializable");
            ctx.sink.json(&summary)?;
        }
        OutputFormat::Csv => ctx.sink.table(
            &["name", "satisfied", "residual", "witness"],
            rows,
            summary,
            "conditions",
        )?,
    }
    Ok(if rep.passed { 0 } else { 1 })
}

fn cmd_hamiltonian(ctx: &Context) -> CliResult {
    let walk = ctx.cfg.walk_config()?;
    walk.require_mode(JetMode::Time)?;
    let rep = check_time_limit_l(&walk, ctx.cfg.run.l);
    if !rep.passed {
        return Err(Failure::domain(first_failure(&rep)));
    }
    let nu = rep.witness("nu").expect("branch witness on a passing report") as u8;
    let h = time_hamiltonian(&walk, nu)?;
    let rendered = render_sum(
        "Ĥ",
        &h.terms.iter().map(|t| (shift(t.px, t.py), t.coeff)).collect::<Vec<_>>(),
    );
    eprintln!("{rendered}");
    let mut summary = header("hamiltonian");
    summary["nu"] = json!(nu);
    summary["delta_spatial"] = json!(h.delta_spatial);
    summary["rendered"] = json!(rendered);
    let mut cols = vec!["px", "py"];
    cols.extend(MATRIX_COLUMNS);
    let rows = h
        .terms
        .iter()
        .map(|t| {
            let mut r = vec![Cell::Int(t.px), Cell::Int(t.py)];
            r.extend(t.coeff.to_reals().map(Cell::Float));
            r
        })
        .collect();
    match ctx.sink.format {
        OutputFormat::Json => {
            summary["terms"] = serde_json::to_value(&h.terms).expect("serializable");
            ctx.sink.json(&summary)?;
        }
        OutputFormat::Csv => ctx.sink.table(&cols, rows, summary, "terms")?,
    }
    Ok(0)
}

const MATRIX_COLUMNS: [&str; 8] = ["re11", "im11", "re12", "im12", "re21", "im21", "re22", "im22"];

fn cmd_pde(ctx: &Context) -> CliResult {
    let walk = ctx.cfg.walk_config()?;
    walk.require_mode(JetMode::Plastic)?;
    let (a, b) = (walk.a_exp, walk.coin_x.b_exp);
    let rep = check_plastic(&walk, a, b);
    if !rep.passed {
        return Err(Failure::domain(first_failure(&rep)));
    }
    let terms = spacetime_hamiltonian(&walk, a, b)?;
    let mut by_derivative: BTreeMap<(u32, u32), Mat2> = BTreeMap::new();
    for t in &terms {
        *by_derivative.entry((t.dx_power, t.dy_power)).or_insert(Mat2::ZERO) += t.coeff;
    }
    // transport terms first, then the mass term
    let mut grouped: Vec<_> = by_derivative.into_iter().collect();
    grouped.sort_by_key(|((dx, dy), _)| (*dx + *dy == 0, std::cmp::Reverse(*dx), *dy));
    let rendered = render_sum(
        "∂t Ψ",
        &grouped
            .iter()
            .map(|((dx, dy), m)| (derivative(*dx, *dy), *m))
            .collect::<Vec<_>>(),
    );
    eprintln!("{rendered}");
    let mut summary = header("pde");
    summary["a"] = json!(a.to_string());
    summary["b"] = json!(b.to_string());
    summary["rendered"] = json!(rendered);
    let mut cols = vec!["dx_power", "dy_power", "thx_power", "thy_power"];
    cols.extend(MATRIX_COLUMNS);
    let rows = terms
        .iter()
        .map(|t| {
            let mut r: Vec<Cell> = [t.dx_power, t.dy_power, t.thx_power, t.thy_power]
                .map(|p| Cell::Int(p as i64))
                .into();
            r.extend(t.coeff.to_reals().map(Cell::Float));
            r
        })
        .collect();
    match ctx.sink.format {
        OutputFormat::Json => {
            summary["terms"] = serde_json::to_value(&terms).expect("serializable");
            ctx.sink.json(&summary)?;
        }
        OutputFormat::Csv => ctx.sink.table(&cols, rows, summary, "terms")?,
    }
    Ok(0)
}

fn random_field(seed: u64, nx: usize, ny: usize) -> Result<SpinorField, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = || C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let data = (0..nx * ny).map(|_| [c(), c()]).collect();
    Ok(SpinorField::from_vec(nx, ny, data)?.normalized())
}

fn cmd_simulate(ctx: &Context) -> CliResult {
    let walk = ctx.cfg.walk_config()?;
    let (run, lat) = (&ctx.cfg.run, &ctx.cfg.lattice);
    if run.eps.is_nan() || run.eps <= 0.0 {
        return Err(Failure::usage("run.eps must be positive"));
    }
    let mut field = random_field(ctx.cfg.seed, lat.nx, lat.ny)?;
    let n0 = field.norm_sqr();
    let mut rows = vec![vec![Cell::Int(0), Cell::Float(n0), Cell::Float(0.0)]];
    let mut drift: f64 = 0.0;
    for step in 1..=run.steps {
        field = field.step_with(&walk, run.eps, Execution::default())?;
        let n = field.norm_sqr();
        drift = drift.max((n - n0).abs());
        rows.push(vec![Cell::Int(step as i64), Cell::Float(n), Cell::Float(n - n0)]);
    }
    eprintln!("norm drift over {} steps: {drift:.3e}", run.steps);
    let mut summary = header("simulate");
    summary["limit"] = json!(limit_name(&walk));
    summary["seed"] = json!(ctx.cfg.seed);
    summary["nx"] = json!(lat.nx);
    summary["ny"] = json!(lat.ny);
    summary["eps"] = json!(run.eps);
    summary["steps"] = json!(run.steps);
    summary["initial_norm_sqr"] = json!(n0);
    summary["final_norm_sqr"] = json!(field.norm_sqr());
    summary["max_norm_drift"] = json!(drift);
    ctx.sink
        .table(&["step", "norm_sqr", "drift"], rows, summary, "trajectory")?;
    Ok(0)
}

fn convergence(ctx: &Context, walk: &WalkConfig) -> Result<ConvergenceResult, Failure> {
    let run = &ctx.cfg.run;
    let rep = report(ctx, walk);
    if !rep.passed {
        return Err(Failure::domain(first_failure(&rep)));
    }
    Ok(match walk.mode() {
        JetMode::Time => time_convergence(walk, run.t, &KGrid::square(run.grid), &run.eps_list)?,
        JetMode::Plastic => spacetime_convergence(
            walk,
            walk.a_exp,
            walk.coin_x.b_exp,
            run.t,
            &ctx.cfg.momenta(),
            &run.eps_list,
        )?,
    })
}

fn cmd_converge(ctx: &Context) -> CliResult {
    let walk = ctx.cfg.walk_config()?;
    let res = convergence(ctx, &walk)?;
    eprintln!("fitted order {:.4} (r² = {:.6})", res.slope, res.r_squared);
    let mut summary = header("converge");
    summary["limit"] = json!(limit_name(&walk));
    summary["t"] = json!(ctx.cfg.run.t);
    summary["slope"] = json!(res.slope);
    summary["intercept"] = json!(res.intercept);
    summary["r_squared"] = json!(res.r_squared);
    summary["strictly_decreasing"] = json!(res.strictly_decreasing());
    summary["note"] = json!("step count n = round(T/(tau eps)); the time mismatch is O(eps)");
    let rows = res
        .samples
        .iter()
        .map(|&(e, err)| vec![Cell::Float(e), Cell::Float(err)])
        .collect();
    ctx.sink.table(&["eps", "error"], rows, summary, "samples")?;
    Ok(0)
}

fn cmd_dispersion(ctx: &Context) -> CliResult {
    let walk = ctx.cfg.walk_config()?;
    let (run, lat) = (&ctx.cfg.run, &ctx.cfg.lattice);
    let points = dispersion(&walk, run.eps, &KGrid::new(lat.nx, lat.ny))?;
    let mut summary = header("dispersion");
    summary["limit"] = json!(limit_name(&walk));
    summary["eps"] = json!(run.eps);
    summary["nx"] = json!(lat.nx);
    summary["ny"] = json!(lat.ny);
    let rows = points
        .iter()
        .map(|p| [p.kx, p.ky, p.phase1, p.phase2].map(Cell::Float).into())
        .collect();
    ctx.sink
        .table(&["kx", "ky", "phase1", "phase2"], rows, summary, "points")?;
    Ok(0)
}

fn cmd_terms(ctx: &Context) -> CliResult {
    let (a, b) = (ctx.cfg.walk.a, ctx.cfg.walk.b);
    if a.is_zero() {
        return Err(Error::TimeScaling.into());
    }
    let terms = enumerate_terms(a, b);
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for t in &terms {
        *counts.entry(t.group().label()).or_default() += 1;
    }
    eprintln!("{} terms for a = {a}, b = {b}", terms.len());
    let mut summary = header("terms");
    summary["a"] = json!(a.to_string());
    summary["b"] = json!(b.to_string());
    summary["count"] = json!(terms.len());
    summary["groups"] = json!(counts);
    let cols = [
        "l1x",
        "l1y",
        "l2x",
        "l2y",
        "n1x",
        "n1y",
        "n2x",
        "n2y",
        "dx_power",
        "dy_power",
        "thx_power",
        "thy_power",
        "group",
    ];
    let rows = terms
        .iter()
        .map(|t| {
            let mut r: Vec<Cell> = t.to_array().map(|v| Cell::Int(v as i64)).into();
            r.extend([t.dx_power(), t.dy_power(), t.thx_power(), t.thy_power()].map(|v| Cell::Int(v as i64)));
            r.push(Cell::Text(t.group().label().to_string()));
            r
        })
        .collect();
    ctx.sink.table(&cols, rows, summary, "terms")?;
    Ok(0)
}
