//! Command dispatch: argument types, per-command drivers, exit codes.
//!
//! Exit codes: 0 success, 1 an embedded reference comparison exceeded its
//! tolerance (`reproduce table2`/`table3`), 2 validation or usage error
//! (the error name is printed to stderr), 3 unwritable output.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use renq::approx::{
    approx_measures, approx_measures_three_stage, approx_subchain_summary,
    approx_three_stage_summary, capacity_rule_n1, capacity_rule_theta1, normal_params,
    ApproxError,
};
use renq::exact::{exact_measures, exact_subchain_summary, Route};
use renq::model::{Capacity, ModelError, ModelParams, ThreeStageParams};
use renq::oracle::{oracle_measures, oracle_measures_three_stage, simulate, OracleError};

use crate::output::{Row, SummaryCols, TableWriter, Value};
use crate::tables::{
    self, print_deviation, FigureGrid, Measure, PrintedCell, PRINT_TOLERANCE_ULPS,
};

const ABOUT: &str = "Performance measures for a multi-server queue whose waiting \
customers renege at a position-dependent rate: exact formulas, a normal \
approximation, and two independent cross-checking oracles.";

#[derive(Parser, Debug)]
#[command(name = "renq", version, about = ABOUT)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Emit NDJSON (one object per row) instead of CSV
    #[arg(long, global = true)]
    pub json: bool,

    /// Write rows to PATH instead of standard output
    #[arg(long, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,

    /// Worker threads for grids and replications
    /// [default: $RENQ_THREADS or all cores]
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate the measures at a single parameter point
    Measures(MeasuresArgs),
    /// Evaluate the measures over a one- or two-axis parameter grid
    Sweep(SweepArgs),
    /// Regenerate an embedded dataset; tables self-check against their
    /// published values
    Reproduce(ReproduceArgs),
    /// Size the first stage (capacity or patience rate) for a
    /// service-quality target
    Rule(RuleArgs),
    /// Monte-Carlo estimates with 95% confidence intervals
    Simulate(SimulateArgs),
}

/// The queue parameters shared by most subcommands.
#[derive(Args, Debug, Clone)]
pub struct ModelCli {
    /// Arrival rate λ
    #[arg(long)]
    pub lambda: f64,
    /// Per-server service rate μ
    #[arg(long)]
    pub mu: f64,
    /// Number of servers
    #[arg(long)]
    pub s: u32,
    /// First-stage waiting capacity (non-negative integer or `inf`)
    #[arg(long)]
    pub n1: Capacity,
    /// Second-stage waiting capacity (non-negative integer or `inf`)
    #[arg(long)]
    pub n2: Capacity,
    /// First-stage reneging rate θ₁
    #[arg(long)]
    pub theta1: f64,
    /// Second-stage reneging rate θ₂
    #[arg(long)]
    pub theta2: f64,
}

impl ModelCli {
    fn to_params(&self) -> Result<ModelParams, CliError> {
        ModelParams::new(
            self.lambda, self.mu, self.s, self.n1, self.n2, self.theta1, self.theta2,
        )
        .map_err(model_error)
    }
}

/// Simulation configuration (used only by the `oracle-sim` route).
#[derive(Args, Debug, Clone)]
pub struct SimCli {
    /// Transient period discarded from every replication
    #[arg(long, default_value_t = 100.0)]
    pub warmup: f64,
    /// End time of every replication (measurement spans warmup..horizon)
    #[arg(long, default_value_t = 1100.0)]
    pub horizon: f64,
    /// Base RNG seed; replication i uses stream (seed, i)
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Independent replications
    #[arg(long, default_value_t = 30)]
    pub replications: u32,
}

#[derive(Args, Debug)]
pub struct MeasuresArgs {
    #[command(flatten)]
    pub model: ModelCli,
    /// Third-stage capacity: switches to the three-stage model
    /// (requires --theta3; only approx and oracle-linear apply)
    #[arg(long, requires = "theta3")]
    pub n3: Option<Capacity>,
    /// Third-stage reneging rate θ₃
    #[arg(long, requires = "n3")]
    pub theta3: Option<f64>,
    /// Comma-separated routes: exact, approx, oracle-linear, oracle-sim
    #[arg(long, value_delimiter = ',', default_value = "exact,approx")]
    pub routes: Vec<RouteArg>,
    #[command(flatten)]
    pub sim: SimCli,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub model: ModelCli,
    /// Outer axis, e.g. `theta1=0.2,2,20` (parameters: lambda, mu, s,
    /// n1, n2, theta1, theta2)
    #[arg(long)]
    pub axis1: AxisSpec,
    /// Optional inner axis, e.g. `s=20,30,40,50,60,70`
    #[arg(long)]
    pub axis2: Option<AxisSpec>,
    /// Comma-separated routes: exact, approx, oracle-linear, oracle-sim
    #[arg(long, value_delimiter = ',', default_value = "exact,approx")]
    pub routes: Vec<RouteArg>,
    #[command(flatten)]
    pub sim: SimCli,
}

#[derive(Args, Debug)]
pub struct ReproduceArgs {
    /// Dataset to regenerate
    #[arg(value_enum)]
    pub dataset: Dataset,
}

#[derive(Args, Debug)]
#[command(group(
    ArgGroup::new("target").required(true).args(["theta1", "n1"])
))]
pub struct RuleArgs {
    /// Arrival rate λ (must exceed sμ)
    #[arg(long)]
    pub lambda: f64,
    /// Per-server service rate μ
    #[arg(long)]
    pub mu: f64,
    /// Number of servers
    #[arg(long)]
    pub s: u32,
    /// Fix θ₁ and recommend the minimal first-stage capacity n1
    #[arg(long)]
    pub theta1: Option<f64>,
    /// Fix n1 and recommend the minimal patience rate θ₁
    #[arg(long)]
    pub n1: Option<u32>,
    /// Service-quality target: require c₁⁺ ≥ z
    #[arg(long, default_value_t = 1.0)]
    pub z: f64,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelCli,
    #[command(flatten)]
    pub sim: SimCli,
}

#[derive(Copy, Clone, PartialEq, Eq, Debug, ValueEnum)]
pub enum RouteArg {
    Exact,
    Approx,
    OracleLinear,
    OracleSim,
}

impl RouteArg {
    fn route(self) -> Route {
        match self {
            RouteArg::Exact => Route::Exact,
            RouteArg::Approx => Route::Approx,
            RouteArg::OracleLinear => Route::OracleLinear,
            RouteArg::OracleSim => Route::OracleSim,
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, Debug, ValueEnum)]
pub enum Dataset {
    #[value(name = "table2")]
    Table2,
    #[value(name = "table3")]
    Table3,
    #[value(name = "fig3")]
    Fig3,
    #[value(name = "fig4")]
    Fig4,
    #[value(name = "fig5")]
    Fig5,
    #[value(name = "fig6")]
    Fig6,
    #[value(name = "fig7")]
    Fig7,
}

/// A sweep axis: one varying parameter and its value list.
#[derive(Debug, Clone)]
pub struct AxisSpec {
    pub param: AxisParam,
    pub values: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisParam {
    Lambda,
    Mu,
    S,
    N1,
    N2,
    Theta1,
    Theta2,
}

impl AxisParam {
    fn name(self) -> &'static str {
        match self {
            AxisParam::Lambda => "lambda",
            AxisParam::Mu => "mu",
            AxisParam::S => "s",
            AxisParam::N1 => "n1",
            AxisParam::N2 => "n2",
            AxisParam::Theta1 => "theta1",
            AxisParam::Theta2 => "theta2",
        }
    }
}

impl FromStr for AxisSpec {
    type Err = String;

    fn from_str(text: &str) -> Result<Self, String> {
        let (name, rest) = text
            .split_once('=')
            .ok_or_else(|| format!("expected NAME=V1,V2,..., got `{text}`"))?;
        let param = match name.trim() {
            "lambda" => AxisParam::Lambda,
            "mu" => AxisParam::Mu,
            "s" => AxisParam::S,
            "n1" => AxisParam::N1,
            "n2" => AxisParam::N2,
            "theta1" => AxisParam::Theta1,
            "theta2" => AxisParam::Theta2,
            other => {
                return Err(format!(
                    "unknown axis parameter `{other}` (expected lambda, mu, s, n1, n2, theta1 or theta2)"
                ))
            }
        };
        let values: Vec<String> = rest
            .split(',')
            .map(|v| v.trim().to_string())
            .filter(|v| !v.is_empty())
            .collect();
        if values.is_empty() {
            return Err(format!("axis `{name}` has no values"));
        }
        Ok(AxisSpec { param, values })
    }
}

/// Internal error carrying the process exit code semantics.
#[derive(Debug)]
pub enum CliError {
    /// Exit code 2: invalid parameters or configuration.
    Validation(String),
    /// Exit code 3: the output sink cannot be written.
    Unwritable(String),
}

fn model_error(e: ModelError) -> CliError {
    let name = match &e {
        ModelError::NonPositiveRate { .. } => "NonPositiveRate",
        ModelError::InvalidServerCount => "InvalidServerCount",
        ModelError::InvalidCapacity { .. } => "InvalidCapacity",
        ModelError::InfiniteFirstStageWithSecond => "InfiniteFirstStageWithSecond",
        ModelError::CapacityNotFinite => "CapacityNotFinite",
    };
    CliError::Validation(format!("{name}: {e}"))
}

fn oracle_error(e: OracleError) -> CliError {
    let name = match &e {
        OracleError::TooLarge { .. } => "TooLarge",
        OracleError::CapacityNotFinite => "CapacityNotFinite",
        OracleError::MethodDisagreement { .. } => "MethodDisagreement",
        OracleError::InvalidHorizon { .. } => "InvalidHorizon",
        OracleError::ZeroReplications { .. } => "ZeroReplications",
    };
    CliError::Validation(format!("{name}: {e}"))
}

fn approx_error(e: ApproxError) -> CliError {
    let name = match &e {
        ApproxError::NotHeavyTraffic { .. } => "NotHeavyTraffic",
        ApproxError::NonPositiveZ { .. } => "NonPositiveZ",
        ApproxError::NoFeasibleTheta => "NoFeasibleTheta",
    };
    CliError::Validation(format!("{name}: {e}"))
}

fn io_error(e: io::Error) -> CliError {
    CliError::Unwritable(format!("cannot write output: {e}"))
}

pub fn main_entry() -> ExitCode {
    let cli = Cli::parse();
    configure_threads(cli.threads);
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Unwritable(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

/// Install the requested thread count (flag, else `RENQ_THREADS`) as the
/// global worker-pool size.  Without either, the pool sizes itself.
fn configure_threads(flag: Option<usize>) {
    let n = flag.or_else(|| {
        std::env::var("RENQ_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = n.filter(|&n| n > 0) {
        // Fails only if a pool already exists (e.g. repeated calls in
        // tests); the existing pool then stays in effect.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

fn open_sink(path: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    match path {
        None => Ok(Box::new(io::stdout())),
        Some(p) => {
            let file = File::create(p).map_err(|e| {
                CliError::Unwritable(format!("cannot create {}: {e}", p.display()))
            })?;
            Ok(Box::new(BufWriter::new(file)))
        }
    }
}

/// Dispatch; the returned integer is the process exit code.
pub fn run(cli: &Cli) -> Result<u8, CliError> {
    let mut sink = open_sink(&cli.output)?;
    let code = match &cli.command {
        Command::Measures(args) => cmd_measures(args, cli.json, &mut sink)?,
        Command::Sweep(args) => cmd_sweep(args, cli.json, &mut sink)?,
        Command::Reproduce(args) => cmd_reproduce(args, cli.json, &mut sink)?,
        Command::Rule(args) => cmd_rule(args, cli.json, &mut sink)?,
        Command::Simulate(args) => cmd_simulate(args, cli.json, &mut sink)?,
    };
    sink.flush().map_err(io_error)?;
    Ok(code)
}

/// Evaluate one two-stage parameter point on one route.
fn eval_route(params: &ModelParams, route: RouteArg, sim: &SimCli) -> Result<Row, CliError> {
    let mut row = Row {
        lambda: params.lambda,
        mu: params.mu,
        s: params.s,
        n1: params.n1,
        n2: params.n2,
        theta1: params.theta1,
        theta2: params.theta2,
        n3: None,
        theta3: None,
        route: route.route(),
        measures: renq::exact::Measures {
            pi_s: 0.0,
            p_q: 0.0,
            p_a: 0.0,
            l: 0.0,
            pi_block: 0.0,
        },
        summary: None,
        ci: None,
    };
    match route {
        RouteArg::Exact => {
            let sc = exact_subchain_summary(params);
            row.measures = renq::exact::measures_from_summary(params, &sc);
            row.summary = Some(SummaryCols {
                h: sc.inv_pi_s0,
                h1: sc.h1,
                h2: sc.h2,
                r1: sc.r1,
                r2: sc.r2,
                h3: None,
            });
        }
        RouteArg::Approx => {
            let sc = approx_subchain_summary(params);
            row.measures = renq::exact::measures_from_summary(params, &sc);
            row.summary = Some(SummaryCols {
                h: sc.inv_pi_s0,
                h1: sc.h1,
                h2: sc.h2,
                r1: sc.r1,
                r2: sc.r2,
                h3: None,
            });
        }
        RouteArg::OracleLinear => {
            row.measures = oracle_measures(params).map_err(oracle_error)?;
        }
        RouteArg::OracleSim => {
            let est = simulate(params, sim.warmup, sim.horizon, sim.seed, sim.replications)
                .map_err(oracle_error)?;
            row.measures = est.measures;
            row.ci = Some((est.half_widths.p_q, est.half_widths.p_a, est.half_widths.l));
        }
    }
    Ok(row)
}

/// Evaluate one three-stage point; only the approximation and the linear
/// oracle extend to the third stage.
fn eval_route_three_stage(
    t: &ThreeStageParams,
    route: RouteArg,
    base: &Row,
) -> Result<Row, CliError> {
    let mut row = base.clone();
    row.route = route.route();
    match route {
        RouteArg::Approx => {
            let sc = approx_three_stage_summary(t);
            row.measures = approx_measures_three_stage(t);
            row.summary = Some(SummaryCols {
                h: sc.h,
                h1: sc.h1,
                h2: sc.h2,
                r1: sc.r1,
                r2: sc.r2,
                h3: Some(sc.h3),
            });
        }
        RouteArg::OracleLinear => {
            row.measures = oracle_measures_three_stage(t).map_err(oracle_error)?;
        }
        RouteArg::Exact | RouteArg::OracleSim => {
            return Err(CliError::Validation(format!(
                "UnsupportedRoute: route `{}` handles two stages only; \
                 use approx or oracle-linear with --n3/--theta3",
                route.route()
            )));
        }
    }
    Ok(row)
}

fn cmd_measures(args: &MeasuresArgs, json: bool, sink: &mut dyn Write) -> Result<u8, CliError> {
    if args.n3.is_some() {
        let n3 = args.n3.expect("clap guarantees the pair");
        let theta3 = args.theta3.expect("clap guarantees the pair");
        let m = &args.model;
        let t = ThreeStageParams::new(
            m.lambda, m.mu, m.s, m.n1, m.n2, n3, m.theta1, m.theta2, theta3,
        )
        .map_err(model_error)?;
        let base = Row {
            lambda: t.lambda,
            mu: t.mu,
            s: t.s,
            n1: t.n1,
            n2: t.n2,
            theta1: t.theta1,
            theta2: t.theta2,
            n3: Some(t.n3),
            theta3: Some(t.theta3),
            route: Route::Approx,
            measures: renq::exact::Measures {
                pi_s: 0.0,
                p_q: 0.0,
                p_a: 0.0,
                l: 0.0,
                pi_block: 0.0,
            },
            summary: None,
            ci: None,
        };
        let mut writer = TableWriter::new(sink, json, true);
        for route in &args.routes {
            let row = eval_route_three_stage(&t, *route, &base)?;
            writer.emit(&row).map_err(io_error)?;
        }
        return Ok(0);
    }

    let params = args.model.to_params()?;
    let mut writer = TableWriter::new(sink, json, false);
    for route in &args.routes {
        let row = eval_route(&params, *route, &args.sim)?;
        writer.emit(&row).map_err(io_error)?;
    }
    Ok(0)
}

/// Build the model at one grid point by overriding the base parameters
/// with axis values.
fn grid_point(
    base: &ModelCli,
    overrides: &[(AxisParam, &str)],
) -> Result<ModelParams, CliError> {
    let mut m = base.clone();
    for (param, text) in overrides {
        let bad = |what: &str| {
            CliError::Validation(format!(
                "InvalidAxisValue: `{text}` is not a valid {what} for axis `{}`",
                param.name()
            ))
        };
        match param {
            AxisParam::Lambda => m.lambda = text.parse().map_err(|_| bad("rate"))?,
            AxisParam::Mu => m.mu = text.parse().map_err(|_| bad("rate"))?,
            AxisParam::S => m.s = text.parse().map_err(|_| bad("server count"))?,
            AxisParam::N1 => m.n1 = text.parse().map_err(|_| bad("capacity"))?,
            AxisParam::N2 => m.n2 = text.parse().map_err(|_| bad("capacity"))?,
            AxisParam::Theta1 => m.theta1 = text.parse().map_err(|_| bad("rate"))?,
            AxisParam::Theta2 => m.theta2 = text.parse().map_err(|_| bad("rate"))?,
        }
    }
    m.to_params()
}

fn cmd_sweep(args: &SweepArgs, json: bool, sink: &mut dyn Write) -> Result<u8, CliError> {
    if let Some(axis2) = &args.axis2 {
        if axis2.param == args.axis1.param {
            return Err(CliError::Validation(format!(
                "DuplicateAxis: both axes vary `{}`",
                axis2.param.name()
            )));
        }
    }

    // Materialize and validate every grid point up front: an invalid
    // point anywhere fails the whole sweep before any output is written.
    let mut points = Vec::new();
    for v1 in &args.axis1.values {
        match &args.axis2 {
            Some(axis2) => {
                for v2 in &axis2.values {
                    points.push(grid_point(
                        &args.model,
                        &[(args.axis1.param, v1), (axis2.param, v2)],
                    )?);
                }
            }
            None => points.push(grid_point(&args.model, &[(args.axis1.param, v1)])?),
        }
    }

    emit_grid(&points, &args.routes, &args.sim, json, sink)?;
    Ok(0)
}

/// Evaluate a grid in parallel and emit rows in deterministic order
/// (grid order outer, route order inner).
fn emit_grid(
    points: &[ModelParams],
    routes: &[RouteArg],
    sim: &SimCli,
    json: bool,
    sink: &mut dyn Write,
) -> Result<(), CliError> {
    let evaluated: Result<Vec<Vec<Row>>, CliError> = points
        .par_iter()
        .map(|p| {
            routes
                .iter()
                .map(|route| eval_route(p, *route, sim))
                .collect()
        })
        .collect();
    let mut writer = TableWriter::new(sink, json, false);
    for rows in evaluated? {
        for row in rows {
            writer.emit(&row).map_err(io_error)?;
        }
    }
    Ok(())
}

fn cmd_reproduce(args: &ReproduceArgs, json: bool, sink: &mut dyn Write) -> Result<u8, CliError> {
    match args.dataset {
        Dataset::Table2 => reproduce_table(
            "table2",
            "theta1",
            &tables::table2_printed(),
            tables::table2_params,
            json,
            sink,
        ),
        Dataset::Table3 => reproduce_table(
            "table3",
            "theta2",
            &tables::table3_printed(),
            tables::table3_params,
            json,
            sink,
        ),
        Dataset::Fig3 => reproduce_figure(tables::fig3(), json, sink),
        Dataset::Fig4 => reproduce_figure(tables::fig4(), json, sink),
        Dataset::Fig5 => reproduce_figure(tables::fig5(), json, sink),
        Dataset::Fig6 => reproduce_figure(tables::fig6(), json, sink),
        Dataset::Fig7 => reproduce_figure(tables::fig7(), json, sink),
    }
}

const TABLE2_COLUMNS: [&str; 10] = [
    "measure",
    "theta1",
    "s",
    "exact",
    "approx",
    "abs_error",
    "rel_error",
    "printed_abs",
    "deviation_print_ulps",
    "within_print_precision",
];
const TABLE3_COLUMNS: [&str; 10] = [
    "measure",
    "theta2",
    "s",
    "exact",
    "approx",
    "abs_error",
    "rel_error",
    "printed_abs",
    "deviation_print_ulps",
    "within_print_precision",
];

fn pick(m: Measure, measures: &renq::exact::Measures) -> f64 {
    match m {
        Measure::PQ => measures.p_q,
        Measure::PA => measures.p_a,
        Measure::L => measures.l,
    }
}

/// Recompute a reference error table cell by cell and compare each
/// `exact − approx` against the published three-significant-figure value.
/// The CSV carries the comparison; a one-line verdict goes to stderr.
fn reproduce_table(
    name: &str,
    theta_col: &'static str,
    cells: &[PrintedCell],
    params_at: fn(f64, u32) -> ModelParams,
    json: bool,
    sink: &mut dyn Write,
) -> Result<u8, CliError> {
    let columns: &'static [&'static str] = if theta_col == "theta1" {
        &TABLE2_COLUMNS
    } else {
        &TABLE3_COLUMNS
    };
    let mut writer = NamedRows::new(sink, json, columns);

    let mut mismatches: Vec<String> = Vec::new();
    let mut max_dev = 0.0_f64;
    for cell in cells {
        let params = params_at(cell.theta, cell.s);
        let exact = pick(cell.measure, &exact_measures(&params));
        let approx = pick(cell.measure, &approx_measures(&params));
        let abs = exact - approx;
        let rel = abs / exact;
        let dev = print_deviation(abs, cell.printed_abs);
        let within = dev <= PRINT_TOLERANCE_ULPS;
        if dev > max_dev {
            max_dev = dev;
        }
        if !within {
            mismatches.push(format!(
                "{} {theta_col}={} s={}: computed {:.6e}, printed {:.2e} ({:.2} print-ulp)",
                cell.measure.label(),
                cell.theta,
                cell.s,
                abs,
                cell.printed_abs,
                dev
            ));
        }
        writer.emit(&[
            Value::Text(cell.measure.label()),
            Value::Float(cell.theta),
            Value::Int(u64::from(cell.s)),
            Value::Float(exact),
            Value::Float(approx),
            Value::Float(abs),
            Value::Float(rel),
            Value::Float(cell.printed_abs),
            Value::Float(dev),
            Value::Bool(within),
        ])?;
    }

    let total = cells.len();
    let ok = total - mismatches.len();
    eprintln!(
        "{name}: {ok}/{total} cells within print precision \
         (max deviation {max_dev:.2} print-ulp, tolerance {PRINT_TOLERANCE_ULPS})"
    );
    for line in &mismatches {
        eprintln!("{name}: mismatch: {line}");
    }
    Ok(if mismatches.is_empty() { 0 } else { 1 })
}

/// Figures carry no printed numbers, so their datasets are emitted
/// without comparison, on the standard row schema (exact and approx
/// routes per grid point).
fn reproduce_figure(grid: FigureGrid, json: bool, sink: &mut dyn Write) -> Result<u8, CliError> {
    let routes = [RouteArg::Exact, RouteArg::Approx];
    let sim = SimCli {
        warmup: 100.0,
        horizon: 1100.0,
        seed: 1,
        replications: 30,
    };
    emit_grid(&grid.points, &routes, &sim, json, sink)?;
    Ok(0)
}

const RULE_COLUMNS: [&str; 8] = [
    "recommended", "value", "bound", "z", "c1_plus", "p_q", "p_a", "l",
];

fn cmd_rule(args: &RuleArgs, json: bool, sink: &mut dyn Write) -> Result<u8, CliError> {
    let (label, n1, theta1, bound) = match (args.theta1, args.n1) {
        (Some(theta1), None) => {
            let n1 = capacity_rule_n1(args.lambda, args.mu, args.s, theta1, args.z)
                .map_err(approx_error)?;
            let bound = (args.z * (args.lambda * theta1).sqrt() + args.lambda
                - f64::from(args.s) * args.mu)
                / theta1;
            ("n1", n1, theta1, Some(bound))
        }
        (None, Some(n1)) => {
            let theta1 = capacity_rule_theta1(args.lambda, args.mu, args.s, n1, args.z)
                .map_err(approx_error)?;
            ("theta1", n1, theta1, None)
        }
        // clap's ArgGroup guarantees exactly one of the two.
        _ => unreachable!("argument group enforces one target"),
    };

    // Measures at the recommendation: the sized first stage standing
    // alone (n2 = 0; θ₂ is then immaterial and set to θ₁).
    let params = ModelParams::new(
        args.lambda,
        args.mu,
        args.s,
        Capacity::Finite(n1),
        Capacity::Finite(0),
        theta1,
        theta1,
    )
    .map_err(model_error)?;
    let achieved = normal_params(&params).c1_plus;
    let m = approx_measures(&params);

    let mut writer = NamedRows::new(sink, json, &RULE_COLUMNS);
    writer.emit(&[
        Value::Text(label),
        if label == "n1" {
            Value::Int(u64::from(n1))
        } else {
            Value::Float(theta1)
        },
        bound.map_or(Value::Empty, Value::Float),
        Value::Float(args.z),
        Value::Float(achieved),
        Value::Float(m.p_q),
        Value::Float(m.p_a),
        Value::Float(m.l),
    ])?;
    Ok(0)
}

fn cmd_simulate(args: &SimulateArgs, json: bool, sink: &mut dyn Write) -> Result<u8, CliError> {
    let params = args.model.to_params()?;
    let row = eval_route(&params, RouteArg::OracleSim, &args.sim)?;
    TableWriter::new(sink, json, false)
        .emit(&row)
        .map_err(io_error)?;
    Ok(0)
}

/// Thin adapter: [`crate::output::NamedWriter`] with `CliError` plumbing.
struct NamedRows<'w> {
    inner: crate::output::NamedWriter<'w>,
}

impl<'w> NamedRows<'w> {
    fn new(sink: &'w mut dyn Write, json: bool, columns: &'static [&'static str]) -> Self {
        NamedRows {
            inner: crate::output::NamedWriter::new(sink, json, columns),
        }
    }

    fn emit(&mut self, values: &[Value]) -> Result<(), CliError> {
        self.inner.emit(values).map_err(io_error)
    }
}

