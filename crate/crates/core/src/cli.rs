//! Command-line front end.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::evaluator::{check_bounds, evaluate_plan, BoundVerdicts, EvalReport};
use crate::planner::{plan, Algorithm, CommandPlan, PlanOutcome, PlanParams};
use crate::roadmap::Scenario;
use crate::stats::{convexity_check, guideline_csv, guideline_table, selection_bias_demo, BoundKind};

#[derive(Debug, Parser)]
#[command(name = "irisuu", version, about = "Inspection planning under execution uncertainty")]
pub struct Cli {
    /// Worker threads for sample simulation (default: all cores)
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Plan a command path and write it with its bound certificate
    Plan(PlanArgs),
    /// Execute a plan with fresh Monte-Carlo samples and check its bounds
    Evaluate(EvaluateArgs),
    /// Tabulate Clopper-Pearson bounds over sample counts and levels as CSV
    Bounds(BoundsArgs),
    /// False-negative probabilities when picking among many candidate paths
    DemoBias(DemoBiasArgs),
    /// Check that the coverage lower bound is increasing and convex in the estimate
    Convexity(ConvexityArgs),
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    /// Scenario file (JSON)
    #[arg(long, value_name = "FILE")]
    pub scenario: PathBuf,
    /// Planner: irisuu (Monte-Carlo), iris (one deterministic sample), lum (penalized costs)
    #[arg(long, value_enum, default_value_t = Algorithm::Irisuu)]
    pub algo: Algorithm,
    /// Monte-Carlo samples (count; ignored by iris and lum)
    #[arg(long, default_value_t = 100)]
    pub m: usize,
    /// Required coverage fraction κ in (0, 1]
    #[arg(long, default_value_t = 0.99)]
    pub kappa: f64,
    /// Length slack ε >= 0 (dimensionless)
    #[arg(long, default_value_t = 3.0)]
    pub eps: f64,
    /// Collision-probability threshold in [0, 1]; 0 prunes any estimated collision
    #[arg(long, default_value_t = 0.0)]
    pub rho_coll: f64,
    /// Certificate significance α in (0, 1); confidence level is 1 - α
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Penalty weight λ for lum, per meter of localization σ
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// Seed for the planning samples
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Maximum generated search nodes (count)
    #[arg(long, default_value_t = 1_000_000)]
    pub node_budget: usize,
    /// Output plan file (JSON); stdout when omitted
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Scenario file (JSON); its model drives the executions
    #[arg(long, value_name = "FILE")]
    pub scenario: PathBuf,
    /// Plan file written by `plan`
    #[arg(long, value_name = "FILE")]
    pub plan: PathBuf,
    /// Number of simulated executions (count)
    #[arg(long, default_value_t = 10_000)]
    pub n_exec: usize,
    /// Seed for the execution samples
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output report file (JSON); stdout when omitted
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Per-execution CSV (index, seen_count, collided, length in meters)
    #[arg(long, value_name = "FILE")]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    /// Lower bound p̂⁻ at coverage level κ
    Coverage,
    /// Upper bound p̂⁺ at collision level ρ
    Collision,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    /// Sample counts: N, or LO..HI, or LO..HI:STEP (inclusive, default step 1)
    #[arg(long, default_value = "10..400")]
    pub m: String,
    /// Estimate levels in [0, 1]: X, or LO..HI, or LO..HI:STEP (default step 0.01)
    #[arg(long, default_value = "0.8..1.0")]
    pub level: String,
    /// Significance α in (0, 1)
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Output CSV (columns m, level, bound); stdout when omitted
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DemoBiasArgs {
    /// True inspection probability of the POI in [0, 1]
    #[arg(long)]
    pub p: f64,
    /// Monte-Carlo samples per path (count)
    #[arg(long)]
    pub m: usize,
    /// Candidate paths (count)
    #[arg(long)]
    pub k: usize,
}

#[derive(Debug, Args)]
pub struct ConvexityArgs {
    /// Monte-Carlo samples (count)
    #[arg(long)]
    pub m: usize,
    /// Significance α in (0, 1)
    #[arg(long)]
    pub alpha: f64,
    /// Interior grid points on (0, 1) (count, at least 3)
    #[arg(long, default_value_t = 999)]
    pub grid: usize,
}

/// Exit status for a completed command.
enum Status {
    Ok,
    NoResult,
}

/// Parses `argv` and runs the subcommand. Returns 0 on success, 1 when no plan was
/// found (or an assumption check failed), 2 on usage or configuration errors.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start thread pool: {e}");
            return 2;
        }
    };
    match pool.install(|| dispatch(cli.command)) {
        Ok(Status::Ok) => 0,
        Ok(Status::NoResult) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn dispatch(cmd: Command) -> Result<Status> {
    match cmd {
        Command::Plan(a) => run_plan(a),
        Command::Evaluate(a) => run_evaluate(a),
        Command::Bounds(a) => run_bounds(a),
        Command::DemoBias(a) => {
            let r = selection_bias_demo(a.p, a.m, a.k)?;
            println!("per-path false-negative probability: {:.6}", r.per_path);
            println!("any-of-{} false-negative probability: {:.6}", a.k, r.any_of_k);
            Ok(Status::Ok)
        }
        Command::Convexity(a) => {
            let r = convexity_check(a.m, a.alpha, a.grid)?;
            println!(
                "m={} alpha={} grid={} min first difference={:e} min second difference={:e}",
                r.m, r.alpha, r.grid_size, r.min_first_diff, r.min_second_diff
            );
            for v in &r.violations {
                println!("violation: order {} difference {:e} at x={}", v.order, v.value, v.x);
            }
            if r.holds() {
                println!("increasing and strictly convex on the grid");
                Ok(Status::Ok)
            } else {
                Ok(Status::NoResult)
            }
        }
    }
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run_plan(a: PlanArgs) -> Result<Status> {
    let params = PlanParams {
        algorithm: a.algo,
        m: a.m,
        kappa: a.kappa,
        eps: a.eps,
        rho_coll: a.rho_coll,
        alpha: a.alpha,
        lambda: a.lambda,
        seed: a.seed,
        node_budget: a.node_budget,
    };
    params.validate()?;
    let scenario = Scenario::load(&a.scenario)?;
    match plan(&scenario, &params)? {
        PlanOutcome::Found(p) => {
            let c = &p.certificate;
            eprintln!(
                "path of {} vertices; coverage {:.4} of {} POIs; length {:.3} m; collision estimate {:.4}",
                p.path.len(),
                p.coverage,
                p.ap_ipv.len(),
                p.length,
                p.coll
            );
            eprintln!(
                "certificate at {:.0}% confidence: coverage >= {:.4} POIs, collision <= {:.4}, length in [{:.3}, {:.3}] m",
                100.0 * (1.0 - c.alpha),
                c.coverage_lower,
                c.collision_upper,
                c.length_lower,
                c.length_upper
            );
            if c.guideline_only {
                eprintln!("note: bounds are a guideline only (selection bias over the search)");
            }
            write_or_print(a.out.as_deref(), &format!("{}\n", p.to_json()))?;
            Ok(Status::Ok)
        }
        PlanOutcome::NoSolution(s) => {
            eprintln!("no solution: search exhausted after {} expansions", s.expanded);
            Ok(Status::NoResult)
        }
        PlanOutcome::BudgetExceeded(s) => {
            eprintln!("node budget exceeded after {} generated nodes", s.generated);
            Ok(Status::NoResult)
        }
    }
}

#[derive(Serialize)]
struct EvaluateOutput<'a> {
    report: &'a EvalReport,
    verdicts: &'a BoundVerdicts,
}

fn run_evaluate(a: EvaluateArgs) -> Result<Status> {
    let scenario = Scenario::load(&a.scenario)?;
    let plan = CommandPlan::load(&a.plan)?;
    let report = evaluate_plan(&scenario, &plan, a.n_exec, a.seed)?;
    let verdicts = check_bounds(&report, &plan.certificate);
    eprintln!(
        "{} executions: coverage {:.4} ({:.2}%), collision rate {:.4}, length {:.3} ± {:.3} m",
        report.n_exec,
        report.coverage_mean,
        100.0 * report.coverage_fraction,
        report.collision_rate,
        report.length_mean,
        report.length_std
    );
    for (name, v) in [("coverage", verdicts.coverage), ("collision", verdicts.collision), ("length", verdicts.length)] {
        eprintln!("{name} bound: {} (margin {:.4})", if v.holds { "holds" } else { "violated" }, v.margin);
    }
    for n in &verdicts.notes {
        eprintln!("note: {n}");
    }
    let out = EvaluateOutput {
        report: &report,
        verdicts: &verdicts,
    };
    write_or_print(a.out.as_deref(), &format!("{}\n", serde_json::to_string_pretty(&out)?))?;
    if let Some(csv) = &a.csv {
        std::fs::write(csv, report.traces_csv())?;
    }
    Ok(Status::Ok)
}

fn run_bounds(a: BoundsArgs) -> Result<Status> {
    let ms: Vec<usize> = parse_grid(&a.m, 1.0)?
        .into_iter()
        .map(|x| {
            if x >= 1.0 && x.fract() == 0.0 {
                Ok(x as usize)
            } else {
                Err(Error::arg(format!("--m values must be positive integers, got {x}")))
            }
        })
        .collect::<Result<_>>()?;
    let levels = parse_grid(&a.level, 0.01)?;
    let kind = match a.kind {
        KindArg::Coverage => BoundKind::Coverage,
        KindArg::Collision => BoundKind::Collision,
    };
    let rows = guideline_table(&ms, &levels, a.alpha, kind)?;
    write_or_print(a.out.as_deref(), &guideline_csv(&rows))?;
    Ok(Status::Ok)
}

/// Parses `X`, `LO..HI`, or `LO..HI:STEP` into an inclusive grid.
pub fn parse_grid(spec: &str, default_step: f64) -> Result<Vec<f64>> {
    let bad = || Error::arg(format!("cannot parse grid `{spec}`; expected X, LO..HI, or LO..HI:STEP"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let Some((lo, rest)) = spec.split_once("..") else {
        return Ok(vec![num(spec)?]);
    };
    let (hi, step) = match rest.split_once(':') {
        Some((hi, step)) => (num(hi)?, num(step)?),
        None => (num(rest)?, default_step),
    };
    let lo = num(lo)?;
    if !(step > 0.0) || !(hi >= lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(bad());
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| ((lo + i as f64 * step) * 1e12).round() / 1e12).collect())
}
