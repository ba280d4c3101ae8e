//! Experiment orchestration and output files.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use oadmm_core::baselines::{fixed_beta_admm_solve, spgm_ep_solve, subgrad_solve};
use oadmm_core::data::{load_or_synthesize_data, DatasetDescriptor};
use oadmm_core::diagnostics::IterationTrace;
use oadmm_core::stiefel::{gaussian_matrix, project_to_stiefel};
use oadmm_core::{make_sparse_pca, solve, CompositeProblem, StiefelPoint};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::CliError;
use crate::spec::{ExperimentSpec, SolverPlan};

pub const TRACE_HEADER: [&str; 9] =
    ["t", "objective", "crit", "theta", "primal_residual", "beta", "eta", "backtracks", "elapsed_s"];
pub const SUMMARY_FILE: &str = "summary.json";
pub const PLOT_FILE: &str = "plot.csv";
pub const THREADS_ENV: &str = "OADMM_THREADS";

pub fn trace_file(solver: &str) -> String {
    format!("trace_{solver}.csv")
}

/// Command-line overrides of a spec.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    /// Single-threaded, and wall time omitted from traces.
    pub deterministic: bool,
    /// Upper bound on concurrent solver runs.
    pub threads: Option<usize>,
    /// Directory that relative `file:` dataset paths are resolved against.
    pub base_dir: Option<PathBuf>,
}

impl RunOptions {
    /// Reads the thread cap from the environment.
    pub fn threads_from_env() -> Result<Option<usize>, CliError> {
        match std::env::var(THREADS_ENV) {
            Ok(v) => match v.trim().parse::<usize>() {
                Ok(n) if n > 0 => Ok(Some(n)),
                _ => Err(CliError::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
            },
            Err(_) => Ok(None),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolverOutcome {
    pub name: String,
    pub plan: SolverPlan,
    pub result: Result<Vec<IterationTrace>, String>,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub out_dir: PathBuf,
    pub outcomes: Vec<SolverOutcome>,
    pub summary: Value,
}

impl RunReport {
    pub fn failures(&self) -> Vec<(&str, &str)> {
        self.outcomes
            .iter()
            .filter_map(|o| o.result.as_ref().err().map(|e| (o.name.as_str(), e.as_str())))
            .collect()
    }

    /// 0 when every solver finished, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.failures().is_empty() { 0 } else { 1 }
    }
}

/// Sparse PCA instance described by a spec.
pub fn build_problem(spec: &ExperimentSpec, seed: u64, base_dir: Option<&Path>) -> Result<CompositeProblem<f64>, CliError> {
    let mut desc = DatasetDescriptor::parse_with_seed(&spec.dataset, seed)?;
    if let (DatasetDescriptor::File(p), Some(base)) = (&desc, base_dir) {
        if p.is_relative() {
            desc = DatasetDescriptor::File(base.join(p));
        }
    }
    let d = load_or_synthesize_data(&desc, spec.centering.into())?;
    let n = d.nrows();
    Ok(make_sparse_pca(d, spec.rho_dot, spec.k_for(n), spec.r)?)
}

/// `(X0, y0, z0)` shared by every solver of a run.
pub type StartPoint = (StiefelPoint<f64>, DVector<f64>, DVector<f64>);

/// Common start `X0 = Proj(G)` for a seeded Gaussian `G`, `y0 = A(X0)`, `z0 = 0`.
pub fn initial_point(
    prob: &CompositeProblem<f64>,
    seed: u64,
) -> Result<StartPoint, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g: DMatrix<f64> = gaussian_matrix(prob.n(), prob.r(), &mut rng);
    let x0 = project_to_stiefel(&g)?;
    let y0 = prob.a.apply(x0.matrix());
    Ok((x0, y0, DVector::zeros(prob.m())))
}

fn run_plan(
    prob: &CompositeProblem<f64>,
    plan: &SolverPlan,
    start: &StartPoint,
) -> oadmm_core::Result<Vec<IterationTrace>> {
    let (x0, y0, z0) = start.clone();
    match plan {
        SolverPlan::Oadmm(c) => solve(prob, c, x0, y0, z0).map(|o| o.trace),
        SolverPlan::SubGrad(c) => subgrad_solve(prob, c, x0).map(|o| o.trace),
        SolverPlan::SpgmEp(c) => spgm_ep_solve(prob, c, x0, y0).map(|o| o.trace),
        SolverPlan::FixedBetaAdmm(c) => fixed_beta_admm_solve(prob, c, x0, y0, z0).map(|o| o.trace),
    }
}

/// Runs every solver of `spec` from a common start and writes one trace CSV
/// per solver, `summary.json` and `plot.csv` into the output directory.
///
/// Configuration and I/O problems are returned as errors; solver failures
/// are recorded in the report so that the remaining results are kept.
pub fn run_experiment(spec: &ExperimentSpec, opts: &RunOptions) -> Result<RunReport, CliError> {
    let mut spec = spec.clone();
    if let Some(seed) = opts.seed {
        spec.seed = seed;
    }
    if let Some(out) = &opts.out {
        spec.out = Some(out.clone());
    }
    let out_dir = spec.out.clone().unwrap_or_else(|| PathBuf::from("oadmm-out"));
    let plans = spec.plans()?;
    let prob = build_problem(&spec, spec.seed, opts.base_dir.as_deref())?;
    let start = initial_point(&prob, spec.seed)?;
    fs::create_dir_all(&out_dir).map_err(|e| CliError::Io(format!("{}: {e}", out_dir.display())))?;

    let threads = if opts.deterministic { 1 } else { opts.threads.unwrap_or(plans.len()).clamp(1, plans.len()) };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let outcomes: Vec<SolverOutcome> = pool.install(|| {
        plans
            .par_iter()
            .map(|(name, plan)| {
                let clock = Instant::now();
                let result = run_plan(&prob, plan, &start).map_err(|e| e.to_string());
                SolverOutcome { name: name.clone(), plan: plan.clone(), result, wall_seconds: clock.elapsed().as_secs_f64() }
            })
            .collect()
    });

    for o in &outcomes {
        if let Ok(trace) = &o.result {
            write_trace(&out_dir.join(trace_file(&o.name)), trace, !opts.deterministic)?;
        }
    }
    write_plot(&out_dir.join(PLOT_FILE), &outcomes)?;
    let summary = summary(&spec, &prob, &outcomes);
    let text = serde_json::to_string_pretty(&summary).map_err(|e| CliError::Io(e.to_string()))?;
    fs::write(out_dir.join(SUMMARY_FILE), text + "\n")?;
    Ok(RunReport { out_dir, outcomes, summary })
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes a trace with the fixed header; absent values are empty fields.
pub fn write_trace(path: &Path, trace: &[IterationTrace], with_time: bool) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(TRACE_HEADER).map_err(io)?;
    for r in trace {
        w.write_record([
            r.t.to_string(),
            r.objective.to_string(),
            opt(r.crit),
            opt(r.theta),
            opt(r.primal_residual),
            opt(r.beta),
            opt(r.step_eta),
            opt(r.backtracks),
            if with_time { r.elapsed_seconds.to_string() } else { String::new() },
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// Long-format objective curves, `solver,t,log10_t,objective`.
fn write_plot(path: &Path, outcomes: &[SolverOutcome]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(["solver", "t", "log10_t", "objective"]).map_err(io)?;
    for o in outcomes {
        if let Ok(trace) = &o.result {
            for r in trace {
                w.write_record([o.name.clone(), r.t.to_string(), (r.t as f64).log10().to_string(), r.objective.to_string()])
                    .map_err(io)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn summary(spec: &ExperimentSpec, prob: &CompositeProblem<f64>, outcomes: &[SolverOutcome]) -> Value {
    let solvers: serde_json::Map<String, Value> = outcomes
        .iter()
        .map(|o| {
            let body = match &o.result {
                Ok(trace) => {
                    let last = trace.last();
                    let best = trace.iter().map(|r| r.objective).fold(f64::INFINITY, f64::min);
                    json!({
                        "status": "ok",
                        "final_objective": last.map(|r| r.objective),
                        "best_objective": best,
                        "final_crit": last.and_then(|r| r.crit),
                        "iterations": last.map(|r| r.t),
                        "wall_time_s": o.wall_seconds,
                        "config": o.plan.describe(),
                    })
                }
                Err(e) => json!({
                    "status": "failed",
                    "error": e,
                    "wall_time_s": o.wall_seconds,
                    "config": o.plan.describe(),
                }),
            };
            (o.name.clone(), body)
        })
        .collect();
    json!({
        "version": env!("CARGO_PKG_VERSION"),
        "experiment": spec,
        "problem": { "n": prob.n(), "r": prob.r(), "m": prob.m(), "k": spec.k_for(prob.n()) },
        "solvers": solvers,
    })
}
