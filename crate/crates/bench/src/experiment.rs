//! Running configured experiments and writing their artifacts.

use crate::artifact::{
    emit_trace_csv, fmt_f64, io_err, summarize, write_failure_map, ArtifactError, FailureCell, RunSummary,
};
use crate::config::{ConfigError, ExperimentConfig, Problem};
use crate::methods::{resolve_method, ResolvedMethod};
use grnewton::gns::{estimate_gamma, GammaBoundSpec, GnsConfig};
use grnewton::hessian::{measure_inexactness, HessianStrategy, InexactnessBound};
use grnewton::solver::{run, RunResult};
use grnewton::theory::{k_convex, k_grad_dominated, k_inexact_convex, k_nonconvex, ProblemClassParams};
use grnewton::{NormPair, Vector};
use rayon::prelude::*;
use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Artifact(#[from] ArtifactError),
    #[error("{0}")]
    Run(String),
}

impl BenchError {
    /// 1 for configuration problems, 2 for failures while running.
    pub fn exit_code(&self) -> u8 {
        match self {
            BenchError::Config(_) => 1,
            _ => 2,
        }
    }
}

/// Per-run seed derived from the experiment seed and the run index.
pub fn run_seed(seed: u64, run_index: usize) -> u64 {
    let mut z = seed ^ (run_index as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub method: String,
    pub run_index: usize,
    pub x0: Vector,
    pub result: RunResult,
    pub summary: RunSummary,
}

/// A configuration with its problem built and methods resolved.
pub struct Prepared {
    pub cfg: ExperimentConfig,
    pub problem: Problem,
    pub methods: Vec<ResolvedMethod>,
    pub starts: Vec<Vector>,
}

pub fn prepare(cfg: &ExperimentConfig) -> Result<Prepared, ConfigError> {
    cfg.validate()?;
    let problem = cfg.build_problem()?;
    let methods = cfg
        .methods
        .iter()
        .map(|m| resolve_method(m, &problem, &cfg.stop))
        .collect::<Result<Vec<_>, _>>()?;
    let mut seen = std::collections::HashSet::new();
    for m in &methods {
        if !seen.insert(m.name.as_str()) {
            return Err(ConfigError::Invalid(format!("duplicate method name {}", m.name)));
        }
    }
    let starts = cfg.starting_points(problem.objective.dim())?;
    Ok(Prepared {
        cfg: cfg.clone(),
        problem,
        methods,
        starts,
    })
}

/// Runs every (method, starting point) pair. Results come back in
/// method-major order regardless of scheduling.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<RunOutput>, ConfigError> {
    let prep = prepare(cfg)?;
    Ok(run_prepared(&prep))
}

pub fn run_prepared(prep: &Prepared) -> Vec<RunOutput> {
    let cells: Vec<(usize, usize)> = (0..prep.methods.len())
        .flat_map(|m| (0..prep.starts.len()).map(move |s| (m, s)))
        .collect();
    cells
        .par_iter()
        .enumerate()
        .map(|(run_index, &(mi, si))| {
            let method = &prep.methods[mi];
            let x0 = &prep.starts[si];
            let mut solver = method.solver.clone();
            solver.seed = run_seed(prep.cfg.seed, run_index);
            solver.record_iterates = !prep.cfg.is_grid();
            let result = run(prep.problem.objective.as_ref(), &solver, x0);
            let summary = summarize(
                &prep.cfg.name,
                &method.name,
                solver.strategy.label(),
                prep.cfg.seed,
                run_index,
                x0.as_slice(),
                &result,
            );
            RunOutput {
                method: method.name.clone(),
                run_index,
                x0: x0.clone(),
                result,
                summary,
            }
        })
        .collect()
}

#[derive(Debug, Serialize)]
struct BatchSummary<'a> {
    config: &'a ExperimentConfig,
    runs: Vec<RunSummary>,
}

fn create_dir(dir: &Path) -> Result<(), ArtifactError> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<(), ArtifactError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

/// Writes traces and summaries (or failure maps for grid starts) into `dir`
/// and returns the files written.
pub fn write_artifacts(cfg: &ExperimentConfig, outputs: &[RunOutput], dir: &Path) -> Result<Vec<PathBuf>, ArtifactError> {
    create_dir(dir)?;
    let mut written = Vec::new();
    let mut runs = Vec::new();
    if cfg.is_grid() {
        let mut names: Vec<&str> = outputs.iter().map(|o| o.method.as_str()).collect();
        names.dedup();
        for name in names {
            let cells: Vec<FailureCell> = outputs
                .iter()
                .filter(|o| o.method == name)
                .map(|o| FailureCell {
                    x1: o.x0[0],
                    x2: o.x0[1],
                    status: o.summary.status.clone(),
                    iters: o.summary.iterations,
                    final_f: o.summary.final_f,
                })
                .collect();
            let path = dir.join(format!("{name}.failure_map.csv"));
            let file = std::fs::File::create(&path).map_err(|e| io_err(&path, e))?;
            write_failure_map(&cells, std::io::BufWriter::new(file))?;
            written.push(path);
        }
        runs.extend(outputs.iter().map(|o| o.summary.clone()));
    } else {
        let multi = outputs.first().is_some_and(|f| outputs.iter().filter(|o| o.method == f.method).count() > 1);
        for o in outputs {
            let stem = if multi { format!("{}.{}", o.method, o.run_index) } else { o.method.clone() };
            let trace_path = dir.join(format!("{stem}.csv"));
            emit_trace_csv(&o.result.trace, &trace_path)?;
            written.push(trace_path);
            if !o.result.iterates.is_empty() && o.x0.len() <= 10 {
                let path = dir.join(format!("{stem}.iterates.csv"));
                write_iterates(&o.result.iterates, &path)?;
                written.push(path);
            }
            let mut summary = o.summary.clone();
            summary.trace_file = Some(format!("{stem}.csv"));
            let path = dir.join(format!("{stem}.summary.json"));
            write_json(&summary, &path)?;
            written.push(path);
            runs.push(summary);
        }
    }
    let path = dir.join("summary.json");
    write_json(&BatchSummary { config: cfg, runs }, &path)?;
    written.push(path);
    Ok(written)
}

/// `iter,x1,…,xn`, one row per iterate.
pub fn write_iterates(iterates: &[Vector], path: &Path) -> Result<(), ArtifactError> {
    let n = iterates.first().map(|x| x.len()).unwrap_or(0);
    let file = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    let mut header = vec!["iter".to_string()];
    header.extend((1..=n).map(|i| format!("x{i}")));
    w.write_record(&header)?;
    for (k, x) in iterates.iter().enumerate() {
        let mut rec = vec![k.to_string()];
        rec.extend(x.iter().map(|v| fmt_f64(*v)));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// One `γ̂` estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeRow {
    pub method: String,
    pub iter: usize,
    pub grad_dual_norm: f64,
    pub gamma_used: f64,
    pub gamma_hat: f64,
}

fn gns_config(cfg: &ExperimentConfig, seed: u64) -> GnsConfig {
    let mut g = GnsConfig {
        seed,
        ..GnsConfig::default()
    };
    if let Some(p) = &cfg.probe {
        if let Some(d) = p.n_dirs {
            g.n_dirs = d;
        }
        if let Some(r) = p.n_radii {
            g.n_radii = r;
        }
        if let Some(gp) = p.grid_points {
            g.grid_points = gp;
        }
    }
    g
}

/// Estimates `γ(x, ∇f(x))` along each method's trajectory, or at every
/// grid point (exact Hessian) when the starting points form a grid.
pub fn gamma_probe(cfg: &ExperimentConfig) -> Result<Vec<ProbeRow>, BenchError> {
    let prep = prepare(cfg)?;
    let obj = prep.problem.objective.as_ref();
    let every = cfg.probe.as_ref().and_then(|p| p.every).unwrap_or(1).max(1);
    if cfg.is_grid() {
        let np = NormPair::identity(obj.dim());
        return prep
            .starts
            .par_iter()
            .enumerate()
            .map(|(i, x)| {
                let g = obj.gradient(x);
                let gd = np.dual_norm(&g).map_err(|e| BenchError::Run(e.to_string()))?;
                let gcfg = gns_config(cfg, run_seed(cfg.seed, i));
                let hat = if gd > 0.0 {
                    estimate_gamma(obj, &HessianStrategy::Exact, x, &g, &np, &gcfg)
                        .map_err(|e| BenchError::Run(e.to_string()))?
                } else {
                    f64::NAN
                };
                Ok(ProbeRow {
                    method: "grid".into(),
                    iter: i,
                    grad_dual_norm: gd,
                    gamma_used: f64::NAN,
                    gamma_hat: hat,
                })
            })
            .collect();
    }
    let outputs = run_prepared(&prep);
    let mut rows = Vec::new();
    for o in &outputs {
        let method = prep.methods.iter().find(|m| m.name == o.method).expect("method exists");
        let np = &method.solver.norm;
        let strategy = &method.solver.strategy;
        let per_method: Vec<Result<ProbeRow, BenchError>> = o
            .result
            .iterates
            .par_iter()
            .enumerate()
            .filter(|(k, _)| k % every == 0)
            .map(|(k, x)| {
                let g = obj.gradient(x);
                let gd = np.dual_norm(&g).map_err(|e| BenchError::Run(e.to_string()))?;
                let gcfg = gns_config(cfg, run_seed(cfg.seed ^ o.run_index as u64, k));
                let hat = if gd > 0.0 {
                    estimate_gamma(obj, strategy, x, &g, np, &gcfg).map_err(|e| BenchError::Run(e.to_string()))?
                } else {
                    f64::NAN
                };
                let gamma_used = o.result.trace.get(k + 1).map(|t| t.gamma).unwrap_or(f64::NAN);
                Ok(ProbeRow {
                    method: o.method.clone(),
                    iter: k,
                    grad_dual_norm: gd,
                    gamma_used,
                    gamma_hat: hat,
                })
            })
            .collect();
        for r in per_method {
            rows.push(r?);
        }
    }
    Ok(rows)
}

pub fn write_probe<W: Write>(rows: &[ProbeRow], out: W) -> Result<(), ArtifactError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["method", "iter", "grad_dual_norm", "gamma_used", "gamma_hat"])?;
    for r in rows {
        w.write_record([
            r.method.clone(),
            r.iter.to_string(),
            fmt_f64(r.grad_dual_norm),
            fmt_f64(r.gamma_used),
            fmt_f64(r.gamma_hat),
        ])?;
    }
    w.flush().map_err(|e| io_err(Path::new("<probe>"), e))
}

/// Fitted inexactness constants of one method's Hessian approximation.
#[derive(Debug, Clone, Serialize)]
pub struct InexactnessRecord {
    pub method: String,
    pub strategy: String,
    pub points: usize,
    pub c1: f64,
    pub c2: f64,
    pub beta: f64,
    pub max_residual: f64,
    pub log_slope: Option<f64>,
}

/// Measures every non-exact method's approximation on the iterates of the
/// first method's run.
pub fn inexactness(cfg: &ExperimentConfig) -> Result<Vec<InexactnessRecord>, BenchError> {
    if cfg.is_grid() {
        return Err(ConfigError::Invalid("inexactness needs a single starting point".into()).into());
    }
    let prep = prepare(cfg)?;
    let obj = prep.problem.objective.as_ref();
    let reference = &prep.methods[0];
    let mut solver = reference.solver.clone();
    solver.record_iterates = true;
    solver.seed = run_seed(cfg.seed, 0);
    let traj = run(obj, &solver, &prep.starts[0]);
    let every = cfg.probe.as_ref().and_then(|p| p.every).unwrap_or(1).max(1);
    let beta = cfg.probe.as_ref().and_then(|p| p.beta).unwrap_or(0.0);
    let points: Vec<Vector> = traj
        .iterates
        .iter()
        .enumerate()
        .filter(|(k, x)| k % every == 0 && obj.gradient(x).norm() > 0.0)
        .map(|(_, x)| x.clone())
        .collect();
    let mut out = Vec::new();
    for m in &prep.methods {
        if m.solver.strategy == HessianStrategy::Exact {
            continue;
        }
        let report = measure_inexactness(obj, &m.solver.strategy, &points, &m.solver.norm, beta, None)
            .map_err(|e| BenchError::Run(format!("{}: {e}", m.name)))?;
        out.push(InexactnessRecord {
            method: m.name.clone(),
            strategy: m.solver.strategy.label().to_string(),
            points: points.len(),
            c1: report.bound.c1,
            c2: report.bound.c2,
            beta: report.bound.beta,
            max_residual: report.residuals.iter().cloned().fold(0.0, f64::max),
            log_slope: report.log_slope,
        });
    }
    Ok(out)
}

/// One line of the `predict` table; `None` where a predictor does not apply.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictionRow {
    pub epsilon: f64,
    pub k_nonconvex: Option<f64>,
    pub k_convex: Option<f64>,
    pub k_grad_dominated: Option<f64>,
    pub k_inexact_convex: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Prediction {
    pub params_f0: f64,
    pub params_grad0: f64,
    /// "linear", "sublinear" or "none" for the gradient-dominated envelope.
    pub dominated_rate: String,
    pub rows: Vec<PredictionRow>,
}

pub fn predict(cfg: &ExperimentConfig) -> Result<Prediction, BenchError> {
    let theory = cfg
        .theory
        .as_ref()
        .ok_or_else(|| ConfigError::Invalid("predict needs a \"theory\" section".into()))?;
    let spec = GammaBoundSpec::new(theory.terms.clone()).map_err(|e| ConfigError::Invalid(e.to_string()))?;
    let (f0, grad0) = match (theory.f0, theory.grad0) {
        (Some(f0), Some(g0)) => (f0, g0),
        (f0, g0) => {
            let problem = cfg.build_problem()?;
            let obj = problem.objective.as_ref();
            let x0 = &cfg.starting_points(obj.dim())?[0];
            let (f, g) = obj.value_and_gradient(x0);
            (f0.unwrap_or(f - theory.f_star), g0.unwrap_or(g.norm()))
        }
    };
    let mut params = ProblemClassParams::new(spec, theory.diameter, f0, grad0);
    if let Some(d) = theory.dominance {
        params = params.with_dominance(d.c, d.d_c);
    }
    if let Some(i) = theory.inexactness {
        params = params.with_inexactness(InexactnessBound {
            c1: i.c1,
            c2: i.c2,
            beta: i.beta,
        });
    }
    let alpha = params.spec.alpha_min();
    let dominated_rate = match theory.dominance {
        Some(d) if d.c > alpha + 1e-12 => {
            return Err(ConfigError::Invalid(format!("dominance degree c = {} exceeds alpha = {alpha}", d.c)).into())
        }
        Some(d) if (alpha - d.c) / (1.0 + d.c) < grnewton::theory::LOG_BRANCH_THRESHOLD => "linear",
        Some(_) => "sublinear",
        None => "none",
    };
    let mut rows = Vec::new();
    for &eps in &theory.epsilons {
        let bad = |e: grnewton::theory::TheoryError| BenchError::Run(format!("epsilon {eps}: {e}"));
        rows.push(PredictionRow {
            epsilon: eps,
            k_nonconvex: Some(k_nonconvex(&params, eps).map_err(bad)?),
            k_convex: Some(k_convex(&params, eps).map_err(bad)?),
            k_grad_dominated: match params.dominance {
                Some(_) => Some(k_grad_dominated(&params, eps).map_err(bad)?),
                None => None,
            },
            k_inexact_convex: match params.inexactness {
                Some(_) => Some(k_inexact_convex(&params, eps).map_err(bad)?),
                None => None,
            },
        });
    }
    Ok(Prediction {
        params_f0: f0,
        params_grad0: grad0,
        dominated_rate: dominated_rate.to_string(),
        rows,
    })
}

pub fn write_prediction<W: Write>(p: &Prediction, out: W) -> Result<(), ArtifactError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["epsilon", "k_nonconvex", "k_convex", "k_grad_dominated", "k_inexact_convex"])?;
    let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
    for r in &p.rows {
        w.write_record([
            fmt_f64(r.epsilon),
            opt(r.k_nonconvex),
            opt(r.k_convex),
            opt(r.k_grad_dominated),
            opt(r.k_inexact_convex),
        ])?;
    }
    w.flush().map_err(|e| io_err(Path::new("<prediction>"), e))
}
