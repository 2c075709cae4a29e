//! Speedup harness: every instance is solved with and without safety
//! preprocessing under the same time limit.

use serde::Serialize;

use crate::generator::Instance;
use crate::graph::{EdgeId, Graph};
use crate::models::{solve, DecompositionSpec, KChoice, ModelError, ModelKind, Solution, SolutionStatus};
use crate::solver::{Backend, Params, SolverError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EPrimePolicy {
    All,
    /// Edges whose weight is strictly above the given percentile of non-auxiliary weights.
    AbovePercentile(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub model: ModelKind,
    pub eprime: EPrimePolicy,
    pub k: KChoice,
    pub time_limit: f64,
    /// Attach the instance's read subsets (LAE uses them as its safety set).
    pub use_subsets: bool,
    /// Solves per side; the fastest is reported. Runs alternate between sides.
    pub repeats: usize,
}

impl BenchConfig {
    /// Defaults per model: MPE keeps edges above the 25th percentile, LAE attaches reads.
    pub fn for_model(model: ModelKind, time_limit: f64) -> Self {
        BenchConfig {
            model,
            eprime: if model == ModelKind::Mpe { EPrimePolicy::AbovePercentile(25.0) } else { EPrimePolicy::All },
            k: KChoice::Auto,
            time_limit,
            use_subsets: model == ModelKind::Lae,
            repeats: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BenchRow {
    pub name: String,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub prep_seconds: f64,
    pub solve_seconds_no_safety: f64,
    pub solve_seconds_safety: f64,
    pub solved_no_safety: bool,
    pub solved_safety: bool,
    pub fixed_one: usize,
    pub fixed_zero: usize,
    pub antichain_size: usize,
    pub objective_no_safety: Option<u64>,
    pub objective_safety: Option<u64>,
    /// Equal objectives (FD: equal k and status); true when either side timed out.
    pub objective_equal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BenchReport {
    pub model: ModelKind,
    pub time_limit: f64,
    pub rows: Vec<BenchRow>,
    /// Total time without safety over total time with it, timeouts at the limit.
    pub speedup: f64,
    /// Mean of per-instance ratios.
    pub mean_speedup: f64,
    pub median_seconds_no_safety: f64,
    pub median_seconds_safety: f64,
}

/// Weights at the `p`-th percentile (linear interpolation) over non-auxiliary edges.
pub fn percentile(values: &[u64], p: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut v: Vec<f64> = values.iter().map(|&x| x as f64).collect();
    v.sort_by(f64::total_cmp);
    let pos = (p / 100.0).clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

pub fn select_eprime(g: &Graph, policy: EPrimePolicy) -> Vec<EdgeId> {
    let real: Vec<EdgeId> = (0..g.m()).filter(|&e| !g.is_auxiliary(e)).collect();
    match policy {
        EPrimePolicy::All => real,
        EPrimePolicy::AbovePercentile(p) => {
            let cut = percentile(&real.iter().map(|&e| g.weight(e)).collect::<Vec<_>>(), p);
            real.into_iter().filter(|&e| g.weight(e) as f64 > cut).collect()
        }
    }
}

pub fn instance_spec(inst: &Instance, cfg: &BenchConfig) -> DecompositionSpec {
    let mut spec = DecompositionSpec::new(inst.graph.clone(), cfg.model)
        .with_eprime(select_eprime(&inst.graph, cfg.eprime))
        .with_k(cfg.k);
    if cfg.use_subsets {
        spec = spec.with_subsets(inst.subsets.clone());
    }
    spec.params = Params { time_limit: cfg.time_limit, ..Params::default() };
    spec
}

fn elapsed(sol: &Solution, limit: f64) -> f64 {
    if sol.status == SolutionStatus::TimedOut || sol.status == SolutionStatus::Feasible {
        limit
    } else {
        (sol.stats.prep_seconds + sol.stats.solve_seconds).min(limit)
    }
}

fn done(sol: &Solution) -> bool {
    matches!(sol.status, SolutionStatus::Optimal | SolutionStatus::Infeasible)
}

pub fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

fn bench_row(inst: &Instance, cfg: &BenchConfig, backend: &dyn Backend) -> Result<BenchRow, ModelError> {
    let spec = instance_spec(inst, cfg);
    let (plain_spec, safe_spec) = (spec.clone().with_safety(false), spec.with_safety(true));
    let plain = solve(&plain_spec, backend)?;
    let safe = solve(&safe_spec, backend)?;
    let (mut plain_time, mut safe_time) = (elapsed(&plain, cfg.time_limit), elapsed(&safe, cfg.time_limit));
    for _ in 1..cfg.repeats {
        plain_time = plain_time.min(elapsed(&solve(&plain_spec, backend)?, cfg.time_limit));
        safe_time = safe_time.min(elapsed(&solve(&safe_spec, backend)?, cfg.time_limit));
    }
    let comparable = done(&plain) && done(&safe);
    let objective_equal = !comparable || (plain.status == safe.status && plain.objective == safe.objective);
    Ok(BenchRow {
        name: inst.name.clone(),
        n: inst.graph.n(),
        m: inst.graph.m(),
        k: safe.k,
        prep_seconds: safe.stats.prep_seconds,
        solve_seconds_no_safety: plain_time,
        solve_seconds_safety: safe_time,
        solved_no_safety: done(&plain),
        solved_safety: done(&safe),
        fixed_one: safe.stats.fixed_one,
        fixed_zero: safe.stats.fixed_zero,
        antichain_size: safe.stats.antichain_size,
        objective_no_safety: plain.objective,
        objective_safety: safe.objective,
        objective_equal,
    })
}

/// Aggregates per-instance rows into a report.
pub fn summarize(model: ModelKind, time_limit: f64, rows: Vec<BenchRow>) -> BenchReport {
    let total_plain: f64 = rows.iter().map(|r| r.solve_seconds_no_safety).sum();
    let total_safe: f64 = rows.iter().map(|r| r.solve_seconds_safety).sum();
    let ratios: Vec<f64> =
        rows.iter().map(|r| r.solve_seconds_no_safety.max(1e-6) / r.solve_seconds_safety.max(1e-6)).collect();
    let mut a: Vec<f64> = rows.iter().map(|r| r.solve_seconds_no_safety).collect();
    let mut b: Vec<f64> = rows.iter().map(|r| r.solve_seconds_safety).collect();
    BenchReport {
        model,
        time_limit,
        speedup: if total_safe > 0.0 { total_plain / total_safe } else { 1.0 },
        mean_speedup: if ratios.is_empty() { 1.0 } else { ratios.iter().sum::<f64>() / ratios.len() as f64 },
        median_seconds_no_safety: median(&mut a),
        median_seconds_safety: median(&mut b),
        rows,
    }
}

/// Solves every instance with and without safety, one after the other.
pub fn run_benchmark(
    instances: &[Instance],
    cfg: &BenchConfig,
    backend: &dyn Backend,
) -> Result<BenchReport, ModelError> {
    let rows = instances.iter().map(|inst| bench_row(inst, cfg, backend)).collect::<Result<Vec<_>, _>>()?;
    Ok(summarize(cfg.model, cfg.time_limit, rows))
}

/// Like [`run_benchmark`] with up to `threads` instances in flight; each
/// thread opens its own backend through `open`. Rows keep input order.
pub fn run_benchmark_parallel<F>(
    instances: &[Instance],
    cfg: &BenchConfig,
    threads: usize,
    open: F,
) -> Result<BenchReport, ModelError>
where
    F: Fn() -> Result<Box<dyn Backend>, SolverError> + Sync,
{
    let threads = threads.clamp(1, instances.len().max(1));
    let chunk = instances.len().div_ceil(threads).max(1);
    let parts: Vec<Result<Vec<BenchRow>, ModelError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = instances
            .chunks(chunk)
            .map(|part| {
                let open = &open;
                scope.spawn(move || {
                    let backend = open()?;
                    part.iter().map(|inst| bench_row(inst, cfg, backend.as_ref())).collect()
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("benchmark worker panicked")).collect()
    });
    let mut rows = Vec::with_capacity(instances.len());
    for part in parts {
        rows.extend(part?);
    }
    Ok(summarize(cfg.model, cfg.time_limit, rows))
}

impl BenchReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "name,n,m,k,prep_s,solve_s_no_safety,solve_s_safety,solved_no_safety,solved_safety,fixed_one,fixed_zero,antichain,objective_no_safety,objective_safety,objective_equal\n",
        );
        let opt = |o: Option<u64>| o.map_or(String::new(), |v| v.to_string());
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{:.4},{:.4},{:.4},{},{},{},{},{},{},{},{}\n",
                r.name,
                r.n,
                r.m,
                r.k,
                r.prep_seconds,
                r.solve_seconds_no_safety,
                r.solve_seconds_safety,
                r.solved_no_safety,
                r.solved_safety,
                r.fixed_one,
                r.fixed_zero,
                r.antichain_size,
                opt(r.objective_no_safety),
                opt(r.objective_safety),
                r.objective_equal
            ));
        }
        out
    }

    pub fn all_objectives_equal(&self) -> bool {
        self.rows.iter().all(|r| r.objective_equal)
    }
}
