//! The decomposition problems: k-FD (and minimum flow decomposition), k-LAE
//! and k-MPE, assembled from the walk blocks in [`crate::milp`].

use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::graph::{condense, reachability, EdgeId, Graph, VertexId};
use crate::milp::{
    add_subset_constraints, add_walk_block, apply_fixing, expand_binary, plan_fixing, product_with, FixingStats,
    MilpError, WalkBlock,
};
use crate::safety::{edge_safe_sequences, longest_covering_sequence, SafeSequence, SafetyError};
use crate::solver::{Backend, LinExpr, Model, Params, Sense, SolverError, Status, Var};
use crate::widths::{max_weight_antichain, min_walk_cover_size, WidthError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ModelKind {
    /// Exact flow decomposition on E′.
    Fd,
    /// Least absolute errors.
    Lae,
    /// Minimum path error.
    Mpe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KChoice {
    Fixed(usize),
    /// FD: smallest feasible k from the cover lower bound up. LAE/MPE: the cover size.
    Auto,
}

#[derive(Debug, Clone)]
pub struct DecompositionSpec {
    pub graph: Graph,
    /// Edges whose flow values constrain the decomposition; sorted, unique.
    pub eprime: Vec<EdgeId>,
    pub subsets: Vec<Vec<EdgeId>>,
    pub model: ModelKind,
    pub k: KChoice,
    pub safety: bool,
    pub params: Params,
    /// Upper bound on traversals per edge and walk for LAE and MPE.
    pub traversal_cap: u64,
    /// Forbid zero-weight walks in LAE and MPE.
    pub strict_positive_weights: bool,
}

impl DecompositionSpec {
    /// Spec with E′ = all non-auxiliary edges, no subsets, automatic k and safety on.
    pub fn new(graph: Graph, model: ModelKind) -> Self {
        let eprime = (0..graph.m()).filter(|&e| !graph.is_auxiliary(e)).collect();
        DecompositionSpec {
            graph,
            eprime,
            subsets: Vec::new(),
            model,
            k: KChoice::Auto,
            safety: true,
            params: Params::default(),
            traversal_cap: 8,
            strict_positive_weights: false,
        }
    }

    pub fn with_eprime(mut self, mut eprime: Vec<EdgeId>) -> Self {
        eprime.sort_unstable();
        eprime.dedup();
        self.eprime = eprime;
        self
    }

    pub fn with_subsets(mut self, subsets: Vec<Vec<EdgeId>>) -> Self {
        self.subsets = subsets;
        self
    }

    pub fn with_k(mut self, k: KChoice) -> Self {
        self.k = k;
        self
    }

    pub fn with_safety(mut self, on: bool) -> Self {
        self.safety = on;
        self
    }

    fn in_eprime(&self) -> Vec<bool> {
        let mut mask = vec![false; self.graph.m()];
        for &e in &self.eprime {
            mask[e] = true;
        }
        mask
    }

    fn max_target(&self) -> u64 {
        self.eprime.iter().map(|&e| self.graph.weight(e)).max().unwrap_or(0)
    }

    /// E′ edges with positive flow: every solution must traverse them.
    pub fn required_edges(&self) -> Vec<EdgeId> {
        self.eprime.iter().copied().filter(|&e| self.graph.weight(e) > 0).collect()
    }

    /// Edges every solution walk set must cover, which drive safety.
    pub fn safety_set(&self) -> Vec<EdgeId> {
        let mut c = match self.model {
            ModelKind::Fd | ModelKind::Mpe => self.required_edges(),
            ModelKind::Lae => self.subsets.iter().flatten().copied().collect(),
        };
        c.sort_unstable();
        c.dedup();
        c
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error(transparent)]
    Milp(#[from] MilpError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Width(#[from] WidthError),
    #[error(transparent)]
    Safety(#[from] SafetyError),
    #[error("edge id {0} is not in the graph")]
    EdgeNotInGraph(EdgeId),
    #[error("k must be at least 1")]
    InvalidK,
    #[error("edge {0} has positive flow but lies on no s-t walk")]
    InfeasibleCover(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolutionStatus {
    Optimal,
    Feasible,
    Infeasible,
    TimedOut,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SolveStats {
    pub fixed_one: usize,
    pub fixed_zero: usize,
    pub antichain_size: usize,
    pub safe_sequences: usize,
    pub prep_seconds: f64,
    pub solve_seconds: f64,
    /// Traversal variables sitting at a cap that did not come from the data.
    pub bound_hits: usize,
    pub variables: usize,
    pub constraints: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub status: SolutionStatus,
    pub model: ModelKind,
    pub k: usize,
    /// All k walks, including zero-weight ones, sorted by (weight desc, names).
    pub walks: Vec<Vec<VertexId>>,
    pub weights: Vec<u64>,
    /// MPE only; empty otherwise.
    pub slacks: Vec<u64>,
    /// FD: k. LAE: total absolute error. MPE: total slack.
    pub objective: Option<u64>,
    pub stats: SolveStats,
}

impl Solution {
    fn without_point(status: SolutionStatus, model: ModelKind, k: usize, stats: SolveStats) -> Self {
        Solution {
            status,
            model,
            k,
            walks: Vec::new(),
            weights: Vec::new(),
            slacks: Vec::new(),
            objective: None,
            stats,
        }
    }

    pub fn has_point(&self) -> bool {
        matches!(self.status, SolutionStatus::Optimal | SolutionStatus::Feasible)
    }

    /// JSON report; zero-weight walks are dropped unless `keep_zero`.
    pub fn to_json(&self, g: &Graph, keep_zero: bool) -> serde_json::Value {
        let keep: Vec<usize> = (0..self.walks.len()).filter(|&i| keep_zero || self.weights[i] > 0).collect();
        let walks: Vec<Vec<&str>> = keep.iter().map(|&i| self.walks[i].iter().map(|&v| g.name(v)).collect()).collect();
        let weights: Vec<u64> = keep.iter().map(|&i| self.weights[i]).collect();
        let slacks: Vec<u64> = keep.iter().filter_map(|&i| self.slacks.get(i).copied()).collect();
        serde_json::json!({
            "status": self.status,
            "model": self.model,
            "k": self.k,
            "objective": self.objective,
            "walks": walks,
            "weights": weights,
            "slacks": slacks,
            "stats": self.stats,
        })
    }
}

/// Variables of a built model.
#[derive(Debug, Clone)]
pub struct BuiltModel {
    pub model: Model,
    pub blocks: Vec<WalkBlock>,
    pub weight: Vec<Var>,
    pub slack: Vec<Var>,
    pub fixing: FixingStats,
    pub antichain_size: usize,
    pub safe_sequences: usize,
    pub prep_seconds: f64,
    /// Per edge: whether its traversal bound is an arbitrary cap.
    capped: Vec<bool>,
    /// Set when fixing proved the model infeasible before solving.
    pub infeasible: bool,
}

fn check_edges(spec: &DecompositionSpec) -> Result<(), ModelError> {
    let m = spec.graph.m();
    match spec.eprime.iter().chain(spec.subsets.iter().flatten()).find(|&&e| e >= m) {
        Some(&e) => Err(ModelError::EdgeNotInGraph(e)),
        None => Ok(()),
    }
}

/// Builds the MILP for `spec` with `k` walks, applying safety fixing when enabled.
pub fn build_model(spec: &DecompositionSpec, k: usize) -> Result<BuiltModel, ModelError> {
    if k == 0 {
        return Err(ModelError::InvalidK);
    }
    check_edges(spec)?;
    let g = &spec.graph;
    let in_e = spec.in_eprime();
    let max_f = spec.max_target();
    let cap = max_f.clamp(1, spec.traversal_cap.max(1));
    let global = max_f.max(1);
    let mut capped = vec![false; g.m()];
    let bounds: Vec<u64> = (0..g.m())
        .map(|e| match spec.model {
            ModelKind::Fd if in_e[e] => g.weight(e).max(1),
            ModelKind::Fd => global,
            _ => {
                capped[e] = cap < global || !in_e[e];
                cap
            }
        })
        .collect();

    let mut model = Model::new();
    model.params = spec.params.clone();
    let blocks: Vec<WalkBlock> = (0..k).map(|i| add_walk_block(&mut model, g, i, &bounds)).collect::<Result<_, _>>()?;
    if spec.model == ModelKind::Fd {
        for blk in &blocks {
            for &e in &spec.eprime {
                let (lb, _) = model.bounds(blk.x[e]);
                model.set_bounds(blk.x[e], lb, g.weight(e) as f64);
            }
        }
    }

    let mut built = BuiltModel {
        model,
        blocks,
        weight: Vec::new(),
        slack: Vec::new(),
        fixing: FixingStats::default(),
        antichain_size: 0,
        safe_sequences: 0,
        prep_seconds: 0.0,
        capped,
        infeasible: false,
    };

    if spec.safety {
        let start = Instant::now();
        match safety_fixing(spec, &mut built, k) {
            Ok(()) => {}
            Err(ModelError::Milp(MilpError::AntichainLargerThanK { .. }))
            | Err(ModelError::Milp(MilpError::ConflictingFix { .. })) => built.infeasible = true,
            Err(e) => return Err(e),
        }
        built.prep_seconds = start.elapsed().as_secs_f64();
    }

    let wbar = max_f as i64 + 1;
    let wlo = if spec.model == ModelKind::Fd || spec.strict_positive_weights { 1 } else { 0 };
    let model = &mut built.model;
    built.weight = (0..k).map(|i| model.integer(format!("w[{i}]"), wlo, wbar)).collect();
    if spec.model == ModelKind::Mpe {
        built.slack = (0..k).map(|i| model.integer(format!("rho[{i}]"), 0, wbar)).collect();
    }

    let mut objective = LinExpr::new();
    for &e in &spec.eprime {
        let label = g.edge_label(e);
        let mut flow = LinExpr::new();
        let mut allowance = LinExpr::new();
        for (i, blk) in built.blocks.iter().enumerate() {
            let name = format!("x[{label},{i}]");
            let xs = expand_binary(model, blk.x[e], bounds[e] as i64, &name)?;
            flow += product_with(model, &xs, built.weight[i], wlo, wbar, &format!("{name}*w"));
            if spec.model == ModelKind::Mpe {
                allowance += product_with(model, &xs, built.slack[i], 0, wbar, &format!("{name}*rho"));
            }
        }
        let f = g.weight(e) as f64;
        match spec.model {
            ModelKind::Fd => model.eq(format!("fd[{label}]"), flow, f),
            ModelKind::Lae => {
                let big = (k as u64 * bounds[e] * wbar as u64).max(g.weight(e)) as i64;
                let err = model.integer(format!("err[{label}]"), 0, big);
                model.ge(format!("errlo[{label}]"), flow.clone() + err, f);
                model.le(format!("errhi[{label}]"), flow - err, f);
                objective.add_term(err, 1.0);
            }
            ModelKind::Mpe => {
                model.ge(format!("mpelo[{label}]"), flow.clone() + allowance.clone(), f);
                model.le(format!("mpehi[{label}]"), flow - allowance, f);
            }
        }
    }
    if spec.model == ModelKind::Mpe {
        objective = LinExpr::sum(built.slack.iter().copied());
    }
    add_subset_constraints(model, g, &built.blocks, &spec.subsets)?;
    model.set_objective(Sense::Minimize, objective);
    Ok(built)
}

fn safety_fixing(spec: &DecompositionSpec, built: &mut BuiltModel, k: usize) -> Result<(), ModelError> {
    let g = &spec.graph;
    let live = g.live_edges();
    let c: Vec<EdgeId> = spec.safety_set().into_iter().filter(|&e| live[e]).collect();
    let cond = condense(g);
    let sequences: Vec<SafeSequence> = if c.is_empty() { Vec::new() } else { edge_safe_sequences(g, &c)? };
    built.safe_sequences = sequences.len();
    let (w, witness) = longest_covering_sequence(g.m(), &sequences);
    let antichain = max_weight_antichain(g, &w);
    built.antichain_size = antichain.edges.len();
    let assigned: Vec<&SafeSequence> =
        antichain.edges.iter().map(|&e| &sequences[witness[e].expect("positive weight implies a witness")]).collect();
    let plan = plan_fixing(g, &cond, &reachability(g), &assigned, k)?;
    built.fixing = apply_fixing(&mut built.model, g, &built.blocks, &plan)?;
    Ok(())
}

fn required_live(spec: &DecompositionSpec) -> Result<(), String> {
    let live = spec.graph.live_edges();
    match spec.required_edges().into_iter().find(|&e| !live[e]) {
        Some(e) => Err(spec.graph.edge_label(e)),
        None => Ok(()),
    }
}

/// Solves `spec` with exactly `k` walks.
pub fn solve_with_k(spec: &DecompositionSpec, k: usize, backend: &dyn Backend) -> Result<Solution, ModelError> {
    if let Err(label) = required_live(spec) {
        return match spec.model {
            ModelKind::Mpe => Err(ModelError::InfeasibleCover(label)),
            _ => Ok(Solution::without_point(SolutionStatus::Infeasible, spec.model, k, SolveStats::default())),
        };
    }
    let built = build_model(spec, k)?;
    let mut stats = SolveStats {
        fixed_one: built.fixing.fixed_one,
        fixed_zero: built.fixing.fixed_zero,
        antichain_size: built.antichain_size,
        safe_sequences: built.safe_sequences,
        prep_seconds: built.prep_seconds,
        variables: built.model.num_vars(),
        constraints: built.model.constraints().len(),
        ..Default::default()
    };
    if built.infeasible {
        return Ok(Solution::without_point(SolutionStatus::Infeasible, spec.model, k, stats));
    }
    let result = backend.solve(&built.model)?;
    stats.solve_seconds = result.wall_seconds;
    let status = match result.status {
        Status::Optimal => SolutionStatus::Optimal,
        Status::Feasible => SolutionStatus::Feasible,
        Status::Infeasible | Status::Unbounded => SolutionStatus::Infeasible,
        Status::TimedOut => SolutionStatus::TimedOut,
    };
    if !result.has_solution() {
        return Ok(Solution::without_point(status, spec.model, k, stats));
    }
    let g = &spec.graph;
    let mut rows = Vec::with_capacity(k);
    for (i, blk) in built.blocks.iter().enumerate() {
        let counts: Vec<u64> = blk.x.iter().map(|&x| result.int_value(x) as u64).collect();
        stats.bound_hits += (0..g.m())
            .filter(|&e| built.capped[e] && counts[e] > 0 && counts[e] as f64 >= built.model.bounds(blk.x[e]).1)
            .count();
        let walk = extract_walk(g, &counts)
            .map_err(|_| SolverError::MalformedModel(format!("walk {i} returned by the solver is not an s-t walk")))?;
        let weight = result.int_value(built.weight[i]) as u64;
        let slack = built.slack.get(i).map(|&r| result.int_value(r) as u64);
        rows.push((weight, walk, slack));
    }
    rows.sort_by(|a, b| {
        b.0.cmp(&a.0).then_with(|| {
            let na: Vec<&str> = a.1.iter().map(|&v| g.name(v)).collect();
            let nb: Vec<&str> = b.1.iter().map(|&v| g.name(v)).collect();
            na.cmp(&nb)
        })
    });
    let objective = match spec.model {
        ModelKind::Fd => Some(k as u64),
        _ => result.objective.map(|o| o.round() as u64),
    };
    Ok(Solution {
        status,
        model: spec.model,
        k,
        weights: rows.iter().map(|r| r.0).collect(),
        slacks: rows.iter().filter_map(|r| r.2).collect(),
        walks: rows.into_iter().map(|r| r.1).collect(),
        objective,
        stats,
    })
}

pub fn solve_k_fd(spec: &DecompositionSpec, k: usize, backend: &dyn Backend) -> Result<Solution, ModelError> {
    let spec = DecompositionSpec { model: ModelKind::Fd, ..spec.clone() };
    solve_with_k(&spec, k, backend)
}

pub fn solve_k_lae(spec: &DecompositionSpec, k: usize, backend: &dyn Backend) -> Result<Solution, ModelError> {
    let spec = DecompositionSpec { model: ModelKind::Lae, ..spec.clone() };
    solve_with_k(&spec, k, backend)
}

pub fn solve_k_mpe(spec: &DecompositionSpec, k: usize, backend: &dyn Backend) -> Result<Solution, ModelError> {
    let spec = DecompositionSpec { model: ModelKind::Mpe, ..spec.clone() };
    solve_with_k(&spec, k, backend)
}

/// Lower bound on k: walks needed to cover the required edges (1 if none).
pub fn cover_lower_bound(spec: &DecompositionSpec) -> Result<usize, ModelError> {
    let req = spec.required_edges();
    if req.is_empty() {
        return Ok(1);
    }
    Ok(min_walk_cover_size(&spec.graph, &req)?.max(1))
}

/// Smallest k admitting an exact decomposition, searched upward from the cover bound.
pub fn solve_min_flow_decomp(spec: &DecompositionSpec, backend: &dyn Backend) -> Result<Solution, ModelError> {
    let spec = DecompositionSpec { model: ModelKind::Fd, ..spec.clone() };
    let lower = match cover_lower_bound(&spec) {
        Ok(k) => k,
        Err(ModelError::Width(WidthError::Uncoverable(_))) => {
            return Ok(Solution::without_point(SolutionStatus::Infeasible, ModelKind::Fd, 0, SolveStats::default()))
        }
        Err(e) => return Err(e),
    };
    let upper = spec.required_edges().len().max(lower);
    let mut total = SolveStats::default();
    for k in lower..=upper {
        let mut sol = solve_with_k(&spec, k, backend)?;
        total.prep_seconds += sol.stats.prep_seconds;
        total.solve_seconds += sol.stats.solve_seconds;
        if sol.status != SolutionStatus::Infeasible {
            sol.stats.prep_seconds = total.prep_seconds;
            sol.stats.solve_seconds = total.solve_seconds;
            return Ok(sol);
        }
    }
    Ok(Solution::without_point(SolutionStatus::Infeasible, ModelKind::Fd, upper, total))
}

/// Dispatches on the spec's model and k policy.
pub fn solve(spec: &DecompositionSpec, backend: &dyn Backend) -> Result<Solution, ModelError> {
    match (spec.model, spec.k) {
        (_, KChoice::Fixed(k)) => solve_with_k(spec, k, backend),
        (ModelKind::Fd, KChoice::Auto) => solve_min_flow_decomp(spec, backend),
        (_, KChoice::Auto) => {
            let k = match cover_lower_bound(spec) {
                Ok(k) => k,
                Err(ModelError::Width(WidthError::Uncoverable(label))) if spec.model == ModelKind::Mpe => {
                    return Err(ModelError::InfeasibleCover(label))
                }
                Err(e) => return Err(e),
            };
            solve_with_k(spec, k, backend)
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WalkError {
    #[error("edge counts do not form an s-t walk")]
    NotAWalkMultiset,
}

/// Orders an edge multiset into an s-t walk (Hierholzer's algorithm from s).
pub fn extract_walk(g: &Graph, counts: &[u64]) -> Result<Vec<VertexId>, WalkError> {
    let (s, t) = (g.source(), g.sink());
    for v in 0..g.n() {
        let out: u64 = g.out_edges(v).iter().map(|&e| counts[e]).sum();
        let inn: u64 = g.in_edges(v).iter().map(|&e| counts[e]).sum();
        let want = if v == s {
            out == inn + 1
        } else if v == t {
            inn == out + 1
        } else {
            out == inn
        };
        if !want {
            return Err(WalkError::NotAWalkMultiset);
        }
    }
    let mut left = counts.to_vec();
    let mut next = vec![0usize; g.n()];
    let mut stack = vec![s];
    let mut walk = Vec::new();
    while let Some(&v) = stack.last() {
        let outs = g.out_edges(v);
        while next[v] < outs.len() && left[outs[next[v]]] == 0 {
            next[v] += 1;
        }
        if next[v] < outs.len() {
            let e = outs[next[v]];
            left[e] -= 1;
            stack.push(g.edge(e).head);
        } else {
            walk.push(v);
            stack.pop();
        }
    }
    walk.reverse();
    if left.iter().any(|&c| c > 0) {
        return Err(WalkError::NotAWalkMultiset);
    }
    Ok(walk)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeResidual {
    pub edge: String,
    pub target: u64,
    /// Σ W_i(e) w_i.
    pub explained: u64,
    /// Σ W_i(e) ρ_i (MPE only).
    pub allowance: u64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub invalid_walks: Vec<usize>,
    pub residuals: Vec<EdgeResidual>,
    pub uncovered_subsets: Vec<usize>,
    pub recomputed_objective: u64,
    pub objective_matches: bool,
}

/// Re-checks a solution from its walks and weights alone.
pub fn validate_solution(spec: &DecompositionSpec, sol: &Solution) -> ValidationReport {
    let g = &spec.graph;
    let mut invalid_walks = Vec::new();
    let mut counts = Vec::with_capacity(sol.walks.len());
    for (i, walk) in sol.walks.iter().enumerate() {
        let mut c = vec![0u64; g.m()];
        let mut ok = walk.first() == Some(&g.source()) && walk.last() == Some(&g.sink());
        for p in walk.windows(2) {
            match g.find_edge(p[0], p[1]) {
                Some(e) => c[e] += 1,
                None => ok = false,
            }
        }
        if !ok {
            invalid_walks.push(i);
        }
        counts.push(c);
    }
    let mut residuals = Vec::new();
    let mut lae = 0u64;
    for &e in &spec.eprime {
        let target = g.weight(e);
        let explained: u64 = counts.iter().zip(&sol.weights).map(|(c, &w)| c[e] * w).sum();
        let allowance: u64 = counts.iter().zip(&sol.slacks).map(|(c, &r)| c[e] * r).sum();
        let diff = target.abs_diff(explained);
        lae += diff;
        let ok = match spec.model {
            ModelKind::Fd => diff == 0,
            ModelKind::Lae => true,
            ModelKind::Mpe => diff <= allowance,
        };
        residuals.push(EdgeResidual { edge: g.edge_label(e), target, explained, allowance, ok });
    }
    let uncovered_subsets: Vec<usize> = spec
        .subsets
        .iter()
        .enumerate()
        .filter(|(_, s)| !counts.iter().any(|c| s.iter().all(|&e| c[e] > 0)))
        .map(|(j, _)| j)
        .collect();
    let recomputed_objective = match spec.model {
        ModelKind::Fd => sol.walks.len() as u64,
        ModelKind::Lae => lae,
        ModelKind::Mpe => sol.slacks.iter().sum(),
    };
    let weights_ok = spec.model != ModelKind::Fd || sol.weights.iter().all(|&w| w >= 1);
    let objective_matches = sol.objective == Some(recomputed_objective);
    ValidationReport {
        ok: invalid_walks.is_empty()
            && residuals.iter().all(|r| r.ok)
            && uncovered_subsets.is_empty()
            && weights_ok
            && objective_matches,
        invalid_walks,
        residuals,
        uncovered_subsets,
        recomputed_objective,
        objective_matches,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, fixtures};
    use crate::solver::exhaustive::Exhaustive;

    fn names(g: &Graph, w: &[VertexId]) -> Vec<String> {
        w.iter().map(|&v| g.name(v).to_string()).collect()
    }

    fn backend() -> Box<dyn Backend> {
        crate::solver::default_backend().unwrap()
    }

    #[test]
    fn extract_walk_cases() {
        let g = fixtures::cycle();
        assert_eq!(names(&g, &extract_walk(&g, &[1, 1, 1, 1]).unwrap()), ["s", "a", "b", "a", "t"]);
        let l = build_graph(&[("s", "a", 1), ("a", "a", 1), ("a", "t", 1)], "s", "t").unwrap();
        assert_eq!(names(&l, &extract_walk(&l, &[1, 1, 1]).unwrap()), ["s", "a", "a", "t"]);
        let ab = g.edge_by_names("a", "b").unwrap();
        let ba = g.edge_by_names("b", "a").unwrap();
        let mut c = vec![0; 4];
        c[ab] = 1;
        c[ba] = 1;
        assert_eq!(extract_walk(&g, &c), Err(WalkError::NotAWalkMultiset));
    }

    #[test]
    fn diamond_fd() {
        let spec = DecompositionSpec::new(fixtures::diamond(), ModelKind::Fd);
        for safety in [false, true] {
            let sol = solve_min_flow_decomp(&spec.clone().with_safety(safety), backend().as_ref()).unwrap();
            assert_eq!(sol.k, 2);
            assert_eq!(sol.weights, vec![3, 2]);
            assert!(validate_solution(&spec, &sol).ok);
        }
    }

    #[test]
    fn cycle_fd_k1_infeasible() {
        let spec = DecompositionSpec::new(fixtures::cycle(), ModelKind::Fd);
        for safety in [false, true] {
            let sol = solve_k_fd(&spec.clone().with_safety(safety), 1, backend().as_ref()).unwrap();
            assert_eq!(sol.status, SolutionStatus::Infeasible);
        }
    }

    #[test]
    fn single_path_mfd() {
        let g = build_graph(&[("s", "a", 5), ("a", "t", 5)], "s", "t").unwrap();
        let sol = solve_min_flow_decomp(&DecompositionSpec::new(g, ModelKind::Fd), backend().as_ref()).unwrap();
        assert_eq!((sol.k, sol.weights.clone()), (1, vec![5]));
    }

    #[test]
    fn corrupted_diamond_lae_mpe() {
        let g = build_graph(&[("s", "a", 2), ("a", "t", 2), ("s", "b", 3), ("b", "t", 4)], "s", "t").unwrap();
        for model in [ModelKind::Lae, ModelKind::Mpe] {
            for safety in [false, true] {
                let spec = DecompositionSpec::new(g.clone(), model).with_safety(safety);
                let sol = solve_with_k(&spec, 2, backend().as_ref()).unwrap();
                assert_eq!(sol.objective, Some(1), "{model:?} safety={safety}");
                assert!(validate_solution(&spec, &sol).ok);
            }
        }
        let bt = g.edge_by_names("b", "t").unwrap();
        let spec = DecompositionSpec::new(g.clone(), ModelKind::Mpe).with_eprime((0..4).filter(|&e| e != bt).collect());
        assert_eq!(solve_with_k(&spec, 2, backend().as_ref()).unwrap().objective, Some(0));
    }

    #[test]
    fn lae_subsets_need_two_walks() {
        let g = fixtures::diamond();
        let e = |a: &str, b: &str| g.edge_by_names(a, b).unwrap();
        let spec =
            DecompositionSpec::new(g.clone(), ModelKind::Lae).with_subsets(vec![vec![e("s", "a")], vec![e("s", "b")]]);
        for safety in [false, true] {
            let sol = solve_with_k(&spec.clone().with_safety(safety), 1, backend().as_ref()).unwrap();
            assert_eq!(sol.status, SolutionStatus::Infeasible);
        }
    }

    #[test]
    fn validation_flags_corruption() {
        let spec = DecompositionSpec::new(fixtures::diamond(), ModelKind::Fd);
        let mut sol = solve_min_flow_decomp(&spec, backend().as_ref()).unwrap();
        sol.weights[0] += 1;
        let report = validate_solution(&spec, &sol);
        assert!(!report.ok);
        assert_eq!(report.residuals.iter().filter(|r| !r.ok).count(), 2);
    }

    #[test]
    fn exhaustive_backend_agrees_on_diamond() {
        let spec = DecompositionSpec::new(fixtures::diamond(), ModelKind::Fd);
        let sol = solve_k_fd(&spec, 2, &Exhaustive::default()).unwrap();
        assert_eq!(sol.weights, vec![3, 2]);
    }

    #[test]
    fn json_shape() {
        let spec = DecompositionSpec::new(fixtures::diamond(), ModelKind::Fd);
        let sol = solve_min_flow_decomp(&spec, backend().as_ref()).unwrap();
        let j = sol.to_json(&spec.graph, false);
        assert_eq!(j["status"], "Optimal");
        assert_eq!(j["walks"][0], serde_json::json!(["s", "b", "t"]));
        assert!(j["stats"]["fixedOne"].is_u64());
    }
}
