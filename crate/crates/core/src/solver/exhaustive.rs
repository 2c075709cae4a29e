//! Reference backend: depth-first search over integer boxes with bound
//! propagation. Exact but exponential; meant for oracle tests on models with
//! a handful of small-range variables.

use std::collections::BTreeSet;
use std::time::Instant;

use super::{Backend, Cmp, Model, Sense, SolveResult, SolverError, Status, Var, VarKind};

const EPS: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct Exhaustive {
    /// Search nodes before giving up with TimedOut.
    pub max_nodes: u64,
}

impl Default for Exhaustive {
    fn default() -> Self {
        Exhaustive { max_nodes: 20_000_000 }
    }
}

struct Row {
    terms: Vec<(usize, f64)>,
    lo: f64,
    hi: f64,
}

struct Search {
    rows: Vec<Row>,
    var_rows: Vec<Vec<usize>>,
    cost: Vec<f64>,
    order: Vec<usize>,
    nodes: u64,
    max_nodes: u64,
    deadline: f64,
    start: Instant,
    aborted: bool,
    incumbent: Option<(f64, Vec<i64>)>,
}

type Bounds = (Vec<i64>, Vec<i64>);

impl Search {
    fn new(model: &Model, max_nodes: u64) -> Result<(Self, Bounds), SolverError> {
        model.validate()?;
        if let Some(v) = model.vars().iter().find(|v| v.kind == VarKind::Continuous) {
            return Err(SolverError::MalformedModel(format!(
                "exhaustive backend needs integer variables, {} is continuous",
                v.name
            )));
        }
        let n = model.num_vars();
        let mut rows = Vec::new();
        let mut var_rows = vec![Vec::new(); n];
        for c in model.constraints() {
            let (lo, hi) = match c.cmp {
                Cmp::Le => (f64::NEG_INFINITY, c.rhs),
                Cmp::Ge => (c.rhs, f64::INFINITY),
                Cmp::Eq => (c.rhs, c.rhs),
            };
            let terms: Vec<(usize, f64)> = c.expr.terms.iter().map(|&(v, k)| (v.0, k)).collect();
            for &(v, _) in &terms {
                var_rows[v].push(rows.len());
            }
            rows.push(Row { terms, lo, hi });
        }
        let flip = if model.sense() == Sense::Maximize { -1.0 } else { 1.0 };
        let mut cost = vec![0.0; n];
        for &(v, k) in &model.objective().terms {
            cost[v.0] += k * flip;
        }
        let lb = model.vars().iter().map(|v| (v.lb - EPS).ceil() as i64).collect();
        let ub = model.vars().iter().map(|v| (v.ub + EPS).floor() as i64).collect();
        let search = Search {
            rows,
            var_rows,
            cost,
            order: (0..n).collect(),
            nodes: 0,
            max_nodes,
            deadline: model.params.time_limit,
            start: Instant::now(),
            aborted: false,
            incumbent: None,
        };
        Ok((search, (lb, ub)))
    }

    /// Tightens bounds to a fixpoint; false on infeasibility.
    fn propagate(&self, lb: &mut [i64], ub: &mut [i64]) -> bool {
        if lb.iter().zip(ub.iter()).any(|(l, u)| l > u) {
            return false;
        }
        let mut queued = vec![true; self.rows.len()];
        let mut queue: Vec<usize> = (0..self.rows.len()).collect();
        while let Some(r) = queue.pop() {
            queued[r] = false;
            let row = &self.rows[r];
            let (mut min_act, mut max_act) = (0.0, 0.0);
            for &(v, c) in &row.terms {
                let (a, b) = (c * lb[v] as f64, c * ub[v] as f64);
                min_act += a.min(b);
                max_act += a.max(b);
            }
            if min_act > row.hi + EPS || max_act < row.lo - EPS {
                return false;
            }
            for &(v, c) in &row.terms {
                let (a, b) = (c * lb[v] as f64, c * ub[v] as f64);
                let rest_min = min_act - a.min(b);
                let rest_max = max_act - a.max(b);
                let (mut nl, mut nu) = (lb[v], ub[v]);
                // c*x <= hi - rest_min and c*x >= lo - rest_max
                if row.hi.is_finite() {
                    let lim = (row.hi - rest_min) / c;
                    if c > 0.0 {
                        nu = nu.min((lim + EPS).floor() as i64);
                    } else {
                        nl = nl.max((lim - EPS).ceil() as i64);
                    }
                }
                if row.lo.is_finite() {
                    let lim = (row.lo - rest_max) / c;
                    if c > 0.0 {
                        nl = nl.max((lim - EPS).ceil() as i64);
                    } else {
                        nu = nu.min((lim + EPS).floor() as i64);
                    }
                }
                if nl > nu {
                    return false;
                }
                if (nl, nu) != (lb[v], ub[v]) {
                    lb[v] = nl;
                    ub[v] = nu;
                    for &r2 in &self.var_rows[v] {
                        if !queued[r2] {
                            queued[r2] = true;
                            queue.push(r2);
                        }
                    }
                }
            }
        }
        true
    }

    fn tick(&mut self) -> bool {
        self.nodes += 1;
        if self.nodes > self.max_nodes || (self.nodes % 4096 == 0 && self.start.elapsed().as_secs_f64() > self.deadline)
        {
            self.aborted = true;
        }
        !self.aborted
    }

    fn box_min_cost(&self, lb: &[i64], ub: &[i64]) -> f64 {
        self.cost.iter().enumerate().map(|(v, &c)| if c >= 0.0 { c * lb[v] as f64 } else { c * ub[v] as f64 }).sum()
    }

    fn branch_var(&self, lb: &[i64], ub: &[i64]) -> Option<usize> {
        self.order.iter().copied().find(|&v| lb[v] < ub[v])
    }

    fn values_for(&self, v: usize, lb: i64, ub: i64) -> Vec<i64> {
        if self.cost[v] < 0.0 {
            (lb..=ub).rev().collect()
        } else {
            (lb..=ub).collect()
        }
    }

    /// Branch and bound; keeps the best point in `incumbent`.
    fn optimize(&mut self, mut lb: Vec<i64>, mut ub: Vec<i64>, first_only: bool) {
        if !self.tick() || !self.propagate(&mut lb, &mut ub) {
            return;
        }
        if first_only && self.incumbent.is_some() {
            return;
        }
        if let Some((best, _)) = &self.incumbent {
            if self.box_min_cost(&lb, &ub) >= best - 1e-9 {
                return;
            }
        }
        match self.branch_var(&lb, &ub) {
            None => {
                let obj = self.box_min_cost(&lb, &ub);
                if self.incumbent.as_ref().is_none_or(|(best, _)| obj < *best) {
                    self.incumbent = Some((obj, lb));
                }
            }
            Some(v) => {
                for val in self.values_for(v, lb[v], ub[v]) {
                    let (mut l2, mut u2) = (lb.clone(), ub.clone());
                    l2[v] = val;
                    u2[v] = val;
                    self.optimize(l2, u2, first_only);
                    if self.aborted || (first_only && self.incumbent.is_some()) {
                        return;
                    }
                }
            }
        }
    }

    fn project(&mut self, mut lb: Vec<i64>, mut ub: Vec<i64>, keys: &[usize], out: &mut BTreeSet<Vec<i64>>) {
        if !self.tick() || !self.propagate(&mut lb, &mut ub) {
            return;
        }
        match keys.iter().copied().find(|&v| lb[v] < ub[v]) {
            Some(v) => {
                for val in lb[v]..=ub[v] {
                    let (mut l2, mut u2) = (lb.clone(), ub.clone());
                    l2[v] = val;
                    u2[v] = val;
                    self.project(l2, u2, keys, out);
                    if self.aborted {
                        return;
                    }
                }
            }
            None => {
                let key: Vec<i64> = keys.iter().map(|&v| lb[v]).collect();
                if out.contains(&key) {
                    return;
                }
                self.incumbent = None;
                self.optimize(lb, ub, true);
                if self.incumbent.take().is_some() {
                    out.insert(key);
                }
            }
        }
    }
}

impl Exhaustive {
    /// Every assignment of `keys` that extends to a feasible point.
    pub fn enumerate_projections(&self, model: &Model, keys: &[Var]) -> Result<BTreeSet<Vec<i64>>, SolverError> {
        let (mut search, (lb, ub)) = Search::new(model, self.max_nodes)?;
        let keys: Vec<usize> = keys.iter().map(|v| v.0).collect();
        let mut out = BTreeSet::new();
        search.project(lb, ub, &keys, &mut out);
        if search.aborted {
            return Err(SolverError::MalformedModel("projection enumeration exceeded the search budget".into()));
        }
        Ok(out)
    }
}

impl Backend for Exhaustive {
    fn name(&self) -> &'static str {
        "exhaustive"
    }

    fn solve(&self, model: &Model) -> Result<SolveResult, SolverError> {
        let (mut search, (lb, ub)) = Search::new(model, self.max_nodes)?;
        search.optimize(lb, ub, false);
        let wall_seconds = search.start.elapsed().as_secs_f64();
        let aborted = search.aborted;
        let found = search.incumbent.take();
        let status = match (&found, aborted) {
            (Some(_), false) => Status::Optimal,
            (Some(_), true) => Status::Feasible,
            (None, false) => Status::Infeasible,
            (None, true) => Status::TimedOut,
        };
        let values: Option<Vec<f64>> = found.map(|(_, pt)| pt.iter().map(|&x| x as f64).collect());
        let objective = values.as_ref().map(|v| model.objective().eval(v));
        Ok(SolveResult { status, values, objective, wall_seconds })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_of_knapsack() {
        let mut m = Model::new();
        let x = m.integer("x", 0, 3);
        let y = m.integer("y", 0, 3);
        let z = m.binary("z");
        m.le("cap", x + y, 3.0);
        m.ge("link", x - z * 3.0, -2.0);
        let pts = Exhaustive::default().enumerate_projections(&m, &[x]).unwrap();
        assert_eq!(pts.into_iter().collect::<Vec<_>>(), vec![vec![0], vec![1], vec![2], vec![3]]);
        let both = Exhaustive::default().enumerate_projections(&m, &[x, y]).unwrap();
        assert_eq!(both.len(), 10);
    }

    #[test]
    fn cyclic_distances_are_infeasible() {
        let mut m = Model::new();
        let a = m.integer("a", 0, 6);
        let b = m.integer("b", 0, 6);
        m.ge("ab", b - a, 1.0);
        m.ge("ba", a - b, 1.0);
        assert_eq!(Exhaustive::default().solve(&m).unwrap().status, Status::Infeasible);
    }

    #[test]
    fn continuous_rejected() {
        let mut m = Model::new();
        m.continuous("c", 0.0, 1.0);
        assert!(matches!(Exhaustive::default().solve(&m), Err(SolverError::MalformedModel(_))));
    }
}
