//! MILP building blocks shared by the decomposition models.
//!
//! One walk block per solution walk encodes "x is the edge multiset of an
//! s-t walk" with flow conservation plus a distance-labelled arborescence
//! selected by y. Products of a bounded integer with another integer are
//! linearized through a binary expansion of the first factor. Fixing pins
//! safe sequences to distinct walks and removes edges those walks cannot use.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::graph::{Condensation, EdgeId, Graph, ReachabilityIndex};
use crate::safety::SafeSequence;
use crate::solver::{LinExpr, Model, Var};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MilpError {
    #[error("traversal bound of edge {0} must be at least 1")]
    InvalidBound(String),
    #[error("product bound must be non-negative, got {0}")]
    NegativeBound(i64),
    #[error("subset {0} is empty")]
    EmptySubset(usize),
    #[error("edge id {0} is not in the graph")]
    EdgeNotInGraph(usize),
    #[error("antichain has {antichain} edges but only {k} walks are available")]
    AntichainLargerThanK { antichain: usize, k: usize },
    #[error("edge {edge} of walk {walk} is both required and forbidden")]
    ConflictingFix { edge: String, walk: usize },
    #[error("fixing refers to walk {walk} but the model has {k}")]
    WalkOutOfRange { walk: usize, k: usize },
}

/// Variables of one walk.
#[derive(Debug, Clone)]
pub struct WalkBlock {
    pub walk: usize,
    /// Traversal count per edge.
    pub x: Vec<Var>,
    /// Arborescence indicator per edge.
    pub y: Vec<Var>,
    /// Distance label per vertex.
    pub d: Vec<Var>,
}

/// Adds the walk encoding for walk `i`; `bounds[e]` caps the traversals of `e`.
pub fn add_walk_block(model: &mut Model, g: &Graph, i: usize, bounds: &[u64]) -> Result<WalkBlock, MilpError> {
    if let Some(e) = (0..g.m()).find(|&e| bounds[e] == 0) {
        return Err(MilpError::InvalidBound(g.edge_label(e)));
    }
    let n = g.n() as f64;
    let x: Vec<Var> =
        (0..g.m()).map(|e| model.integer(format!("x[{},{i}]", g.edge_label(e)), 0, bounds[e] as i64)).collect();
    let y: Vec<Var> = (0..g.m())
        .map(|e| {
            let v = model.binary(format!("y[{},{i}]", g.edge_label(e)));
            if g.edge(e).is_self_loop() {
                model.set_bounds(v, 0.0, 0.0);
            }
            v
        })
        .collect();
    let d: Vec<Var> = (0..g.n())
        .map(|v| {
            let ub = if v == g.source() { 0 } else { g.n() as i64 };
            model.integer(format!("d[{},{i}]", g.name(v)), 0, ub)
        })
        .collect();

    for v in 0..g.n() {
        let mut net = LinExpr::new();
        for &e in g.out_edges(v) {
            net.add_term(x[e], 1.0);
        }
        for &e in g.in_edges(v) {
            net.add_term(x[e], -1.0);
        }
        let rhs = if v == g.source() {
            1.0
        } else if v == g.sink() {
            -1.0
        } else {
            0.0
        };
        model.eq(format!("flow[{},{i}]", g.name(v)), net, rhs);
    }
    for e in 0..g.m() {
        model.le(format!("ysel[{},{i}]", g.edge_label(e)), y[e] - x[e], 0.0);
    }
    for v in 0..g.n() {
        let ins = g.in_edges(v);
        if v == g.source() || ins.is_empty() {
            continue;
        }
        let big_m = ins.len() as f64 * ins.iter().map(|&e| bounds[e]).max().unwrap() as f64;
        let mut reach = LinExpr::sum(ins.iter().map(|&e| x[e]));
        for &e in ins {
            reach.add_term(y[e], -big_m);
        }
        model.le(format!("entered[{},{i}]", g.name(v)), reach, 0.0);
        model.le(format!("onein[{},{i}]", g.name(v)), LinExpr::sum(ins.iter().map(|&e| y[e])), 1.0);
    }
    for e in 0..g.m() {
        let edge = g.edge(e);
        if edge.is_self_loop() {
            continue;
        }
        // d_head >= d_tail + 1 - n (1 - y)
        model.ge(format!("dist[{},{i}]", g.edge_label(e)), d[edge.head] - d[edge.tail] - y[e] * n, 1.0 - n);
    }
    Ok(WalkBlock { walk: i, x, y, d })
}

/// x written as `constant + Σ 2^j bits[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryExpansion {
    pub bits: Vec<Var>,
    pub constant: i64,
}

/// Binary expansion of integer `x`, reusing the model's current bounds:
/// fixed variables need no bits and a 0/1 variable is its own bit.
pub fn expand_binary(model: &mut Model, x: Var, xbar: i64, name: &str) -> Result<BinaryExpansion, MilpError> {
    if xbar < 0 {
        return Err(MilpError::NegativeBound(xbar));
    }
    let (lb, ub) = model.bounds(x);
    let ub = (ub as i64).min(xbar);
    if lb as i64 == ub || ub <= 0 {
        return Ok(BinaryExpansion { bits: Vec::new(), constant: ub.max(0) });
    }
    if ub == 1 {
        return Ok(BinaryExpansion { bits: vec![x], constant: 0 });
    }
    let t = 64 - (ub as u64).leading_zeros() as usize;
    let bits: Vec<Var> = (0..t).map(|j| model.binary(format!("{name}.b{j}"))).collect();
    let mut sum = LinExpr::from(x);
    for (j, &b) in bits.iter().enumerate() {
        sum.add_term(b, -((1u64 << j) as f64));
    }
    model.eq(format!("{name}.bin"), sum, 0.0);
    Ok(BinaryExpansion { bits, constant: 0 })
}

/// Linear expression equal to `x * y` where `x` is given by its expansion and
/// `y` ranges over `[ylo, yhi]`.
pub fn product_with(model: &mut Model, xs: &BinaryExpansion, y: Var, ylo: i64, yhi: i64, name: &str) -> LinExpr {
    let mut out = LinExpr::term(y, xs.constant as f64);
    let (ylo, yhi) = (ylo as f64, yhi as f64);
    for (j, &b) in xs.bits.iter().enumerate() {
        let z = model.add_var(format!("{name}.z{j}"), crate::solver::VarKind::Integer, ylo.min(0.0), yhi.max(0.0));
        model.le(format!("{name}.z{j}a"), z - b * yhi, 0.0);
        model.ge(format!("{name}.z{j}b"), z - b * ylo, 0.0);
        model.le(format!("{name}.z{j}c"), z - y - b * ylo, -ylo);
        model.ge(format!("{name}.z{j}d"), z - y - b * yhi, -yhi);
        out.add_term(z, (1u64 << j) as f64);
    }
    out
}

/// `x * y` for `x` in `[0, xbar]` and `y` in `[ylo, yhi]`.
pub fn linearize_product(
    model: &mut Model,
    x: Var,
    xbar: i64,
    y: Var,
    ylo: i64,
    yhi: i64,
    name: &str,
) -> Result<LinExpr, MilpError> {
    let xs = expand_binary(model, x, xbar, name)?;
    Ok(product_with(model, &xs, y, ylo, yhi, name))
}

/// Requires each subset to be contained in at least one walk.
pub fn add_subset_constraints(
    model: &mut Model,
    g: &Graph,
    blocks: &[WalkBlock],
    subsets: &[Vec<EdgeId>],
) -> Result<(), MilpError> {
    for (j, s) in subsets.iter().enumerate() {
        if s.is_empty() {
            return Err(MilpError::EmptySubset(j));
        }
        if let Some(&e) = s.iter().find(|&&e| e >= g.m()) {
            return Err(MilpError::EdgeNotInGraph(e));
        }
    }
    let mut presence: BTreeMap<(usize, EdgeId), Var> = BTreeMap::new();
    for (j, s) in subsets.iter().enumerate() {
        let mut edges = s.clone();
        edges.sort_unstable();
        edges.dedup();
        let mut any = LinExpr::new();
        for blk in blocks {
            let i = blk.walk;
            let sel = model.binary(format!("sub[{j},{i}]"));
            let mut covered = LinExpr::new();
            for &e in &edges {
                let p = *presence.entry((i, e)).or_insert_with(|| presence_var(model, g, blk, e));
                covered.add_term(p, 1.0);
            }
            covered.add_term(sel, -(edges.len() as f64));
            model.ge(format!("subcov[{j},{i}]"), covered, 0.0);
            any.add_term(sel, 1.0);
        }
        model.ge(format!("subany[{j}]"), any, 1.0);
    }
    Ok(())
}

fn presence_var(model: &mut Model, g: &Graph, blk: &WalkBlock, e: EdgeId) -> Var {
    let x = blk.x[e];
    let (_, ub) = model.bounds(x);
    if ub <= 1.0 {
        return x;
    }
    let p = model.binary(format!("p[{},{}]", g.edge_label(e), blk.walk));
    model.le(format!("p[{},{}]lo", g.edge_label(e), blk.walk), p - x, 0.0);
    model.le(format!("p[{},{}]hi", g.edge_label(e), blk.walk), x - p * ub, 0.0);
    p
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixOne {
    pub edge: EdgeId,
    pub walk: usize,
    pub lower: u64,
    /// Exactly `lower` (= 1): the edge joins two SCCs, so no walk repeats it.
    pub exact: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FixingPlan {
    pub fix_one: Vec<FixOne>,
    pub fix_zero: Vec<(EdgeId, usize)>,
    /// Edges between SCCs: binary in every walk.
    pub binary_edges: Vec<EdgeId>,
}

/// Assigns `sequences[i]` to walk `i` and derives the implied fixings.
pub fn plan_fixing(
    g: &Graph,
    cond: &Condensation,
    reach: &ReachabilityIndex,
    sequences: &[&SafeSequence],
    k: usize,
) -> Result<FixingPlan, MilpError> {
    if sequences.len() > k {
        return Err(MilpError::AntichainLargerThanK { antichain: sequences.len(), k });
    }
    let binary_edges: Vec<EdgeId> = (0..g.m()).filter(|&e| cond.is_inter(g, e)).collect();
    let mut plan = FixingPlan { binary_edges, ..Default::default() };
    for (i, seq) in sequences.iter().enumerate() {
        let mut counts: BTreeMap<EdgeId, u64> = BTreeMap::new();
        for &e in &seq.edges {
            *counts.entry(e).or_default() += 1;
        }
        for (&e, &c) in &counts {
            let exact = cond.is_inter(g, e);
            plan.fix_one.push(FixOne { edge: e, walk: i, lower: if exact { 1 } else { c }, exact });
        }
        let first = seq.first_vertex(g);
        let last = seq.last_vertex(g);
        for e in 0..g.m() {
            if counts.contains_key(&e) || g.is_auxiliary(e) {
                continue;
            }
            let (u, v) = (g.edge(e).tail, g.edge(e).head);
            let before = reach.reaches(v, first);
            let after = reach.reaches(last, u);
            let between = seq.edges.windows(2).any(|p| {
                let (b, c) = (g.edge(p[0]).head, g.edge(p[1]).tail);
                reach.reaches(b, u) && reach.reaches(v, c)
            });
            if !(before || after || between) {
                plan.fix_zero.push((e, i));
            }
        }
    }
    Ok(plan)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FixingStats {
    pub fixed_one: usize,
    pub fixed_zero: usize,
    pub tightened_binary: usize,
}

/// Applies `plan` to the x bounds of `blocks`.
pub fn apply_fixing(
    model: &mut Model,
    g: &Graph,
    blocks: &[WalkBlock],
    plan: &FixingPlan,
) -> Result<FixingStats, MilpError> {
    let k = blocks.len();
    let mut stats = FixingStats::default();
    for blk in blocks {
        for &e in &plan.binary_edges {
            let (lb, ub) = model.bounds(blk.x[e]);
            if ub > 1.0 {
                model.set_bounds(blk.x[e], lb, 1.0);
                stats.tightened_binary += 1;
            }
        }
    }
    let conflict = |e: EdgeId, walk: usize| MilpError::ConflictingFix { edge: g.edge_label(e), walk };
    for f in &plan.fix_one {
        if f.walk >= k {
            return Err(MilpError::WalkOutOfRange { walk: f.walk, k });
        }
        let x = blocks[f.walk].x[f.edge];
        let (lb, ub) = model.bounds(x);
        let lower = lb.max(f.lower as f64);
        let upper = if f.exact { ub.min(f.lower as f64) } else { ub };
        if lower > upper {
            return Err(conflict(f.edge, f.walk));
        }
        model.set_bounds(x, lower, upper);
        stats.fixed_one += 1;
    }
    for &(e, walk) in &plan.fix_zero {
        if walk >= k {
            return Err(MilpError::WalkOutOfRange { walk, k });
        }
        let x = blocks[walk].x[e];
        if model.bounds(x).0 > 0.0 {
            return Err(conflict(e, walk));
        }
        model.set_bounds(x, 0.0, 0.0);
        stats.fixed_zero += 1;
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{condense, fixtures, reachability};
    use crate::safety::edge_safe_sequences;
    use crate::solver::exhaustive::Exhaustive;
    use crate::solver::{Backend, Sense, Status};

    fn block_model(g: &Graph, bound: u64) -> (Model, WalkBlock) {
        let mut m = Model::new();
        let blk = add_walk_block(&mut m, g, 0, &vec![bound; g.m()]).unwrap();
        (m, blk)
    }

    #[test]
    fn diamond_block_feasible_points() {
        let g = fixtures::diamond();
        let (m, blk) = block_model(&g, 1);
        let pts = Exhaustive::default().enumerate_projections(&m, &blk.x).unwrap();
        let sa = g.edge_by_names("s", "a").unwrap();
        let at = g.edge_by_names("a", "t").unwrap();
        let mut want = Vec::new();
        for pair in [[sa, at], [g.edge_by_names("s", "b").unwrap(), g.edge_by_names("b", "t").unwrap()]] {
            let mut v = vec![0i64; g.m()];
            for e in pair {
                v[e] = 1;
            }
            want.push(v);
        }
        want.sort();
        assert_eq!(pts.into_iter().collect::<Vec<_>>(), want);
    }

    #[test]
    fn cycle_block_witness_and_detached_cycle() {
        let g = fixtures::cycle();
        let e = |a: &str, b: &str| g.edge_by_names(a, b).unwrap();
        let (mut m, blk) = block_model(&g, 2);
        for (edge, val) in [(e("s", "a"), 1.0), (e("a", "b"), 1.0), (e("b", "a"), 1.0), (e("a", "t"), 1.0)] {
            m.set_bounds(blk.x[edge], val, val);
        }
        let r = Exhaustive::default().solve(&m).unwrap();
        assert_eq!(r.status, Status::Optimal);
        assert_eq!(r.int_value(blk.y[e("s", "a")]), 1);
        assert_eq!(r.int_value(blk.y[e("a", "b")]), 1);
        assert_eq!(r.int_value(blk.y[e("b", "a")]), 0);

        // A cycle not entered from s cannot be selected.
        let g2 = crate::graph::build_graph(
            &[("s", "c", 1), ("c", "t", 1), ("c", "a", 1), ("a", "b", 1), ("b", "a", 1), ("b", "t", 1)],
            "s",
            "t",
        )
        .unwrap();
        let (mut m2, blk2) = block_model(&g2, 2);
        let e2 = |a: &str, b: &str| g2.edge_by_names(a, b).unwrap();
        for (edge, val) in [
            (e2("s", "c"), 1.0),
            (e2("c", "t"), 1.0),
            (e2("c", "a"), 0.0),
            (e2("a", "b"), 1.0),
            (e2("b", "a"), 1.0),
            (e2("b", "t"), 0.0),
        ] {
            m2.set_bounds(blk2.x[edge], val, val);
        }
        assert_eq!(Exhaustive::default().solve(&m2).unwrap().status, Status::Infeasible);
    }

    #[test]
    fn zero_bound_rejected() {
        let g = fixtures::diamond();
        let mut m = Model::new();
        assert_eq!(add_walk_block(&mut m, &g, 0, &[1, 0, 1, 1]).unwrap_err(), MilpError::InvalidBound("s>b".into()));
    }

    #[test]
    fn product_values() {
        for xbar in [1i64, 5] {
            let mut m = Model::new();
            let x = m.integer("x", 0, xbar);
            let y = m.integer("y", 0, 8);
            let expr = linearize_product(&mut m, x, xbar, y, 0, 8, "p").unwrap();
            if xbar == 5 {
                assert_eq!(m.num_vars(), 2 + 3 + 3);
            }
            for xv in 0..=xbar {
                let mut m2 = m.clone();
                m2.set_bounds(x, xv as f64, xv as f64);
                m2.set_bounds(y, 4.0, 4.0);
                let r = Exhaustive::default().solve(&m2).unwrap();
                assert_eq!(expr.eval(r.values.as_ref().unwrap()), (xv * 4) as f64);
            }
        }
        let mut m = Model::new();
        let x = m.integer("x", 0, 1);
        let y = m.integer("y", 0, 1);
        assert_eq!(linearize_product(&mut m, x, -1, y, 0, 1, "p").unwrap_err(), MilpError::NegativeBound(-1));
    }

    fn cover_model(g: &Graph, k: usize, subsets: &[Vec<EdgeId>]) -> (Model, Vec<WalkBlock>) {
        let mut m = Model::new();
        let blocks: Vec<_> = (0..k).map(|i| add_walk_block(&mut m, g, i, &vec![2; g.m()]).unwrap()).collect();
        add_subset_constraints(&mut m, g, &blocks, subsets).unwrap();
        (m, blocks)
    }

    #[test]
    fn subset_constraints() {
        let g = fixtures::diamond();
        let e = |a: &str, b: &str| g.edge_by_names(a, b).unwrap();
        let (m, _) = cover_model(&g, 1, &[vec![e("s", "a")], vec![e("s", "b")]]);
        assert_eq!(Exhaustive::default().solve(&m).unwrap().status, Status::Infeasible);

        let (m, blocks) = cover_model(&g, 2, &[vec![e("s", "a"), e("a", "t")]]);
        let keys: Vec<Var> = blocks.iter().flat_map(|b| b.x.clone()).collect();
        let pts = Exhaustive::default().enumerate_projections(&m, &keys).unwrap();
        assert!(!pts.is_empty());
        for p in pts {
            assert!((0..2).any(|i| p[i * g.m() + e("s", "a")] > 0 && p[i * g.m() + e("a", "t")] > 0));
        }

        let c = fixtures::cycle();
        let (mut m, blocks) =
            cover_model(&c, 1, &[vec![c.edge_by_names("a", "b").unwrap(), c.edge_by_names("a", "t").unwrap()]]);
        m.set_objective(Sense::Minimize, LinExpr::sum(blocks[0].x.clone()));
        let r = Exhaustive::default().solve(&m).unwrap();
        assert_eq!(r.objective, Some(4.0));

        let mut m = Model::new();
        assert_eq!(add_subset_constraints(&mut m, &g, &[], &[vec![]]).unwrap_err(), MilpError::EmptySubset(0));
        assert_eq!(add_subset_constraints(&mut m, &g, &[], &[vec![9]]).unwrap_err(), MilpError::EdgeNotInGraph(9));
    }

    #[test]
    fn diamond_plan() {
        let g = fixtures::diamond();
        let e = |a: &str, b: &str| g.edge_by_names(a, b).unwrap();
        let seqs = edge_safe_sequences(&g, &(0..g.m()).collect::<Vec<_>>()).unwrap();
        let refs: Vec<&SafeSequence> = seqs.iter().collect();
        let cond = condense(&g);
        let plan = plan_fixing(&g, &cond, &reachability(&g), &refs, 2).unwrap();
        let mut zeros = plan.fix_zero.clone();
        zeros.sort();
        let mut want = vec![(e("s", "b"), 0), (e("b", "t"), 0), (e("s", "a"), 1), (e("a", "t"), 1)];
        want.sort();
        assert_eq!(zeros, want);
        assert!(plan.fix_one.iter().all(|f| f.exact && f.lower == 1));
        assert_eq!(plan.fix_one.len(), 4);
        assert_eq!(
            plan_fixing(&g, &cond, &reachability(&g), &refs, 1).unwrap_err(),
            MilpError::AntichainLargerThanK { antichain: 2, k: 1 }
        );
    }

    #[test]
    fn cycle_plan_and_conflict() {
        let g = fixtures::cycle();
        let e = |a: &str, b: &str| g.edge_by_names(a, b).unwrap();
        let seqs = edge_safe_sequences(&g, &(0..g.m()).collect::<Vec<_>>()).unwrap();
        let cond = condense(&g);
        let plan = plan_fixing(&g, &cond, &reachability(&g), &[&seqs[0]], 1).unwrap();
        let find = |edge| plan.fix_one.iter().find(|f| f.edge == edge).copied().unwrap();
        assert_eq!(find(e("s", "a")), FixOne { edge: e("s", "a"), walk: 0, lower: 1, exact: true });
        assert_eq!(find(e("a", "t")), FixOne { edge: e("a", "t"), walk: 0, lower: 1, exact: true });
        assert_eq!(find(e("a", "b")), FixOne { edge: e("a", "b"), walk: 0, lower: 1, exact: false });
        assert_eq!(find(e("b", "a")), FixOne { edge: e("b", "a"), walk: 0, lower: 1, exact: false });

        let mut m = Model::new();
        let blk = add_walk_block(&mut m, &g, 0, &[2; 4]).unwrap();
        let bad = FixingPlan {
            fix_one: vec![FixOne { edge: e("a", "b"), walk: 0, lower: 1, exact: false }],
            fix_zero: vec![(e("a", "b"), 0)],
            binary_edges: vec![],
        };
        assert_eq!(
            apply_fixing(&mut m, &g, &[blk], &bad).unwrap_err(),
            MilpError::ConflictingFix { edge: "a>b".into(), walk: 0 }
        );
    }
}
