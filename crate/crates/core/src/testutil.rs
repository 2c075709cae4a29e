//! Random instance generators and brute-force enumerators shared by unit and
//! integration tests. Not part of the stable API.

use rand::Rng;

use crate::graph::{Graph, GraphBuilder, VertexId};

/// Random s-t graph with `n` in `3..=max_n` vertices (`s` = "v0", `t` = "v{n-1}")
/// and about `density * n` edges. Self-loops on internal vertices are allowed;
/// not every vertex is guaranteed to lie on an s-t walk.
pub fn random_st_graph<R: Rng>(rng: &mut R, max_n: usize, density: f64) -> Graph {
    let n = rng.random_range(3..=max_n.max(3));
    random_st_graph_n(rng, n, density)
}

pub fn random_st_graph_n<R: Rng>(rng: &mut R, n: usize, density: f64) -> Graph {
    assert!(n >= 3);
    let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let (s, t) = (0, n - 1);
    let mut b = GraphBuilder::new();
    for name in &names {
        b.vertex(name);
    }
    let target = ((density * n as f64).round() as usize).max(2);
    let mut pairs = std::collections::HashSet::new();
    // A spine through a random subset keeps most instances connected.
    let mut spine = vec![s];
    for v in 1..n - 1 {
        if rng.random_bool(0.5) {
            spine.push(v);
        }
    }
    spine.push(t);
    for w in spine.windows(2) {
        pairs.insert((w[0], w[1]));
    }
    let mut attempts = 0;
    while pairs.len() < target && attempts < 50 * target {
        attempts += 1;
        let u = rng.random_range(0..n - 1);
        let v = rng.random_range(1..n);
        if u == v && rng.random_bool(0.7) {
            continue;
        }
        pairs.insert((u, v));
    }
    let mut pairs: Vec<_> = pairs.into_iter().collect();
    pairs.sort_unstable();
    for (u, v) in pairs {
        let w = rng.random_range(1..=9);
        b.edge(&names[u], &names[v], w).unwrap();
    }
    b.build(&names[s], &names[t]).unwrap()
}

/// All s-t walks with at most `max_edges` edges, as vertex sequences.
pub fn st_walks_up_to(g: &Graph, max_edges: usize) -> Vec<Vec<VertexId>> {
    let mut out = Vec::new();
    let mut walk = vec![g.source()];
    extend_walks(g, max_edges, &mut walk, &mut out);
    out
}

fn extend_walks(g: &Graph, max_edges: usize, walk: &mut Vec<VertexId>, out: &mut Vec<Vec<VertexId>>) {
    let last = *walk.last().unwrap();
    if last == g.sink() {
        out.push(walk.clone());
        return;
    }
    if walk.len() > max_edges {
        return;
    }
    for v in g.successors(last).collect::<Vec<_>>() {
        walk.push(v);
        extend_walks(g, max_edges, walk, out);
        walk.pop();
    }
}

/// Edge traversal counts of a vertex walk.
pub fn edge_counts(g: &Graph, walk: &[VertexId]) -> Vec<u64> {
    let mut counts = vec![0; g.m()];
    for w in walk.windows(2) {
        counts[g.find_edge(w[0], w[1]).expect("walk follows edges")] += 1;
    }
    counts
}

/// True iff `v` is reachable from `from` after deleting vertex `removed`
/// (following edges backwards when `backward`).
pub fn reachable_avoiding(g: &Graph, from: VertexId, removed: VertexId, backward: bool) -> Vec<bool> {
    let mut seen = vec![false; g.n()];
    if from == removed {
        return seen;
    }
    seen[from] = true;
    let mut stack = vec![from];
    while let Some(u) = stack.pop() {
        let next: Vec<VertexId> = if backward { g.predecessors(u).collect() } else { g.successors(u).collect() };
        for w in next {
            if w != removed && !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen
}

/// Dominator sets by vertex removal: `dom[v]` lists every `u` such that every
/// root-v path (root = s, or t on the reversed graph) contains `u`. `None` for
/// vertices not connected to the root.
pub fn removal_dominators(g: &Graph, backward: bool) -> Vec<Option<Vec<VertexId>>> {
    let root = if backward { g.sink() } else { g.source() };
    let base = g.reachable_from(root, backward);
    (0..g.n())
        .map(|v| {
            if !base[v] {
                return None;
            }
            let mut doms: Vec<VertexId> =
                (0..g.n()).filter(|&u| u == v || u == root || !reachable_avoiding(g, root, u, backward)[v]).collect();
            doms.sort_unstable();
            Some(doms)
        })
        .collect()
}

/// Extension of `v` computed purely from removal-oracle dominator sets:
/// s-dominators ordered by set size, then t-dominators ordered the other way.
pub fn oracle_extension(
    sdom: &[Option<Vec<VertexId>>],
    tdom: &[Option<Vec<VertexId>>],
    v: VertexId,
) -> Option<Vec<VertexId>> {
    let sd = sdom[v].as_ref()?;
    let td = tdom[v].as_ref()?;
    // Dominators of v form a chain; a deeper dominator has more dominators itself.
    let mut s_chain = sd.clone();
    s_chain.sort_by_key(|&u| sdom[u].as_ref().map_or(0, |d| d.len()));
    let mut t_chain = td.clone();
    t_chain.sort_by_key(|&u| std::cmp::Reverse(tdom[u].as_ref().map_or(0, |d| d.len())));
    let mut ext = s_chain;
    ext.extend(t_chain.into_iter().skip(1));
    Some(ext)
}

pub fn is_subsequence<T: PartialEq>(needle: &[T], hay: &[T]) -> bool {
    let mut it = hay.iter();
    needle.iter().all(|x| it.any(|y| y == x))
}
