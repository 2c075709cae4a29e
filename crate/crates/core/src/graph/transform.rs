use std::collections::HashSet;

use super::{EdgeId, Graph, GraphBuilder, GraphError, VertexId};

/// Result of [`midpoint_transform`].
#[derive(Debug, Clone)]
pub struct Midpoints {
    pub graph: Graph,
    /// (midpoint vertex in `graph`, original edge id), one per subdivided edge.
    pub midpoints: Vec<(VertexId, EdgeId)>,
    /// For every original edge, the edge ids it became in `graph` (one or two).
    pub image: Vec<Vec<EdgeId>>,
}

impl Midpoints {
    /// Original edge subdivided by `v`, if `v` is a midpoint.
    pub fn original_edge(&self, v: VertexId) -> Option<EdgeId> {
        self.midpoints.iter().find(|(m, _)| *m == v).map(|&(_, e)| e)
    }
}

/// Subdivides every edge of `subset` with a fresh vertex. The first half keeps
/// the weight, the second half gets weight 0. Vertex ids of `g` are preserved.
pub fn midpoint_transform(g: &Graph, subset: &[EdgeId]) -> Result<Midpoints, GraphError> {
    let mut chosen = vec![false; g.m()];
    for &e in subset {
        if e >= g.m() {
            return Err(GraphError::EdgeNotInGraph(format!("#{e}"), String::new()));
        }
        chosen[e] = true;
    }
    let mut taken: HashSet<String> = g.names().iter().cloned().collect();
    let mut b = GraphBuilder::new();
    for name in g.names() {
        b.vertex(name);
    }
    let mut midpoints = Vec::new();
    let mut image = Vec::with_capacity(g.m());
    for (e, edge) in g.edges().iter().enumerate() {
        let (u, v) = (g.name(edge.tail), g.name(edge.head));
        if !chosen[e] {
            image.push(vec![b.push_edge(edge.tail, edge.head, g.weight(e), g.is_auxiliary(e))?]);
            continue;
        }
        let mut label = format!("{u}>{v}");
        while taken.contains(&label) {
            label.push('\'');
        }
        taken.insert(label.clone());
        let mid = b.vertex(&label);
        let first = b.push_edge(edge.tail, mid, g.weight(e), g.is_auxiliary(e))?;
        let second = b.push_edge(mid, edge.head, 0, g.is_auxiliary(e))?;
        midpoints.push((mid, e));
        image.push(vec![first, second]);
    }
    let graph = b.build(g.name(g.source()), g.name(g.sink()))?;
    Ok(Midpoints { graph, midpoints, image })
}

/// Result of unitig compaction.
#[derive(Debug, Clone)]
pub struct Compaction {
    pub graph: Graph,
    /// For every edge of `graph`, the vertex path (ids of the input graph) it stands for.
    pub paths: Vec<Vec<VertexId>>,
    /// For every input edge, the compacted edge containing it.
    pub edge_map: Vec<EdgeId>,
}

impl Compaction {
    /// Expands a vertex walk of the compacted graph into one of the input graph.
    pub fn expand_walk(&self, walk: &[VertexId]) -> Vec<VertexId> {
        let mut out = Vec::new();
        if let Some(&first) = walk.first() {
            out.push(self.original_vertex(first));
        }
        for pair in walk.windows(2) {
            let e = self.graph.find_edge(pair[0], pair[1]).expect("walk follows compacted edges");
            out.extend_from_slice(&self.paths[e][1..]);
        }
        out
    }

    /// Input vertex id of a vertex kept by the compaction.
    pub fn original_vertex(&self, v: VertexId) -> VertexId {
        let e = self.graph.out_edges(v).first().or_else(|| self.graph.in_edges(v).first());
        match e {
            Some(&e) if self.graph.edge(e).tail == v => self.paths[e][0],
            Some(&e) => *self.paths[e].last().unwrap(),
            None => unreachable!("isolated vertices are dropped by compaction"),
        }
    }
}

/// Compacts every maximal path whose internal vertices have in- and out-degree 1
/// into a single edge carrying the weight of the path's first edge.
pub fn compact_unitigs(g: &Graph) -> Compaction {
    compact_unitigs_keeping(g, |_| false)
}

/// Like [`compact_unitigs`], but never removes a vertex for which `keep` is true.
///
/// A unitig whose compaction would create a parallel edge (or a duplicate
/// self-loop) keeps its last internal vertex.
pub fn compact_unitigs_keeping(g: &Graph, keep: impl Fn(VertexId) -> bool) -> Compaction {
    let n = g.n();
    let internal: Vec<bool> = (0..n)
        .map(|v| {
            v != g.source()
                && v != g.sink()
                && !keep(v)
                && g.in_edges(v).len() == 1
                && g.out_edges(v).len() == 1
                && !g.edge(g.out_edges(v)[0]).is_self_loop()
        })
        .collect();

    // Chains from a non-internal vertex through internal vertices.
    let mut chains: Vec<Vec<EdgeId>> = Vec::new();
    let mut covered = vec![false; g.m()];
    for v in 0..n {
        if internal[v] {
            continue;
        }
        for &e in g.out_edges(v) {
            let mut chain = vec![e];
            let mut w = g.edge(e).head;
            while internal[w] {
                let next = g.out_edges(w)[0];
                chain.push(next);
                w = g.edge(next).head;
            }
            for &c in &chain {
                covered[c] = true;
            }
            chains.push(chain);
        }
    }
    // Cycles made only of internal vertices: split them at their smallest vertex.
    let mut internal = internal;
    for e in 0..g.m() {
        if covered[e] {
            continue;
        }
        let mut v = g.edge(e).tail;
        let start = v;
        let mut min = v;
        loop {
            v = g.edge(g.out_edges(v)[0]).head;
            min = min.min(v);
            if v == start {
                break;
            }
        }
        internal[min] = false;
        let mut chain = vec![g.out_edges(min)[0]];
        let mut w = g.edge(chain[0]).head;
        while w != min {
            let next = g.out_edges(w)[0];
            chain.push(next);
            w = g.edge(next).head;
        }
        for &c in &chain {
            covered[c] = true;
        }
        chains.push(chain);
    }

    // Split chains that would collide on the same endpoint pair. Shorter chains
    // claim their endpoints first so single input edges are never split.
    chains.sort_by_key(|c| (c.len(), c[0]));
    let mut seen = HashSet::new();
    let mut pieces: Vec<Vec<EdgeId>> = Vec::new();
    for chain in chains {
        let tail = g.edge(chain[0]).tail;
        let head = g.edge(*chain.last().unwrap()).head;
        if seen.insert((tail, head)) {
            pieces.push(chain);
        } else {
            // chain.len() >= 2 here: single edges are unique in the input.
            let (front, last) = chain.split_at(chain.len() - 1);
            let mid = g.edge(last[0]).tail;
            internal[mid] = false;
            seen.insert((tail, mid));
            seen.insert((mid, head));
            pieces.push(front.to_vec());
            pieces.push(last.to_vec());
        }
    }

    let mut b = GraphBuilder::new();
    b.vertex(g.name(g.source()));
    for v in 0..n {
        if !internal[v] && v != g.source() && v != g.sink() && (g.in_edges(v).len() + g.out_edges(v).len() > 0) {
            b.vertex(g.name(v));
        }
    }
    b.vertex(g.name(g.sink()));
    pieces.sort_by_key(|p| p[0]);
    let mut paths = Vec::with_capacity(pieces.len());
    let mut edge_map = vec![usize::MAX; g.m()];
    for piece in &pieces {
        let tail = g.edge(piece[0]).tail;
        let head = g.edge(*piece.last().unwrap()).head;
        let mut path = vec![tail];
        path.extend(piece.iter().map(|&e| g.edge(e).head));
        let is_aux = piece.iter().all(|&e| g.is_auxiliary(e));
        let u = b.vertex(g.name(tail));
        let v = b.vertex(g.name(head));
        let ce = b.push_edge(u, v, g.weight(piece[0]), is_aux).expect("collisions resolved above");
        for &e in piece {
            edge_map[e] = ce;
        }
        paths.push(path);
    }
    let graph = b.build(g.name(g.source()), g.name(g.sink())).expect("terminals unchanged");
    Compaction { graph, paths, edge_map }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, fixtures};
    use crate::testutil::{random_st_graph, st_walks_up_to};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn midpoint_single_edge() {
        let g = fixtures::diamond();
        let e = g.edge_by_names("a", "t").unwrap();
        let mp = midpoint_transform(&g, &[e]).unwrap();
        assert_eq!(mp.graph.m(), 5);
        let (m, orig) = mp.midpoints[0];
        assert_eq!(orig, e);
        let a = mp.graph.vertex("a").unwrap();
        let first = mp.graph.find_edge(a, m).unwrap();
        let second = mp.graph.find_edge(m, mp.graph.sink()).unwrap();
        assert_eq!(mp.graph.weight(first), g.weight(e));
        assert_eq!(mp.graph.weight(second), 0);
        assert!(mp.graph.find_edge(a, mp.graph.sink()).is_none());
    }

    #[test]
    fn midpoint_all_edges_counts() {
        let g = fixtures::diamond();
        let all: Vec<_> = (0..g.m()).collect();
        let mp = midpoint_transform(&g, &all).unwrap();
        assert_eq!(mp.midpoints.len(), 4);
        assert_eq!(mp.graph.m(), 8);
        assert_eq!(mp.graph.n(), 8);
    }

    #[test]
    fn midpoint_self_loop() {
        let g = build_graph(&[("s", "a", 1), ("a", "a", 2), ("a", "t", 1)], "s", "t").unwrap();
        let e = g.edge_by_names("a", "a").unwrap();
        let mp = midpoint_transform(&g, &[e]).unwrap();
        let a = mp.graph.vertex("a").unwrap();
        let m = mp.midpoints[0].0;
        assert!(mp.graph.find_edge(a, m).is_some());
        assert!(mp.graph.find_edge(m, a).is_some());
        assert!(mp.graph.find_edge(a, a).is_none());
    }

    #[test]
    fn midpoint_rejects_unknown_edge() {
        let g = fixtures::diamond();
        assert!(matches!(midpoint_transform(&g, &[99]), Err(GraphError::EdgeNotInGraph(..))));
    }

    /// Bounded-length s-t walks of the transformed graph, with midpoints
    /// removed, are exactly the bounded-length walks of the input.
    #[test]
    fn midpoint_preserves_walks() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..40 {
            let g = random_st_graph(&mut rng, 8, 1.8);
            let subset: Vec<_> = (0..g.m()).filter(|e| e % 2 == 0).collect();
            let mp = midpoint_transform(&g, &subset).unwrap();
            let mut original = st_walks_up_to(&g, 6);
            let is_mid: Vec<bool> = (0..mp.graph.n()).map(|v| v >= g.n()).collect();
            let mut projected: Vec<Vec<usize>> = st_walks_up_to(&mp.graph, 12)
                .into_iter()
                .map(|w| w.into_iter().filter(|&v| !is_mid[v]).collect::<Vec<_>>())
                .filter(|w| w.len() <= 7)
                .collect();
            original.sort();
            projected.sort();
            projected.dedup();
            assert_eq!(original, projected);
        }
    }

    #[test]
    fn compacts_simple_path() {
        let g = build_graph(&[("s", "a", 3), ("a", "b", 3), ("b", "t", 3)], "s", "t").unwrap();
        let c = compact_unitigs(&g);
        assert_eq!(c.graph.m(), 1);
        let names: Vec<&str> = c.paths[0].iter().map(|&v| g.name(v)).collect();
        assert_eq!(names, ["s", "a", "b", "t"]);
        assert_eq!(c.graph.weight(0), 3);
    }

    #[test]
    fn diamond_keeps_one_branch_vertex() {
        // Both branches would become s->t, so one keeps its middle vertex.
        let g = fixtures::diamond();
        let c = compact_unitigs(&g);
        assert_eq!(c.graph.m(), 3);
        assert_eq!(c.graph.n(), 3);
        let total: u64 = (0..c.graph.m()).map(|e| c.graph.weight(e)).sum();
        assert!(total == 2 + 3 + 3 || total == 3 + 2 + 2);
    }

    #[test]
    fn parallel_collision_keeps_a_vertex() {
        let g = build_graph(&[("s", "a", 1), ("a", "t", 1), ("s", "b", 1), ("b", "c", 1), ("c", "t", 1)], "s", "t")
            .unwrap();
        let c = compact_unitigs(&g);
        assert_eq!(c.graph.m(), 3);
        assert_eq!(c.graph.out_edges(c.graph.source()).len(), 2);
    }

    #[test]
    fn expansion_round_trips_walk_multisets() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..60 {
            let g = random_st_graph(&mut rng, 9, 1.4);
            let c = compact_unitigs(&g);
            for e in 0..g.m() {
                assert!(c.edge_map[e] < c.graph.m());
            }
            let mut expanded: Vec<Vec<usize>> = st_walks_up_to(&c.graph, 6).iter().map(|w| c.expand_walk(w)).collect();
            // Each compacted walk expands to a distinct walk of the input.
            let before = expanded.len();
            expanded.sort();
            expanded.dedup();
            assert_eq!(before, expanded.len());
            for w in &expanded {
                for pair in w.windows(2) {
                    assert!(g.find_edge(pair[0], pair[1]).is_some());
                }
                let mut counts = vec![0usize; g.m()];
                for pair in w.windows(2) {
                    counts[g.find_edge(pair[0], pair[1]).unwrap()] += 1;
                }
                // Every input edge of a compacted edge is traversed equally often.
                for (e, &ce) in c.edge_map.iter().enumerate() {
                    let first = g.find_edge(c.paths[ce][0], c.paths[ce][1]).unwrap();
                    assert_eq!(counts[e], counts[first]);
                }
            }
            let originals = st_walks_up_to(&g, 6);
            for w in originals {
                assert!(expanded.contains(&w) || w.len() > 7, "input walk lost by compaction");
            }
        }
    }
}
