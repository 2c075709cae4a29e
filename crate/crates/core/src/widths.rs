//! Maximum-weight edge antichains and minimum walk covers.
//!
//! Both reduce to a minimum flow with lower bounds on an acyclic gadget graph
//! obtained from the condensation: each non-trivial SCC becomes a single
//! weighted edge, each edge between SCCs becomes a two-edge path through a
//! private vertex.

use std::collections::VecDeque;

use thiserror::Error;

use crate::graph::{condense, reachability, Condensation, EdgeId, Graph, VertexId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WidthError {
    #[error("the edge set to cover is empty")]
    EmptyEdgeSet,
    #[error("edge {0} lies on no s-t walk and cannot be covered")]
    Uncoverable(String),
}

/// Where a gadget edge comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GadgetOrigin {
    /// First half of an edge between SCCs; carries the edge's weight.
    Edge(EdgeId),
    /// Second half of an edge between SCCs; weight 0.
    EdgeTail(EdgeId),
    /// A non-trivial SCC, with the first maximum-weight internal edge.
    Scc { component: usize, witness: EdgeId },
}

#[derive(Debug, Clone)]
pub struct GadgetDag {
    /// Gadget vertices: one per trivial SCC, two per non-trivial SCC, then one
    /// private vertex per edge between SCCs.
    pub node_count: usize,
    /// Vertices not counting the private ones.
    pub core_node_count: usize,
    pub edges: Vec<(usize, usize)>,
    pub weight: Vec<u64>,
    pub origin: Vec<GadgetOrigin>,
    in_node: Vec<usize>,
    out_node: Vec<usize>,
    scc_edge: Vec<Option<usize>>,
    first_half: Vec<Option<usize>>,
}

impl GadgetDag {
    /// Gadget vertex where walks enter the SCC of `v`.
    pub fn entry(&self, cond: &Condensation, v: VertexId) -> usize {
        self.in_node[cond.component(v)]
    }

    /// Gadget vertex where walks leave the SCC of `v`.
    pub fn exit(&self, cond: &Condensation, v: VertexId) -> usize {
        self.out_node[cond.component(v)]
    }

    /// The gadget edge standing for original edge `e`: the SCC edge for an
    /// internal edge, the weighted first half otherwise.
    pub fn image(&self, cond: &Condensation, g: &Graph, e: EdgeId) -> usize {
        match self.first_half[e] {
            Some(x) => x,
            None => self.scc_edge[cond.component(g.edge(e).tail)].expect("internal edges live in non-trivial SCCs"),
        }
    }
}

/// Builds the gadget DAG of `g` under `weights` (one per edge of `g`).
pub fn build_gadget_dag(g: &Graph, cond: &Condensation, weights: &[u64]) -> GadgetDag {
    assert_eq!(weights.len(), g.m());
    let c = cond.len();
    let mut in_node = vec![0; c];
    let mut out_node = vec![0; c];
    let mut next = 0;
    for comp in 0..c {
        in_node[comp] = next;
        next += 1;
        if cond.is_trivial(comp) {
            out_node[comp] = in_node[comp];
        } else {
            out_node[comp] = next;
            next += 1;
        }
    }
    let core_node_count = next;

    let mut witness: Vec<Option<EdgeId>> = vec![None; c];
    for (e, edge) in g.edges().iter().enumerate() {
        let comp = cond.component(edge.tail);
        if comp == cond.component(edge.head) {
            let better = witness[comp].is_none_or(|w| weights[e] > weights[w]);
            if better {
                witness[comp] = Some(e);
            }
        }
    }

    let mut dag = GadgetDag {
        node_count: 0,
        core_node_count,
        edges: Vec::new(),
        weight: Vec::new(),
        origin: Vec::new(),
        in_node,
        out_node,
        scc_edge: vec![None; c],
        first_half: vec![None; g.m()],
    };
    for comp in 0..c {
        if let Some(w) = witness[comp] {
            dag.scc_edge[comp] = Some(dag.edges.len());
            dag.edges.push((dag.in_node[comp], dag.out_node[comp]));
            dag.weight.push(weights[w]);
            dag.origin.push(GadgetOrigin::Scc { component: comp, witness: w });
        }
    }
    for (e, edge) in g.edges().iter().enumerate() {
        let (cu, cv) = (cond.component(edge.tail), cond.component(edge.head));
        if cu == cv {
            continue;
        }
        let z = next;
        next += 1;
        dag.first_half[e] = Some(dag.edges.len());
        dag.edges.push((dag.out_node[cu], z));
        dag.weight.push(weights[e]);
        dag.origin.push(GadgetOrigin::Edge(e));
        dag.edges.push((z, dag.in_node[cv]));
        dag.weight.push(0);
        dag.origin.push(GadgetOrigin::EdgeTail(e));
    }
    dag.node_count = next;
    dag
}

const INF: i64 = 1 << 50;

/// Residual network for minimum flow with lower bounds and unbounded capacities.
struct FlowNet {
    head: Vec<usize>,
    cap: Vec<i64>,
    adj: Vec<Vec<usize>>,
}

impl FlowNet {
    fn new(n: usize) -> Self {
        FlowNet { head: Vec::new(), cap: Vec::new(), adj: vec![Vec::new(); n] }
    }

    /// Adds `u -> v` carrying `flow` above its lower bound `lower`; returns
    /// the arc id. The paired reverse arc holds `flow - lower`.
    fn add(&mut self, u: usize, v: usize, excess: i64) -> usize {
        let id = self.head.len();
        self.head.push(v);
        self.cap.push(INF);
        self.adj[u].push(id);
        self.head.push(u);
        self.cap.push(excess);
        self.adj[v].push(id + 1);
        id
    }

    fn levels(&self, src: usize) -> Vec<i32> {
        let mut level = vec![-1; self.adj.len()];
        level[src] = 0;
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            for &a in &self.adj[u] {
                let v = self.head[a];
                if self.cap[a] > 0 && level[v] < 0 {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        level
    }

    fn augment(&mut self, u: usize, dst: usize, limit: i64, level: &[i32], it: &mut [usize]) -> i64 {
        if u == dst {
            return limit;
        }
        while it[u] < self.adj[u].len() {
            let a = self.adj[u][it[u]];
            let v = self.head[a];
            if self.cap[a] > 0 && level[v] == level[u] + 1 {
                let pushed = self.augment(v, dst, limit.min(self.cap[a]), level, it);
                if pushed > 0 {
                    self.cap[a] -= pushed;
                    self.cap[a ^ 1] += pushed;
                    return pushed;
                }
            }
            it[u] += 1;
        }
        0
    }

    fn max_flow(&mut self, src: usize, dst: usize) -> i64 {
        let mut total = 0;
        loop {
            let level = self.levels(src);
            if level[dst] < 0 {
                return total;
            }
            let mut it = vec![0; self.adj.len()];
            loop {
                let pushed = self.augment(src, dst, INF, &level, &mut it);
                if pushed == 0 {
                    break;
                }
                total += pushed;
            }
        }
    }
}

/// Result of a minimum flow computation.
struct MinFlow {
    value: u64,
    /// Gadget edges crossing the canonical minimum cut, at their lower bound.
    cut: Vec<usize>,
}

/// Minimum flow on the gadget DAG where gadget edge `i` must carry at least
/// `lower[i]`, entering at `sources` and leaving at `sinks`. `None` if some
/// bounded edge cannot be routed from a source to a sink.
fn min_flow(dag: &GadgetDag, lower: &[u64], sources: &[usize], sinks: &[usize]) -> Option<MinFlow> {
    let n = dag.node_count;
    let (super_s, super_t) = (n, n + 1);
    let mut fwd = vec![Vec::new(); n];
    let mut bwd = vec![Vec::new(); n];
    for (i, &(u, v)) in dag.edges.iter().enumerate() {
        fwd[u].push((v, i));
        bwd[v].push((u, i));
    }
    // BFS trees from the sources and towards the sinks give one routing path
    // per bounded edge; this is a feasible, not minimum, starting flow.
    let from_src = bfs_tree(&fwd, sources);
    let to_sink = bfs_tree(&bwd, sinks);
    let mut flow = vec![0i64; dag.edges.len()];
    let mut enter = vec![0i64; n];
    let mut leave = vec![0i64; n];
    for (i, &(u, v)) in dag.edges.iter().enumerate() {
        let l = lower[i] as i64;
        if l == 0 {
            continue;
        }
        flow[i] += l;
        let mut x = u;
        loop {
            match from_src[x] {
                Some(Step::Root) => break,
                Some(Step::Via(p, e)) => {
                    flow[e] += l;
                    x = p;
                }
                None => return None,
            }
        }
        enter[x] += l;
        let mut y = v;
        loop {
            match to_sink[y] {
                Some(Step::Root) => break,
                Some(Step::Via(p, e)) => {
                    flow[e] += l;
                    y = p;
                }
                None => return None,
            }
        }
        leave[y] += l;
    }
    let initial: i64 = enter.iter().sum();

    let mut net = FlowNet::new(n + 2);
    let arcs: Vec<usize> =
        dag.edges.iter().enumerate().map(|(i, &(u, v))| net.add(u, v, flow[i] - lower[i] as i64)).collect();
    let mut is_source = vec![false; n];
    for &x in sources {
        is_source[x] = true;
    }
    let mut is_sink = vec![false; n];
    for &x in sinks {
        is_sink[x] = true;
    }
    for x in 0..n {
        if is_source[x] {
            net.add(super_s, x, enter[x]);
        }
        if is_sink[x] {
            net.add(x, super_t, leave[x]);
        }
    }
    let reduced = net.max_flow(super_t, super_s);

    let level = net.levels(super_t);
    let cut = arcs
        .iter()
        .enumerate()
        .filter(|&(i, _)| {
            let (u, v) = dag.edges[i];
            level[u] < 0 && level[v] >= 0
        })
        .map(|(i, _)| i)
        .collect();
    Some(MinFlow { value: (initial - reduced) as u64, cut })
}

#[derive(Clone, Copy)]
enum Step {
    Root,
    Via(usize, usize),
}

fn bfs_tree(adj: &[Vec<(usize, usize)>], roots: &[usize]) -> Vec<Option<Step>> {
    let mut tree = vec![None; adj.len()];
    let mut queue = VecDeque::new();
    for &r in roots {
        if tree[r].is_none() {
            tree[r] = Some(Step::Root);
            queue.push_back(r);
        }
    }
    while let Some(u) = queue.pop_front() {
        for &(v, e) in &adj[u] {
            if tree[v].is_none() {
                tree[v] = Some(Step::Via(u, e));
                queue.push_back(v);
            }
        }
    }
    tree
}

/// Edges pairwise unreachable from one another.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Antichain {
    /// Sorted by edge id.
    pub edges: Vec<EdgeId>,
    pub total_weight: u64,
}

/// Maximum-weight edge antichain of `g` under `weights`. Zero-weight edges
/// are never reported.
pub fn max_weight_antichain(g: &Graph, weights: &[u64]) -> Antichain {
    let cond = condense(g);
    let dag = build_gadget_dag(g, &cond, weights);
    max_weight_antichain_in(&dag)
}

pub fn max_weight_antichain_in(dag: &GadgetDag) -> Antichain {
    let all: Vec<usize> = (0..dag.node_count).collect();
    let flow = min_flow(dag, &dag.weight, &all, &all).expect("every gadget vertex is its own source and sink");
    let mut edges: Vec<EdgeId> = flow
        .cut
        .iter()
        .filter(|&&i| dag.weight[i] > 0)
        .filter_map(|&i| match dag.origin[i] {
            GadgetOrigin::Edge(e) => Some(e),
            GadgetOrigin::Scc { witness, .. } => Some(witness),
            GadgetOrigin::EdgeTail(_) => None,
        })
        .collect();
    edges.sort_unstable();
    let total_weight = flow.cut.iter().map(|&i| dag.weight[i]).sum();
    debug_assert_eq!(total_weight, flow.value);
    Antichain { edges, total_weight }
}

/// True iff no edge of `edges` reaches the tail of another.
pub fn is_antichain(g: &Graph, edges: &[EdgeId]) -> bool {
    let reach = reachability(g);
    edges
        .iter()
        .enumerate()
        .all(|(i, &a)| edges.iter().enumerate().all(|(j, &b)| i == j || !reach.reaches(g.edge(a).head, g.edge(b).tail)))
}

/// Minimum number of s-t walks covering every edge of `subset`.
pub fn min_walk_cover_size(g: &Graph, subset: &[EdgeId]) -> Result<usize, WidthError> {
    if subset.is_empty() {
        return Err(WidthError::EmptyEdgeSet);
    }
    let live = g.live_edges();
    if let Some(&e) = subset.iter().find(|&&e| !live[e]) {
        return Err(WidthError::Uncoverable(g.edge_label(e)));
    }
    let cond = condense(g);
    let dag = build_gadget_dag(g, &cond, &vec![0; g.m()]);
    let mut lower = vec![0u64; dag.edges.len()];
    for &e in subset {
        lower[dag.image(&cond, g, e)] = 1;
    }
    let s = dag.entry(&cond, g.source());
    let t = dag.exit(&cond, g.sink());
    let flow = min_flow(&dag, &lower, &[s], &[t]).expect("live edges lie on s-t paths");
    Ok(flow.value as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, fixtures};
    use crate::testutil::random_st_graph;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_antichain(g: &Graph, weights: &[u64]) -> u64 {
        let reach = reachability(g);
        let m = g.m();
        let mut best = 0;
        for mask in 0u32..(1 << m) {
            let members: Vec<usize> = (0..m).filter(|&e| mask >> e & 1 == 1).collect();
            let ok = members
                .iter()
                .all(|&a| members.iter().all(|&b| a == b || !reach.reaches(g.edge(a).head, g.edge(b).tail)));
            if ok {
                best = best.max(members.iter().map(|&e| weights[e]).sum());
            }
        }
        best
    }

    #[test]
    fn single_edge() {
        let g = build_graph(&[("s", "t", 7)], "s", "t").unwrap();
        let a = max_weight_antichain(&g, g.weights());
        assert_eq!(a, Antichain { edges: vec![0], total_weight: 7 });
    }

    #[test]
    fn diamond_unit_weights_and_cover() {
        let g = fixtures::diamond();
        let a = max_weight_antichain(&g, &[1; 4]);
        assert_eq!(a.total_weight, 2);
        assert!(is_antichain(&g, &a.edges));
        let all: Vec<_> = (0..g.m()).collect();
        assert_eq!(min_walk_cover_size(&g, &all), Ok(2));
        assert_eq!(min_walk_cover_size(&g, &[]), Err(WidthError::EmptyEdgeSet));
    }

    #[test]
    fn cycle_gadget() {
        let g = fixtures::cycle();
        let cond = condense(&g);
        let dag = build_gadget_dag(&g, &cond, &[1; 4]);
        let scc: Vec<_> = dag.origin.iter().filter(|o| matches!(o, GadgetOrigin::Scc { .. })).collect();
        assert_eq!(scc.len(), 1);
        assert_eq!(dag.core_node_count, 4);
        assert_eq!(dag.edges.len(), 1 + 2 * 2);
        let all: Vec<_> = (0..g.m()).collect();
        assert_eq!(min_walk_cover_size(&g, &all), Ok(1));
    }

    #[test]
    fn dag_input_splits_every_edge() {
        let g = fixtures::diamond();
        let cond = condense(&g);
        let dag = build_gadget_dag(&g, &cond, g.weights());
        assert_eq!(dag.core_node_count, 4);
        assert_eq!(dag.node_count, 8);
        assert_eq!(dag.edges.len(), 8);
        assert!(dag.origin.iter().all(|o| !matches!(o, GadgetOrigin::Scc { .. })));
    }

    #[test]
    fn uncoverable_edge() {
        let g = build_graph(&[("s", "a", 1), ("a", "t", 1), ("s", "d", 1)], "s", "t").unwrap();
        let sd = g.edge_by_names("s", "d").unwrap();
        assert_eq!(min_walk_cover_size(&g, &[sd]), Err(WidthError::Uncoverable("s>d".into())));
    }

    #[test]
    fn random_graphs_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut checked = 0;
        while checked < 150 {
            let density = rng.random_range(1.2..2.2);
            let g = random_st_graph(&mut rng, 8, density);
            if g.m() > 12 {
                continue;
            }
            let weights: Vec<u64> = (0..g.m()).map(|_| rng.random_range(0..6)).collect();
            let a = max_weight_antichain(&g, &weights);
            assert!(is_antichain(&g, &a.edges));
            assert_eq!(a.total_weight, a.edges.iter().map(|&e| weights[e]).sum::<u64>());
            assert_eq!(a.total_weight, brute_antichain(&g, &weights), "{}", g.to_text());
            checked += 1;
        }
    }
}
