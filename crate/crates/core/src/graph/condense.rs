use super::{Graph, VertexId};

/// Strongly connected components of a graph and the acyclic graph between them.
///
/// Components are numbered in topological order: every inter-component edge
/// goes from a lower to a higher index.
#[derive(Debug, Clone)]
pub struct Condensation {
    scc_of: Vec<usize>,
    members: Vec<Vec<VertexId>>,
    succ: Vec<Vec<usize>>,
    nontrivial: Vec<bool>,
}

impl Condensation {
    pub fn component(&self, v: VertexId) -> usize {
        self.scc_of[v]
    }

    pub fn scc_of(&self) -> &[usize] {
        &self.scc_of
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self, c: usize) -> &[VertexId] {
        &self.members[c]
    }

    /// Successor components, deduplicated and sorted.
    pub fn successors(&self, c: usize) -> &[usize] {
        &self.succ[c]
    }

    /// True iff the component contains no edge.
    pub fn is_trivial(&self, c: usize) -> bool {
        !self.nontrivial[c]
    }

    /// True iff the edge runs between two distinct components.
    pub fn is_inter(&self, g: &Graph, e: usize) -> bool {
        let edge = g.edge(e);
        self.scc_of[edge.tail] != self.scc_of[edge.head]
    }

    /// Component indices in topological order (identity by construction).
    pub fn topological_order(&self) -> impl Iterator<Item = usize> {
        0..self.members.len()
    }

    pub fn has_cycle(&self) -> bool {
        self.nontrivial.iter().any(|&b| b)
    }
}

/// Tarjan's algorithm, iterative, in O(|V| + |E|).
pub fn condense(g: &Graph) -> Condensation {
    let n = g.n();
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comp = vec![UNSEEN; n];
    let mut components: Vec<Vec<VertexId>> = Vec::new();
    let mut counter = 0;
    // (vertex, next out-edge position)
    let mut call: Vec<(VertexId, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        call.push((root, 0));
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            let out = g.out_edges(v);
            if *pos < out.len() {
                let w = g.edge(out[*pos]).head;
                *pos += 1;
                if index[w] == UNSEEN {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut members = Vec::new();
                loop {
                    let w = stack.pop().unwrap();
                    on_stack[w] = false;
                    comp[w] = components.len();
                    members.push(w);
                    if w == v {
                        break;
                    }
                }
                members.sort_unstable();
                components.push(members);
            }
        }
    }

    // Tarjan emits components in reverse topological order.
    let k = components.len();
    components.reverse();
    for c in comp.iter_mut() {
        *c = k - 1 - *c;
    }
    let mut succ = vec![Vec::new(); k];
    let mut nontrivial = vec![false; k];
    for edge in g.edges() {
        let (a, b) = (comp[edge.tail], comp[edge.head]);
        if a == b {
            nontrivial[a] = true;
        } else {
            succ[a].push(b);
        }
    }
    for s in succ.iter_mut() {
        s.sort_unstable();
        s.dedup();
    }
    Condensation { scc_of: comp, members: components, succ, nontrivial }
}
