//! s- and t-dominator trees.
//!
//! Trees are built with the semi-NCA algorithm (semidominators via path
//! compression, then immediate dominators as nearest common ancestors in the
//! DFS tree). Self-loops are ignored: they never change a path set.

use std::fmt::Write as _;

use thiserror::Error;

use crate::graph::{Graph, VertexId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DomError {
    #[error("vertex {0} is not in the dominator tree")]
    VertexNotInTree(VertexId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Rooted at s, following edges forward.
    FromSource,
    /// Rooted at t, following edges backward.
    ToSink,
}

#[derive(Debug, Clone)]
pub struct DominatorTree {
    root: VertexId,
    direction: Direction,
    parent: Vec<Option<VertexId>>,
    depth: Vec<Option<u32>>,
    children: Vec<Vec<VertexId>>,
    pruned: Vec<VertexId>,
}

impl DominatorTree {
    pub fn root(&self) -> VertexId {
        self.root
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    /// Immediate dominator; `None` for the root and for pruned vertices.
    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        self.parent[v]
    }

    pub fn depth(&self, v: VertexId) -> Option<u32> {
        self.depth[v]
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.depth[v].is_some()
    }

    pub fn children(&self, v: VertexId) -> &[VertexId] {
        &self.children[v]
    }

    /// Vertices not connected to the root, left out of the tree.
    pub fn pruned(&self) -> &[VertexId] {
        &self.pruned
    }

    /// True iff `u` dominates `v` (reflexive).
    pub fn dominates(&self, u: VertexId, v: VertexId) -> bool {
        let (Some(du), Some(mut dv)) = (self.depth[u], self.depth[v]) else {
            return false;
        };
        let mut x = v;
        while dv > du {
            x = self.parent[x].unwrap();
            dv -= 1;
        }
        x == u
    }

    /// Path from `v` up to the root, `v` first.
    pub fn path_to_root(&self, v: VertexId) -> Result<Vec<VertexId>, DomError> {
        if !self.contains(v) {
            return Err(DomError::VertexNotInTree(v));
        }
        let mut path = vec![v];
        let mut x = v;
        while let Some(p) = self.parent[x] {
            path.push(p);
            x = p;
        }
        Ok(path)
    }

    /// Vertices in breadth-first order from the root.
    pub fn bfs_order(&self) -> Vec<VertexId> {
        let mut order = vec![self.root];
        let mut i = 0;
        while i < order.len() {
            let v = order[i];
            order.extend_from_slice(&self.children[v]);
            i += 1;
        }
        order
    }

    pub fn to_dot(&self, g: &Graph) -> String {
        let label = match self.direction {
            Direction::FromSource => "s_dominator_tree",
            Direction::ToSink => "t_dominator_tree",
        };
        let mut out = format!("digraph {label} {{\n");
        for v in self.bfs_order() {
            for &c in &self.children[v] {
                writeln!(out, "  \"{}\" -> \"{}\";", g.name(v), g.name(c)).unwrap();
            }
        }
        out.push_str("}\n");
        out
    }
}

/// k-th ancestor of `v`, defaulting to the root when `k` exceeds the number
/// of strict dominators of `v`.
pub fn dom_k(tree: &DominatorTree, v: VertexId, k: usize) -> Result<VertexId, DomError> {
    let depth = tree.depth(v).ok_or(DomError::VertexNotInTree(v))? as usize;
    if k >= depth {
        return Ok(tree.root());
    }
    let mut x = v;
    for _ in 0..k {
        x = tree.parent(x).unwrap();
    }
    Ok(x)
}

/// The sequence s ... v ... t obtained from the root-to-v path of the s-tree
/// followed by the v-to-root path of the t-tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Extension {
    pub anchor: VertexId,
    pub vertices: Vec<VertexId>,
}

pub fn extension(s_tree: &DominatorTree, t_tree: &DominatorTree, v: VertexId) -> Result<Extension, DomError> {
    let mut vertices = s_tree.path_to_root(v)?;
    vertices.reverse();
    let up = t_tree.path_to_root(v)?;
    vertices.extend_from_slice(&up[1..]);
    Ok(Extension { anchor: v, vertices })
}

pub fn build_s_dominator_tree(g: &Graph) -> DominatorTree {
    build(g, Direction::FromSource)
}

pub fn build_t_dominator_tree(g: &Graph) -> DominatorTree {
    build(g, Direction::ToSink)
}

fn build(g: &Graph, direction: Direction) -> DominatorTree {
    let n = g.n();
    let root = match direction {
        Direction::FromSource => g.source(),
        Direction::ToSink => g.sink(),
    };
    let succ = |v: VertexId| -> Vec<VertexId> {
        match direction {
            Direction::FromSource => g.successors(v).filter(|&w| w != v).collect(),
            Direction::ToSink => g.predecessors(v).filter(|&w| w != v).collect(),
        }
    };
    let pred = |v: VertexId| -> Vec<VertexId> {
        match direction {
            Direction::FromSource => g.predecessors(v).filter(|&w| w != v).collect(),
            Direction::ToSink => g.successors(v).filter(|&w| w != v).collect(),
        }
    };

    // Iterative DFS preorder numbering.
    const NONE: usize = usize::MAX;
    let mut pre = vec![NONE; n];
    let mut vertex = Vec::with_capacity(n);
    let mut dfs_parent = vec![NONE; n];
    let mut stack = vec![(root, NONE)];
    while let Some((v, p)) = stack.pop() {
        if pre[v] != NONE {
            continue;
        }
        pre[v] = vertex.len();
        vertex.push(v);
        dfs_parent[v] = p;
        let next = succ(v);
        for &w in next.iter().rev() {
            if pre[w] == NONE {
                stack.push((w, v));
            }
        }
    }
    let count = vertex.len();

    // Semidominators, working on preorder numbers.
    let mut semi: Vec<usize> = (0..count).collect();
    let mut ancestor = vec![NONE; count];
    let mut label: Vec<usize> = (0..count).collect();
    let parent_num: Vec<usize> =
        vertex.iter().map(|&v| if dfs_parent[v] == NONE { NONE } else { pre[dfs_parent[v]] }).collect();

    fn eval(v: usize, ancestor: &mut [usize], label: &mut [usize], semi: &[usize]) -> usize {
        if ancestor[v] == usize::MAX {
            return v;
        }
        // Collect the path to the forest root, then compress it top-down.
        let mut path = vec![v];
        let mut x = v;
        while ancestor[ancestor[x]] != usize::MAX {
            x = ancestor[x];
            path.push(x);
        }
        for &y in path.iter().rev().skip(1) {
            let a = ancestor[y];
            if semi[label[a]] < semi[label[y]] {
                label[y] = label[a];
            }
            ancestor[y] = ancestor[a];
        }
        label[v]
    }

    for w in (1..count).rev() {
        for p in pred(vertex[w]) {
            let pn = pre[p];
            if pn == NONE {
                continue;
            }
            let u = eval(pn, &mut ancestor, &mut label, &semi);
            if semi[u] < semi[w] {
                semi[w] = semi[u];
            }
        }
        ancestor[w] = parent_num[w];
    }

    // NCA pass: idom(w) is the nearest ancestor of parent(w) numbered <= semi(w).
    let mut idom = vec![0usize; count];
    for w in 1..count {
        let mut x = parent_num[w];
        while x > semi[w] {
            x = idom[x];
        }
        idom[w] = x;
    }

    let mut parent = vec![None; n];
    let mut depth = vec![None; n];
    let mut children = vec![Vec::new(); n];
    depth[root] = Some(0);
    for w in 1..count {
        let v = vertex[w];
        let p = vertex[idom[w]];
        parent[v] = Some(p);
        depth[v] = Some(depth[p].unwrap() + 1);
        children[p].push(v);
    }
    for c in children.iter_mut() {
        c.sort_unstable();
    }
    let pruned = (0..n).filter(|&v| pre[v] == NONE).collect();
    DominatorTree { root, direction, parent, depth, children, pruned }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, fixtures};
    use crate::testutil::{random_st_graph, removal_dominators};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn v(g: &Graph, name: &str) -> VertexId {
        g.vertex(name).unwrap()
    }

    #[test]
    fn diamond_trees_are_stars() {
        let g = fixtures::diamond();
        let st = build_s_dominator_tree(&g);
        let tt = build_t_dominator_tree(&g);
        for x in ["a", "b", "t"] {
            assert_eq!(st.parent(v(&g, x)), Some(g.source()));
        }
        for x in ["a", "b", "s"] {
            assert_eq!(tt.parent(v(&g, x)), Some(g.sink()));
        }
        assert_eq!(st.parent(g.source()), None);
    }

    #[test]
    fn cycle_graph_trees() {
        let g = fixtures::cycle();
        let st = build_s_dominator_tree(&g);
        let tt = build_t_dominator_tree(&g);
        let (a, b) = (v(&g, "a"), v(&g, "b"));
        assert_eq!(st.parent(b), Some(a));
        assert_eq!(st.parent(g.sink()), Some(a));
        assert_eq!(tt.parent(b), Some(a));
        assert_eq!(tt.parent(g.source()), Some(a));
        assert_eq!(dom_k(&st, b, 1), Ok(a));
        assert_eq!(dom_k(&st, b, 99), Ok(g.source()));
        assert_eq!(dom_k(&st, g.source(), 1), Ok(g.source()));
        let ext = extension(&st, &tt, b).unwrap();
        let names: Vec<&str> = ext.vertices.iter().map(|&x| g.name(x)).collect();
        assert_eq!(names, ["s", "a", "b", "a", "t"]);
    }

    /// Small graph whose extension runs through a shared middle vertex.
    #[test]
    fn shared_middle_extension() {
        let g = build_graph(
            &[
                ("v0", "v20", 1),
                ("v0", "v22", 1),
                ("v20", "v21", 1),
                ("v21", "v20", 1),
                ("v20", "v23", 1),
                ("v20", "v22", 1),
                ("v22", "v23", 1),
                ("v23", "v24", 1),
            ],
            "v0",
            "v24",
        )
        .unwrap();
        let st = build_s_dominator_tree(&g);
        let tt = build_t_dominator_tree(&g);
        let ext = extension(&st, &tt, v(&g, "v21")).unwrap();
        let names: Vec<&str> = ext.vertices.iter().map(|&x| g.name(x)).collect();
        assert_eq!(names, ["v0", "v20", "v21", "v20", "v23", "v24"]);
    }

    #[test]
    fn missing_vertex_is_error() {
        let g = build_graph(&[("s", "a", 1), ("a", "t", 1), ("s", "d", 1)], "s", "t").unwrap();
        let tt = build_t_dominator_tree(&g);
        let d = v(&g, "d");
        assert_eq!(tt.pruned(), &[d]);
        assert_eq!(dom_k(&tt, d, 1), Err(DomError::VertexNotInTree(d)));
        let st = build_s_dominator_tree(&g);
        assert_eq!(extension(&st, &tt, d), Err(DomError::VertexNotInTree(d)));
    }

    #[test]
    fn matches_removal_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..80 {
            let g = random_st_graph(&mut rng, 30, 2.2);
            for (tree, backward) in [(build_s_dominator_tree(&g), false), (build_t_dominator_tree(&g), true)] {
                let oracle = removal_dominators(&g, backward);
                for x in 0..g.n() {
                    match &oracle[x] {
                        None => assert!(!tree.contains(x)),
                        Some(doms) => {
                            let mut ancestors = tree.path_to_root(x).unwrap();
                            ancestors.sort_unstable();
                            assert_eq!(&ancestors, doms);
                        }
                    }
                }
            }
        }
    }
}
