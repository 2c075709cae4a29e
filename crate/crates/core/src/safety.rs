//! Maximal safe sequences for C-walk covers.
//!
//! A sequence is C-safe when every set of s-t walks covering C has a walk
//! containing it as a subsequence. The maximal ones are exactly the
//! extensions of vertices that are leaves in both blue-dominator trees, after
//! collapsing C-univocal chains.

use thiserror::Error;

use crate::dominators::{build_s_dominator_tree, build_t_dominator_tree, extension, DominatorTree, Extension};
use crate::graph::{midpoint_transform, EdgeId, Graph, GraphError, VertexId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SafetyError {
    #[error("the set C is empty")]
    EmptyC,
    #[error("vertex {0} of C does not lie on any s-t walk")]
    UnreachableCVertex(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Dominator trees with the vertices of C marked blue, restricted to
/// ancestors of blue vertices, with C-univocal chains grouped.
#[derive(Debug, Clone)]
pub struct BlueTrees {
    pub s_tree: DominatorTree,
    pub t_tree: DominatorTree,
    blue: Vec<bool>,
    in_s: Vec<bool>,
    in_t: Vec<bool>,
    blue_s_parent: Vec<Option<VertexId>>,
    blue_t_parent: Vec<Option<VertexId>>,
    blue_s_children: Vec<Vec<VertexId>>,
    blue_t_children: Vec<Vec<VertexId>>,
    groups: Vec<UnivocalGroup>,
}

/// A maximal C-univocal chain collapsed into one node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnivocalGroup {
    /// Blue members ordered from deepest to shallowest in the t-tree.
    pub members: Vec<VertexId>,
    /// Vertices after the representative on the chain's t-tree path,
    /// i.e. what the collapsed node stores.
    pub stored: Vec<VertexId>,
}

impl UnivocalGroup {
    /// Deepest member in the t-tree.
    pub fn representative(&self) -> VertexId {
        self.members[0]
    }

    /// Deepest member in the s-tree.
    pub fn s_bottom(&self) -> VertexId {
        *self.members.last().unwrap()
    }
}

impl BlueTrees {
    pub fn is_blue(&self, v: VertexId) -> bool {
        self.blue[v]
    }

    /// True iff `v` lies on the extension of some blue vertex.
    pub fn contains(&self, v: VertexId) -> bool {
        self.in_s[v] || self.in_t[v]
    }

    pub fn in_s_tree(&self, v: VertexId) -> bool {
        self.in_s[v]
    }

    pub fn in_t_tree(&self, v: VertexId) -> bool {
        self.in_t[v]
    }

    pub fn blue_s_children(&self, v: VertexId) -> &[VertexId] {
        &self.blue_s_children[v]
    }

    pub fn blue_t_children(&self, v: VertexId) -> &[VertexId] {
        &self.blue_t_children[v]
    }

    pub fn blue_s_parent(&self, v: VertexId) -> Option<VertexId> {
        self.blue_s_parent[v]
    }

    pub fn blue_t_parent(&self, v: VertexId) -> Option<VertexId> {
        self.blue_t_parent[v]
    }

    /// Collapsed nodes; singleton groups for blue vertices on no univocal chain.
    pub fn groups(&self) -> &[UnivocalGroup] {
        &self.groups
    }

    /// True iff (`lower`, `upper`) is a C-univocal pair: `upper` is the closest
    /// blue t-ancestor of `lower` and has it as its only blue t-child, and
    /// `upper` is the only blue s-child of `lower`.
    pub fn is_univocal_pair(&self, lower: VertexId, upper: VertexId) -> bool {
        self.blue[lower]
            && self.blue[upper]
            && self.blue_t_parent[lower] == Some(upper)
            && self.blue_t_children[upper].len() == 1
            && self.blue_s_children[lower] == [upper]
    }
}

/// Marks C in both dominator trees, prunes vertices on no blue extension and
/// collapses maximal C-univocal chains.
pub fn build_blue_trees(g: &Graph, c: &[VertexId]) -> Result<BlueTrees, SafetyError> {
    let s_tree = build_s_dominator_tree(g);
    let t_tree = build_t_dominator_tree(g);
    build_blue_trees_from(g, s_tree, t_tree, c)
}

pub fn build_blue_trees_from(
    g: &Graph,
    s_tree: DominatorTree,
    t_tree: DominatorTree,
    c: &[VertexId],
) -> Result<BlueTrees, SafetyError> {
    if c.is_empty() {
        return Err(SafetyError::EmptyC);
    }
    let n = g.n();
    let mut blue = vec![false; n];
    for &v in c {
        if !s_tree.contains(v) || !t_tree.contains(v) {
            return Err(SafetyError::UnreachableCVertex(g.name(v).to_string()));
        }
        blue[v] = true;
    }
    let (in_s, blue_s_parent, blue_s_children) = restrict(&s_tree, &blue);
    let (in_t, blue_t_parent, blue_t_children) = restrict(&t_tree, &blue);
    let mut trees = BlueTrees {
        s_tree,
        t_tree,
        blue,
        in_s,
        in_t,
        blue_s_parent,
        blue_t_parent,
        blue_s_children,
        blue_t_children,
        groups: Vec::new(),
    };
    trees.groups = collapse(&trees);
    Ok(trees)
}

type Restriction = (Vec<bool>, Vec<Option<VertexId>>, Vec<Vec<VertexId>>);

/// Ancestor-closure of the blue set, closest blue strict ancestors, and blue children.
fn restrict(tree: &DominatorTree, blue: &[bool]) -> Restriction {
    let n = blue.len();
    let order = tree.bfs_order();
    let mut inside = vec![false; n];
    for &v in order.iter().rev() {
        if blue[v] || tree.children(v).iter().any(|&c| inside[c]) {
            inside[v] = true;
        }
    }
    let mut nearest = vec![None; n];
    let mut blue_parent = vec![None; n];
    let mut blue_children = vec![Vec::new(); n];
    for &v in &order {
        let from_parent = tree.parent(v).and_then(|p| if blue[p] { Some(p) } else { nearest[p] });
        blue_parent[v] = from_parent;
        nearest[v] = from_parent;
        if blue[v] {
            if let Some(p) = from_parent {
                blue_children[p].push(v);
            }
        }
    }
    for v in 0..n {
        if !blue[v] {
            blue_parent[v] = None;
        }
    }
    for ch in blue_children.iter_mut() {
        ch.sort_unstable();
    }
    (inside, blue_parent, blue_children)
}

/// Groups blue vertices into maximal C-univocal chains.
fn collapse(trees: &BlueTrees) -> Vec<UnivocalGroup> {
    let n = trees.blue.len();
    let mut up = vec![None; n];
    let mut has_down = vec![false; n];
    for v in 0..n {
        if let Some(p) = trees.blue_t_parent[v] {
            if trees.is_univocal_pair(v, p) {
                up[v] = Some(p);
                has_down[p] = true;
            }
        }
    }
    let mut groups = Vec::new();
    for v in 0..n {
        if !trees.blue[v] || has_down[v] {
            continue;
        }
        let mut members = vec![v];
        let mut x = v;
        while let Some(p) = up[x] {
            members.push(p);
            x = p;
        }
        // t-tree path from the representative up to the chain's top.
        let top = *members.last().unwrap();
        let mut stored = Vec::new();
        let mut y = v;
        while y != top {
            y = trees.t_tree.parent(y).unwrap();
            stored.push(y);
        }
        groups.push(UnivocalGroup { members, stored });
    }
    groups
}

/// Extensions of every collapsed node that is a leaf in both blue trees,
/// ordered by representative vertex.
pub fn maximal_safe_sequences(trees: &BlueTrees) -> Vec<Extension> {
    trees
        .groups
        .iter()
        .filter(|grp| {
            trees.blue_t_children[grp.representative()].is_empty() && trees.blue_s_children[grp.s_bottom()].is_empty()
        })
        .map(|grp| {
            extension(&trees.s_tree, &trees.t_tree, grp.representative()).expect("blue vertices are in both trees")
        })
        .collect()
}

/// Convenience wrapper: maximal C-safe vertex sequences of `g`.
pub fn vertex_safe_sequences(g: &Graph, c: &[VertexId]) -> Result<Vec<Extension>, SafetyError> {
    Ok(maximal_safe_sequences(&build_blue_trees(g, c)?))
}

/// A safe sequence of edges of the original graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SafeSequence {
    pub edges: Vec<EdgeId>,
    /// The edge of C whose extension produced this sequence.
    pub anchor: EdgeId,
}

impl SafeSequence {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Number of occurrences of `e` in the sequence.
    pub fn count(&self, e: EdgeId) -> usize {
        self.edges.iter().filter(|&&x| x == e).count()
    }

    pub fn first_vertex(&self, g: &Graph) -> VertexId {
        g.edge(self.edges[0]).tail
    }

    pub fn last_vertex(&self, g: &Graph) -> VertexId {
        g.edge(*self.edges.last().unwrap()).head
    }
}

/// Maximal C-safe edge sequences, computed on the graph with every edge of C
/// subdivided by a midpoint vertex.
pub fn edge_safe_sequences(g: &Graph, c: &[EdgeId]) -> Result<Vec<SafeSequence>, SafetyError> {
    if c.is_empty() {
        return Err(SafetyError::EmptyC);
    }
    let mp = midpoint_transform(g, c)?;
    let mut original = vec![None; mp.graph.n()];
    for &(m, e) in &mp.midpoints {
        original[m] = Some(e);
    }
    let blue: Vec<VertexId> = mp.midpoints.iter().map(|&(m, _)| m).collect();
    let trees = build_blue_trees(&mp.graph, &blue).map_err(|err| match err {
        SafetyError::UnreachableCVertex(name) => SafetyError::UnreachableCVertex(name),
        other => other,
    })?;
    Ok(maximal_safe_sequences(&trees)
        .into_iter()
        .map(|ext| SafeSequence {
            edges: ext.vertices.iter().filter_map(|&v| original[v]).collect(),
            anchor: original[ext.anchor].expect("anchors are midpoints"),
        })
        .collect())
}

/// For every edge, the length of a longest sequence containing it (0 if none)
/// and the index of the first such sequence.
pub fn longest_covering_sequence(m: usize, sequences: &[SafeSequence]) -> (Vec<u64>, Vec<Option<usize>>) {
    let mut weight = vec![0u64; m];
    let mut witness = vec![None; m];
    for (i, seq) in sequences.iter().enumerate() {
        let len = seq.len() as u64;
        for &e in &seq.edges {
            if len > weight[e] {
                weight[e] = len;
                witness[e] = Some(i);
            }
        }
    }
    (weight, witness)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, fixtures};

    fn names(g: &Graph, seq: &[VertexId]) -> Vec<String> {
        seq.iter().map(|&v| g.name(v).to_string()).collect()
    }

    fn vs(g: &Graph, list: &[&str]) -> Vec<VertexId> {
        list.iter().map(|x| g.vertex(x).unwrap()).collect()
    }

    pub(crate) fn univocal_graph() -> Graph {
        build_graph(
            &[
                ("s", "u", 1),
                ("u", "v", 1),
                ("v", "w", 1),
                ("w", "t", 1),
                ("s", "a", 1),
                ("a", "g", 1),
                ("a", "d", 1),
                ("g", "d", 1),
                ("d", "e", 1),
                ("e", "a", 1),
                ("d", "f", 1),
                ("f", "t", 1),
                ("s", "b", 1),
                ("b", "c", 1),
                ("c", "t", 1),
            ],
            "s",
            "t",
        )
        .unwrap()
    }

    #[test]
    fn univocal_sequences_and_collapse() {
        let g = univocal_graph();
        let trees = build_blue_trees(&g, &vs(&g, &["a", "e", "g", "u", "w"])).unwrap();
        let u = g.vertex("u").unwrap();
        let grp = trees.groups().iter().find(|grp| grp.representative() == u).unwrap();
        assert_eq!(names(&g, &grp.members), ["u", "w"]);
        assert_eq!(names(&g, &grp.stored), ["v", "w"]);
        let (e, a) = (g.vertex("e").unwrap(), g.vertex("a").unwrap());
        assert!(!trees.is_univocal_pair(e, a));
        let mut got: Vec<Vec<String>> = maximal_safe_sequences(&trees).iter().map(|x| names(&g, &x.vertices)).collect();
        got.sort();
        let mut want: Vec<Vec<String>> = [
            vec!["s", "u", "v", "w", "t"],
            vec!["s", "a", "d", "e", "a", "d", "f", "t"],
            vec!["s", "a", "g", "d", "f", "t"],
        ]
        .iter()
        .map(|x| x.iter().map(|s| s.to_string()).collect())
        .collect();
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn diamond_all_vertices() {
        let g = fixtures::diamond();
        let all: Vec<_> = (0..g.n()).collect();
        let trees = build_blue_trees(&g, &all).unwrap();
        assert!(trees.groups().iter().all(|grp| grp.members.len() == 1));
        let got: Vec<_> = maximal_safe_sequences(&trees).iter().map(|x| names(&g, &x.vertices)).collect();
        assert_eq!(got, [vec!["s", "a", "t"], vec!["s", "b", "t"]]);
    }

    #[test]
    fn empty_and_unreachable_c() {
        let g = build_graph(&[("s", "a", 1), ("a", "t", 1), ("s", "d", 1)], "s", "t").unwrap();
        assert_eq!(build_blue_trees(&g, &[]).unwrap_err(), SafetyError::EmptyC);
        let d = g.vertex("d").unwrap();
        assert_eq!(build_blue_trees(&g, &[d]).unwrap_err(), SafetyError::UnreachableCVertex("d".into()));
        assert_eq!(edge_safe_sequences(&g, &[]).unwrap_err(), SafetyError::EmptyC);
    }

    #[test]
    fn diamond_edges() {
        let g = fixtures::diamond();
        let all: Vec<_> = (0..g.m()).collect();
        let seqs = edge_safe_sequences(&g, &all).unwrap();
        let labels: Vec<Vec<String>> =
            seqs.iter().map(|s| s.edges.iter().map(|&e| g.edge_label(e)).collect()).collect();
        assert_eq!(labels, [vec!["s>a", "a>t"], vec!["s>b", "b>t"]]);
        let (w, witness) = longest_covering_sequence(g.m(), &seqs);
        let sa = g.edge_by_names("s", "a").unwrap();
        assert_eq!(w[sa], 2);
        assert_eq!(seqs[witness[sa].unwrap()].edges, vec![sa, g.edge_by_names("a", "t").unwrap()]);
    }

    #[test]
    fn cycle_edges_single_sequence() {
        let g = fixtures::cycle();
        let all: Vec<_> = (0..g.m()).collect();
        let seqs = edge_safe_sequences(&g, &all).unwrap();
        assert_eq!(seqs.len(), 1);
        let labels: Vec<String> = seqs[0].edges.iter().map(|&e| g.edge_label(e)).collect();
        assert_eq!(labels, ["s>a", "a>b", "b>a", "a>t"]);
        let (w, _) = longest_covering_sequence(g.m(), &seqs);
        assert_eq!(w[g.edge_by_names("a", "b").unwrap()], 4);
    }

    #[test]
    fn uncovered_edge_has_zero_weight() {
        let g = fixtures::diamond();
        let sa = g.edge_by_names("s", "a").unwrap();
        let seqs = edge_safe_sequences(&g, &[sa]).unwrap();
        let (w, witness) = longest_covering_sequence(g.m(), &seqs);
        let sb = g.edge_by_names("s", "b").unwrap();
        assert_eq!(w[sb], 0);
        assert_eq!(witness[sb], None);
    }
}
