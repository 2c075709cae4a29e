//! s-t graphs: construction, validation, text I/O and the structural
//! transformations used by the safety and width machinery.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

pub mod condense;
pub mod reach;
pub mod transform;

pub use condense::{condense, Condensation};
pub use reach::{reachability, ReachabilityIndex};
pub use transform::{compact_unitigs, compact_unitigs_keeping, midpoint_transform, Compaction, Midpoints};

/// Dense vertex index.
pub type VertexId = usize;
/// Dense edge index (position in the input edge list).
pub type EdgeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub tail: VertexId,
    pub head: VertexId,
}

impl Edge {
    pub fn is_self_loop(&self) -> bool {
        self.tail == self.head
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("duplicate edge {0} -> {1}")]
    DuplicateEdge(String, String),
    #[error("source {0} has an incoming edge")]
    SourceHasInEdge(String),
    #[error("sink {0} has an outgoing edge")]
    SinkHasOutEdge(String),
    #[error("negative weight {weight} on edge {tail} -> {head}")]
    NegativeWeight { tail: String, head: String, weight: i64 },
    #[error("source and sink are the same vertex {0}")]
    SourceIsSink(String),
    #[error("empty start set")]
    EmptyStartSet,
    #[error("empty end set")]
    EmptyEndSet,
    #[error("unknown vertex {0}")]
    UnknownVertex(String),
    #[error("vertex name {0} is reserved for the global source/sink")]
    ReservedName(String),
    #[error("edge {0} -> {1} is not in the graph")]
    EdgeNotInGraph(String, String),
}

/// Directed graph with a unique source and sink, integer edge weights,
/// optional self-loops and no parallel edges.
///
/// Vertex names are opaque strings; internally everything is indexed densely
/// in order of first appearance.
#[derive(Debug, Clone)]
pub struct Graph {
    names: Vec<String>,
    index: HashMap<String, VertexId>,
    edges: Vec<Edge>,
    weights: Vec<u64>,
    auxiliary: Vec<bool>,
    out_adj: Vec<Vec<EdgeId>>,
    in_adj: Vec<Vec<EdgeId>>,
    edge_index: HashMap<(VertexId, VertexId), EdgeId>,
    source: VertexId,
    sink: VertexId,
}

/// Accumulates named vertices and weighted edges before validation.
#[derive(Debug, Clone, Default)]
pub struct GraphBuilder {
    names: Vec<String>,
    index: HashMap<String, VertexId>,
    edges: Vec<Edge>,
    weights: Vec<u64>,
    auxiliary: Vec<bool>,
    edge_index: HashMap<(VertexId, VertexId), EdgeId>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn vertex(&mut self, name: &str) -> VertexId {
        if let Some(&v) = self.index.get(name) {
            return v;
        }
        let v = self.names.len();
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), v);
        v
    }

    pub fn edge(&mut self, tail: &str, head: &str, weight: u64) -> Result<EdgeId, GraphError> {
        let u = self.vertex(tail);
        let v = self.vertex(head);
        self.push_edge(u, v, weight, false)
    }

    fn push_edge(&mut self, u: VertexId, v: VertexId, weight: u64, aux: bool) -> Result<EdgeId, GraphError> {
        if self.edge_index.contains_key(&(u, v)) {
            return Err(GraphError::DuplicateEdge(self.names[u].clone(), self.names[v].clone()));
        }
        let e = self.edges.len();
        self.edges.push(Edge { tail: u, head: v });
        self.weights.push(weight);
        self.auxiliary.push(aux);
        self.edge_index.insert((u, v), e);
        Ok(e)
    }

    /// Flags an existing edge as auxiliary (a terminal wrapper edge kept out of E′).
    pub fn mark_auxiliary(&mut self, tail: &str, head: &str) -> Result<(), GraphError> {
        let e = match (self.index.get(tail), self.index.get(head)) {
            (Some(&u), Some(&v)) => self.edge_index.get(&(u, v)).copied(),
            _ => None,
        };
        let e = e.ok_or_else(|| GraphError::EdgeNotInGraph(tail.to_string(), head.to_string()))?;
        self.auxiliary[e] = true;
        Ok(())
    }

    /// Validates and freezes the graph with `source` and `sink` as terminals.
    pub fn build(mut self, source: &str, sink: &str) -> Result<Graph, GraphError> {
        if source == sink {
            return Err(GraphError::SourceIsSink(source.to_string()));
        }
        let s = self.vertex(source);
        let t = self.vertex(sink);
        let n = self.names.len();
        let mut out_adj = vec![Vec::new(); n];
        let mut in_adj = vec![Vec::new(); n];
        for (e, edge) in self.edges.iter().enumerate() {
            out_adj[edge.tail].push(e);
            in_adj[edge.head].push(e);
        }
        // A self-loop at a terminal also violates the degree constraint.
        if !in_adj[s].is_empty() {
            return Err(GraphError::SourceHasInEdge(source.to_string()));
        }
        if !out_adj[t].is_empty() {
            return Err(GraphError::SinkHasOutEdge(sink.to_string()));
        }
        Ok(Graph {
            names: self.names,
            index: self.index,
            edges: self.edges,
            weights: self.weights,
            auxiliary: self.auxiliary,
            out_adj,
            in_adj,
            edge_index: self.edge_index,
            source: s,
            sink: t,
        })
    }
}

/// Builds and validates an s-t graph from a weighted edge list.
pub fn build_graph<S: AsRef<str>>(edges: &[(S, S, u64)], source: &str, sink: &str) -> Result<Graph, GraphError> {
    let mut b = GraphBuilder::new();
    b.vertex(source);
    for (u, v, w) in edges {
        b.edge(u.as_ref(), v.as_ref(), *w)?;
    }
    b.build(source, sink)
}

/// Name given to the global source added by [`normalize_sources_sinks`].
pub const GLOBAL_SOURCE: &str = "__source__";
/// Name given to the global sink added by [`normalize_sources_sinks`].
pub const GLOBAL_SINK: &str = "__sink__";

/// Wraps a multi-source/multi-sink graph with a fresh global source connected
/// to every start vertex and a fresh global sink reached from every end vertex.
///
/// The added edges have weight 0, are flagged auxiliary on the returned graph
/// and are also returned explicitly.
pub fn normalize_sources_sinks<S: AsRef<str>>(
    vertices: &[S],
    edges: &[(S, S, u64)],
    starts: &[S],
    ends: &[S],
) -> Result<(Graph, Vec<EdgeId>), GraphError> {
    if starts.is_empty() {
        return Err(GraphError::EmptyStartSet);
    }
    if ends.is_empty() {
        return Err(GraphError::EmptyEndSet);
    }
    let mut b = GraphBuilder::new();
    let s = b.vertex(GLOBAL_SOURCE);
    for v in vertices {
        check_reserved(v.as_ref())?;
        b.vertex(v.as_ref());
    }
    for (u, v, w) in edges {
        check_reserved(u.as_ref())?;
        check_reserved(v.as_ref())?;
        b.edge(u.as_ref(), v.as_ref(), *w)?;
    }
    let mut aux = Vec::new();
    for a in starts {
        let a = lookup(&b, a.as_ref())?;
        aux.push(b.push_edge(s, a, 0, true)?);
    }
    let t = b.vertex(GLOBAL_SINK);
    for z in ends {
        let z = lookup(&b, z.as_ref())?;
        aux.push(b.push_edge(z, t, 0, true)?);
    }
    Ok((b.build(GLOBAL_SOURCE, GLOBAL_SINK)?, aux))
}

fn check_reserved(name: &str) -> Result<(), GraphError> {
    if name == GLOBAL_SOURCE || name == GLOBAL_SINK {
        Err(GraphError::ReservedName(name.to_string()))
    } else {
        Ok(())
    }
}

fn lookup(b: &GraphBuilder, name: &str) -> Result<VertexId, GraphError> {
    b.index.get(name).copied().ok_or_else(|| GraphError::UnknownVertex(name.to_string()))
}

impl Graph {
    pub fn n(&self) -> usize {
        self.names.len()
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn source(&self) -> VertexId {
        self.source
    }

    pub fn sink(&self) -> VertexId {
        self.sink
    }

    pub fn name(&self, v: VertexId) -> &str {
        &self.names[v]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn vertex(&self, name: &str) -> Option<VertexId> {
        self.index.get(name).copied()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> Edge {
        self.edges[e]
    }

    pub fn weight(&self, e: EdgeId) -> u64 {
        self.weights[e]
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn is_auxiliary(&self, e: EdgeId) -> bool {
        self.auxiliary[e]
    }

    pub fn out_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.out_adj[v]
    }

    pub fn in_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.in_adj[v]
    }

    pub fn find_edge(&self, u: VertexId, v: VertexId) -> Option<EdgeId> {
        self.edge_index.get(&(u, v)).copied()
    }

    /// Looks up an edge by endpoint names.
    pub fn edge_by_names(&self, tail: &str, head: &str) -> Result<EdgeId, GraphError> {
        self.vertex(tail)
            .zip(self.vertex(head))
            .and_then(|(u, v)| self.find_edge(u, v))
            .ok_or_else(|| GraphError::EdgeNotInGraph(tail.to_string(), head.to_string()))
    }

    pub fn successors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.out_adj[v].iter().map(move |&e| self.edges[e].head)
    }

    pub fn predecessors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.in_adj[v].iter().map(move |&e| self.edges[e].tail)
    }

    /// `u>v` label for an edge, as used by the subset and E' file formats.
    pub fn edge_label(&self, e: EdgeId) -> String {
        let Edge { tail, head } = self.edges[e];
        format!("{}>{}", self.names[tail], self.names[head])
    }

    /// Same graph with replaced edge weights.
    pub fn with_weights(&self, weights: Vec<u64>) -> Graph {
        assert_eq!(weights.len(), self.m());
        Graph { weights, ..self.clone() }
    }

    /// Vertices reachable from `start` following edges forward (or backward).
    pub fn reachable_from(&self, start: VertexId, backward: bool) -> Vec<bool> {
        let mut seen = vec![false; self.n()];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(u) = stack.pop() {
            let adj = if backward { &self.in_adj[u] } else { &self.out_adj[u] };
            for &e in adj {
                let w = if backward { self.edges[e].tail } else { self.edges[e].head };
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen
    }

    /// Vertices lying on at least one s-t walk.
    pub fn live_vertices(&self) -> Vec<bool> {
        let fwd = self.reachable_from(self.source, false);
        let bwd = self.reachable_from(self.sink, true);
        fwd.iter().zip(&bwd).map(|(a, b)| *a && *b).collect()
    }

    /// Edges lying on at least one s-t walk.
    pub fn live_edges(&self) -> Vec<bool> {
        let live = self.live_vertices();
        self.edges.iter().map(|e| live[e.tail] && live[e.head]).collect()
    }

    /// Serializes to the tab-separated text format read by [`parse_graph`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "#source {}", self.names[self.source]).unwrap();
        writeln!(out, "#sink {}", self.names[self.sink]).unwrap();
        for (e, edge) in self.edges.iter().enumerate() {
            writeln!(out, "{}\t{}\t{}", self.names[edge.tail], self.names[edge.head], self.weights[e]).unwrap();
        }
        for (e, edge) in self.edges.iter().enumerate() {
            if self.auxiliary[e] {
                writeln!(out, "#auxiliary\t{}\t{}", self.names[edge.tail], self.names[edge.head]).unwrap();
            }
        }
        out
    }

    /// Graphviz rendering with edge weights as labels.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph G {\n  rankdir=LR;\n");
        for (e, edge) in self.edges.iter().enumerate() {
            writeln!(
                out,
                "  \"{}\" -> \"{}\" [label=\"{}\"];",
                self.names[edge.tail], self.names[edge.head], self.weights[e]
            )
            .unwrap();
        }
        out.push_str("}\n");
        out
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    #[error("expected `tail<TAB>head<TAB>weight`")]
    Malformed,
    #[error("invalid weight `{0}`")]
    BadWeight(String),
    #[error("missing #source header")]
    MissingSource,
    #[error("missing #sink header")]
    MissingSink,
    #[error("{0}")]
    Graph(GraphError),
}

/// Parses the tab-separated graph format: `#source <id>` and `#sink <id>`
/// headers, then one `tail<TAB>head<TAB>weight` record per line. A line
/// `#auxiliary<TAB>tail<TAB>head` flags an edge as a terminal wrapper. Other
/// lines starting with `#` and blank lines are ignored.
pub fn parse_graph(text: &str) -> Result<Graph, ParseError> {
    let mut source = None;
    let mut sink = None;
    let mut b = GraphBuilder::new();
    let mut auxiliary = Vec::new();
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        last_line = line_no;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(name) = rest.strip_prefix("source") {
                let name = name.trim();
                if name.is_empty() {
                    return Err(ParseError { line: line_no, kind: ParseErrorKind::MissingSource });
                }
                source = Some(name.to_string());
            } else if let Some(name) = rest.strip_prefix("sink") {
                let name = name.trim();
                if name.is_empty() {
                    return Err(ParseError { line: line_no, kind: ParseErrorKind::MissingSink });
                }
                sink = Some(name.to_string());
            } else if let Some(pair) = rest.strip_prefix("auxiliary") {
                let fields: Vec<&str> = pair.split_whitespace().collect();
                if fields.len() != 2 {
                    return Err(ParseError { line: line_no, kind: ParseErrorKind::Malformed });
                }
                auxiliary.push((line_no, fields[0].to_string(), fields[1].to_string()));
            }
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 || fields[0].is_empty() || fields[1].is_empty() {
            return Err(ParseError { line: line_no, kind: ParseErrorKind::Malformed });
        }
        let raw_weight = fields[2].trim();
        let weight: i64 = raw_weight
            .parse()
            .map_err(|_| ParseError { line: line_no, kind: ParseErrorKind::BadWeight(raw_weight.to_string()) })?;
        if weight < 0 {
            let kind = ParseErrorKind::Graph(GraphError::NegativeWeight {
                tail: fields[0].to_string(),
                head: fields[1].to_string(),
                weight,
            });
            return Err(ParseError { line: line_no, kind });
        }
        b.edge(fields[0], fields[1], weight as u64)
            .map_err(|e| ParseError { line: line_no, kind: ParseErrorKind::Graph(e) })?;
    }
    let source = source.ok_or(ParseError { line: last_line, kind: ParseErrorKind::MissingSource })?;
    let sink = sink.ok_or(ParseError { line: last_line, kind: ParseErrorKind::MissingSink })?;
    for (line, tail, head) in auxiliary {
        b.mark_auxiliary(&tail, &head).map_err(|e| ParseError { line, kind: ParseErrorKind::Graph(e) })?;
    }
    b.build(&source, &sink).map_err(|e| ParseError { line: last_line, kind: ParseErrorKind::Graph(e) })
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn diamond() -> Graph {
        build_graph(&[("s", "a", 2), ("s", "b", 3), ("a", "t", 2), ("b", "t", 3)], "s", "t").unwrap()
    }

    pub fn cycle() -> Graph {
        build_graph(&[("s", "a", 2), ("a", "b", 1), ("b", "a", 1), ("a", "t", 2)], "s", "t").unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_graph() {
        let g = build_graph(&[("s", "a", 2), ("a", "t", 2)], "s", "t").unwrap();
        assert_eq!((g.n(), g.m()), (3, 2));
        assert_eq!(g.name(g.source()), "s");
        assert_eq!(g.name(g.sink()), "t");
    }

    #[test]
    fn rejects_bad_terminals() {
        let err = build_graph(&[("s", "a", 1), ("b", "s", 1)], "s", "t").unwrap_err();
        assert_eq!(err, GraphError::SourceHasInEdge("s".into()));
        let err = build_graph(&[("s", "t", 1), ("t", "a", 1)], "s", "t").unwrap_err();
        assert_eq!(err, GraphError::SinkHasOutEdge("t".into()));
        let err = build_graph(&[("s", "s", 1), ("s", "t", 1)], "s", "t").unwrap_err();
        assert_eq!(err, GraphError::SourceHasInEdge("s".into()));
        let err = build_graph(&[("s", "t", 1)], "s", "s").unwrap_err();
        assert_eq!(err, GraphError::SourceIsSink("s".into()));
    }

    #[test]
    fn rejects_parallel_edges() {
        let err = build_graph(&[("s", "a", 1), ("s", "a", 2)], "s", "a").unwrap_err();
        assert_eq!(err, GraphError::DuplicateEdge("s".into(), "a".into()));
    }

    #[test]
    fn normalize_wraps_terminal_sets() {
        let (g, aux) =
            normalize_sources_sinks(&["a", "b", "c"], &[("a", "c", 1), ("b", "c", 1)], &["a", "b"], &["c"]).unwrap();
        assert_eq!(aux.len(), 3);
        for &e in &aux {
            assert!(g.is_auxiliary(e));
            assert_eq!(g.weight(e), 0);
        }
        assert_eq!(g.out_edges(g.source()).len(), 2);
        assert_eq!(g.in_edges(g.sink()).len(), 1);
        assert!(!g.is_auxiliary(g.edge_by_names("a", "c").unwrap()));
    }

    #[test]
    fn normalize_single_vertex() {
        let empty: [(&str, &str, u64); 0] = [];
        let (g, aux) = normalize_sources_sinks(&["a"], &empty, &["a"], &["a"]).unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(aux.len(), 2);
        assert!(g.edge_by_names(GLOBAL_SOURCE, "a").is_ok());
        assert!(g.edge_by_names("a", GLOBAL_SINK).is_ok());
    }

    #[test]
    fn normalize_wraps_existing_source() {
        let (g, aux) = normalize_sources_sinks(&["s", "t"], &[("s", "t", 4)], &["s"], &["t"]).unwrap();
        assert_eq!(aux.len(), 2);
        assert_eq!(g.in_edges(g.vertex("s").unwrap()).len(), 1);
        assert!(g.in_edges(g.source()).is_empty());
        assert!(g.out_edges(g.sink()).is_empty());
    }

    #[test]
    fn normalize_errors() {
        let e: [(&str, &str, u64); 0] = [];
        assert_eq!(normalize_sources_sinks(&["a"], &e, &[], &["a"]).unwrap_err(), GraphError::EmptyStartSet);
        assert_eq!(normalize_sources_sinks(&["a"], &e, &["a"], &[]).unwrap_err(), GraphError::EmptyEndSet);
        assert!(matches!(
            normalize_sources_sinks(&["a"], &e, &["a"], &["zz"]).unwrap_err(),
            GraphError::UnknownVertex(_)
        ));
    }

    #[test]
    fn text_round_trip() {
        let g = fixtures::cycle();
        let h = parse_graph(&g.to_text()).unwrap();
        assert_eq!(h.to_text(), g.to_text());
    }

    #[test]
    fn auxiliary_flags_survive_text() {
        let (g, aux) = normalize_sources_sinks(&["a", "b"], &[("a", "b", 4)], &["a"], &["b"]).unwrap();
        let h = parse_graph(&g.to_text()).unwrap();
        let flagged: Vec<EdgeId> = (0..h.m()).filter(|&e| h.is_auxiliary(e)).collect();
        assert_eq!(flagged.len(), aux.len());
        assert!(!h.is_auxiliary(h.edge_by_names("a", "b").unwrap()));
        let err = parse_graph("#source s\n#sink t\ns\tt\t1\n#auxiliary\ts\tx\n").unwrap_err();
        assert_eq!(err.line, 4);
    }

    #[test]
    fn parse_reports_line_numbers() {
        let err = parse_graph("#source s\n#sink t\ns\ta\t1\na t 1\n").unwrap_err();
        assert_eq!(err.line, 4);
        assert_eq!(err.kind, ParseErrorKind::Malformed);
        let err = parse_graph("#source s\n#sink t\ns\ta\t-2\n").unwrap_err();
        assert_eq!(err.line, 3);
        assert!(matches!(err.kind, ParseErrorKind::Graph(GraphError::NegativeWeight { .. })));
        let err = parse_graph("#source s\ns\ta\t1\n").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::MissingSink);
        let err = parse_graph("#source s\n#sink t\ns\tt\tx\n").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::BadWeight("x".into()));
    }

    #[test]
    fn live_vertices_exclude_dead_ends() {
        let g = build_graph(&[("s", "a", 1), ("a", "t", 1), ("s", "d", 1)], "s", "t").unwrap();
        let live = g.live_vertices();
        assert!(!live[g.vertex("d").unwrap()]);
        assert!(live[g.vertex("a").unwrap()]);
    }
}
