//! Browser bindings: each export takes graph text and returns a JSON string.
//!
//! The `*_json` functions are plain Rust so they can be tested natively.

use flowwalks::dominators::{build_s_dominator_tree, build_t_dominator_tree, DominatorTree};
use flowwalks::safety::{edge_safe_sequences, longest_covering_sequence, vertex_safe_sequences};
use flowwalks::widths::max_weight_antichain;
use flowwalks::{parse_graph, EdgeId, Graph, VertexId};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn load(text: &str) -> Result<Graph, String> {
    parse_graph(text).map_err(|e| e.to_string())
}

fn live_edges(g: &Graph) -> Vec<EdgeId> {
    let live = g.live_edges();
    (0..g.m()).filter(|&e| live[e] && g.weight(e) > 0).collect()
}

fn tree_json(g: &Graph, tree: &DominatorTree) -> Value {
    let parents: Vec<Value> = (0..g.n())
        .filter(|&v| tree.contains(v))
        .map(|v| json!({ "vertex": g.name(v), "parent": tree.parent(v).map(|p| g.name(p)) }))
        .collect();
    json!({ "root": g.name(tree.root()), "nodes": parents, "dot": tree.to_dot(g) })
}

/// Both dominator trees as parent lists plus DOT text.
pub fn dominators_json(text: &str) -> Result<Value, String> {
    let g = load(text)?;
    Ok(json!({
        "s": tree_json(&g, &build_s_dominator_tree(&g)),
        "t": tree_json(&g, &build_t_dominator_tree(&g)),
    }))
}

/// Maximal safe sequences over every live vertex (or edge when `edges` is set).
pub fn safe_sequences_json(text: &str, edges: bool) -> Result<Value, String> {
    let g = load(text)?;
    if edges {
        let c = live_edges(&g);
        let seqs = edge_safe_sequences(&g, &c).map_err(|e| e.to_string())?;
        let out: Vec<Value> =
            seqs.iter().map(|s| json!(s.edges.iter().map(|&e| g.edge_label(e)).collect::<Vec<_>>())).collect();
        return Ok(json!({ "kind": "edges", "sequences": out }));
    }
    let live = g.live_vertices();
    let c: Vec<VertexId> = (0..g.n()).filter(|&v| live[v]).collect();
    let seqs = vertex_safe_sequences(&g, &c).map_err(|e| e.to_string())?;
    let out: Vec<Value> =
        seqs.iter().map(|s| json!(s.vertices.iter().map(|&v| g.name(v)).collect::<Vec<_>>())).collect();
    Ok(json!({ "kind": "vertices", "sequences": out }))
}

/// Maximum-weight edge antichain, weighted by flow or by safe-sequence coverage.
pub fn antichain_json(text: &str, from_safety: bool) -> Result<Value, String> {
    let g = load(text)?;
    let weights = if from_safety {
        let c = live_edges(&g);
        if c.is_empty() {
            return Err("no edge lies on an s-t walk".into());
        }
        let seqs = edge_safe_sequences(&g, &c).map_err(|e| e.to_string())?;
        longest_covering_sequence(g.m(), &seqs).0
    } else {
        g.weights().to_vec()
    };
    let ac = max_weight_antichain(&g, &weights);
    let members: Vec<Value> =
        ac.edges.iter().map(|&e| json!({ "edge": g.edge_label(e), "weight": weights[e] })).collect();
    Ok(json!({ "edges": members, "totalWeight": ac.total_weight }))
}

fn wrap(r: Result<Value, String>) -> Result<String, JsError> {
    r.map(|v| v.to_string()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn dominators(text: &str) -> Result<String, JsError> {
    wrap(dominators_json(text))
}

#[wasm_bindgen(js_name = safeSequences)]
pub fn safe_sequences(text: &str, edges: bool) -> Result<String, JsError> {
    wrap(safe_sequences_json(text, edges))
}

#[wasm_bindgen]
pub fn antichain(text: &str, from_safety: bool) -> Result<String, JsError> {
    wrap(antichain_json(text, from_safety))
}
