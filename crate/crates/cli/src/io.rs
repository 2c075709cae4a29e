//! Readers for the auxiliary text inputs: subset files and E′ edge lists.

use flowwalks::{EdgeId, Graph};

/// An input problem tied to a file line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineError {
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for LineError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

/// Resolves one edge token, `u>v` or `u<TAB>v`.
pub fn parse_edge_token(g: &Graph, token: &str) -> Result<EdgeId, String> {
    let token = token.trim();
    let (u, v) = token
        .split_once('>')
        .or_else(|| token.split_once('\t'))
        .ok_or_else(|| format!("expected an edge written `u>v`, got `{token}`"))?;
    g.edge_by_names(u.trim(), v.trim()).map_err(|e| e.to_string())
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// One subset per line, edges separated by commas.
pub fn parse_subsets(g: &Graph, text: &str) -> Result<Vec<Vec<EdgeId>>, LineError> {
    content_lines(text)
        .map(|(line, l)| {
            l.split(',')
                .filter(|t| !t.trim().is_empty())
                .map(|t| parse_edge_token(g, t).map_err(|message| LineError { line, message }))
                .collect()
        })
        .collect()
}

/// One edge per line.
pub fn parse_edge_list(g: &Graph, text: &str) -> Result<Vec<EdgeId>, LineError> {
    content_lines(text).map(|(line, l)| parse_edge_token(g, l).map_err(|message| LineError { line, message })).collect()
}

pub fn format_subsets(g: &Graph, subsets: &[Vec<EdgeId>]) -> String {
    let mut out = String::new();
    for s in subsets {
        let tokens: Vec<String> = s.iter().map(|&e| g.edge_label(e)).collect();
        out.push_str(&tokens.join(","));
        out.push('\n');
    }
    out
}
