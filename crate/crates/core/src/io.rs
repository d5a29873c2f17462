//! Edge-list text format and DOT export.
//!
//! One `tail head` pair per line, whitespace separated. `#` starts a comment
//! and `v name` declares a vertex that may have no edges.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::graph::{Digraph, Edge, VertexId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: self-loop at {vertex}")]
    Loop { line: usize, vertex: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Parsed {
    pub graph: Digraph,
    pub warnings: Vec<String>,
}

pub fn parse_digraph(text: &str) -> Result<Parsed, ParseError> {
    let mut vertices: Vec<VertexId> = Vec::new();
    let mut seen_v = BTreeSet::new();
    let mut edges: Vec<Edge> = Vec::new();
    let mut seen_e = BTreeSet::new();
    let mut warnings = Vec::new();
    let mut declare = |v: &str, vertices: &mut Vec<VertexId>| {
        if seen_v.insert(v.to_string()) {
            vertices.push(VertexId::from(v));
        }
    };
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("");
        let toks: Vec<&str> = body.split_whitespace().collect();
        match toks.as_slice() {
            [] => {}
            ["v", name] => declare(name, &mut vertices),
            [a, b] => {
                if a == b {
                    return Err(ParseError::Loop { line, vertex: a.to_string() });
                }
                declare(a, &mut vertices);
                declare(b, &mut vertices);
                if seen_e.insert((a.to_string(), b.to_string())) {
                    edges.push((VertexId::from(*a), VertexId::from(*b)));
                } else {
                    warnings.push(format!("line {line}: duplicate edge {a} {b} ignored"));
                }
            }
            _ => {
                return Err(ParseError::Syntax {
                    line,
                    message: format!("expected `tail head` or `v name`, got {:?}", body.trim()),
                })
            }
        }
    }
    let graph = Digraph::new(vertices, edges).map_err(|e| ParseError::Syntax { line: 0, message: e.to_string() })?;
    Ok(Parsed { graph, warnings })
}

/// Edge-list text that parses back to an equal digraph. Vertices without
/// edges are declared with `v` lines.
pub fn serialize_digraph(g: &Digraph) -> String {
    let mut out = String::new();
    for (i, v) in g.vertices().iter().enumerate() {
        if g.out_idx(i).is_empty() && g.in_idx(i).is_empty() {
            let _ = writeln!(out, "v {v}");
        }
    }
    for (a, b) in g.edges() {
        let _ = writeln!(out, "{a} {b}");
    }
    out
}

fn dot_id(v: &VertexId) -> String {
    format!("\"{}\"", v.as_str().replace('\\', "\\\\").replace('"', "\\\""))
}

pub fn to_dot(g: &Digraph, name: &str) -> String {
    let mut out = format!("digraph {} {{\n", dot_id(&VertexId::from(name)));
    for v in g.vertices() {
        let _ = writeln!(out, "  {};", dot_id(v));
    }
    for (a, b) in g.edges() {
        let _ = writeln!(out, "  {} -> {};", dot_id(&a), dot_id(&b));
    }
    out.push_str("}\n");
    out
}
