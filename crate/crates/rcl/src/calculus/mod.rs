//! System models built from a wiring file, and the composition rules that
//! turn wired contracts into obligations and derived properties.

mod render;
mod rules;

use std::collections::BTreeMap;
use std::fmt;

use crate::ast::{Dir, IoRef};
use crate::diag::{Diagnostic, Span};
use crate::typeck::{Type, TypedContract};

pub use render::{render_fotl, render_header, render_stream_semantics, Renderable};
pub use rules::{apply_r1, apply_r2, apply_r3, apply_r4, CompositionResult, DerivedProperty, Obligation, Rule};

/// `Node.var` on one side of a wiring edge.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Endpoint {
    pub node: String,
    pub var: String,
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.node, self.var)
    }
}

/// One wiring equation: an output of `source` carries the same stream as an
/// input of `sink`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub source: Endpoint,
    pub sink: Endpoint,
    pub line: u32,
}

impl Edge {
    pub fn source_ref(&self) -> IoRef {
        IoRef::qualified(&self.source.node, Dir::Out, &self.source.var)
    }

    pub fn sink_ref(&self) -> IoRef {
        IoRef::qualified(&self.sink.node, Dir::In, &self.sink.var)
    }
}

#[derive(Debug, Clone)]
pub struct SystemModel {
    pub contracts: BTreeMap<String, TypedContract>,
    pub edges: Vec<Edge>,
}

impl SystemModel {
    pub fn contract(&self, node: &str) -> Option<&TypedContract> {
        self.contracts.get(node)
    }

    pub fn edges_between(&self, from: &str, to: &str) -> impl Iterator<Item = &Edge> {
        let (from, to) = (from.to_string(), to.to_string());
        self.edges.iter().filter(move |e| e.source.node == from && e.sink.node == to)
    }

    /// Inputs no edge feeds; they are driven by the environment.
    pub fn environment_inputs(&self) -> Vec<IoRef> {
        let mut out = Vec::new();
        for (name, c) in &self.contracts {
            for v in &c.contract.inputs {
                if !self.edges.iter().any(|e| e.sink.node == *name && e.sink.var == v.name) {
                    out.push(IoRef::qualified(name, Dir::In, &v.name));
                }
            }
        }
        out
    }

    /// Type of a node-qualified access.
    pub fn type_of(&self, r: &IoRef) -> Option<Type> {
        self.contracts.get(r.node.as_deref()?)?.var_type(r.dir, &r.name)
    }
}

fn split_endpoint(s: &str, want: Dir) -> Option<Endpoint> {
    let parts: Vec<&str> = s.split('.').collect();
    let ok = |p: &str| !p.is_empty() && p.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    match parts.as_slice() {
        [n, v] if ok(n) && ok(v) => Some(Endpoint { node: n.to_string(), var: v.to_string() }),
        [n, d, v] if ok(n) && ok(v) && *d == want.keyword() => Some(Endpoint { node: n.to_string(), var: v.to_string() }),
        _ => None,
    }
}

/// Reads `Src.out_var -> Dst.in_var` edges, one per line. `#` starts a comment.
pub fn parse_wiring(text: &str) -> Result<Vec<Edge>, Vec<Diagnostic>> {
    let mut edges = Vec::new();
    let mut diags = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = (i + 1) as u32;
        let body = raw.split('#').next().unwrap_or("");
        if body.trim().is_empty() {
            continue;
        }
        let col = (body.len() - body.trim_start().len() + 1) as u32;
        let span = Span::new(line, col, body.trim().chars().count() as u32);
        let Some((l, r)) = body.split_once("->") else {
            diags.push(Diagnostic::error("W001", span, "expected `Node.output -> Node.input`"));
            continue;
        };
        match (split_endpoint(l.trim(), Dir::Out), split_endpoint(r.trim(), Dir::In)) {
            (Some(source), Some(sink)) => edges.push(Edge { source, sink, line }),
            _ => diags.push(Diagnostic::error("W001", span, "expected `Node.output -> Node.input`")),
        }
    }
    if diags.is_empty() {
        Ok(edges)
    } else {
        Err(diags)
    }
}

pub fn build_system_model(wiring: &str, contracts: &[TypedContract]) -> Result<SystemModel, Vec<Diagnostic>> {
    let edges = parse_wiring(wiring)?;
    let mut map = BTreeMap::new();
    for c in contracts {
        map.insert(c.node().to_string(), c.clone());
    }
    let mut diags = Vec::new();
    for e in &edges {
        let span = Span::new(e.line, 1, 0);
        let mut side = |ep: &Endpoint, dir: Dir| -> Option<Type> {
            let Some(c) = map.get(&ep.node) else {
                diags.push(Diagnostic::error("C001", span, format!("unknown node `{}`", ep.node)));
                return None;
            };
            if let Some(t) = c.var_type(dir, &ep.var) {
                return Some(t);
            }
            let other = match dir {
                Dir::In => Dir::Out,
                Dir::Out => Dir::In,
            };
            if c.contract.var(other, &ep.var).is_some() {
                diags.push(Diagnostic::error(
                    "C003",
                    span,
                    format!("`{ep}` is an {}put, expected an {}put", other.keyword(), dir.keyword()),
                ));
            } else {
                diags.push(Diagnostic::error("C002", span, format!("unknown variable `{ep}`")));
            }
            None
        };
        let st = side(&e.source, Dir::Out);
        let dt = side(&e.sink, Dir::In);
        if let (Some(st), Some(dt)) = (st, dt) {
            if st != dt {
                diags.push(Diagnostic::error(
                    "C004",
                    span,
                    format!("type mismatch: `{}` is `{st}` but `{}` is `{dt}`", e.source, e.sink),
                ));
            }
        }
    }
    if diags.is_empty() {
        Ok(SystemModel { contracts: map, edges })
    } else {
        Err(diags)
    }
}
