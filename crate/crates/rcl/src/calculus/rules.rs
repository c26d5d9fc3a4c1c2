use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::Serialize;

use super::{Edge, SystemModel};
use crate::ast::{Formula, IoRef};
use crate::diag::{Diagnostic, Span};
use crate::typeck::Type;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Rule {
    R1,
    R2,
    R3,
    R4,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// A side condition `antecedent => consequent`, universally closed over
/// `quantified_vars`.
#[derive(Debug, Clone, PartialEq)]
pub struct Obligation {
    pub quantified_vars: Vec<(IoRef, Type)>,
    pub antecedent: Formula,
    pub consequent: Formula,
    /// For R4, the sub-derivation that establishes this sequent.
    pub premise: Option<Box<CompositionResult>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DerivedProperty {
    pub quantified_vars: Vec<(IoRef, Type)>,
    pub antecedent: Formula,
    /// `(eventually, formula)` pairs, conjoined.
    pub consequents: Vec<(bool, Formula)>,
}

impl DerivedProperty {
    pub fn consequent(&self) -> Formula {
        Formula::conj(self.consequents.iter().map(|(_, f)| f.clone()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompositionResult {
    pub rule: Rule,
    pub participants: Vec<String>,
    pub obligations: Vec<Obligation>,
    pub derived: DerivedProperty,
    /// Source output access renamed to the sink input access it is wired to.
    pub substitution: Vec<(IoRef, IoRef)>,
    pub notes: Vec<String>,
}

fn err(code: &'static str, msg: impl Into<String>) -> Vec<Diagnostic> {
    vec![Diagnostic::error(code, Span::default(), msg)]
}

struct Ctx<'a> {
    model: &'a SystemModel,
}

impl<'a> Ctx<'a> {
    fn require(&self, node: &str) -> Result<&'a crate::typeck::TypedContract, Vec<Diagnostic>> {
        self.model.contract(node).ok_or_else(|| err("C001", format!("unknown node `{node}`")))
    }

    fn assumption(&self, node: &str) -> Formula {
        self.model.contracts[node].contract.assumption().qualify(node)
    }

    fn guarantee(&self, node: &str) -> Formula {
        self.model.contracts[node].contract.guarantee().qualify(node)
    }

    fn edges(&self, from: &str, to: &str) -> Vec<&'a Edge> {
        self.model.edges_between(from, to).collect()
    }

    /// Substitution for the guarantees of `sources` as seen by `sink`.
    fn subst(&self, sources: &[&str], sink: &str) -> HashMap<IoRef, IoRef> {
        let mut m = HashMap::new();
        for s in sources {
            for e in self.edges(s, sink) {
                m.entry(e.source_ref()).or_insert_with(|| e.sink_ref());
            }
        }
        m
    }

    fn typed(&self, fs: &[&Formula]) -> Vec<(IoRef, Type)> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for f in fs {
            for r in f.io_refs() {
                if seen.insert(r.clone()) {
                    let ty = self.model.type_of(&r).unwrap_or(Type::Empty("?".into()));
                    out.push((r, ty));
                }
            }
        }
        out
    }

    fn obligation(&self, sources: &[&str], sink: &str) -> Obligation {
        let m = self.subst(sources, sink);
        let antecedent = Formula::conj(sources.iter().map(|s| self.guarantee(s).substitute(&m)));
        let consequent = self.assumption(sink);
        Obligation {
            quantified_vars: self.typed(&[&antecedent, &consequent]),
            antecedent,
            consequent,
            premise: None,
        }
    }

    fn derived(&self, entries: &[&str], exits: &[&str]) -> DerivedProperty {
        let antecedent = Formula::conj(entries.iter().map(|n| self.assumption(n)));
        let consequents: Vec<(bool, Formula)> = exits.iter().map(|n| (true, self.guarantee(n))).collect();
        let mut all: Vec<&Formula> = vec![&antecedent];
        all.extend(consequents.iter().map(|(_, f)| f));
        DerivedProperty { quantified_vars: self.typed(&all), antecedent, consequents }
    }

    fn substitution(&self, pairs: &[(&str, &str)]) -> Vec<(IoRef, IoRef)> {
        pairs
            .iter()
            .flat_map(|(a, b)| self.edges(a, b))
            .map(|e| (e.source_ref(), e.sink_ref()))
            .collect()
    }

    /// Every output of `from` must be wired into `to`.
    fn fully_wired(&self, from: &str, to: &str, code: &'static str, what: &str) -> Result<(), Vec<Diagnostic>> {
        let c = self.require(from)?;
        let edges = self.edges(from, to);
        let missing: Vec<String> = c
            .contract
            .outputs
            .iter()
            .filter(|o| !edges.iter().any(|e| e.source.var == o.name))
            .map(|o| format!("{from}.{}", o.name))
            .collect();
        if !missing.is_empty() {
            return Err(err(code, format!("{what}: {} not wired into `{to}`", missing.join(", "))));
        }
        if edges.is_empty() {
            return Err(err(code, format!("{what}: `{from}` has no edge into `{to}`")));
        }
        Ok(())
    }

    /// Edges among `nodes` that run against the rule's flow `forward`.
    fn back_edge_notes(&self, nodes: &[&str], forward: &[(&str, &str)]) -> Vec<String> {
        let mut notes = Vec::new();
        for e in &self.model.edges {
            let (s, d) = (e.source.node.as_str(), e.sink.node.as_str());
            if nodes.contains(&s) && nodes.contains(&d) && s != d && !forward.contains(&(s, d)) {
                notes.push(format!("edge {} -> {} is outside this rule's data flow and is not used", e.source, e.sink));
            }
        }
        notes
    }
}

fn distinct(nodes: &[&str]) -> Result<(), Vec<Diagnostic>> {
    let mut seen = HashSet::new();
    for n in nodes {
        if !seen.insert(*n) {
            return Err(err("C011", format!("circular dependency: `{n}` appears more than once")));
        }
    }
    Ok(())
}

pub fn apply_r1(model: &SystemModel, chain: &[&str]) -> Result<CompositionResult, Vec<Diagnostic>> {
    if chain.len() < 2 {
        return Err(err("C010", "R1 needs a chain of at least two nodes"));
    }
    let cx = Ctx { model };
    for n in chain {
        cx.require(n)?;
    }
    distinct(chain)?;
    let links: Vec<(&str, &str)> = chain.windows(2).map(|w| (w[0], w[1])).collect();
    for (a, b) in &links {
        cx.fully_wired(a, b, "C012", "chain not fully wired")?;
    }
    Ok(CompositionResult {
        rule: Rule::R1,
        participants: chain.iter().map(|s| s.to_string()).collect(),
        obligations: links.iter().map(|(a, b)| cx.obligation(&[a], b)).collect(),
        derived: cx.derived(&chain[..1], &chain[chain.len() - 1..]),
        substitution: cx.substitution(&links),
        notes: cx.back_edge_notes(chain, &links),
    })
}

pub fn apply_r2(model: &SystemModel, root: &str, leaves: &[&str]) -> Result<CompositionResult, Vec<Diagnostic>> {
    if leaves.is_empty() {
        return Err(err("C010", "R2 needs at least one leaf"));
    }
    let cx = Ctx { model };
    let rc = cx.require(root)?;
    for n in leaves {
        cx.require(n)?;
    }
    let mut all = vec![root];
    all.extend_from_slice(leaves);
    distinct(&all)?;
    for o in &rc.contract.outputs {
        if !leaves.iter().any(|l| model.edges_between(root, l).any(|e| e.source.var == o.name)) {
            return Err(err("C013", format!("partition incomplete: {root}.{} feeds none of the leaves", o.name)));
        }
    }
    for l in leaves {
        if cx.edges(root, l).is_empty() {
            return Err(err("C013", format!("partition incomplete: leaf `{l}` receives nothing from `{root}`")));
        }
    }
    let links: Vec<(&str, &str)> = leaves.iter().map(|l| (root, *l)).collect();
    Ok(CompositionResult {
        rule: Rule::R2,
        participants: all.iter().map(|s| s.to_string()).collect(),
        obligations: leaves.iter().map(|l| cx.obligation(&[root], l)).collect(),
        derived: cx.derived(&[root], leaves),
        substitution: cx.substitution(&links),
        notes: cx.back_edge_notes(&all, &links),
    })
}

pub const PERSISTENCE_NOTE: &str = "assumes every source output persists once generated";

pub fn apply_r3(model: &SystemModel, sources: &[&str], sink: &str) -> Result<CompositionResult, Vec<Diagnostic>> {
    if sources.is_empty() {
        return Err(err("C010", "R3 needs at least one source"));
    }
    let cx = Ctx { model };
    cx.require(sink)?;
    let mut all: Vec<&str> = sources.to_vec();
    all.push(sink);
    distinct(&all)?;
    for s in sources {
        cx.fully_wired(s, sink, "C014", "union incomplete")?;
    }
    let links: Vec<(&str, &str)> = sources.iter().map(|s| (*s, sink)).collect();
    let mut notes = vec![PERSISTENCE_NOTE.to_string()];
    notes.extend(cx.back_edge_notes(&all, &links));
    Ok(CompositionResult {
        rule: Rule::R3,
        participants: all.iter().map(|s| s.to_string()).collect(),
        obligations: vec![cx.obligation(sources, sink)],
        derived: cx.derived(sources, &[sink]),
        substitution: cx.substitution(&links),
        notes,
    })
}

/// Loop shape: `n1 -> n2`, `n2 <-> n3`, `n3 -> n4`. The three premises are
/// established by R1 on `[n2, n3]`, R2 from `n3` to `{n2, n4}` and R3 from
/// `{n1, n3}` into `n2`.
pub fn apply_r4(model: &SystemModel, n1: &str, n2: &str, n3: &str, n4: &str) -> Result<CompositionResult, Vec<Diagnostic>> {
    let cx = Ctx { model };
    for n in [n1, n2, n3, n4] {
        cx.require(n)?;
    }
    distinct(&[n1, n2, n3, n4])?;
    for (a, b) in [(n1, n2), (n2, n3), (n3, n2), (n3, n4)] {
        if cx.edges(a, b).is_empty() {
            return Err(err("C016", format!("shape mismatch: no edge from `{a}` to `{b}`")));
        }
    }
    let shape = |r: Result<CompositionResult, Vec<Diagnostic>>| {
        r.map_err(|d| err("C016", format!("shape mismatch: {}", d[0].message)))
    };
    let p1 = shape(apply_r1(model, &[n2, n3]))?;
    let p2 = shape(apply_r2(model, n3, &[n2, n4]))?;
    let p3 = shape(apply_r3(model, &[n1, n3], n2))?;
    let sequent = |p: CompositionResult| {
        let antecedent = p.derived.antecedent.clone();
        let consequent = p.derived.consequent();
        Obligation {
            quantified_vars: cx.typed(&[&antecedent, &consequent]),
            antecedent,
            consequent,
            premise: Some(Box::new(p)),
        }
    };
    let mut substitution = Vec::new();
    let mut notes = Vec::new();
    for p in [&p1, &p2, &p3] {
        for s in &p.substitution {
            if !substitution.contains(s) {
                substitution.push(s.clone());
            }
        }
        for n in &p.notes {
            if !notes.contains(n) {
                notes.push(n.clone());
            }
        }
    }
    notes.retain(|n| !n.starts_with("edge"));
    Ok(CompositionResult {
        rule: Rule::R4,
        participants: [n1, n2, n3, n4].iter().map(|s| s.to_string()).collect(),
        obligations: vec![sequent(p1), sequent(p2), sequent(p3)],
        derived: cx.derived(&[n1], &[n4]),
        substitution,
        notes,
    })
}
