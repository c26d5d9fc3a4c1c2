use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use super::event::{Event, Trace};
use super::residual::{derivative, nullable, Residual};
use crate::rml::{RmlSpec, RmlTerm};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Accepted,
    /// Index into the trace of the event after which no continuation can
    /// satisfy the term. A term with an empty language is violated at the
    /// first relevant event, or at the end of a trace that has none.
    Violated(usize),
    /// The trace ends with an obligation still open.
    Incomplete,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::Accepted => "accepted",
            Verdict::Violated(_) => "violated",
            Verdict::Incomplete => "incomplete",
        }
    }

    pub fn violation_index(self) -> Option<usize> {
        match self {
            Verdict::Violated(i) => Some(i),
            _ => None,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Violated(i) => write!(f, "violated at event {i}"),
            v => f.write_str(v.label()),
        }
    }
}

impl Serialize for Verdict {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MonitorError {
    #[error("term `{0}` references an undeclared event type")]
    Undeclared(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Status {
    Running,
    Violated(usize),
}

/// Incremental monitor for one term.
#[derive(Debug, Clone)]
pub struct MonitorState<'a> {
    spec: &'a RmlSpec,
    pub residual: Residual,
    pub status: Status,
    /// Position just past the last consumed event.
    next: usize,
}

impl<'a> MonitorState<'a> {
    pub fn new(term: &RmlTerm, spec: &'a RmlSpec) -> Option<MonitorState<'a>> {
        let residual = Residual::from_term(term, spec)?;
        Some(MonitorState { spec, residual, status: Status::Running, next: 0 })
    }

    /// Consumes the event at trace position `index`. A violation is final.
    /// An empty residual before any event is reported by the first step.
    pub fn step(&mut self, index: usize, ev: &Event) {
        if self.status != Status::Running {
            return;
        }
        self.residual = derivative(&self.residual, ev, self.spec);
        self.next = index + 1;
        if self.residual == Residual::Nothing {
            self.status = Status::Violated(index);
        }
    }

    pub fn verdict(&self) -> Verdict {
        match self.status {
            Status::Violated(i) => Verdict::Violated(i),
            Status::Running if self.residual == Residual::Nothing => Verdict::Violated(self.next),
            Status::Running if nullable(&self.residual) => Verdict::Accepted,
            Status::Running => Verdict::Incomplete,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TermReport {
    pub term: String,
    pub verdict: Verdict,
    pub violation_index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonitorReport {
    pub terms: Vec<TermReport>,
    pub verdict: Verdict,
    pub violation_index: Option<usize>,
    pub events: usize,
    pub skipped: usize,
}

impl MonitorReport {
    /// Human-readable table.
    pub fn table(&self) -> String {
        let w = self.terms.iter().map(|t| t.term.len()).max().unwrap_or(4).max(4);
        let mut out = format!("{:<w$}  verdict\n", "term");
        for t in &self.terms {
            out.push_str(&format!("{:<w$}  {}\n", t.term, t.verdict));
        }
        out.push_str(&format!("{:<w$}  {}\n", "all", self.verdict));
        out.push_str(&format!("{} events, {} on undeclared topics skipped\n", self.events, self.skipped));
        out
    }
}

/// Keeps events whose topic some event type declares, with their original
/// trace positions.
pub fn relevant_events<'t>(spec: &RmlSpec, trace: &'t Trace) -> Vec<(usize, &'t Event)> {
    let topics: Option<BTreeSet<String>> = spec.declared_topics();
    trace
        .events
        .iter()
        .enumerate()
        .filter(|(_, e)| match (&topics, e.topic()) {
            (None, _) => true,
            (Some(ts), Some(t)) => ts.contains(t),
            (Some(_), None) => false,
        })
        .collect()
}

/// Checks every named term of `spec` against `trace`.
pub fn run(spec: &RmlSpec, trace: &Trace) -> Result<MonitorReport, MonitorError> {
    let events = relevant_events(spec, trace);
    let mut terms = Vec::new();
    for (name, t) in &spec.terms {
        let mut m = MonitorState::new(t, spec).ok_or_else(|| MonitorError::Undeclared(name.clone()))?;
        for (i, e) in &events {
            m.step(*i, e);
            if m.status != Status::Running {
                break;
            }
        }
        if m.status == Status::Running && m.residual == Residual::Nothing && events.is_empty() {
            m.next = trace.len();
        }
        let v = m.verdict();
        terms.push(TermReport { term: name.clone(), verdict: v, violation_index: v.violation_index() });
    }
    let verdict = terms
        .iter()
        .filter_map(|t| t.violation_index)
        .min()
        .map(Verdict::Violated)
        .unwrap_or(if terms.iter().any(|t| t.verdict == Verdict::Incomplete) { Verdict::Incomplete } else { Verdict::Accepted });
    Ok(MonitorReport {
        terms,
        verdict,
        violation_index: verdict.violation_index(),
        events: trace.len(),
        skipped: trace.len() - events.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rml::parse_rml;

    #[test]
    fn empty_trace_is_accepted() {
        let spec = parse_rml("a matches { topic: 'a' };\nt1 = {a}*;\nt2 = {not a}*;").unwrap();
        let r = run(&spec, &Trace::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Accepted);
        assert_eq!(r.terms.len(), 2);
    }

    #[test]
    fn violation_is_final() {
        let spec = parse_rml("a matches { topic: 'a', v: 1 };\nt1 = {a}*;").unwrap();
        let trace = super::super::parse_trace("{\"topic\":\"a\",\"v\":1}\n{\"topic\":\"a\",\"v\":2}\n{\"topic\":\"a\",\"v\":1}").unwrap();
        let r = run(&spec, &trace).unwrap();
        assert_eq!(r.verdict, Verdict::Violated(1));
        assert_eq!(serde_json::to_value(&r.terms[0]).unwrap()["verdict"], "violated");
    }
}
