//! Runtime Monitoring Language specifications: event types, terms, synthesis
//! from contract guarantees, text emission and parsing, and the monitor
//! configuration file.

mod config;
mod emit;
mod parse;
mod simplify;
mod translate;

use std::collections::BTreeSet;

use crate::ast::{CmpOp, Number};

pub use config::{emit_monitor_config, monitor_config, MonitorConfig, TopicEntry};
pub use emit::{emit_event_type, emit_rml};
pub use parse::{parse_rml, parse_term, RmlParseError};
pub use simplify::simplify_term;
pub use translate::{derive_event_types, synthesize, translate_formula, Synthesis, Translator};

/// A constant in an event pattern or an event-type argument.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Lit {
    Num(Number),
    /// Quoted text, e.g. a topic path.
    Str(String),
    /// A bare symbolic constant such as an enum member or constructor tag.
    Sym(String),
    Bool(bool),
}

/// Argument of an event-type reference inside a term.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Arg {
    Var(String),
    Lit(Lit),
    /// `i+1`: a let-bound variable plus a constant.
    Add(String, u64),
    /// `_`: any value, the field must still be present.
    Wild,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PatVal {
    Param(String),
    Lit(Lit),
}

/// `with p op value` clause restricting a numeric parameter.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Guard {
    pub param: String,
    pub op: CmpOp,
    pub value: Number,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EventType {
    pub name: String,
    pub params: Vec<String>,
    /// Field name to value, `topic` first.
    pub fields: Vec<(String, PatVal)>,
    pub guard: Option<Guard>,
}

impl EventType {
    pub fn topic(&self) -> Option<&str> {
        self.fields.iter().find_map(|(k, v)| match (k.as_str(), v) {
            ("topic", PatVal::Lit(Lit::Str(s))) => Some(s.as_str()),
            _ => None,
        })
    }

    /// Same name, parameters and pattern up to the names of the parameters.
    pub fn same_shape(&self, other: &EventType) -> bool {
        let pos = |et: &EventType, p: &str| et.params.iter().position(|q| q == p);
        self.name == other.name
            && self.params.len() == other.params.len()
            && self.fields.len() == other.fields.len()
            && self.fields.iter().zip(&other.fields).all(|((k1, v1), (k2, v2))| {
                k1 == k2
                    && match (v1, v2) {
                        (PatVal::Param(a), PatVal::Param(b)) => pos(self, a) == pos(other, b),
                        (PatVal::Lit(a), PatVal::Lit(b)) => a == b,
                        _ => false,
                    }
            })
            && match (&self.guard, &other.guard) {
                (None, None) => true,
                (Some(a), Some(b)) => pos(self, &a.param) == pos(other, &b.param) && a.op == b.op && a.value == b.value,
                _ => false,
            }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RmlTerm {
    Et { name: String, args: Vec<Arg>, negated: bool },
    /// Any single event.
    Any,
    /// No trace at all.
    Nothing,
    /// The empty trace.
    Empty,
    And(Vec<RmlTerm>),
    Or(Vec<RmlTerm>),
    Concat(Box<RmlTerm>, Box<RmlTerm>),
    Let(Vec<String>, Box<RmlTerm>),
    Star(Box<RmlTerm>),
}

impl RmlTerm {
    pub fn et(name: impl Into<String>, args: Vec<Arg>) -> RmlTerm {
        RmlTerm::Et { name: name.into(), args, negated: false }
    }

    pub fn star(t: RmlTerm) -> RmlTerm {
        RmlTerm::Star(Box::new(t))
    }

    pub fn concat(a: RmlTerm, b: RmlTerm) -> RmlTerm {
        RmlTerm::Concat(Box::new(a), Box::new(b))
    }

    pub fn let_(vars: Vec<String>, body: RmlTerm) -> RmlTerm {
        RmlTerm::Let(vars, Box::new(body))
    }

    /// Pushes negation down to event types: De Morgan over `/\` and `\/`,
    /// through `let`, and `any`/`none` swap. Terms that denote more than
    /// single events have no negation.
    pub fn negate(&self) -> Option<RmlTerm> {
        Some(match self {
            RmlTerm::Et { name, args, negated } => RmlTerm::Et { name: name.clone(), args: args.clone(), negated: !negated },
            RmlTerm::Any => RmlTerm::Nothing,
            RmlTerm::Nothing => RmlTerm::Any,
            RmlTerm::And(ts) => RmlTerm::Or(ts.iter().map(|t| t.negate()).collect::<Option<_>>()?),
            RmlTerm::Or(ts) => RmlTerm::And(ts.iter().map(|t| t.negate()).collect::<Option<_>>()?),
            RmlTerm::Let(vs, b) => RmlTerm::Let(vs.clone(), Box::new(b.negate()?)),
            RmlTerm::Empty | RmlTerm::Concat(..) | RmlTerm::Star(_) => return None,
        })
    }

    /// True when every trace of the term has exactly one event.
    pub fn is_single_event(&self) -> bool {
        match self {
            RmlTerm::Et { .. } | RmlTerm::Any | RmlTerm::Nothing => true,
            RmlTerm::And(ts) | RmlTerm::Or(ts) => ts.iter().all(RmlTerm::is_single_event),
            RmlTerm::Let(_, b) => b.is_single_event(),
            RmlTerm::Empty | RmlTerm::Concat(..) | RmlTerm::Star(_) => false,
        }
    }

    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a RmlTerm)) {
        f(self);
        match self {
            RmlTerm::And(ts) | RmlTerm::Or(ts) => ts.iter().for_each(|t| t.walk(f)),
            RmlTerm::Concat(a, b) => {
                a.walk(f);
                b.walk(f);
            }
            RmlTerm::Let(_, b) | RmlTerm::Star(b) => b.walk(f),
            _ => {}
        }
    }

    /// `(name, arity)` of every referenced event type, in order, without repeats.
    pub fn et_refs(&self) -> Vec<(String, usize)> {
        let mut out: Vec<(String, usize)> = Vec::new();
        self.walk(&mut |t| {
            if let RmlTerm::Et { name, args, .. } = t {
                let key = (name.clone(), args.len());
                if !out.contains(&key) {
                    out.push(key);
                }
            }
        });
        out
    }

    pub fn mentions(&self, var: &str) -> bool {
        let mut hit = false;
        self.walk(&mut |t| {
            if let RmlTerm::Et { args, .. } = t {
                hit |= args.iter().any(|a| matches!(a, Arg::Var(v) | Arg::Add(v, _) if v == var));
            }
        });
        hit
    }
}

/// Structural equality up to consistent renaming of let-bound variables.
pub fn alpha_equal(a: &RmlTerm, b: &RmlTerm) -> bool {
    fn go(a: &RmlTerm, b: &RmlTerm, env: &mut Vec<(String, String)>) -> bool {
        let var_eq = |x: &str, y: &str, env: &[(String, String)]| match env.iter().rev().find(|(l, r)| l == x || r == y) {
            Some((l, r)) => l == x && r == y,
            None => x == y,
        };
        match (a, b) {
            (RmlTerm::Et { name: n1, args: a1, negated: g1 }, RmlTerm::Et { name: n2, args: a2, negated: g2 }) => {
                n1 == n2
                    && g1 == g2
                    && a1.len() == a2.len()
                    && a1.iter().zip(a2).all(|(x, y)| match (x, y) {
                        (Arg::Var(x), Arg::Var(y)) => var_eq(x, y, env),
                        (Arg::Add(x, k), Arg::Add(y, l)) => k == l && var_eq(x, y, env),
                        _ => x == y,
                    })
            }
            (RmlTerm::And(xs), RmlTerm::And(ys)) | (RmlTerm::Or(xs), RmlTerm::Or(ys)) => {
                xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| go(x, y, env))
            }
            (RmlTerm::Concat(a1, b1), RmlTerm::Concat(a2, b2)) => go(a1, a2, env) && go(b1, b2, env),
            (RmlTerm::Star(x), RmlTerm::Star(y)) => go(x, y, env),
            (RmlTerm::Let(v1, x), RmlTerm::Let(v2, y)) => {
                if v1.len() != v2.len() {
                    return false;
                }
                let n = env.len();
                env.extend(v1.iter().cloned().zip(v2.iter().cloned()));
                let r = go(x, y, env);
                env.truncate(n);
                r
            }
            _ => a == b,
        }
    }
    go(a, b, &mut Vec::new())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RmlSpec {
    pub event_types: Vec<EventType>,
    /// `t1`, `t2`, ... one per guarantee.
    pub terms: Vec<(String, RmlTerm)>,
}

impl RmlSpec {
    pub fn event_type(&self, name: &str, arity: usize) -> Option<&EventType> {
        self.event_types.iter().find(|e| e.name == name && e.params.len() == arity)
    }

    /// Conjunction of all named terms.
    pub fn main(&self) -> RmlTerm {
        match self.terms.len() {
            1 => self.terms[0].1.clone(),
            _ => RmlTerm::And(self.terms.iter().map(|(_, t)| t.clone()).collect()),
        }
    }

    /// Topics of all event types, or `None` when some event type leaves the
    /// topic open.
    pub fn declared_topics(&self) -> Option<BTreeSet<String>> {
        self.event_types.iter().map(|e| e.topic().map(str::to_string)).collect()
    }

    /// References that no declaration answers.
    pub fn undeclared_refs(&self) -> Vec<(String, usize)> {
        let mut out = Vec::new();
        for (_, t) in &self.terms {
            for r in t.et_refs() {
                if self.event_type(&r.0, r.1).is_none() && !out.contains(&r) {
                    out.push(r);
                }
            }
        }
        out
    }
}
