use std::collections::BTreeSet;
use std::rc::Rc;

use super::event::{Event, Value};
use crate::ast::CmpOp;
use crate::rml::{Arg, EventType, PatVal, RmlSpec, RmlTerm};

/// Event-type argument after let-bound variables have been resolved.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ArgValue {
    Val(Value),
    Wild,
    /// A variable whose value is known to differ from every value seen so far.
    Fresh(String),
    /// `x+k` with `x` bound to the value.
    Offset(Value, u64),
    FreshOffset(String, u64),
}

fn compare(op: CmpOp, a: f64, b: f64) -> bool {
    match op {
        CmpOp::Eq => a == b,
        CmpOp::Ne => a != b,
        CmpOp::Lt => a < b,
        CmpOp::Le => a <= b,
        CmpOp::Gt => a > b,
        CmpOp::Ge => a >= b,
    }
}

fn arg_matches(arg: &ArgValue, field: &Value) -> bool {
    match arg {
        ArgValue::Val(v) => v == field,
        ArgValue::Wild => true,
        ArgValue::Fresh(_) | ArgValue::FreshOffset(..) => false,
        ArgValue::Offset(v, k) => match (field, v) {
            (Value::Num(f), Value::Num(x)) => f.0 - *k as f64 == x.0,
            _ => false,
        },
    }
}

/// True iff every pair of the instantiated pattern occurs in `ev`.
pub fn matches(et: &EventType, args: &[ArgValue], ev: &Event) -> bool {
    for (k, pat) in &et.fields {
        let Some(got) = ev.get(k) else { return false };
        let ok = match pat {
            PatVal::Lit(l) => Value::from(l) == *got,
            PatVal::Param(p) => match et.params.iter().position(|q| q == p) {
                Some(i) => args.get(i).is_some_and(|a| arg_matches(a, got)),
                None => false,
            },
        };
        if !ok {
            return false;
        }
    }
    if let Some(g) = &et.guard {
        let field = et.fields.iter().find(|(_, v)| *v == PatVal::Param(g.param.clone()));
        let bound = *g.value.numer() as f64 / *g.value.denom() as f64;
        match field.and_then(|(k, _)| ev.get(k)).and_then(Value::as_f64) {
            Some(x) if compare(g.op, x, bound) => {}
            _ => return false,
        }
    }
    true
}

/// Residual term: an [`RmlTerm`] with resolved arguments, single-variable
/// lets that remember which values their fresh branch excludes, and shared
/// subterms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Residual {
    Et { et: usize, args: Vec<ArgValue>, negated: bool },
    Any,
    Nothing,
    Empty,
    And(Vec<Residual>),
    Or(Vec<Residual>),
    Concat(Rc<Residual>, Rc<Residual>),
    Let { var: String, excluded: BTreeSet<Value>, body: Rc<Residual> },
    Star(Rc<Residual>),
}

impl Residual {
    /// `None` when the term references an undeclared event type.
    pub fn from_term(t: &RmlTerm, spec: &RmlSpec) -> Option<Residual> {
        Some(match t {
            RmlTerm::Et { name, args, negated } => {
                let et = spec.event_types.iter().position(|e| e.name == *name && e.params.len() == args.len())?;
                let args = args
                    .iter()
                    .map(|a| match a {
                        Arg::Var(v) => ArgValue::Fresh(v.clone()),
                        Arg::Add(v, k) => ArgValue::FreshOffset(v.clone(), *k),
                        Arg::Lit(l) => ArgValue::Val(l.into()),
                        Arg::Wild => ArgValue::Wild,
                    })
                    .collect();
                Residual::Et { et, args, negated: *negated }
            }
            RmlTerm::Any => Residual::Any,
            RmlTerm::Nothing => Residual::Nothing,
            RmlTerm::Empty => Residual::Empty,
            RmlTerm::And(ts) => and(ts.iter().map(|t| Residual::from_term(t, spec)).collect::<Option<_>>()?, spec),
            RmlTerm::Or(ts) => or(ts.iter().map(|t| Residual::from_term(t, spec)).collect::<Option<_>>()?),
            RmlTerm::Concat(a, b) => concat(Residual::from_term(a, spec)?, Residual::from_term(b, spec)?),
            RmlTerm::Star(b) => star(Residual::from_term(b, spec)?),
            RmlTerm::Let(vs, b) => {
                let mut r = Residual::from_term(b, spec)?;
                for v in vs.iter().rev() {
                    r = let_(v.clone(), BTreeSet::new(), r);
                }
                r
            }
        })
    }

    fn mentions(&self, var: &str) -> bool {
        match self {
            Residual::Et { args, .. } => args.iter().any(|a| matches!(a, ArgValue::Fresh(v) | ArgValue::FreshOffset(v, _) if v == var)),
            Residual::And(ts) | Residual::Or(ts) => ts.iter().any(|t| t.mentions(var)),
            Residual::Concat(a, b) => a.mentions(var) || b.mentions(var),
            Residual::Let { var: v, body, .. } => v != var && body.mentions(var),
            Residual::Star(b) => b.mentions(var),
            _ => false,
        }
    }

    fn substitute(&self, var: &str, val: &Value) -> Residual {
        match self {
            Residual::Et { et, args, negated } => Residual::Et {
                et: *et,
                args: args
                    .iter()
                    .map(|a| match a {
                        ArgValue::Fresh(v) if v == var => ArgValue::Val(val.clone()),
                        ArgValue::FreshOffset(v, k) if v == var => ArgValue::Offset(val.clone(), *k),
                        other => other.clone(),
                    })
                    .collect(),
                negated: *negated,
            },
            Residual::And(ts) => Residual::And(ts.iter().map(|t| t.substitute(var, val)).collect()),
            Residual::Or(ts) => Residual::Or(ts.iter().map(|t| t.substitute(var, val)).collect()),
            Residual::Concat(a, b) => Residual::Concat(Rc::new(a.substitute(var, val)), Rc::new(b.substitute(var, val))),
            Residual::Let { var: v, .. } if v == var => self.clone(),
            Residual::Let { var: v, excluded, body } => {
                Residual::Let { var: v.clone(), excluded: excluded.clone(), body: Rc::new(body.substitute(var, val)) }
            }
            Residual::Star(b) => Residual::Star(Rc::new(b.substitute(var, val))),
            other => other.clone(),
        }
    }

    /// Values of `ev` that `var` could take to make some event type of the
    /// term match it.
    fn candidates(&self, var: &str, ev: &Event, spec: &RmlSpec, out: &mut BTreeSet<Value>) {
        match self {
            Residual::Et { et, args, .. } => {
                let et = &spec.event_types[*et];
                for (i, a) in args.iter().enumerate() {
                    let offset = match a {
                        ArgValue::Fresh(v) if v == var => 0,
                        ArgValue::FreshOffset(v, k) if v == var => *k,
                        _ => continue,
                    };
                    let Some(p) = et.params.get(i) else { continue };
                    for (k, pat) in &et.fields {
                        if *pat != PatVal::Param(p.clone()) {
                            continue;
                        }
                        match ev.get(k) {
                            Some(v) if offset == 0 => {
                                out.insert(v.clone());
                            }
                            Some(Value::Num(f)) => {
                                out.insert(Value::num(f.0 - offset as f64));
                            }
                            _ => {}
                        }
                    }
                }
            }
            Residual::And(ts) | Residual::Or(ts) => ts.iter().for_each(|t| t.candidates(var, ev, spec, out)),
            Residual::Concat(a, b) => {
                a.candidates(var, ev, spec, out);
                b.candidates(var, ev, spec, out);
            }
            Residual::Let { var: v, body, .. } if v != var => body.candidates(var, ev, spec, out),
            Residual::Star(b) => b.candidates(var, ev, spec, out),
            _ => {}
        }
    }
}

/// Topics a first event may carry; `None` when unconstrained.
fn first_topics(t: &Residual, spec: &RmlSpec) -> Option<BTreeSet<String>> {
    match t {
        Residual::Et { et, negated: false, .. } => spec.event_types[*et].topic().map(|s| BTreeSet::from([s.to_string()])),
        Residual::Et { .. } | Residual::Any => None,
        Residual::Empty | Residual::Nothing => Some(BTreeSet::new()),
        Residual::Or(ts) => {
            let mut acc = BTreeSet::new();
            for t in ts {
                acc.extend(first_topics(t, spec)?);
            }
            Some(acc)
        }
        Residual::And(ts) => {
            let mut acc: Option<BTreeSet<String>> = None;
            for t in ts {
                if let Some(s) = first_topics(t, spec) {
                    acc = Some(match acc {
                        Some(a) => a.intersection(&s).cloned().collect(),
                        None => s,
                    });
                }
            }
            acc
        }
        Residual::Concat(a, b) => {
            let mut s = first_topics(a, spec)?;
            if nullable(a) {
                s.extend(first_topics(b, spec)?);
            }
            Some(s)
        }
        Residual::Star(b) => first_topics(b, spec),
        Residual::Let { body, .. } => first_topics(body, spec),
    }
}

pub(crate) fn or(ts: Vec<Residual>) -> Residual {
    let mut out = Vec::new();
    for t in ts {
        match t {
            Residual::Or(inner) => out.extend(inner),
            Residual::Nothing => {}
            other => out.push(other),
        }
    }
    out.sort();
    out.dedup();
    match out.len() {
        0 => Residual::Nothing,
        1 => out.pop().unwrap(),
        _ => Residual::Or(out),
    }
}

pub(crate) fn and(ts: Vec<Residual>, spec: &RmlSpec) -> Residual {
    let mut out = Vec::new();
    for t in ts {
        match t {
            Residual::And(inner) => out.extend(inner),
            Residual::Nothing => return Residual::Nothing,
            other => out.push(other),
        }
    }
    out.sort();
    out.dedup();
    if out.contains(&Residual::Empty) {
        return if out.iter().all(nullable) { Residual::Empty } else { Residual::Nothing };
    }
    let all_nullable = out.iter().all(nullable);
    let mut common: Option<BTreeSet<String>> = None;
    for t in &out {
        if let Some(s) = first_topics(t, spec) {
            common = Some(match common {
                Some(c) => c.intersection(&s).cloned().collect(),
                None => s,
            });
        }
    }
    if common.is_some_and(|c| c.is_empty()) {
        return if all_nullable { Residual::Empty } else { Residual::Nothing };
    }
    match out.len() {
        0 => Residual::Any,
        1 => out.pop().unwrap(),
        _ => Residual::And(out),
    }
}

pub(crate) fn concat(a: Residual, b: Residual) -> Residual {
    match (a, b) {
        (Residual::Nothing, _) | (_, Residual::Nothing) => Residual::Nothing,
        (Residual::Empty, x) | (x, Residual::Empty) => x,
        (Residual::Concat(x, y), b) => concat((*x).clone(), concat((*y).clone(), b)),
        (a, b) => Residual::Concat(Rc::new(a), Rc::new(b)),
    }
}

pub(crate) fn star(t: Residual) -> Residual {
    match t {
        Residual::Nothing | Residual::Empty => Residual::Empty,
        s @ Residual::Star(_) => s,
        t => Residual::Star(Rc::new(t)),
    }
}

pub(crate) fn let_(var: String, excluded: BTreeSet<Value>, body: Residual) -> Residual {
    if !body.mentions(&var) {
        return body;
    }
    Residual::Let { var, excluded, body: Rc::new(body) }
}

/// Whether the empty trace belongs to the term.
pub fn nullable(t: &Residual) -> bool {
    match t {
        Residual::Star(_) | Residual::Empty => true,
        Residual::Et { .. } | Residual::Any | Residual::Nothing => false,
        Residual::And(ts) => ts.iter().all(nullable),
        Residual::Or(ts) => ts.iter().any(nullable),
        Residual::Concat(a, b) => nullable(a) && nullable(b),
        Residual::Let { body, .. } => nullable(body),
    }
}

/// The traces `w` such that `ev` followed by `w` belongs to `t`.
pub fn derivative(t: &Residual, ev: &Event, spec: &RmlSpec) -> Residual {
    match t {
        Residual::Empty | Residual::Nothing => Residual::Nothing,
        Residual::Any => Residual::Empty,
        Residual::Et { et, args, negated } => {
            if matches(&spec.event_types[*et], args, ev) != *negated {
                Residual::Empty
            } else {
                Residual::Nothing
            }
        }
        Residual::Or(ts) => or(ts.iter().map(|t| derivative(t, ev, spec)).collect()),
        Residual::And(ts) => and(ts.iter().map(|t| derivative(t, ev, spec)).collect(), spec),
        Residual::Concat(a, b) => {
            let first = concat(derivative(a, ev, spec), (**b).clone());
            if nullable(a) {
                or(vec![first, derivative(b, ev, spec)])
            } else {
                first
            }
        }
        Residual::Star(b) => concat(derivative(b, ev, spec), t.clone()),
        Residual::Let { var, excluded, body } => {
            let mut cands = BTreeSet::new();
            body.candidates(var, ev, spec, &mut cands);
            let cands: BTreeSet<Value> = cands.difference(excluded).cloned().collect();
            let mut branches: Vec<Residual> = cands.iter().map(|c| derivative(&body.substitute(var, c), ev, spec)).collect();
            let mut ex = excluded.clone();
            ex.extend(cands);
            branches.push(let_(var.clone(), ex, derivative(body, ev, spec)));
            or(branches)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rml::{parse_rml, Lit};

    fn ev(pairs: &[(&str, Value)]) -> Event {
        Event::new(pairs.iter().map(|(k, v)| (k.to_string(), v.clone())))
    }

    fn s(x: &str) -> Value {
        Value::Str(x.into())
    }

    #[test]
    fn subset_matching() {
        let spec = parse_rml("p matches { pos: 'waypoint1' };\nq(i) matches { topic: 'T', id: i };\nt1 = p;").unwrap();
        assert!(matches(&spec.event_types[0], &[], &ev(&[("speed", Value::num(1.6)), ("pos", s("waypoint1"))])));
        let empty = EventType { name: "e".into(), params: vec![], fields: vec![], guard: None };
        assert!(matches(&empty, &[], &ev(&[("topic", s("x"))])));
        let q = &spec.event_types[1];
        assert!(!matches(q, &[ArgValue::Val(Value::num(3.0))], &ev(&[("topic", s("T")), ("id", Value::num(4.0))])));
        assert!(matches(q, &[ArgValue::Val((&Lit::Num(3.into())).into())], &ev(&[("topic", s("T")), ("id", Value::num(3.0))])));
    }

    #[test]
    fn nullability_table() {
        let spec = parse_rml("a matches { topic: 'a' };\nb matches { topic: 'b' };\nc matches { topic: 'c' };\nt1 = a;").unwrap();
        let r = |src: &str| Residual::from_term(&crate::rml::parse_term(src).unwrap(), &spec).unwrap();
        assert!(nullable(&r("{a}*")));
        assert!(!nullable(&r("a")));
        assert!(nullable(&r("{a}* /\\ (b \\/ {c}*)")));
    }

    #[test]
    fn star_reenters_after_command() {
        let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../corpus/agent_reference.rml")).unwrap();
        let spec = parse_rml(&src).unwrap();
        let t2 = Residual::from_term(&spec.terms[1].1, &spec).unwrap();
        let e = ev(&[("topic", s("gazebo_radiation_plugins/Command")), ("command", s("inspect")), ("id", Value::num(3.0))]);
        assert_eq!(derivative(&t2, &e, &spec), t2);
    }

    #[test]
    fn disjoint_topics_intersect_to_nothing() {
        let spec = parse_rml("a matches { topic: 'a' };\nb matches { topic: 'b' };\nt1 = a /\\ b;").unwrap();
        assert_eq!(Residual::from_term(&spec.terms[0].1, &spec).unwrap(), Residual::Nothing);
    }
}
