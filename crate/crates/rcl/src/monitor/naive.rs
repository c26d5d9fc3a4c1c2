use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use super::event::{Event, Value};
use crate::ast::CmpOp;
use crate::rml::{Arg, PatVal, RmlSpec, RmlTerm};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("trace of {len} events exceeds the limit of {limit}")]
    TooLong { len: usize, limit: usize },
    #[error("event type `{0}` with {1} arguments is not declared")]
    Undeclared(String, usize),
}

#[derive(Debug, Clone, PartialEq)]
enum Binding {
    Is(Value),
    /// A value distinct from everything in the trace and the term.
    Fresh,
}

struct Oracle<'a> {
    spec: &'a RmlSpec,
    universe: Vec<Value>,
}

fn holds(op: CmpOp, a: f64, b: f64) -> bool {
    match op {
        CmpOp::Eq => a == b,
        CmpOp::Ne => a != b,
        CmpOp::Lt => a < b,
        CmpOp::Le => a <= b,
        CmpOp::Gt => a > b,
        CmpOp::Ge => a >= b,
    }
}

impl Oracle<'_> {
    /// `ET ⊆ Ev` for the event type instantiated under `env`.
    fn event_matches(&self, name: &str, args: &[Arg], env: &HashMap<String, Binding>, ev: &Event) -> Result<bool, OracleError> {
        let et = self.spec.event_type(name, args.len()).ok_or_else(|| OracleError::Undeclared(name.into(), args.len()))?;
        for (key, pat) in &et.fields {
            let Some(have) = ev.get(key) else { return Ok(false) };
            let want = match pat {
                PatVal::Lit(l) => Some(Value::from(l)),
                PatVal::Param(p) => {
                    let i = et.params.iter().position(|q| q == p).unwrap_or(usize::MAX);
                    match args.get(i) {
                        Some(Arg::Wild) => continue,
                        Some(Arg::Lit(l)) => Some(Value::from(l)),
                        Some(Arg::Var(x)) => match env.get(x) {
                            Some(Binding::Is(v)) => Some(v.clone()),
                            _ => None,
                        },
                        Some(Arg::Add(x, k)) => match (env.get(x), have) {
                            (Some(Binding::Is(Value::Num(b))), Value::Num(h)) if h.0 - *k as f64 == b.0 => continue,
                            _ => None,
                        },
                        None => None,
                    }
                }
            };
            if want.as_ref() != Some(have) {
                return Ok(false);
            }
        }
        if let Some(g) = &et.guard {
            let bound = *g.value.numer() as f64 / *g.value.denom() as f64;
            let field = et.fields.iter().find(|(_, v)| matches!(v, PatVal::Param(p) if *p == g.param));
            let ok = field.and_then(|(k, _)| ev.get(k)).and_then(Value::as_f64).is_some_and(|x| holds(g.op, x, bound));
            if !ok {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn member(&self, t: &RmlTerm, w: &[Event], env: &mut HashMap<String, Binding>) -> Result<bool, OracleError> {
        Ok(match t {
            RmlTerm::Et { name, args, negated } => w.len() == 1 && self.event_matches(name, args, env, &w[0])? != *negated,
            RmlTerm::Any => w.len() == 1,
            RmlTerm::Nothing => false,
            RmlTerm::Empty => w.is_empty(),
            RmlTerm::And(ts) => {
                for t in ts {
                    if !self.member(t, w, env)? {
                        return Ok(false);
                    }
                }
                true
            }
            RmlTerm::Or(ts) => {
                for t in ts {
                    if self.member(t, w, env)? {
                        return Ok(true);
                    }
                }
                false
            }
            RmlTerm::Concat(a, b) => {
                for i in 0..=w.len() {
                    if self.member(a, &w[..i], env)? && self.member(b, &w[i..], env)? {
                        return Ok(true);
                    }
                }
                false
            }
            // Every unrolling consumes at least one event, so at most
            // `w.len()` unrollings are ever needed.
            RmlTerm::Star(b) => {
                if w.is_empty() {
                    return Ok(true);
                }
                for i in 1..=w.len() {
                    if self.member(b, &w[..i], env)? && self.member(t, &w[i..], env)? {
                        return Ok(true);
                    }
                }
                false
            }
            RmlTerm::Let(vars, body) => self.bind(vars, body, w, env)?,
        })
    }

    fn bind(&self, vars: &[String], body: &RmlTerm, w: &[Event], env: &mut HashMap<String, Binding>) -> Result<bool, OracleError> {
        let Some((x, rest)) = vars.split_first() else {
            return self.member(body, w, env);
        };
        let saved = env.get(x).cloned();
        let mut found = false;
        let choices = self.universe.iter().cloned().map(Binding::Is).chain(std::iter::once(Binding::Fresh));
        for b in choices {
            env.insert(x.clone(), b);
            if self.bind(rest, body, w, env)? {
                found = true;
                break;
            }
        }
        match saved {
            Some(s) => env.insert(x.clone(), s),
            None => env.remove(x),
        };
        Ok(found)
    }
}

fn offsets(t: &RmlTerm, out: &mut BTreeSet<u64>) {
    t.walk(&mut |s| {
        if let RmlTerm::Et { args, .. } = s {
            for a in args {
                if let Arg::Add(_, k) = a {
                    out.insert(*k);
                }
            }
        }
    });
}

/// Decides `trace ∈ t` directly from the set definitions: splits for
/// concatenation, set operations for `/\` and `\/`, explicit unrolling for
/// `*`, and for `let` every value occurring in the trace (shifted back by
/// any `x+k` offset) plus one value occurring nowhere.
///
/// The trace must have at most `4 * star_unroll_bound` events.
pub fn naive_membership(t: &RmlTerm, spec: &RmlSpec, trace: &[Event], star_unroll_bound: usize) -> Result<bool, OracleError> {
    let limit = star_unroll_bound.saturating_mul(4);
    if trace.len() > limit {
        return Err(OracleError::TooLong { len: trace.len(), limit });
    }
    let mut ks = BTreeSet::new();
    offsets(t, &mut ks);
    let mut universe = BTreeSet::new();
    for e in trace {
        for v in e.fields.values() {
            universe.insert(v.clone());
            if let Value::Num(n) = v {
                for k in &ks {
                    universe.insert(Value::num(n.0 - *k as f64));
                }
            }
        }
    }
    let o = Oracle { spec, universe: universe.into_iter().collect() };
    o.member(t, trace, &mut HashMap::new())
}
