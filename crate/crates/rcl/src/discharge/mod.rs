//! Bounded validity checking of composition obligations.

mod bounds;
mod eval;

use std::fmt;

pub(crate) use bounds::parse_rational;
pub use bounds::{default_grid, BoundsError, DomainBounds, DEFAULT_MAX_ASSIGNMENTS, DEFAULT_NATURAL_BOUND};
pub use eval::{eval_formula, values_equal, Assignment, Domain, EvalError, Evaluator, FuncTable, Value, MAX_TABLE_POINTS};

use crate::ast::IoRef;
use crate::calculus::Obligation;
use crate::typeck::{Context, Type};

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    /// The implication holds at every sampled assignment. Not a proof.
    ValidBounded,
    /// Symbols in enumeration order with the values that break the implication.
    Counterexample(Vec<(IoRef, Value)>),
    Unknown(String),
}

impl Verdict {
    pub fn kind(&self) -> &'static str {
        match self {
            Verdict::ValidBounded => "ValidBounded",
            Verdict::Counterexample(_) => "Counterexample",
            Verdict::Unknown(_) => "Unknown",
        }
    }

    pub fn assignment(&self) -> Option<Assignment> {
        match self {
            Verdict::Counterexample(a) => Some(a.iter().cloned().collect()),
            _ => None,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::ValidBounded => f.write_str("ValidBounded"),
            Verdict::Unknown(r) => write!(f, "Unknown ({r})"),
            Verdict::Counterexample(a) => {
                f.write_str("Counterexample {")?;
                for (i, (r, v)) in a.iter().enumerate() {
                    write!(f, "{}{r} = {v}", if i > 0 { ", " } else { " " })?;
                }
                f.write_str(" }")
            }
        }
    }
}

/// Odometer over the cartesian product of `domains`, last one fastest.
struct Odometer<'a> {
    domains: &'a [Domain],
    idx: Vec<u128>,
    done: bool,
}

impl<'a> Odometer<'a> {
    fn new(domains: &'a [Domain]) -> Self {
        let done = domains.iter().any(|d| d.is_empty());
        Odometer { domains, idx: vec![0; domains.len()], done }
    }

    fn next(&mut self) -> Option<Vec<Value>> {
        if self.done {
            return None;
        }
        let cur = self.domains.iter().zip(&self.idx).map(|(d, i)| d.get(*i)).collect();
        self.done = true;
        for k in (0..self.idx.len()).rev() {
            self.idx[k] += 1;
            if self.idx[k] < self.domains[k].len() {
                self.done = false;
                break;
            }
            self.idx[k] = 0;
        }
        Some(cur)
    }
}

fn space(domains: &[Domain]) -> u128 {
    domains.iter().fold(1u128, |n, d| n.saturating_mul(d.len()))
}

/// Decides `ob` over the bounded domains. Consequent symbols are enumerated
/// first; an assignment that already satisfies the consequent needs no
/// extension, otherwise the remaining symbols are searched for one that
/// makes the antecedent true.
pub fn discharge(ob: &Obligation, bounds: &DomainBounds, ctx: &Context) -> Verdict {
    if let Some(p) = &ob.premise {
        let mut unknown = None;
        for sub in &p.obligations {
            match discharge(sub, bounds, ctx) {
                Verdict::ValidBounded => {}
                Verdict::Unknown(r) => {
                    unknown.get_or_insert(r);
                }
                cex => return cex,
            }
        }
        return unknown.map(Verdict::Unknown).unwrap_or(Verdict::ValidBounded);
    }

    let ev = Evaluator::new(ctx, bounds);
    let cons_refs = ob.consequent.io_refs();
    let typed = |r: &IoRef| -> Type {
        ob.quantified_vars.iter().find(|(q, _)| q == r).map(|(_, t)| t.clone()).unwrap_or(Type::Empty("?".into()))
    };
    let first: Vec<(IoRef, Type)> = cons_refs.iter().map(|r| (r.clone(), typed(r))).collect();
    let mut rest: Vec<(IoRef, Type)> = Vec::new();
    for r in ob.antecedent.io_refs() {
        if !cons_refs.contains(&r) {
            rest.push((r.clone(), typed(&r)));
        }
    }
    for (r, t) in &ob.quantified_vars {
        if !first.iter().chain(&rest).any(|(q, _)| q == r) {
            rest.push((r.clone(), t.clone()));
        }
    }

    let domains = |syms: &[(IoRef, Type)]| -> Result<Vec<Domain>, EvalError> { syms.iter().map(|(_, t)| ev.domain(t, None)).collect() };
    let first_dom = match domains(&first) {
        Ok(d) => d,
        Err(e) => return Verdict::Unknown(e.to_string()),
    };
    let cap = bounds.max_assignments as u128;
    if space(&first_dom) > cap {
        return Verdict::Unknown(format!("state space exceeds {} assignments", bounds.max_assignments));
    }
    let mut rest_dom: Option<Vec<Domain>> = None;
    let mut visited: u128 = 0;

    let mut outer = Odometer::new(&first_dom);
    while let Some(vals) = outer.next() {
        visited += 1;
        let mut env: Assignment = first.iter().map(|(r, _)| r.clone()).zip(vals).collect();
        match ev.eval(&ob.consequent, &env) {
            Ok(true) => continue,
            Ok(false) => {}
            Err(e) => return Verdict::Unknown(e.to_string()),
        }
        if rest_dom.is_none() {
            let d = match domains(&rest) {
                Ok(d) => d,
                Err(e) => return Verdict::Unknown(e.to_string()),
            };
            if space(&d) > cap {
                return Verdict::Unknown(format!("state space exceeds {} assignments", bounds.max_assignments));
            }
            rest_dom = Some(d);
        }
        let rd = rest_dom.as_ref().unwrap();
        let mut inner = Odometer::new(rd);
        while let Some(ext) = inner.next() {
            visited += 1;
            if visited > cap {
                return Verdict::Unknown(format!("state space exceeds {} assignments", bounds.max_assignments));
            }
            for ((r, _), v) in rest.iter().zip(ext) {
                env.insert(r.clone(), v);
            }
            match ev.eval(&ob.antecedent, &env) {
                Ok(true) => {
                    let order = first.iter().chain(&rest).map(|(r, _)| (r.clone(), env[r].clone())).collect();
                    return Verdict::Counterexample(order);
                }
                Ok(false) => {}
                Err(e) => return Verdict::Unknown(e.to_string()),
            }
        }
    }
    Verdict::ValidBounded
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{Dir, Formula};
    use crate::syntax::{parse_document, parse_formula};
    use crate::typeck::resolve_context;

    fn ctx() -> Context {
        let d = parse_document("context{ RadStat : {red, orange, green}; }").unwrap();
        resolve_context(&d.context_decls().cloned().collect::<Vec<_>>()).unwrap()
    }

    fn ob(a: &str, c: &str) -> Obligation {
        let antecedent = parse_formula(a).unwrap();
        let consequent = parse_formula(c).unwrap();
        let mut vars = Vec::new();
        for r in antecedent.io_refs().into_iter().chain(consequent.io_refs()) {
            if !vars.iter().any(|(q, _)| *q == r) {
                let ty = if r.name.starts_with('s') { Type::Enum("RadStat".into()) } else { Type::Real };
                vars.push((r, ty));
            }
        }
        Obligation { quantified_vars: vars, antecedent, consequent, premise: None }
    }

    #[test]
    fn trivial_obligation() {
        let o = Obligation { quantified_vars: vec![], antecedent: Formula::Bool(true), consequent: Formula::Bool(true), premise: None };
        assert_eq!(discharge(&o, &DomainBounds::default(), &ctx()), Verdict::ValidBounded);
    }

    #[test]
    fn enum_counterexample() {
        let o = ob("in.status == red", "in.status == green");
        let v = discharge(&o, &DomainBounds::default(), &ctx());
        assert_eq!(v, Verdict::Counterexample(vec![(IoRef::new(Dir::In, "status"), Value::enum_member("RadStat", "red"))]));
        let env = v.assignment().unwrap();
        let c = ctx();
        let b = DomainBounds::default();
        assert!(eval_formula(&o.antecedent, &env, &b, &c).unwrap());
        assert!(!eval_formula(&o.consequent, &env, &b, &c).unwrap());
    }

    #[test]
    fn cap_gives_unknown() {
        let o = ob("in.a < in.b and in.c < in.d", "in.e == 0");
        let b = DomainBounds { real_grid: (0..100).map(Into::into).collect(), max_assignments: 1000, ..DomainBounds::default() };
        assert!(matches!(discharge(&o, &b, &ctx()), Verdict::Unknown(_)));
    }
}
