use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use super::bounds::DomainBounds;
use crate::ast::*;
use crate::typeck::{Context, Type};

/// A finite function: `args[k]` maps to `outs[k]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FuncTable {
    pub args: Arc<Vec<Vec<Value>>>,
    pub outs: Vec<Value>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Real(Number),
    Nat(u64),
    Bool(bool),
    Enum { ty: String, member: String },
    Ctor { ty: String, name: String, args: Vec<Value> },
    Func(FuncTable),
}

impl Value {
    pub fn as_number(&self) -> Option<Number> {
        match self {
            Value::Real(n) => Some(*n),
            Value::Nat(n) => Some(Number::from_integer(*n as i64)),
            _ => None,
        }
    }

    pub fn enum_member(ty: &str, member: &str) -> Value {
        Value::Enum { ty: ty.into(), member: member.into() }
    }
}

/// Equality that identifies numerically equal REAL and NATURAL values.
pub fn values_equal(a: &Value, b: &Value) -> bool {
    match (a.as_number(), b.as_number()) {
        (Some(x), Some(y)) => return x == y,
        (Some(_), None) | (None, Some(_)) => return false,
        _ => {}
    }
    match (a, b) {
        (Value::Ctor { name: n1, args: a1, .. }, Value::Ctor { name: n2, args: a2, .. }) => {
            n1 == n2 && a1.len() == a2.len() && a1.iter().zip(a2).all(|(x, y)| values_equal(x, y))
        }
        (Value::Enum { member: m1, .. }, Value::Enum { member: m2, .. }) => m1 == m2,
        _ => a == b,
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |f: &mut fmt::Formatter<'_>, vs: &[Value]| -> fmt::Result {
            for (i, v) in vs.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{v}")?;
            }
            Ok(())
        };
        match self {
            Value::Real(n) => f.write_str(&format_number(n)),
            Value::Nat(n) => write!(f, "{n}"),
            Value::Bool(b) => f.write_str(if *b { "TRUE" } else { "FALSE" }),
            Value::Enum { member, .. } => f.write_str(member),
            Value::Ctor { name, args, .. } => {
                write!(f, "{name}(")?;
                list(f, args)?;
                f.write_str(")")
            }
            Value::Func(t) => {
                f.write_str("{")?;
                for (i, (a, o)) in t.args.iter().zip(&t.outs).enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    f.write_str("(")?;
                    list(f, a)?;
                    write!(f, ") -> {o}")?;
                }
                f.write_str("}")
            }
        }
    }
}

pub type Assignment = BTreeMap<IoRef, Value>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum EvalError {
    #[error("unbound symbol `{0}`")]
    Unbound(String),
    #[error("type error: {0}")]
    Type(String),
    #[error("`{0}` applied outside its sampled table at ({1})")]
    OutsideTable(String, String),
    #[error("{0}")]
    Domain(String),
}

/// The values a type ranges over under some bounds. Function types are kept
/// implicit: the `i`-th table is decoded on demand.
#[derive(Debug, Clone)]
pub enum Domain {
    Values(Vec<Value>),
    Tables { args: Arc<Vec<Vec<Value>>>, rets: Vec<Value> },
}

impl Domain {
    /// Saturating size.
    pub fn len(&self) -> u128 {
        match self {
            Domain::Values(v) => v.len() as u128,
            Domain::Tables { args, rets } => {
                let mut n: u128 = 1;
                for _ in 0..args.len() {
                    n = n.saturating_mul(rets.len() as u128);
                }
                n
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Tables are ordered lexicographically with the first argument tuple
    /// most significant.
    pub fn get(&self, mut i: u128) -> Value {
        match self {
            Domain::Values(v) => v[i as usize].clone(),
            Domain::Tables { args, rets } => {
                let r = rets.len() as u128;
                let mut outs = vec![rets[0].clone(); args.len()];
                for slot in outs.iter_mut().rev() {
                    *slot = rets[(i % r) as usize].clone();
                    i /= r;
                }
                Value::Func(FuncTable { args: args.clone(), outs })
            }
        }
    }
}

pub const MAX_TABLE_POINTS: u128 = 64;

pub struct Evaluator<'a> {
    pub ctx: &'a Context,
    pub bounds: &'a DomainBounds,
}

fn product(domains: &[Vec<Value>]) -> Vec<Vec<Value>> {
    let mut out = vec![Vec::new()];
    for d in domains {
        let mut next = Vec::with_capacity(out.len() * d.len());
        for prefix in &out {
            for v in d {
                let mut p = prefix.clone();
                p.push(v.clone());
                next.push(p);
            }
        }
        out = next;
    }
    out
}

impl<'a> Evaluator<'a> {
    pub fn new(ctx: &'a Context, bounds: &'a DomainBounds) -> Self {
        Evaluator { ctx, bounds }
    }

    fn reals(&self, override_key: Option<&str>) -> Vec<Value> {
        let pts = override_key
            .and_then(|k| self.bounds.overrides.get(k))
            .or_else(|| self.bounds.overrides.get("REAL"))
            .unwrap_or(&self.bounds.real_grid);
        pts.iter().map(|n| Value::Real(*n)).collect()
    }

    fn naturals(&self) -> Vec<Value> {
        match self.bounds.overrides.get("NATURAL") {
            Some(pts) => pts.iter().filter(|n| n.is_integer() && *n.numer() >= 0).map(|n| Value::Nat(n.to_integer() as u64)).collect(),
            None => (0..=self.bounds.natural_bound).map(Value::Nat).collect(),
        }
    }

    fn scalar_domain(&self, ty: &Type, func: Option<&str>) -> Result<Vec<Value>, EvalError> {
        match self.domain(ty, func)? {
            Domain::Values(v) => Ok(v),
            Domain::Tables { .. } => Err(EvalError::Domain(format!("function type `{ty}` used as an argument"))),
        }
    }

    /// `func` names the function type whose argument positions are being
    /// sampled, so its override applies.
    pub fn domain(&self, ty: &Type, func: Option<&str>) -> Result<Domain, EvalError> {
        Ok(match ty {
            Type::Real => Domain::Values(self.reals(func)),
            Type::Natural => Domain::Values(self.naturals()),
            Type::Bool => Domain::Values(vec![Value::Bool(false), Value::Bool(true)]),
            Type::Enum(e) => Domain::Values(self.ctx.enum_members(e).iter().map(|m| Value::enum_member(e, m)).collect()),
            Type::Empty(_) => Domain::Values(Vec::new()),
            Type::Ctor(c) => {
                let mut vals = Vec::new();
                for k in self.ctx.constructors(c) {
                    let params = self.ctx.ctor_params(c, &k.name).ok_or_else(|| EvalError::Type(format!("bad constructor `{}`", k.name)))?;
                    let doms = params.iter().map(|p| self.scalar_domain(p, None)).collect::<Result<Vec<_>, _>>()?;
                    for args in product(&doms) {
                        vals.push(Value::Ctor { ty: c.clone(), name: k.name.clone(), args });
                    }
                }
                Domain::Values(vals)
            }
            Type::Func(f) => {
                let (params, ret) = self.ctx.signature(f).ok_or_else(|| EvalError::Type(format!("unknown function type `{f}`")))?;
                let doms = params.iter().map(|p| self.scalar_domain(p, Some(f))).collect::<Result<Vec<_>, _>>()?;
                let points: u128 = doms.iter().fold(1u128, |n, d| n.saturating_mul(d.len() as u128));
                if points > MAX_TABLE_POINTS {
                    return Err(EvalError::Domain(format!(
                        "function type `{f}` has {points} sample points (limit {MAX_TABLE_POINTS}); add an override for `{f}` to the bounds file"
                    )));
                }
                let rets = self.scalar_domain(&ret, None)?;
                Domain::Tables { args: Arc::new(product(&doms)), rets }
            }
        })
    }

    fn check_value(&self, v: &Value) -> Result<(), EvalError> {
        match v {
            Value::Enum { ty, member } if !self.ctx.enum_members(ty).contains(member) => {
                Err(EvalError::Type(format!("`{member}` is not a member of `{ty}`")))
            }
            Value::Real(_) | Value::Nat(_) | Value::Bool(_) | Value::Enum { .. } => Ok(()),
            Value::Ctor { args, .. } => args.iter().try_for_each(|a| self.check_value(a)),
            Value::Func(t) => t.outs.iter().try_for_each(|a| self.check_value(a)),
        }
    }

    pub fn eval(&self, f: &Formula, env: &Assignment) -> Result<bool, EvalError> {
        let mut scope = Vec::new();
        self.formula(f, env, &mut scope)
    }

    fn formula(&self, f: &Formula, env: &Assignment, scope: &mut Vec<(String, Value)>) -> Result<bool, EvalError> {
        Ok(match f {
            Formula::Bool(b) => *b,
            Formula::Not(a) => !self.formula(a, env, scope)?,
            Formula::And(a, b) => self.formula(a, env, scope)? && self.formula(b, env, scope)?,
            Formula::Or(a, b) => self.formula(a, env, scope)? || self.formula(b, env, scope)?,
            Formula::Implies(a, b) => !self.formula(a, env, scope)? || self.formula(b, env, scope)?,
            Formula::Iff(a, b) => self.formula(a, env, scope)? == self.formula(b, env, scope)?,
            Formula::Quant(q, vars, body) => {
                let mut doms = Vec::new();
                for v in vars {
                    let ty = self.ctx.resolve(&v.ty).ok_or_else(|| EvalError::Type(format!("unknown type `{}`", v.ty)))?;
                    doms.push(self.scalar_domain(&ty, None)?);
                }
                let depth = scope.len();
                let mut hits = 0usize;
                let mut result = matches!(q, Quantifier::Forall);
                for combo in product(&doms) {
                    scope.extend(vars.iter().map(|v| v.name.clone()).zip(combo));
                    let r = self.formula(body, env, scope);
                    scope.truncate(depth);
                    let r = r?;
                    match q {
                        Quantifier::Forall if !r => {
                            result = false;
                            break;
                        }
                        Quantifier::Exists if r => {
                            result = true;
                            break;
                        }
                        Quantifier::ExistsUnique if r => {
                            hits += 1;
                            if hits > 1 {
                                break;
                            }
                        }
                        _ => {}
                    }
                }
                if *q == Quantifier::ExistsUnique {
                    result = hits == 1;
                }
                result
            }
            Formula::Member { term, set, negated } => {
                let v = self.term(term, env, scope)?;
                let Value::Enum { member, .. } = &v else {
                    return Err(EvalError::Type(format!("membership test on non-enumeration value `{v}`")));
                };
                set.contains(member) != *negated
            }
            Formula::Compare(l, op, r) => {
                let a = self.term(l, env, scope)?;
                let b = self.term(r, env, scope)?;
                match op {
                    CmpOp::Eq => values_equal(&a, &b),
                    CmpOp::Ne => !values_equal(&a, &b),
                    _ => {
                        let (Some(x), Some(y)) = (a.as_number(), b.as_number()) else {
                            return Err(EvalError::Type(format!("`{}` on non-numeric values `{a}`, `{b}`", op.symbol())));
                        };
                        let ord = x.cmp(&y);
                        match op {
                            CmpOp::Lt => ord == Ordering::Less,
                            CmpOp::Le => ord != Ordering::Greater,
                            CmpOp::Gt => ord == Ordering::Greater,
                            _ => ord != Ordering::Less,
                        }
                    }
                }
            }
            Formula::Pred(t) => match self.term(t, env, scope)? {
                Value::Bool(b) => b,
                other => return Err(EvalError::Type(format!("`{t}` evaluates to non-boolean `{other}`"))),
            },
        })
    }

    fn lookup(&self, r: &IoRef, env: &Assignment) -> Result<Value, EvalError> {
        let v = env.get(r).ok_or_else(|| EvalError::Unbound(r.to_string()))?;
        self.check_value(v)?;
        Ok(v.clone())
    }

    fn term(&self, t: &Term, env: &Assignment, scope: &[(String, Value)]) -> Result<Value, EvalError> {
        Ok(match t {
            Term::Name(n) => {
                if let Some((_, v)) = scope.iter().rev().find(|(x, _)| x == n) {
                    return Ok(v.clone());
                }
                if let Some(e) = self.ctx.enums_with(n).first() {
                    return Ok(Value::enum_member(e, n));
                }
                if let Some(c) = self.ctx.ctor_sets_with(n).first() {
                    return Ok(Value::Ctor { ty: c.to_string(), name: n.clone(), args: Vec::new() });
                }
                return Err(EvalError::Unbound(n.clone()));
            }
            Term::Io(r) => self.lookup(r, env)?,
            Term::Apply(r, args) => {
                let Value::Func(table) = self.lookup(r, env)? else {
                    return Err(EvalError::Type(format!("`{r}` is not a function")));
                };
                let vals = args.iter().map(|a| self.term(a, env, scope)).collect::<Result<Vec<_>, _>>()?;
                let hit = table
                    .args
                    .iter()
                    .position(|row| row.len() == vals.len() && row.iter().zip(&vals).all(|(x, y)| values_equal(x, y)));
                match hit {
                    Some(k) => table.outs[k].clone(),
                    None => {
                        let shown: Vec<String> = vals.iter().map(|v| v.to_string()).collect();
                        return Err(EvalError::OutsideTable(r.to_string(), shown.join(", ")));
                    }
                }
            }
            Term::Ctor(name, args) => {
                let ty = self.ctx.ctor_sets_with(name).first().map(|s| s.to_string()).ok_or_else(|| EvalError::Unbound(name.clone()))?;
                let args = args.iter().map(|a| self.term(a, env, scope)).collect::<Result<Vec<_>, _>>()?;
                Value::Ctor { ty, name: name.clone(), args }
            }
            Term::Num(n) => Value::Real(*n),
            Term::Bool(b) => Value::Bool(*b),
            Term::Add(inner, k) => match self.term(inner, env, scope)? {
                Value::Nat(n) => Value::Nat(n + k),
                Value::Real(r) => Value::Real(r + Number::from_integer(*k as i64)),
                other => return Err(EvalError::Type(format!("cannot add to `{other}`"))),
            },
        })
    }
}

/// Truth value of `f` under `env`, with quantifiers expanded over `bounds`.
pub fn eval_formula(f: &Formula, env: &Assignment, bounds: &DomainBounds, ctx: &Context) -> Result<bool, EvalError> {
    Evaluator::new(ctx, bounds).eval(f, env)
}
