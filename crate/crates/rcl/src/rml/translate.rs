use num_traits::Signed;

use super::{simplify_term, Arg, EventType, Guard, Lit, PatVal, RmlSpec, RmlTerm};
use crate::ast::{CmpOp, Dir, Formula, IoRef, Number, Quantifier, Term, TopicBinding};
use crate::diag::{Diagnostic, Span};
use crate::syntax::ContractSpans;
use crate::typeck::{Type, TypedContract};

const ROS_BUILTINS: &[&str] = &[
    "bool", "byte", "char", "int8", "uint8", "int16", "uint16", "int32", "uint32", "int64", "uint64", "float32", "float64",
    "string", "time", "duration",
];

pub(crate) fn is_builtin_message(t: &str) -> bool {
    ROS_BUILTINS.contains(&t)
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    c.next().map(|f| f.to_uppercase().chain(c).collect()).unwrap_or_default()
}

/// Message type path used for a topic. Builtin message tokens are replaced
/// by `<package>/<Type>`; the second value says why, when that happened.
pub(crate) fn message_path(tc: &TypedContract, binding: &TopicBinding) -> (String, Option<String>) {
    if !is_builtin_message(&binding.message_type) {
        return (binding.message_type.clone(), None);
    }
    let pkg = tc
        .contract
        .topics()
        .iter()
        .filter(|t| !is_builtin_message(&t.message_type))
        .find_map(|t| t.message_type.split_once('/').map(|(p, _)| p.to_string()));
    let var_ty = binding.binding.as_ref().and_then(|b| {
        let dir = b.dir.or_else(|| tc.topic_index.keys().find(|(_, n)| *n == b.name).map(|(d, _)| *d))?;
        tc.contract.var(dir, &b.name).map(|v| v.ty.clone())
    });
    let (pkg, ty) = match var_ty {
        Some(crate::ast::BaseType::Named(n)) => (pkg.unwrap_or_else(|| "std_msgs".into()), n),
        _ => ("std_msgs".into(), capitalize(&binding.message_type)),
    };
    let path = format!("{pkg}/{ty}");
    let why = format!(
        "topic `{}` has builtin message type `{}`; using `{path}` in the monitor",
        binding.topic_name, binding.message_type
    );
    (path, Some(why))
}

#[derive(Debug, Clone)]
struct EtKey {
    var: (Dir, String),
    topic: String,
    fields: Vec<String>,
    guard: Option<(CmpOp, Number)>,
}

/// Translates guarantee formulas of one contract, collecting the event types
/// they need.
pub struct Translator<'a> {
    tc: &'a TypedContract,
    keys: Vec<EtKey>,
    event_types: Vec<EventType>,
    pub warnings: Vec<Diagnostic>,
    scope: Vec<(String, String)>,
    span: Span,
    fresh: usize,
}

fn field_param(field: &str) -> String {
    let base = field.trim_end_matches(|c: char| c.is_ascii_digit());
    let suffix = &field[base.len()..];
    let p = match base {
        "posX" => "x",
        "posY" => "y",
        "posZ" => "z",
        "pos" => "p",
        "id" => "i",
        "level" => "Lvl",
        "command" => "Cmd",
        _ => "v",
    };
    format!("{p}{suffix}")
}

fn dedup(names: Vec<String>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for n in names {
        let mut cand = n.clone();
        let mut k = 2;
        while out.contains(&cand) {
            cand = format!("{n}{k}");
            k += 1;
        }
        out.push(cand);
    }
    out
}

fn scalar_field(ty: &Type) -> &'static str {
    match ty {
        Type::Natural => "id",
        Type::Enum(_) => "level",
        Type::Ctor(_) => "command",
        _ => "data",
    }
}

fn arg_fields(types: &[Type]) -> Vec<String> {
    let mut reals = 0;
    types
        .iter()
        .map(|t| match t {
            Type::Real => {
                reals += 1;
                match reals {
                    1 => "posX".to_string(),
                    2 => "posY".to_string(),
                    3 => "posZ".to_string(),
                    k => format!("pos{k}"),
                }
            }
            other => scalar_field(other).to_string(),
        })
        .collect()
}

fn rml_var(name: &str) -> String {
    let base = name.trim_end_matches('\'');
    let primes = name.len() - base.len();
    if primes == 0 {
        base.to_string()
    } else {
        format!("{base}{primes}")
    }
}

fn op_tag(op: CmpOp) -> &'static str {
    match op {
        CmpOp::Lt => "lt",
        CmpOp::Le => "le",
        CmpOp::Gt => "gt",
        CmpOp::Ge => "ge",
        CmpOp::Eq => "eq",
        CmpOp::Ne => "ne",
    }
}

fn num_tag(n: &Number) -> String {
    let s = crate::ast::format_number(&n.abs()).replace(['.', '/'], "_");
    if n.is_negative() {
        format!("m{s}")
    } else {
        s
    }
}

fn is_io(t: &Term) -> bool {
    matches!(t, Term::Io(_) | Term::Apply(..))
}

impl<'a> Translator<'a> {
    pub fn new(tc: &'a TypedContract) -> Translator<'a> {
        Translator { tc, keys: Vec::new(), event_types: Vec::new(), warnings: Vec::new(), scope: Vec::new(), span: Span::default(), fresh: 0 }
    }

    /// Event types in declaration order: grouped by variable, each group
    /// placed at the first use of its variable.
    pub fn event_types(&self) -> Vec<EventType> {
        let mut order: Vec<usize> = (0..self.event_types.len()).collect();
        let first = |i: usize| self.keys.iter().position(|k| k.var == self.keys[i].var).unwrap();
        order.sort_by_key(|&i| (first(i), i));
        order.into_iter().map(|i| self.event_types[i].clone()).collect()
    }

    fn err(&self, msg: impl Into<String>) -> Diagnostic {
        Diagnostic::error("R001", self.span, msg)
    }

    fn topic_of(&mut self, io: &IoRef) -> Result<String, Diagnostic> {
        let tc = self.tc;
        if tc.contract.topics.is_none() {
            let msg = format!("no topics clause; `{}` is monitored on topic `{}`", io, io.name);
            if !self.warnings.iter().any(|w| w.message == msg) {
                self.warnings.push(Diagnostic::warning("R103", self.span, msg));
            }
            return Ok(io.name.clone());
        }
        let Some(b) = tc.topic_for(io.dir, &io.name) else {
            return Err(Diagnostic::error("R002", self.span, format!("`{io}` is used in a guarantee but bound to no topic")));
        };
        let (path, why) = message_path(tc, b);
        if let Some(why) = why {
            if !self.warnings.iter().any(|w| w.message == why) {
                self.warnings.push(Diagnostic::warning("R102", self.span, why));
            }
        }
        Ok(path)
    }

    /// Finds or declares the event type of `io` with the given value fields.
    fn event_type(&mut self, io: &IoRef, fields: Vec<String>, guard: Option<(CmpOp, Number)>) -> Result<String, Diagnostic> {
        let topic = self.topic_of(io)?;
        let fields = dedup(fields);
        let key = EtKey { var: (io.dir, io.name.clone()), topic: topic.clone(), fields: fields.clone(), guard };
        if let Some(i) = self.keys.iter().position(|k| k.topic == key.topic && k.fields == key.fields && k.guard == key.guard) {
            return Ok(self.event_types[i].name.clone());
        }
        let mut name = match &guard {
            Some((op, n)) => format!("{}_{}_{}", io.name, op_tag(*op), num_tag(n)),
            None => io.name.clone(),
        };
        let base = name.clone();
        let mut k = 2;
        while self.event_types.iter().any(|e| e.name == name && e.params.len() == fields.len()) {
            name = format!("{base}_{k}");
            k += 1;
        }
        let params = dedup(fields.iter().map(|f| field_param(f)).collect());
        let mut pattern = vec![("topic".to_string(), PatVal::Lit(Lit::Str(topic)))];
        pattern.extend(fields.iter().cloned().zip(params.iter().cloned().map(PatVal::Param)));
        let guard = guard.map(|(op, value)| Guard { param: params.last().cloned().unwrap_or_default(), op, value });
        self.keys.push(key);
        self.event_types.push(EventType { name: name.clone(), params, fields: pattern, guard });
        Ok(name)
    }

    fn arg(&self, t: &Term) -> Result<Arg, Diagnostic> {
        match t {
            Term::Name(n) => Ok(match self.scope.iter().rev().find(|(o, _)| o == n) {
                Some((_, r)) => Arg::Var(r.clone()),
                None => Arg::Lit(Lit::Sym(n.clone())),
            }),
            Term::Num(n) => Ok(Arg::Lit(Lit::Num(*n))),
            Term::Bool(b) => Ok(Arg::Lit(Lit::Bool(*b))),
            Term::Add(inner, k) => match self.arg(inner)? {
                Arg::Var(v) => Ok(Arg::Add(v, *k)),
                Arg::Lit(Lit::Num(n)) => Ok(Arg::Lit(Lit::Num(n + Number::from_integer(*k as i64)))),
                _ => Err(self.err(format!("cannot monitor `{t}`"))),
            },
            Term::Ctor(c, a) if a.is_empty() => Ok(Arg::Lit(Lit::Sym(c.clone()))),
            _ => Err(self.err(format!("nested term `{t}` cannot be an event field"))),
        }
    }

    fn io_type(&self, io: &IoRef) -> Result<Type, Diagnostic> {
        self.tc.var_type(io.dir, &io.name).ok_or_else(|| self.err(format!("unknown variable `{io}`")))
    }

    /// Event-type reference asserting `lhs == rhs`, where `lhs` is an io
    /// access and `rhs` is not. The flag tells whether the reference is
    /// negated because a boolean result was compared to FALSE.
    fn equals(&mut self, lhs: &Term, rhs: &Term) -> Result<(RmlTerm, bool), Diagnostic> {
        match lhs {
            Term::Io(io) => {
                let ty = self.io_type(io)?;
                let (fields, args) = match (&ty, rhs) {
                    (Type::Ctor(set), Term::Ctor(c, cargs)) => {
                        let ps = self.tc.context.ctor_params(set, c).ok_or_else(|| self.err(format!("`{c}` is not a constructor of `{set}`")))?;
                        let mut fields = vec!["command".to_string()];
                        fields.extend(arg_fields(&ps));
                        let mut args = vec![Arg::Lit(Lit::Sym(c.clone()))];
                        for a in cargs {
                            args.push(self.arg(a)?);
                        }
                        (fields, args)
                    }
                    (Type::Func(_) | Type::Empty(_), _) => return Err(self.err(format!("`{io}` cannot be compared as a whole"))),
                    (_, _) => (vec![scalar_field(&ty).to_string()], vec![self.arg(rhs)?]),
                };
                let name = self.event_type(io, fields, None)?;
                Ok((RmlTerm::et(name, args), false))
            }
            Term::Apply(io, targs) => {
                let Type::Func(fname) = self.io_type(io)? else {
                    return Err(self.err(format!("`{io}` is not a function")));
                };
                let (ps, ret) = self.tc.context.signature(&fname).ok_or_else(|| self.err(format!("unknown function type `{fname}`")))?;
                let mut fields = arg_fields(&ps);
                let mut args = targs.iter().map(|a| self.arg(a)).collect::<Result<Vec<_>, _>>()?;
                let mut negated = false;
                if ret == Type::Bool {
                    match rhs {
                        Term::Bool(b) => negated = !b,
                        _ => return Err(self.err(format!("`{lhs}` can only be compared with TRUE or FALSE"))),
                    }
                } else {
                    fields.push(scalar_field(&ret).to_string());
                    args.push(self.arg(rhs)?);
                }
                let name = self.event_type(io, fields, None)?;
                Ok((RmlTerm::et(name, args), negated))
            }
            _ => Err(self.err(format!("`{lhs}` is not an input or output"))),
        }
    }

    fn ordering(&mut self, lhs: &Term, op: CmpOp, rhs: &Term) -> Result<RmlTerm, Diagnostic> {
        let Term::Num(c) = rhs else {
            return Err(self.err(format!("ordering `{lhs} {} {rhs}` needs a numeric constant on one side", op.symbol())));
        };
        let (io, fields, mut args) = match lhs {
            Term::Io(io) => {
                let ty = self.io_type(io)?;
                if !ty.is_numeric() {
                    return Err(self.err(format!("`{io}` is not numeric")));
                }
                (io, vec![scalar_field(&ty).to_string()], Vec::new())
            }
            Term::Apply(io, targs) => {
                let Type::Func(fname) = self.io_type(io)? else {
                    return Err(self.err(format!("`{io}` is not a function")));
                };
                let (ps, ret) = self.tc.context.signature(&fname).ok_or_else(|| self.err(format!("unknown function type `{fname}`")))?;
                if !ret.is_numeric() {
                    return Err(self.err(format!("`{lhs}` is not numeric")));
                }
                let mut fields = arg_fields(&ps);
                fields.push(scalar_field(&ret).to_string());
                (io, fields, targs.iter().map(|a| self.arg(a)).collect::<Result<Vec<_>, _>>()?)
            }
            _ => return Err(self.err(format!("`{lhs}` is not an input or output"))),
        };
        let name = self.event_type(io, fields, Some((op, *c)))?;
        args.push(Arg::Wild);
        Ok(RmlTerm::et(name, args))
    }

    fn fresh_var(&mut self) -> String {
        loop {
            let v = if self.fresh == 0 { "v".to_string() } else { format!("v{}", self.fresh) };
            self.fresh += 1;
            if !self.scope.iter().any(|(_, r)| *r == v) {
                return v;
            }
        }
    }

    fn compare(&mut self, l: &Term, op: CmpOp, r: &Term) -> Result<RmlTerm, Diagnostic> {
        let (l, op, r) = if !is_io(l) && is_io(r) { (r, op.flip(), l) } else { (l, op, r) };
        if !is_io(l) {
            return Err(self.err(format!("`{l} {} {r}` mentions no input or output", op.symbol())));
        }
        if op.is_ordering() {
            return self.ordering(l, op, r);
        }
        if is_io(r) {
            let (Term::Io(a), Term::Io(b)) = (l, r) else {
                return Err(self.err(format!("cannot monitor `{l} {} {r}`", op.symbol())));
            };
            let (ta, tb) = (self.io_type(a)?, self.io_type(b)?);
            if !matches!(ta, Type::Real | Type::Natural | Type::Bool | Type::Enum(_)) {
                return Err(self.err(format!("cannot monitor `{l} {} {r}`", op.symbol())));
            }
            let v = self.fresh_var();
            let ea = self.event_type(a, vec![scalar_field(&ta).to_string()], None)?;
            let eb = self.event_type(b, vec![scalar_field(&tb).to_string()], None)?;
            let rb = RmlTerm::Et { name: eb, args: vec![Arg::Var(v.clone())], negated: op == CmpOp::Ne };
            return Ok(RmlTerm::let_(vec![v.clone()], RmlTerm::And(vec![RmlTerm::et(ea, vec![Arg::Var(v)]), rb])));
        }
        let (t, neg) = self.equals(l, r)?;
        let flip = neg != (op == CmpOp::Ne);
        Ok(if flip { t.negate().unwrap() } else { t })
    }

    fn negate(&self, t: RmlTerm) -> Result<RmlTerm, Diagnostic> {
        t.negate().ok_or_else(|| self.err("term cannot be negated"))
    }

    fn chain<'f>(f: &'f Formula, and: bool, out: &mut Vec<&'f Formula>) {
        match (f, and) {
            (Formula::And(a, b), true) | (Formula::Or(a, b), false) => {
                Self::chain(a, and, out);
                Self::chain(b, and, out);
            }
            _ => out.push(f),
        }
    }

    pub fn translate(&mut self, f: &Formula) -> Result<RmlTerm, Diagnostic> {
        Ok(match f {
            Formula::Bool(true) => RmlTerm::Any,
            Formula::Bool(false) => RmlTerm::Nothing,
            Formula::Not(g) => {
                let t = self.translate(g)?;
                self.negate(t)?
            }
            Formula::And(..) | Formula::Or(..) => {
                let and = matches!(f, Formula::And(..));
                let mut parts = Vec::new();
                Self::chain(f, and, &mut parts);
                let ts = parts.into_iter().map(|p| self.translate(p)).collect::<Result<Vec<_>, _>>()?;
                if and {
                    RmlTerm::And(ts)
                } else {
                    RmlTerm::Or(ts)
                }
            }
            Formula::Implies(a, b) => {
                let (t1, t2) = (self.translate(a)?, self.translate(b)?);
                let (n1, n2) = (self.negate(t1.clone())?, self.negate(t2.clone())?);
                RmlTerm::Or(vec![
                    RmlTerm::And(vec![n1.clone(), t2.clone()]),
                    RmlTerm::And(vec![n1, n2]),
                    RmlTerm::And(vec![t1, t2]),
                ])
            }
            Formula::Iff(a, b) => {
                let (t1, t2) = (self.translate(a)?, self.translate(b)?);
                let (n1, n2) = (self.negate(t1.clone())?, self.negate(t2.clone())?);
                RmlTerm::Or(vec![RmlTerm::And(vec![t1, t2]), RmlTerm::And(vec![n1, n2])])
            }
            Formula::Quant(q, vars, body) => {
                if *q == Quantifier::ExistsUnique {
                    self.warnings.push(Diagnostic::warning(
                        "R101",
                        self.span,
                        "`exists!` is monitored as `exists`; uniqueness is not observable on single events",
                    ));
                }
                let names: Vec<String> = vars.iter().map(|v| rml_var(&v.name)).collect();
                let n = self.scope.len();
                self.scope.extend(vars.iter().map(|v| v.name.clone()).zip(names.iter().cloned()));
                let body = self.translate(body);
                self.scope.truncate(n);
                RmlTerm::let_(names, body?)
            }
            Formula::Member { term, set, negated } => {
                let mut ts = Vec::new();
                for m in set {
                    let t = self.compare(term, CmpOp::Eq, &Term::Name(m.clone()))?;
                    ts.push(if *negated { self.negate(t)? } else { t });
                }
                match (ts.len(), negated) {
                    (1, _) => ts.pop().unwrap(),
                    (0, false) => RmlTerm::Nothing,
                    (0, true) => RmlTerm::Any,
                    (_, false) => RmlTerm::Or(ts),
                    (_, true) => RmlTerm::And(ts),
                }
            }
            Formula::Compare(l, op, r) => self.compare(l, *op, r)?,
            Formula::Pred(t) => self.compare(t, CmpOp::Eq, &Term::Bool(true))?,
        })
    }
}

/// Translates one formula of `tc`, returning the term and the event types
/// it references.
pub fn translate_formula(tc: &TypedContract, f: &Formula) -> Result<(RmlTerm, Vec<EventType>), Diagnostic> {
    let mut tr = Translator::new(tc);
    let t = tr.translate(f)?;
    Ok((t, tr.event_types()))
}

#[derive(Debug, Clone)]
pub struct Synthesis {
    pub spec: RmlSpec,
    pub warnings: Vec<Diagnostic>,
}

/// One starred, simplified term per guarantee.
pub fn synthesize(tc: &TypedContract, spans: Option<&ContractSpans>) -> Result<Synthesis, Vec<Diagnostic>> {
    let mut tr = Translator::new(tc);
    let mut terms = Vec::new();
    let mut errors = Vec::new();
    for (i, g) in tc.contract.guarantees.iter().enumerate() {
        tr.span = spans.and_then(|s| s.guarantees.get(i).copied()).unwrap_or_default();
        tr.fresh = 0;
        match tr.translate(g) {
            Ok(t) => terms.push((format!("t{}", i + 1), RmlTerm::star(simplify_term(&t)))),
            Err(d) => errors.push(d),
        }
    }
    if !errors.is_empty() {
        return Err(errors);
    }
    Ok(Synthesis { spec: RmlSpec { event_types: tr.event_types(), terms }, warnings: tr.warnings })
}

pub fn derive_event_types(tc: &TypedContract) -> Result<Vec<EventType>, Vec<Diagnostic>> {
    synthesize(tc, None).map(|s| s.spec.event_types)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_document, parse_formula};
    use crate::typeck::check_document;

    fn contract(src: &str) -> TypedContract {
        check_document(&parse_document(src).unwrap()).unwrap().remove(0)
    }

    #[test]
    fn primes_become_digits() {
        assert_eq!(rml_var("x''"), "x2");
        assert_eq!(rml_var("i"), "i");
    }

    #[test]
    fn one_bool_input() {
        let tc = contract("node n { inputs(b : BOOL) outputs() topics(std_msgs/Bool b matches(in.b)) guarantee(in.b == TRUE) }");
        let s = synthesize(&tc, None).unwrap();
        assert_eq!(s.spec.event_types.len(), 1);
        assert_eq!(s.spec.event_types[0].fields.len(), 2);
        assert_eq!(s.spec.terms[0].1, RmlTerm::star(RmlTerm::et("b", vec![Arg::Lit(Lit::Bool(true))])));
    }

    #[test]
    fn equality_adds_one_pair() {
        let tc = contract("context{ S : {a, b}; } node n { inputs(s : S) outputs() topics(p/S s matches(in.s)) guarantee(TRUE) }");
        let (t, ets) = translate_formula(&tc, &parse_formula("in.s == a").unwrap()).unwrap();
        assert_eq!(t, RmlTerm::et("s", vec![Arg::Lit(Lit::Sym("a".into()))]));
        assert_eq!(ets[0].fields[1], ("level".to_string(), PatVal::Param("Lvl".into())));
        let (t, _) = translate_formula(&tc, &parse_formula("in.s != a").unwrap()).unwrap();
        assert!(matches!(t, RmlTerm::Et { negated: true, .. }));
    }

    #[test]
    fn implies_is_three_way_before_simplification() {
        let tc = contract("node n { inputs(p : BOOL, q : BOOL) outputs() guarantee(TRUE) }");
        let (t, _) = translate_formula(&tc, &parse_formula("in.p == TRUE -> in.q == TRUE").unwrap()).unwrap();
        let RmlTerm::Or(ts) = &t else { panic!() };
        assert_eq!(ts.len(), 3);
    }

    #[test]
    fn ordering_becomes_guarded_event_type() {
        let tc = contract("node n { inputs(r : REAL) outputs() topics(p/R r matches(in.r)) guarantee(0 <= in.r) }");
        let s = synthesize(&tc, None).unwrap();
        let et = &s.spec.event_types[0];
        assert_eq!(et.name, "r_ge_0");
        assert_eq!(et.guard.as_ref().unwrap().op, CmpOp::Ge);
    }

    #[test]
    fn missing_topic_binding() {
        let tc = contract("node n { inputs(r : REAL, s : REAL) outputs() topics(p/R r matches(in.r)) guarantee(in.s == 1) }");
        assert_eq!(synthesize(&tc, None).unwrap_err()[0].code, "R002");
    }
}
