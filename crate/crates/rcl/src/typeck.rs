//! Context resolution and contract type checking.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use crate::ast::*;
use crate::diag::{Diagnostic, Span};
use crate::syntax::ContractSpans;

/// Semantic type of a term. Named context types are split by the shape of
/// their declaration.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Type {
    Real,
    Natural,
    Bool,
    Enum(String),
    Ctor(String),
    Func(String),
    Empty(String),
}

impl Type {
    pub fn is_numeric(&self) -> bool {
        matches!(self, Type::Real | Type::Natural)
    }

    /// Types a quantifier may range over.
    pub fn is_enumerable(&self) -> bool {
        matches!(self, Type::Real | Type::Natural | Type::Bool | Type::Enum(_))
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Real => f.write_str("REAL"),
            Type::Natural => f.write_str("NATURAL"),
            Type::Bool => f.write_str("BOOL"),
            Type::Enum(n) | Type::Ctor(n) | Type::Func(n) | Type::Empty(n) => f.write_str(n),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Context {
    decls: Vec<ContextDecl>,
}

impl Context {
    pub fn len(&self) -> usize {
        self.decls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.decls.is_empty()
    }

    pub fn decls(&self) -> &[ContextDecl] {
        &self.decls
    }

    pub fn get(&self, name: &str) -> Option<&TypeExpr> {
        self.decls.iter().find(|d| d.name == name).map(|d| &d.body)
    }

    pub fn resolve(&self, base: &BaseType) -> Option<Type> {
        Some(match base {
            BaseType::Real => Type::Real,
            BaseType::Natural => Type::Natural,
            BaseType::Bool => Type::Bool,
            BaseType::Named(n) => match self.get(n)? {
                TypeExpr::Enum(_) => Type::Enum(n.clone()),
                TypeExpr::Constructors(_) => Type::Ctor(n.clone()),
                TypeExpr::Function { .. } => Type::Func(n.clone()),
                TypeExpr::Empty => Type::Empty(n.clone()),
            },
        })
    }

    pub fn enum_members(&self, name: &str) -> &[String] {
        match self.get(name) {
            Some(TypeExpr::Enum(m)) => m,
            _ => &[],
        }
    }

    pub fn constructors(&self, name: &str) -> &[Constructor] {
        match self.get(name) {
            Some(TypeExpr::Constructors(c)) => c,
            _ => &[],
        }
    }

    /// Parameter and result types of a declared function type.
    pub fn signature(&self, name: &str) -> Option<(Vec<Type>, Type)> {
        match self.get(name)? {
            TypeExpr::Function { params, ret } => {
                let ps = params.iter().map(|p| self.resolve(p)).collect::<Option<Vec<_>>>()?;
                Some((ps, self.resolve(ret)?))
            }
            _ => None,
        }
    }

    pub fn ctor_params(&self, ty: &str, ctor: &str) -> Option<Vec<Type>> {
        let c = self.constructors(ty).iter().find(|c| c.name == ctor)?;
        c.params.iter().map(|p| self.resolve(p)).collect()
    }

    /// Enum types declaring `member`, in declaration order.
    pub fn enums_with(&self, member: &str) -> Vec<&str> {
        self.decls
            .iter()
            .filter(|d| matches!(&d.body, TypeExpr::Enum(m) if m.iter().any(|x| x == member)))
            .map(|d| d.name.as_str())
            .collect()
    }

    /// Constructor-set types declaring a constructor named `ctor`.
    pub fn ctor_sets_with(&self, ctor: &str) -> Vec<&str> {
        self.decls
            .iter()
            .filter(|d| matches!(&d.body, TypeExpr::Constructors(cs) if cs.iter().any(|c| c.name == ctor)))
            .map(|d| d.name.as_str())
            .collect()
    }
}

pub fn resolve_context(decls: &[ContextDecl]) -> Result<Context, Vec<Diagnostic>> {
    resolve_context_spanned(decls, &[])
}

/// As [`resolve_context`], attaching `spans[i]` to diagnostics about `decls[i]`.
pub fn resolve_context_spanned(decls: &[ContextDecl], spans: &[Span]) -> Result<Context, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let span = |i: usize| spans.get(i).copied().unwrap_or_default();
    let mut seen = HashSet::new();
    for (i, d) in decls.iter().enumerate() {
        if !seen.insert(d.name.as_str()) {
            diags.push(Diagnostic::error("T001", span(i), format!("duplicate type name `{}`", d.name)));
        }
    }
    let known = |b: &BaseType| match b {
        BaseType::Named(n) => decls.iter().any(|d| &d.name == n),
        _ => true,
    };
    for (i, d) in decls.iter().enumerate() {
        let mut refs: Vec<&BaseType> = Vec::new();
        match &d.body {
            TypeExpr::Enum(members) => {
                let mut s = HashSet::new();
                for m in members {
                    if !s.insert(m) {
                        diags.push(Diagnostic::error("T003", span(i), format!("duplicate member `{m}` in `{}`", d.name)));
                    }
                }
            }
            TypeExpr::Constructors(cs) => {
                let mut s = HashSet::new();
                for c in cs {
                    if !s.insert(&c.name) {
                        diags.push(Diagnostic::error("T003", span(i), format!("duplicate constructor `{}` in `{}`", c.name, d.name)));
                    }
                    refs.extend(&c.params);
                }
            }
            TypeExpr::Function { params, ret } => {
                refs.extend(params);
                refs.push(ret);
            }
            TypeExpr::Empty => {}
        }
        for r in refs {
            if !known(r) {
                diags.push(Diagnostic::error("T002", span(i), format!("undeclared type `{r}` in `{}`", d.name)));
            }
        }
    }
    if diags.is_empty() {
        Ok(Context { decls: decls.to_vec() })
    } else {
        diags.sort_by_key(|d| d.span);
        Err(diags)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SymbolKind {
    Bound,
    Io,
    EnumMember,
    Constructor,
    Literal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Symbol {
    pub term: Term,
    pub kind: SymbolKind,
    pub ty: Type,
}

#[derive(Debug, Clone)]
pub struct TypedContract {
    pub contract: Contract,
    pub context: Context,
    /// Every name, io access, application, constructor and literal occurrence
    /// in assume/guarantee order, with its resolved type.
    pub symbols: Vec<Symbol>,
    /// (direction, variable) to index into the topics clause.
    pub topic_index: BTreeMap<(Dir, String), usize>,
}

impl TypedContract {
    pub fn node(&self) -> &str {
        &self.contract.node
    }

    pub fn var_type(&self, dir: Dir, name: &str) -> Option<Type> {
        self.context.resolve(&self.contract.var(dir, name)?.ty)
    }

    pub fn topic_for(&self, dir: Dir, name: &str) -> Option<&TopicBinding> {
        let i = *self.topic_index.get(&(dir, name.to_string()))?;
        self.contract.topics().get(i)
    }
}

pub fn check_contract(c: &Contract, ctx: &Context) -> Result<TypedContract, Vec<Diagnostic>> {
    check_contract_spanned(c, ctx, None)
}

pub fn check_contract_spanned(
    c: &Contract,
    ctx: &Context,
    spans: Option<&ContractSpans>,
) -> Result<TypedContract, Vec<Diagnostic>> {
    let sp = |list: fn(&ContractSpans) -> &Vec<Span>, i: usize| -> Span {
        spans.and_then(|s| list(s).get(i).copied()).unwrap_or_else(|| spans.map(|s| s.node).unwrap_or_default())
    };
    let mut diags = Vec::new();

    for (dir, list, spans_of) in [
        (Dir::In, &c.inputs, (|s: &ContractSpans| &s.inputs) as fn(&ContractSpans) -> &Vec<Span>),
        (Dir::Out, &c.outputs, |s: &ContractSpans| &s.outputs),
    ] {
        let mut seen = HashSet::new();
        for (i, v) in list.iter().enumerate() {
            if !seen.insert(&v.name) {
                diags.push(Diagnostic::error(
                    "T005",
                    sp(spans_of, i),
                    format!("duplicate {} variable `{}`", dir.keyword(), v.name),
                ));
            }
            if ctx.resolve(&v.ty).is_none() {
                diags.push(Diagnostic::error("T004", sp(spans_of, i), format!("unknown type `{}` for `{}`", v.ty, v.name)));
            }
        }
    }

    let mut topic_index = BTreeMap::new();
    for (i, t) in c.topics().iter().enumerate() {
        let Some(b) = &t.binding else { continue };
        let span = sp(|s| &s.topics, i);
        let dir = match b.dir {
            Some(d) if c.var(d, &b.name).is_some() => Some(d),
            Some(d) => {
                diags.push(Diagnostic::error(
                    "T006",
                    span,
                    format!("topic `{}` matches unknown variable `{}.{}`", t.topic_name, d.keyword(), b.name),
                ));
                None
            }
            None => match (c.var(Dir::In, &b.name), c.var(Dir::Out, &b.name)) {
                (Some(_), Some(_)) => {
                    diags.push(Diagnostic::error(
                        "T007",
                        span,
                        format!("topic `{}` matches `{}`, which is both an input and an output", t.topic_name, b.name),
                    ));
                    None
                }
                (Some(_), None) => Some(Dir::In),
                (None, Some(_)) => Some(Dir::Out),
                (None, None) => {
                    diags.push(Diagnostic::error(
                        "T006",
                        span,
                        format!("topic `{}` matches unknown variable `{}`", t.topic_name, b.name),
                    ));
                    None
                }
            },
        };
        if let Some(d) = dir {
            topic_index.entry((d, b.name.clone())).or_insert(i);
        }
    }

    let mut checker = Checker { ctx, contract: c, scope: Vec::new(), symbols: Vec::new(), diags: Vec::new(), span: Span::default(), in_assume: false };
    for (i, a) in c.assumes.iter().enumerate() {
        checker.span = sp(|s| &s.assumes, i);
        checker.in_assume = true;
        checker.formula(a);
    }
    for (i, g) in c.guarantees.iter().enumerate() {
        checker.span = sp(|s| &s.guarantees, i);
        checker.in_assume = false;
        checker.formula(g);
    }
    diags.extend(checker.diags);
    let symbols = checker.symbols;

    if diags.is_empty() {
        Ok(TypedContract { contract: c.clone(), context: ctx.clone(), symbols, topic_index })
    } else {
        diags.sort_by_key(|d| d.span);
        Err(diags)
    }
}

/// Parses, resolves and checks every contract of a document.
pub fn check_document(doc: &Document) -> Result<Vec<TypedContract>, Vec<Diagnostic>> {
    check_document_spanned(doc, None)
}

pub fn check_document_spanned(
    doc: &Document,
    spans: Option<&crate::syntax::DocSpans>,
) -> Result<Vec<TypedContract>, Vec<Diagnostic>> {
    let decls: Vec<ContextDecl> = doc.context_decls().cloned().collect();
    let ctx = resolve_context_spanned(&decls, spans.map(|s| s.context.as_slice()).unwrap_or(&[]))?;
    let mut out = Vec::new();
    let mut diags = Vec::new();
    let mut names = HashSet::new();
    for (i, c) in doc.contracts().enumerate() {
        let cs = spans.and_then(|s| s.contracts.get(i));
        if !names.insert(c.node.as_str()) {
            diags.push(Diagnostic::error(
                "T015",
                cs.map(|s| s.node).unwrap_or_default(),
                format!("duplicate node `{}`", c.node),
            ));
        }
        match check_contract_spanned(c, &ctx, cs) {
            Ok(t) => out.push(t),
            Err(d) => diags.extend(d),
        }
    }
    if diags.is_empty() {
        Ok(out)
    } else {
        diags.sort_by_key(|d| d.span);
        Err(diags)
    }
}

struct Checker<'a> {
    ctx: &'a Context,
    contract: &'a Contract,
    scope: Vec<(String, Type)>,
    symbols: Vec<Symbol>,
    diags: Vec<Diagnostic>,
    span: Span,
    in_assume: bool,
}

impl Checker<'_> {
    fn error(&mut self, code: &'static str, msg: String) {
        self.diags.push(Diagnostic::error(code, self.span, msg));
    }

    fn formula(&mut self, f: &Formula) {
        match f {
            Formula::Bool(_) => {}
            Formula::Quant(_, vars, body) => {
                let depth = self.scope.len();
                for v in vars {
                    match self.ctx.resolve(&v.ty) {
                        Some(t) if t.is_enumerable() => self.scope.push((v.name.clone(), t)),
                        Some(t) => {
                            self.error("T008", format!("cannot quantify `{}` over `{t}`", v.name));
                            self.scope.push((v.name.clone(), t));
                        }
                        None => {
                            self.error("T004", format!("unknown type `{}` for `{}`", v.ty, v.name));
                            self.scope.push((v.name.clone(), Type::Empty(v.ty.to_string())));
                        }
                    }
                }
                self.formula(body);
                self.scope.truncate(depth);
            }
            Formula::Not(a) => self.formula(a),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                self.formula(a);
                self.formula(b);
            }
            Formula::Member { term, set, .. } => {
                let Some(ty) = self.term(term, None) else { return };
                match &ty {
                    Type::Enum(e) => {
                        let members = self.ctx.enum_members(e).to_vec();
                        for m in set {
                            if !members.contains(m) {
                                self.error("T014", format!("`{m}` is not a member of `{e}`"));
                            }
                        }
                    }
                    other => self.error("T013", format!("membership test on `{term}` of non-enumeration type `{other}`")),
                }
            }
            Formula::Compare(l, op, r) => {
                let (lt, rt) = if is_flexible(l, &self.scope) && !is_flexible(r, &self.scope) {
                    let rt = self.term(r, None);
                    (self.term(l, rt.as_ref()), rt)
                } else {
                    let lt = self.term(l, None);
                    (lt.clone(), self.term(r, lt.as_ref()))
                };
                let (Some(lt), Some(rt)) = (lt, rt) else { return };
                let ok = lt == rt
                    || (lt == Type::Real && rt == Type::Natural && is_literal(r))
                    || (rt == Type::Real && lt == Type::Natural && is_literal(l));
                if !ok {
                    self.error("T013", format!("type mismatch: `{l}` is `{lt}` but `{r}` is `{rt}`"));
                } else if op.is_ordering() && !lt.is_numeric() {
                    self.error("T013", format!("`{}` needs numeric operands, found `{lt}`", op.symbol()));
                }
            }
            Formula::Pred(t) => {
                if let Some(ty) = self.term(t, Some(&Type::Bool)) {
                    if ty != Type::Bool {
                        self.error("T013", format!("`{t}` is used as a formula but has type `{ty}`"));
                    }
                }
            }
        }
    }

    fn io_var(&mut self, r: &IoRef) -> Option<Type> {
        if let Some(n) = &r.node {
            if *n != self.contract.node {
                self.error("T010", format!("`{r}` refers to another node inside `{}`", self.contract.node));
                return None;
            }
        }
        if self.in_assume && r.dir == Dir::Out {
            self.error("T011", format!("assumption refers to output `{r}`"));
        }
        match self.contract.var(r.dir, &r.name) {
            Some(v) => self.ctx.resolve(&v.ty),
            None => {
                self.error("T009", format!("unknown variable `{r}`"));
                None
            }
        }
    }

    fn args(&mut self, what: &str, args: &[Term], params: &[Type]) {
        if args.len() != params.len() {
            self.error("T012", format!("arity mismatch: `{what}` expects {} argument(s), found {}", params.len(), args.len()));
            return;
        }
        for (a, p) in args.iter().zip(params) {
            if let Some(t) = self.term(a, Some(p)) {
                if t != *p && !(*p == Type::Real && t == Type::Natural && is_literal(a)) {
                    self.error("T013", format!("argument `{a}` of `{what}` has type `{t}`, expected `{p}`"));
                }
            }
        }
    }

    fn record(&mut self, t: &Term, kind: SymbolKind, ty: &Type) {
        self.symbols.push(Symbol { term: t.clone(), kind, ty: ty.clone() });
    }

    fn term(&mut self, t: &Term, expected: Option<&Type>) -> Option<Type> {
        let ty = match t {
            Term::Name(n) => {
                if let Some((_, ty)) = self.scope.iter().rev().find(|(v, _)| v == n) {
                    let ty = ty.clone();
                    self.record(t, SymbolKind::Bound, &ty);
                    return Some(ty);
                }
                let by_expected = match expected {
                    Some(Type::Enum(e)) if self.ctx.enum_members(e).contains(n) => Some((Type::Enum(e.clone()), SymbolKind::EnumMember)),
                    Some(Type::Ctor(c)) if self.ctx.ctor_params(c, n).is_some_and(|p| p.is_empty()) => {
                        Some((Type::Ctor(c.clone()), SymbolKind::Constructor))
                    }
                    _ => None,
                };
                let found = by_expected.or_else(|| {
                    let enums = self.ctx.enums_with(n);
                    let ctors: Vec<&str> = self
                        .ctx
                        .ctor_sets_with(n)
                        .into_iter()
                        .filter(|c| self.ctx.ctor_params(c, n).is_some_and(|p| p.is_empty()))
                        .collect();
                    match (enums.as_slice(), ctors.as_slice()) {
                        ([e], []) => Some((Type::Enum(e.to_string()), SymbolKind::EnumMember)),
                        ([], [c]) => Some((Type::Ctor(c.to_string()), SymbolKind::Constructor)),
                        _ => None,
                    }
                });
                match found {
                    Some((ty, kind)) => {
                        self.record(t, kind, &ty);
                        return Some(ty);
                    }
                    None => {
                        self.error("T009", format!("unbound symbol `{n}`"));
                        return None;
                    }
                }
            }
            Term::Io(r) => {
                let ty = self.io_var(r)?;
                self.record(t, SymbolKind::Io, &ty);
                return Some(ty);
            }
            Term::Apply(r, args) => {
                let ty = self.io_var(r)?;
                let Type::Func(fname) = &ty else {
                    self.error("T013", format!("`{r}` of type `{ty}` is applied but is not a function"));
                    return None;
                };
                let (params, ret) = self.ctx.signature(fname)?;
                self.args(&r.to_string(), args, &params);
                self.record(t, SymbolKind::Io, &ret);
                return Some(ret);
            }
            Term::Ctor(name, args) => {
                let set = match expected {
                    Some(Type::Ctor(c)) if self.ctx.ctor_params(c, name).is_some() => Some(c.clone()),
                    _ => match self.ctx.ctor_sets_with(name).as_slice() {
                        [c] => Some(c.to_string()),
                        [] => {
                            self.error("T009", format!("unknown constructor `{name}`"));
                            None
                        }
                        _ => {
                            self.error("T009", format!("ambiguous constructor `{name}`"));
                            None
                        }
                    },
                }?;
                let params = self.ctx.ctor_params(&set, name)?;
                self.args(name, args, &params);
                Type::Ctor(set)
            }
            Term::Num(n) => {
                if n.is_integer() && *n.numer() >= 0 && expected != Some(&Type::Real) {
                    Type::Natural
                } else {
                    Type::Real
                }
            }
            Term::Bool(_) => Type::Bool,
            Term::Add(inner, _) => {
                let it = self.term(inner, Some(&Type::Natural))?;
                if it != Type::Natural {
                    self.error("T013", format!("`{t}` adds to `{inner}` of type `{it}`, expected NATURAL"));
                    return None;
                }
                Type::Natural
            }
        };
        self.record(t, SymbolKind::Literal, &ty);
        Some(ty)
    }
}

fn is_literal(t: &Term) -> bool {
    matches!(t, Term::Num(_))
}

/// Terms whose type is better taken from the other side of a comparison.
fn is_flexible(t: &Term, scope: &[(String, Type)]) -> bool {
    match t {
        Term::Num(_) => true,
        Term::Name(n) => !scope.iter().any(|(v, _)| v == n),
        Term::Ctor(..) => true,
        _ => false,
    }
}
