//! Abstract syntax shared by every stage: context declarations, contracts,
//! first-order formulas over node inputs and outputs, and the structural
//! helpers (qualification, substitution, alpha-equivalence) the later stages
//! build on.

use std::collections::HashMap;
use std::fmt;

use num_rational::Rational64;

/// Numeric literals are exact rationals so grids and midpoints stay exact.
pub type Number = Rational64;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BaseType {
    Real,
    Natural,
    Bool,
    Named(String),
}

impl BaseType {
    pub fn from_name(name: &str) -> BaseType {
        match name {
            "REAL" => BaseType::Real,
            "NATURAL" => BaseType::Natural,
            "BOOL" => BaseType::Bool,
            other => BaseType::Named(other.to_string()),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            BaseType::Real => "REAL",
            BaseType::Natural => "NATURAL",
            BaseType::Bool => "BOOL",
            BaseType::Named(n) => n,
        }
    }
}

impl fmt::Display for BaseType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Constructor {
    pub name: String,
    pub params: Vec<BaseType>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TypeExpr {
    /// `{red, orange, green}`
    Enum(Vec<String>),
    /// `REAL x REAL --> BOOL`
    Function { params: Vec<BaseType>, ret: BaseType },
    /// `{ move(REAL, REAL), inspect(NATURAL) }`
    Constructors(Vec<Constructor>),
    /// `{}`
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ContextDecl {
    pub name: String,
    pub body: TypeExpr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dir {
    In,
    Out,
}

impl Dir {
    pub fn keyword(self) -> &'static str {
        match self {
            Dir::In => "in",
            Dir::Out => "out",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IoVar {
    pub dir: Dir,
    pub name: String,
    pub ty: BaseType,
}

/// Target of a `matches(...)` clause. The direction may be omitted, in which
/// case the name is resolved against the contract's variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TopicRef {
    pub dir: Option<Dir>,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TopicBinding {
    pub message_type: String,
    pub topic_name: String,
    pub binding: Option<TopicRef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Contract {
    pub node: String,
    pub inputs: Vec<IoVar>,
    pub outputs: Vec<IoVar>,
    /// `None` when the node clause has no `topics(...)` at all.
    pub topics: Option<Vec<TopicBinding>>,
    pub assumes: Vec<Formula>,
    pub guarantees: Vec<Formula>,
}

impl Contract {
    pub fn topics(&self) -> &[TopicBinding] {
        self.topics.as_deref().unwrap_or(&[])
    }

    /// Conjunction of the assume clauses; TRUE when there are none.
    pub fn assumption(&self) -> Formula {
        Formula::conj(self.assumes.iter().cloned())
    }

    pub fn guarantee(&self) -> Formula {
        Formula::conj(self.guarantees.iter().cloned())
    }

    pub fn var(&self, dir: Dir, name: &str) -> Option<&IoVar> {
        let list = match dir {
            Dir::In => &self.inputs,
            Dir::Out => &self.outputs,
        };
        list.iter().find(|v| v.name == name)
    }

    pub fn vars(&self) -> impl Iterator<Item = &IoVar> {
        self.inputs.iter().chain(self.outputs.iter())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Clause {
    Context(Vec<ContextDecl>),
    Node(Contract),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Document {
    pub clauses: Vec<Clause>,
}

impl Document {
    pub fn context_decls(&self) -> impl Iterator<Item = &ContextDecl> {
        self.clauses.iter().flat_map(|c| match c {
            Clause::Context(d) => d.as_slice(),
            Clause::Node(_) => &[],
        })
    }

    pub fn contracts(&self) -> impl Iterator<Item = &Contract> {
        self.clauses.iter().filter_map(|c| match c {
            Clause::Node(n) => Some(n),
            Clause::Context(_) => None,
        })
    }

    pub fn contract(&self, node: &str) -> Option<&Contract> {
        self.contracts().find(|c| c.node == node)
    }

    pub fn contract_mut(&mut self, node: &str) -> Option<&mut Contract> {
        self.clauses.iter_mut().find_map(|c| match c {
            Clause::Node(n) if n.node == node => Some(n),
            _ => None,
        })
    }
}

/// `in.x`, `out.x`, or node-qualified `Navigation.in.x`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IoRef {
    pub node: Option<String>,
    pub dir: Dir,
    pub name: String,
}

impl IoRef {
    pub fn new(dir: Dir, name: impl Into<String>) -> IoRef {
        IoRef { node: None, dir, name: name.into() }
    }

    pub fn qualified(node: impl Into<String>, dir: Dir, name: impl Into<String>) -> IoRef {
        IoRef { node: Some(node.into()), dir, name: name.into() }
    }
}

impl fmt::Display for IoRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(n) = &self.node {
            write!(f, "{n}.")?;
        }
        write!(f, "{}.{}", self.dir.keyword(), self.name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    /// Bound variable, enum member, or nullary constructor; resolved by the checker.
    Name(String),
    Io(IoRef),
    Apply(IoRef, Vec<Term>),
    Ctor(String, Vec<Term>),
    Num(Number),
    Bool(bool),
    Add(Box<Term>, u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    pub fn negate(self) -> CmpOp {
        match self {
            CmpOp::Eq => CmpOp::Ne,
            CmpOp::Ne => CmpOp::Eq,
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Le => CmpOp::Gt,
            CmpOp::Gt => CmpOp::Le,
            CmpOp::Ge => CmpOp::Lt,
        }
    }

    /// The operator with its operands swapped: `a < b` iff `b > a`.
    pub fn flip(self) -> CmpOp {
        match self {
            CmpOp::Lt => CmpOp::Gt,
            CmpOp::Le => CmpOp::Ge,
            CmpOp::Gt => CmpOp::Lt,
            CmpOp::Ge => CmpOp::Le,
            other => other,
        }
    }

    pub fn is_ordering(self) -> bool {
        !matches!(self, CmpOp::Eq | CmpOp::Ne)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TypedVar {
    pub name: String,
    pub ty: BaseType,
}

impl TypedVar {
    pub fn new(name: impl Into<String>, ty: BaseType) -> TypedVar {
        TypedVar { name: name.into(), ty }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantifier {
    Forall,
    Exists,
    ExistsUnique,
}

impl Quantifier {
    pub fn keyword(self) -> &'static str {
        match self {
            Quantifier::Forall => "forall",
            Quantifier::Exists => "exists",
            Quantifier::ExistsUnique => "exists!",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Bool(bool),
    Quant(Quantifier, Vec<TypedVar>, Box<Formula>),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Member { term: Term, set: Vec<String>, negated: bool },
    Compare(Term, CmpOp, Term),
    /// A boolean-valued application used directly as an atom.
    Pred(Term),
}

impl Formula {
    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Formula) -> Formula {
        Formula::Not(Box::new(a))
    }

    /// Left-nested conjunction, matching how the parser associates `and`.
    pub fn conj(items: impl IntoIterator<Item = Formula>) -> Formula {
        let mut it = items.into_iter();
        match it.next() {
            None => Formula::Bool(true),
            Some(first) => it.fold(first, Formula::and),
        }
    }

    pub fn is_true(&self) -> bool {
        matches!(self, Formula::Bool(true))
    }

    /// Rewrites every io access, leaving bound variables untouched.
    pub fn map_io(&self, f: &mut dyn FnMut(&IoRef) -> IoRef) -> Formula {
        match self {
            Formula::Bool(b) => Formula::Bool(*b),
            Formula::Quant(q, vs, body) => Formula::Quant(*q, vs.clone(), Box::new(body.map_io(f))),
            Formula::Not(a) => Formula::not(a.map_io(f)),
            Formula::And(a, b) => Formula::and(a.map_io(f), b.map_io(f)),
            Formula::Or(a, b) => Formula::or(a.map_io(f), b.map_io(f)),
            Formula::Implies(a, b) => Formula::implies(a.map_io(f), b.map_io(f)),
            Formula::Iff(a, b) => Formula::Iff(Box::new(a.map_io(f)), Box::new(b.map_io(f))),
            Formula::Member { term, set, negated } => Formula::Member {
                term: term.map_io(f),
                set: set.clone(),
                negated: *negated,
            },
            Formula::Compare(l, op, r) => Formula::Compare(l.map_io(f), *op, r.map_io(f)),
            Formula::Pred(t) => Formula::Pred(t.map_io(f)),
        }
    }

    /// Prefixes every unqualified access with `node`.
    pub fn qualify(&self, node: &str) -> Formula {
        self.map_io(&mut |r| IoRef { node: Some(r.node.clone().unwrap_or_else(|| node.to_string())), ..r.clone() })
    }

    pub fn substitute(&self, map: &HashMap<IoRef, IoRef>) -> Formula {
        self.map_io(&mut |r| map.get(r).cloned().unwrap_or_else(|| r.clone()))
    }

    pub fn for_each_term(&self, f: &mut dyn FnMut(&Term)) {
        match self {
            Formula::Bool(_) => {}
            Formula::Quant(_, _, body) | Formula::Not(body) => body.for_each_term(f),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.for_each_term(f);
                b.for_each_term(f);
            }
            Formula::Member { term, .. } | Formula::Pred(term) => term.walk(f),
            Formula::Compare(l, _, r) => {
                l.walk(f);
                r.walk(f);
            }
        }
    }

    /// io accesses in order of first appearance.
    pub fn io_refs(&self) -> Vec<IoRef> {
        let mut out: Vec<IoRef> = Vec::new();
        self.for_each_term(&mut |t| {
            let r = match t {
                Term::Io(r) | Term::Apply(r, _) => r,
                _ => return,
            };
            if !out.contains(r) {
                out.push(r.clone());
            }
        });
        out
    }

    /// Numeric literals, including the `+ k` offsets of sums.
    pub fn numbers(&self) -> Vec<Number> {
        let mut out = Vec::new();
        self.for_each_term(&mut |t| match t {
            Term::Num(n) => out.push(*n),
            Term::Add(_, k) => out.push(Number::from_integer(*k as i64)),
            _ => {}
        });
        out
    }

    /// Names that are not bound by an enclosing quantifier.
    pub fn free_names(&self) -> Vec<String> {
        fn go(f: &Formula, bound: &mut Vec<String>, out: &mut Vec<String>) {
            let term = |t: &Term, bound: &Vec<String>, out: &mut Vec<String>| {
                t.walk(&mut |t| {
                    if let Term::Name(n) = t {
                        if !bound.contains(n) && !out.contains(n) {
                            out.push(n.clone());
                        }
                    }
                })
            };
            match f {
                Formula::Bool(_) => {}
                Formula::Quant(_, vs, body) => {
                    let depth = bound.len();
                    bound.extend(vs.iter().map(|v| v.name.clone()));
                    go(body, bound, out);
                    bound.truncate(depth);
                }
                Formula::Not(a) => go(a, bound, out),
                Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                    go(a, bound, out);
                    go(b, bound, out);
                }
                Formula::Member { term: t, .. } | Formula::Pred(t) => term(t, bound, out),
                Formula::Compare(l, _, r) => {
                    term(l, bound, out);
                    term(r, bound, out);
                }
            }
        }
        let mut out = Vec::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }
}

impl Term {
    pub fn walk(&self, f: &mut dyn FnMut(&Term)) {
        f(self);
        match self {
            Term::Apply(_, args) | Term::Ctor(_, args) => args.iter().for_each(|a| a.walk(f)),
            Term::Add(t, _) => t.walk(f),
            _ => {}
        }
    }

    pub fn map_io(&self, f: &mut dyn FnMut(&IoRef) -> IoRef) -> Term {
        match self {
            Term::Io(r) => Term::Io(f(r)),
            Term::Apply(r, args) => Term::Apply(f(r), args.iter().map(|a| a.map_io(f)).collect()),
            Term::Ctor(n, args) => Term::Ctor(n.clone(), args.iter().map(|a| a.map_io(f)).collect()),
            Term::Add(t, k) => Term::Add(Box::new(t.map_io(f)), *k),
            other => other.clone(),
        }
    }
}

/// Equality up to consistent renaming of quantifier-bound variables.
pub fn alpha_equal(a: &Formula, b: &Formula) -> bool {
    let mut left = Vec::new();
    let mut right = Vec::new();
    alpha_formula(a, b, &mut left, &mut right)
}

fn alpha_formula(a: &Formula, b: &Formula, l: &mut Vec<String>, r: &mut Vec<String>) -> bool {
    use Formula::*;
    match (a, b) {
        (Bool(x), Bool(y)) => x == y,
        (Quant(qa, va, ba), Quant(qb, vb, bb)) => {
            if qa != qb || va.len() != vb.len() || va.iter().zip(vb).any(|(x, y)| x.ty != y.ty) {
                return false;
            }
            let (dl, dr) = (l.len(), r.len());
            l.extend(va.iter().map(|v| v.name.clone()));
            r.extend(vb.iter().map(|v| v.name.clone()));
            let eq = alpha_formula(ba, bb, l, r);
            l.truncate(dl);
            r.truncate(dr);
            eq
        }
        (Not(x), Not(y)) => alpha_formula(x, y, l, r),
        (And(a1, a2), And(b1, b2))
        | (Or(a1, a2), Or(b1, b2))
        | (Implies(a1, a2), Implies(b1, b2))
        | (Iff(a1, a2), Iff(b1, b2)) => alpha_formula(a1, b1, l, r) && alpha_formula(a2, b2, l, r),
        (Member { term: ta, set: sa, negated: na }, Member { term: tb, set: sb, negated: nb }) => {
            na == nb && sa == sb && alpha_term(ta, tb, l, r)
        }
        (Compare(la, oa, ra), Compare(lb, ob, rb)) => oa == ob && alpha_term(la, lb, l, r) && alpha_term(ra, rb, l, r),
        (Pred(x), Pred(y)) => alpha_term(x, y, l, r),
        _ => false,
    }
}

fn alpha_term(a: &Term, b: &Term, l: &[String], r: &[String]) -> bool {
    match (a, b) {
        (Term::Name(x), Term::Name(y)) => {
            let ix = l.iter().rposition(|n| n == x);
            let iy = r.iter().rposition(|n| n == y);
            match (ix, iy) {
                (Some(i), Some(j)) => i == j,
                (None, None) => x == y,
                _ => false,
            }
        }
        (Term::Io(x), Term::Io(y)) => x == y,
        (Term::Apply(x, xs), Term::Apply(y, ys)) => {
            x == y && xs.len() == ys.len() && xs.iter().zip(ys).all(|(p, q)| alpha_term(p, q, l, r))
        }
        (Term::Ctor(x, xs), Term::Ctor(y, ys)) => {
            x == y && xs.len() == ys.len() && xs.iter().zip(ys).all(|(p, q)| alpha_term(p, q, l, r))
        }
        (Term::Num(x), Term::Num(y)) => x == y,
        (Term::Bool(x), Term::Bool(y)) => x == y,
        (Term::Add(x, i), Term::Add(y, j)) => i == j && alpha_term(x, y, l, r),
        _ => false,
    }
}

/// Prints a literal the way the parser reads it back: integers plainly,
/// terminating fractions as decimals.
pub fn format_number(n: &Number) -> String {
    if n.is_integer() {
        return n.to_integer().to_string();
    }
    let neg = *n.numer() < 0;
    let mut num = n.numer().unsigned_abs() as u128;
    let den = *n.denom() as u128;
    let int = num / den;
    num %= den;
    let mut digits = String::new();
    let mut steps = 0;
    while num != 0 && steps < 40 {
        num *= 10;
        digits.push(char::from(b'0' + (num / den) as u8));
        num %= den;
        steps += 1;
    }
    if num != 0 {
        return format!("{}{}/{}", if neg { "-" } else { "" }, n.numer().unsigned_abs(), den);
    }
    format!("{}{}.{}", if neg { "-" } else { "" }, int, digits)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eq1(var: &str) -> Formula {
        Formula::Quant(
            Quantifier::Forall,
            vec![TypedVar::new(var, BaseType::Natural)],
            Box::new(Formula::Compare(Term::Name(var.into()), CmpOp::Eq, Term::Num(Number::from_integer(1)))),
        )
    }

    #[test]
    fn renaming_bound_variables_is_invisible() {
        assert!(alpha_equal(&eq1("x"), &eq1("y")));
    }

    #[test]
    fn distinct_literals_differ() {
        let a = Formula::Compare(Term::Name("x".into()), CmpOp::Eq, Term::Num(1.into()));
        let b = Formula::Compare(Term::Name("x".into()), CmpOp::Eq, Term::Num(2.into()));
        assert!(!alpha_equal(&a, &b));
    }

    #[test]
    fn free_and_bound_names_do_not_mix() {
        let bound = eq1("x");
        let free = Formula::Quant(
            Quantifier::Forall,
            vec![TypedVar::new("y", BaseType::Natural)],
            Box::new(Formula::Compare(Term::Name("x".into()), CmpOp::Eq, Term::Num(1.into()))),
        );
        assert!(!alpha_equal(&bound, &free));
    }

    #[test]
    fn conj_of_nothing_is_true() {
        assert_eq!(Formula::conj(vec![]), Formula::Bool(true));
    }

    #[test]
    fn numbers_print_back_exactly() {
        assert_eq!(format_number(&Number::new(1, 2)), "0.5");
        assert_eq!(format_number(&Number::new(-7, 4)), "-1.75");
        assert_eq!(format_number(&Number::from_integer(120)), "120");
    }
}
