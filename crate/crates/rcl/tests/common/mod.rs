#![allow(dead_code)]

use proptest::collection::vec;
use proptest::prelude::*;

use rcl::ast::*;
use rcl::monitor::{Event, Value};
use rcl::rml::{parse_rml, Arg, Lit, RmlSpec, RmlTerm};

pub fn corpus(name: &str) -> String {
    std::fs::read_to_string(format!("{}/../../corpus/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

// ---------- RCL documents ----------

const IDENTS: &[&str] = &["a", "b", "pos", "cmd", "level", "wayP", "x1", "y_2", "status", "r"];
const TYPES: &[&str] = &["Lvl", "CmdSet", "PosT", "Empty", "WayT"];

fn ident() -> impl Strategy<Value = String> {
    prop::sample::select(IDENTS).prop_map(str::to_string)
}

fn base_type() -> impl Strategy<Value = BaseType> {
    prop_oneof![
        Just(BaseType::Real),
        Just(BaseType::Natural),
        Just(BaseType::Bool),
        prop::sample::select(TYPES).prop_map(|t| BaseType::Named(t.into())),
    ]
}

fn scalar_type() -> impl Strategy<Value = BaseType> {
    prop_oneof![Just(BaseType::Real), Just(BaseType::Natural), Just(BaseType::Bool)]
}

fn number() -> impl Strategy<Value = Number> {
    (0i64..2000, prop::sample::select(vec![1i64, 2, 4, 10, 100])).prop_map(|(n, d)| Number::new(n, d))
}

fn io_ref() -> impl Strategy<Value = IoRef> {
    (prop::option::of(prop::sample::select(vec!["Agent", "Nav"])), any::<bool>(), ident()).prop_map(|(node, out, name)| IoRef {
        node: node.map(str::to_string),
        dir: if out { Dir::Out } else { Dir::In },
        name,
    })
}

fn simple_term() -> impl Strategy<Value = Term> {
    prop_oneof![
        ident().prop_map(Term::Name),
        io_ref().prop_map(Term::Io),
        number().prop_map(Term::Num),
        any::<bool>().prop_map(Term::Bool),
    ]
}

fn term() -> impl Strategy<Value = Term> {
    prop_oneof![
        4 => simple_term(),
        1 => (io_ref(), vec(simple_term(), 1..3)).prop_map(|(r, a)| Term::Apply(r, a)),
        1 => (prop::sample::select(vec!["move", "inspect"]), vec(simple_term(), 1..3)).prop_map(|(c, a)| Term::Ctor(c.into(), a)),
        1 => (prop_oneof![ident().prop_map(Term::Name), io_ref().prop_map(Term::Io)], 1u64..5).prop_map(|(t, k)| Term::Add(Box::new(t), k)),
    ]
}

fn cmp_op() -> impl Strategy<Value = CmpOp> {
    prop::sample::select(vec![CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge])
}

fn atom() -> impl Strategy<Value = Formula> {
    prop_oneof![
        any::<bool>().prop_map(Formula::Bool),
        (term(), cmp_op(), term()).prop_map(|(l, o, r)| Formula::Compare(l, o, r)),
        (prop_oneof![io_ref().prop_map(Term::Io), ident().prop_map(Term::Name)], vec(ident(), 1..4), any::<bool>())
            .prop_map(|(term, set, negated)| Formula::Member { term, set, negated }),
        (io_ref(), vec(simple_term(), 1..3)).prop_map(|(r, a)| Formula::Pred(Term::Apply(r, a))),
    ]
}

pub fn formula() -> impl Strategy<Value = Formula> {
    atom().prop_recursive(4, 24, 2, |inner| {
        let q = prop::sample::select(vec![Quantifier::Forall, Quantifier::Exists, Quantifier::ExistsUnique]);
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::implies(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::Iff(Box::new(a), Box::new(b))),
            (q, vec((ident(), scalar_type()), 1..3), inner).prop_map(|(q, vs, body)| {
                Formula::Quant(q, vs.into_iter().map(|(n, t)| TypedVar::new(n, t)).collect(), Box::new(body))
            }),
        ]
    })
}

fn type_expr() -> impl Strategy<Value = TypeExpr> {
    prop_oneof![
        vec(ident(), 1..4).prop_map(TypeExpr::Enum),
        (vec(base_type(), 1..3), base_type()).prop_map(|(params, ret)| TypeExpr::Function { params, ret }),
        vec((prop::sample::select(vec!["move", "inspect", "stop"]), vec(scalar_type(), 0..3)), 1..3)
            .prop_map(|cs| TypeExpr::Constructors(cs.into_iter().map(|(n, params)| Constructor { name: n.into(), params }).collect())),
        Just(TypeExpr::Empty),
    ]
}

fn io_vars(dir: Dir) -> impl Strategy<Value = Vec<IoVar>> {
    vec((ident(), base_type()), 1..4).prop_map(move |vs| vs.into_iter().map(|(name, ty)| IoVar { dir, name, ty }).collect())
}

fn topic() -> impl Strategy<Value = TopicBinding> {
    let msg = prop::sample::select(vec!["int16", "string", "gazebo_radiation_plugins/At", "std_msgs/Bool"]);
    let dir = prop::option::of(any::<bool>().prop_map(|o| if o { Dir::Out } else { Dir::In }));
    (msg, ident(), prop::option::of((dir, ident()))).prop_map(|(m, t, b)| TopicBinding {
        message_type: m.into(),
        topic_name: t,
        binding: b.map(|(dir, name)| TopicRef { dir, name }),
    })
}

fn contract() -> impl Strategy<Value = Contract> {
    (
        prop::sample::select(vec!["Agent", "Nav", "Sensor", "ArmClient"]),
        io_vars(Dir::In),
        io_vars(Dir::Out),
        prop::option::of(vec(topic(), 0..3)),
        vec(formula(), 0..2),
        vec(formula(), 1..3),
    )
        .prop_map(|(node, inputs, outputs, topics, assumes, guarantees)| Contract { node: node.into(), inputs, outputs, topics, assumes, guarantees })
}

pub fn document() -> impl Strategy<Value = Document> {
    let ctx = vec((prop::sample::select(TYPES), type_expr()), 0..4)
        .prop_map(|ds| Clause::Context(ds.into_iter().map(|(n, body)| ContextDecl { name: n.into(), body }).collect()));
    let node = contract().prop_map(Clause::Node);
    vec(prop_oneof![1 => ctx, 2 => node], 1..4).prop_map(|clauses| Document { clauses })
}

// ---------- RML terms over a small alphabet ----------

/// Three event types and the four-symbol event alphabet the random terms
/// and traces range over. `b` carries a guard, `c` has no parameters and
/// overlaps `a`.
pub const ALPHABET_SPEC: &str = "a(x) matches { topic: 'a', v: x };\n\
b(x) matches { topic: 'b', v: x } with x < 2;\n\
c matches { topic: 'a' };\n";

pub fn alphabet_spec() -> RmlSpec {
    parse_rml(ALPHABET_SPEC).unwrap()
}

pub fn ev(topic: &str, v: Option<i64>) -> Event {
    let mut fields = vec![("topic".to_string(), Value::Str(topic.into()))];
    if let Some(v) = v {
        fields.push(("v".to_string(), Value::num(v as f64)));
    }
    Event::new(fields)
}

pub fn alphabet() -> Vec<Event> {
    vec![ev("a", Some(1)), ev("a", Some(2)), ev("b", Some(1)), ev("b", Some(2))]
}

pub fn noise(i: usize) -> Event {
    Event::new([("topic".to_string(), Value::Str("noise".into())), ("seq".to_string(), Value::num(i as f64))])
}

pub fn trace(max_len: usize) -> impl Strategy<Value = Vec<Event>> {
    vec(prop::sample::select(alphabet()), 0..=max_len)
}

fn rml_arg() -> impl Strategy<Value = Arg> {
    prop_oneof![
        3 => prop::sample::select(vec!["x", "y"]).prop_map(|v| Arg::Var(v.into())),
        1 => prop::sample::select(vec!["x", "y"]).prop_map(|v| Arg::Add(v.into(), 1)),
        2 => (1i64..3).prop_map(|n| Arg::Lit(Lit::Num(Number::from_integer(n)))),
        1 => Just(Arg::Wild),
    ]
}

fn rml_leaf() -> impl Strategy<Value = RmlTerm> {
    let et = (prop::sample::select(vec!["a", "b", "c"]), rml_arg(), any::<bool>()).prop_map(|(n, arg, negated)| {
        let args = if n == "c" { vec![] } else { vec![arg] };
        RmlTerm::Et { name: n.into(), args, negated }
    });
    prop_oneof![6 => et, 1 => Just(RmlTerm::Any), 1 => Just(RmlTerm::Nothing), 1 => Just(RmlTerm::Empty)]
}

/// Terms of depth at most 4 whose variables are `x` and `y`, closed by an
/// outer `let`.
pub fn rml_term() -> impl Strategy<Value = RmlTerm> {
    let body = rml_leaf().prop_recursive(3, 16, 3, |inner| {
        prop_oneof![
            vec(inner.clone(), 2..4).prop_map(RmlTerm::And),
            vec(inner.clone(), 2..4).prop_map(RmlTerm::Or),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| RmlTerm::concat(a, b)),
            inner.clone().prop_map(RmlTerm::star),
            (prop::sample::select(vec![vec!["x"], vec!["y"], vec!["x", "y"]]), inner)
                .prop_map(|(vs, b)| RmlTerm::let_(vs.into_iter().map(String::from).collect(), b)),
        ]
    });
    body.prop_map(|t| RmlTerm::let_(vec!["x".into(), "y".into()], t))
}

/// Single-event boolean terms over nullary event types `p`, `q`, `r`.
pub const MATCH_SPEC: &str = "p matches { p: 1 };\nq matches { q: 1 };\nr matches { r: 1 };\n";

/// The eight events realizing every match vector of `p`, `q`, `r`.
pub fn match_vectors() -> Vec<Event> {
    (0..8)
        .map(|bits: i64| {
            Event::new(["p", "q", "r"].iter().enumerate().map(|(i, k)| (k.to_string(), Value::num(((bits >> i) & 1) as f64))))
        })
        .collect()
}

pub fn boolean_term() -> impl Strategy<Value = RmlTerm> {
    let leaf = prop_oneof![
        6 => (prop::sample::select(vec!["p", "q", "r"]), any::<bool>()).prop_map(|(n, negated)| RmlTerm::Et { name: n.into(), args: vec![], negated }),
        1 => Just(RmlTerm::Any),
        1 => Just(RmlTerm::Nothing),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            vec(inner.clone(), 2..4).prop_map(RmlTerm::And),
            vec(inner.clone(), 2..4).prop_map(RmlTerm::Or),
            inner.prop_map(|t| t.negate().unwrap_or(t)),
        ]
    })
}
