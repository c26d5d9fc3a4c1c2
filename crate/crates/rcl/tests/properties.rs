mod common;

use std::collections::BTreeMap;

use proptest::collection::vec;
use proptest::prelude::*;

use common::{alphabet, alphabet_spec, noise, rml_term, trace};
use rcl::ast::{CmpOp, Dir, Formula, IoRef, Number, Term, TypedVar};
use rcl::calculus::Obligation;
use rcl::discharge::{discharge, DomainBounds, Value as DValue, Verdict as DVerdict};
use rcl::monitor::{matches, naive_membership, run, ArgValue, Event, Trace, Value, Verdict};
use rcl::rml::{alpha_equal, parse_rml, simplify_term, Arg, RmlSpec, RmlTerm};
use rcl::typeck::{resolve_context, Type};

fn with_term(t: &RmlTerm) -> RmlSpec {
    let mut spec = alphabet_spec();
    spec.terms = vec![("t1".into(), t.clone())];
    spec
}

fn verdict(spec: &RmlSpec, events: &[Event]) -> Verdict {
    run(spec, &Trace::from_events(events.to_vec())).unwrap().verdict
}

fn rename(t: &RmlTerm, f: &dyn Fn(&str) -> String) -> RmlTerm {
    let arg = |a: &Arg| match a {
        Arg::Var(x) => Arg::Var(f(x)),
        Arg::Add(x, k) => Arg::Add(f(x), *k),
        other => other.clone(),
    };
    match t {
        RmlTerm::Et { name, args, negated } => RmlTerm::Et { name: name.clone(), args: args.iter().map(arg).collect(), negated: *negated },
        RmlTerm::And(ts) => RmlTerm::And(ts.iter().map(|t| rename(t, f)).collect()),
        RmlTerm::Or(ts) => RmlTerm::Or(ts.iter().map(|t| rename(t, f)).collect()),
        RmlTerm::Concat(a, b) => RmlTerm::concat(rename(a, f), rename(b, f)),
        RmlTerm::Star(b) => RmlTerm::star(rename(b, f)),
        RmlTerm::Let(vs, b) => RmlTerm::let_(vs.iter().map(|v| f(v)).collect(), rename(b, f)),
        other => other.clone(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn monitor_agrees_with_naive_oracle(t in rml_term(), w in trace(6)) {
        let spec = with_term(&t);
        let v = verdict(&spec, &w);
        let expected = naive_membership(&t, &spec, &w, 2).unwrap();
        prop_assert_eq!(v == Verdict::Accepted, expected, "{} on {:?}: {:?}", t, w, v);
        // A violation must leave no accepted continuation.
        if let Verdict::Violated(i) = v {
            let prefix = &w[..(i + 1).min(w.len())];
            prop_assert!(!naive_membership(&t, &spec, prefix, 2).unwrap());
            for e in alphabet() {
                let mut longer = prefix.to_vec();
                longer.push(e);
                prop_assert!(!naive_membership(&t, &spec, &longer, 2).unwrap());
            }
        }
    }

    #[test]
    fn undeclared_topics_are_skipped(t in rml_term(), w in trace(5), gaps in vec(0usize..4, 6)) {
        let spec = with_term(&t);
        let mut noisy = Vec::new();
        let mut back = Vec::new();
        for (i, e) in w.iter().enumerate() {
            for k in 0..gaps[i] {
                noisy.push(noise(k));
            }
            back.push(noisy.len());
            noisy.push(e.clone());
        }
        for k in 0..gaps[w.len()] {
            noisy.push(noise(k));
        }
        let plain = verdict(&spec, &w);
        let with_noise = verdict(&spec, &noisy);
        match plain {
            Verdict::Violated(i) if i < w.len() => prop_assert_eq!(with_noise, Verdict::Violated(back[i])),
            Verdict::Violated(_) => prop_assert_eq!(with_noise, Verdict::Violated(noisy.len())),
            v => prop_assert_eq!(with_noise, v),
        }
    }

    #[test]
    fn violation_is_permanent(t in rml_term(), w in trace(4), more in trace(3)) {
        let spec = with_term(&t);
        if let v @ Verdict::Violated(_) = verdict(&spec, &w) {
            let mut longer = w.clone();
            longer.extend(more);
            prop_assert_eq!(verdict(&spec, &longer), v);
        }
    }

    #[test]
    fn simplification_keeps_the_language(t in rml_term(), w in trace(4)) {
        let spec = with_term(&t);
        let s = simplify_term(&t);
        prop_assert_eq!(naive_membership(&s, &spec, &w, 1).unwrap(), naive_membership(&t, &spec, &w, 1).unwrap(), "{} vs {}", t, s);
    }

    #[test]
    fn simplification_keeps_every_match_vector(t in common::boolean_term()) {
        let spec = parse_rml(common::MATCH_SPEC).unwrap();
        let s = simplify_term(&t);
        for e in common::match_vectors() {
            let one = [e];
            prop_assert_eq!(naive_membership(&s, &spec, &one, 1).unwrap(), naive_membership(&t, &spec, &one, 1).unwrap(), "{} vs {}", t, s);
        }
    }

    #[test]
    fn renaming_let_variables_is_alpha_equal(t in rml_term()) {
        let r = rename(&t, &|v: &str| format!("{v}_r"));
        prop_assert!(alpha_equal(&t, &r));
        prop_assert!(alpha_equal(&r, &t));
    }

    #[test]
    fn matching_is_monotone_in_the_event(
        et in 0usize..3,
        arg in prop_oneof![Just(ArgValue::Wild), (1i64..3).prop_map(|n| ArgValue::Val(Value::num(n as f64))), (0i64..2).prop_map(|n| ArgValue::Offset(Value::num(n as f64), 1))],
        e in prop::sample::select(alphabet()),
        extra in vec((prop::sample::select(vec!["w", "id", "topic2"]), 0i64..3), 0..3),
    ) {
        let spec = alphabet_spec();
        let et = &spec.event_types[et];
        let args: Vec<ArgValue> = et.params.iter().map(|_| arg.clone()).collect();
        let mut bigger = e.clone();
        for (k, v) in extra {
            bigger.fields.insert(k.to_string(), Value::num(v as f64));
        }
        if matches(et, &args, &e) {
            prop_assert!(matches(et, &args, &bigger));
        }
    }
}

// ---------- bounded discharge against a truth table ----------

fn p() -> IoRef {
    IoRef::new(Dir::In, "p")
}
fn q() -> IoRef {
    IoRef::new(Dir::In, "q")
}
fn s() -> IoRef {
    IoRef::new(Dir::Out, "s")
}

fn qf_formula() -> impl Strategy<Value = Formula> {
    let atom = prop_oneof![
        any::<bool>().prop_map(Formula::Bool),
        (prop::sample::select(vec![p(), q()]), any::<bool>()).prop_map(|(r, b)| Formula::Compare(Term::Io(r), CmpOp::Eq, Term::Bool(b))),
        (prop::sample::select(vec![CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge]), 0i64..5)
            .prop_map(|(op, c)| Formula::Compare(Term::Io(s()), op, Term::Num(Number::new(c, 2)))),
    ];
    atom.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::implies(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Formula::Iff(Box::new(a), Box::new(b))),
        ]
    })
}

fn truth(f: &Formula, pv: bool, qv: bool, sv: Number) -> bool {
    match f {
        Formula::Bool(b) => *b,
        Formula::Not(a) => !truth(a, pv, qv, sv),
        Formula::And(a, b) => truth(a, pv, qv, sv) && truth(b, pv, qv, sv),
        Formula::Or(a, b) => truth(a, pv, qv, sv) || truth(b, pv, qv, sv),
        Formula::Implies(a, b) => !truth(a, pv, qv, sv) || truth(b, pv, qv, sv),
        Formula::Iff(a, b) => truth(a, pv, qv, sv) == truth(b, pv, qv, sv),
        Formula::Compare(Term::Io(r), op, Term::Bool(b)) => {
            let v = if *r == p() { pv } else { qv };
            (v == *b) == (*op == CmpOp::Eq)
        }
        Formula::Compare(Term::Io(_), op, Term::Num(c)) => match op {
            CmpOp::Eq => sv == *c,
            CmpOp::Ne => sv != *c,
            CmpOp::Lt => sv < *c,
            CmpOp::Le => sv <= *c,
            CmpOp::Gt => sv > *c,
            CmpOp::Ge => sv >= *c,
        },
        other => panic!("not generated: {other:?}"),
    }
}

fn obligation(a: Formula, c: Formula) -> Obligation {
    Obligation { quantified_vars: vec![(p(), Type::Bool), (q(), Type::Bool), (s(), Type::Real)], antecedent: a, consequent: c, premise: None }
}

fn grid(mask: u8) -> Vec<Number> {
    (0..6).filter(|i| mask & (1 << i) != 0).map(|i| Number::new(i, 2)).collect()
}

fn bounds(g: Vec<Number>) -> DomainBounds {
    DomainBounds { real_grid: g, ..DomainBounds::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn discharge_matches_truth_table(a in qf_formula(), c in qf_formula(), mask in 1u8..64) {
        let ctx = resolve_context(&[]).unwrap();
        let g = grid(mask);
        let ob = obligation(a.clone(), c.clone());
        let mut valid = true;
        for pv in [false, true] {
            for qv in [false, true] {
                for sv in &g {
                    if truth(&a, pv, qv, *sv) && !truth(&c, pv, qv, *sv) {
                        valid = false;
                    }
                }
            }
        }
        let v = discharge(&ob, &bounds(g), &ctx);
        match &v {
            DVerdict::ValidBounded => prop_assert!(valid),
            DVerdict::Counterexample(_) => {
                prop_assert!(!valid);
                let asg: BTreeMap<IoRef, DValue> = v.assignment().unwrap().into_iter().collect();
                let b = |r: &IoRef| match asg.get(r) { Some(DValue::Bool(x)) => *x, _ => false };
                let n = match asg.get(&s()) { Some(DValue::Real(x)) => *x, _ => Number::from_integer(0) };
                prop_assert!(truth(&a, b(&p()), b(&q()), n) && !truth(&c, b(&p()), b(&q()), n), "{:?}", asg);
            }
            DVerdict::Unknown(r) => prop_assert!(false, "unknown: {}", r),
        }
    }

    #[test]
    fn shrinking_the_grid_keeps_validity(a in qf_formula(), c in qf_formula(), big in 1u8..64, keep in 0u8..64) {
        let small = big & keep;
        prop_assume!(small != 0);
        let ctx = resolve_context(&[]).unwrap();
        let ob = obligation(a, c);
        if discharge(&ob, &bounds(grid(big)), &ctx) == DVerdict::ValidBounded {
            prop_assert_eq!(discharge(&ob, &bounds(grid(small)), &ctx), DVerdict::ValidBounded);
        }
    }

    #[test]
    fn renaming_bound_variables_is_alpha_equal(f in common::formula(), suffix in "[a-z]{1,3}") {
        fn go(f: &Formula, sfx: &str, bound: &[String]) -> Formula {
            let term = |t: &Term| rename_term(t, sfx, bound);
            match f {
                Formula::Quant(k, vs, b) => {
                    let mut inner = bound.to_vec();
                    inner.extend(vs.iter().map(|v| v.name.clone()));
                    let vs = vs.iter().map(|v| TypedVar::new(format!("{}_{sfx}", v.name), v.ty.clone())).collect();
                    Formula::Quant(*k, vs, Box::new(go(b, sfx, &inner)))
                }
                Formula::Not(a) => Formula::not(go(a, sfx, bound)),
                Formula::And(a, b) => Formula::and(go(a, sfx, bound), go(b, sfx, bound)),
                Formula::Or(a, b) => Formula::or(go(a, sfx, bound), go(b, sfx, bound)),
                Formula::Implies(a, b) => Formula::implies(go(a, sfx, bound), go(b, sfx, bound)),
                Formula::Iff(a, b) => Formula::Iff(Box::new(go(a, sfx, bound)), Box::new(go(b, sfx, bound))),
                Formula::Member { term: t, set, negated } => Formula::Member { term: term(t), set: set.clone(), negated: *negated },
                Formula::Compare(l, op, r) => Formula::Compare(term(l), *op, term(r)),
                Formula::Pred(t) => Formula::Pred(term(t)),
                Formula::Bool(b) => Formula::Bool(*b),
            }
        }
        fn rename_term(t: &Term, sfx: &str, bound: &[String]) -> Term {
            match t {
                Term::Name(n) if bound.contains(n) => Term::Name(format!("{n}_{sfx}")),
                Term::Apply(r, args) => Term::Apply(r.clone(), args.iter().map(|a| rename_term(a, sfx, bound)).collect()),
                Term::Ctor(c, args) => Term::Ctor(c.clone(), args.iter().map(|a| rename_term(a, sfx, bound)).collect()),
                Term::Add(a, k) => Term::Add(Box::new(rename_term(a, sfx, bound)), *k),
                other => other.clone(),
            }
        }
        let g = go(&f, &suffix, &[]);
        prop_assert!(rcl::alpha_equal(&f, &g), "{}\n{}", f, g);
    }
}

#[test]
fn alpha_equality_tracks_binding_structure() {
    let f = rcl::syntax::parse_formula("forall(x in REAL | exists(y in REAL | in.a(x) == y))").unwrap();
    let g = rcl::syntax::parse_formula("forall(u in REAL | exists(v in REAL | in.a(u) == v))").unwrap();
    let swapped = rcl::syntax::parse_formula("forall(x in REAL | exists(y in REAL | in.a(y) == x))").unwrap();
    assert!(rcl::alpha_equal(&f, &g));
    assert!(!rcl::alpha_equal(&f, &swapped));
}
