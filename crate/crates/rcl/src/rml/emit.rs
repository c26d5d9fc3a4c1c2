use std::fmt::{self, Write};

use super::{Arg, EventType, Lit, PatVal, RmlSpec, RmlTerm};
use crate::ast::format_number;

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lit::Num(n) => f.write_str(&format_number(n)),
            Lit::Str(s) => write!(f, "'{s}'"),
            Lit::Sym(s) => f.write_str(s),
            Lit::Bool(b) => write!(f, "{b}"),
        }
    }
}

impl fmt::Display for Arg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arg::Var(v) => f.write_str(v),
            Arg::Lit(l) => write!(f, "{l}"),
            Arg::Add(v, k) => write!(f, "{v}+{k}"),
            Arg::Wild => f.write_str("_"),
        }
    }
}

fn child(t: &RmlTerm, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match t {
        RmlTerm::And(ts) | RmlTerm::Or(ts) if ts.len() > 1 => write!(f, "({t})"),
        RmlTerm::Concat(..) => write!(f, "({t})"),
        _ => write!(f, "{t}"),
    }
}

impl fmt::Display for RmlTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RmlTerm::Et { name, args, negated } => {
                if *negated {
                    f.write_str("not ")?;
                }
                f.write_str(name)?;
                if !args.is_empty() {
                    let a: Vec<String> = args.iter().map(Arg::to_string).collect();
                    write!(f, "({})", a.join(", "))?;
                }
                Ok(())
            }
            RmlTerm::Any => f.write_str("any"),
            RmlTerm::Nothing => f.write_str("none"),
            RmlTerm::Empty => f.write_str("empty"),
            RmlTerm::And(ts) | RmlTerm::Or(ts) => {
                let sep = if matches!(self, RmlTerm::And(_)) { " /\\ " } else { " \\/ " };
                for (i, t) in ts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(sep)?;
                    }
                    child(t, f)?;
                }
                Ok(())
            }
            RmlTerm::Concat(a, b) => {
                match **a {
                    RmlTerm::Concat(..) => write!(f, "{a}")?,
                    _ => child(a, f)?,
                }
                f.write_str(" ")?;
                child(b, f)
            }
            RmlTerm::Let(vs, b) => write!(f, "{{let {}; {b}}}", vs.join(", ")),
            RmlTerm::Star(b) => match **b {
                RmlTerm::Let(..) => write!(f, "{b}*"),
                _ => write!(f, "{{{b}}}*"),
            },
        }
    }
}

/// `name(params) matches { k: v, ... } [with p op c];`
pub fn emit_event_type(et: &EventType) -> String {
    let mut s = et.name.clone();
    if !et.params.is_empty() {
        let _ = write!(s, "({})", et.params.join(", "));
    }
    let fields: Vec<String> = et
        .fields
        .iter()
        .map(|(k, v)| match v {
            PatVal::Param(p) => format!("{k}: {p}"),
            PatVal::Lit(l) => format!("{k}: {l}"),
        })
        .collect();
    let _ = write!(s, " matches {{ {} }}", fields.join(", "));
    if let Some(g) = &et.guard {
        let _ = write!(s, " with {} {} {}", g.param, g.op.symbol(), format_number(&g.value));
    }
    s.push(';');
    s
}

/// Event-type declarations, then one `tN = term;` line per named term.
pub fn emit_rml(spec: &RmlSpec) -> String {
    let mut out = String::new();
    for et in &spec.event_types {
        out.push_str(&emit_event_type(et));
        out.push('\n');
    }
    for (name, t) in &spec.terms {
        let _ = writeln!(out, "{name} = {t};");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rml::Arg;

    #[test]
    fn single_event_type_spec_is_two_lines() {
        let spec = RmlSpec {
            event_types: vec![EventType {
                name: "a".into(),
                params: vec![],
                fields: vec![("topic".into(), PatVal::Lit(Lit::Str("t".into())))],
                guard: None,
            }],
            terms: vec![("t1".into(), RmlTerm::star(RmlTerm::et("a", vec![])))],
        };
        assert_eq!(emit_rml(&spec), "a matches { topic: 't' };\nt1 = {a}*;\n");
    }

    #[test]
    fn grouping_is_parenthesized() {
        let inner = RmlTerm::Or(vec![RmlTerm::et("a", vec![Arg::Var("x".into())]), RmlTerm::et("b", vec![]).negate().unwrap()]);
        let t = RmlTerm::star(RmlTerm::let_(vec!["x".into()], RmlTerm::Or(vec![inner, RmlTerm::et("c", vec![Arg::Add("x".into(), 1)])])));
        assert_eq!(t.to_string(), "{let x; (a(x) \\/ not b) \\/ c(x+1)}*");
    }
}
