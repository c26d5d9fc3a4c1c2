use std::fmt::{self, Write};

use crate::ast::*;

pub(crate) fn level(f: &Formula) -> u8 {
    match f {
        Formula::Iff(..) => 1,
        Formula::Implies(..) => 2,
        Formula::Or(..) => 3,
        Formula::And(..) => 4,
        Formula::Not(_) => 5,
        _ => 6,
    }
}

/// Groups consecutive variables of the same type: `x, y in REAL, i in NATURAL`.
pub(crate) fn binder_groups(vars: &[TypedVar]) -> Vec<(Vec<&str>, &BaseType)> {
    let mut groups: Vec<(Vec<&str>, &BaseType)> = Vec::new();
    for v in vars {
        match groups.last_mut() {
            Some((names, ty)) if **ty == v.ty => names.push(&v.name),
            _ => groups.push((vec![&v.name], &v.ty)),
        }
    }
    groups
}

fn write_child(f: &mut fmt::Formatter<'_>, child: &Formula, min: u8) -> fmt::Result {
    if level(child) < min {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Bool(b) => f.write_str(if *b { "TRUE" } else { "FALSE" }),
            Formula::Quant(q, vars, body) => {
                write!(f, "{}(", q.keyword())?;
                for (i, (names, ty)) in binder_groups(vars).into_iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{} in {ty}", names.join(", "))?;
                }
                write!(f, " | {body})")
            }
            Formula::Not(a) => {
                f.write_str("not ")?;
                write_child(f, a, 5)
            }
            Formula::And(a, b) => {
                write_child(f, a, 4)?;
                f.write_str(" and ")?;
                write_child(f, b, 5)
            }
            Formula::Or(a, b) => {
                write_child(f, a, 3)?;
                f.write_str(" or ")?;
                write_child(f, b, 4)
            }
            Formula::Implies(a, b) => {
                write_child(f, a, 3)?;
                f.write_str(" -> ")?;
                write_child(f, b, 2)
            }
            Formula::Iff(a, b) => {
                write_child(f, a, 1)?;
                f.write_str(" <-> ")?;
                write_child(f, b, 2)
            }
            Formula::Member { term, set, negated } => {
                write!(f, "{term} {} {{{}}}", if *negated { "!in" } else { "in" }, set.join(", "))
            }
            Formula::Compare(l, op, r) => write!(f, "{l} {} {r}", op.symbol()),
            Formula::Pred(t) => write!(f, "{t}"),
        }
    }
}

fn write_args(f: &mut fmt::Formatter<'_>, args: &[Term]) -> fmt::Result {
    f.write_char('(')?;
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{a}")?;
    }
    f.write_char(')')
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Name(n) => f.write_str(n),
            Term::Io(r) => write!(f, "{r}"),
            Term::Apply(r, args) => {
                write!(f, "{r}")?;
                write_args(f, args)
            }
            Term::Ctor(c, args) => {
                f.write_str(c)?;
                write_args(f, args)
            }
            Term::Num(n) => f.write_str(&format_number(n)),
            Term::Bool(b) => f.write_str(if *b { "TRUE" } else { "FALSE" }),
            Term::Add(t, k) => write!(f, "{t} + {k}"),
        }
    }
}

impl fmt::Display for TypeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeExpr::Empty => f.write_str("{}"),
            TypeExpr::Enum(members) => write!(f, "{{{}}}", members.join(", ")),
            TypeExpr::Constructors(cs) => {
                let parts: Vec<String> = cs
                    .iter()
                    .map(|c| {
                        let ps: Vec<&str> = c.params.iter().map(BaseType::name).collect();
                        format!("{}({})", c.name, ps.join(", "))
                    })
                    .collect();
                write!(f, "{{ {} }}", parts.join(", "))
            }
            TypeExpr::Function { params, ret } => {
                let ps: Vec<&str> = params.iter().map(BaseType::name).collect();
                write!(f, "{} --> {ret}", ps.join(" x "))
            }
        }
    }
}

fn render_vars(vars: &[IoVar]) -> String {
    let parts: Vec<String> = vars.iter().map(|v| format!("{} : {}", v.name, v.ty)).collect();
    format!("( {} )", parts.join(", "))
}

pub fn render_contract(c: &Contract) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "node {}{{", c.node);
    let _ = writeln!(out, "inputs{}", render_vars(&c.inputs));
    let _ = writeln!(out, "outputs{}", render_vars(&c.outputs));
    if let Some(topics) = &c.topics {
        let parts: Vec<String> = topics
            .iter()
            .map(|t| {
                let mut s = format!("{} {}", t.message_type, t.topic_name);
                if let Some(b) = &t.binding {
                    match b.dir {
                        Some(d) => write!(s, " matches({}.{})", d.keyword(), b.name),
                        None => write!(s, " matches({})", b.name),
                    }
                    .unwrap();
                }
                s
            })
            .collect();
        let _ = writeln!(out, "topics( {} )", parts.join(",\n  "));
    }
    for a in &c.assumes {
        let _ = writeln!(out, "assume( {a} )");
    }
    for g in &c.guarantees {
        let _ = writeln!(out, "guarantee( {g} )");
    }
    out.push_str("}\n");
    out
}

pub fn render_context(decls: &[ContextDecl]) -> String {
    if decls.is_empty() {
        return "context{ }\n".into();
    }
    let mut out = String::from("context{\n");
    for d in decls {
        let _ = writeln!(out, " {} : {} ;", d.name, d.body);
    }
    out.push_str("}\n");
    out
}

pub fn render_rcl(doc: &Document) -> String {
    let blocks: Vec<String> = doc
        .clauses
        .iter()
        .map(|c| match c {
            Clause::Context(d) => render_context(d),
            Clause::Node(n) => render_contract(n),
        })
        .collect();
    blocks.join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_document, parse_formula};

    #[test]
    fn parenthesizes_only_when_needed() {
        let f = parse_formula("(a or b) and c -> d -> e").unwrap();
        assert_eq!(f.to_string(), "(a or b) and c -> d -> e");
        let g = parse_formula("(a -> b) -> c").unwrap();
        assert_eq!(g.to_string(), "(a -> b) -> c");
    }

    #[test]
    fn empty_context_reparses() {
        let doc = parse_document("context{ }").unwrap();
        assert_eq!(render_rcl(&doc), "context{ }\n");
        assert_eq!(parse_document(&render_rcl(&doc)).unwrap(), doc);
    }

    #[test]
    fn quantifier_binders_are_regrouped() {
        let f = parse_formula("forall x in REAL, y in REAL, i in NATURAL | TRUE").unwrap();
        assert_eq!(f.to_string(), "forall(x, y in REAL, i in NATURAL | TRUE)");
    }

    #[test]
    fn node_without_topics_stays_without() {
        let src = "node ArmServer { inputs( arm_down : BOOL ) outputs( arm_result : BOOL ) assume( TRUE ) guarantee( out.arm_result = TRUE ) }";
        let doc = parse_document(src).unwrap();
        let text = render_rcl(&doc);
        assert!(!text.contains("topics"));
        assert!(text.contains("guarantee( out.arm_result == TRUE )"));
        assert_eq!(parse_document(&text).unwrap(), doc);
    }
}
