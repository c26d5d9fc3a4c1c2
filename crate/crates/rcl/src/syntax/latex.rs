use std::fmt::Write;

use super::render::{binder_groups, level};
use crate::ast::*;

fn esc(s: &str) -> String {
    s.replace('_', "\\_")
}

fn term(t: &Term) -> String {
    let args = |a: &[Term]| a.iter().map(term).collect::<Vec<_>>().join(", ");
    match t {
        Term::Name(n) => esc(n),
        Term::Io(r) => esc(&r.to_string()),
        Term::Apply(r, a) => format!("{}({})", esc(&r.to_string()), args(a)),
        Term::Ctor(c, a) => format!("{}({})", esc(c), args(a)),
        Term::Num(n) => format_number(n),
        Term::Bool(b) => (if *b { "TRUE" } else { "FALSE" }).into(),
        Term::Add(t, k) => format!("{}+{k}", term(t)),
    }
}

fn cmp(op: CmpOp) -> &'static str {
    match op {
        CmpOp::Eq => "=",
        CmpOp::Ne => "\\neq",
        CmpOp::Lt => "<",
        CmpOp::Le => "\\leq",
        CmpOp::Gt => ">",
        CmpOp::Ge => "\\geq",
    }
}

fn child(f: &Formula, min: u8) -> String {
    // quantifier bodies extend to the right, so a nested quantifier is always wrapped
    if level(f) < min || matches!(f, Formula::Quant(..)) {
        format!("({})", formula(f))
    } else {
        formula(f)
    }
}

pub fn formula(f: &Formula) -> String {
    match f {
        Formula::Bool(b) => (if *b { "TRUE" } else { "FALSE" }).into(),
        Formula::Quant(q, vars, body) => {
            let sym = match q {
                Quantifier::Forall => "\\forall",
                Quantifier::Exists => "\\exists",
                Quantifier::ExistsUnique => "\\exists!",
            };
            let groups: Vec<String> = binder_groups(vars)
                .into_iter()
                .map(|(names, ty)| {
                    let names: Vec<String> = names.into_iter().map(esc).collect();
                    format!("{} \\in {}", names.join(", "), ty)
                })
                .collect();
            format!("{sym} {} \\cdot {}", groups.join(", "), formula(body))
        }
        Formula::Not(a) => format!("\\neg {}", child(a, 5)),
        Formula::And(a, b) => format!("{} \\land {}", child(a, 4), child(b, 5)),
        Formula::Or(a, b) => format!("{} \\lor {}", child(a, 3), child(b, 4)),
        Formula::Implies(a, b) => format!("{} \\implies {}", child(a, 3), child(b, 2)),
        Formula::Iff(a, b) => format!("{} \\iff {}", child(a, 1), child(b, 2)),
        Formula::Member { term: t, set, negated } => {
            let set: Vec<String> = set.iter().map(|s| esc(s)).collect();
            format!("{} {} \\{{{}\\}}", term(t), if *negated { "\\notin" } else { "\\in" }, set.join(", "))
        }
        Formula::Compare(l, op, r) => format!("{} {} {}", term(l), cmp(*op), term(r)),
        Formula::Pred(t) => term(t),
    }
}

/// LaTeX block for one contract: a header line per clause and one `$...$`
/// math environment per assume and guarantee.
pub fn render_latex(c: &Contract) -> String {
    let vars = |vs: &[IoVar]| vs.iter().map(|v| format!("{} : {}", esc(&v.name), esc(v.ty.name()))).collect::<Vec<_>>().join(", ");
    let mut out = String::new();
    let _ = writeln!(out, "\\textbf{{{}}}\n", esc(&c.node));
    let _ = writeln!(out, "inputs $( {} )$\\\\", vars(&c.inputs));
    let _ = writeln!(out, "outputs $( {} )$\\\\", vars(&c.outputs));
    if !c.topics().is_empty() {
        let topics: Vec<String> = c
            .topics()
            .iter()
            .map(|t| {
                let mut s = format!("{}~{}", esc(&t.message_type), esc(&t.topic_name));
                if let Some(b) = &t.binding {
                    let target = match b.dir {
                        Some(d) => format!("{}.{}", d.keyword(), b.name),
                        None => b.name.clone(),
                    };
                    let _ = write!(s, " matches:~{}", esc(&target));
                }
                s
            })
            .collect();
        let _ = writeln!(out, "topics ( {} )\\\\", topics.join(", "));
    }
    let assumes = if c.assumes.is_empty() { vec![Formula::Bool(true)] } else { c.assumes.clone() };
    for a in &assumes {
        let _ = writeln!(out, "assume ${}$\\\\", formula(a));
    }
    for g in &c.guarantees {
        let _ = writeln!(out, "guarantee ${}$\\\\", formula(g));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_formula;

    #[test]
    fn membership_uses_set_braces() {
        let f = parse_formula("in.radiationStatus in {red, orange, green}").unwrap();
        assert_eq!(formula(&f), "in.radiationStatus \\in \\{red, orange, green\\}");
    }

    #[test]
    fn true_stays_true() {
        assert_eq!(formula(&Formula::Bool(true)), "TRUE");
    }

    #[test]
    fn symbols() {
        let f = parse_formula("forall(x' in REAL | not in.a(x') == TRUE -> in.r != 1)").unwrap();
        assert_eq!(formula(&f), "\\forall x' \\in REAL \\cdot \\neg in.a(x') = TRUE \\implies in.r \\neq 1");
    }
}
