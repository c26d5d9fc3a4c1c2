use super::rules::{DerivedProperty, Obligation};
use crate::ast::{Dir, Formula, IoRef};
use crate::syntax::render::level;
use crate::typeck::{Type, TypedContract};

pub enum Renderable<'a> {
    Obligation(&'a Obligation),
    Derived(&'a DerivedProperty),
}

impl<'a> From<&'a Obligation> for Renderable<'a> {
    fn from(o: &'a Obligation) -> Self {
        Renderable::Obligation(o)
    }
}

impl<'a> From<&'a DerivedProperty> for Renderable<'a> {
    fn from(d: &'a DerivedProperty) -> Self {
        Renderable::Derived(d)
    }
}

fn wrap(f: &Formula, min: u8) -> String {
    if level(f) < min {
        format!("({f})")
    } else {
        f.to_string()
    }
}

/// The implication as plain text. Io accesses are free and implicitly
/// universally quantified; eventualities are prefixed with `<>`.
pub fn render_fotl<'a>(p: impl Into<Renderable<'a>>) -> String {
    match p.into() {
        Renderable::Obligation(o) => Formula::implies(o.antecedent.clone(), o.consequent.clone()).to_string(),
        Renderable::Derived(d) => {
            let parts: Vec<String> = d
                .consequents
                .iter()
                .enumerate()
                .map(|(i, (ev, f))| {
                    let body = if *ev {
                        format!("<> {}", wrap(f, 5))
                    } else if i == 0 {
                        wrap(f, 4)
                    } else {
                        wrap(f, 5)
                    };
                    body
                })
                .collect();
            let rhs = if parts.is_empty() { "TRUE".to_string() } else { parts.join(" and ") };
            format!("{} -> {rhs}", wrap(&d.antecedent, 3))
        }
    }
}

/// `forall Node.in.x : T, ...` over the quantified io accesses.
pub fn render_header(vars: &[(IoRef, Type)]) -> String {
    if vars.is_empty() {
        return String::new();
    }
    let vs: Vec<String> = vars.iter().map(|(r, t)| format!("{r} : {t}")).collect();
    format!("forall {}", vs.join(", "))
}

fn vector(c: &TypedContract, dir: Dir) -> String {
    let vars = match dir {
        Dir::In => &c.contract.inputs,
        Dir::Out => &c.contract.outputs,
    };
    let names: Vec<String> = vars.iter().map(|v| format!("{}.{}", dir.keyword(), v.name)).collect();
    format!("<{}>", names.join(", "))
}

/// The contract in stream form: if the head of the input stream satisfies
/// the assumption, the guarantee eventually holds of the output produced.
pub fn render_stream_semantics(c: &TypedContract) -> String {
    let a = c.contract.assumption();
    let g = c.contract.guarantee();
    format!(
        "forall S, T . (InStream([{i}|S]) and ({a}) and OutStream(T)) -> <> (InStream(S) and ({g}) and OutStream([{o}|T]))",
        i = vector(c, Dir::In),
        o = vector(c, Dir::Out),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_derived() {
        let d = DerivedProperty { quantified_vars: vec![], antecedent: Formula::Bool(true), consequents: vec![(true, Formula::Bool(true))] };
        assert_eq!(render_fotl(&d), "TRUE -> <> TRUE");
    }

    #[test]
    fn compound_consequents_are_wrapped() {
        let a = crate::syntax::parse_formula("p and q").unwrap();
        let d = DerivedProperty {
            quantified_vars: vec![],
            antecedent: a.clone(),
            consequents: vec![(true, a.clone()), (true, Formula::Bool(false))],
        };
        assert_eq!(render_fotl(&d), "p and q -> <> (p and q) and <> FALSE");
    }
}
