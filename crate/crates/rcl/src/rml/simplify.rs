use super::RmlTerm;

fn and_of(mut ts: Vec<RmlTerm>) -> RmlTerm {
    match ts.len() {
        0 => RmlTerm::Any,
        1 => ts.pop().unwrap(),
        _ => RmlTerm::And(ts),
    }
}

fn conjuncts(t: &RmlTerm) -> Vec<RmlTerm> {
    match t {
        RmlTerm::And(ts) => ts.clone(),
        other => vec![other.clone()],
    }
}

fn complementary(a: &RmlTerm, b: &RmlTerm) -> bool {
    a.negate().as_ref() == Some(b)
}

fn dedup(ts: &mut Vec<RmlTerm>) -> bool {
    let before = ts.len();
    let mut seen: Vec<RmlTerm> = Vec::new();
    ts.retain(|t| {
        if seen.contains(t) {
            false
        } else {
            seen.push(t.clone());
            true
        }
    });
    ts.len() != before
}

/// `(X /\ b) \/ (X /\ not b)` becomes `X`.
fn merge_pair(ts: &mut Vec<RmlTerm>) -> bool {
    for i in 0..ts.len() {
        for j in i + 1..ts.len() {
            let (ci, cj) = (conjuncts(&ts[i]), conjuncts(&ts[j]));
            if ci.len() != cj.len() {
                continue;
            }
            let diff: Vec<usize> = (0..ci.len()).filter(|&k| ci[k] != cj[k]).collect();
            if let [k] = diff[..] {
                if complementary(&ci[k], &cj[k]) {
                    let mut common = ci;
                    common.remove(k);
                    ts[i] = and_of(common);
                    ts.remove(j);
                    return true;
                }
            }
        }
    }
    false
}

/// `X \/ (not X /\ Y)` becomes `X \/ Y`.
fn absorb_complement(ts: &mut [RmlTerm]) -> bool {
    for i in 0..ts.len() {
        let Some(nx) = ts[i].negate() else { continue };
        for (j, t) in ts.iter_mut().enumerate() {
            if i == j {
                continue;
            }
            if let RmlTerm::And(cs) = t {
                if let Some(k) = cs.iter().position(|c| *c == nx) {
                    let mut cs = cs.clone();
                    cs.remove(k);
                    *t = and_of(cs);
                    return true;
                }
            }
        }
    }
    false
}

fn or_rules(ts: &mut Vec<RmlTerm>) -> bool {
    let n = ts.len();
    ts.retain(|t| *t != RmlTerm::Nothing);
    let mut changed = ts.len() != n;
    changed |= dedup(ts);
    if ts.iter().all(RmlTerm::is_single_event) {
        if ts.contains(&RmlTerm::Any) && ts.len() > 1 {
            *ts = vec![RmlTerm::Any];
            return true;
        }
        changed |= merge_pair(ts) || absorb_complement(ts);
    }
    changed
}

fn and_rules(ts: &mut Vec<RmlTerm>) -> bool {
    if ts.contains(&RmlTerm::Nothing) && ts.len() > 1 {
        *ts = vec![RmlTerm::Nothing];
        return true;
    }
    let mut changed = dedup(ts);
    if ts.len() > 1 && ts.iter().all(RmlTerm::is_single_event) {
        let n = ts.len();
        ts.retain(|t| *t != RmlTerm::Any);
        if ts.is_empty() {
            ts.push(RmlTerm::Any);
        }
        changed |= ts.len() != n;
    }
    changed
}

/// Rules are tried on the children as given before the children are
/// rewritten, so complementary pairs built by the translation are still
/// syntactically complementary when compared.
fn simplify_nary(mut ts: Vec<RmlTerm>, rules: fn(&mut Vec<RmlTerm>) -> bool, wrap: fn(Vec<RmlTerm>) -> RmlTerm, unit: RmlTerm) -> RmlTerm {
    loop {
        while rules(&mut ts) {}
        let next: Vec<RmlTerm> = ts.iter().map(simplify_term).collect();
        if next == ts {
            break;
        }
        ts = next;
    }
    match ts.len() {
        0 => unit,
        1 => ts.pop().unwrap(),
        _ => wrap(ts),
    }
}

/// Boolean clean-up of a translated term: unit and zero elements,
/// idempotence, complementary pairs. Grouping is kept as written so the
/// printed term follows the source formula.
pub fn simplify_term(t: &RmlTerm) -> RmlTerm {
    match t {
        RmlTerm::Et { .. } | RmlTerm::Any | RmlTerm::Nothing | RmlTerm::Empty => t.clone(),
        RmlTerm::And(ts) => simplify_nary(ts.clone(), and_rules, RmlTerm::And, RmlTerm::Any),
        RmlTerm::Or(ts) => simplify_nary(ts.clone(), or_rules, RmlTerm::Or, RmlTerm::Nothing),
        RmlTerm::Concat(a, b) => match (simplify_term(a), simplify_term(b)) {
            (RmlTerm::Nothing, _) | (_, RmlTerm::Nothing) => RmlTerm::Nothing,
            (RmlTerm::Empty, x) | (x, RmlTerm::Empty) => x,
            (a, b) => RmlTerm::concat(a, b),
        },
        RmlTerm::Star(b) => match simplify_term(b) {
            RmlTerm::Nothing | RmlTerm::Empty => RmlTerm::Empty,
            b => RmlTerm::star(b),
        },
        RmlTerm::Let(vs, b) => {
            let b = simplify_term(b);
            let used: Vec<String> = vs.iter().filter(|v| b.mentions(v)).cloned().collect();
            if used.is_empty() {
                b
            } else {
                RmlTerm::let_(used, b)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn et(n: &str) -> RmlTerm {
        RmlTerm::et(n, vec![])
    }

    fn not(t: RmlTerm) -> RmlTerm {
        t.negate().unwrap()
    }

    #[test]
    fn implication_collapses() {
        let (a, b) = (et("a"), et("b"));
        let t = RmlTerm::Or(vec![
            RmlTerm::And(vec![not(a.clone()), b.clone()]),
            RmlTerm::And(vec![not(a.clone()), not(b.clone())]),
            RmlTerm::And(vec![a.clone(), b.clone()]),
        ]);
        assert_eq!(simplify_term(&t), RmlTerm::Or(vec![not(a), b]));
    }

    #[test]
    fn idempotent_or() {
        assert_eq!(simplify_term(&RmlTerm::Or(vec![et("a"), et("a")])), et("a"));
    }

    #[test]
    fn unused_let_vars_are_dropped() {
        let t = RmlTerm::let_(vec!["x".into()], et("a"));
        assert_eq!(simplify_term(&t), et("a"));
    }
}
