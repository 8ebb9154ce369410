//! Greedy shrinking of failing terms.

use vl_core::Term;

const MAX_ROUNDS: usize = 200;

/// Single-edit simplifications of `t`: integers toward 0, record entries
/// removed, subterms replaced by the literal 0 or by one of their children.
pub fn candidates(t: &Term) -> Vec<Term> {
    let mut out = Vec::new();
    match t {
        Term::Int(0) => {}
        Term::Int(n) => {
            out.push(Term::Int(0));
            if n / 2 != 0 {
                out.push(Term::Int(n / 2));
            }
        }
        _ => out.push(Term::Int(0)),
    }
    if let Term::Record(v) | Term::Comp(v) = t {
        for (i, (l, _)) in v.entries.iter().enumerate() {
            if *l != v.default {
                let mut v = v.clone();
                v.entries.remove(i);
                out.push(if matches!(t, Term::Record(_)) { Term::Record(v) } else { Term::Comp(v) });
            }
        }
    }
    let children = t.children();
    out.extend(children.iter().map(|c| (*c).clone()));
    for (i, c) in children.iter().enumerate() {
        out.extend(candidates(c).into_iter().map(|c| t.with_child(i, c)));
    }
    out
}

/// Repeatedly takes the first simplification that still `fails` until none
/// does. Callers fold well-typedness into `fails`, so every intermediate is
/// a well-typed counterexample.
pub fn shrink(t: &Term, fails: impl Fn(&Term) -> bool) -> Term {
    let mut current = t.clone();
    for _ in 0..MAX_ROUNDS {
        let next = candidates(&current).into_iter().filter(|c| smaller(c, &current)).find(|c| fails(c));
        match next {
            Some(next) => current = next,
            None => break,
        }
    }
    current
}

fn int_weight(t: &Term) -> u128 {
    match t {
        Term::Int(n) => n.unsigned_abs() as u128,
        _ => t.children().into_iter().map(int_weight).sum(),
    }
}

fn is_smaller_int(a: &Term, b: &Term) -> bool {
    a.size() == b.size() && int_weight(a) < int_weight(b)
}

/// Strictly smaller in size, or equal size with integers closer to zero.
fn smaller(a: &Term, b: &Term) -> bool {
    a.size() < b.size() || is_smaller_int(a, b)
}
