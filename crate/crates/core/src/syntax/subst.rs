//! Free variables, label collection and capture-avoiding substitution.

use std::collections::BTreeSet;

use super::{Term, Versioned};
use crate::resource::Label;

pub fn free_vars(t: &Term) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    collect_free(t, &mut Vec::new(), &mut out);
    out
}

fn collect_free<'a>(t: &'a Term, bound: &mut Vec<&'a str>, out: &mut BTreeSet<String>) {
    match t {
        Term::Var(x) => {
            if !bound.contains(&x.as_str()) {
                out.insert(x.clone());
            }
        }
        Term::Abs(x, body) => {
            bound.push(x);
            collect_free(body, bound, out);
            bound.pop();
        }
        Term::LetBox(x, t1, t2) => {
            collect_free(t1, bound, out);
            bound.push(x);
            collect_free(t2, bound, out);
            bound.pop();
        }
        _ => {
            for c in t.children() {
                collect_free(c, bound, out);
            }
        }
    }
}

/// Every label mentioned by records, computations, extractions and promotion
/// annotations.
pub fn label_universe(t: &Term) -> BTreeSet<Label> {
    let mut out = BTreeSet::new();
    collect_labels(t, &mut out);
    out
}

fn collect_labels(t: &Term, out: &mut BTreeSet<Label>) {
    match t {
        Term::Record(v) | Term::Comp(v) => out.extend(v.labels().cloned()),
        Term::Extract(_, l) => {
            out.insert(l.clone());
        }
        Term::Promote(_, Some(r)) => out.extend(r.labels().into_iter().flatten().cloned()),
        _ => {}
    }
    for c in t.children() {
        collect_labels(c, out);
    }
}

/// `x` followed by as many primes as needed to avoid `avoid`.
pub fn fresh_name(x: &str, avoid: &BTreeSet<String>) -> String {
    let mut name = format!("{x}'");
    while avoid.contains(&name) {
        name.push('\'');
    }
    name
}

/// `[s/x]t`: replaces the free occurrences of `x` in `t` by `s`, renaming
/// binders of `t` that would capture free variables of `s`.
pub fn subst(t: &Term, x: &str, s: &Term) -> Term {
    let fv = free_vars(s);
    go(t, x, s, &fv)
}

fn go(t: &Term, x: &str, s: &Term, fv_s: &BTreeSet<String>) -> Term {
    match t {
        Term::Var(y) if y == x => s.clone(),
        Term::Var(_) | Term::Int(_) => t.clone(),
        Term::Abs(y, body) => {
            let (y, body) = under_binder(y, body, x, s, fv_s);
            Term::Abs(y, Box::new(body))
        }
        Term::LetBox(y, t1, t2) => {
            let t1 = go(t1, x, s, fv_s);
            let (y, t2) = under_binder(y, t2, x, s, fv_s);
            Term::LetBox(y, Box::new(t1), Box::new(t2))
        }
        Term::App(a, b) => Term::app(go(a, x, s, fv_s), go(b, x, s, fv_s)),
        Term::Add(a, b) => Term::add(go(a, x, s, fv_s), go(b, x, s, fv_s)),
        Term::Promote(body, r) => Term::Promote(Box::new(go(body, x, s, fv_s)), r.clone()),
        Term::Extract(inner, l) => Term::extract(go(inner, x, s, fv_s), l.clone()),
        Term::Record(v) => Term::Record(go_versioned(v, x, s, fv_s)),
        Term::Comp(v) => Term::Comp(go_versioned(v, x, s, fv_s)),
    }
}

fn go_versioned(v: &Versioned, x: &str, s: &Term, fv_s: &BTreeSet<String>) -> Versioned {
    v.map(|t| go(t, x, s, fv_s))
}

fn under_binder(y: &str, body: &Term, x: &str, s: &Term, fv_s: &BTreeSet<String>) -> (String, Term) {
    if y == x {
        return (y.to_string(), body.clone());
    }
    let fv_body = free_vars(body);
    if !fv_body.contains(x) {
        return (y.to_string(), body.clone());
    }
    if fv_s.contains(y) {
        let mut avoid: BTreeSet<String> = fv_s.union(&fv_body).cloned().collect();
        avoid.insert(x.to_string());
        let fresh = fresh_name(y, &avoid);
        let renamed = go(body, y, &Term::Var(fresh.clone()), &BTreeSet::from([fresh.clone()]));
        (fresh, go(&renamed, x, s, fv_s))
    } else {
        (y.to_string(), go(body, x, s, fv_s))
    }
}
