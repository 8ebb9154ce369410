//! Exhaustive enumeration of small closed terms.

use std::collections::HashMap;

use vl_core::syntax::label;
use vl_core::{Label, Term, Versioned};

pub const BINDERS: [&str; 2] = ["x", "y"];
pub const LITERALS: [i64; 2] = [0, 1];
pub const LABELS: [&str; 2] = ["l1", "l2"];

/// Closed, annotation-free terms of depth at most `depth` (counting nodes)
/// and size at most `size`, built from the binders, literals and labels
/// above. Records list `l1` before `l2`, with either default.
pub fn closed_terms(depth: usize, size: usize) -> Vec<Term> {
    let mut space = Space::default();
    (1..=size).flat_map(|n| space.exact(0, depth, n).to_vec()).collect()
}

#[derive(Default)]
struct Space {
    /// Keyed by (bitmask of binders in scope, depth bound, exact size).
    memo: HashMap<(u8, usize, usize), Vec<Term>>,
}

fn labels() -> Vec<Label> {
    LABELS.iter().map(|l| label(l)).collect()
}

impl Space {
    fn exact(&mut self, scope: u8, depth: usize, size: usize) -> Vec<Term> {
        if depth == 0 || size == 0 {
            return Vec::new();
        }
        if let Some(ts) = self.memo.get(&(scope, depth, size)) {
            return ts.clone();
        }
        let mut out = Vec::new();
        if size == 1 {
            out.extend(LITERALS.iter().map(|&n| Term::Int(n)));
            out.extend((0..BINDERS.len()).filter(|i| scope & (1 << i) != 0).map(|i| Term::var(BINDERS[i])));
        } else {
            let d = depth - 1;
            let n = size - 1;
            for (i, x) in BINDERS.iter().enumerate() {
                let inner = scope | (1 << i);
                out.extend(self.exact(inner, d, n).into_iter().map(|b| Term::abs(*x, b)));
                for k in 1..n {
                    let bounds = self.exact(scope, d, k);
                    let bodies = self.exact(inner, d, n - k);
                    for t1 in &bounds {
                        out.extend(bodies.iter().map(|t2| Term::let_box(*x, t1.clone(), t2.clone())));
                    }
                }
            }
            for body in self.exact(scope, d, n) {
                out.push(Term::promote(body.clone()));
                for l in labels() {
                    out.push(Term::extract(body.clone(), l.clone()));
                    out.push(Term::Record(Versioned { entries: vec![(l.clone(), body.clone())], default: l }));
                }
            }
            for k in 1..n {
                let left = self.exact(scope, d, k);
                let right = self.exact(scope, d, n - k);
                for a in &left {
                    for b in &right {
                        out.push(Term::app(a.clone(), b.clone()));
                        out.push(Term::add(a.clone(), b.clone()));
                        for default in labels() {
                            let entries = vec![(label("l1"), a.clone()), (label("l2"), b.clone())];
                            out.push(Term::Record(Versioned { entries, default }));
                        }
                    }
                }
            }
        }
        self.memo.insert((scope, depth, size), out.clone());
        out
    }
}
