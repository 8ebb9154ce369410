//! Symbolic resources and the finite search that resolves them.
//!
//! Resource variables appear when a lambda parameter is used as a versioned
//! value: its box resource is unknown until the argument is seen, and the
//! function body may be checked before that. Constraints on such variables
//! are collected and solved at the end by backtracking over the finitely
//! many resources drawn from the program's labels.

use std::rc::Rc;

use crate::syntax::Span;
use crate::resource::{Label, Resource};

#[derive(Clone, Debug)]
pub(crate) enum Res {
    Known(Resource),
    Var(u32),
    Plus(Rc<Res>, Rc<Res>),
    Times(Rc<Res>, Rc<Res>),
    /// The greatest `r` with `r ⊗ d ⊑ a` for every `(d, a)`, falling back to
    /// the universe when nothing constrains `r`.
    Greedy(Rc<[(Res, Res)]>, Resource),
}

impl Res {
    pub(crate) fn known(&self) -> Option<&Resource> {
        match self {
            Res::Known(r) => Some(r),
            _ => None,
        }
    }

    pub(crate) fn plus(a: Res, b: Res) -> Res {
        match (a, b) {
            (Res::Known(a), Res::Known(b)) => Res::Known(a.plus(&b)),
            (Res::Known(Resource::Bottom), x) | (x, Res::Known(Resource::Bottom)) => x,
            (a, b) => Res::Plus(Rc::new(a), Rc::new(b)),
        }
    }

    pub(crate) fn times(a: Res, b: Res) -> Res {
        match (a, b) {
            (Res::Known(a), Res::Known(b)) => Res::Known(a.times(&b)),
            (Res::Known(Resource::Bottom), _) | (_, Res::Known(Resource::Bottom)) => Res::Known(Resource::Bottom),
            (a, b) => Res::Times(Rc::new(a), Rc::new(b)),
        }
    }

    pub(crate) fn greedy(pairs: Vec<(Res, Res)>, universe: &Resource) -> Res {
        if pairs.iter().all(|(d, a)| d.known().is_some() && a.known().is_some()) {
            let known: Vec<_> = pairs
                .iter()
                .map(|(d, a)| (d.known().unwrap().clone(), a.known().unwrap().clone()))
                .collect();
            Res::Known(greedy(&known, universe))
        } else {
            Res::Greedy(pairs.into(), universe.clone())
        }
    }

    pub(crate) fn vars(&self, out: &mut Vec<u32>) {
        match self {
            Res::Known(_) => {}
            Res::Var(v) => {
                if !out.contains(v) {
                    out.push(*v)
                }
            }
            Res::Plus(a, b) | Res::Times(a, b) => {
                a.vars(out);
                b.vars(out);
            }
            Res::Greedy(pairs, _) => {
                for (d, a) in pairs.iter() {
                    d.vars(out);
                    a.vars(out);
                }
            }
        }
    }

    /// Rewrites variables through `f`, folding whatever becomes known.
    pub(crate) fn map_vars(&self, f: &mut impl FnMut(u32) -> Res) -> Res {
        match self {
            Res::Known(_) => self.clone(),
            Res::Var(v) => f(*v),
            Res::Plus(a, b) => Res::plus(a.map_vars(f), b.map_vars(f)),
            Res::Times(a, b) => Res::times(a.map_vars(f), b.map_vars(f)),
            Res::Greedy(pairs, u) => {
                let pairs = pairs.iter().map(|(d, a)| (d.map_vars(f), a.map_vars(f))).collect();
                Res::greedy(pairs, u)
            }
        }
    }

    pub(crate) fn eval(&self, assign: &impl Fn(u32) -> Resource) -> Resource {
        match self {
            Res::Known(r) => r.clone(),
            Res::Var(v) => assign(*v),
            Res::Plus(a, b) => a.eval(assign).plus(&b.eval(assign)),
            Res::Times(a, b) => a.eval(assign).times(&b.eval(assign)),
            Res::Greedy(pairs, u) => {
                let known: Vec<_> = pairs.iter().map(|(d, a)| (d.eval(assign), a.eval(assign))).collect();
                greedy(&known, u)
            }
        }
    }
}

/// The ⊑-greatest `r` with `r ⊗ d ⊑ a` for all pairs: `⊥` when some demand
/// cannot be met at all, otherwise the intersection of the availabilities
/// that are actually demanded, or `universe` if none are.
pub(crate) fn greedy(pairs: &[(Resource, Resource)], universe: &Resource) -> Resource {
    let mut r: Option<Resource> = None;
    for (d, a) in pairs {
        if d.is_bottom() {
            continue;
        }
        if !d.leq(a) {
            return Resource::Bottom;
        }
        r = Some(match r {
            None => a.clone(),
            Some(r) => r.meet(a),
        });
    }
    r.unwrap_or_else(|| universe.clone())
}

#[derive(Clone, Debug)]
pub(crate) enum Constraint {
    Leq(Res, Res),
    Member(Label, Res),
    Eq(Res, Res),
    /// `a ⊑ b` unless one of the enclosing promotion resources is `⊥`.
    LeqUnlessErased(Vec<Res>, Res, Res),
}

impl Constraint {
    pub(crate) fn vars(&self, out: &mut Vec<u32>) {
        match self {
            Constraint::Leq(a, b) | Constraint::Eq(a, b) => {
                a.vars(out);
                b.vars(out);
            }
            Constraint::Member(_, r) => r.vars(out),
            Constraint::LeqUnlessErased(rs, a, b) => {
                rs.iter().for_each(|r| r.vars(out));
                a.vars(out);
                b.vars(out);
            }
        }
    }

    pub(crate) fn map_vars(&self, f: &mut impl FnMut(u32) -> Res) -> Constraint {
        match self {
            Constraint::Leq(a, b) => Constraint::Leq(a.map_vars(f), b.map_vars(f)),
            Constraint::Eq(a, b) => Constraint::Eq(a.map_vars(f), b.map_vars(f)),
            Constraint::Member(l, r) => Constraint::Member(l.clone(), r.map_vars(f)),
            Constraint::LeqUnlessErased(rs, a, b) => {
                Constraint::LeqUnlessErased(rs.iter().map(|r| r.map_vars(f)).collect(), a.map_vars(f), b.map_vars(f))
            }
        }
    }

    pub(crate) fn holds(&self, assign: &impl Fn(u32) -> Resource) -> bool {
        match self {
            Constraint::Leq(a, b) => a.eval(assign).leq(&b.eval(assign)),
            Constraint::Eq(a, b) => a.eval(assign) == b.eval(assign),
            Constraint::Member(l, r) => r.eval(assign).contains(l),
            Constraint::LeqUnlessErased(rs, a, b) => {
                rs.iter().any(|r| r.eval(assign).is_bottom()) || a.eval(assign).leq(&b.eval(assign))
            }
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Deferred {
    pub constraint: Constraint,
    pub span: Option<Span>,
}

/// Candidate values for a variable, largest first, so that a variable is
/// resolved greedily like a promotion and an unconstrained one becomes the
/// whole universe.
pub(crate) fn candidates(universe: &Resource) -> Vec<Resource> {
    let labels: Vec<Label> = universe.labels().into_iter().flatten().cloned().collect();
    let mut all = Resource::enumerate(&labels);
    all.reverse();
    all
}

/// Finds the first assignment (in candidate order, earlier variables varying
/// slowest) satisfying every constraint. Returns `None` if there is none.
pub(crate) fn solve(constraints: &[Deferred], vars: &[u32], universe: &Resource) -> Option<Vec<(u32, Resource)>> {
    let cands = candidates(universe);
    let index_of = |v: u32| vars.iter().position(|&w| w == v).expect("unlisted resource variable");
    // Each constraint is checked as soon as its last variable is assigned.
    let mut by_depth: Vec<Vec<&Constraint>> = vec![Vec::new(); vars.len() + 1];
    for d in constraints {
        let mut vs = Vec::new();
        d.constraint.vars(&mut vs);
        let depth = vs.into_iter().map(|v| index_of(v) + 1).max().unwrap_or(0);
        by_depth[depth].push(&d.constraint);
    }
    let mut assignment: Vec<usize> = Vec::with_capacity(vars.len());
    let lookup = |assignment: &Vec<usize>, v: u32| cands[assignment[index_of(v)]].clone();
    let ok_at = |assignment: &Vec<usize>, depth: usize| {
        by_depth[depth].iter().all(|c| c.holds(&|v| lookup(assignment, v)))
    };
    if !ok_at(&assignment, 0) {
        return None;
    }
    loop {
        if assignment.len() == vars.len() {
            return Some(vars.iter().zip(&assignment).map(|(&v, &i)| (v, cands[i].clone())).collect());
        }
        assignment.push(0);
        loop {
            if ok_at(&assignment, assignment.len()) {
                break;
            }
            // Advance to the next candidate, backtracking when exhausted.
            loop {
                let last = assignment.last_mut()?;
                *last += 1;
                if *last < cands.len() {
                    break;
                }
                assignment.pop();
                if assignment.is_empty() {
                    return None;
                }
            }
        }
    }
}
