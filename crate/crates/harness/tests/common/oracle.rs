//! Declarative typing oracle: decides `Γ ⊢ t : A` by searching derivations
//! bottom-up, with lambda parameter types drawn from a finite set.
//!
//! Graded assumptions are monotone under (SUB) and (WEAK), so each premise
//! is checked against the largest grade the conclusion allows. Linear
//! assumptions are split between premises by free variables, so each one
//! reaches exactly one (VAR) leaf. Its type is chosen there, from the bound
//! set, and carried up to its binder with the derived type.
//!
//! Full type sets of nested lambdas are products of independent choices, so
//! whole programs are only asked whether they have some type, or a given
//! one; those questions pass through binders and bodies without building
//! the products.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::rc::Rc;

use vl_core::syntax::{free_vars, label};
use vl_core::{Resource, Term, Type};

/// Memo entries kept between top-level terms.
const MEMO_LIMIT: usize = 200_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Hyp {
    /// A lambda-bound variable, of a given type or one chosen at its use.
    Linear(Option<Type>),
    Graded(Type, Resource),
}

/// A context restricted to the free variables of the term it types.
pub type Ctx = BTreeMap<String, Hyp>;

/// Types chosen for the linear variables of a derivation, by name.
pub type Choice = BTreeMap<String, Type>;

/// One derivation result: the parameter types it chose and its type.
pub type Derived = (Choice, Type);

pub struct Oracle {
    resources: Vec<Resource>,
    top: Resource,
    params: Vec<Type>,
    memo: HashMap<(Term, Ctx), Rc<Vec<Derived>>>,
    typable: HashMap<(Term, Ctx), bool>,
    checked: HashMap<(Term, Ctx, Type), bool>,
}

impl Oracle {
    /// Resources over `labels`; parameter types with at most
    /// `max_constructors` arrows and boxes.
    pub fn new(labels: &[&str], max_constructors: usize) -> Oracle {
        let ls: Vec<_> = labels.iter().map(|l| label(l)).collect();
        let resources = Resource::enumerate(&ls);
        let top = Resource::from_labels(ls);
        let params = types_up_to(max_constructors, &resources);
        Oracle { resources, top, params, memo: HashMap::new(), typable: HashMap::new(), checked: HashMap::new() }
    }

    pub fn param_types(&self) -> &[Type] {
        &self.params
    }

    /// Whether the closed term `t` has some type.
    pub fn accepts(&mut self, t: &Term) -> bool {
        self.trim();
        self.typable(&Ctx::new(), t)
    }

    /// Whether the closed term `t` has type `a`.
    pub fn derives(&mut self, t: &Term, a: &Type) -> bool {
        self.trim();
        self.has_type(&Ctx::new(), t, a)
    }

    fn trim(&mut self) {
        if self.memo.len() + self.typable.len() + self.checked.len() > MEMO_LIMIT {
            self.memo.clear();
            self.typable.clear();
            self.checked.clear();
        }
    }

    /// Whether some derivation types `t`.
    pub fn typable(&mut self, ctx: &Ctx, t: &Term) -> bool {
        let key = (t.clone(), ctx.clone());
        if let Some(&b) = self.typable.get(&key) {
            return b;
        }
        let b = match t {
            Term::Abs(x, body) => match abs_context(ctx, x, body, None) {
                Some(inner) => self.typable(&inner, body),
                None => false,
            },
            Term::LetBox(x, bound, body) => match split(ctx, bound, body, Some(x)) {
                Some((c1, c2)) => {
                    let bounds = self.derive(&c1, bound);
                    bounds.iter().any(|(_, ty)| match ty {
                        Type::Box(r, a) => {
                            let inner = let_context(&c2, x, body, a, r);
                            self.typable(&inner, body)
                        }
                        _ => false,
                    })
                }
                None => false,
            },
            Term::Promote(body, annotation) if !has_linear(ctx) => {
                self.promotion_resources(annotation).into_iter().any(|r| {
                    let inner = self.promoted_context(ctx, &r);
                    self.typable(&inner, body)
                })
            }
            _ => !self.derive(ctx, t).is_empty(),
        };
        self.typable.insert(key, b);
        b
    }

    /// Whether some derivation types `t` at `e`.
    pub fn has_type(&mut self, ctx: &Ctx, t: &Term, e: &Type) -> bool {
        let key = (t.clone(), ctx.clone(), e.clone());
        if let Some(&b) = self.checked.get(&key) {
            return b;
        }
        let b = match (t, e) {
            (Term::Abs(x, body), Type::Arrow(a, b)) => match abs_context(ctx, x, body, Some((**a).clone())) {
                Some(inner) => self.has_type(&inner, body, b),
                None => false,
            },
            (Term::Abs(..), _) => false,
            (Term::LetBox(x, bound, body), _) => match split(ctx, bound, body, Some(x)) {
                Some((c1, c2)) => {
                    let bounds = self.derive(&c1, bound);
                    bounds.iter().any(|(_, ty)| match ty {
                        Type::Box(r, a) => {
                            let inner = let_context(&c2, x, body, a, r);
                            self.has_type(&inner, body, e)
                        }
                        _ => false,
                    })
                }
                None => false,
            },
            (Term::Promote(body, annotation), Type::Box(r, a)) => {
                !has_linear(ctx) && annotation.as_ref().map_or(true, |s| s == r) && {
                    let inner = self.promoted_context(ctx, r);
                    self.has_type(&inner, body, a)
                }
            }
            (Term::Promote(..), _) => false,
            (Term::Record(v), Type::Box(r, a)) => {
                *r == Resource::from_labels(v.labels().cloned())
                    && !has_linear(ctx)
                    && v.entries.iter().all(|(l, entry)| {
                        let inner = entry_context(ctx, l, entry);
                        self.has_type(&inner, entry, a)
                    })
            }
            (Term::Record(_), _) => false,
            (Term::App(f, a), _) => match split(ctx, f, a, None) {
                Some((cf, ca)) => {
                    let params: HashSet<Type> = self.derive(&ca, a).iter().map(|(_, ty)| ty.clone()).collect();
                    params.into_iter().any(|p| self.has_type(&cf, f, &Type::arrow(p, e.clone())))
                }
                None => false,
            },
            (Term::Extract(inner, l), _) => {
                let rs: Vec<Resource> = self.resources.iter().filter(|r| r.contains(l)).cloned().collect();
                rs.into_iter().any(|r| self.has_type(ctx, inner, &Type::boxed(r, e.clone())))
            }
            _ => self.derive(ctx, t).iter().any(|(_, ty)| ty == e),
        };
        self.checked.insert(key, b);
        b
    }

    fn promotion_resources(&self, annotation: &Option<Resource>) -> Vec<Resource> {
        match annotation {
            Some(r) => vec![r.clone()],
            None => self.resources.clone(),
        }
    }

    /// (PR): the body's grades, scaled by `r`, must fit under the
    /// conclusion's.
    fn promoted_context(&self, ctx: &Ctx, r: &Resource) -> Ctx {
        budget(ctx, |s| {
            if r.is_bottom() {
                self.top.clone()
            } else if !s.is_bottom() && r.leq(s) {
                s.clone()
            } else {
                Resource::Bottom
            }
        })
    }

    pub fn derive(&mut self, ctx: &Ctx, t: &Term) -> Rc<Vec<Derived>> {
        let key = (t.clone(), ctx.clone());
        if let Some(ds) = self.memo.get(&key) {
            return ds.clone();
        }
        let mut out = Vec::new();
        self.rules(ctx, t, &mut out);
        let mut seen = HashSet::new();
        out.retain(|d| seen.insert(d.clone()));
        let out = Rc::new(out);
        self.memo.insert(key, out.clone());
        out
    }

    fn rules(&mut self, ctx: &Ctx, t: &Term, out: &mut Vec<Derived>) {
        match t {
            Term::Int(_) => out.push((Choice::new(), Type::Int)),
            // (VAR), or (DER) then (SUB) from a grade that is not ⊥.
            Term::Var(x) => match &ctx[x] {
                Hyp::Linear(Some(a)) => out.push((Choice::new(), a.clone())),
                Hyp::Linear(None) => {
                    out.extend(self.params.iter().map(|a| ([(x.clone(), a.clone())].into(), a.clone())));
                }
                Hyp::Graded(a, s) if !s.is_bottom() => out.push((Choice::new(), a.clone())),
                Hyp::Graded(..) => {}
            },
            // (ABS)
            Term::Abs(x, body) => {
                let Some(inner) = abs_context(ctx, x, body, None) else { return };
                for (choice, b) in self.derive(&inner, body).iter() {
                    let mut choice = choice.clone();
                    let a = choice.remove(x).expect("an unannotated parameter's type is chosen at its use");
                    out.push((choice, Type::arrow(a, b.clone())));
                }
            }
            // (APP)
            Term::App(f, a) => {
                let Some((cf, ca)) = split(ctx, f, a, None) else { return };
                let args = by_type(&self.derive(&ca, a));
                for (cf, ft) in self.derive(&cf, f).iter() {
                    if let Type::Arrow(p, r) = ft {
                        for ca in args.get(&**p).into_iter().flatten() {
                            out.push((join(cf, ca), (**r).clone()));
                        }
                    }
                }
            }
            Term::Add(a, b) => {
                let Some((ca, cb)) = split(ctx, a, b, None) else { return };
                let right = self.derive(&cb, b);
                for (ca, _) in self.derive(&ca, a).iter().filter(|(_, ty)| *ty == Type::Int) {
                    for (cb, _) in right.iter().filter(|(_, ty)| *ty == Type::Int) {
                        out.push((join(ca, cb), Type::Int));
                    }
                }
            }
            // (LET)
            Term::LetBox(x, bound, body) => {
                let Some((c1, c2)) = split(ctx, bound, body, Some(x)) else { return };
                for (choice, ty) in self.derive(&c1, bound).iter() {
                    if let Type::Box(r, a) = ty {
                        let inner = let_context(&c2, x, body, a, r);
                        for (c, b) in self.derive(&inner, body).iter() {
                            out.push((join(choice, c), b.clone()));
                        }
                    }
                }
            }
            // (PR)
            Term::Promote(body, annotation) => {
                if has_linear(ctx) {
                    return;
                }
                for r in self.promotion_resources(annotation) {
                    let inner = self.promoted_context(ctx, &r);
                    for (_, a) in self.derive(&inner, body).iter() {
                        out.push((Choice::new(), Type::boxed(r.clone(), a.clone())));
                    }
                }
            }
            // (VER) and (VERI)
            Term::Record(v) | Term::Comp(v) => {
                if has_linear(ctx) {
                    return;
                }
                let mut common: Option<HashSet<Type>> = None;
                for (l, entry) in &v.entries {
                    let inner = entry_context(ctx, l, entry);
                    let tys: HashSet<Type> = self.derive(&inner, entry).iter().map(|(_, ty)| ty.clone()).collect();
                    common = Some(match common {
                        None => tys,
                        Some(c) => c.intersection(&tys).cloned().collect(),
                    });
                }
                for a in common.unwrap_or_default() {
                    let ty = match t {
                        Term::Record(_) => Type::boxed(Resource::from_labels(v.labels().cloned()), a),
                        _ => a,
                    };
                    out.push((Choice::new(), ty));
                }
            }
            // (EXTR)
            Term::Extract(inner, l) => {
                for (choice, ty) in self.derive(ctx, inner).iter() {
                    if let Type::Box(r, a) = ty {
                        if r.contains(l) {
                            out.push((choice.clone(), (**a).clone()));
                        }
                    }
                }
            }
        }
    }
}

/// The premise context whose grades are the largest that still fit under
/// the conclusion's grades once scaled, as computed by `fit`.
fn budget(ctx: &Ctx, fit: impl Fn(&Resource) -> Resource) -> Ctx {
    ctx.iter()
        .map(|(x, h)| {
            let Hyp::Graded(a, s) = h else { unreachable!("linear assumptions are rejected first") };
            (x.clone(), Hyp::Graded(a.clone(), fit(s)))
        })
        .collect()
}

/// Entry `l` of a record: grades that fit once multiplied by `{l}`.
fn entry_context(ctx: &Ctx, l: &vl_core::Label, entry: &Term) -> Ctx {
    budget(&restrict(ctx, entry, None), |s| if s.contains(l) { s.clone() } else { Resource::Bottom })
}

/// The body context of `\x. body`, or `None` if `x` is unused.
fn abs_context(ctx: &Ctx, x: &String, body: &Term, param: Option<Type>) -> Option<Ctx> {
    if !free_vars(body).contains(x) {
        return None;
    }
    let mut inner = restrict(ctx, body, Some(x));
    inner.insert(x.clone(), Hyp::Linear(param));
    Some(inner)
}

/// The body context of `let [x] = _ in body` with the bound at `□_r a`.
fn let_context(c2: &Ctx, x: &String, body: &Term, a: &Type, r: &Resource) -> Ctx {
    let mut inner = c2.clone();
    if free_vars(body).contains(x) {
        inner.insert(x.clone(), Hyp::Graded(a.clone(), r.clone()));
    }
    inner
}

fn has_linear(ctx: &Ctx) -> bool {
    ctx.values().any(|h| matches!(h, Hyp::Linear(_)))
}

/// `ctx` restricted to the free variables of `t`, minus `bound`.
fn restrict(ctx: &Ctx, t: &Term, bound: Option<&String>) -> Ctx {
    let fv = free_vars(t);
    ctx.iter()
        .filter(|(x, _)| fv.contains(*x) && Some(*x) != bound)
        .map(|(x, h)| (x.clone(), h.clone()))
        .collect()
}

/// Splits `ctx` for two premises, `x` being bound in the second. A linear
/// assumption must go to exactly one side; graded ones go to both, since
/// `⊕` is a least upper bound.
fn split(ctx: &Ctx, a: &Term, b: &Term, x: Option<&String>) -> Option<(Ctx, Ctx)> {
    let ca = restrict(ctx, a, None);
    let cb = restrict(ctx, b, x);
    for (y, h) in ctx {
        if matches!(h, Hyp::Linear(_)) && ca.contains_key(y) == cb.contains_key(y) {
            return None;
        }
    }
    Some((ca, cb))
}

/// Choices from the two sides of a split; they name disjoint variables.
fn join(a: &Choice, b: &Choice) -> Choice {
    a.iter().chain(b).map(|(x, t)| (x.clone(), t.clone())).collect()
}

fn by_type(ds: &[Derived]) -> HashMap<Type, Vec<Choice>> {
    let mut m: HashMap<Type, Vec<Choice>> = HashMap::new();
    for (c, ty) in ds {
        m.entry(ty.clone()).or_default().push(c.clone());
    }
    m
}

/// Types with at most `n` arrows and boxes, boxes ranging over `resources`.
pub fn types_up_to(n: usize, resources: &[Resource]) -> Vec<Type> {
    let mut by_size: Vec<Vec<Type>> = vec![vec![Type::Int]];
    for k in 1..=n {
        let mut level = Vec::new();
        for a in &by_size[k - 1] {
            level.extend(resources.iter().map(|r| Type::boxed(r.clone(), a.clone())));
        }
        for i in 0..k {
            for a in &by_size[i] {
                for b in &by_size[k - 1 - i] {
                    level.push(Type::arrow(a.clone(), b.clone()));
                }
            }
        }
        by_size.push(level);
    }
    by_size.concat()
}
