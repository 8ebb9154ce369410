//! Algorithmic type checking.
//!
//! The checker synthesizes a type together with the *demand* placed on each
//! free variable: linear variables must be used exactly once, graded
//! variables accumulate the set of versions they are needed in. Demands are
//! validated against declared availabilities where variables are bound.
//!
//! Promotions `[t]` choose their resource as: the annotation if present, the
//! expected resource when checked against a known box (function arguments),
//! and otherwise the largest resource every variable used inside provides.

mod diagnostic;
mod solve;
mod subtype;

use std::collections::BTreeSet;

use indexmap::IndexMap;

use crate::context::{Assumption, TypingContext};
use crate::resource::{Label, Resource};
use crate::syntax::{label_universe, Span, SpanTree, Term, Type, Versioned};

pub use diagnostic::{Diagnostic, DiagnosticCode};
pub use subtype::{context_leq, subtype};

use solve::{Constraint, Deferred, Res};

/// How a term uses one of its free variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Usage {
    /// Exactly once, outside any promotion or record.
    LinearUse,
    /// Needed in (at least) the given versions; never `⊥`.
    GradedUse(Resource),
}

pub type DemandMap = IndexMap<String, Usage>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Typing {
    pub ty: Type,
    pub demands: DemandMap,
}

#[derive(Clone, Debug, Default)]
pub struct Options<'a> {
    /// Labels closed promotions may range over, in addition to those the
    /// term mentions itself.
    pub universe: BTreeSet<Label>,
    pub spans: Option<&'a SpanTree>,
}

/// Types a closed program.
pub fn check_program(t: &Term) -> Result<Type, Vec<Diagnostic>> {
    check(&TypingContext::new(), t, &Options::default()).map(|typing| typing.ty)
}

/// `env ⊢ t : A`. Linear assumptions must be used exactly once and graded
/// ones within their declared grade.
pub fn check(env: &TypingContext, t: &Term, opts: &Options) -> Result<Typing, Vec<Diagnostic>> {
    let mut c = Checker::new(env, t, opts);
    let (ty, demands) = c.infer(t, opts.spans);
    c.validate_env(env, &demands);
    c.finish(&ty, &demands)
}

/// Synthesizes the type of `t` and the demand on each free variable, without
/// checking those demands against `env`.
pub fn infer(env: &TypingContext, t: &Term) -> Result<(Type, DemandMap), Diagnostic> {
    let mut c = Checker::new(env, t, &Options::default());
    let (ty, demands) = c.infer(t, None);
    c.finish(&ty, &demands)
        .map(|typing| (typing.ty, typing.demands))
        .map_err(first)
}

/// Chooses the resource of `[body]` and returns it with the demands the
/// promotion places on its free variables.
pub fn infer_promotion(
    env: &TypingContext,
    body: &Term,
    annotation: Option<&Resource>,
    expected: Option<&Resource>,
) -> Result<(Resource, DemandMap), Diagnostic> {
    let mut c = Checker::new(env, body, &Options::default());
    let out = c.promotion(body, annotation, expected.cloned().map(Res::Known), None);
    let r = out.r.clone();
    let holder = Ty::Boxed(r, Box::new(out.ty));
    c.finish(&holder, &out.demands).map_err(first).map(|typing| match typing.ty {
        Type::Box(r, _) => (r, typing.demands),
        _ => unreachable!("promotion types are boxes"),
    })
}

fn first(mut diags: Vec<Diagnostic>) -> Diagnostic {
    diags.swap_remove(0)
}

#[derive(Clone, Debug)]
enum Ty {
    Int,
    Arrow(Box<Ty>, Box<Ty>),
    Boxed(Res, Box<Ty>),
    Meta(u32),
    /// Stands in after a reported error so that it does not cascade.
    Error,
}

impl Ty {
    fn from_type(t: &Type) -> Ty {
        match t {
            Type::Int => Ty::Int,
            Type::Arrow(a, b) => Ty::Arrow(Box::new(Ty::from_type(a)), Box::new(Ty::from_type(b))),
            Type::Box(r, a) => Ty::Boxed(Res::Known(r.clone()), Box::new(Ty::from_type(a))),
        }
    }
}

#[derive(Clone, Debug)]
enum Dem {
    Linear,
    Graded(Res),
}

type Demands = IndexMap<String, Dem>;

struct Binding {
    name: String,
    ty: Ty,
    /// `None` for linear variables, otherwise the declared availability.
    grade: Option<Res>,
    /// Promotions enclosing the binder.
    depth: usize,
}

#[derive(Clone, Debug)]
enum RVar {
    Root,
    Link(u32),
    Bound(Resource),
}

struct Promoted {
    ty: Ty,
    r: Res,
    demands: Demands,
    /// Graded variables used inside, with their declared availability.
    used: Vec<(String, Res)>,
}

struct Checker {
    metas: Vec<Option<Ty>>,
    rvars: Vec<RVar>,
    deferred: Vec<Deferred>,
    diags: Vec<Diagnostic>,
    universe: Resource,
    env: Vec<Binding>,
    /// Resources of the promotions enclosing the term being inferred, where
    /// known before their bodies are checked.
    scales: Vec<Option<Res>>,
}

impl Checker {
    fn new(env: &TypingContext, t: &Term, opts: &Options) -> Checker {
        let mut labels = label_universe(t);
        labels.extend(opts.universe.iter().cloned());
        for a in env.values() {
            collect_type_labels(a.ty(), &mut labels);
            if let Some(r) = a.grade() {
                labels.extend(r.labels().into_iter().flatten().cloned());
            }
        }
        let mut c = Checker {
            metas: Vec::new(),
            rvars: Vec::new(),
            deferred: Vec::new(),
            diags: Vec::new(),
            universe: Resource::Labels(labels),
            env: Vec::new(),
            scales: Vec::new(),
        };
        for (x, a) in env {
            c.env.push(Binding {
                name: x.clone(),
                ty: Ty::from_type(a.ty()),
                grade: a.grade().cloned().map(Res::Known),
                depth: 0,
            });
        }
        c
    }

    fn error(&mut self, code: DiagnosticCode, message: impl Into<String>, span: Option<Span>) {
        self.diags.push(Diagnostic::new(code, message, span));
    }

    fn fresh_meta(&mut self) -> Ty {
        self.metas.push(None);
        Ty::Meta(self.metas.len() as u32 - 1)
    }

    fn fresh_rvar(&mut self) -> Res {
        self.rvars.push(RVar::Root);
        Res::Var(self.rvars.len() as u32 - 1)
    }

    fn find(&self, mut v: u32) -> u32 {
        while let RVar::Link(w) = self.rvars[v as usize] {
            v = w;
        }
        v
    }

    fn norm(&self, r: &Res) -> Res {
        r.map_vars(&mut |v| {
            let root = self.find(v);
            match &self.rvars[root as usize] {
                RVar::Bound(k) => Res::Known(k.clone()),
                _ => Res::Var(root),
            }
        })
    }

    fn resolve(&self, t: &Ty) -> Ty {
        let mut t = t.clone();
        while let Ty::Meta(m) = t {
            match &self.metas[m as usize] {
                Some(next) => t = next.clone(),
                None => break,
            }
        }
        t
    }

    fn occurs(&self, m: u32, t: &Ty) -> bool {
        match self.resolve(t) {
            Ty::Meta(n) => n == m,
            Ty::Arrow(a, b) => self.occurs(m, &a) || self.occurs(m, &b),
            Ty::Boxed(_, a) => self.occurs(m, &a),
            Ty::Int | Ty::Error => false,
        }
    }

    fn unify_res(&mut self, a: &Res, b: &Res, span: Option<Span>) -> bool {
        match (self.norm(a), self.norm(b)) {
            (Res::Known(x), Res::Known(y)) => x == y,
            (Res::Var(v), Res::Var(w)) => {
                if v != w {
                    self.rvars[v as usize] = RVar::Link(w);
                }
                true
            }
            (Res::Var(v), Res::Known(k)) | (Res::Known(k), Res::Var(v)) => {
                self.rvars[v as usize] = RVar::Bound(k);
                true
            }
            (a, b) => {
                self.deferred.push(Deferred { constraint: Constraint::Eq(a, b), span });
                true
            }
        }
    }

    fn unify(&mut self, a: &Ty, b: &Ty, span: Option<Span>) -> bool {
        match (self.resolve(a), self.resolve(b)) {
            (Ty::Error, _) | (_, Ty::Error) => true,
            (Ty::Meta(m), Ty::Meta(n)) if m == n => true,
            (Ty::Meta(m), t) | (t, Ty::Meta(m)) => {
                if self.occurs(m, &t) {
                    return false;
                }
                self.metas[m as usize] = Some(t);
                true
            }
            (Ty::Int, Ty::Int) => true,
            (Ty::Arrow(a1, b1), Ty::Arrow(a2, b2)) => self.unify(&a1, &a2, span) && self.unify(&b1, &b2, span),
            (Ty::Boxed(r, a), Ty::Boxed(s, b)) => self.unify_res(&r, &s, span) && self.unify(&a, &b, span),
            _ => false,
        }
    }

    fn unify_or_report(&mut self, expected: &Ty, found: &Ty, span: Option<Span>, what: &str) {
        if !self.unify(expected, found, span) {
            let message = format!("{what}: expected {}, found {}", self.show(expected), self.show(found));
            self.error(DiagnosticCode::TypeMismatch, message, span);
        }
    }

    fn show(&self, t: &Ty) -> String {
        match self.resolve(t) {
            Ty::Int => "Int".into(),
            Ty::Error => "?".into(),
            Ty::Meta(m) => format!("?t{m}"),
            Ty::Arrow(a, b) => {
                let a_s = self.show(&a);
                if matches!(self.resolve(&a), Ty::Arrow(..)) {
                    format!("({a_s}) -> {}", self.show(&b))
                } else {
                    format!("{a_s} -> {}", self.show(&b))
                }
            }
            Ty::Boxed(r, a) => {
                let r_s = match self.norm(&r) {
                    Res::Known(k) => k.to_string(),
                    _ => "?r".into(),
                };
                if matches!(self.resolve(&a), Ty::Arrow(..)) {
                    format!("[]_{r_s} ({})", self.show(&a))
                } else {
                    format!("[]_{r_s} {}", self.show(&a))
                }
            }
        }
    }

    fn lookup(&self, x: &str) -> Option<&Binding> {
        self.env.iter().rev().find(|b| b.name == x)
    }

    fn merge(&mut self, mut a: Demands, b: Demands, span: Option<Span>) -> Demands {
        for (x, db) in b {
            match a.get_mut(&x) {
                None => {
                    a.insert(x, db);
                }
                Some(da) => match (&*da, db) {
                    (Dem::Graded(r), Dem::Graded(s)) => *da = Dem::Graded(Res::plus(r.clone(), s)),
                    _ => {
                        *da = Dem::Linear;
                        let message = format!("linear variable `{x}` is used more than once");
                        self.error(DiagnosticCode::LinearityViolation, message, span);
                    }
                },
            }
        }
        a
    }

    fn infer(&mut self, t: &Term, sp: Option<&SpanTree>) -> (Ty, Demands) {
        let span = sp.map(|s| s.span);
        let child = |i: usize| sp.and_then(|s| s.child(i));
        match t {
            Term::Int(_) => (Ty::Int, Demands::new()),
            Term::Var(x) => match self.lookup(x) {
                None => {
                    self.error(DiagnosticCode::UnknownVariable, format!("unknown variable `{x}`"), span);
                    (Ty::Error, Demands::new())
                }
                Some(b) => {
                    let dem = match b.grade {
                        None => Dem::Linear,
                        Some(_) => Dem::Graded(Res::Known(Resource::one())),
                    };
                    (b.ty.clone(), Demands::from([(x.clone(), dem)]))
                }
            },
            Term::App(f, a) => {
                let (tf, df) = self.infer(f, child(0));
                let (param, result) = match self.resolve(&tf) {
                    Ty::Arrow(p, r) => (*p, *r),
                    Ty::Meta(_) => {
                        let (p, r) = (self.fresh_meta(), self.fresh_meta());
                        self.unify(&tf, &Ty::Arrow(Box::new(p.clone()), Box::new(r.clone())), span);
                        (p, r)
                    }
                    Ty::Error => (Ty::Error, Ty::Error),
                    other => {
                        let message = format!("expected a function, found {}", self.show(&other));
                        self.error(DiagnosticCode::TypeMismatch, message, child(0).map(|s| s.span));
                        (Ty::Error, Ty::Error)
                    }
                };
                let (ta, da) = match (&**a, self.resolve(&param)) {
                    (Term::Promote(body, None), Ty::Boxed(r, _)) => {
                        let out = self.promotion(body, None, Some(r), child(1));
                        (out.ty, out.demands)
                    }
                    // the parameter is not known yet: its resource is left to unification
                    (Term::Promote(body, None), Ty::Meta(_)) => {
                        let r = self.fresh_rvar();
                        let boxed = Ty::Boxed(r.clone(), Box::new(self.fresh_meta()));
                        self.unify(&param, &boxed, span);
                        let out = self.promotion(body, None, Some(r), child(1));
                        (out.ty, out.demands)
                    }
                    _ => self.infer(a, child(1)),
                };
                self.unify_or_report(&param, &ta, child(1).map(|s| s.span), "argument type");
                (result, self.merge(df, da, span))
            }
            Term::Add(a, b) => {
                let (ta, da) = self.infer(a, child(0));
                self.unify_or_report(&Ty::Int, &ta, child(0).map(|s| s.span), "operand of `+`");
                let (tb, db) = self.infer(b, child(1));
                self.unify_or_report(&Ty::Int, &tb, child(1).map(|s| s.span), "operand of `+`");
                (Ty::Int, self.merge(da, db, span))
            }
            Term::Abs(x, body) => {
                let param = self.fresh_meta();
                self.env.push(Binding { name: x.clone(), ty: param.clone(), grade: None, depth: self.scales.len() });
                let (tb, mut db) = self.infer(body, child(0));
                self.env.pop();
                match db.shift_remove(x) {
                    Some(Dem::Linear) => {}
                    Some(Dem::Graded(_)) => unreachable!("lambda-bound variables only produce linear demand"),
                    None => {
                        let message = format!("`{x}` is bound by a lambda but never used; it must be used exactly once");
                        self.error(DiagnosticCode::LinearityViolation, message, span);
                    }
                }
                (Ty::Arrow(Box::new(param), Box::new(tb)), db)
            }
            Term::LetBox(x, bound, body) => {
                let (tb, d1) = self.infer(bound, child(0));
                let (r, inner) = match self.resolve(&tb) {
                    Ty::Boxed(r, a) => (r, *a),
                    Ty::Meta(_) => {
                        let (r, a) = (self.fresh_rvar(), self.fresh_meta());
                        self.unify(&tb, &Ty::Boxed(r.clone(), Box::new(a.clone())), span);
                        (r, a)
                    }
                    Ty::Error => (Res::Known(self.universe.clone()), Ty::Error),
                    other => {
                        let message = format!("`let [{x}]` needs a versioned value, found {}", self.show(&other));
                        self.error(DiagnosticCode::NotAVersionedValue, message, child(0).map(|s| s.span));
                        (Res::Known(self.universe.clone()), Ty::Error)
                    }
                };
                self.env.push(Binding { name: x.clone(), ty: inner, grade: Some(r.clone()), depth: self.scales.len() });
                let (ty, mut d2) = self.infer(body, child(1));
                self.env.pop();
                if let Some(Dem::Graded(d)) = d2.shift_remove(x) {
                    self.require_within(x, &d, &r, span);
                }
                (ty, self.merge(d1, d2, span))
            }
            Term::Promote(body, annotation) => {
                let out = self.promotion(body, annotation.as_ref(), None, sp);
                (out.ty, out.demands)
            }
            Term::Extract(inner, l) => {
                let (ty, demands, used) = match &**inner {
                    Term::Promote(body, annotation) => {
                        let out = self.promotion(body, annotation.as_ref(), None, child(0));
                        (out.ty, out.demands, Some(out.used))
                    }
                    _ => {
                        let (ty, d) = self.infer(inner, child(0));
                        (ty, d, None)
                    }
                };
                let result = match self.resolve(&ty) {
                    Ty::Boxed(r, a) => {
                        self.require_member(l, &r, used.as_deref(), span);
                        *a
                    }
                    Ty::Meta(_) => {
                        let (r, a) = (self.fresh_rvar(), self.fresh_meta());
                        self.unify(&ty, &Ty::Boxed(r.clone(), Box::new(a.clone())), span);
                        self.require_member(l, &r, None, span);
                        a
                    }
                    Ty::Error => Ty::Error,
                    other => {
                        let message = format!("cannot extract version {l} from a value of type {}", self.show(&other));
                        self.error(DiagnosticCode::NotAVersionedValue, message, child(0).map(|s| s.span));
                        Ty::Error
                    }
                };
                (result, demands)
            }
            Term::Record(v) => {
                let (ty, d) = self.versioned(v, sp, "versioned record");
                let labels = Resource::from_labels(v.labels().cloned());
                (Ty::Boxed(Res::Known(labels), Box::new(ty)), d)
            }
            Term::Comp(v) => self.versioned(v, sp, "versioned computation"),
        }
    }

    /// Entries share one type; each entry's demands are scaled by its label.
    fn versioned(&mut self, v: &Versioned, sp: Option<&SpanTree>, what: &str) -> (Ty, Demands) {
        let span = sp.map(|s| s.span);
        let mut common: Option<Ty> = None;
        let mut total = Demands::new();
        for (i, (l, t)) in v.entries.iter().enumerate() {
            let esp = sp.and_then(|s| s.child(i));
            let (ty, d) = self.infer(t, esp);
            let mut scaled = Demands::new();
            for (x, dem) in d {
                match dem {
                    Dem::Linear => {
                        let message = format!("linear variable `{x}` cannot be used inside a {what}");
                        self.error(DiagnosticCode::LinearityViolation, message, esp.map(|s| s.span));
                        scaled.insert(x, Dem::Linear);
                    }
                    Dem::Graded(r) => {
                        scaled.insert(x, Dem::Graded(Res::times(Res::Known(Resource::singleton(l.clone())), r)));
                    }
                }
            }
            total = self.merge(total, scaled, span);
            match &common {
                None => common = Some(ty),
                Some(a) => {
                    let a = a.clone();
                    self.unify_or_report(&a, &ty, esp.map(|s| s.span), &format!("entry `{l}` of {what}"));
                }
            }
        }
        let ty = match common {
            Some(t) => t,
            None => self.fresh_meta(),
        };
        (ty, total)
    }

    fn promotion(&mut self, body: &Term, annotation: Option<&Resource>, expected: Option<Res>, sp: Option<&SpanTree>) -> Promoted {
        let span = sp.map(|s| s.span);
        let chosen = annotation.cloned().map(Res::Known).or(expected);
        self.scales.push(chosen.clone());
        let (ty, d) = self.infer(body, sp.and_then(|s| s.child(0)));
        self.scales.pop();
        let mut demands = Demands::new();
        let mut inner = Vec::new();
        for (x, dem) in d {
            match dem {
                Dem::Linear => {
                    let message = format!("linear variable `{x}` cannot be used inside a promotion");
                    self.error(DiagnosticCode::LinearityViolation, message, span);
                    demands.insert(x, Dem::Linear);
                }
                Dem::Graded(dx) => {
                    let b = self.lookup(&x).expect("graded demand on a bound variable");
                    let avail = b.grade.clone().expect("graded demand on a graded variable");
                    let mut erased = false;
                    let mut unknown = Vec::new();
                    for r in self.scales[b.depth..].iter().flatten() {
                        match self.norm(r) {
                            Res::Known(Resource::Bottom) => erased = true,
                            Res::Known(_) => {}
                            r => unknown.push(r),
                        }
                    }
                    inner.push((x, self.norm(&dx), self.norm(&avail), erased, unknown));
                }
            }
        }
        let used: Vec<(String, Res)> = inner
            .iter()
            .filter(|(_, d, ..)| !matches!(d, Res::Known(Resource::Bottom)))
            .map(|(x, _, a, ..)| (x.clone(), a.clone()))
            .collect();
        let greedy = chosen.is_none();
        let r = match chosen {
            Some(r) => self.norm(&r),
            None => {
                let pairs = inner.iter().map(|(_, d, a, ..)| (d.clone(), a.clone())).collect();
                Res::greedy(pairs, &self.universe)
            }
        };
        let mut offending: Vec<(String, Resource, Label)> = Vec::new();
        // An enclosing ⊥ promotion erases the demand, so it is not checked
        // here; the binder checks the final demand in every case. Enclosing
        // promotions of unknown resource defer the check until solved.
        for (x, dx, avail, erased, unknown) in inner {
            let out = Res::times(r.clone(), dx);
            let mut granted = out.clone();
            if !greedy && !erased && !unknown.is_empty() {
                let constraint = Constraint::LeqUnlessErased(unknown, out.clone(), avail.clone());
                self.deferred.push(Deferred { constraint, span });
            } else if !greedy && !erased {
                match (&out, &avail) {
                    (Res::Known(o), Res::Known(a)) => {
                        if !o.leq(a) {
                            if let Some(l) = o.missing_from(a).into_iter().next() {
                                offending.push((x.clone(), a.clone(), l));
                            } else {
                                let message = format!("`{x}` is used inside a promotion but is available in no version");
                                self.error(DiagnosticCode::EmptyIntersection, message, span);
                            }
                            granted = avail.clone();
                        }
                    }
                    _ => self.deferred.push(Deferred { constraint: Constraint::Leq(out, avail.clone()), span }),
                }
            }
            demands.insert(x, Dem::Graded(granted));
        }
        if let Some((_, _, l)) = offending.first() {
            let l = l.clone();
            let names: Vec<String> = used.iter().map(|(x, _)| x.clone()).collect();
            let culprits = offending
                .into_iter()
                .filter(|(_, a, _)| !a.contains(&l))
                .map(|(x, a, _)| (x, a))
                .collect();
            self.diags.push(Diagnostic::version_unavailable(&names, &l, culprits, span));
        }
        Promoted { ty: Ty::Boxed(r.clone(), Box::new(ty)), r, demands, used }
    }

    /// A `let`-bound variable's demand must fit its declared availability.
    fn require_within(&mut self, x: &str, d: &Res, r: &Res, span: Option<Span>) {
        match (self.norm(d), self.norm(r)) {
            (Res::Known(d), Res::Known(r)) => {
                if d.leq(&r) {
                    return;
                }
                match d.missing_from(&r).into_iter().next() {
                    Some(l) => {
                        let names = [x.to_string()];
                        self.diags.push(Diagnostic::version_unavailable(&names, &l, vec![(x.into(), r)], span));
                    }
                    None => {
                        let message = format!("`{x}` is bound to a value available in no version, but it is used");
                        self.error(DiagnosticCode::EmptyIntersection, message, span);
                    }
                }
            }
            (d, r) => self.deferred.push(Deferred { constraint: Constraint::Leq(d, r), span }),
        }
    }

    /// `l ∈ r` for an extraction. `used` lists the variables of a promotion
    /// being extracted directly, which lets the error name the culprits.
    fn require_member(&mut self, l: &Label, r: &Res, used: Option<&[(String, Res)]>, span: Option<Span>) {
        let r = match self.norm(r) {
            Res::Known(r) => r,
            other => {
                self.deferred.push(Deferred { constraint: Constraint::Member(l.clone(), other), span });
                return;
            }
        };
        if r.contains(l) {
            return;
        }
        let used: Vec<(String, Res)> = used.unwrap_or_default().iter().map(|(x, a)| (x.clone(), self.norm(a))).collect();
        let culprits: Vec<(String, Resource)> = used
            .iter()
            .filter_map(|(x, a)| match a {
                Res::Known(a) if !a.contains(l) => Some((x.clone(), a.clone())),
                _ => None,
            })
            .collect();
        if culprits.is_empty() {
            let message = format!("version {l} is not available: the value is only available in {r}");
            let mut d = Diagnostic::new(DiagnosticCode::EmptyIntersection, message, span);
            d.expected_labels = Some(BTreeSet::from([l.clone()]));
            self.diags.push(d);
        } else {
            let names: Vec<String> = used.into_iter().map(|(x, _)| x).collect();
            self.diags.push(Diagnostic::version_unavailable(&names, l, culprits, span));
        }
    }

    fn validate_env(&mut self, env: &TypingContext, demands: &Demands) {
        for (x, a) in env {
            match (a, demands.get(x)) {
                (Assumption::Linear(_), Some(Dem::Linear)) => {}
                (Assumption::Linear(_), _) => {
                    let message = format!("linear assumption `{x}` is not used exactly once");
                    self.error(DiagnosticCode::LinearityViolation, message, None);
                }
                (Assumption::Graded(_, r), Some(Dem::Graded(d))) => {
                    let d = d.clone();
                    self.require_within(x, &d, &Res::Known(r.clone()), None);
                }
                (Assumption::Graded(..), _) => {}
            }
        }
    }

    fn finish(mut self, ty: &Ty, demands: &Demands) -> Result<Typing, Vec<Diagnostic>> {
        if !self.diags.is_empty() {
            return Err(self.diags);
        }
        let deferred: Vec<Deferred> = self
            .deferred
            .iter()
            .map(|d| Deferred { constraint: d.constraint.map_vars(&mut |v| self.norm(&Res::Var(v))), span: d.span })
            .collect();
        let mut vars = Vec::new();
        for d in &deferred {
            d.constraint.vars(&mut vars);
        }
        let Some(solution) = solve::solve(&deferred, &vars, &self.universe) else {
            let span = deferred
                .iter()
                .find(|d| solve::solve(std::slice::from_ref(d), &vars, &self.universe).is_none())
                .or(deferred.last())
                .and_then(|d| d.span);
            self.error(
                DiagnosticCode::EmptyIntersection,
                "no assignment of versions satisfies every use in the program",
                span,
            );
            return Err(self.diags);
        };
        let fallback = solve::candidates(&self.universe)[0].clone();
        let assign = |v: u32| {
            let root = self.find(v);
            if let RVar::Bound(k) = &self.rvars[root as usize] {
                return k.clone();
            }
            solution
                .iter()
                .find(|(w, _)| *w == root)
                .map(|(_, r)| r.clone())
                .unwrap_or_else(|| fallback.clone())
        };
        let ty = self.zonk(ty, &assign);
        let demands = demands
            .iter()
            .filter_map(|(x, d)| match d {
                Dem::Linear => Some((x.clone(), Usage::LinearUse)),
                Dem::Graded(r) => match r.eval(&assign) {
                    Resource::Bottom => None,
                    r => Some((x.clone(), Usage::GradedUse(r))),
                },
            })
            .collect();
        Ok(Typing { ty, demands })
    }

    fn zonk(&self, t: &Ty, assign: &impl Fn(u32) -> Resource) -> Type {
        match self.resolve(t) {
            Ty::Int | Ty::Meta(_) | Ty::Error => Type::Int,
            Ty::Arrow(a, b) => Type::arrow(self.zonk(&a, assign), self.zonk(&b, assign)),
            Ty::Boxed(r, a) => Type::boxed(r.eval(assign), self.zonk(&a, assign)),
        }
    }
}

fn collect_type_labels(t: &Type, out: &mut BTreeSet<Label>) {
    match t {
        Type::Int => {}
        Type::Arrow(a, b) => {
            collect_type_labels(a, out);
            collect_type_labels(b, out);
        }
        Type::Box(r, a) => {
            out.extend(r.labels().into_iter().flatten().cloned());
            collect_type_labels(a, out);
        }
    }
}

/// Whether `t` has an unannotated promotion inside another promotion or a
/// record entry. The checker's local choice of promotion resources can be
/// too eager for such terms.
pub fn has_nested_promotion(t: &Term) -> bool {
    fn go(t: &Term, inside: bool) -> bool {
        match t {
            Term::Promote(body, ann) => (inside && ann.is_none()) || go(body, true),
            Term::Record(v) | Term::Comp(v) => v.entries.iter().any(|(_, e)| go(e, true)),
            _ => t.children().into_iter().any(|c| go(c, inside)),
        }
    }
    go(t, false)
}
