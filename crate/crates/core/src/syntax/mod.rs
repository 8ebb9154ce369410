//! Terms, types, concrete syntax and substitution.

mod parse;
mod print;
mod subst;

use std::fmt;

use crate::resource::{Label, Resource};

pub use parse::{parse, parse_with_spans, ParseError, ParseErrorKind, Span, SpanTree};
pub use subst::{free_vars, fresh_name, label_universe, subst};

/// Entries of a versioned record or computation together with the default
/// label. Entry labels are distinct and the default is one of them.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Versioned {
    pub entries: Vec<(Label, Term)>,
    pub default: Label,
}

impl Versioned {
    pub fn get(&self, label: &Label) -> Option<&Term> {
        self.entries.iter().find(|(l, _)| l == label).map(|(_, t)| t)
    }

    pub fn labels(&self) -> impl Iterator<Item = &Label> {
        self.entries.iter().map(|(l, _)| l)
    }

    pub fn map(&self, mut f: impl FnMut(&Term) -> Term) -> Versioned {
        Versioned {
            entries: self.entries.iter().map(|(l, t)| (l.clone(), f(t))).collect(),
            default: self.default.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    App(Box<Term>, Box<Term>),
    Abs(String, Box<Term>),
    Int(i64),
    /// `[t]`, optionally pinned to a resource with `[t]@{l1,l2}`.
    Promote(Box<Term>, Option<Resource>),
    /// `let [x] = t1 in t2`
    LetBox(String, Box<Term>, Box<Term>),
    /// `{l1 = t1, ..., ln = tn | lk}`
    Record(Versioned),
    /// `t.l`
    Extract(Box<Term>, Label),
    /// `<l1 = t1, ..., ln = tn | lk>`, produced only by evaluation.
    Comp(Versioned),
    Add(Box<Term>, Box<Term>),
}

impl Term {
    pub fn var(x: impl Into<String>) -> Term {
        Term::Var(x.into())
    }

    pub fn app(f: Term, a: Term) -> Term {
        Term::App(Box::new(f), Box::new(a))
    }

    pub fn abs(x: impl Into<String>, body: Term) -> Term {
        Term::Abs(x.into(), Box::new(body))
    }

    pub fn promote(body: Term) -> Term {
        Term::Promote(Box::new(body), None)
    }

    pub fn promote_at(body: Term, r: Resource) -> Term {
        Term::Promote(Box::new(body), Some(r))
    }

    pub fn let_box(x: impl Into<String>, bound: Term, body: Term) -> Term {
        Term::LetBox(x.into(), Box::new(bound), Box::new(body))
    }

    pub fn extract(t: Term, l: Label) -> Term {
        Term::Extract(Box::new(t), l)
    }

    pub fn add(a: Term, b: Term) -> Term {
        Term::Add(Box::new(a), Box::new(b))
    }

    /// Whether the term is a value: an abstraction, literal, promotion or
    /// versioned record.
    pub fn is_value(&self) -> bool {
        matches!(
            self,
            Term::Abs(..) | Term::Int(_) | Term::Promote(..) | Term::Record(_)
        )
    }

    /// Direct subterms in a fixed order (function before argument, bound
    /// side before body, record entries in order).
    pub fn children(&self) -> Vec<&Term> {
        match self {
            Term::Var(_) | Term::Int(_) => vec![],
            Term::App(a, b) | Term::LetBox(_, a, b) | Term::Add(a, b) => vec![a, b],
            Term::Abs(_, t) | Term::Promote(t, _) | Term::Extract(t, _) => vec![t],
            Term::Record(v) | Term::Comp(v) => v.entries.iter().map(|(_, t)| t).collect(),
        }
    }

    /// A copy with the `i`-th child (in `children` order) replaced.
    pub fn with_child(&self, i: usize, new: Term) -> Term {
        let pick = |j: usize, t: &Term| if i == j { new.clone() } else { t.clone() };
        match self {
            Term::Var(_) | Term::Int(_) => self.clone(),
            Term::App(a, b) => Term::app(pick(0, a), pick(1, b)),
            Term::LetBox(x, a, b) => Term::let_box(x.clone(), pick(0, a), pick(1, b)),
            Term::Add(a, b) => Term::add(pick(0, a), pick(1, b)),
            Term::Abs(x, t) => Term::abs(x.clone(), pick(0, t)),
            Term::Promote(t, r) => Term::Promote(Box::new(pick(0, t)), r.clone()),
            Term::Extract(t, l) => Term::extract(pick(0, t), l.clone()),
            Term::Record(v) | Term::Comp(v) => {
                let entries = v.entries.iter().enumerate().map(|(j, (l, t))| (l.clone(), pick(j, t))).collect();
                let v = Versioned { entries, default: v.default.clone() };
                if matches!(self, Term::Record(_)) { Term::Record(v) } else { Term::Comp(v) }
            }
        }
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        1 + self.children().into_iter().map(Term::size).sum::<usize>()
    }

    /// Length of the longest root-to-leaf path, counting nodes.
    pub fn depth(&self) -> usize {
        1 + self.children().into_iter().map(Term::depth).max().unwrap_or(0)
    }

    pub fn contains_comp(&self) -> bool {
        matches!(self, Term::Comp(_)) || self.children().into_iter().any(Term::contains_comp)
    }

    /// Drops every promotion annotation.
    pub fn erase_annotations(&self) -> Term {
        match self {
            Term::Var(_) | Term::Int(_) => self.clone(),
            Term::App(a, b) => Term::app(a.erase_annotations(), b.erase_annotations()),
            Term::Abs(x, t) => Term::abs(x.clone(), t.erase_annotations()),
            Term::Promote(t, _) => Term::promote(t.erase_annotations()),
            Term::LetBox(x, a, b) => Term::let_box(x.clone(), a.erase_annotations(), b.erase_annotations()),
            Term::Record(v) => Term::Record(v.map(Term::erase_annotations)),
            Term::Extract(t, l) => Term::extract(t.erase_annotations(), l.clone()),
            Term::Comp(v) => Term::Comp(v.map(Term::erase_annotations)),
            Term::Add(a, b) => Term::add(a.erase_annotations(), b.erase_annotations()),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print::print(self))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Type {
    Int,
    Arrow(Box<Type>, Box<Type>),
    Box(Resource, Box<Type>),
}

impl Type {
    pub fn arrow(a: Type, b: Type) -> Type {
        Type::Arrow(Box::new(a), Box::new(b))
    }

    pub fn boxed(r: Resource, a: Type) -> Type {
        Type::Box(r, Box::new(a))
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Int => f.write_str("Int"),
            Type::Arrow(a, b) => {
                if matches!(**a, Type::Arrow(..)) {
                    write!(f, "({a}) -> {b}")
                } else {
                    write!(f, "{a} -> {b}")
                }
            }
            Type::Box(r, a) => {
                if matches!(**a, Type::Arrow(..)) {
                    write!(f, "[]_{r} ({a})")
                } else {
                    write!(f, "[]_{r} {a}")
                }
            }
        }
    }
}

/// Convenience for tests and tools: `label("l1")`. Panics on an invalid name.
pub fn label(name: &str) -> Label {
    Label::new(name).unwrap_or_else(|| panic!("invalid label `{name}`"))
}
