//! Lazy small-step evaluation with default-version overwriting.
//!
//! Evaluation contexts are `[] | E t | E.l | let [x] = E in t | E + t | n + E`,
//! so the hole never goes under a binder, into a promotion or into record
//! entries. Application is call-by-name.

use std::fmt;

use thiserror::Error;

use crate::resource::Label;
use crate::syntax::{subst, Term, Versioned};

pub const DEFAULT_FUEL: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    EAbs,
    EClet,
    EEx1,
    EEx2,
    EVeri,
    EAdd,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::EAbs => "E-ABS",
            Rule::EClet => "E-CLET",
            Rule::EEx1 => "E-EX1",
            Rule::EEx2 => "E-EX2",
            Rule::EVeri => "E-VERI",
            Rule::EAdd => "E-ADD",
        })
    }
}

/// Which substitution a binding step performed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SubstOp {
    /// Plain substitution of the argument (β).
    Var,
    /// A promotion `[u]` bound by `let`: `u` is substituted.
    Box,
    /// A record bound by `let`: the matching versioned computation is
    /// substituted.
    Ver,
}

impl fmt::Display for SubstOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SubstOp::Var => "subst-var",
            SubstOp::Box => "subst-box",
            SubstOp::Ver => "subst-ver",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepResult {
    Stepped { next: Term, rule: Rule },
    AlreadyValue,
    Stuck(String),
}

/// One reduction with everything a trace needs to display it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub next: Term,
    pub rule: Rule,
    pub subst: Option<SubstOp>,
    /// For extractions: the label overwritten with and the whole term
    /// rendered before overwriting, as `E[(t)@l]`.
    pub overwrite: Option<(Label, String)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("evaluation did not finish within {steps} steps")]
    FuelExhausted { last: Term, steps: usize },
    #[error("evaluation is stuck at `{term}`: {reason}")]
    Stuck { term: Term, reason: String },
    #[error("`{0}` is not a versioned value")]
    NotAVersionedValue(Term),
}

/// `t@l`: rewrites the default label of every versioned computation reachable
/// without entering a promotion or a record.
pub fn overwrite(t: &Term, l: &Label) -> Term {
    match t {
        Term::Var(_) | Term::Int(_) | Term::Promote(..) | Term::Record(_) => t.clone(),
        Term::Abs(x, body) => Term::abs(x.clone(), overwrite(body, l)),
        Term::App(a, b) => Term::app(overwrite(a, l), overwrite(b, l)),
        Term::LetBox(x, a, b) => Term::let_box(x.clone(), overwrite(a, l), overwrite(b, l)),
        Term::Extract(inner, m) => Term::extract(overwrite(inner, l), m.clone()),
        Term::Add(a, b) => Term::add(overwrite(a, l), overwrite(b, l)),
        Term::Comp(v) => {
            if v.get(l).is_some() {
                Term::Comp(Versioned { entries: v.entries.clone(), default: l.clone() })
            } else {
                t.clone()
            }
        }
    }
}

/// Substitution for `let [x] = v in body`: a promotion contributes its body,
/// a record becomes a versioned computation.
pub fn subst_boxed(v: &Term, x: &str, body: &Term) -> Result<Term, EvalError> {
    subst_boxed_op(v, x, body).map(|(t, _)| t)
}

fn subst_boxed_op(v: &Term, x: &str, body: &Term) -> Result<(Term, SubstOp), EvalError> {
    match v {
        Term::Promote(u, _) => Ok((subst(body, x, u), SubstOp::Box)),
        Term::Record(entries) => Ok((subst(body, x, &Term::Comp(entries.clone())), SubstOp::Ver)),
        _ => Err(EvalError::NotAVersionedValue(v.clone())),
    }
}

pub fn step(t: &Term) -> StepResult {
    match step_detailed(t) {
        Ok(Some(s)) => StepResult::Stepped { next: s.next, rule: s.rule },
        Ok(None) => StepResult::AlreadyValue,
        Err(reason) => StepResult::Stuck(reason),
    }
}

/// `Ok(None)` for values, `Err` with a reason when stuck.
pub fn step_detailed(t: &Term) -> Result<Option<Step>, String> {
    match reduce(t)? {
        None => Ok(None),
        Some(r) => {
            let overwrite = r.pending.map(|p| {
                let hole = format!("({})@{}", p.inner, p.label);
                (p.label, crate::syntax::Term::to_string(&p.context).replacen(HOLE, &hole, 1))
            });
            Ok(Some(Step { next: r.next, rule: r.rule, subst: r.subst, overwrite }))
        }
    }
}

const HOLE: &str = "\u{1}";

struct Pending {
    label: Label,
    inner: Term,
    /// The reduct with a placeholder variable where the overwritten term goes.
    context: Term,
}

struct Reduced {
    next: Term,
    rule: Rule,
    subst: Option<SubstOp>,
    pending: Option<Pending>,
}

impl Reduced {
    fn plug(self, frame: impl Fn(Term) -> Term) -> Reduced {
        Reduced {
            next: frame(self.next),
            pending: self.pending.map(|p| Pending { context: frame(p.context), ..p }),
            ..self
        }
    }
}

fn extraction(body: &Term, l: &Label, rule: Rule) -> Reduced {
    Reduced {
        next: overwrite(body, l),
        rule,
        subst: None,
        pending: Some(Pending { label: l.clone(), inner: body.clone(), context: Term::var(HOLE) }),
    }
}

fn reduce(t: &Term) -> Result<Option<Reduced>, String> {
    let stepped = |rule, next, subst| Ok(Some(Reduced { next, rule, subst, pending: None }));
    match t {
        _ if t.is_value() => Ok(None),
        Term::Var(x) => Err(format!("free variable `{x}`")),
        Term::App(f, a) => {
            if !f.is_value() {
                let a = (**a).clone();
                return Ok(reduce(f)?.map(|r| r.plug(|n| Term::app(n, a.clone()))));
            }
            match &**f {
                Term::Abs(x, body) => stepped(Rule::EAbs, subst(body, x, a), Some(SubstOp::Var)),
                other => Err(format!("cannot apply `{other}`, which is not a function")),
            }
        }
        Term::LetBox(x, bound, body) => {
            if !bound.is_value() {
                let body = (**body).clone();
                return Ok(reduce(bound)?.map(|r| r.plug(|n| Term::let_box(x.clone(), n, body.clone()))));
            }
            let (next, op) = subst_boxed_op(bound, x, body).map_err(|e| e.to_string())?;
            stepped(Rule::EClet, next, Some(op))
        }
        Term::Extract(inner, l) => {
            if !inner.is_value() {
                return Ok(reduce(inner)?.map(|r| r.plug(|n| Term::extract(n, l.clone()))));
            }
            match &**inner {
                Term::Promote(u, _) => Ok(Some(extraction(u, l, Rule::EEx1))),
                Term::Record(v) => match v.get(l) {
                    Some(body) => Ok(Some(extraction(body, l, Rule::EEx2))),
                    None => Err(format!("record has no version {l}")),
                },
                other => Err(format!("cannot extract version {l} from `{other}`")),
            }
        }
        Term::Comp(v) => match v.get(&v.default) {
            Some(body) => Ok(Some(extraction(body, &v.default, Rule::EVeri))),
            None => Err(format!("default label {} has no entry", v.default)),
        },
        Term::Add(a, b) => {
            if !a.is_value() {
                let b = (**b).clone();
                return Ok(reduce(a)?.map(|r| r.plug(|n| Term::add(n, b.clone()))));
            }
            let Term::Int(n) = **a else {
                return Err(format!("`{a}` is not an integer"));
            };
            if !b.is_value() {
                return Ok(reduce(b)?.map(|r| r.plug(|m| Term::add(Term::Int(n), m))));
            }
            let Term::Int(m) = **b else {
                return Err(format!("`{b}` is not an integer"));
            };
            match n.checked_add(m) {
                Some(sum) => stepped(Rule::EAdd, Term::Int(sum), None),
                None => Err(format!("integer overflow in {n} + {m}")),
            }
        }
        Term::Abs(..) | Term::Int(_) | Term::Promote(..) | Term::Record(_) => unreachable!("values"),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TraceTag {
    Reduce { rule: Rule, subst: Option<SubstOp> },
    Overwrite(Label),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEntry {
    pub tag: TraceTag,
    /// The term after this entry. For a reduction that is followed by an
    /// overwrite this is already the overwritten term.
    pub term: Term,
    pub rendered: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub start: Term,
    pub entries: Vec<TraceEntry>,
    pub step_count: usize,
}

impl Trace {
    /// Rule names in order, each binding step followed by its substitution
    /// and each extraction followed by its overwrite.
    pub fn tags(&self) -> Vec<String> {
        let mut out = Vec::new();
        for e in &self.entries {
            match &e.tag {
                TraceTag::Reduce { rule, subst } => {
                    out.push(rule.to_string());
                    if let Some(op) = subst {
                        out.push(op.to_string());
                    }
                }
                TraceTag::Overwrite(l) => out.push(format!("@{l}")),
            }
        }
        out
    }

    /// The terms reached by reductions, in order.
    pub fn terms(&self) -> impl Iterator<Item = &Term> {
        self.entries.iter().filter(|e| matches!(e.tag, TraceTag::Reduce { .. })).map(|e| &e.term)
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "    {}", self.start)?;
        for e in &self.entries {
            match &e.tag {
                TraceTag::Reduce { rule, .. } => writeln!(f, "-->[{rule}] {}", e.rendered)?,
                TraceTag::Overwrite(l) => writeln!(f, "===[@{l}] {}", e.rendered)?,
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Evaluation {
    pub value: Term,
    pub steps: usize,
    pub trace: Option<Trace>,
}

/// Steps `t` (annotations erased) until it is a value, gets stuck, or `fuel`
/// steps have been taken.
pub fn evaluate(t: &Term, fuel: usize, record_trace: bool) -> Result<Evaluation, EvalError> {
    let mut current = t.erase_annotations();
    let mut trace = record_trace.then(|| Trace { start: current.clone(), entries: Vec::new(), step_count: 0 });
    let mut steps = 0;
    loop {
        let step = match step_detailed(&current) {
            Ok(None) => return Ok(Evaluation { value: current, steps, trace }),
            Ok(Some(step)) => step,
            Err(reason) => return Err(EvalError::Stuck { term: current, reason }),
        };
        if steps == fuel {
            return Err(EvalError::FuelExhausted { last: current, steps });
        }
        steps += 1;
        if let Some(trace) = &mut trace {
            trace.step_count = steps;
            let rendered = match &step.overwrite {
                Some((_, pre)) => pre.clone(),
                None => step.next.to_string(),
            };
            trace.entries.push(TraceEntry {
                tag: TraceTag::Reduce { rule: step.rule, subst: step.subst },
                term: step.next.clone(),
                rendered,
            });
            if let Some((l, _)) = &step.overwrite {
                trace.entries.push(TraceEntry {
                    tag: TraceTag::Overwrite(l.clone()),
                    term: step.next.clone(),
                    rendered: step.next.to_string(),
                });
            }
        }
        current = step.next;
    }
}
