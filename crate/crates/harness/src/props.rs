//! The checked properties: progress, preservation, the substitution lemmas
//! and overwriting safety, each for a single instance.

use std::collections::BTreeSet;
use std::fmt;

use vl_core::context::{context_concat, context_scalar_mult};
use vl_core::eval::{overwrite, step, StepResult, DEFAULT_FUEL};
use vl_core::syntax::{label_universe, subst};
use vl_core::typeck::{check, subtype, DemandMap, Options, Usage};
use vl_core::{Assumption, Label, Resource, Term, Type, TypingContext};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CounterExample {
    pub property: String,
    pub case: Option<usize>,
    pub seed: u64,
    /// The failing term as generated.
    pub term: Option<Term>,
    /// A locally minimal failing term, when shrinking applies.
    pub shrunk: Option<Term>,
    pub detail: String,
}

impl CounterExample {
    pub fn new(property: &str, detail: impl Into<String>) -> Self {
        CounterExample { property: property.into(), case: None, seed: 0, term: None, shrunk: None, detail: detail.into() }
    }

    pub fn with_term(mut self, t: &Term) -> Self {
        self.term = Some(t.clone());
        self
    }
}

impl fmt::Display for CounterExample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} counterexample", self.property)?;
        if let Some(case) = self.case {
            write!(f, " (case {case}, seed {})", self.seed)?;
        }
        write!(f, ": {}", self.detail)?;
        if let Some(t) = &self.term {
            write!(f, "\n  term:   {t}")?;
        }
        if let Some(t) = &self.shrunk {
            write!(f, "\n  shrunk: {t}")?;
        }
        Ok(())
    }
}

/// Number of ways to split `t` as `E[redex]`, read directly off the
/// evaluation-context grammar. Values have none.
pub fn decompositions(t: &Term) -> usize {
    let here = match t {
        Term::App(f, _) => matches!(**f, Term::Abs(..)),
        Term::LetBox(_, bound, _) => matches!(**bound, Term::Promote(..) | Term::Record(_)),
        Term::Extract(inner, l) => match &**inner {
            Term::Promote(..) => true,
            Term::Record(v) => v.get(l).is_some(),
            _ => false,
        },
        Term::Comp(_) => true,
        Term::Add(a, b) => matches!((&**a, &**b), (Term::Int(_), Term::Int(_))),
        _ => false,
    };
    let inside = match t {
        Term::App(f, _) => decompositions(f),
        Term::LetBox(_, bound, _) => decompositions(bound),
        Term::Extract(inner, _) => decompositions(inner),
        Term::Add(a, b) => decompositions(a) + if matches!(**a, Term::Int(_)) { decompositions(b) } else { 0 },
        _ => 0,
    };
    usize::from(here) + inside
}

/// A value, or a term with exactly one decomposition that steps.
pub fn check_progress(t: &Term) -> Result<(), String> {
    let splits = decompositions(t);
    match step(t) {
        StepResult::AlreadyValue if splits == 0 => Ok(()),
        StepResult::Stepped { .. } if splits == 1 => Ok(()),
        StepResult::Stuck(reason) => Err(format!("stuck: {reason}")),
        _ => Err(format!("{splits} evaluation-context decompositions")),
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PreservationLog {
    pub steps: usize,
    /// Steps where the type changed (always to a subtype).
    pub type_changes: Vec<(Type, Type)>,
    /// Whether a value was reached within the fuel.
    pub finished: bool,
}

/// Why a preservation walk failed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PreservationFailure {
    /// A reduct is rejected or its type is not a subtype of the previous one.
    Typing(String),
    /// A reduct types, but demands more of the context than its redex did.
    DemandGrowth(String),
}

impl fmt::Display for PreservationFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PreservationFailure::Typing(s) | PreservationFailure::DemandGrowth(s) => f.write_str(s),
        }
    }
}

/// Preservation along the whole trace of a closed term, checked with the
/// term's own labels as universe.
pub fn check_preservation(t: &Term) -> Result<PreservationLog, PreservationFailure> {
    let opts = Options { universe: label_universe(t), spans: None };
    check_preservation_under(&TypingContext::new(), t, DEFAULT_FUEL, &opts)
}

/// Preservation along the trace of `t` under `env`. Each reduct must check
/// under the context its redex actually demands, so demands never grow. For
/// open terms the walk ends at the first step that needs a free variable.
pub fn check_preservation_under(
    env: &TypingContext,
    t: &Term,
    fuel: usize,
    opts: &Options,
) -> Result<PreservationLog, PreservationFailure> {
    use PreservationFailure::*;
    let mut typing = check(env, t, opts).map_err(|d| Typing(format!("initial term rejected: {}", d[0])))?;
    let mut current = t.clone();
    let mut log = PreservationLog::default();
    while log.steps < fuel {
        let next = match step(&current) {
            StepResult::AlreadyValue => {
                log.finished = true;
                return Ok(log);
            }
            StepResult::Stuck(reason) if env.is_empty() => return Err(Typing(format!("`{current}` is stuck: {reason}"))),
            StepResult::Stuck(_) => return Ok(log),
            StepResult::Stepped { next, .. } => next,
        };
        log.steps += 1;
        let demanded = demand_context(env, &typing.demands);
        let after = match check(&demanded, &next, opts) {
            Ok(after) => after,
            Err(d) => {
                return Err(match check(env, &next, opts) {
                    Ok(_) => DemandGrowth(format!(
                        "`{current}` steps to `{next}`, which does not check under the demanded context {}: {}",
                        show_context(&demanded),
                        d[0]
                    )),
                    Err(d) => Typing(format!("`{current}` : {} steps to `{next}`, which is rejected: {}", typing.ty, d[0])),
                })
            }
        };
        if !subtype(&after.ty, &typing.ty) {
            return Err(Typing(format!("`{current}` : {} steps to `{next}` : {}", typing.ty, after.ty)));
        }
        if after.ty != typing.ty {
            log.type_changes.push((typing.ty.clone(), after.ty.clone()));
        }
        typing = after;
        current = next;
    }
    Ok(log)
}

/// `env` with each graded assumption's grade replaced by its demand.
fn demand_context(env: &TypingContext, demands: &DemandMap) -> TypingContext {
    env.iter()
        .map(|(x, a)| {
            let a = match a {
                Assumption::Linear(ty) => Assumption::Linear(ty.clone()),
                Assumption::Graded(ty, _) => {
                    let d = match demands.get(x) {
                        Some(Usage::GradedUse(d)) => d.clone(),
                        _ => Resource::Bottom,
                    };
                    Assumption::Graded(ty.clone(), d)
                }
            };
            (x.clone(), a)
        })
        .collect()
}

fn show_context(g: &TypingContext) -> String {
    let parts: Vec<_> = g
        .iter()
        .map(|(x, a)| match a {
            Assumption::Linear(ty) => format!("{x} : {ty}"),
            Assumption::Graded(ty, r) => format!("{x} : [{ty}]_{r}"),
        })
        .collect();
    format!("[{}]", parts.join(", "))
}

/// `env` with every graded assumption raised to the whole universe.
pub fn widen(env: &TypingContext, universe: &BTreeSet<Label>) -> TypingContext {
    env.iter()
        .map(|(x, a)| {
            let a = match a {
                Assumption::Graded(ty, _) => Assumption::Graded(ty.clone(), Resource::from_labels(universe.iter().cloned())),
                linear => linear.clone(),
            };
            (x.clone(), a)
        })
        .collect()
}


/// One instance of a substitution lemma: `t'` fills `x` in `t`.
#[derive(Clone, Debug)]
pub struct SubstInstance {
    /// Context of `t` without `x`.
    pub gamma: TypingContext,
    /// Context of `t'`.
    pub delta: TypingContext,
    pub x: String,
    /// The assumption on `x` in `t`'s context.
    pub assumption: Assumption,
    pub t: Term,
    pub t_prime: Term,
}

/// `[t'/x]t` checks under the context the lemma predicts: `Γ + Δ` for a
/// linear `x`, `Γ + r·Δ` for `x` graded at `r`, at a subtype of `t`'s type.
/// Returns whether the type changed.
pub fn check_substitution(inst: &SubstInstance, opts: &Options) -> Result<bool, String> {
    let mut env_t = inst.gamma.clone();
    env_t.insert(inst.x.clone(), inst.assumption.clone());
    let before = check(&env_t, &inst.t, opts).map_err(|d| format!("premise for t rejected: {}", d[0]))?;
    check(&inst.delta, &inst.t_prime, opts).map_err(|d| format!("premise for t' rejected: {}", d[0]))?;
    let delta = match &inst.assumption {
        Assumption::Linear(_) => inst.delta.clone(),
        Assumption::Graded(_, r) => context_scalar_mult(r, &inst.delta).map_err(|e| e.to_string())?,
    };
    let combined = context_concat(&inst.gamma, &delta).map_err(|e| e.to_string())?;
    let result = subst(&inst.t, &inst.x, &inst.t_prime);
    let after = check(&combined, &result, opts).map_err(|d| format!("`{result}` rejected: {}", d[0]))?;
    if !subtype(&after.ty, &before.ty) {
        return Err(format!("`{result}` : {} but t : {}", after.ty, before.ty));
    }
    Ok(after.ty != before.ty)
}

/// For every label `l` of the universe, `t@l` checks under `{l}·Γ` at a
/// subtype of `t`'s type under `Γ`.
pub fn check_overwrite(env: &TypingContext, t: &Term, opts: &Options) -> Result<(), String> {
    let before = check(env, t, opts).map_err(|d| format!("premise rejected: {}", d[0]))?;
    for l in &opts.universe {
        let scaled = context_scalar_mult(&Resource::singleton(l.clone()), env).map_err(|e| e.to_string())?;
        let out = overwrite(t, l);
        let after = check(&scaled, &out, opts).map_err(|d| format!("`{out}` at {l} rejected: {}", d[0]))?;
        if !subtype(&after.ty, &before.ty) {
            return Err(format!("`{out}` at {l} : {} but t : {}", after.ty, before.ty));
        }
    }
    Ok(())
}
