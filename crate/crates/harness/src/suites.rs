//! Seeded, parallel suites over generated cases.

use std::collections::BTreeSet;
use std::fmt;
use std::time::{Duration, Instant};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use vl_core::eval::DEFAULT_FUEL;
use vl_core::typeck::{check, check_program};
use vl_core::{Assumption, Label, Resource, Term, Type, TypingContext};

use crate::gen::{case_rng, GenConfig, GenError, Generator};
use crate::props::{
    check_overwrite, check_preservation_under, check_progress, check_substitution, widen, CounterExample,
    PreservationFailure, PreservationLog, SubstInstance,
};
use crate::shrink::shrink;

/// Draws allowed per case before generation counts as a failure.
const DRAWS: usize = 200;

#[derive(Clone, Debug)]
pub struct Report {
    pub property: &'static str,
    pub cases: usize,
    pub seed: u64,
    pub counterexample: Option<CounterExample>,
    /// Observations worth logging that are not failures.
    pub notes: Vec<String>,
    /// Cases that break a stronger contract the calculus is known not to
    /// meet. They are reported, not counted as failures.
    pub findings: Vec<CounterExample>,
    pub elapsed: Duration,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "pass" } else { "FAIL" };
        write!(
            f,
            "{:<22} cases={:<6} {verdict}  seed={}  notes={}  findings={}  ({:.2}s)",
            self.property,
            self.cases,
            self.seed,
            self.notes.len(),
            self.findings.len(),
            self.elapsed.as_secs_f64()
        )?;
        if let Some(c) = &self.counterexample {
            write!(f, "\n  {c}")?;
        }
        if let Some(c) = self.findings.first() {
            write!(f, "\n  first finding: {c}")?;
        }
        Ok(())
    }
}

/// Per-case output that is not a failure.
pub enum Note {
    Info(String),
    Finding(CounterExample),
}

/// Runs `case` for every index in parallel. The reported counterexample is
/// the one with the smallest index, so it depends only on the seed.
fn run<F>(property: &'static str, cfg: &GenConfig, case: F) -> Report
where
    F: Fn(&mut ChaCha8Rng) -> Result<Vec<Note>, CounterExample> + Sync,
{
    let start = Instant::now();
    let results: Vec<_> = (0..cfg.cases).into_par_iter().map(|i| case(&mut case_rng(cfg.seed, i))).collect();
    let (mut notes, mut findings) = (Vec::new(), Vec::new());
    let mut counterexample = None;
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(ns) => {
                for n in ns {
                    match n {
                        Note::Info(s) => notes.push(s),
                        Note::Finding(mut c) => {
                            c.case = Some(i);
                            c.seed = cfg.seed;
                            findings.push(c);
                        }
                    }
                }
            }
            Err(mut c) if counterexample.is_none() => {
                c.case = Some(i);
                c.seed = cfg.seed;
                counterexample = Some(c);
            }
            Err(_) => {}
        }
    }
    Report { property, cases: cfg.cases, seed: cfg.seed, counterexample, notes, findings, elapsed: start.elapsed() }
}

/// Draws until generation succeeds; a rejected term is a counterexample.
fn draw<T>(mut attempt: impl FnMut() -> Result<T, GenError>) -> Result<T, CounterExample> {
    for _ in 0..DRAWS {
        match attempt() {
            Ok(v) => return Ok(v),
            Err(GenError::GenerationExhausted { .. }) => continue,
            Err(GenError::Rejected { term, message }) => {
                return Err(CounterExample::new("generator", message).with_term(&term));
            }
        }
    }
    Err(CounterExample::new("generator", format!("no case generated in {DRAWS} draws")))
}

fn closed_term(cfg: &GenConfig, rng: &mut ChaCha8Rng) -> Result<(Term, Type), CounterExample> {
    let mut gen = Generator::new(cfg, rng);
    draw(|| gen.closed(None))
}

/// Shrinks a closed counterexample among well-typed terms.
fn shrunk_closed(property: &str, t: &Term, detail: String, fails: impl Fn(&Term) -> bool) -> CounterExample {
    let small = shrink(t, |c| check_program(c).is_ok() && fails(c));
    CounterExample { shrunk: Some(small), ..CounterExample::new(property, detail).with_term(t) }
}

/// Every generated term is accepted by the checker.
pub fn generator_suite(cfg: &GenConfig) -> Report {
    run("generator", cfg, |rng| {
        let (t, ty) = closed_term(cfg, rng)?;
        match check_program(&t) {
            Ok(checked) if checked == ty => Ok(vec![]),
            Ok(checked) => Err(CounterExample::new("generator", format!("type {checked}, expected {ty}")).with_term(&t)),
            Err(d) => Err(CounterExample::new("generator", d[0].to_string()).with_term(&t)),
        }
    })
}

/// Every state along the trace of a closed well-typed term is a value or
/// steps by exactly one decomposition.
pub fn progress_suite(cfg: &GenConfig) -> Report {
    run("progress", cfg, |rng| {
        let (t, _) = closed_term(cfg, rng)?;
        let fails_somewhere = |t: &Term| progress_along(t).is_err();
        progress_along(&t).map(|_| vec![]).map_err(|e| shrunk_closed("progress", &t, e, fails_somewhere))
    })
}

fn progress_along(t: &Term) -> Result<(), String> {
    let mut current = t.clone();
    for _ in 0..DEFAULT_FUEL {
        check_progress(&current).map_err(|e| format!("at `{current}`: {e}"))?;
        match vl_core::eval::step(&current) {
            vl_core::eval::StepResult::Stepped { next, .. } => current = next,
            _ => return Ok(()),
        }
    }
    Ok(())
}

/// Typing is kept, up to subtyping, along full traces of closed terms.
pub fn preservation_suite(cfg: &GenConfig) -> Report {
    let opts = cfg.options();
    let closed = TypingContext::new();
    run("preservation", cfg, |rng| {
        let (t, _) = closed_term(cfg, rng)?;
        let log = check_preservation_under(&closed, &t, DEFAULT_FUEL, &opts).map_err(|e| {
            shrunk_closed("preservation", &t, e.to_string(), |c| {
                check_preservation_under(&closed, c, DEFAULT_FUEL, &opts).is_err()
            })
        })?;
        Ok(type_changes(&log, &t))
    })
}

/// Preservation for open terms under graded contexts. Typing must be kept
/// with every grade raised to the whole universe. A step whose reduct
/// demands more of the context is a finding: a record moved under a
/// promotion by substitution has its demands scaled by that promotion.
pub fn open_preservation_suite(cfg: &GenConfig) -> Report {
    let opts = cfg.options();
    run("preservation-open", cfg, |rng| {
        let mut gen = Generator::new(cfg, rng);
        let env = graded_env(&mut gen, "g", 3);
        let t = draw(|| {
            let target = gen.ty(1);
            gen.term_under(&env, &target)
        })?;
        let wide = widen(&env, &cfg.label_universe);
        let walk = |c: &Term| check_preservation_under(&wide, c, DEFAULT_FUEL, &opts);
        let typed = |c: &Term| check(&env, c, &opts).is_ok();
        match walk(&t) {
            Ok(log) => Ok(type_changes(&log, &t)),
            Err(PreservationFailure::DemandGrowth(e)) => {
                let grows = |c: &Term| typed(c) && matches!(walk(c), Err(PreservationFailure::DemandGrowth(_)));
                let finding = CounterExample::new("preservation-open", e).with_term(&t);
                Ok(vec![Note::Finding(CounterExample { shrunk: Some(shrink(&t, grows)), ..finding })])
            }
            Err(PreservationFailure::Typing(e)) => {
                let fails = |c: &Term| typed(c) && matches!(walk(c), Err(PreservationFailure::Typing(_)));
                let c = CounterExample::new("preservation-open", e).with_term(&t);
                Err(CounterExample { shrunk: Some(shrink(&t, fails)), ..c })
            }
        }
    })
}

fn type_changes(log: &PreservationLog, t: &Term) -> Vec<Note> {
    log.type_changes.iter().map(|(a, b)| Note::Info(format!("type {a} became {b} in `{t}`"))).collect()
}

fn graded_env<R: Rng>(gen: &mut Generator<R>, prefix: &str, max: usize) -> TypingContext {
    let n = gen.rng().gen_range(0..=max);
    (1..=n)
        .map(|i| {
            let ty = gen.ty(1);
            (format!("{prefix}{i}"), Assumption::Graded(ty, gen.resource()))
        })
        .collect()
}

fn mixed_env<R: Rng>(gen: &mut Generator<R>, prefix: &str) -> TypingContext {
    let mut env = graded_env(gen, prefix, 2);
    if gen.rng().gen_bool(0.5) {
        let ty = gen.ty(1);
        env.insert(format!("{prefix}0"), Assumption::Linear(ty));
    }
    env
}

/// Draws `t'` under `delta` and `t` under `gamma, x : assumption`, with
/// fresh types and contexts on every draw.
fn instance<R: Rng>(
    gen: &mut Generator<R>,
    mut contexts: impl FnMut(&mut Generator<R>) -> (TypingContext, TypingContext, Type, Assumption),
) -> Result<SubstInstance, CounterExample> {
    draw(|| {
        let (gamma, delta, a, assumption) = contexts(gen);
        let t_prime = gen.term_under(&delta, &a)?;
        let mut env_t = gamma.clone();
        env_t.insert("x".into(), assumption.clone());
        let target = gen.ty(1);
        let t = gen.term_under(&env_t, &target)?;
        Ok(SubstInstance { gamma, delta, x: "x".into(), assumption, t, t_prime })
    })
}

fn substitution_case(property: &'static str, inst: &SubstInstance, cfg: &GenConfig) -> Result<Vec<Note>, CounterExample> {
    match check_substitution(inst, &cfg.options()) {
        Ok(false) => Ok(vec![]),
        Ok(true) => Ok(vec![Note::Info(format!("type changed substituting `{}` into `{}`", inst.t_prime, inst.t))]),
        Err(e) => {
            let mut c = CounterExample::new(property, e).with_term(&inst.t);
            let fails = |t: &Term| {
                let smaller = SubstInstance { t: t.clone(), ..inst.clone() };
                let mut env_t = inst.gamma.clone();
                env_t.insert(inst.x.clone(), inst.assumption.clone());
                check(&env_t, t, &cfg.options()).is_ok() && check_substitution(&smaller, &cfg.options()).is_err()
            };
            c.shrunk = Some(shrink(&inst.t, fails));
            c.detail = format!("{} (substituting `{}` for {})", c.detail, inst.t_prime, inst.x);
            Err(c)
        }
    }
}

/// Substituting a well-typed term for a linear variable.
pub fn linear_substitution_suite(cfg: &GenConfig) -> Report {
    run("linear-substitution", cfg, |rng| {
        let mut gen = Generator::new(cfg, rng);
        let inst = instance(&mut gen, |gen| {
            let a = gen.ty(2);
            (mixed_env(gen, "g"), mixed_env(gen, "d"), a.clone(), Assumption::Linear(a))
        })?;
        substitution_case("linear-substitution", &inst, cfg)
    })
}

/// Substituting a term typed under an all-graded context for a variable
/// graded at `r`, checked under `Γ + r·Δ`.
pub fn graded_substitution_suite(cfg: &GenConfig) -> Report {
    run("graded-substitution", cfg, |rng| {
        let mut gen = Generator::new(cfg, rng);
        gen.allow_comp = true;
        let inst = instance(&mut gen, |gen| {
            let a = gen.ty(2);
            let r = gen.resource();
            (mixed_env(gen, "g"), graded_env(gen, "d", 2), a.clone(), Assumption::Graded(a, r))
        })?;
        substitution_case("graded-substitution", &inst, cfg)
    })
}

/// Overwriting with any label keeps a term typed under the scaled context.
pub fn overwrite_suite(cfg: &GenConfig) -> Report {
    let opts = cfg.options();
    run("overwrite-safety", cfg, |rng| {
        let mut gen = Generator::new(cfg, rng);
        gen.allow_comp = true;
        let env = graded_env(&mut gen, "g", 3);
        let t = draw(|| {
            let target = gen.ty(2);
            gen.term_under(&env, &target)
        })?;
        check_overwrite(&env, &t, &opts).map(|_| vec![]).map_err(|e| {
            let fails = |c: &Term| check(&env, c, &opts).is_ok() && check_overwrite(&env, c, &opts).is_err();
            CounterExample { shrunk: Some(shrink(&t, fails)), ..CounterExample::new("overwrite-safety", e).with_term(&t) }
        })
    })
}

type Law = (&'static str, fn(&Resource, &Resource, &Resource) -> bool);

const LAWS: &[Law] = &[
    ("plus associative", |a, b, c| a.plus(&b.plus(c)) == a.plus(b).plus(c)),
    ("plus commutative", |a, b, _| a.plus(b) == b.plus(a)),
    ("plus identity bottom", |a, _, _| a.plus(&Resource::Bottom) == *a && Resource::Bottom.plus(a) == *a),
    ("plus idempotent", |a, _, _| a.plus(a) == *a),
    ("times associative", |a, b, c| a.times(&b.times(c)) == a.times(b).times(c)),
    ("times identity empty", |a, _, _| a.times(&Resource::one()) == *a && Resource::one().times(a) == *a),
    ("times distributes left", |a, b, c| a.times(&b.plus(c)) == a.times(b).plus(&a.times(c))),
    ("times distributes right", |a, b, c| b.plus(c).times(a) == b.times(a).plus(&c.times(a))),
    ("bottom absorbs times", |a, _, _| a.times(&Resource::Bottom).is_bottom() && Resource::Bottom.times(a).is_bottom()),
    ("leq reflexive", |a, _, _| a.leq(a)),
    ("leq antisymmetric", |a, b, _| !(a.leq(b) && b.leq(a)) || a == b),
    ("leq transitive", |a, b, c| !(a.leq(b) && b.leq(c)) || a.leq(c)),
    ("bottom least", |a, _, _| Resource::Bottom.leq(a)),
    ("plus least upper bound", |a, b, c| {
        a.leq(&a.plus(b)) && b.leq(&a.plus(b)) && (!(a.leq(c) && b.leq(c)) || a.plus(b).leq(c))
    }),
    ("plus monotone", |a, b, c| !a.leq(b) || (a.plus(c).leq(&b.plus(c)) && c.plus(a).leq(&c.plus(b)))),
    ("times monotone", |a, b, c| !a.leq(b) || (a.times(c).leq(&b.times(c)) && c.times(a).leq(&c.times(b)))),
];

/// Every semiring and order law over all triples of resources drawn from
/// `universe`. Returns the number of triples.
pub fn check_semiring_laws(universe: &BTreeSet<Label>) -> Result<usize, CounterExample> {
    if universe.len() > 4 {
        return Err(CounterExample::new("semiring", "universe larger than 4 labels"));
    }
    let all = Resource::enumerate(&universe.iter().cloned().collect::<Vec<_>>());
    for a in &all {
        for b in &all {
            for c in &all {
                if let Some((name, _)) = LAWS.iter().find(|(_, law)| !law(a, b, c)) {
                    return Err(CounterExample::new("semiring", format!("{name} fails for ({a}, {b}, {c})")));
                }
            }
        }
    }
    Ok(all.len().pow(3))
}

pub fn semiring_suite(universe: &BTreeSet<Label>, seed: u64) -> Report {
    let start = Instant::now();
    let (cases, counterexample) = match check_semiring_laws(universe) {
        Ok(n) => (n, None),
        Err(c) => (0, Some(c)),
    };
    Report {
        property: "semiring",
        cases,
        seed,
        counterexample,
        notes: vec![],
        findings: vec![],
        elapsed: start.elapsed(),
    }
}

/// Every suite at `cfg`, in a fixed order.
pub fn run_all(cfg: &GenConfig) -> Vec<Report> {
    vec![
        semiring_suite(&cfg.label_universe, cfg.seed),
        generator_suite(cfg),
        progress_suite(cfg),
        preservation_suite(cfg),
        open_preservation_suite(cfg),
        linear_substitution_suite(cfg),
        graded_substitution_suite(cfg),
        overwrite_suite(cfg),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use vl_core::syntax::label;

    fn universe(ls: &[&str]) -> BTreeSet<Label> {
        ls.iter().map(|l| label(l)).collect()
    }

    #[test]
    fn semiring_triples() {
        assert_eq!(check_semiring_laws(&universe(&["l1", "l2", "l3"])), Ok(729));
        assert_eq!(check_semiring_laws(&universe(&["l1"])), Ok(27));
        assert!(Resource::Bottom.times(&Resource::singleton(label("l1"))).is_bottom());
    }

    #[test]
    fn small_suites_pass() {
        let cfg = GenConfig { cases: 40, seed: 3, ..GenConfig::default() };
        for report in run_all(&cfg) {
            assert!(report.passed(), "{report}");
        }
    }
}
