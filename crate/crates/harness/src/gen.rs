//! Rule-directed generation of well-typed terms.
//!
//! Terms are built top-down against a target type by choosing a typing rule
//! whose conclusion matches and generating its premises. Linear variables
//! are split between premises so each is used exactly once, and a graded
//! variable is only used where the resources accumulated since its binding
//! stay within its grade. Promotions carry annotations except where the
//! checker meets them with an expected resource (application arguments).

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vl_core::syntax::label;
use vl_core::typeck::{check_program, Options};
use vl_core::{Assumption, Label, Resource, Term, Type, TypingContext, Versioned};

/// Node visits allowed for one generation attempt.
const ATTEMPT_FUEL: usize = 1_500;
const ATTEMPTS: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenConfig {
    pub max_depth: usize,
    pub label_universe: BTreeSet<Label>,
    pub int_pool: Vec<i64>,
    pub seed: u64,
    pub cases: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_depth: 5,
            label_universe: ["l1", "l2", "l3"].into_iter().map(label).collect(),
            int_pool: vec![0, 1, 2, 3],
            seed: 0,
            cases: 1000,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.max_depth == 0 {
            return Err("max_depth must be at least 1".into());
        }
        if self.label_universe.is_empty() {
            return Err("label universe must not be empty".into());
        }
        if self.int_pool.is_empty() {
            return Err("integer pool must not be empty".into());
        }
        Ok(())
    }

    pub fn options(&self) -> Options<'static> {
        Options { universe: self.label_universe.clone(), spans: None }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum GenError {
    #[error("no term of type {target} fits within depth {depth}")]
    GenerationExhausted { target: Type, depth: usize },
    #[error("generated `{term}` but the checker rejects it: {message}")]
    Rejected { term: Term, message: String },
}

/// A graded variable with the resource its uses have been scaled by since
/// its binding.
#[derive(Clone, Debug)]
struct Graded {
    name: String,
    ty: Type,
    grade: Resource,
    scale: Resource,
}

impl Graded {
    fn usable(&self) -> bool {
        self.scale.leq(&self.grade)
    }
}

#[derive(Clone, Debug, Default)]
struct Scope {
    graded: Vec<Graded>,
}

impl Scope {
    fn scaled(&self, r: &Resource) -> Scope {
        let graded = self.graded.iter().map(|g| Graded { scale: g.scale.times(r), ..g.clone() }).collect();
        Scope { graded }
    }

    fn bind(&self, name: String, ty: Type, grade: Resource) -> Scope {
        let mut graded = self.graded.clone();
        graded.push(Graded { name, ty, grade, scale: Resource::one() });
        Scope { graded }
    }
}

type Linear = Vec<(String, Type)>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Rule {
    LinearVar,
    GradedVar,
    Lit,
    Add,
    Abs,
    App,
    Let,
    Extract,
    Promote,
    Record,
    Comp,
}

impl Rule {
    fn weight(self) -> u32 {
        match self {
            Rule::LinearVar => 8,
            Rule::GradedVar => 5,
            Rule::Lit => 3,
            Rule::Add | Rule::Comp => 2,
            Rule::Abs | Rule::App | Rule::Let | Rule::Extract | Rule::Promote | Rule::Record => 4,
        }
    }
}

pub struct Generator<'a, R> {
    cfg: &'a GenConfig,
    rng: R,
    fuel: usize,
    fresh: usize,
    labels: Vec<Label>,
    /// Also produce versioned computations, which only arise during
    /// evaluation in real programs.
    pub allow_comp: bool,
}

impl<'a, R: Rng> Generator<'a, R> {
    pub fn new(cfg: &'a GenConfig, rng: R) -> Self {
        Generator { cfg, rng, fuel: 0, fresh: 0, labels: cfg.label_universe.iter().cloned().collect(), allow_comp: false }
    }

    pub fn rng(&mut self) -> &mut R {
        &mut self.rng
    }

    /// A resource over the universe; `⊥` one time in ten.
    pub fn resource(&mut self) -> Resource {
        if self.rng.gen_ratio(1, 10) {
            return Resource::Bottom;
        }
        let labels: Vec<_> = self.labels.iter().filter(|_| self.rng.gen_bool(0.5)).cloned().collect();
        Resource::from_labels(labels)
    }

    fn label(&mut self) -> Label {
        self.labels.choose(&mut self.rng).expect("non-empty universe").clone()
    }

    /// A non-empty label set.
    fn labels_nonempty(&mut self) -> Resource {
        let first = self.label();
        let rest = self.resource();
        Resource::singleton(first).plus(&rest)
    }

    /// A small type: at most `size` constructors besides `Int`.
    pub fn ty(&mut self, size: usize) -> Type {
        if size == 0 {
            return Type::Int;
        }
        match self.rng.gen_range(0..7) {
            0..=2 => Type::Int,
            3 | 4 => {
                let r = self.resource();
                Type::boxed(r, self.ty(size - 1))
            }
            _ => {
                let split = self.rng.gen_range(0..size);
                Type::arrow(self.ty(split), self.ty(size - 1 - split))
            }
        }
    }

    fn fresh(&mut self) -> String {
        self.fresh += 1;
        format!("x{}", self.fresh)
    }

    /// A closed term of type `target` (random when absent), validated by the
    /// checker. The type returned is the checker's.
    pub fn closed(&mut self, target: Option<&Type>) -> Result<(Term, Type), GenError> {
        let target = match target {
            Some(t) => t.clone(),
            None => self.top_type(),
        };
        let t = self.term_under(&TypingContext::new(), &target)?;
        match check_program(&t) {
            Ok(ty) => Ok((t, ty)),
            Err(diags) => Err(rejected(t, &diags)),
        }
    }

    fn top_type(&mut self) -> Type {
        match self.rng.gen_range(0..6) {
            0..=2 => Type::Int,
            3 | 4 => {
                let r = self.resource();
                Type::boxed(r, Type::Int)
            }
            _ => self.ty(2),
        }
    }

    /// A term of type `target` under `env`, using every linear assumption
    /// exactly once and graded ones within their grades.
    pub fn term_under(&mut self, env: &TypingContext, target: &Type) -> Result<Term, GenError> {
        let mut scope = Scope::default();
        let mut linear = Linear::new();
        for (x, a) in env {
            match a {
                Assumption::Linear(ty) => linear.push((x.clone(), ty.clone())),
                Assumption::Graded(ty, r) => scope = scope.bind(x.clone(), ty.clone(), r.clone()),
            }
        }
        for _ in 0..ATTEMPTS {
            self.fuel = ATTEMPT_FUEL;
            if let Some(t) = self.term(&scope, &linear, target, self.cfg.max_depth) {
                return Ok(t);
            }
        }
        Err(GenError::GenerationExhausted { target: target.clone(), depth: self.cfg.max_depth })
    }

    fn term(&mut self, scope: &Scope, linear: &[(String, Type)], target: &Type, depth: usize) -> Option<Term> {
        if depth == 0 || self.fuel == 0 || linear.iter().any(|(_, t)| !consumable(t, target)) {
            return None;
        }
        self.fuel -= 1;
        let rules = self.applicable(scope, linear, target, depth);
        let order: Vec<Rule> = rules
            .choose_multiple_weighted(&mut self.rng, rules.len(), |r| r.weight())
            .expect("positive weights")
            .copied()
            .collect();
        order.into_iter().find_map(|rule| self.apply(rule, scope, linear, target, depth))
    }

    fn applicable(&self, scope: &Scope, linear: &[(String, Type)], target: &Type, depth: usize) -> Vec<Rule> {
        let mut rules = Vec::new();
        if linear.len() == 1 && linear[0].1 == *target {
            rules.push(Rule::LinearVar);
        }
        if linear.is_empty() {
            if scope.graded.iter().any(|g| g.usable() && g.ty == *target) {
                rules.push(Rule::GradedVar);
            }
            if *target == Type::Int {
                rules.push(Rule::Lit);
            }
        }
        if depth < 2 {
            return rules;
        }
        rules.extend([Rule::App, Rule::Let, Rule::Extract]);
        match target {
            Type::Int => rules.push(Rule::Add),
            Type::Arrow(..) => rules.push(Rule::Abs),
            Type::Box(r, _) if linear.is_empty() => {
                rules.push(Rule::Promote);
                if r.labels().is_some_and(|ls| !ls.is_empty() && ls.is_subset(&self.cfg.label_universe)) {
                    rules.push(Rule::Record);
                }
            }
            Type::Box(..) => {}
        }
        if self.allow_comp && linear.is_empty() {
            rules.push(Rule::Comp);
        }
        rules
    }

    fn split(&mut self, linear: &[(String, Type)]) -> (Linear, Linear) {
        linear.iter().cloned().partition(|_| self.rng.gen_bool(0.5))
    }

    fn apply(&mut self, rule: Rule, scope: &Scope, linear: &[(String, Type)], target: &Type, depth: usize) -> Option<Term> {
        let d = depth - 1;
        match rule {
            Rule::LinearVar => Some(Term::var(linear[0].0.clone())),
            Rule::GradedVar => {
                let names: Vec<_> = scope.graded.iter().filter(|g| g.usable() && g.ty == *target).map(|g| &g.name).collect();
                names.choose(&mut self.rng).map(|x| Term::var(x.as_str()))
            }
            Rule::Lit => self.cfg.int_pool.choose(&mut self.rng).map(|n| Term::Int(*n)),
            Rule::Add => {
                let (left, right) = self.split(linear);
                let a = self.term(scope, &left, &Type::Int, d)?;
                let b = self.term(scope, &right, &Type::Int, d)?;
                Some(Term::add(a, b))
            }
            Rule::Abs => {
                let Type::Arrow(param, result) = target else { return None };
                let x = self.fresh();
                let mut inner = linear.to_vec();
                inner.push((x.clone(), (**param).clone()));
                let body = self.term(scope, &inner, result, d)?;
                Some(Term::abs(x, body))
            }
            Rule::App => {
                let param = self.param_type(scope, linear, target);
                let (left, right) = self.split(linear);
                let f = self.term(scope, &left, &Type::arrow(param.clone(), target.clone()), d)?;
                let a = match &param {
                    Type::Box(r, inner) if right.is_empty() && self.rng.gen_bool(0.5) => {
                        Term::promote(self.term(&scope.scaled(r), &[], inner, d - 1)?)
                    }
                    _ => self.term(scope, &right, &param, d)?,
                };
                Some(Term::app(f, a))
            }
            Rule::Let => {
                let (r, inner) = match self.box_in_scope(scope, linear) {
                    Some((r, inner)) if self.rng.gen_bool(0.6) => (r, inner),
                    _ => {
                        let r = self.resource();
                        (r, if self.rng.gen_bool(0.4) { target.clone() } else { self.ty(1) })
                    }
                };
                let (left, right) = self.split(linear);
                let bound = self.term(scope, &left, &Type::boxed(r.clone(), inner.clone()), d)?;
                let x = self.fresh();
                let body = self.term(&scope.bind(x.clone(), inner, r), &right, target, d)?;
                Some(Term::let_box(x, bound, body))
            }
            Rule::Extract => {
                let l = self.label();
                let r = Resource::singleton(l.clone()).plus(&self.resource());
                let boxed = self.term(scope, linear, &Type::boxed(r, target.clone()), d)?;
                Some(Term::extract(boxed, l))
            }
            Rule::Promote => {
                let Type::Box(r, inner) = target else { return None };
                let body = self.term(&scope.scaled(r), &[], inner, d)?;
                Some(Term::promote_at(body, r.clone()))
            }
            Rule::Record => {
                let Type::Box(r, inner) = target else { return None };
                let labels: Vec<Label> = r.labels()?.iter().cloned().collect();
                Some(Term::Record(self.versioned(scope, &labels, inner, d)?))
            }
            Rule::Comp => {
                let labels: Vec<Label> = self.labels_nonempty().labels()?.iter().cloned().collect();
                Some(Term::Comp(self.versioned(scope, &labels, target, d)?))
            }
        }
    }

    fn versioned(&mut self, scope: &Scope, labels: &[Label], ty: &Type, depth: usize) -> Option<Versioned> {
        let mut entries = Vec::new();
        for l in labels {
            let body = self.term(&scope.scaled(&Resource::singleton(l.clone())), &[], ty, depth)?;
            entries.push((l.clone(), body));
        }
        entries.shuffle(&mut self.rng);
        let default = labels.choose(&mut self.rng)?.clone();
        Some(Versioned { entries, default })
    }

    /// The type of a box-typed variable that could be bound by `let`.
    fn box_in_scope(&mut self, scope: &Scope, linear: &[(String, Type)]) -> Option<(Resource, Type)> {
        let boxes: Vec<&Type> = linear
            .iter()
            .map(|(_, t)| t)
            .chain(scope.graded.iter().filter(|g| g.usable()).map(|g| &g.ty))
            .filter(|t| matches!(t, Type::Box(..)))
            .collect();
        match boxes.choose(&mut self.rng) {
            Some(Type::Box(r, inner)) => Some((r.clone(), (**inner).clone())),
            _ => None,
        }
    }

    /// Prefers parameter types that let an available variable be applied.
    fn param_type(&mut self, scope: &Scope, linear: &[(String, Type)], target: &Type) -> Type {
        let mut fitting: Vec<Type> = linear
            .iter()
            .map(|(_, t)| t)
            .chain(scope.graded.iter().filter(|g| g.usable()).map(|g| &g.ty))
            .filter_map(|t| match t {
                Type::Arrow(p, r) if **r == *target => Some((**p).clone()),
                _ => None,
            })
            .collect();
        if !fitting.is_empty() && self.rng.gen_bool(0.6) {
            fitting.swap_remove(self.rng.gen_range(0..fitting.len()))
        } else {
            self.ty(1)
        }
    }
}

/// Whether a linear variable of type `t` can be used up in a term of type
/// `target` without help from the context: boxes by `let`, functions by
/// application, and integers only where an integer is eventually produced.
fn consumable(t: &Type, target: &Type) -> bool {
    if t == target || matches!(t, Type::Box(..)) {
        return true;
    }
    match (t, target) {
        (_, Type::Arrow(_, result)) if consumable(t, result) => true,
        (Type::Arrow(_, result), _) => consumable(result, target),
        _ => false,
    }
}

fn rejected(term: Term, diags: &[vl_core::typeck::Diagnostic]) -> GenError {
    let message = diags.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ");
    GenError::Rejected { term, message }
}

/// The per-case generator stream: seeded by `cfg.seed`, one stream per case.
pub fn case_rng(seed: u64, case: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(case as u64);
    rng
}

/// A closed well-typed term, deterministic in `cfg.seed`.
pub fn gen_typed_term(cfg: &GenConfig, target: Option<&Type>) -> Result<(Term, Type), GenError> {
    Generator::new(cfg, case_rng(cfg.seed, 0)).closed(target)
}
