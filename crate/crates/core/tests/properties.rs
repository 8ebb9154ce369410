use std::collections::BTreeSet;

use proptest::prelude::*;
use vl_core::context::{context_concat, context_scalar_mult};
use vl_core::eval::{overwrite, step, StepResult};
use vl_core::syntax::{free_vars, label, label_universe, parse, subst};
use vl_core::typeck::{check, has_nested_promotion, infer_promotion, subtype, DiagnosticCode, Options};
use vl_core::{Assumption, Label, Resource, Term, Type, TypingContext, Versioned};

const LABELS: [&str; 3] = ["l1", "l2", "l3"];

fn universe() -> Vec<Label> {
    LABELS.iter().map(|l| label(l)).collect()
}

fn arb_label() -> impl Strategy<Value = Label> {
    prop::sample::select(LABELS.to_vec()).prop_map(label)
}

fn arb_resource() -> impl Strategy<Value = Resource> {
    prop::sample::select(Resource::enumerate(&universe()))
}

fn arb_name() -> impl Strategy<Value = String> {
    prop::sample::select(vec!["x", "y", "z"]).prop_map(String::from)
}

fn arb_versioned(inner: impl Strategy<Value = Term> + Clone) -> impl Strategy<Value = Versioned> {
    (prop::sample::subsequence(LABELS.to_vec(), 1..=3), prop::collection::vec(inner, 3), any::<prop::sample::Index>())
        .prop_map(|(ls, bodies, pick)| {
            let entries: Vec<_> = ls.iter().zip(bodies).map(|(l, t)| (label(l), t)).collect();
            let default = entries[pick.index(entries.len())].0.clone();
            Versioned { entries, default }
        })
}

/// Arbitrary terms, typed or not, optionally including versioned
/// computations.
fn arb_term(with_comp: bool) -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![(-3i64..5).prop_map(Term::Int), arb_name().prop_map(Term::Var)];
    leaf.prop_recursive(5, 40, 3, move |inner| {
        let mut options = vec![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::app(a, b)).boxed(),
            (arb_name(), inner.clone()).prop_map(|(x, b)| Term::abs(x, b)).boxed(),
            (inner.clone(), prop::option::of(arb_resource()))
                .prop_map(|(b, r)| Term::Promote(Box::new(b), r))
                .boxed(),
            (arb_name(), inner.clone(), inner.clone()).prop_map(|(x, a, b)| Term::let_box(x, a, b)).boxed(),
            arb_versioned(inner.clone()).prop_map(Term::Record).boxed(),
            (inner.clone(), arb_label()).prop_map(|(t, l)| Term::extract(t, l)).boxed(),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::add(a, b)).boxed(),
        ];
        if with_comp {
            options.push(arb_versioned(inner.clone()).prop_map(Term::Comp).boxed());
        }
        prop::strategy::Union::new(options)
    })
}

fn arb_graded_env() -> impl Strategy<Value = TypingContext> {
    (arb_resource(), arb_resource(), arb_resource()).prop_map(|(rx, ry, rz)| {
        [
            ("x", Type::Int, rx),
            ("y", Type::arrow(Type::Int, Type::Int), ry),
            ("z", Type::boxed(Resource::singleton(label("l1")), Type::Int), rz),
        ]
        .into_iter()
        .map(|(n, t, r)| (n.to_string(), Assumption::Graded(t, r)))
        .collect()
    })
}

fn full_universe() -> Options<'static> {
    Options { universe: universe().into_iter().collect(), spans: None }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn print_then_parse_is_identity(t in arb_term(false)) {
        let printed = t.to_string();
        let reparsed = parse(&printed).map_err(|e| TestCaseError::fail(format!("{printed}: {e}")))?;
        prop_assert_eq!(&reparsed, &t);
        prop_assert_eq!(reparsed.to_string(), printed);
    }

    #[test]
    fn overwrite_is_idempotent(t in arb_term(true), l in arb_label()) {
        let once = overwrite(&t, &l);
        prop_assert_eq!(overwrite(&once, &l), once.clone());
        prop_assert_eq!(once.is_value(), t.is_value());
    }

    #[test]
    fn values_never_step(t in arb_term(true)) {
        if t.is_value() {
            prop_assert_eq!(step(&t), StepResult::AlreadyValue);
        } else {
            prop_assert_ne!(step(&t), StepResult::AlreadyValue);
        }
    }

    #[test]
    fn substitution_stays_within_labels_and_variables(t in arb_term(true), s in arb_term(true), x in arb_name()) {
        let out = subst(&t, &x, &s);
        let labels: BTreeSet<_> = label_universe(&t).union(&label_universe(&s)).cloned().collect();
        prop_assert!(label_universe(&out).is_subset(&labels));
        let mut vars = free_vars(&t);
        let occurs = vars.remove(&x);
        if occurs {
            vars.extend(free_vars(&s));
        }
        prop_assert_eq!(free_vars(&out), vars);
    }

    #[test]
    fn plus_is_least_upper_bound(a in arb_resource(), b in arb_resource(), c in arb_resource()) {
        let join = a.plus(&b);
        prop_assert!(a.leq(&join) && b.leq(&join));
        prop_assert_eq!(a.leq(&c) && b.leq(&c), join.leq(&c));
        prop_assert_eq!(a.plus(&a), a.clone());
    }

    #[test]
    fn context_concat_laws(
        g1 in arb_graded_env(), g2 in arb_graded_env(), g3 in arb_graded_env(), r in arb_resource()
    ) {
        let as_map = |g: &TypingContext| g.iter().map(|(k, v)| (k.clone(), v.clone())).collect::<Vec<_>>();
        let sorted = |g: &TypingContext| { let mut v = as_map(g); v.sort_by(|a, b| a.0.cmp(&b.0)); v };
        let g12 = context_concat(&g1, &g2).unwrap();
        prop_assert_eq!(sorted(&g12), sorted(&context_concat(&g2, &g1).unwrap()));
        let left = context_concat(&g12, &g3).unwrap();
        let right = context_concat(&g1, &context_concat(&g2, &g3).unwrap()).unwrap();
        prop_assert_eq!(sorted(&left), sorted(&right));
        let scaled = context_scalar_mult(&r, &g12).unwrap();
        let split = context_concat(
            &context_scalar_mult(&r, &g1).unwrap(),
            &context_scalar_mult(&r, &g2).unwrap(),
        ).unwrap();
        prop_assert_eq!(sorted(&scaled), sorted(&split));
    }

}

// only about one in ten arbitrary terms is well typed
proptest! {
    #![proptest_config(ProptestConfig::with_cases(4096))]

    #[test]
    fn enlarging_a_grade_keeps_the_term_typable(
        env in arb_graded_env(), t in arb_term(false), var in arb_name(), extra in arb_resource()
    ) {
        // greedy choices for nested promotions are not monotone in the grades
        prop_assume!(!has_nested_promotion(&t));
        let opts = full_universe();
        let Ok(before) = check(&env, &t, &opts) else { return Ok(()) };
        let mut wider = env.clone();
        let Assumption::Graded(_, r) = &mut wider[&var] else { unreachable!() };
        *r = r.plus(&extra);
        let after = check(&wider, &t, &opts)
            .map_err(|e| TestCaseError::fail(format!("{t} rejected after enlarging {var}: {e:?}")))?;
        prop_assert!(subtype(&after.ty, &before.ty), "{} : {} then {}", t, before.ty, after.ty);
    }

    #[test]
    fn inferred_promotion_resource_is_greatest(env in arb_graded_env(), body in arb_term(false)) {
        prop_assume!(!has_nested_promotion(&Term::promote(body.clone())));
        let Ok((r, _)) = infer_promotion(&env, &body, None, None) else { return Ok(()) };
        let mut seen = label_universe(&body);
        seen.insert(label("l1"));
        for a in env.values() {
            seen.extend(a.grade().and_then(Resource::labels).into_iter().flatten().cloned());
        }
        for candidate in Resource::enumerate(&seen.into_iter().collect::<Vec<_>>()) {
            let fits = infer_promotion(&env, &body, Some(&candidate), None).is_ok();
            prop_assert_eq!(fits, candidate.leq(&r), "{} at {}: inferred {}", body, candidate, r);
        }
    }

    #[test]
    fn version_diagnostics_name_real_culprits(env in arb_graded_env(), t in arb_term(false)) {
        let Err(diags) = check(&env, &t, &full_universe()) else { return Ok(()) };
        for d in diags.iter().filter(|d| d.code == DiagnosticCode::VersionUnavailable) {
            let expected = d.expected_labels.as_ref().expect("labels");
            prop_assert!(!expected.is_empty() && !d.offending_vars.is_empty(), "{}", d);
            for (_, available) in &d.offending_vars {
                prop_assert!(expected.iter().any(|l| !available.contains(l)), "{}", d);
            }
        }
    }
}
