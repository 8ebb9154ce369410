//! The subsumption order on types and typing contexts.

use crate::context::{Assumption, TypingContext};
use crate::syntax::Type;

/// `a <: b`. A box may forget versions (`□_r A <: □_r' B` when `r' ⊑ r`);
/// arrows are contravariant in the parameter.
pub fn subtype(a: &Type, b: &Type) -> bool {
    match (a, b) {
        (Type::Int, Type::Int) => true,
        (Type::Arrow(a1, b1), Type::Arrow(a2, b2)) => subtype(a2, a1) && subtype(b1, b2),
        (Type::Box(r, a), Type::Box(s, b)) => s.leq(r) && subtype(a, b),
        _ => false,
    }
}

/// `a` may stand where `b` is assumed.
fn assumption_subtype(a: &Assumption, b: &Assumption) -> bool {
    match (a, b) {
        (Assumption::Linear(a), Assumption::Linear(b)) => subtype(a, b),
        (Assumption::Graded(a, r), Assumption::Graded(b, s)) => s.leq(r) && subtype(a, b),
        _ => false,
    }
}

/// `g1 ⊑ g2`: the same variables, where each assumption of `g2` is a
/// subtype of the one in `g1`. For graded variables this makes every grade
/// in `g1` at most the corresponding grade in `g2`.
pub fn context_leq(g1: &TypingContext, g2: &TypingContext) -> bool {
    g1.len() == g2.len()
        && g1
            .iter()
            .all(|(x, a1)| g2.get(x).is_some_and(|a2| assumption_subtype(a2, a1)))
}
