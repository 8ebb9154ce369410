//! Typing contexts and their algebra: concatenation, scaling by a resource
//! and summation.

use indexmap::IndexMap;
use thiserror::Error;

use crate::resource::Resource;
use crate::syntax::Type;

/// One entry of a typing context.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Assumption {
    /// `x : A`, to be used exactly once.
    Linear(Type),
    /// `x : [A]_r`, usable freely within the versions in `r`.
    Graded(Type, Resource),
}

impl Assumption {
    pub fn ty(&self) -> &Type {
        match self {
            Assumption::Linear(ty) | Assumption::Graded(ty, _) => ty,
        }
    }

    pub fn grade(&self) -> Option<&Resource> {
        match self {
            Assumption::Linear(_) => None,
            Assumption::Graded(_, r) => Some(r),
        }
    }
}

/// Variables in insertion order. Equality ignores the order.
pub type TypingContext = IndexMap<String, Assumption>;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ContextError {
    #[error("linear variable `{0}` occurs in both contexts")]
    DuplicateLinear(String),
    #[error("variable `{0}` has different types in the two contexts")]
    TypeMismatch(String),
    #[error("variable `{0}` is linear, but only versioned assumptions can be scaled")]
    NotAllGraded(String),
}

/// `[Γ]`: every assumption is graded.
pub fn all_graded(g: &TypingContext) -> bool {
    g.values().all(|a| matches!(a, Assumption::Graded(..)))
}

/// `Γ1 + Γ2`. Shared graded variables have their grades added.
pub fn context_concat(g1: &TypingContext, g2: &TypingContext) -> Result<TypingContext, ContextError> {
    let mut out = g1.clone();
    for (x, a2) in g2 {
        let Some(a1) = out.get_mut(x) else {
            out.insert(x.clone(), a2.clone());
            continue;
        };
        match (&*a1, a2) {
            (Assumption::Graded(t1, r), Assumption::Graded(t2, s)) => {
                if t1 != t2 {
                    return Err(ContextError::TypeMismatch(x.clone()));
                }
                *a1 = Assumption::Graded(t1.clone(), r.plus(s));
            }
            _ => return Err(ContextError::DuplicateLinear(x.clone())),
        }
    }
    Ok(out)
}

/// `r · Γ` for an all-graded `Γ`.
pub fn context_scalar_mult(r: &Resource, g: &TypingContext) -> Result<TypingContext, ContextError> {
    g.iter()
        .map(|(x, a)| match a {
            Assumption::Graded(ty, s) => Ok((x.clone(), Assumption::Graded(ty.clone(), r.times(s)))),
            Assumption::Linear(_) => Err(ContextError::NotAllGraded(x.clone())),
        })
        .collect()
}

/// Left fold of [`context_concat`]; the empty sum is the empty context.
pub fn context_sum<'a, I>(gs: I) -> Result<TypingContext, ContextError>
where
    I: IntoIterator<Item = &'a TypingContext>,
{
    gs.into_iter()
        .try_fold(TypingContext::new(), |acc, g| context_concat(&acc, g))
}
