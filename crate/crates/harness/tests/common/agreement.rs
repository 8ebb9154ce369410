//! Compares the algorithmic checker with the declarative oracle over the
//! exhaustive term space.

use rayon::prelude::*;
use vl_core::syntax::label;
use vl_core::typeck::{check, has_nested_promotion, Options};
use vl_core::{Term, TypingContext};

use super::oracle::Oracle;
use super::space::{closed_terms, LABELS};

/// Parameter types the oracle tries: at most three arrows and boxes.
pub const PARAM_CONSTRUCTORS: usize = 3;
const CHUNK: usize = 4096;

#[derive(Debug, Default)]
pub struct Agreement {
    pub terms: usize,
    pub both_accept: usize,
    pub both_reject: usize,
    /// Checker accepts, oracle rejects.
    pub unsound: Vec<Term>,
    /// Both accept, but the checker's type is not one the oracle derives.
    pub wrong_type: Vec<(Term, String)>,
    /// Checker rejects, oracle accepts, with a nested unannotated promotion.
    pub greedy_gaps: Vec<Term>,
    /// Checker rejects, oracle accepts, without one.
    pub incomplete: Vec<Term>,
}

impl Agreement {
    pub fn holds(&self) -> bool {
        self.unsound.is_empty() && self.wrong_type.is_empty() && self.incomplete.is_empty()
    }

    fn merge(mut self, other: Agreement) -> Agreement {
        self.terms += other.terms;
        self.both_accept += other.both_accept;
        self.both_reject += other.both_reject;
        self.unsound.extend(other.unsound);
        self.wrong_type.extend(other.wrong_type);
        self.greedy_gaps.extend(other.greedy_gaps);
        self.incomplete.extend(other.incomplete);
        self
    }
}

pub fn run(depth: usize, size: usize) -> Agreement {
    let terms = closed_terms(depth, size);
    let opts = Options { universe: LABELS.iter().map(|l| label(l)).collect(), spans: None };
    terms
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut oracle = Oracle::new(&LABELS, PARAM_CONSTRUCTORS);
            let mut a = Agreement::default();
            for t in chunk {
                a.terms += 1;
                match check(&TypingContext::new(), t, &opts) {
                    Ok(typing) if oracle.derives(t, &typing.ty) => a.both_accept += 1,
                    Ok(typing) if oracle.accepts(t) => a.wrong_type.push((t.clone(), typing.ty.to_string())),
                    Ok(_) => a.unsound.push(t.clone()),
                    Err(_) if !oracle.accepts(t) => a.both_reject += 1,
                    Err(_) if has_nested_promotion(t) => a.greedy_gaps.push(t.clone()),
                    Err(_) => a.incomplete.push(t.clone()),
                }
            }
            a
        })
        .reduce(Agreement::default, Agreement::merge)
}
