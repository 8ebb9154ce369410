//! Property harness: generates well-typed terms and checks type safety,
//! the substitution lemmas, overwriting safety and the semiring laws.

pub mod gen;
pub mod props;
pub mod shrink;
pub mod suites;

pub use gen::{case_rng, gen_typed_term, GenConfig, GenError, Generator};
pub use props::{check_preservation, check_progress, decompositions, CounterExample, PreservationFailure, PreservationLog};
pub use suites::{check_semiring_laws, run_all, Note, Report};
