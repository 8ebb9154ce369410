//! Type safety over every well-typed term of the small exhaustive space.

mod common;

use common::space::closed_terms;
use vl_core::typeck::check_program;
use vl_harness::{check_preservation, check_progress, decompositions};

#[test]
fn small_space_is_type_safe() {
    let mut typed = 0;
    for t in closed_terms(4, 7) {
        if check_program(&t).is_err() {
            continue;
        }
        typed += 1;
        assert!(decompositions(&t) <= 1, "{t} decomposes more than once");
        check_progress(&t).unwrap_or_else(|e| panic!("progress: {t}: {e}"));
        check_preservation(&t).unwrap_or_else(|e| panic!("preservation: {t}: {e}"));
    }
    assert!(typed > 1000, "only {typed} typed terms");
}
