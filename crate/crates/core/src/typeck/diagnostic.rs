//! Structured type errors.

use std::collections::BTreeSet;
use std::fmt;

use crate::resource::{Label, Resource};
use crate::syntax::Span;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DiagnosticCode {
    VersionUnavailable,
    LinearityViolation,
    TypeMismatch,
    NotAVersionedValue,
    UnknownVariable,
    EmptyIntersection,
}

impl DiagnosticCode {
    pub fn as_str(self) -> &'static str {
        match self {
            DiagnosticCode::VersionUnavailable => "VersionUnavailable",
            DiagnosticCode::LinearityViolation => "LinearityViolation",
            DiagnosticCode::TypeMismatch => "TypeMismatch",
            DiagnosticCode::NotAVersionedValue => "NotAVersionedValue",
            DiagnosticCode::UnknownVariable => "UnknownVariable",
            DiagnosticCode::EmptyIntersection => "EmptyIntersection",
        }
    }
}

impl fmt::Display for DiagnosticCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub code: DiagnosticCode,
    pub message: String,
    pub span: Option<Span>,
    pub expected_labels: Option<BTreeSet<Label>>,
    /// Variables responsible for the error, with their declared availability.
    pub offending_vars: Vec<(String, Resource)>,
}

impl Diagnostic {
    pub fn new(code: DiagnosticCode, message: impl Into<String>, span: Option<Span>) -> Diagnostic {
        Diagnostic { code, message: message.into(), span, expected_labels: None, offending_vars: Vec::new() }
    }

    /// The availability error: every name in `expected` must provide `label`,
    /// and the `offending` ones do not.
    pub fn version_unavailable(
        expected: &[String],
        label: &Label,
        offending: Vec<(String, Resource)>,
        span: Option<Span>,
    ) -> Diagnostic {
        let names: Vec<String> = offending.iter().map(|(x, _)| x.clone()).collect();
        let (are, is) = (
            if expected.len() == 1 { "is" } else { "are" },
            if names.len() == 1 { "is" } else { "are" },
        );
        let message = format!(
            "{} {are} expected to be available in {label}, but {} {is} not available in {label}",
            join_names(expected),
            join_names(&names)
        );
        Diagnostic {
            code: DiagnosticCode::VersionUnavailable,
            message,
            span,
            expected_labels: Some(BTreeSet::from([label.clone()])),
            offending_vars: offending,
        }
    }
}

/// `a`, `a and b`, `a, b and c`.
fn join_names(names: &[String]) -> String {
    match names {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} and {last}", init.join(", ")),
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "error[{}]", self.code)?;
        if let Some(span) = self.span {
            write!(f, " {}:{}", span.line, span.col)?;
        }
        write!(f, ": {}", self.message)
    }
}
