//! Plain and JSON renderings of diagnostics, traces and suite reports.

use serde_json::{json, Value};
use vl_core::eval::{Trace, TraceTag};
use vl_core::syntax::ParseError;
use vl_core::typeck::Diagnostic;
use vl_core::Resource;
use vl_harness::Report;

fn available(r: &Resource) -> Value {
    match r.labels() {
        Some(ls) => ls.iter().map(|l| l.as_str()).collect(),
        None => Value::Null,
    }
}

pub fn diagnostic_json(d: &Diagnostic) -> Value {
    json!({
        "code": d.code.as_str(),
        "message": d.message,
        "line": d.span.map(|s| s.line),
        "col": d.span.map(|s| s.col),
        "expected_labels": d.expected_labels.iter().flatten().map(|l| l.as_str()).collect::<Vec<_>>(),
        "vars": d.offending_vars.iter().map(|(x, r)| json!({ "name": x, "available": available(r) })).collect::<Vec<_>>(),
    })
}

pub fn parse_error_json(e: &ParseError) -> Value {
    json!({
        "code": "ParseError",
        "message": e.kind.to_string(),
        "line": e.line,
        "col": e.col,
        "expected_labels": [],
        "vars": [],
    })
}

/// The diagnostic line, then one line per offending variable.
pub fn plain_diagnostic(d: &Diagnostic) -> String {
    let mut s = d.to_string();
    for (x, r) in &d.offending_vars {
        s.push_str(&format!("\n  {x} is available in {r}"));
    }
    s
}

pub fn trace_json(t: &Trace) -> Value {
    let entries: Vec<Value> = t
        .entries
        .iter()
        .map(|e| {
            let rule = match &e.tag {
                TraceTag::Reduce { rule, .. } => rule.to_string(),
                TraceTag::Overwrite(l) => format!("@{l}"),
            };
            json!({ "rule": rule, "term": e.rendered })
        })
        .collect();
    json!({ "start": t.start.to_string(), "tags": t.tags(), "entries": entries })
}

pub fn report_json(r: &Report) -> Value {
    json!({
        "property": r.property,
        "cases": r.cases,
        "passed": r.passed(),
        "seed": r.seed,
        "notes": r.notes.len(),
        "findings": r.findings.len(),
        "counterexample": r.counterexample.as_ref().map(|c| c.to_string()),
        "seconds": r.elapsed.as_secs_f64(),
    })
}
