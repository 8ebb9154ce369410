use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

const EX51: &str = r"let [f] = {l1 = \x. x, l2 = \x. x + 1 | l1} in let [y] = {l1 = 1, l2 = 2 | l1} in [f y]";

fn vlc(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_vlc"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_str(&stdout(o)).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

#[test]
fn eval_reads_standard_input() {
    let o = vlc(&["eval", "-"], "1 + 1");
    assert_eq!(stdout(&o), "2\n");
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn eval_extracts_a_version() {
    let o = vlc(&["eval", "-e", EX51, "--extract", "l2"], "");
    assert_eq!(stdout(&o), "3\n");
    let o = vlc(&["eval", "-e", EX51, "--extract", "l1", "--trace"], "");
    let text = stdout(&o);
    assert!(text.lines().nth(1).unwrap().starts_with("-->[E-CLET]"), "{text}");
    assert!(text.ends_with("===[@l1] 1\n1\n"), "{text}");
}

#[test]
fn exit_statuses() {
    assert_eq!(vlc(&["check", "-e", "{l1 = 1 | l1}.l2"], "").status.code(), Some(1));
    assert_eq!(vlc(&["eval", "-e", "{l1 = 1 | l1}.l2"], "").status.code(), Some(1));
    assert_eq!(vlc(&["check", "-e", "1 +"], "").status.code(), Some(2));
    assert_eq!(vlc(&["check", "/nonexistent/file.vl"], "").status.code(), Some(2));
    let o = vlc(&["eval", "-e", EX51, "--extract", "l1", "--fuel", "2"], "");
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error[FuelExhausted]"));
}

#[test]
fn json_diagnostics() {
    let src = "let [f] = {l1 = \\x. x, l2 = \\x. x + 1 | l1} in\nlet [y] = {l1 = 1 | l1} in [f y].l2";
    let o = vlc(&["check", "--json", "-"], src);
    assert_eq!(o.status.code(), Some(1));
    let doc = json(&o);
    let d = &doc["diagnostics"][0];
    assert_eq!(d["code"], "VersionUnavailable");
    assert_eq!((d["line"].as_u64(), d["col"].as_u64()), (Some(2), Some(28)));
    assert_eq!(d["expected_labels"], serde_json::json!(["l2"]));
    assert_eq!(d["vars"], serde_json::json!([{ "name": "y", "available": ["l1"] }]));

    let doc = json(&vlc(&["check", "--json", "-e", "1 +"], ""));
    assert_eq!(doc["diagnostics"][0]["code"], "ParseError");

    let doc = json(&vlc(&["eval", "--json", "--trace", "-e", EX51, "--extract", "l2"], ""));
    assert_eq!(doc["value"], "3");
    assert_eq!(doc["type"], "Int");
    assert_eq!(doc["trace"]["tags"][0], "E-CLET");
}

#[test]
fn repl_session() {
    let o = vlc(&["repl"], "1 + 2\n\n:t {l1 = 1 | l1}\n{l1 = 1 | l1}.l2\n1 +\n:q\n5\n");
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "3 : Int");
    assert_eq!(lines[1], "[]_{l1} Int");
    assert!(lines[2].starts_with("error[EmptyIntersection]"), "{text}");
    assert!(lines[3].starts_with("error[ParseError]"), "{text}");
    assert_eq!(lines.len(), 4);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn meta_summaries() {
    let o = vlc(&["meta", "--cases", "20", "--seed", "7", "--depth", "3"], "");
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.contains("cases=")).count(), 8, "{text}");
    assert!(text.lines().filter(|l| l.contains("cases=")).all(|l| l.contains(" pass ") && l.contains("seed=")), "{text}");

    let doc = json(&vlc(&["meta", "--json", "--cases", "10", "--depth", "3"], ""));
    assert_eq!(doc.as_array().unwrap().len(), 8);
    assert!(doc.as_array().unwrap().iter().all(|r| r["passed"] == true));
    assert_eq!(vlc(&["meta", "--depth", "0"], "").status.code(), Some(2));
}
