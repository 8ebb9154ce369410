//! `vlc`: type check, evaluate and explore versioned lambda calculus
//! programs, and run the metatheory suites.

mod output;

use std::fs;
use std::io::{self, BufRead, IsTerminal, Read, Write};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::json;
use vl_core::eval::{evaluate, EvalError, DEFAULT_FUEL};
use vl_core::syntax::{parse_with_spans, ParseError, SpanTree};
use vl_core::typeck::{check, Diagnostic, Options};
use vl_core::{Label, Term, Type, TypingContext};
use vl_harness::{run_all, GenConfig};

use output::{diagnostic_json, parse_error_json, report_json, trace_json};

#[derive(Parser)]
#[command(name = "vlc", version, about = "Versioned lambda calculus checker and evaluator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the type of a program, or its diagnostics.
    Check {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        json: bool,
    },
    /// Type check, then evaluate and print the final value.
    Eval {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: usize,
        /// Print every reduction and overwrite before the value.
        #[arg(long)]
        trace: bool,
        /// Extract this version from the program's result.
        #[arg(long = "extract", value_name = "LABEL", value_parser = parse_label)]
        extract: Option<Label>,
        #[arg(long)]
        json: bool,
    },
    /// Read one expression per line. `:t e` prints a type, `:q` quits.
    Repl {
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: usize,
    },
    /// Run the property suites.
    Meta {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        cases: usize,
        #[arg(long, default_value_t = 5)]
        depth: usize,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct Input {
    /// Program file, or `-` for standard input.
    #[arg(required_unless_present = "expr", conflicts_with = "expr")]
    path: Option<String>,
    /// Program text given inline.
    #[arg(short = 'e', long = "expr")]
    expr: Option<String>,
}

fn parse_label(s: &str) -> Result<Label, String> {
    Label::new(s).ok_or_else(|| format!("`{s}` is not a label"))
}

const OK: u8 = 0;
const TYPE_ERROR: u8 = 1;
const INPUT_ERROR: u8 = 2;
const RUNTIME_ERROR: u8 = 3;

impl Input {
    fn read(&self) -> anyhow::Result<String> {
        match (&self.expr, self.path.as_deref()) {
            (Some(e), _) => Ok(e.clone()),
            (None, Some("-")) => {
                let mut s = String::new();
                io::stdin().read_to_string(&mut s).context("reading standard input")?;
                Ok(s)
            }
            (None, Some(p)) => fs::read_to_string(p).with_context(|| format!("reading {p}")),
            (None, None) => bail!("no program given"),
        }
    }
}

/// Parse and type check. `Err` carries the exit status, already reported.
fn front(source: &str, extract: Option<&Label>, json: bool) -> Result<(Term, Type), u8> {
    let (mut t, mut spans) = parse_with_spans(source).map_err(|e| {
        report_parse_error(&e, json);
        INPUT_ERROR
    })?;
    if let Some(l) = extract {
        t = Term::extract(t, l.clone());
        spans = SpanTree { span: spans.span, children: vec![spans] };
    }
    match typecheck(&t, Some(&spans)) {
        Ok(ty) => Ok((t, ty)),
        Err(ds) => {
            if json {
                println!("{}", json!({ "ok": false, "diagnostics": ds.iter().map(diagnostic_json).collect::<Vec<_>>() }));
            } else {
                for d in &ds {
                    eprintln!("{}", output::plain_diagnostic(d));
                }
            }
            Err(TYPE_ERROR)
        }
    }
}

fn typecheck(t: &Term, spans: Option<&SpanTree>) -> Result<Type, Vec<Diagnostic>> {
    let opts = Options { spans, ..Options::default() };
    check(&TypingContext::new(), t, &opts).map(|typing| typing.ty)
}

fn report_parse_error(e: &ParseError, json: bool) {
    if json {
        println!("{}", json!({ "ok": false, "diagnostics": [parse_error_json(e)] }));
    } else {
        eprintln!("error[ParseError] {e}");
    }
}

fn run_check(input: &Input, json: bool) -> anyhow::Result<u8> {
    let source = input.read()?;
    Ok(match front(&source, None, json) {
        Ok((_, ty)) => {
            if json {
                println!("{}", json!({ "ok": true, "type": ty.to_string() }));
            } else {
                println!("{ty}");
            }
            OK
        }
        Err(code) => code,
    })
}

fn run_eval(input: &Input, fuel: usize, trace: bool, extract: Option<&Label>, json: bool) -> anyhow::Result<u8> {
    let source = input.read()?;
    let (t, ty) = match front(&source, extract, json) {
        Ok(checked) => checked,
        Err(code) => return Ok(code),
    };
    match evaluate(&t, fuel, trace) {
        Ok(ev) => {
            if json {
                let mut doc = json!({ "ok": true, "type": ty.to_string(), "value": ev.value.to_string(), "steps": ev.steps });
                if let Some(tr) = &ev.trace {
                    doc["trace"] = trace_json(tr);
                }
                println!("{doc}");
            } else {
                if let Some(tr) = &ev.trace {
                    print!("{tr}");
                }
                println!("{}", ev.value);
            }
            Ok(OK)
        }
        Err(e) => {
            let code = match e {
                EvalError::FuelExhausted { .. } => "FuelExhausted",
                EvalError::Stuck { .. } | EvalError::NotAVersionedValue(_) => "Stuck",
            };
            if json {
                println!("{}", json!({ "ok": false, "diagnostics": [{ "code": code, "message": e.to_string() }] }));
            } else {
                eprintln!("error[{code}]: {e}");
            }
            Ok(RUNTIME_ERROR)
        }
    }
}

fn repl(fuel: usize) -> anyhow::Result<u8> {
    let interactive = io::stdin().is_terminal();
    let mut out = io::stdout();
    let mut lines = io::stdin().lock().lines();
    loop {
        if interactive {
            print!("> ");
            out.flush()?;
        }
        let Some(line) = lines.next() else { break };
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line == ":q" {
            break;
        }
        let (source, type_only) = match line.strip_prefix(":t") {
            Some(rest) => (rest, true),
            None => (line, false),
        };
        println!("{}", repl_line(source, type_only, fuel));
    }
    Ok(OK)
}

fn repl_line(source: &str, type_only: bool, fuel: usize) -> String {
    let (t, spans) = match parse_with_spans(source) {
        Ok(parsed) => parsed,
        Err(e) => return format!("error[ParseError] {e}"),
    };
    let ty = match typecheck(&t, Some(&spans)) {
        Ok(ty) => ty,
        Err(ds) => return ds.iter().map(output::plain_diagnostic).collect::<Vec<_>>().join("\n"),
    };
    if type_only {
        return ty.to_string();
    }
    match evaluate(&t, fuel, false) {
        Ok(ev) => format!("{} : {ty}", ev.value),
        Err(e) => format!("error: {e}"),
    }
}

fn meta(seed: u64, cases: usize, depth: usize, json: bool) -> anyhow::Result<u8> {
    let cfg = GenConfig { seed, cases, max_depth: depth, ..GenConfig::default() };
    if let Err(e) = cfg.validate() {
        eprintln!("error: {e}");
        return Ok(INPUT_ERROR);
    }
    let reports = run_all(&cfg);
    if json {
        println!("{}", serde_json::Value::Array(reports.iter().map(report_json).collect()));
    } else {
        for r in &reports {
            println!("{r}");
        }
    }
    Ok(if reports.iter().all(|r| r.passed()) { OK } else { TYPE_ERROR })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Check { input, json } => run_check(input, *json),
        Command::Eval { input, fuel, trace, extract, json } => run_eval(input, *fuel, *trace, extract.as_ref(), *json),
        Command::Repl { fuel } => repl(*fuel),
        Command::Meta { seed, cases, depth, json } => meta(*seed, *cases, *depth, *json),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(INPUT_ERROR)
        }
    }
}
