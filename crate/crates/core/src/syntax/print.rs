//! Pretty-printer producing the concrete syntax with minimal parentheses.

use std::fmt::Write;

use super::{Term, Versioned};
use crate::resource::Resource;

const EXPR: u8 = 0;
const SUM: u8 = 1;
const APP: u8 = 2;
const POSTFIX: u8 = 3;
const ATOM: u8 = 4;

pub fn print(t: &Term) -> String {
    let mut out = String::new();
    go(t, EXPR, &mut out);
    out
}

fn level(t: &Term) -> u8 {
    match t {
        Term::Abs(..) | Term::LetBox(..) => EXPR,
        Term::Add(..) => SUM,
        Term::App(..) => APP,
        Term::Extract(..) => POSTFIX,
        Term::Var(_) | Term::Int(_) | Term::Promote(..) | Term::Record(_) | Term::Comp(_) => ATOM,
    }
}

fn go(t: &Term, min: u8, out: &mut String) {
    if level(t) < min {
        out.push('(');
        go(t, EXPR, out);
        out.push(')');
        return;
    }
    match t {
        Term::Var(x) => out.push_str(x),
        Term::Int(n) => write!(out, "{n}").unwrap(),
        Term::Abs(x, body) => {
            write!(out, "\\{x}. ").unwrap();
            go(body, EXPR, out);
        }
        Term::LetBox(x, bound, body) => {
            write!(out, "let [{x}] = ").unwrap();
            go(bound, EXPR, out);
            out.push_str(" in ");
            go(body, EXPR, out);
        }
        Term::Add(a, b) => {
            go(a, SUM, out);
            out.push_str(" + ");
            go(b, APP, out);
        }
        Term::App(f, a) => {
            go(f, APP, out);
            out.push(' ');
            go(a, POSTFIX, out);
        }
        Term::Extract(inner, l) => {
            go(inner, ATOM, out);
            write!(out, ".{l}").unwrap();
        }
        Term::Promote(body, annotation) => {
            out.push('[');
            go(body, EXPR, out);
            out.push(']');
            match annotation {
                None => {}
                Some(Resource::Bottom) => out.push_str("@bot"),
                Some(r) => write!(out, "@{r}").unwrap(),
            }
        }
        Term::Record(v) => versioned(v, '{', '}', out),
        Term::Comp(v) => versioned(v, '<', '>', out),
    }
}

fn versioned(v: &Versioned, open: char, close: char, out: &mut String) {
    out.push(open);
    for (i, (l, t)) in v.entries.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write!(out, "{l} = ").unwrap();
        go(t, EXPR, out);
    }
    write!(out, " | {}{close}", v.default).unwrap();
}
