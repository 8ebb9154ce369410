//! Hand-written lexer and recursive-descent parser for `.vl` source.
//!
//! ```text
//! expr    := '\' ident '.' expr
//!          | 'let' '[' ident ']' '=' expr 'in' expr
//!          | app ('+' app)*
//! app     := postfix postfix*
//! postfix := atom ('.' label)*
//! atom    := ident | int | '(' expr ')'
//!          | '[' expr ']' ('@' '{' labels '}' | '@' 'bot')?
//!          | '{' label '=' expr (',' label '=' expr)* '|' label '}'
//! ```
//!
//! Labels may contain dots (`v2.0.0`), so `t.l1.l2` extracts the single label
//! `l1.l2`; nested extraction is written `(t.l1).l2`.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use super::{Term, Versioned};
use crate::resource::{Label, Resource};

/// A source range: byte offsets plus the 1-based line and column of the
/// start.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub line: u32,
    pub col: u32,
}

impl Span {
    fn to(self, other: Span) -> Span {
        Span { end: other.end, ..self }
    }
}

/// Spans for a term and, in the same order as [`Term::children`], for each
/// of its subterms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpanTree {
    pub span: Span,
    pub children: Vec<SpanTree>,
}

impl SpanTree {
    pub fn child(&self, i: usize) -> Option<&SpanTree> {
        self.children.get(i)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected {found}, expected {}", expected.join(" or "))]
    Unexpected { found: String, expected: Vec<String> },
    #[error("label `{0}` appears twice in a versioned record")]
    DuplicateRecordLabel(Label),
    #[error("default label `{0}` is not one of the record's labels")]
    DefaultLabelMissing(Label),
    #[error("{0} is an evaluation-time form and cannot appear in source")]
    InternalForm(String),
    #[error("top-level `def` is not supported; a program is a single term")]
    TopLevelDefinition,
    #[error("integer literal `{0}` does not fit in 64 bits")]
    IntegerOverflow(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.kind)
    }
}

pub fn parse(source: &str) -> Result<Term, ParseError> {
    parse_with_spans(source).map(|(t, _)| t)
}

pub fn parse_with_spans(source: &str) -> Result<(Term, SpanTree), ParseError> {
    let tokens = lex(source)?;
    let mut p = Parser { tokens, pos: 0 };
    let out = p.expr()?;
    match p.peek() {
        Tok::Eof => Ok(out),
        _ => Err(p.unexpected(&["`+`", "an argument", "end of input"])),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(String),
    Backslash,
    Dot,
    Eq,
    Plus,
    Comma,
    Pipe,
    At,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Lt,
    Gt,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(s) => format!("integer `{s}`"),
            Tok::Eof => "end of input".into(),
            Tok::Backslash => "`\\`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::At => "`@`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Lt => "`<`".into(),
            Tok::Gt => "`>`".into(),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    span: Span,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

fn lex(source: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let mut chars = source.char_indices().peekable();
    let (mut line, mut col) = (1u32, 1u32);
    while let Some(&(start, c)) = chars.peek() {
        let (tline, tcol) = (line, col);
        let mut advance = |chars: &mut std::iter::Peekable<std::str::CharIndices>| {
            let (_, c) = chars.next().unwrap();
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
        };
        if c.is_whitespace() {
            advance(&mut chars);
            continue;
        }
        let single = match c {
            '\\' => Some(Tok::Backslash),
            '.' => Some(Tok::Dot),
            '=' => Some(Tok::Eq),
            '+' => Some(Tok::Plus),
            ',' => Some(Tok::Comma),
            '|' => Some(Tok::Pipe),
            '@' => Some(Tok::At),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            '<' => Some(Tok::Lt),
            '>' => Some(Tok::Gt),
            _ => None,
        };
        let tok = if let Some(tok) = single {
            advance(&mut chars);
            tok
        } else if c == '-' {
            advance(&mut chars);
            match chars.peek() {
                Some(&(_, '-')) => {
                    while chars.peek().is_some_and(|&(_, c)| c != '\n') {
                        advance(&mut chars);
                    }
                    continue;
                }
                Some(&(_, d)) if d.is_ascii_digit() => {
                    let mut text = String::from("-");
                    while let Some(&(_, d)) = chars.peek().filter(|(_, d)| d.is_ascii_digit()) {
                        text.push(d);
                        advance(&mut chars);
                    }
                    Tok::Int(text)
                }
                _ => {
                    return Err(ParseError {
                        kind: ParseErrorKind::Unexpected { found: "`-`".into(), expected: vec!["a term".into()] },
                        line: tline,
                        col: tcol,
                    })
                }
            }
        } else if c.is_ascii_digit() {
            let mut text = String::new();
            while let Some(&(_, d)) = chars.peek().filter(|(_, d)| d.is_ascii_digit()) {
                text.push(d);
                advance(&mut chars);
            }
            Tok::Int(text)
        } else if is_ident_start(c) {
            let mut text = String::new();
            while let Some(&(_, d)) = chars.peek().filter(|(_, d)| is_ident_char(*d)) {
                text.push(d);
                advance(&mut chars);
            }
            Tok::Ident(text)
        } else {
            return Err(ParseError {
                kind: ParseErrorKind::Unexpected { found: format!("character `{c}`"), expected: vec!["a term".into()] },
                line: tline,
                col: tcol,
            });
        };
        let end = chars.peek().map_or(source.len(), |&(i, _)| i);
        out.push(Token { tok, span: Span { start, end, line: tline, col: tcol } });
    }
    out.push(Token {
        tok: Tok::Eof,
        span: Span { start: source.len(), end: source.len(), line, col },
    });
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

type Parsed = (Term, SpanTree);

fn leaf(t: Term, span: Span) -> Parsed {
    (t, SpanTree { span, children: vec![] })
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].span
    }

    fn prev_span(&self) -> Span {
        self.tokens[self.pos.saturating_sub(1)].span
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn error(&self, kind: ParseErrorKind) -> ParseError {
        let span = self.span();
        ParseError { kind, line: span.line, col: span.col }
    }

    fn unexpected(&self, expected: &[&str]) -> ParseError {
        match self.peek() {
            Tok::Lt => self.error(ParseErrorKind::InternalForm("a versioned computation `<...>`".into())),
            Tok::At => self.error(ParseErrorKind::InternalForm("the overwrite operator `@`".into())),
            Tok::Ident(s) if s == "def" => self.error(ParseErrorKind::TopLevelDefinition),
            found => self.error(ParseErrorKind::Unexpected {
                found: found.describe(),
                expected: expected.iter().map(|s| s.to_string()).collect(),
            }),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<Span, ParseError> {
        if *self.peek() == tok {
            Ok(self.bump().span)
        } else {
            Err(self.unexpected(&[&tok.describe()]))
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<Span, ParseError> {
        match self.peek() {
            Tok::Ident(s) if s == kw => Ok(self.bump().span),
            _ => Err(self.unexpected(&[&format!("`{kw}`")])),
        }
    }

    fn binder(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Tok::Ident(s) if !is_keyword(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected(&["a variable name"])),
        }
    }

    fn expr(&mut self) -> Result<Parsed, ParseError> {
        let start = self.span();
        match self.peek() {
            Tok::Backslash => {
                self.bump();
                let x = self.binder()?;
                self.expect(Tok::Dot)?;
                let (body, bs) = self.expr()?;
                let span = start.to(bs.span);
                Ok((Term::Abs(x, Box::new(body)), SpanTree { span, children: vec![bs] }))
            }
            Tok::Ident(s) if s == "let" => {
                self.bump();
                self.expect(Tok::LBracket)?;
                let x = self.binder()?;
                self.expect(Tok::RBracket)?;
                self.expect(Tok::Eq)?;
                let (bound, s1) = self.expr()?;
                self.expect_keyword("in")?;
                let (body, s2) = self.expr()?;
                let span = start.to(s2.span);
                Ok((
                    Term::LetBox(x, Box::new(bound), Box::new(body)),
                    SpanTree { span, children: vec![s1, s2] },
                ))
            }
            _ => self.sum(),
        }
    }

    fn sum(&mut self) -> Result<Parsed, ParseError> {
        let (mut t, mut s) = self.app()?;
        while *self.peek() == Tok::Plus {
            self.bump();
            let (rhs, rs) = self.app()?;
            let span = s.span.to(rs.span);
            t = Term::Add(Box::new(t), Box::new(rhs));
            s = SpanTree { span, children: vec![s, rs] };
        }
        Ok((t, s))
    }

    fn starts_atom(&self) -> bool {
        match self.peek() {
            Tok::Ident(s) => !is_keyword(s) || s == "def",
            Tok::Int(_) | Tok::LParen | Tok::LBracket | Tok::LBrace | Tok::Lt => true,
            _ => false,
        }
    }

    fn app(&mut self) -> Result<Parsed, ParseError> {
        let (mut t, mut s) = self.postfix()?;
        while self.starts_atom() {
            let (arg, as_) = self.postfix()?;
            let span = s.span.to(as_.span);
            t = Term::App(Box::new(t), Box::new(arg));
            s = SpanTree { span, children: vec![s, as_] };
        }
        Ok((t, s))
    }

    fn postfix(&mut self) -> Result<Parsed, ParseError> {
        let (mut t, mut s) = self.atom()?;
        loop {
            match self.peek() {
                Tok::Dot => {
                    self.bump();
                    let l = self.label()?;
                    let span = s.span.to(self.prev_span());
                    t = Term::Extract(Box::new(t), l);
                    s = SpanTree { span, children: vec![s] };
                }
                Tok::At => return Err(self.unexpected(&[])),
                _ => return Ok((t, s)),
            }
        }
    }

    /// A label, gluing `.`-separated segments that touch each other.
    fn label(&mut self) -> Result<Label, ParseError> {
        let first = self.span();
        let mut text = match self.peek() {
            Tok::Ident(s) => s.clone(),
            _ => return Err(self.unexpected(&["a version label"])),
        };
        self.bump();
        let mut last_end = first.end;
        loop {
            let dot = &self.tokens[self.pos];
            let seg = &self.tokens[(self.pos + 1).min(self.tokens.len() - 1)];
            let seg_text = match &seg.tok {
                Tok::Ident(s) | Tok::Int(s) if !s.starts_with('-') => s.clone(),
                _ => break,
            };
            if dot.tok != Tok::Dot || dot.span.start != last_end || seg.span.start != dot.span.end {
                break;
            }
            text.push('.');
            text.push_str(&seg_text);
            last_end = seg.span.end;
            self.pos += 2;
        }
        Label::new(text.clone()).ok_or(ParseError {
            kind: ParseErrorKind::Unexpected { found: format!("`{text}`"), expected: vec!["a version label".into()] },
            line: first.line,
            col: first.col,
        })
    }

    fn atom(&mut self) -> Result<Parsed, ParseError> {
        let start = self.span();
        match self.peek().clone() {
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                Ok(leaf(Term::Var(s), start))
            }
            Tok::Int(text) => {
                self.bump();
                let n = text
                    .parse::<i64>()
                    .map_err(|_| ParseError { kind: ParseErrorKind::IntegerOverflow(text), line: start.line, col: start.col })?;
                Ok(leaf(Term::Int(n), start))
            }
            Tok::LParen => {
                self.bump();
                let (t, s) = self.expr()?;
                let close = self.expect(Tok::RParen)?;
                Ok((t, SpanTree { span: start.to(close), children: s.children }))
            }
            Tok::LBracket => {
                self.bump();
                let (body, bs) = self.expr()?;
                let mut end = self.expect(Tok::RBracket)?;
                let mut annotation = None;
                if *self.peek() == Tok::At {
                    self.bump();
                    annotation = Some(self.annotation()?);
                    end = self.prev_span();
                }
                Ok((Term::Promote(Box::new(body), annotation), SpanTree { span: start.to(end), children: vec![bs] }))
            }
            Tok::LBrace => self.record(),
            _ => Err(self.unexpected(&["a term"])),
        }
    }

    fn annotation(&mut self) -> Result<Resource, ParseError> {
        match self.peek() {
            Tok::Ident(s) if s == "bot" => {
                self.bump();
                Ok(Resource::Bottom)
            }
            Tok::LBrace => {
                self.bump();
                let mut labels = BTreeSet::new();
                if *self.peek() != Tok::RBrace {
                    labels.insert(self.label()?);
                    while *self.peek() == Tok::Comma {
                        self.bump();
                        labels.insert(self.label()?);
                    }
                }
                self.expect(Tok::RBrace)?;
                Ok(Resource::Labels(labels))
            }
            _ => Err(self.unexpected(&["`{`", "`bot`"])),
        }
    }

    fn record(&mut self) -> Result<Parsed, ParseError> {
        let start = self.expect(Tok::LBrace)?;
        let mut entries: Vec<(Label, Term)> = Vec::new();
        let mut spans = Vec::new();
        loop {
            let at = self.span();
            let l = self.label()?;
            if entries.iter().any(|(m, _)| *m == l) {
                return Err(ParseError { kind: ParseErrorKind::DuplicateRecordLabel(l), line: at.line, col: at.col });
            }
            self.expect(Tok::Eq)?;
            let (t, s) = self.expr()?;
            entries.push((l, t));
            spans.push(s);
            match self.peek() {
                Tok::Comma => {
                    self.bump();
                }
                Tok::Pipe => {
                    self.bump();
                    break;
                }
                _ => return Err(self.unexpected(&["`,`", "`|`"])),
            }
        }
        let at = self.span();
        let default = self.label()?;
        if !entries.iter().any(|(l, _)| *l == default) {
            return Err(ParseError { kind: ParseErrorKind::DefaultLabelMissing(default), line: at.line, col: at.col });
        }
        let end = self.expect(Tok::RBrace)?;
        Ok((Term::Record(Versioned { entries, default }), SpanTree { span: start.to(end), children: spans }))
    }
}

fn is_keyword(s: &str) -> bool {
    matches!(s, "let" | "in" | "def")
}
