//! Concrete syntax for programs (`.ccslm` files) and the pretty-printer.
//!
//! ```text
//! program  := (def ";")* "main" "=" proc (";")? ;
//! def      := UPNAME "=" proc ;
//! proc     := sum ("|" sum)* ;
//! sum      := prefixed ("+" prefixed)* ;
//! prefixed := act (":" "{" labellist? "}")? "." prefixed | atom ;
//! atom     := "0_0" | "0_1" | UPNAME | "(" proc ")" | atom "\" "{" chanlist? "}" ;
//! act      := "tau" | "sigma" | "~"? LOWNAME ;
//! label    := "sigma" | "~"? LOWNAME ;
//! ```
//!
//! `#` starts a comment that runs to the end of the line.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::label::{Action, Horizon, Label, LabelSet};
use crate::term::{Program, ProcessTerm, ThreadTerm};

/// 1-based line and column, length in characters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Span {
    pub line: usize,
    pub column: usize,
    pub length: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub span: Span,
    pub message: String,
    pub code: String,
}

impl Diagnostic {
    pub fn error(span: Span, code: &str, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            span,
            message: message.into(),
            code: code.to_string(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(
            f,
            "{}:{}: {sev}[{}]: {}",
            self.span.line, self.span.column, self.code, self.message
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Low(String),
    Up(String),
    Tau,
    Sigma,
    Main,
    Nil(Horizon),
    Tilde,
    Colon,
    LBrace,
    RBrace,
    Comma,
    Dot,
    Plus,
    Bar,
    Backslash,
    LParen,
    RParen,
    Eq,
    Semi,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Low(s) | Tok::Up(s) => write!(f, "`{s}`"),
            Tok::Tau => f.write_str("`tau`"),
            Tok::Sigma => f.write_str("`sigma`"),
            Tok::Main => f.write_str("`main`"),
            Tok::Nil(h) => write!(f, "`0_{h}`"),
            Tok::Tilde => f.write_str("`~`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::Bar => f.write_str("`|`"),
            Tok::Backslash => f.write_str("`\\`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Eq => f.write_str("`=`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

fn lex(src: &str) -> (Vec<(Tok, Span)>, Vec<Diagnostic>) {
    let mut toks = Vec::new();
    let mut diags = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let start = Span {
            line,
            column: col,
            length: 1,
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() {
            let begin = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                i += 1;
            }
            let word: String = chars[begin..i].iter().collect();
            let span = Span {
                length: i - begin,
                ..start
            };
            col += i - begin;
            let tok = match word.as_str() {
                "tau" => Tok::Tau,
                "sigma" => Tok::Sigma,
                "main" => Tok::Main,
                _ if c.is_ascii_uppercase() => Tok::Up(word),
                _ => Tok::Low(word),
            };
            toks.push((tok, span));
            continue;
        }
        if c == '0' {
            if i + 2 < chars.len() && chars[i + 1] == '_' && (chars[i + 2] == '0' || chars[i + 2] == '1') {
                let h = if chars[i + 2] == '0' { Horizon::H0 } else { Horizon::H1 };
                toks.push((Tok::Nil(h), Span { length: 3, ..start }));
                i += 3;
                col += 3;
            } else {
                diags.push(Diagnostic::error(
                    start,
                    "E-lex",
                    "inactive process must be written `0_0` or `0_1`",
                ));
                i += 1;
                col += 1;
            }
            continue;
        }
        let tok = match c {
            '~' => Some(Tok::Tilde),
            ':' => Some(Tok::Colon),
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            ',' => Some(Tok::Comma),
            '.' => Some(Tok::Dot),
            '+' => Some(Tok::Plus),
            '|' => Some(Tok::Bar),
            '\\' => Some(Tok::Backslash),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '=' => Some(Tok::Eq),
            ';' => Some(Tok::Semi),
            _ => None,
        };
        match tok {
            Some(t) => toks.push((t, start)),
            None => diags.push(Diagnostic::error(start, "E-lex", format!("unexpected character `{c}`"))),
        }
        i += 1;
        col += 1;
    }
    toks.push((
        Tok::Eof,
        Span {
            line,
            column: col,
            length: 0,
        },
    ));
    (toks, diags)
}

struct SyntaxError(Diagnostic);

type PResult<T> = Result<T, SyntaxError>;

/// Either a finished process or a thread that may still take part in a sum.
enum Operand {
    Proc(ProcessTerm),
    Thread(ThreadTerm),
}

impl Operand {
    fn into_proc(self) -> ProcessTerm {
        match self {
            Operand::Proc(p) => p,
            Operand::Thread(t) => ProcessTerm::Thread(t),
        }
    }
}

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, Span) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, code: &str, msg: impl Into<String>) -> PResult<T> {
        Err(SyntaxError(Diagnostic::error(self.span(), code, msg)))
    }

    fn expect(&mut self, want: Tok) -> PResult<Span> {
        if *self.peek() == want {
            Ok(self.bump().1)
        } else {
            self.err("E-syntax", format!("expected {want}, found {}", self.peek()))
        }
    }

    fn proc(&mut self) -> PResult<ProcessTerm> {
        let mut items = vec![self.sum()?];
        while *self.peek() == Tok::Bar {
            self.bump();
            items.push(self.sum()?);
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            ProcessTerm::Par(items)
        })
    }

    fn sum(&mut self) -> PResult<ProcessTerm> {
        let start = self.span();
        let first = self.prefixed()?;
        if *self.peek() != Tok::Plus {
            return Ok(first.into_proc());
        }
        let mut items = vec![self.as_thread(first, start)?];
        while *self.peek() == Tok::Plus {
            self.bump();
            let at = self.span();
            let next = self.prefixed()?;
            items.push(self.as_thread(next, at)?);
        }
        Ok(ProcessTerm::Thread(ThreadTerm::Sum(items)))
    }

    fn as_thread(&self, op: Operand, at: Span) -> PResult<ThreadTerm> {
        match op {
            Operand::Thread(t) => Ok(t),
            Operand::Proc(ProcessTerm::Thread(t)) => Ok(t),
            Operand::Proc(_) => Err(SyntaxError(Diagnostic::error(
                at,
                "E-sum-operand",
                "operands of `+` must be threads (nil, prefixes or sums), not names, parallel compositions or restrictions",
            ))),
        }
    }

    fn prefixed(&mut self) -> PResult<Operand> {
        let action = match self.peek().clone() {
            Tok::Tau => Some(Action::Tau),
            Tok::Sigma => Some(Action::Vis(Label::Clock)),
            Tok::Tilde => {
                self.bump();
                match self.peek().clone() {
                    Tok::Low(n) => Some(Action::Vis(Label::co(n))),
                    other => return self.err("E-syntax", format!("expected a channel name after `~`, found {other}")),
                }
            }
            Tok::Low(n) => Some(Action::Vis(Label::chan(n))),
            _ => None,
        };
        let Some(action) = action else {
            return self.atom().map(Operand::Proc);
        };
        self.bump();
        let mut guard = LabelSet::new();
        if *self.peek() == Tok::Colon {
            self.bump();
            self.expect(Tok::LBrace)?;
            if *self.peek() != Tok::RBrace {
                loop {
                    guard.insert(self.guard_label()?);
                    if *self.peek() == Tok::Comma {
                        self.bump();
                    } else {
                        break;
                    }
                }
            }
            self.expect(Tok::RBrace)?;
        }
        self.expect(Tok::Dot)?;
        let cont = self.prefixed()?.into_proc();
        Ok(Operand::Thread(ThreadTerm::Prefix {
            action,
            guard,
            cont: Box::new(cont),
        }))
    }

    fn guard_label(&mut self) -> PResult<Label> {
        match self.peek().clone() {
            Tok::Sigma => {
                self.bump();
                Ok(Label::Clock)
            }
            Tok::Tau => self.err("E-guard-tau", "`tau` cannot appear in a guard (guards contain labels only)"),
            Tok::Tilde => {
                self.bump();
                match self.peek().clone() {
                    Tok::Low(n) => {
                        self.bump();
                        Ok(Label::co(n))
                    }
                    other => self.err("E-syntax", format!("expected a channel name after `~`, found {other}")),
                }
            }
            Tok::Low(n) => {
                self.bump();
                Ok(Label::chan(n))
            }
            other => self.err("E-syntax", format!("expected a label, found {other}")),
        }
    }

    fn atom(&mut self) -> PResult<ProcessTerm> {
        let mut base = match self.peek().clone() {
            Tok::Nil(h) => {
                self.bump();
                ProcessTerm::nil(h)
            }
            Tok::Up(n) => {
                self.bump();
                ProcessTerm::Name(n)
            }
            Tok::LParen => {
                self.bump();
                let p = self.proc()?;
                self.expect(Tok::RParen)?;
                p
            }
            other => return self.err("E-syntax", format!("expected a process, found {other}")),
        };
        while *self.peek() == Tok::Backslash {
            self.bump();
            self.expect(Tok::LBrace)?;
            let mut chans = BTreeSet::new();
            if *self.peek() != Tok::RBrace {
                loop {
                    chans.insert(self.restricted_channel()?);
                    if *self.peek() == Tok::Comma {
                        self.bump();
                    } else {
                        break;
                    }
                }
            }
            self.expect(Tok::RBrace)?;
            base = ProcessTerm::Restrict(Box::new(base), chans);
        }
        Ok(base)
    }

    fn restricted_channel(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Low(n) => {
                self.bump();
                Ok(n)
            }
            Tok::Tau => self.err("E-restrict", "`tau` cannot be restricted"),
            Tok::Sigma => self.err("E-restrict", "the clock `sigma` cannot be restricted"),
            Tok::Tilde => self.err(
                "E-restrict",
                "restriction sets list channel names only; co-names are bound with their channel",
            ),
            other => self.err("E-syntax", format!("expected a channel name, found {other}")),
        }
    }

    /// Skips to just after the next `;` (or to the end).
    fn recover(&mut self) {
        loop {
            match self.peek() {
                Tok::Eof => return,
                Tok::Semi => {
                    self.bump();
                    return;
                }
                _ => {
                    self.bump();
                }
            }
        }
    }
}

/// Parses a whole program. Either every diagnostic or a program, never both.
pub fn parse(src: &str) -> Result<Program, Vec<Diagnostic>> {
    let (toks, mut diags) = lex(src);
    let mut p = Parser { toks, pos: 0 };
    let mut defs: BTreeMap<String, ProcessTerm> = BTreeMap::new();
    let mut spans: BTreeMap<String, Span> = BTreeMap::new();
    let mut entry: Option<ProcessTerm> = None;

    while *p.peek() != Tok::Eof {
        let head_span = p.span();
        let result: PResult<()> = (|| {
            let (head, _) = p.bump();
            let name = match head {
                Tok::Up(n) => Some(n),
                Tok::Main => None,
                other => {
                    return Err(SyntaxError(Diagnostic::error(
                        head_span,
                        "E-syntax",
                        format!("expected a definition `Name = ...` or `main = ...`, found {other}"),
                    )))
                }
            };
            p.expect(Tok::Eq)?;
            let body = p.proc()?;
            let key_is_main = name.is_none();
            let key = name.clone().unwrap_or_else(|| "main".to_string());
            if spans.contains_key(&key) {
                diags.push(Diagnostic::error(
                    head_span,
                    "E-duplicate",
                    format!("`{key}` is defined more than once"),
                ));
            } else {
                spans.insert(key, head_span);
                match name {
                    Some(n) => {
                        defs.insert(n, body);
                    }
                    None => entry = Some(body),
                }
            }
            let is_main = key_is_main;
            match p.peek() {
                Tok::Semi => {
                    p.bump();
                    if is_main && *p.peek() != Tok::Eof {
                        return p.err("E-syntax", "`main` must be the last definition");
                    }
                    Ok(())
                }
                Tok::Eof if is_main => Ok(()),
                other => p.err("E-syntax", format!("expected `;` after definition, found {other}")),
            }
        })();
        if let Err(SyntaxError(d)) = result {
            diags.push(d);
            p.recover();
        }
    }

    if entry.is_none() && diags.is_empty() {
        diags.push(Diagnostic::error(p.span(), "E-no-main", "missing `main = ...` definition"));
    }
    if !diags.is_empty() {
        diags.sort();
        return Err(diags);
    }
    Ok(Program {
        defs,
        entry: entry.unwrap(),
        spans,
    })
}

/// Parses a single process expression (no definitions).
pub fn parse_process(src: &str) -> Result<ProcessTerm, Vec<Diagnostic>> {
    let (toks, diags) = lex(src);
    if !diags.is_empty() {
        return Err(diags);
    }
    let mut p = Parser { toks, pos: 0 };
    let term = p.proc().map_err(|SyntaxError(d)| vec![d])?;
    if *p.peek() != Tok::Eof {
        return Err(vec![Diagnostic::error(
            p.span(),
            "E-syntax",
            format!("unexpected {} after process", p.peek()),
        )]);
    }
    Ok(term)
}

// Precedence levels for printing: 0 = proc, 1 = sum, 2 = prefixed, 3 = atom.
fn write_proc(out: &mut String, t: &ProcessTerm, level: u8) {
    match t {
        ProcessTerm::Name(n) => out.push_str(n),
        ProcessTerm::Par(ps) => {
            let paren = level > 0;
            if paren {
                out.push('(');
            }
            for (i, c) in ps.iter().enumerate() {
                if i > 0 {
                    out.push_str(" | ");
                }
                write_proc(out, c, 1);
            }
            if paren {
                out.push(')');
            }
        }
        ProcessTerm::Restrict(body, chans) => {
            write_proc(out, body, 3);
            let names: Vec<&str> = chans.iter().map(String::as_str).collect();
            let _ = write!(out, " \\ {{{}}}", names.join(","));
        }
        ProcessTerm::Thread(th) => write_thread(out, th, level),
    }
}

fn write_thread(out: &mut String, t: &ThreadTerm, level: u8) {
    match t {
        ThreadTerm::Nil(h) => {
            let _ = write!(out, "0_{h}");
        }
        ThreadTerm::Prefix { action, guard, cont } => {
            let paren = level > 2;
            if paren {
                out.push('(');
            }
            let _ = write!(out, "{action}");
            if !guard.is_empty() {
                let ls: Vec<String> = guard.iter().map(ToString::to_string).collect();
                let _ = write!(out, ":{{{}}}", ls.join(","));
            }
            out.push('.');
            write_proc(out, cont, 2);
            if paren {
                out.push(')');
            }
        }
        ThreadTerm::Sum(ms) => {
            let paren = level > 0;
            if paren {
                out.push('(');
            }
            for (i, m) in ms.iter().enumerate() {
                if i > 0 {
                    out.push_str(" + ");
                }
                write_thread(out, m, 2);
            }
            if paren {
                out.push(')');
            }
        }
    }
}

/// Prints a process so that [`parse_process`] gives back the same tree.
pub fn pretty_process(t: &ProcessTerm) -> String {
    let mut s = String::new();
    write_proc(&mut s, t, 0);
    s
}

/// Prints a program: definitions in name order, then `main`.
pub fn pretty(prog: &Program) -> String {
    let mut s = String::new();
    for (name, body) in &prog.defs {
        let _ = writeln!(s, "{name} = {};", pretty_process(body));
    }
    let _ = writeln!(s, "main = {}", pretty_process(&prog.entry));
    s
}

impl fmt::Display for ProcessTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pretty_process(self))
    }
}
