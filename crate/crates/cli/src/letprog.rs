//! Let notation for term graphs.
//!
//! The grammar:
//!
//! ```text
//! program := "inputs" inlist? ";" binding* "outputs" idlist? ";"?
//! inlist  := ident (":" ident)? ("," ident (":" ident)?)*
//! binding := ("let" | "letrec") ident (":" ident)? "=" op args? ";"
//! args    := "(" idlist? ")"
//! op      := ident | symbolic atom | quoted atom
//! ```
//!
//! Identifiers are `[A-Za-z_][A-Za-z0-9_]*`. Operation names may also be
//! symbolic or unicode atoms (`+`, `α`), bare or quoted; the printer
//! quotes anything that is not an identifier. Parentheses are optional
//! for constants on input and always printed. The keyword of the first
//! binding fixes the mode for the whole program: `let` programs must
//! only refer backwards, `letrec` programs may refer anywhere. Names may
//! not shadow each other.

use crate::error::CliError;
use crate::format::{lex, Cursor, Tok};
use std::collections::BTreeSet;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Binding {
    pub name: String,
    pub sort: Option<String>,
    pub op: String,
    pub args: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LetProgram {
    pub inputs: Vec<(String, Option<String>)>,
    pub bindings: Vec<Binding>,
    pub outputs: Vec<String>,
    pub recursive: bool,
}

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn expect_ident(cur: &mut Cursor, what: &str) -> Result<(String, usize), CliError> {
    match cur.peek() {
        Some(t) => {
            let line = t.line;
            match &t.tok {
                Tok::Word(w) if is_identifier(w) => {
                    let w = w.clone();
                    cur.next();
                    Ok((w, line))
                }
                _ => Err(CliError::syntax(t.line, t.col, format!("expected {what}"))),
            }
        }
        None => Err(CliError::syntax(0, 0, format!("expected {what} (at end of input)"))),
    }
}

/// Parse a let program and check its static rules: distinct names,
/// resolvable references, and backwards-only references outside letrec.
pub fn parse_let(src: &str) -> Result<LetProgram, CliError> {
    let toks = lex(src)?;
    let mut cur = Cursor::new(src, &toks);

    cur.expect_keyword("inputs")?;
    let mut inputs = Vec::new();
    if !cur.eat_punct(';') {
        loop {
            let (name, _) = expect_ident(&mut cur, "an input name")?;
            let sort = if cur.eat_punct(':') {
                Some(expect_ident(&mut cur, "a sort name")?.0)
            } else {
                None
            };
            inputs.push((name, sort));
            if cur.eat_punct(';') {
                break;
            }
            cur.expect_punct(',')?;
        }
    }

    let mut bindings = Vec::new();
    let mut recursive: Option<bool> = None;
    loop {
        let keyword = match cur.peek_word() {
            Some("let") => false,
            Some("letrec") => true,
            _ => break,
        };
        let token = cur.next().unwrap();
        match recursive {
            None => recursive = Some(keyword),
            Some(mode) if mode != keyword => {
                return Err(CliError::syntax(
                    token.line,
                    token.col,
                    "cannot mix let and letrec; the first binding fixes the mode",
                ));
            }
            Some(_) => {}
        }
        let (name, _) = expect_ident(&mut cur, "a binding name")?;
        let sort = if cur.eat_punct(':') {
            Some(expect_ident(&mut cur, "a sort name")?.0)
        } else {
            None
        };
        match cur.peek() {
            Some(t) if t.tok == Tok::Punct('=') => {
                cur.next();
            }
            Some(t) => return Err(CliError::syntax(t.line, t.col, "expected '='")),
            None => return Err(CliError::syntax(0, 0, "expected '=' (at end of input)")),
        }
        let op = match cur.peek().map(|t| t.tok.clone()) {
            Some(Tok::Word(w)) => {
                cur.next();
                w
            }
            Some(Tok::Quoted(w)) => {
                cur.next();
                w
            }
            _ => {
                let (line, col) = cur
                    .peek()
                    .map(|t| (t.line, t.col))
                    .unwrap_or((0, 0));
                return Err(CliError::syntax(line, col, "expected an operation name"));
            }
        };
        let mut args = Vec::new();
        if cur.eat_punct('(') {
            if !cur.eat_punct(')') {
                loop {
                    args.push(expect_ident(&mut cur, "an argument name")?.0);
                    if cur.eat_punct(')') {
                        break;
                    }
                    cur.expect_punct(',')?;
                }
            }
        }
        cur.expect_punct(';')?;
        bindings.push(Binding {
            name,
            sort,
            op,
            args,
        });
    }

    cur.expect_keyword("outputs")?;
    let mut outputs = Vec::new();
    if !cur.done() && !cur.eat_punct(';') {
        loop {
            outputs.push(expect_ident(&mut cur, "an output name")?.0);
            if cur.done() || cur.eat_punct(';') {
                break;
            }
            cur.expect_punct(',')?;
        }
    }
    if !cur.done() {
        return Err(CliError::syntax(
            cur.peek().unwrap().line,
            cur.peek().unwrap().col,
            "trailing input after outputs",
        ));
    }

    let program = LetProgram {
        inputs,
        bindings,
        outputs,
        recursive: recursive.unwrap_or(false),
    };
    check_references(&program)?;
    Ok(program)
}

fn check_references(p: &LetProgram) -> Result<(), CliError> {
    let mut declared: BTreeSet<&str> = BTreeSet::new();
    for (name, _) in &p.inputs {
        if !declared.insert(name) {
            return Err(CliError::Shadowed(name.clone()));
        }
    }
    for b in &p.bindings {
        if !declared.insert(&b.name) {
            return Err(CliError::Shadowed(b.name.clone()));
        }
    }
    // Non-recursive programs may only look backwards.
    let mut visible: BTreeSet<&str> = p.inputs.iter().map(|(n, _)| n.as_str()).collect();
    for (i, b) in p.bindings.iter().enumerate() {
        for arg in &b.args {
            if !declared.contains(arg.as_str()) {
                return Err(CliError::UnknownName(arg.clone()));
            }
            if !p.recursive && !visible.contains(arg.as_str()) {
                return Err(CliError::ForwardReference {
                    name: arg.clone(),
                    line: i + 1,
                });
            }
        }
        visible.insert(&b.name);
    }
    let mut seen_outputs: BTreeSet<&str> = BTreeSet::new();
    for out in &p.outputs {
        if !declared.contains(out.as_str()) {
            return Err(CliError::UnknownName(out.clone()));
        }
        if !seen_outputs.insert(out) {
            return Err(CliError::Shadowed(out.clone()));
        }
    }
    Ok(())
}

impl fmt::Display for LetProgram {
    /// The normalized form: quoted non-identifier operations, explicit
    /// argument lists, one binding per line.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "inputs")?;
        for (i, (name, sort)) in self.inputs.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, " {name}")?;
            if let Some(sort) = sort {
                write!(f, ": {sort}")?;
            }
        }
        writeln!(f, ";")?;
        let keyword = if self.recursive { "letrec" } else { "let" };
        for b in &self.bindings {
            let op = if is_identifier(&b.op) {
                b.op.clone()
            } else {
                format!("\"{}\"", b.op)
            };
            write!(f, "{keyword} {}", b.name)?;
            if let Some(sort) = &b.sort {
                write!(f, ": {sort}")?;
            }
            writeln!(f, " = {op}({});", b.args.join(", "))?;
        }
        write!(f, "outputs")?;
        for (i, out) in self.outputs.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, " {out}")?;
        }
        writeln!(f, ";")
    }
}
