//! The text formats: signature files, graph files, and the canonical
//! tree rendering.
//!
//! A signature file is a sequence of lines
//!
//! ```text
//! sort star;
//! op "+" : (star, star) -> star;
//! ```
//!
//! A graph file is a sequence of blocks. `signature { ... }` carries
//! signature lines inline; `inputs { x: star; }` declares input nodes;
//! `nodes { 1: "+"($x, 2); }` declares internal nodes, with `$name`
//! marking references to inputs; `outputs { b: 1; }` names boundary
//! outputs; `coalgebra { 1: "+"_1([x],[y]); }` optionally carries a tree
//! assignment in the canonical rendering. `#` starts a line comment.
//! Operation names may be any unicode atom; quote them when they contain
//! punctuation the reader splits on. Inside tree renderings the
//! underscore separates the operation from the node label, so atoms
//! containing underscores are quoted there.

use crate::error::CliError;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use tg_core::family::SortedSet;
use tg_core::graph::NodeDef;
use tg_core::trees::PTree;
use tg_core::{ConcreteTermGraph, Signature};

/// Punctuation that ends a bare atom everywhere in the text formats.
const PUNCT: &[char] = &[
    '(', ')', '[', ']', '{', '}', ',', ';', ':', '=', '"', '$', '<', '>', '#',
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Word(String),
    Quoted(String),
    Punct(char),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
    pub start: usize,
    pub end: usize,
}

/// Split source text into words, quoted atoms and punctuation, skipping
/// whitespace and `#` comments. Words keep underscores and unicode.
pub fn lex(src: &str) -> Result<Vec<Token>, CliError> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = src.char_indices().peekable();
    while let Some(&(at, c)) = chars.peek() {
        if c == '\n' {
            chars.next();
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            chars.next();
            col += 1;
            continue;
        }
        if c == '#' {
            while let Some(&(_, c)) = chars.peek() {
                if c == '\n' {
                    break;
                }
                chars.next();
            }
            continue;
        }
        if c == '"' {
            let (start_line, start_col) = (line, col);
            chars.next();
            col += 1;
            let mut word = String::new();
            let mut closed = false;
            let word_start = at;
            let mut end = at + 1;
            for (i, c) in chars.by_ref() {
                col += 1;
                if c == '"' {
                    closed = true;
                    end = i + 1;
                    break;
                }
                if c == '\n' {
                    break;
                }
                word.push(c);
                end = i + c.len_utf8();
            }
            if !closed {
                return Err(CliError::syntax(start_line, start_col, "unterminated quote"));
            }
            out.push(Token {
                tok: Tok::Quoted(word),
                line: start_line,
                col: start_col,
                start: word_start,
                end,
            });
            continue;
        }
        if PUNCT.contains(&c) {
            chars.next();
            out.push(Token {
                tok: Tok::Punct(c),
                line,
                col,
                start: at,
                end: at + c.len_utf8(),
            });
            col += 1;
            continue;
        }
        // A word: everything up to whitespace or punctuation.
        let (start_line, start_col) = (line, col);
        let mut word = String::new();
        let mut end = at;
        while let Some(&(i, c)) = chars.peek() {
            if c.is_whitespace() || PUNCT.contains(&c) {
                break;
            }
            word.push(c);
            end = i + c.len_utf8();
            chars.next();
            col += 1;
        }
        out.push(Token {
            tok: Tok::Word(word),
            line: start_line,
            col: start_col,
            start: at,
            end,
        });
    }
    Ok(out)
}

/// Cursor over a token stream with one-token lookahead.
pub struct Cursor<'a> {
    toks: &'a [Token],
    at: usize,
    src: &'a str,
}

impl<'a> Cursor<'a> {
    pub fn new(src: &'a str, toks: &'a [Token]) -> Self {
        Cursor { toks, at: 0, src }
    }

    pub fn peek(&self) -> Option<&'a Token> {
        self.toks.get(self.at)
    }

    pub fn next(&mut self) -> Option<&'a Token> {
        let t = self.toks.get(self.at);
        self.at += 1;
        t
    }

    pub fn done(&self) -> bool {
        self.at >= self.toks.len()
    }

    fn err_here(&self, msg: impl Into<String>) -> CliError {
        match self.peek() {
            Some(t) => CliError::syntax(t.line, t.col, msg),
            None => {
                let line = self.src.lines().count().max(1);
                CliError::syntax(line, 1, format!("{} (at end of input)", msg.into()))
            }
        }
    }

    pub fn expect_punct(&mut self, c: char) -> Result<&'a Token, CliError> {
        match self.peek() {
            Some(t) if t.tok == Tok::Punct(c) => Ok(self.next().unwrap()),
            _ => Err(self.err_here(format!("expected {c:?}"))),
        }
    }

    pub fn eat_punct(&mut self, c: char) -> bool {
        if let Some(t) = self.peek() {
            if t.tok == Tok::Punct(c) {
                self.at += 1;
                return true;
            }
        }
        false
    }

    /// A word or quoted atom.
    pub fn expect_atom(&mut self, what: &str) -> Result<String, CliError> {
        match self.peek().map(|t| &t.tok) {
            Some(Tok::Word(w)) => {
                let w = w.clone();
                self.at += 1;
                Ok(w)
            }
            Some(Tok::Quoted(w)) => {
                let w = w.clone();
                self.at += 1;
                Ok(w)
            }
            _ => Err(self.err_here(format!("expected {what}"))),
        }
    }

    pub fn expect_keyword(&mut self, kw: &str) -> Result<(), CliError> {
        match self.peek().map(|t| &t.tok) {
            Some(Tok::Word(w)) if w == kw => {
                self.at += 1;
                Ok(())
            }
            _ => Err(self.err_here(format!("expected {kw:?}"))),
        }
    }

    pub fn peek_word(&self) -> Option<&'a str> {
        match self.peek().map(|t| &t.tok) {
            Some(Tok::Word(w)) => Some(w.as_str()),
            _ => None,
        }
    }

    /// Raw source up to (not including) the next `;`, consuming it.
    pub fn raw_until_semicolon(&mut self) -> Result<&'a str, CliError> {
        let start = match self.peek() {
            Some(t) => t.start,
            None => return Err(self.err_here("expected a tree before ';'")),
        };
        let mut end = start;
        while let Some(t) = self.peek() {
            if t.tok == Tok::Punct(';') {
                self.at += 1;
                return Ok(&self.src[start..end]);
            }
            end = t.end;
            self.at += 1;
        }
        Err(self.err_here("missing ';'"))
    }
}

/// `-` followed by `>`: the arrow of an operation declaration.
fn expect_arrow(cur: &mut Cursor) -> Result<(), CliError> {
    match cur.peek().map(|t| &t.tok) {
        Some(Tok::Word(w)) if w == "-" => {
            cur.next();
            cur.expect_punct('>')?;
            Ok(())
        }
        _ => Err(cur.err_here("expected '->'")),
    }
}

fn parse_signature_items(cur: &mut Cursor, stop_at_brace: bool) -> Result<Signature, CliError> {
    let mut sorts: Vec<String> = Vec::new();
    let mut ops: Vec<(String, Vec<String>, String)> = Vec::new();
    loop {
        match cur.peek_word() {
            Some("sort") => {
                cur.next();
                sorts.push(cur.expect_atom("a sort name")?);
                cur.expect_punct(';')?;
            }
            Some("op") => {
                cur.next();
                let name = cur.expect_atom("an operation name")?;
                cur.expect_punct(':')?;
                cur.expect_punct('(')?;
                let mut inputs = Vec::new();
                if !cur.eat_punct(')') {
                    loop {
                        inputs.push(cur.expect_atom("a sort name")?);
                        if cur.eat_punct(')') {
                            break;
                        }
                        cur.expect_punct(',')?;
                    }
                }
                expect_arrow(cur)?;
                let output = cur.expect_atom("a sort name")?;
                cur.expect_punct(';')?;
                ops.push((name, inputs, output));
            }
            _ => {
                if stop_at_brace {
                    cur.expect_punct('}')?;
                }
                break;
            }
        }
    }
    Ok(Signature::new(sorts, ops)?)
}

/// Parse a standalone signature file.
pub fn parse_signature(src: &str) -> Result<Signature, CliError> {
    let toks = lex(src)?;
    let mut cur = Cursor::new(src, &toks);
    let sig = parse_signature_items(&mut cur, false)?;
    if !cur.done() {
        return Err(cur.err_here("expected 'sort' or 'op'"));
    }
    Ok(sig)
}

/// A reference to an input (`$x`) or an internal node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeRef {
    Input(String),
    Internal(String),
}

fn parse_ref(cur: &mut Cursor) -> Result<NodeRef, CliError> {
    if cur.eat_punct('$') {
        Ok(NodeRef::Input(cur.expect_atom("an input name")?))
    } else {
        Ok(NodeRef::Internal(cur.expect_atom("a node name")?))
    }
}

/// A parsed graph document, before wellformedness checks.
#[derive(Debug, Default)]
pub struct Document {
    pub signature: Option<Signature>,
    pub inputs: Vec<(String, String)>,
    pub nodes: Vec<(String, String, Vec<NodeRef>)>,
    pub outputs: Option<Vec<(String, NodeRef)>>,
    pub coalgebra_raw: Option<Vec<(String, String)>>,
}

/// Parse the block structure of a graph file.
pub fn parse_document(src: &str) -> Result<Document, CliError> {
    let toks = lex(src)?;
    let mut cur = Cursor::new(src, &toks);
    let mut doc = Document::default();
    while !cur.done() {
        match cur.peek_word() {
            Some("signature") => {
                cur.next();
                cur.expect_punct('{')?;
                doc.signature = Some(parse_signature_items(&mut cur, true)?);
            }
            Some("inputs") => {
                cur.next();
                cur.expect_punct('{')?;
                while !cur.eat_punct('}') {
                    let name = cur.expect_atom("an input name")?;
                    cur.expect_punct(':')?;
                    let sort = cur.expect_atom("a sort name")?;
                    cur.expect_punct(';')?;
                    doc.inputs.push((name, sort));
                }
            }
            Some("nodes") => {
                cur.next();
                cur.expect_punct('{')?;
                while !cur.eat_punct('}') {
                    let name = cur.expect_atom("a node name")?;
                    cur.expect_punct(':')?;
                    let op = cur.expect_atom("an operation name")?;
                    let mut children = Vec::new();
                    if cur.eat_punct('(') {
                        if !cur.eat_punct(')') {
                            loop {
                                children.push(parse_ref(&mut cur)?);
                                if cur.eat_punct(')') {
                                    break;
                                }
                                cur.expect_punct(',')?;
                            }
                        }
                    }
                    cur.expect_punct(';')?;
                    doc.nodes.push((name, op, children));
                }
            }
            Some("outputs") => {
                cur.next();
                cur.expect_punct('{')?;
                let mut outs = Vec::new();
                while !cur.eat_punct('}') {
                    let name = cur.expect_atom("an output name")?;
                    cur.expect_punct(':')?;
                    outs.push((name, parse_ref(&mut cur)?));
                    cur.expect_punct(';')?;
                }
                doc.outputs = Some(outs);
            }
            Some("coalgebra") => {
                cur.next();
                cur.expect_punct('{')?;
                let mut entries = Vec::new();
                while !cur.eat_punct('}') {
                    let name = cur.expect_atom("a node name")?;
                    cur.expect_punct(':')?;
                    let raw = cur.raw_until_semicolon()?;
                    entries.push((name, raw.to_string()));
                }
                doc.coalgebra_raw = Some(entries);
            }
            _ => return Err(cur.err_here("expected a block: signature, inputs, nodes, outputs or coalgebra")),
        }
    }
    Ok(doc)
}

/// A loaded graph file: validated graph, optional outputs, optional tree
/// assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Loaded {
    pub sig: Signature,
    pub graph: ConcreteTermGraph,
    /// Output boundary: name, referenced node (inputs by their name).
    pub outputs: Option<Vec<(String, String)>>,
    pub coalgebra: Option<BTreeMap<String, PTree>>,
}

/// Assemble a parsed document, falling back to `external` for the
/// signature when the file has no inline block.
pub fn assemble(doc: Document, external: Option<&Signature>) -> Result<Loaded, CliError> {
    let sig = match (&doc.signature, external) {
        (Some(sig), _) => sig.clone(),
        (None, Some(sig)) => sig.clone(),
        (None, None) => return Err(CliError::MissingSignature),
    };
    let inputs = SortedSet::from_pairs(doc.inputs.clone())?;
    let mut nodes = BTreeMap::new();
    for (name, op_name, children) in &doc.nodes {
        let op = sig
            .op(op_name)
            .ok_or_else(|| CliError::UnknownOp(op_name.clone()))?
            .clone();
        let children = children
            .iter()
            .map(|r| match r {
                NodeRef::Input(n) => {
                    if inputs.contains(n) {
                        Ok(n.clone())
                    } else {
                        Err(CliError::UnknownName(format!("${n}")))
                    }
                }
                NodeRef::Internal(n) => Ok(n.clone()),
            })
            .collect::<Result<Vec<_>, _>>()?;
        if nodes
            .insert(name.clone(), NodeDef { op, children })
            .is_some()
        {
            return Err(CliError::Shadowed(name.clone()));
        }
    }
    let graph = ConcreteTermGraph::new(&sig, inputs, nodes)?;
    let outputs = match &doc.outputs {
        None => None,
        Some(outs) => {
            let mut resolved = Vec::new();
            for (name, r) in outs {
                let node = match r {
                    NodeRef::Input(n) => {
                        if !graph.is_input(n) {
                            return Err(CliError::UnknownName(format!("${n}")));
                        }
                        n.clone()
                    }
                    NodeRef::Internal(n) => {
                        if graph.node(n).is_none() {
                            return Err(CliError::UnknownName(n.clone()));
                        }
                        n.clone()
                    }
                };
                resolved.push((name.clone(), node));
            }
            Some(resolved)
        }
    };
    let coalgebra = match &doc.coalgebra_raw {
        None => None,
        Some(entries) => {
            let mut map = BTreeMap::new();
            for (name, raw) in entries {
                map.insert(name.clone(), parse_ptree(raw, &sig)?);
            }
            Some(map)
        }
    };
    Ok(Loaded {
        sig,
        graph,
        outputs,
        coalgebra,
    })
}

/// Parse one tree in the canonical rendering: `[x]` or
/// `op_label(child,...)`, with quoting for atoms containing reserved
/// characters or underscores.
pub fn parse_ptree(src: &str, sig: &Signature) -> Result<PTree, CliError> {
    let mut p = TreeParser {
        src,
        chars: src.char_indices().peekable(),
        sig,
    };
    let tree = p.tree()?;
    p.skip_ws();
    if let Some(&(i, _)) = p.chars.peek() {
        return Err(CliError::syntax(1, i + 1, "trailing input after tree"));
    }
    Ok(tree)
}

struct TreeParser<'a> {
    src: &'a str,
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    sig: &'a Signature,
}

impl<'a> TreeParser<'a> {
    fn skip_ws(&mut self) {
        while let Some(&(_, c)) = self.chars.peek() {
            if c.is_whitespace() {
                self.chars.next();
            } else {
                break;
            }
        }
    }

    fn err(&mut self, msg: impl Into<String>) -> CliError {
        let col = self.chars.peek().map(|&(i, _)| i + 1).unwrap_or(self.src.len() + 1);
        CliError::syntax(1, col, msg)
    }

    fn expect(&mut self, c: char) -> Result<(), CliError> {
        self.skip_ws();
        match self.chars.peek() {
            Some(&(_, found)) if found == c => {
                self.chars.next();
                Ok(())
            }
            _ => Err(self.err(format!("expected {c:?}"))),
        }
    }

    fn atom(&mut self) -> Result<String, CliError> {
        self.skip_ws();
        match self.chars.peek() {
            Some(&(_, '"')) => {
                self.chars.next();
                let mut word = String::new();
                for (_, c) in self.chars.by_ref() {
                    if c == '"' {
                        return Ok(word);
                    }
                    word.push(c);
                }
                Err(self.err("unterminated quote"))
            }
            Some(&(_, c)) if !c.is_whitespace() && !PUNCT.contains(&c) && c != '_' => {
                let mut word = String::new();
                while let Some(&(_, c)) = self.chars.peek() {
                    if c.is_whitespace() || PUNCT.contains(&c) || c == '_' {
                        break;
                    }
                    word.push(c);
                    self.chars.next();
                }
                Ok(word)
            }
            _ => Err(self.err("expected an atom")),
        }
    }

    fn tree(&mut self) -> Result<PTree, CliError> {
        self.skip_ws();
        if let Some(&(_, '[')) = self.chars.peek() {
            self.chars.next();
            let var = self.atom()?;
            self.expect(']')?;
            return Ok(PTree::leaf(var));
        }
        let op_name = self.atom()?;
        self.expect('_')?;
        let label = self.atom()?;
        self.expect('(')?;
        let mut children = Vec::new();
        self.skip_ws();
        if let Some(&(_, ')')) = self.chars.peek() {
            self.chars.next();
        } else {
            loop {
                children.push(self.tree()?);
                self.skip_ws();
                match self.chars.next() {
                    Some((_, ')')) => break,
                    Some((_, ',')) => continue,
                    _ => return Err(self.err("expected ',' or ')'")),
                }
            }
        }
        let op = self
            .sig
            .op(&op_name)
            .ok_or(CliError::UnknownOp(op_name))?
            .clone();
        Ok(PTree::node(label, op, children))
    }
}

/// Quote an atom for the block formats: bare unless it contains
/// whitespace or punctuation (underscores are fine here).
pub fn file_atom(name: &str) -> String {
    let plain = !name.is_empty()
        && name
            .chars()
            .all(|c| !c.is_whitespace() && !PUNCT.contains(&c));
    if plain {
        name.to_string()
    } else {
        format!("\"{name}\"")
    }
}

/// Render a signature as standalone lines.
pub fn write_signature(sig: &Signature) -> String {
    let mut out = String::new();
    for sort in sig.sorts() {
        let _ = writeln!(out, "sort {sort};");
    }
    for op in sig.ops() {
        let inputs = op
            .inputs()
            .iter()
            .map(|s| s.as_str())
            .collect::<Vec<_>>()
            .join(", ");
        let _ = writeln!(out, "op {} : ({}) -> {};", file_atom(op.name()), inputs, op.output());
    }
    out
}

/// Render a graph file with an inline signature; outputs and coalgebra
/// blocks are included when present.
pub fn write_graph_file(loaded: &Loaded) -> String {
    let mut out = String::new();
    out.push_str("signature {\n");
    for line in write_signature(&loaded.sig).lines() {
        let _ = writeln!(out, "  {line}");
    }
    out.push_str("}\n");

    if !loaded.graph.inputs().is_empty() {
        out.push_str("inputs {\n");
        for (name, sort) in loaded.graph.inputs().iter() {
            let _ = writeln!(out, "  {}: {sort};", file_atom(name));
        }
        out.push_str("}\n");
    }
    if !loaded.graph.nodes().is_empty() {
        out.push_str("nodes {\n");
        for (name, def) in loaded.graph.nodes() {
            let children = def
                .children
                .iter()
                .map(|c| {
                    if loaded.graph.is_input(c) {
                        format!("${}", file_atom(c))
                    } else {
                        file_atom(c)
                    }
                })
                .collect::<Vec<_>>()
                .join(", ");
            let _ = writeln!(out, "  {}: {}({children});", file_atom(name), file_atom(def.op.name()));
        }
        out.push_str("}\n");
    }
    if let Some(outputs) = &loaded.outputs {
        out.push_str("outputs {\n");
        for (name, node) in outputs {
            let rendered = if loaded.graph.is_input(node) {
                format!("${}", file_atom(node))
            } else {
                file_atom(node)
            };
            let _ = writeln!(out, "  {}: {rendered};", file_atom(name));
        }
        out.push_str("}\n");
    }
    if let Some(coalgebra) = &loaded.coalgebra {
        out.push_str("coalgebra {\n");
        for (name, tree) in coalgebra {
            let _ = writeln!(out, "  {}: {tree};", file_atom(name));
        }
        out.push_str("}\n");
    }
    out
}
