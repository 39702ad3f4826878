//! Non-clausal Boolean formulas: abstract syntax, a parser for the `! & |`
//! surface language, evaluation, and negation.
//!
//! The grammar is deliberately small. Identifiers match
//! `[A-Za-z_][A-Za-z0-9_]*`, `#` starts a line comment, precedence is
//! `!` over `&` over `|`, and a file holds exactly one formula. Richer
//! connectives are rejected at the tokenizer with a pointed message instead
//! of being desugared.

use std::collections::HashMap;
use std::fmt;

/// Dense index of an input variable.
///
/// The parser assigns ids in first-occurrence order, so id order doubles as
/// the seed order for decision-order construction. CNF encoders allocate
/// auxiliary variables strictly above the input range.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct VarId(pub u32);

impl VarId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// Bidirectional name table for input variables. Ids form a contiguous
/// prefix `0..len`.
#[derive(Clone, Debug, Default)]
pub struct VarTable {
    names: Vec<String>,
    ids: HashMap<String, VarId>,
}

impl VarTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the id for `name`, interning it on first sight.
    pub fn intern(&mut self, name: &str) -> VarId {
        if let Some(&id) = self.ids.get(name) {
            return id;
        }
        let id = VarId(self.names.len() as u32);
        self.names.push(name.to_string());
        self.ids.insert(name.to_string(), id);
        id
    }

    pub fn id(&self, name: &str) -> Option<VarId> {
        self.ids.get(name).copied()
    }

    /// Panics if `v` was never interned.
    pub fn name(&self, v: VarId) -> &str {
        &self.names[v.index()]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// All ids in interning order, i.e. first-occurrence order.
    pub fn ids(&self) -> impl Iterator<Item = VarId> {
        (0..self.names.len() as u32).map(VarId)
    }
}

/// Formula over input variables. Conjunction and disjunction are n-ary with
/// at least two children; negation is a real node (the parser does not push
/// it anywhere).
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Formula {
    Var(VarId),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

impl Formula {
    /// Evaluates under a total assignment indexed by [`VarId`].
    ///
    /// Panics if the assignment does not cover some variable of the formula.
    pub fn evaluate(&self, assignment: &[bool]) -> bool {
        match self {
            Formula::Var(v) => *assignment
                .get(v.index())
                .unwrap_or_else(|| panic!("assignment does not cover {v}")),
            Formula::Not(g) => !g.evaluate(assignment),
            Formula::And(cs) => cs.iter().all(|c| c.evaluate(assignment)),
            Formula::Or(cs) => cs.iter().any(|c| c.evaluate(assignment)),
        }
    }

    /// Logical negation as a top-level node; a double negation collapses.
    pub fn negated(&self) -> Formula {
        match self {
            Formula::Not(g) => (**g).clone(),
            other => Formula::Not(Box::new(other.clone())),
        }
    }

    /// Variables in first-occurrence order, each exactly once.
    pub fn variables(&self) -> Vec<VarId> {
        let mut seen = Vec::new();
        let mut out = Vec::new();
        self.collect_vars(&mut seen, &mut out);
        out
    }

    fn collect_vars(&self, seen: &mut Vec<bool>, out: &mut Vec<VarId>) {
        match self {
            Formula::Var(v) => {
                if seen.len() <= v.index() {
                    seen.resize(v.index() + 1, false);
                }
                if !seen[v.index()] {
                    seen[v.index()] = true;
                    out.push(*v);
                }
            }
            Formula::Not(g) => g.collect_vars(seen, out),
            Formula::And(cs) | Formula::Or(cs) => {
                for c in cs {
                    c.collect_vars(seen, out);
                }
            }
        }
    }

    /// Renders back to the surface syntax with minimal parentheses.
    /// `parse(render(f))` reproduces `f` structurally.
    pub fn render(&self, table: &VarTable) -> String {
        let mut s = String::new();
        self.render_into(table, &mut s);
        s
    }

    fn render_into(&self, table: &VarTable, out: &mut String) {
        match self {
            Formula::Var(v) => out.push_str(table.name(*v)),
            Formula::Not(g) => {
                out.push('!');
                // only leaves and nested negations go bare under '!'
                let bare = matches!(**g, Formula::Var(_) | Formula::Not(_));
                self::render_child(g, table, out, bare);
            }
            Formula::And(cs) => {
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        out.push_str(" & ");
                    }
                    let bare = !matches!(c, Formula::Or(_) | Formula::And(_));
                    self::render_child(c, table, out, bare);
                }
            }
            Formula::Or(cs) => {
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        out.push_str(" | ");
                    }
                    let bare = !matches!(c, Formula::Or(_));
                    self::render_child(c, table, out, bare);
                }
            }
        }
    }
}

fn render_child(c: &Formula, table: &VarTable, out: &mut String, bare: bool) {
    if bare {
        c.render_into(table, out);
    } else {
        out.push('(');
        c.render_into(table, out);
        out.push(')');
    }
}

/// Syntax error with a 1-based source position.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{col}: {msg}")]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub msg: String,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Bang,
    Amp,
    Pipe,
    LParen,
    RParen,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Bang => write!(f, "`!`"),
            Tok::Amp => write!(f, "`&`"),
            Tok::Pipe => write!(f, "`|`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: u32,
    col: u32,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            chars: text.chars().peekable(),
            line: 1,
            col: 1,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    /// Next token plus the position where it starts.
    fn next_tok(&mut self) -> Result<(Tok, u32, u32), ParseError> {
        loop {
            match self.chars.peek() {
                None => return Ok((Tok::Eof, self.line, self.col)),
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('#') => {
                    while let Some(c) = self.bump() {
                        if c == '\n' {
                            break;
                        }
                    }
                }
                Some(_) => break,
            }
        }
        let (line, col) = (self.line, self.col);
        let c = self.bump().unwrap();
        let tok = match c {
            '!' => Tok::Bang,
            '&' => Tok::Amp,
            '|' => Tok::Pipe,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                s.push(c);
                while let Some(&n) = self.chars.peek() {
                    if n.is_ascii_alphanumeric() || n == '_' {
                        s.push(n);
                        self.bump();
                    } else {
                        break;
                    }
                }
                Tok::Ident(s)
            }
            other => {
                return Err(ParseError {
                    line,
                    col,
                    msg: format!(
                        "unsupported character `{other}`; the only connectives are `!`, `&`, `|`"
                    ),
                })
            }
        };
        Ok((tok, line, col))
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    line: u32,
    col: u32,
    table: VarTable,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Result<Self, ParseError> {
        let mut lexer = Lexer::new(text);
        let (tok, line, col) = lexer.next_tok()?;
        Ok(Parser {
            lexer,
            tok,
            line,
            col,
            table: VarTable::new(),
        })
    }

    fn advance(&mut self) -> Result<(), ParseError> {
        let (tok, line, col) = self.lexer.next_tok()?;
        self.tok = tok;
        self.line = line;
        self.col = col;
        Ok(())
    }

    fn error(&self, msg: String) -> ParseError {
        ParseError {
            line: self.line,
            col: self.col,
            msg,
        }
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut parts = vec![self.conjunction()?];
        while self.tok == Tok::Pipe {
            self.advance()?;
            parts.push(self.conjunction()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Formula::Or(parts)
        })
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut parts = vec![self.unary()?];
        while self.tok == Tok::Amp {
            self.advance()?;
            parts.push(self.unary()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Formula::And(parts)
        })
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        if self.tok == Tok::Bang {
            self.advance()?;
            return Ok(Formula::Not(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        match self.tok.clone() {
            Tok::Ident(name) => {
                self.advance()?;
                Ok(Formula::Var(self.table.intern(&name)))
            }
            Tok::LParen => {
                self.advance()?;
                let f = self.disjunction()?;
                if self.tok != Tok::RParen {
                    return Err(self.error(format!("expected `)`, found {}", self.tok)));
                }
                self.advance()?;
                Ok(f)
            }
            other => Err(self.error(format!("expected a variable, `!` or `(`, found {other}"))),
        }
    }
}

/// Parses one formula from `text`, interning variables in first-occurrence
/// order.
pub fn parse(text: &str) -> Result<(Formula, VarTable), ParseError> {
    let mut p = Parser::new(text)?;
    if p.tok == Tok::Eof {
        return Err(p.error("empty input: expected a formula".to_string()));
    }
    let f = p.disjunction()?;
    if p.tok != Tok::Eof {
        return Err(p.error(format!("expected end of input, found {}", p.tok)));
    }
    Ok((f, p.table))
}
