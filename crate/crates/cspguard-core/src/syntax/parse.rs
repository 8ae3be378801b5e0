//! Parser for `.cspl` process specifications.
//!
//! The surface language is a small ASCII dialect:
//!
//! ```text
//! spec      ::= header item*
//! header    ::= "alphabet" "{" names "}" ";"
//! item      ::= NAME "=" term ";"                 (process equation)
//!             | "option" NAME "=" NAME ";"        (analysis option)
//!             | "root" NAME ";"?                  (exactly once)
//!
//! term      ::= par
//! par       ::= int ( "[|" "{" names "}" "|]" int )*        left-assoc
//! int       ::= ext ( "|~|" ext )*                          left-assoc
//! ext       ::= seq ( "[]" seq )*                           left-assoc
//! seq       ::= prefix ( ";" prefix )*                      left-assoc
//! prefix    ::= EVENT "->" prefix | postfix
//! postfix   ::= atom ( "\" "{" names "}" | "[[" pairs "]]" )*
//! atom      ::= "STOP" | "SKIP" | "DIV" | NAME
//!             | "(" term ")" | "mu" NAME "." term
//! pairs     ::= NAME "<-" NAME ( "," NAME "<-" NAME )*
//! ```
//!
//! `μ`-bodies extend as far right as possible. An identifier directly
//! followed by `->` is an event (and must be declared); any other
//! identifier in term position is a process reference. `;` doubles as the
//! equation terminator and sequential composition: after a complete
//! operand, `;` continues the term unless the two following tokens read as
//! the start of a new item (`NAME =`, `option`, `root`, or end of input).
//! `P[[a <- b]]` performs `b` wherever `P` performs `a`; events without a
//! declared image keep their name (the relation is totalized). `--`
//! comments run to end of line. Malformed input is rejected, never
//! repaired.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::setlogic::{Alphabet, AlphabetError, EventSet, RenamingRelation};
use crate::syntax::ast::Term;

/// A parsed specification: declared alphabet, named equations (in source
/// order), distinguished root, and any `option` directives.
#[derive(Clone, Debug)]
pub struct Spec {
    pub alphabet: Alphabet,
    pub equations: Vec<(String, Term)>,
    pub root: String,
    pub options: BTreeMap<String, String>,
}

impl Spec {
    pub fn equation(&self, name: &str) -> Option<&Term> {
        self.equations
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, t)| t)
    }

    pub fn root_term(&self) -> &Term {
        self.equation(&self.root)
            .expect("spec invariant: root names an equation")
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: u32, col: u32, msg: String },
    #[error("undeclared event `{name}` at {line}:{col}")]
    UndeclaredEvent { name: String, line: u32, col: u32 },
    #[error("process `{name}` is referenced but never defined")]
    UnknownDefinition { name: String },
    #[error("process `{name}` is defined twice")]
    DuplicateDefinition { name: String },
    #[error("root process `{name}` is not defined")]
    UnknownRoot { name: String },
    #[error("bad alphabet: {0}")]
    Alphabet(#[from] AlphabetError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Arrow,     // ->
    IntCh,     // |~|
    ExtCh,     // []
    ParOpen,   // [|
    ParClose,  // |]
    RenOpen,   // [[
    RenClose,  // ]]
    MapsTo,    // <-
    Semi,
    Backslash,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Dot,
    Equals,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Arrow => write!(f, "`->`"),
            Tok::IntCh => write!(f, "`|~|`"),
            Tok::ExtCh => write!(f, "`[]`"),
            Tok::ParOpen => write!(f, "`[|`"),
            Tok::ParClose => write!(f, "`|]`"),
            Tok::RenOpen => write!(f, "`[[`"),
            Tok::RenClose => write!(f, "`]]`"),
            Tok::MapsTo => write!(f, "`<-`"),
            Tok::Semi => write!(f, "`;`"),
            Tok::Backslash => write!(f, "`\\`"),
            Tok::LBrace => write!(f, "`{{`"),
            Tok::RBrace => write!(f, "`}}`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::Dot => write!(f, "`.`"),
            Tok::Equals => write!(f, "`=`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: u32,
    col: u32,
}

type Spanned = (Tok, u32, u32);

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            line: self.line,
            col: self.col,
            msg: msg.into(),
        }
    }

    fn bump(&mut self) -> u8 {
        let c = self.src[self.pos];
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        c
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn peek2(&self) -> Option<u8> {
        self.src.get(self.pos + 1).copied()
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_ascii_whitespace() => {
                    self.bump();
                }
                Some(b'-') if self.peek2() == Some(b'-') => {
                    while let Some(c) = self.peek() {
                        if c == b'\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => break,
            }
        }
    }

    fn tokenize(mut self) -> Result<Vec<Spanned>, ParseError> {
        let mut out = Vec::new();
        loop {
            self.skip_trivia();
            let (line, col) = (self.line, self.col);
            let Some(c) = self.peek() else {
                out.push((Tok::Eof, line, col));
                return Ok(out);
            };
            let tok = match c {
                b'A'..=b'Z' | b'a'..=b'z' | b'_' => {
                    let start = self.pos;
                    while matches!(
                        self.peek(),
                        Some(b'A'..=b'Z' | b'a'..=b'z' | b'0'..=b'9' | b'_' | b'\'')
                    ) {
                        self.bump();
                    }
                    let s = std::str::from_utf8(&self.src[start..self.pos])
                        .expect("ident bytes are ASCII")
                        .to_string();
                    Tok::Ident(s)
                }
                b'0'..=b'9' => return Err(self.err("identifiers may not start with a digit")),
                b'-' => {
                    self.bump();
                    if self.peek() == Some(b'>') {
                        self.bump();
                        Tok::Arrow
                    } else {
                        return Err(self.err("expected `->`"));
                    }
                }
                b'<' => {
                    self.bump();
                    if self.peek() == Some(b'-') {
                        self.bump();
                        Tok::MapsTo
                    } else {
                        return Err(self.err("expected `<-`"));
                    }
                }
                b'|' => {
                    self.bump();
                    match self.peek() {
                        Some(b'~') if self.peek2() == Some(b'|') => {
                            self.bump();
                            self.bump();
                            Tok::IntCh
                        }
                        Some(b']') => {
                            self.bump();
                            Tok::ParClose
                        }
                        _ => return Err(self.err("expected `|~|` or `|]`")),
                    }
                }
                b'[' => {
                    self.bump();
                    match self.peek() {
                        Some(b']') => {
                            self.bump();
                            Tok::ExtCh
                        }
                        Some(b'|') => {
                            self.bump();
                            Tok::ParOpen
                        }
                        Some(b'[') => {
                            self.bump();
                            Tok::RenOpen
                        }
                        _ => return Err(self.err("expected `[]`, `[|`, or `[[`")),
                    }
                }
                b']' => {
                    self.bump();
                    if self.peek() == Some(b']') {
                        self.bump();
                        Tok::RenClose
                    } else {
                        return Err(self.err("expected `]]`"));
                    }
                }
                b';' => {
                    self.bump();
                    Tok::Semi
                }
                b'\\' => {
                    self.bump();
                    Tok::Backslash
                }
                b'{' => {
                    self.bump();
                    Tok::LBrace
                }
                b'}' => {
                    self.bump();
                    Tok::RBrace
                }
                b'(' => {
                    self.bump();
                    Tok::LParen
                }
                b')' => {
                    self.bump();
                    Tok::RParen
                }
                b',' => {
                    self.bump();
                    Tok::Comma
                }
                b'.' => {
                    self.bump();
                    Tok::Dot
                }
                b'=' => {
                    self.bump();
                    Tok::Equals
                }
                other => {
                    return Err(self.err(format!("unexpected character `{}`", other as char)))
                }
            };
            out.push((tok, line, col));
        }
    }
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    alphabet: Alphabet,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.toks.len() - 1);
        &self.toks[i].0
    }

    fn here(&self) -> (u32, u32) {
        let (_, l, c) = self.toks[self.pos];
        (l, c)
    }

    fn err_here(&self, msg: impl Into<String>) -> ParseError {
        let (line, col) = self.here();
        ParseError::Syntax {
            line,
            col,
            msg: msg.into(),
        }
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.err_here(format!("expected {want}, found {}", self.peek())))
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            other => Err(self.err_here(format!("expected {what}, found {other}"))),
        }
    }

    fn event_id(&self, name: &str) -> Result<crate::setlogic::EventId, ParseError> {
        let (line, col) = self.here();
        self.alphabet
            .id_of(name)
            .ok_or(ParseError::UndeclaredEvent {
                name: name.to_string(),
                line,
                col,
            })
    }

    /// `{a, b, c}` over the declared alphabet; `{}` is the empty set.
    fn event_set(&mut self) -> Result<EventSet, ParseError> {
        self.expect(Tok::LBrace)?;
        let mut set = EventSet::EMPTY;
        if *self.peek() != Tok::RBrace {
            loop {
                let name = match self.peek().clone() {
                    Tok::Ident(s) => s,
                    other => return Err(self.err_here(format!("expected event, found {other}"))),
                };
                let id = self.event_id(&name)?;
                self.bump();
                set.insert(id);
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RBrace)?;
        Ok(set)
    }

    /// True when the `;` at the cursor separates items rather than
    /// composing processes: next tokens read as `NAME =`, `option`, `root`,
    /// or end of input.
    fn semi_ends_item(&self) -> bool {
        match self.peek_at(1) {
            Tok::Eof => true,
            Tok::Ident(s) => {
                s == "root" || s == "option" || *self.peek_at(2) == Tok::Equals
            }
            _ => false,
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        self.par()
    }

    fn par(&mut self) -> Result<Term, ParseError> {
        let mut lhs = self.int_choice()?;
        while *self.peek() == Tok::ParOpen {
            self.bump();
            let sync = self.event_set()?;
            self.expect(Tok::ParClose)?;
            let rhs = self.int_choice()?;
            lhs = Term::parallel(lhs, sync, rhs);
        }
        Ok(lhs)
    }

    fn int_choice(&mut self) -> Result<Term, ParseError> {
        let mut lhs = self.ext_choice()?;
        while *self.peek() == Tok::IntCh {
            self.bump();
            let rhs = self.ext_choice()?;
            lhs = Term::int_choice(lhs, rhs);
        }
        Ok(lhs)
    }

    fn ext_choice(&mut self) -> Result<Term, ParseError> {
        let mut lhs = self.seq()?;
        while *self.peek() == Tok::ExtCh {
            self.bump();
            let rhs = self.seq()?;
            lhs = Term::ext_choice(lhs, rhs);
        }
        Ok(lhs)
    }

    fn seq(&mut self) -> Result<Term, ParseError> {
        let mut lhs = self.prefix()?;
        while *self.peek() == Tok::Semi && !self.semi_ends_item() {
            self.bump();
            let rhs = self.prefix()?;
            lhs = Term::seq(lhs, rhs);
        }
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<Term, ParseError> {
        if let Tok::Ident(name) = self.peek().clone() {
            if *self.peek_at(1) == Tok::Arrow {
                let id = self.event_id(&name)?;
                self.bump();
                self.bump();
                let rest = self.prefix()?;
                return Ok(Term::prefix(id, rest));
            }
        }
        self.postfix()
    }

    fn postfix(&mut self) -> Result<Term, ParseError> {
        let mut t = self.atom()?;
        loop {
            match self.peek() {
                Tok::Backslash => {
                    self.bump();
                    let set = self.event_set()?;
                    t = Term::hide(t, set);
                }
                Tok::RenOpen => {
                    self.bump();
                    let mut pairs = Vec::new();
                    loop {
                        let src = self.expect_ident("event")?;
                        let src = {
                            self.pos -= 1; // reposition for error span
                            let id = self.event_id(&src)?;
                            self.pos += 1;
                            id
                        };
                        self.expect(Tok::MapsTo)?;
                        let tgt_name = self.expect_ident("event")?;
                        let tgt = {
                            self.pos -= 1;
                            let id = self.event_id(&tgt_name)?;
                            self.pos += 1;
                            id
                        };
                        pairs.push((src, tgt));
                        if *self.peek() == Tok::Comma {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    self.expect(Tok::RenClose)?;
                    let rel = RenamingRelation::new(pairs, self.alphabet.size());
                    t = Term::rename(t, rel);
                }
                _ => return Ok(t),
            }
        }
    }

    fn atom(&mut self) -> Result<Term, ParseError> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Tok::Ident(s) => match s.as_str() {
                "STOP" => {
                    self.bump();
                    Ok(Term::Stop)
                }
                "SKIP" => {
                    self.bump();
                    Ok(Term::Skip)
                }
                "DIV" => {
                    self.bump();
                    Ok(Term::Div)
                }
                "mu" => {
                    self.bump();
                    let var = self.expect_ident("variable")?;
                    self.expect(Tok::Dot)?;
                    let body = self.term()?;
                    Ok(Term::mu(var, body))
                }
                "alphabet" | "root" | "option" => {
                    Err(self.err_here(format!("`{s}` is a keyword, not a process")))
                }
                _ => {
                    self.bump();
                    Ok(Term::var(s))
                }
            },
            other => Err(self.err_here(format!("expected a process, found {other}"))),
        }
    }
}

/// Parse a complete `.cspl` specification.
pub fn parse(text: &str) -> Result<Spec, ParseError> {
    let toks = Lexer::new(text).tokenize()?;
    let mut p = Parser {
        toks,
        pos: 0,
        alphabet: Alphabet::new(Vec::<String>::new()).expect("empty alphabet is valid"),
    };

    // Header.
    match p.peek().clone() {
        Tok::Ident(s) if s == "alphabet" => {
            p.bump();
        }
        _ => return Err(p.err_here("specification must start with `alphabet {...};`")),
    }
    p.expect(Tok::LBrace)?;
    let mut names = Vec::new();
    if *p.peek() != Tok::RBrace {
        loop {
            names.push(p.expect_ident("event name")?);
            if *p.peek() == Tok::Comma {
                p.bump();
            } else {
                break;
            }
        }
    }
    p.expect(Tok::RBrace)?;
    p.expect(Tok::Semi)?;
    p.alphabet = Alphabet::new(names)?;

    // Items.
    let mut equations: Vec<(String, Term)> = Vec::new();
    let mut options = BTreeMap::new();
    let mut root: Option<String> = None;
    loop {
        match p.peek().clone() {
            Tok::Eof => break,
            Tok::Ident(s) if s == "root" => {
                if root.is_some() {
                    return Err(p.err_here("`root` declared twice"));
                }
                p.bump();
                root = Some(p.expect_ident("process name")?);
                if *p.peek() == Tok::Semi {
                    p.bump();
                }
            }
            Tok::Ident(s) if s == "option" => {
                p.bump();
                let key = p.expect_ident("option name")?;
                p.expect(Tok::Equals)?;
                let value = p.expect_ident("option value")?;
                p.expect(Tok::Semi)?;
                options.insert(key, value);
            }
            Tok::Ident(name) => {
                if p.alphabet.id_of(&name).is_some() {
                    return Err(
                        p.err_here(format!("`{name}` is an event; processes need distinct names"))
                    );
                }
                if matches!(name.as_str(), "STOP" | "SKIP" | "DIV" | "mu") {
                    return Err(p.err_here(format!("`{name}` is reserved and cannot name a process")));
                }
                p.bump();
                p.expect(Tok::Equals)?;
                let term = p.term()?;
                if equations.iter().any(|(n, _)| *n == name) {
                    return Err(ParseError::DuplicateDefinition { name });
                }
                equations.push((name, term));
                match p.peek() {
                    Tok::Semi => {
                        p.bump();
                    }
                    Tok::Eof => {}
                    other => {
                        return Err(p.err_here(format!(
                            "expected `;` after equation, found {other}"
                        )))
                    }
                }
            }
            other => return Err(p.err_here(format!("expected an equation or `root`, found {other}"))),
        }
    }

    let root = root.ok_or_else(|| ParseError::Syntax {
        line: 0,
        col: 0,
        msg: "missing `root` declaration".into(),
    })?;
    if p.alphabet.size() == 0 && equations.is_empty() {
        return Err(ParseError::Syntax {
            line: 0,
            col: 0,
            msg: "empty specification".into(),
        });
    }

    // Every process reference must resolve to an equation or a μ binder.
    let defined: BTreeSet<&str> = equations.iter().map(|(n, _)| n.as_str()).collect();
    for (_, term) in &equations {
        for var in term.free_vars() {
            if !defined.contains(var.as_str()) {
                return Err(ParseError::UnknownDefinition { name: var });
            }
        }
    }
    if !defined.contains(root.as_str()) {
        return Err(ParseError::UnknownRoot { name: root });
    }

    Ok(Spec {
        alphabet: p.alphabet,
        equations,
        root,
        options,
    })
}
