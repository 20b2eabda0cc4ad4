//! Recursive-descent reader for the FOF/CNF subset of TPTP.

use super::formula::{Connective, Formula, Quantifier, Term};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Axiom,
    Hypothesis,
    Definition,
    Assumption,
    Lemma,
    Theorem,
    Conjecture,
    NegatedConjecture,
    Plain,
}

impl Role {
    fn parse(s: &str) -> Option<Role> {
        Some(match s {
            "axiom" => Role::Axiom,
            "hypothesis" => Role::Hypothesis,
            "definition" => Role::Definition,
            "assumption" => Role::Assumption,
            "lemma" => Role::Lemma,
            "theorem" => Role::Theorem,
            "conjecture" => Role::Conjecture,
            "negated_conjecture" => Role::NegatedConjecture,
            "plain" => Role::Plain,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Role::Axiom => "axiom",
            Role::Hypothesis => "hypothesis",
            Role::Definition => "definition",
            Role::Assumption => "assumption",
            Role::Lemma => "lemma",
            Role::Theorem => "theorem",
            Role::Conjecture => "conjecture",
            Role::NegatedConjecture => "negated_conjecture",
            Role::Plain => "plain",
        }
    }

    /// Roles that state a fact rather than something to be proved.
    pub fn is_axiom_like(self) -> bool {
        !matches!(self, Role::Conjecture | Role::NegatedConjecture)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnnotatedFormula {
    pub name: String,
    pub role: Role,
    pub formula: Formula,
    pub line: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Entry {
    Formula(AnnotatedFormula),
    Include { path: String, line: usize, column: usize },
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Lower(String),
    Upper(String),
    Quoted(String),
    Distinct(String),
    Dollar(String),
    Number(String),
    Punct(&'static str),
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

// Longest first so that prefixes never shadow longer operators.
const PUNCT: &[&str] = &[
    "<~>", "<=>", "-->", ":=", "=>", "<=", "~|", "~&", "!=", "!>", "?*", "@+", "@-", "(", ")", "[",
    "]", ",", ".", ":", "!", "?", "~", "&", "|", "=", "@", "^", ">", "*", "+", "{", "}",
];

fn lex(src: &str) -> Result<Vec<Spanned>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, n: usize| {
        for &b in &bytes[*i..*i + n] {
            if b == b'\n' {
                *line += 1;
                *col = 1;
            } else if b & 0xC0 != 0x80 {
                *col += 1;
            }
        }
        *i += n;
    };

    while i < bytes.len() {
        let c = bytes[i];
        let (start_line, start_col) = (line, col);
        let syntax = |message: String| Error::Syntax {
            line: start_line,
            column: start_col,
            message,
        };

        if c.is_ascii_whitespace() {
            advance(&mut i, &mut line, &mut col, 1);
            continue;
        }
        if c == b'%' {
            let end = src[i..].find('\n').map_or(bytes.len(), |n| i + n);
            let n = end - i;
            advance(&mut i, &mut line, &mut col, n);
            continue;
        }
        if src[i..].starts_with("/*") {
            let end = src[i + 2..]
                .find("*/")
                .map(|n| i + 2 + n + 2)
                .ok_or_else(|| syntax("unterminated block comment".into()))?;
            let n = end - i;
            advance(&mut i, &mut line, &mut col, n);
            continue;
        }

        let word_end = |from: usize| {
            let mut j = from;
            while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_') {
                j += 1;
            }
            j
        };

        let (tok, len) = if c.is_ascii_lowercase() {
            let j = word_end(i);
            (Tok::Lower(src[i..j].to_owned()), j - i)
        } else if c.is_ascii_uppercase() {
            let j = word_end(i);
            (Tok::Upper(src[i..j].to_owned()), j - i)
        } else if c == b'$' {
            let from = if bytes.get(i + 1) == Some(&b'$') { i + 2 } else { i + 1 };
            let j = word_end(from);
            if j == from {
                return Err(syntax("expected a word after `$`".into()));
            }
            (Tok::Dollar(src[i..j].to_owned()), j - i)
        } else if c.is_ascii_digit()
            || ((c == b'+' || c == b'-') && bytes.get(i + 1).is_some_and(u8::is_ascii_digit))
        {
            let mut j = i + 1;
            while j < bytes.len() {
                let b = bytes[j];
                let exp_sign = (b == b'+' || b == b'-') && matches!(bytes[j - 1], b'e' | b'E');
                let frac = (b == b'.' || b == b'/') && bytes.get(j + 1).is_some_and(u8::is_ascii_digit);
                if b.is_ascii_digit() || frac || exp_sign || b == b'e' || b == b'E' {
                    j += 1;
                } else {
                    break;
                }
            }
            (Tok::Number(src[i..j].to_owned()), j - i)
        } else if c == b'\'' || c == b'"' {
            let mut j = i + 1;
            let mut text = String::new();
            loop {
                let Some(ch) = src[j..].chars().next() else {
                    return Err(syntax("unterminated quoted name".into()));
                };
                if ch == '\\' {
                    let Some(esc) = src[j + 1..].chars().next() else {
                        return Err(syntax("unterminated quoted name".into()));
                    };
                    text.push(esc);
                    j += 1 + esc.len_utf8();
                } else if ch as u32 == c as u32 {
                    j += 1;
                    break;
                } else {
                    text.push(ch);
                    j += ch.len_utf8();
                }
            }
            if text.is_empty() {
                return Err(syntax("empty quoted name".into()));
            }
            let tok = if c == b'\'' {
                Tok::Quoted(text)
            } else {
                Tok::Distinct(format!("\"{text}\""))
            };
            (tok, j - i)
        } else if let Some(p) = PUNCT.iter().find(|p| src[i..].starts_with(**p)) {
            (Tok::Punct(p), p.len())
        } else {
            let ch = src[i..].chars().next().unwrap_or('?');
            return Err(syntax(format!("unexpected character `{ch}`")));
        };

        out.push(Spanned {
            tok,
            line: start_line,
            column: start_col,
        });
        advance(&mut i, &mut line, &mut col, len);
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    eof: (usize, usize),
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Lower(s) | Tok::Upper(s) | Tok::Dollar(s) | Tok::Number(s) | Tok::Distinct(s) => {
            format!("`{s}`")
        }
        Tok::Quoted(s) => format!("`'{s}'`"),
        Tok::Punct(p) => format!("`{p}`"),
    }
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map_or(self.eof, |t| (t.line, t.column))
    }

    fn error(&self, message: impl Into<String>) -> Error {
        let (line, column) = self.here();
        Error::Syntax {
            line,
            column,
            message: message.into(),
        }
    }

    fn unsupported(&self, construct: impl Into<String>) -> Error {
        let (line, column) = self.here();
        Error::UnsupportedConstruct {
            line,
            column,
            construct: construct.into(),
        }
    }

    fn unexpected(&self, wanted: &str) -> Error {
        match self.peek() {
            Some(t) => self.error(format!("expected {wanted}, found {}", describe(t))),
            None => self.error(format!("expected {wanted}, found end of input")),
        }
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Some(Tok::Punct(q)) if *q == p)
    }

    fn eat(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, p: &str) -> Result<()> {
        if self.eat(p) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{p}`")))
        }
    }

    fn reject_higher_order(&self) -> Result<()> {
        if let Some(Tok::Punct(p)) = self.peek() {
            if matches!(*p, "@" | "^" | "!>" | "?*" | ":=" | ">" | "*" | "+" | "@+" | "@-" | "-->" | "{" | "}") {
                return Err(self.unsupported(format!("higher-order or typed syntax `{p}`")));
            }
        }
        Ok(())
    }

    fn entry(&mut self) -> Result<Entry> {
        let (line, column) = self.here();
        let kind = match self.peek() {
            Some(Tok::Lower(w)) => w.clone(),
            _ => return Err(self.unexpected("an annotated formula")),
        };
        match kind.as_str() {
            "fof" | "cnf" => {}
            "include" => {
                self.pos += 1;
                self.expect("(")?;
                let path = match self.peek() {
                    Some(Tok::Quoted(p)) => p.clone(),
                    _ => return Err(self.unexpected("a quoted file name")),
                };
                self.pos += 1;
                if self.eat(",") {
                    self.skip_general_term()?;
                }
                self.expect(")")?;
                self.expect(".")?;
                return Ok(Entry::Include { path, line, column });
            }
            "tff" | "thf" | "tcf" | "tpi" => {
                return Err(self.unsupported(format!("`{kind}` formulas")));
            }
            _ => return Err(self.unexpected("`fof`, `cnf` or `include`")),
        }
        self.pos += 1;
        self.expect("(")?;
        let name = match self.peek() {
            Some(Tok::Lower(s) | Tok::Quoted(s) | Tok::Number(s)) => s.clone(),
            _ => return Err(self.unexpected("a formula name")),
        };
        self.pos += 1;
        self.expect(",")?;
        let role = match self.peek() {
            Some(Tok::Lower(r)) => match Role::parse(r) {
                Some(role) => role,
                None => return Err(self.unsupported(format!("formula role `{r}`"))),
            },
            _ => return Err(self.unexpected("a formula role")),
        };
        self.pos += 1;
        self.expect(",")?;
        let formula = self.logic_formula()?;
        if self.eat(",") {
            self.skip_general_term()?;
        }
        self.expect(")")?;
        self.expect(".")?;
        Ok(Entry::Formula(AnnotatedFormula {
            name,
            role,
            formula,
            line,
        }))
    }

    /// Skips source/useful-info annotations up to (not including) the
    /// closing parenthesis of the enclosing annotated formula.
    fn skip_general_term(&mut self) -> Result<()> {
        let mut depth = 0usize;
        loop {
            match self.peek() {
                None => return Err(self.unexpected("`)`")),
                Some(Tok::Punct("(" | "[")) => depth += 1,
                Some(Tok::Punct(")" | "]")) => {
                    if depth == 0 {
                        return Ok(());
                    }
                    depth -= 1;
                }
                _ => {}
            }
            self.pos += 1;
        }
    }

    fn binary_op(&self) -> Option<Connective> {
        Some(match self.peek()? {
            Tok::Punct("&") => Connective::And,
            Tok::Punct("|") => Connective::Or,
            Tok::Punct("=>") => Connective::Implies,
            Tok::Punct("<=") => Connective::ImpliedBy,
            Tok::Punct("<=>") => Connective::Iff,
            Tok::Punct("<~>") => Connective::Xor,
            Tok::Punct("~|") => Connective::Nor,
            Tok::Punct("~&") => Connective::Nand,
            _ => return None,
        })
    }

    fn logic_formula(&mut self) -> Result<Formula> {
        let first = self.unit_formula()?;
        let Some(op) = self.binary_op() else {
            self.reject_higher_order()?;
            return Ok(first);
        };
        self.pos += 1;
        let second = self.unit_formula()?;
        let mut acc = Formula::binary(op, first, second);
        if matches!(op, Connective::And | Connective::Or) {
            while self.binary_op() == Some(op) {
                self.pos += 1;
                let next = self.unit_formula()?;
                acc = Formula::binary(op, acc, next);
            }
        }
        if self.binary_op().is_some() {
            return Err(self.error("mixed binary connectives need parentheses"));
        }
        self.reject_higher_order()?;
        Ok(acc)
    }

    fn unit_formula(&mut self) -> Result<Formula> {
        self.reject_higher_order()?;
        if self.eat("~") {
            return Ok(Formula::negate(self.unit_formula()?));
        }
        if self.is_punct("!") || self.is_punct("?") {
            let q = if self.eat("!") {
                Quantifier::Forall
            } else {
                self.pos += 1;
                Quantifier::Exists
            };
            self.expect("[")?;
            let mut vars = Vec::new();
            loop {
                match self.peek() {
                    Some(Tok::Upper(v)) => {
                        vars.push(v.clone());
                        self.pos += 1;
                    }
                    _ => return Err(self.unexpected("a variable")),
                }
                if self.is_punct(":") {
                    return Err(self.unsupported("typed quantified variable"));
                }
                if !self.eat(",") {
                    break;
                }
            }
            self.expect("]")?;
            self.expect(":")?;
            let body = self.unit_formula()?;
            return Ok(Formula::Quantified(q, vars, Box::new(body)));
        }
        if self.eat("(") {
            let f = self.logic_formula()?;
            self.expect(")")?;
            return Ok(f);
        }
        self.atomic_formula()
    }

    fn atomic_formula(&mut self) -> Result<Formula> {
        let start = self.pos;
        let lhs = self.term()?;
        if self.eat("=") {
            return Ok(Formula::Equal(lhs, self.term()?));
        }
        if self.eat("!=") {
            return Ok(Formula::NotEqual(lhs, self.term()?));
        }
        match lhs {
            Term::Var(_) => {
                self.pos = start;
                Err(self.error("a variable cannot stand as a formula"))
            }
            Term::App(name, args) => match name.as_str() {
                "$true" if args.is_empty() => Ok(Formula::True),
                "$false" if args.is_empty() => Ok(Formula::False),
                _ => Ok(Formula::Atom(name, args)),
            },
        }
    }

    fn term(&mut self) -> Result<Term> {
        self.reject_higher_order()?;
        let tok = self.peek().cloned();
        let (name, may_apply) = match tok {
            Some(Tok::Upper(v)) => {
                self.pos += 1;
                return Ok(Term::Var(v));
            }
            Some(Tok::Lower(s) | Tok::Quoted(s)) => (s, true),
            Some(Tok::Number(s) | Tok::Distinct(s)) => (s, false),
            Some(Tok::Dollar(s)) => {
                if s != "$true" && s != "$false" {
                    return Err(self.unsupported(format!("defined symbol `{s}`")));
                }
                (s, false)
            }
            _ => return Err(self.unexpected("a term or atom")),
        };
        self.pos += 1;
        let mut args = Vec::new();
        if may_apply && self.eat("(") {
            loop {
                args.push(self.term()?);
                if !self.eat(",") {
                    break;
                }
            }
            self.expect(")")?;
        }
        Ok(Term::App(name, args))
    }
}

/// Parses a TPTP-style document into annotated formulas and include
/// directives, in source order.
pub fn parse_entries(src: &str) -> Result<Vec<Entry>> {
    let toks = lex(src)?;
    let eof = match toks.last() {
        Some(t) => (t.line, t.column + 1),
        None => (1, 1),
    };
    let mut p = Parser { toks, pos: 0, eof };
    let mut out = Vec::new();
    while p.peek().is_some() {
        out.push(p.entry()?);
    }
    Ok(out)
}

/// Parses a single formula (no `fof(...)` wrapper).
pub fn parse_formula(src: &str) -> Result<Formula> {
    let toks = lex(src)?;
    let eof = toks.last().map_or((1, 1), |t| (t.line, t.column + 1));
    let mut p = Parser { toks, pos: 0, eof };
    let f = p.logic_formula()?;
    if p.peek().is_some() {
        return Err(p.unexpected("end of formula"));
    }
    Ok(f)
}
