//! First-order formula trees and their TPTP rendering.

use std::collections::BTreeSet;
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    /// Function application; constants are 0-ary applications.
    App(String, Vec<Term>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quantifier {
    Forall,
    Exists,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Connective {
    And,
    Or,
    Implies,
    ImpliedBy,
    Iff,
    Xor,
    Nor,
    Nand,
}

impl Connective {
    pub fn as_tptp(self) -> &'static str {
        match self {
            Connective::And => "&",
            Connective::Or => "|",
            Connective::Implies => "=>",
            Connective::ImpliedBy => "<=",
            Connective::Iff => "<=>",
            Connective::Xor => "<~>",
            Connective::Nor => "~|",
            Connective::Nand => "~&",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Atom(String, Vec<Term>),
    Equal(Term, Term),
    NotEqual(Term, Term),
    Not(Box<Formula>),
    Binary(Connective, Box<Formula>, Box<Formula>),
    Quantified(Quantifier, Vec<String>, Box<Formula>),
}

impl Formula {
    pub fn atom(predicate: impl Into<String>, args: Vec<Term>) -> Self {
        Formula::Atom(predicate.into(), args)
    }

    pub fn binary(op: Connective, left: Formula, right: Formula) -> Self {
        Formula::Binary(op, Box::new(left), Box::new(right))
    }

    pub fn negate(inner: Formula) -> Self {
        Formula::Not(Box::new(inner))
    }

    pub fn forall(vars: Vec<String>, body: Formula) -> Self {
        Formula::Quantified(Quantifier::Forall, vars, Box::new(body))
    }

    /// Left-nested conjunction of `parts`; `$true` when empty.
    pub fn conjunction(parts: impl IntoIterator<Item = Formula>) -> Self {
        parts
            .into_iter()
            .reduce(|acc, f| Formula::binary(Connective::And, acc, f))
            .unwrap_or(Formula::True)
    }

    /// Predicate and function symbol names occurring in the formula.
    /// Variables, connectives, equality and `$true`/`$false` are not symbols.
    pub fn symbol_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut |name| {
            if !out.contains(name) {
                out.insert(name.to_owned());
            }
        });
        out
    }

    pub(crate) fn collect_symbols(&self, sink: &mut impl FnMut(&str)) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(p, args) => {
                sink(p);
                for a in args {
                    a.collect_symbols(sink);
                }
            }
            Formula::Equal(l, r) | Formula::NotEqual(l, r) => {
                l.collect_symbols(sink);
                r.collect_symbols(sink);
            }
            Formula::Not(f) | Formula::Quantified(_, _, f) => f.collect_symbols(sink),
            Formula::Binary(_, l, r) => {
                l.collect_symbols(sink);
                r.collect_symbols(sink);
            }
        }
    }
}

impl Term {
    fn collect_symbols(&self, sink: &mut impl FnMut(&str)) {
        if let Term::App(f, args) = self {
            sink(f);
            for a in args {
                a.collect_symbols(sink);
            }
        }
    }
}

fn is_lower_word(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn is_number(s: &str) -> bool {
    let body = s.strip_prefix(['+', '-']).unwrap_or(s);
    !body.is_empty()
        && body.chars().next().is_some_and(|c| c.is_ascii_digit())
        && body
            .chars()
            .all(|c| c.is_ascii_digit() || matches!(c, '.' | '/' | 'e' | 'E' | '+' | '-'))
}

/// Writes a functor or predicate name, single-quoting it when it is not a
/// plain TPTP lower word.
pub(crate) struct Name<'a>(pub &'a str);

impl fmt::Display for Name<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.0;
        let distinct = s.len() >= 2 && s.starts_with('"') && s.ends_with('"');
        if is_lower_word(s) || is_number(s) || distinct || s.starts_with('$') {
            return f.write_str(s);
        }
        f.write_str("'")?;
        for c in s.chars() {
            if c == '\'' || c == '\\' {
                f.write_str("\\")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str("'")
    }
}

fn write_args(f: &mut fmt::Formatter<'_>, args: &[Term]) -> fmt::Result {
    if args.is_empty() {
        return Ok(());
    }
    f.write_str("(")?;
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{a}")?;
    }
    f.write_str(")")
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::App(name, args) => {
                write!(f, "{}", Name(name))?;
                write_args(f, args)
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => f.write_str("$true"),
            Formula::False => f.write_str("$false"),
            Formula::Atom(p, args) => {
                write!(f, "{}", Name(p))?;
                write_args(f, args)
            }
            Formula::Equal(l, r) => write!(f, "{l} = {r}"),
            Formula::NotEqual(l, r) => write!(f, "{l} != {r}"),
            Formula::Not(inner) => match inner.as_ref() {
                Formula::Atom(..) | Formula::True | Formula::False => write!(f, "~ {inner}"),
                _ => write!(f, "~ ({inner})"),
            },
            Formula::Binary(op, l, r) => write!(f, "({l} {} {r})", op.as_tptp()),
            Formula::Quantified(q, vars, body) => {
                let q = match q {
                    Quantifier::Forall => '!',
                    Quantifier::Exists => '?',
                };
                write!(f, "{q}[{}] : ({body})", vars.join(","))
            }
        }
    }
}
