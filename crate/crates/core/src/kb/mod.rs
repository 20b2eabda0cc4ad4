//! Knowledge bases, goals and their symbol indexes.

mod formula;
mod parser;

use std::borrow::Borrow;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use formula::{Connective, Formula, Quantifier, Term};
pub use parser::{parse_entries, parse_formula, AnnotatedFormula, Entry, Role};

use crate::error::{Error, Result};

/// A predicate or function symbol name. Variables are never symbols.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Symbol(String);

impl Symbol {
    pub fn new(name: impl Into<String>) -> Self {
        let name = name.into();
        debug_assert!(!name.is_empty());
        Symbol(name)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl Borrow<str> for Symbol {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl AsRef<str> for Symbol {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

/// Dense index of a symbol within one [`KnowledgeBase`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymbolId(pub u32);

impl SymbolId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Set of symbols of a formula, `sym(F)`.
pub fn symbols_of(formula: &Formula) -> BTreeSet<Symbol> {
    formula.symbol_names().into_iter().map(Symbol).collect()
}

#[derive(Clone, Debug)]
pub struct Axiom {
    pub id: String,
    pub formula: Formula,
    /// Sorted, deduplicated symbol ids.
    pub symbols: Vec<SymbolId>,
}

/// Immutable indexed collection of axioms.
#[derive(Clone, Debug, Default)]
pub struct KnowledgeBase {
    axioms: Vec<Axiom>,
    symbols: Vec<Symbol>,
    by_name: HashMap<Symbol, SymbolId>,
    by_id: HashMap<String, usize>,
    /// Inverse of the per-axiom symbol sets: axiom positions, ascending.
    occurrences: Vec<Vec<usize>>,
}

impl KnowledgeBase {
    /// Builds a knowledge base from `(id, formula)` pairs in the given order.
    pub fn from_formulas(items: impl IntoIterator<Item = (String, Formula)>) -> Result<Self> {
        let mut kb = KnowledgeBase::default();
        for (id, formula) in items {
            kb.push(id, formula)?;
        }
        Ok(kb)
    }

    fn push(&mut self, id: String, formula: Formula) -> Result<()> {
        if self.by_id.contains_key(&id) {
            return Err(Error::DuplicateAxiomId(id));
        }
        let pos = self.axioms.len();
        let mut ids = Vec::new();
        formula.collect_symbols(&mut |name| {
            let sid = match self.by_name.get(name) {
                Some(&sid) => sid,
                None => {
                    let sid = SymbolId(self.symbols.len() as u32);
                    self.symbols.push(Symbol::new(name));
                    self.by_name.insert(Symbol::new(name), sid);
                    self.occurrences.push(Vec::new());
                    sid
                }
            };
            ids.push(sid);
        });
        ids.sort_unstable();
        ids.dedup();
        for sid in &ids {
            self.occurrences[sid.index()].push(pos);
        }
        self.by_id.insert(id.clone(), pos);
        self.axioms.push(Axiom {
            id,
            formula,
            symbols: ids,
        });
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.axioms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axioms.is_empty()
    }

    pub fn axioms(&self) -> &[Axiom] {
        &self.axioms
    }

    pub fn axiom(&self, pos: usize) -> &Axiom {
        &self.axioms[pos]
    }

    pub fn position_of(&self, id: &str) -> Option<usize> {
        self.by_id.get(id).copied()
    }

    /// Number of distinct symbols, `|sym(KB)|`.
    pub fn symbol_count(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn symbol(&self, id: SymbolId) -> &Symbol {
        &self.symbols[id.index()]
    }

    pub fn symbol_id(&self, name: &str) -> Option<SymbolId> {
        self.by_name.get(name).copied()
    }

    /// Positions of the axioms containing `id`, ascending.
    pub fn axioms_with(&self, id: SymbolId) -> &[usize] {
        &self.occurrences[id.index()]
    }

    pub fn axiom_symbols(&self, pos: usize) -> impl Iterator<Item = &Symbol> + '_ {
        self.axioms[pos].symbols.iter().map(|&s| self.symbol(s))
    }

    /// Renders the knowledge base as `fof(id, axiom, ...)` lines.
    pub fn to_tptp(&self) -> String {
        let mut out = String::new();
        for a in &self.axioms {
            write_fof(&mut out, &a.id, Role::Axiom, &a.formula);
        }
        out
    }
}

pub(crate) fn write_fof(out: &mut String, name: &str, role: Role, formula: &Formula) {
    use std::fmt::Write;
    let _ = writeln!(
        out,
        "fof({}, {}, {}).",
        formula::Name(name),
        role.as_str(),
        formula
    );
}

/// Parses a knowledge base. Every axiom-like formula becomes an [`Axiom`];
/// conjectures and include directives are rejected.
pub fn parse_kb(src: &str) -> Result<KnowledgeBase> {
    let mut kb = KnowledgeBase::default();
    for entry in parse_entries(src)? {
        add_kb_entry(&mut kb, entry)?;
    }
    Ok(kb)
}

fn add_kb_entry(kb: &mut KnowledgeBase, entry: Entry) -> Result<()> {
    match entry {
        Entry::Formula(f) if f.role.is_axiom_like() => kb.push(f.name, f.formula),
        Entry::Formula(f) => Err(Error::ConjectureInKb(f.name)),
        Entry::Include { line, column, .. } => Err(Error::UnsupportedConstruct {
            line,
            column,
            construct: "include directive".into(),
        }),
    }
}

/// Reads a knowledge base file, resolving one level of `include` directives
/// relative to the file's directory (then the `TPTP` environment variable).
pub fn load_kb(path: &Path) -> Result<KnowledgeBase> {
    let src = fs::read_to_string(path)?;
    let mut kb = KnowledgeBase::default();
    for entry in parse_entries(&src)? {
        match entry {
            Entry::Include {
                path: inc,
                line,
                column,
            } => {
                let resolved = resolve_include(path, &inc).ok_or_else(|| Error::UnsupportedConstruct {
                    line,
                    column,
                    construct: format!("include of missing file `{inc}`"),
                })?;
                let inner = fs::read_to_string(resolved)?;
                for e in parse_entries(&inner)? {
                    add_kb_entry(&mut kb, e)?;
                }
            }
            e => add_kb_entry(&mut kb, e)?,
        }
    }
    Ok(kb)
}

fn resolve_include(from: &Path, inc: &str) -> Option<std::path::PathBuf> {
    let local = from.parent().unwrap_or(Path::new(".")).join(inc);
    if local.is_file() {
        return Some(local);
    }
    let root = std::env::var_os("TPTP")?;
    let p = Path::new(&root).join(inc);
    p.is_file().then_some(p)
}

/// The implication `F1 & ... & Fn => Q` to be shown from the knowledge base.
#[derive(Clone, Debug, PartialEq)]
pub struct Goal {
    pub premises: Vec<AnnotatedFormula>,
    pub query: AnnotatedFormula,
    pub symbols: BTreeSet<Symbol>,
}

impl Goal {
    pub fn new(premises: Vec<AnnotatedFormula>, query: AnnotatedFormula) -> Self {
        let mut symbols = symbols_of(&query.formula);
        for p in &premises {
            symbols.extend(symbols_of(&p.formula));
        }
        Goal {
            premises,
            query,
            symbols,
        }
    }

    /// The goal as a single implication formula.
    pub fn implication(&self) -> Formula {
        if self.premises.is_empty() {
            return self.query.formula.clone();
        }
        let lhs = Formula::conjunction(self.premises.iter().map(|p| p.formula.clone()));
        Formula::binary(Connective::Implies, lhs, self.query.formula.clone())
    }

    /// Premises followed by the conjecture, in TPTP syntax.
    pub fn to_tptp(&self) -> String {
        let mut out = String::new();
        for p in &self.premises {
            write_fof(&mut out, &p.name, Role::Axiom, &p.formula);
        }
        write_fof(&mut out, &self.query.name, Role::Conjecture, &self.query.formula);
        out
    }
}

/// Parses a goal: any number of axiom-like formulas (premises) and exactly
/// one conjecture.
pub fn parse_goal(src: &str) -> Result<Goal> {
    let mut premises = Vec::new();
    let mut query: Option<AnnotatedFormula> = None;
    for entry in parse_entries(src)? {
        match entry {
            Entry::Formula(f) if f.role == Role::Conjecture => {
                if let Some(q) = &query {
                    return Err(Error::MultipleConjectures {
                        first: q.name.clone(),
                        second: f.name,
                    });
                }
                query = Some(f);
            }
            Entry::Formula(f) if f.role.is_axiom_like() => premises.push(f),
            Entry::Formula(f) => {
                return Err(Error::UnsupportedConstruct {
                    line: f.line,
                    column: 1,
                    construct: format!("`{}` role in goal", f.role.as_str()),
                })
            }
            Entry::Include { line, column, .. } => {
                return Err(Error::UnsupportedConstruct {
                    line,
                    column,
                    construct: "include directive in goal".into(),
                })
            }
        }
    }
    let query = query.ok_or(Error::NoConjecture)?;
    Ok(Goal::new(premises, query))
}
