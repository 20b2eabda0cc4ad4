//! Random instance generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use premsel::kb::{AnnotatedFormula, Formula, Role, Term};
use premsel::mapping::{LexicalTable, Source};
use premsel::{EmbeddingStore, Goal, KnowledgeBase, Symbol};

/// A generated KB together with the symbol set of every axiom, kept
/// separately so oracles never consult the KB's own indexes.
pub struct Instance {
    pub kb: KnowledgeBase,
    pub axiom_symbols: Vec<BTreeSet<String>>,
    pub symbol_names: Vec<String>,
}

pub fn sym(i: usize) -> String {
    format!("s{i}")
}

/// Builds an axiom whose symbols are exactly `names`: the first is a unary
/// predicate over a variable, the rest alternate between propositional
/// atoms and constants under it.
pub fn axiom_formula(names: &[String]) -> Formula {
    let x = || Term::Var("X".into());
    let mut parts = vec![Formula::atom(names[0].as_str(), vec![x()])];
    for (i, n) in names[1..].iter().enumerate() {
        if i % 2 == 0 {
            parts.push(Formula::atom(n.as_str(), vec![]));
        } else {
            parts.push(Formula::atom(names[0].as_str(), vec![Term::App(n.clone(), vec![])]));
        }
    }
    Formula::forall(vec!["X".into()], Formula::conjunction(parts))
}

/// At most `max_axioms` axioms over at most `max_symbols` symbols.
pub fn random_instance(rng: &mut impl Rng, max_axioms: usize, max_symbols: usize) -> Instance {
    let n_sym = rng.gen_range(1..=max_symbols);
    let n_ax = rng.gen_range(1..=max_axioms);
    let pool: Vec<String> = (0..n_sym).map(sym).collect();
    let mut axiom_symbols = Vec::with_capacity(n_ax);
    let mut formulas = Vec::with_capacity(n_ax);
    for a in 0..n_ax {
        let size = rng.gen_range(1..=n_sym.min(5));
        let mut names: Vec<String> = pool.choose_multiple(rng, size).cloned().collect();
        names.shuffle(rng);
        formulas.push((format!("ax{a}"), axiom_formula(&names)));
        axiom_symbols.push(names.into_iter().collect());
    }
    let kb = KnowledgeBase::from_formulas(formulas).expect("generated KB is valid");
    let mut symbol_names: Vec<String> = axiom_symbols.iter().flatten().cloned().collect();
    symbol_names.sort();
    symbol_names.dedup();
    Instance {
        kb,
        axiom_symbols,
        symbol_names,
    }
}

pub fn goal_of(names: &[String]) -> Goal {
    let x = || vec![Term::Var("X".into())];
    let body = Formula::conjunction(names.iter().map(|n| Formula::atom(n.as_str(), x())));
    Goal::new(
        Vec::new(),
        AnnotatedFormula {
            name: "g".into(),
            role: Role::Conjecture,
            formula: Formula::forall(vec!["X".into()], body),
            line: 0,
        },
    )
}

/// Up to four goal symbols, some of which may be unknown to the KB.
pub fn random_goal(rng: &mut impl Rng, max_symbols: usize) -> (Goal, BTreeSet<String>) {
    let n = rng.gen_range(0..=4);
    let names: Vec<String> = (0..n).map(|_| sym(rng.gen_range(0..max_symbols + 3))).collect();
    let set = names.iter().cloned().collect();
    (goal_of(&names), set)
}

/// Non-zero vectors with integer entries in `-range..=range`, so that
/// exact ties occur.
pub fn int_vector(rng: &mut impl Rng, dim: usize, range: i32) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-range..=range) as f64).collect();
        if v.iter().any(|&x| x != 0.0) {
            return v;
        }
    }
}

pub fn real_vector(rng: &mut impl Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if v.iter().any(|&x| x != 0.0) {
            return v;
        }
    }
}

/// Embedding over a random subset of the KB symbol names (mapped by
/// brute force) plus `extra` unrelated words.
pub fn random_store(
    rng: &mut impl Rng,
    symbol_names: &[String],
    extra: usize,
    dim: usize,
    integer: bool,
) -> EmbeddingStore {
    let mut tokens: Vec<String> = symbol_names.iter().filter(|_| rng.gen_bool(0.7)).cloned().collect();
    tokens.extend((0..extra).map(|i| format!("w{i}")));
    tokens.shuffle(rng);
    let pairs: Vec<(String, Vec<f64>)> = tokens
        .into_iter()
        .map(|t| {
            let v = if integer { int_vector(rng, dim, 2) } else { real_vector(rng, dim) };
            (t, v)
        })
        .collect();
    EmbeddingStore::from_pairs(pairs).expect("generated embedding is valid")
}

/// A synonym table sending some KB symbols to random vocabulary tokens.
pub fn random_table(rng: &mut impl Rng, symbol_names: &[String], store: &EmbeddingStore) -> LexicalTable {
    let mut rows = Vec::new();
    for s in symbol_names {
        if rng.gen_bool(0.4) {
            let t = store.token(rng.gen_range(0..store.len())).to_owned();
            rows.push((Symbol::new(s.as_str()), t));
        }
    }
    LexicalTable::new(Source::Synonym, rows).unwrap()
}
