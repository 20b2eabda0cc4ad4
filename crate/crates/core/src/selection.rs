use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::kb::KnowledgeBase;

/// A selection strategy together with its parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Strategy {
    Sine { depth: usize, tolerance: f64 },
    Simsine { depth: usize, tolerance: f64, k: usize },
    Vector { k: usize },
    VbUnion { depth: usize, tolerance: f64, k: usize },
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Sine { .. } => "sine",
            Strategy::Simsine { .. } => "simsine",
            Strategy::Vector { .. } => "vector",
            Strategy::VbUnion { .. } => "vb-union",
        }
    }

    pub fn needs_embedding(&self) -> bool {
        !matches!(self, Strategy::Sine { .. })
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Strategy::Sine { depth, tolerance } => write!(f, "sine depth={depth} t={tolerance}"),
            Strategy::Simsine { depth, tolerance, k } => {
                write!(f, "simsine depth={depth} t={tolerance} k={k}")
            }
            Strategy::Vector { k } => write!(f, "vector k={k}"),
            Strategy::VbUnion { depth, tolerance, k } => {
                write!(f, "vb-union depth={depth} t={tolerance} k={k}")
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Sine,
    Vector,
    Both,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Selected {
    /// Position of the axiom in the knowledge base.
    pub position: usize,
    pub id: String,
    /// Minimal trigger step, for trigger-based selections.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<usize>,
    /// Cosine similarity to the goal, for vector-based selections.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
    pub origin: Origin,
}

/// Selected axioms in rank order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelectionResult {
    pub strategy: Strategy,
    pub selected: Vec<Selected>,
}

impl SelectionResult {
    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }

    pub fn positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.selected.iter().map(|s| s.position)
    }

    pub fn position_set(&self) -> BTreeSet<usize> {
        self.positions().collect()
    }

    pub fn ids(&self) -> Vec<&str> {
        self.selected.iter().map(|s| s.id.as_str()).collect()
    }

    /// Selected axioms in rank order, rendered as TPTP axioms.
    pub fn to_tptp(&self, kb: &KnowledgeBase) -> String {
        let mut out = String::new();
        for s in &self.selected {
            let a = kb.axiom(s.position);
            crate::kb::write_fof(&mut out, &a.id, crate::kb::Role::Axiom, &a.formula);
        }
        out
    }
}
