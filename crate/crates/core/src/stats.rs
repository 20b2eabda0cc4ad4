//! Occurrence counts and inverse document frequencies of KB symbols.

use std::io::Write;

use crate::error::{Error, Result};
use crate::kb::{KnowledgeBase, SymbolId};

/// Per-symbol `occ` and `idf`, indexed by [`SymbolId`].
#[derive(Clone, Debug)]
pub struct SymbolStats {
    occ: Vec<usize>,
    idf: Vec<f64>,
    kb_size: usize,
}

impl SymbolStats {
    /// Natural-log idf: `idf(s) = ln(|KB| / occ(s))`.
    pub fn compute(kb: &KnowledgeBase) -> Result<Self> {
        Self::compute_with(kb, f64::ln)
    }

    /// Same counts, idf taken in an arbitrary logarithm base.
    pub fn compute_with_base(kb: &KnowledgeBase, base: f64) -> Result<Self> {
        let denom = base.ln();
        Self::compute_with(kb, move |x| x.ln() / denom)
    }

    fn compute_with(kb: &KnowledgeBase, log: impl Fn(f64) -> f64) -> Result<Self> {
        if kb.is_empty() {
            return Err(Error::EmptyKnowledgeBase);
        }
        let kb_size = kb.len();
        let occ: Vec<usize> = (0..kb.symbol_count())
            .map(|i| kb.axioms_with(SymbolId(i as u32)).len())
            .collect();
        let idf = occ
            .iter()
            .map(|&o| {
                if o == kb_size {
                    0.0
                } else {
                    log(kb_size as f64 / o as f64)
                }
            })
            .collect();
        Ok(SymbolStats { occ, idf, kb_size })
    }

    pub fn kb_size(&self) -> usize {
        self.kb_size
    }

    pub fn occ(&self, id: SymbolId) -> usize {
        self.occ[id.index()]
    }

    pub fn idf(&self, id: SymbolId) -> f64 {
        self.idf[id.index()]
    }

    pub fn occ_by_name(&self, kb: &KnowledgeBase, name: &str) -> Option<usize> {
        kb.symbol_id(name).map(|id| self.occ(id))
    }

    pub fn idf_by_name(&self, kb: &KnowledgeBase, name: &str) -> Option<f64> {
        kb.symbol_id(name).map(|id| self.idf(id))
    }

    /// Mean idf over `sym(KB)`; the weight assumed for goal symbols the KB
    /// does not contain.
    pub fn mean_idf(&self) -> f64 {
        if self.idf.is_empty() {
            return 0.0;
        }
        self.idf.iter().sum::<f64>() / self.idf.len() as f64
    }

    pub fn len(&self) -> usize {
        self.occ.len()
    }

    pub fn is_empty(&self) -> bool {
        self.occ.is_empty()
    }

    /// Writes `symbol<TAB>occ<TAB>idf`, most frequent first, ties by name.
    pub fn write_tsv(&self, kb: &KnowledgeBase, mut out: impl Write) -> Result<()> {
        let mut order: Vec<usize> = (0..self.occ.len()).collect();
        order.sort_by(|&a, &b| {
            self.occ[b].cmp(&self.occ[a]).then_with(|| {
                kb.symbols()[a].as_str().cmp(kb.symbols()[b].as_str())
            })
        });
        for i in order {
            writeln!(out, "{}\t{}\t{:.6}", kb.symbols()[i], self.occ[i], self.idf[i])?;
        }
        Ok(())
    }
}
