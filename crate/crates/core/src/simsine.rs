//! Similarity SInE: the trigger relation extended with embedding neighbours.
//!
//! Every symbol allowed to trigger an axiom also lends that right to the KB
//! symbols mapped from its `k` most similar vocabulary tokens. Selection
//! over the extended index is unchanged from plain SInE.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::embedding::EmbeddingStore;
use crate::error::{Error, Result};
use crate::kb::{Goal, KnowledgeBase, SymbolId};
use crate::mapping::SymbolMapping;
use crate::selection::{SelectionResult, Strategy};
use crate::sine::{base_triggers, goal_seeds, steps_to_result, trigger_steps, SineConfig, TriggerIndex};
use crate::stats::SymbolStats;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimSineConfig {
    pub depth: usize,
    pub tolerance: f64,
    pub k: usize,
}

impl SimSineConfig {
    pub fn validate(&self, store: &EmbeddingStore) -> Result<()> {
        SineConfig {
            depth: self.depth,
            tolerance: self.tolerance,
        }
        .validate()?;
        if self.k < 1 {
            return Err(Error::InvalidConfig("k must be at least 1".into()));
        }
        if self.k >= store.len() {
            return Err(Error::KTooLarge {
                k: self.k,
                available: store.len().saturating_sub(1),
            });
        }
        Ok(())
    }
}

/// KB symbols reachable from `symbol` through its mapped token's `k`
/// nearest vocabulary neighbours.
pub fn similar_symbols(
    kb: &KnowledgeBase,
    store: &EmbeddingStore,
    mapping: &SymbolMapping,
    symbol: SymbolId,
    k: usize,
) -> Result<Vec<SymbolId>> {
    let Some(token) = mapping.token(kb.symbol(symbol).as_str()) else {
        return Ok(Vec::new());
    };
    let mut out = Vec::new();
    for (row, _) in store.simwords_rows(token, k)? {
        if let Some(syms) = mapping.inverse(store.token(row)) {
            out.extend(syms.iter().filter_map(|s| kb.symbol_id(s.as_str())));
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

pub fn build_sim_trigger_index(
    kb: &KnowledgeBase,
    stats: &SymbolStats,
    store: &EmbeddingStore,
    mapping: &SymbolMapping,
    config: &SimSineConfig,
) -> Result<TriggerIndex> {
    config.validate(store)?;

    let base: Vec<Vec<SymbolId>> = (0..kb.len())
        .map(|pos| base_triggers(kb, stats, config.tolerance, pos).collect())
        .collect();

    let mut distinct: Vec<SymbolId> = base.iter().flatten().copied().collect();
    distinct.sort_unstable();
    distinct.dedup();
    let expansions: HashMap<SymbolId, Vec<SymbolId>> = distinct
        .par_iter()
        .map(|&s| Ok((s, similar_symbols(kb, store, mapping, s, config.k)?)))
        .collect::<Result<_>>()?;

    let mut allowed = vec![Vec::new(); kb.symbol_count()];
    let mut triggering = Vec::new();
    for (pos, triggers) in base.iter().enumerate() {
        triggering.clear();
        for s in triggers {
            triggering.push(*s);
            triggering.extend_from_slice(&expansions[s]);
        }
        triggering.sort_unstable();
        triggering.dedup();
        for s in &triggering {
            allowed[s.index()].push(pos);
        }
    }
    Ok(TriggerIndex::from_lists(allowed))
}

pub fn similarity_sine_select(
    kb: &KnowledgeBase,
    goal: &Goal,
    index: &TriggerIndex,
    config: &SimSineConfig,
) -> SelectionResult {
    let steps = trigger_steps(kb, index, goal_seeds(kb, goal), config.depth);
    steps_to_result(
        kb,
        &steps,
        Strategy::Simsine {
            depth: config.depth,
            tolerance: config.tolerance,
            k: config.k,
        },
    )
}
