//! Trigger-based axiom selection.
//!
//! A symbol may trigger an axiom it occurs in when no other symbol of that
//! axiom is more than `tolerance` times rarer. Selection starts from the
//! goal symbols and alternates between triggering axioms and adding their
//! symbols, up to the configured depth.

use crate::error::{Error, Result};
use crate::kb::{Goal, KnowledgeBase, SymbolId};
use crate::selection::{Origin, Selected, SelectionResult, Strategy};
use crate::stats::SymbolStats;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SineConfig {
    pub depth: usize,
    pub tolerance: f64,
}

impl Default for SineConfig {
    fn default() -> Self {
        SineConfig {
            depth: 1,
            tolerance: 1.0,
        }
    }
}

impl SineConfig {
    pub fn new(depth: usize, tolerance: f64) -> Result<Self> {
        let c = SineConfig { depth, tolerance };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.depth < 1 {
            return Err(Error::InvalidConfig("depth must be at least 1".into()));
        }
        if !(self.tolerance >= 1.0 && self.tolerance.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "tolerance must be a finite number >= 1, got {}",
                self.tolerance
            )));
        }
        Ok(())
    }
}

/// For each symbol, the axioms it may trigger (positions, ascending).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TriggerIndex {
    allowed: Vec<Vec<usize>>,
}

impl TriggerIndex {
    pub fn from_lists(allowed: Vec<Vec<usize>>) -> Self {
        TriggerIndex { allowed }
    }

    pub fn allowed(&self, id: SymbolId) -> &[usize] {
        &self.allowed[id.index()]
    }

    pub fn symbol_count(&self) -> usize {
        self.allowed.len()
    }

    /// Whether `id` may trigger the axiom at `pos`.
    pub fn triggers(&self, id: SymbolId, pos: usize) -> bool {
        self.allowed(id).binary_search(&pos).is_ok()
    }

    /// Number of (symbol, axiom) trigger pairs.
    pub fn pair_count(&self) -> usize {
        self.allowed.iter().map(Vec::len).sum()
    }
}

/// Symbols of the axiom at `pos` that may trigger it.
pub(crate) fn base_triggers<'a>(
    kb: &'a KnowledgeBase,
    stats: &'a SymbolStats,
    tolerance: f64,
    pos: usize,
) -> impl Iterator<Item = SymbolId> + 'a {
    let syms = &kb.axiom(pos).symbols;
    let min_occ = syms.iter().map(|&s| stats.occ(s)).min().unwrap_or(0);
    let limit = tolerance * min_occ as f64;
    syms.iter().copied().filter(move |&s| stats.occ(s) as f64 <= limit)
}

pub fn build_trigger_index(
    kb: &KnowledgeBase,
    stats: &SymbolStats,
    config: &SineConfig,
) -> TriggerIndex {
    let mut allowed = vec![Vec::new(); kb.symbol_count()];
    for pos in 0..kb.len() {
        for s in base_triggers(kb, stats, config.tolerance, pos) {
            allowed[s.index()].push(pos);
        }
    }
    TriggerIndex { allowed }
}

/// Minimal trigger step of every axiom reachable within `depth` steps from
/// `seeds`. Entries are `None` for axioms not selected.
pub fn trigger_steps(
    kb: &KnowledgeBase,
    index: &TriggerIndex,
    seeds: impl IntoIterator<Item = SymbolId>,
    depth: usize,
) -> Vec<Option<usize>> {
    let mut sym_seen = vec![false; kb.symbol_count()];
    let mut ax_step: Vec<Option<usize>> = vec![None; kb.len()];
    let mut frontier: Vec<SymbolId> = Vec::new();
    for s in seeds {
        if !sym_seen[s.index()] {
            sym_seen[s.index()] = true;
            frontier.push(s);
        }
    }
    for step in 1..=depth {
        let mut reached = Vec::new();
        for &s in &frontier {
            for &pos in index.allowed(s) {
                if ax_step[pos].is_none() {
                    ax_step[pos] = Some(step);
                    reached.push(pos);
                }
            }
        }
        if reached.is_empty() {
            break;
        }
        frontier.clear();
        for pos in reached {
            for &s in &kb.axiom(pos).symbols {
                if !sym_seen[s.index()] {
                    sym_seen[s.index()] = true;
                    frontier.push(s);
                }
            }
        }
    }
    ax_step
}

/// Goal symbols that also occur in the knowledge base.
pub fn goal_seeds<'a>(kb: &'a KnowledgeBase, goal: &'a Goal) -> impl Iterator<Item = SymbolId> + 'a {
    goal.symbols.iter().filter_map(|s| kb.symbol_id(s.as_str()))
}

pub(crate) fn steps_to_result(
    kb: &KnowledgeBase,
    steps: &[Option<usize>],
    strategy: Strategy,
) -> SelectionResult {
    let mut picked: Vec<(usize, usize)> = steps
        .iter()
        .enumerate()
        .filter_map(|(pos, st)| st.map(|st| (st, pos)))
        .collect();
    picked.sort_unstable();
    SelectionResult {
        strategy,
        selected: picked
            .into_iter()
            .map(|(step, position)| Selected {
                position,
                id: kb.axiom(position).id.clone(),
                step: Some(step),
                score: None,
                origin: Origin::Sine,
            })
            .collect(),
    }
}

/// Axioms that are m-step triggered for some m <= `depth`, ordered by
/// (first trigger step, source order).
pub fn sine_select(
    kb: &KnowledgeBase,
    goal: &Goal,
    index: &TriggerIndex,
    depth: usize,
    tolerance: f64,
) -> SelectionResult {
    let steps = trigger_steps(kb, index, goal_seeds(kb, goal), depth);
    steps_to_result(kb, &steps, Strategy::Sine { depth, tolerance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::{parse_goal, parse_kb};

    fn setup(src: &str, t: f64) -> (KnowledgeBase, TriggerIndex) {
        let kb = parse_kb(src).unwrap();
        let st = SymbolStats::compute(&kb).unwrap();
        let idx = build_trigger_index(&kb, &st, &SineConfig::new(1, t).unwrap());
        (kb, idx)
    }

    fn trig(kb: &KnowledgeBase, idx: &TriggerIndex, sym: &str, pos: usize) -> bool {
        idx.triggers(kb.symbol_id(sym).unwrap(), pos)
    }

    #[test]
    fn unique_minimum_triggers() {
        // p occurs in 5 axioms, q in 2.
        let src = "fof(a, axiom, p & q). fof(b, axiom, p & q). fof(c, axiom, p). fof(d, axiom, p). fof(e, axiom, p).";
        let (kb, idx) = setup(src, 1.0);
        assert!(trig(&kb, &idx, "q", 0));
        assert!(!trig(&kb, &idx, "p", 0));
        assert!(trig(&kb, &idx, "p", 2));
        // 5 <= 2.5 * 2
        let (kb, idx) = setup(src, 2.5);
        assert!(trig(&kb, &idx, "p", 0));
    }

    #[test]
    fn ties_at_minimum_all_trigger() {
        let (kb, idx) = setup("fof(a, axiom, p & q). fof(b, axiom, p & q).", 1.0);
        assert!(trig(&kb, &idx, "p", 0) && trig(&kb, &idx, "q", 0));
    }

    #[test]
    fn depth_chain() {
        // a1: p -> q with p rarest, a2: q -> r with q rarest.
        let src = "fof(a1, axiom, p => q). fof(a2, axiom, q => r). fof(x1, axiom, r). fof(x2, axiom, r).";
        let (kb, idx) = setup(src, 1.0);
        let goal = parse_goal("fof(g, conjecture, p).").unwrap();
        assert_eq!(sine_select(&kb, &goal, &idx, 1, 1.0).ids(), ["a1"]);
        let r2 = sine_select(&kb, &goal, &idx, 2, 1.0);
        assert_eq!(r2.ids(), ["a1", "a2"]);
        assert_eq!(r2.selected[1].step, Some(2));
    }

    #[test]
    fn disjoint_goal_selects_nothing() {
        let (kb, idx) = setup("fof(a, axiom, p).", 1.0);
        let goal = parse_goal("fof(g, conjecture, zzz).").unwrap();
        assert!(sine_select(&kb, &goal, &idx, 3, 1.0).is_empty());
    }

    #[test]
    fn config_validation() {
        assert!(SineConfig::new(0, 1.0).is_err());
        assert!(SineConfig::new(1, 0.5).is_err());
        assert!(SineConfig::new(1, f64::NAN).is_err());
        assert!(SineConfig::new(2, 1.5).is_ok());
    }
}
