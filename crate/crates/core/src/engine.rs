//! Prepared selection strategies over one knowledge base.

use std::path::Path;

use crate::embedding::EmbeddingStore;
use crate::error::{Error, Result};
use crate::kb::{Goal, KnowledgeBase};
use crate::mapping::{NormalizeConfig, SymbolMapping};
use crate::selection::{SelectionResult, Strategy};
use crate::simsine::{build_sim_trigger_index, similarity_sine_select, SimSineConfig};
use crate::sine::{build_trigger_index, sine_select, SineConfig, TriggerIndex};
use crate::stats::SymbolStats;
use crate::vector::{
    most_similar, vb_union_sine, vectorize_goal, vectorize_kb, vectorize_kb_cached, KbVectorIndex,
};

/// A knowledge base with its statistics and, optionally, an embedding and
/// symbol mapping.
pub struct Context {
    pub kb: KnowledgeBase,
    pub stats: SymbolStats,
    pub embedding: Option<(EmbeddingStore, SymbolMapping)>,
}

impl Context {
    pub fn new(kb: KnowledgeBase) -> Result<Self> {
        let stats = SymbolStats::compute(&kb)?;
        Ok(Context {
            kb,
            stats,
            embedding: None,
        })
    }

    /// Attaches an embedding; without an explicit mapping one is built by
    /// brute-force normalization alone.
    pub fn with_embedding(mut self, store: EmbeddingStore, mapping: Option<SymbolMapping>) -> Self {
        let mapping = mapping.unwrap_or_else(|| {
            SymbolMapping::build(&self.kb, &store, &[], &NormalizeConfig::default())
        });
        self.embedding = Some((store, mapping));
        self
    }

    fn embedding(&self, strategy: &Strategy) -> Result<(&EmbeddingStore, &SymbolMapping)> {
        self.embedding
            .as_ref()
            .map(|(s, m)| (s, m))
            .ok_or_else(|| {
                Error::InvalidConfig(format!("strategy `{}` needs an embedding", strategy.name()))
            })
    }
}

/// A strategy with its goal-independent indexes built.
pub struct Selector<'a> {
    ctx: &'a Context,
    strategy: Strategy,
    triggers: Option<TriggerIndex>,
    vectors: Option<KbVectorIndex>,
}

impl<'a> Selector<'a> {
    pub fn prepare(ctx: &'a Context, strategy: Strategy, cache_dir: Option<&Path>) -> Result<Self> {
        let mut sel = Selector {
            ctx,
            strategy,
            triggers: None,
            vectors: None,
        };
        match strategy {
            Strategy::Sine { depth, tolerance } => {
                let cfg = SineConfig::new(depth, tolerance)?;
                sel.triggers = Some(build_trigger_index(&ctx.kb, &ctx.stats, &cfg));
            }
            Strategy::Simsine { depth, tolerance, k } => {
                let (store, mapping) = ctx.embedding(&strategy)?;
                let cfg = SimSineConfig { depth, tolerance, k };
                sel.triggers = Some(build_sim_trigger_index(&ctx.kb, &ctx.stats, store, mapping, &cfg)?);
            }
            Strategy::Vector { k } => {
                check_k(k)?;
                sel.vectors = Some(sel.vectorize(cache_dir)?);
            }
            Strategy::VbUnion { depth, tolerance, k } => {
                check_k(k)?;
                let cfg = SineConfig::new(depth, tolerance)?;
                sel.triggers = Some(build_trigger_index(&ctx.kb, &ctx.stats, &cfg));
                sel.vectors = Some(sel.vectorize(cache_dir)?);
            }
        }
        Ok(sel)
    }

    fn vectorize(&self, cache_dir: Option<&Path>) -> Result<KbVectorIndex> {
        let (store, mapping) = self.ctx.embedding(&self.strategy)?;
        let (kb, stats) = (&self.ctx.kb, &self.ctx.stats);
        match cache_dir {
            Some(dir) => vectorize_kb_cached(dir, kb, stats, store, mapping),
            None => Ok(vectorize_kb(kb, stats, store, mapping)),
        }
    }

    /// Lowers `k` of a vector-based strategy to the number of vectorizable
    /// axioms.
    pub fn cap_k(&mut self) {
        let Some(present) = self.vectors.as_ref().map(KbVectorIndex::present_count) else {
            return;
        };
        match &mut self.strategy {
            Strategy::Vector { k } | Strategy::VbUnion { k, .. } => *k = (*k).min(present),
            _ => {}
        }
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn context(&self) -> &Context {
        self.ctx
    }

    pub fn vectors(&self) -> Option<&KbVectorIndex> {
        self.vectors.as_ref()
    }

    pub fn select(&self, goal: &Goal) -> Result<SelectionResult> {
        let kb = &self.ctx.kb;
        match self.strategy {
            Strategy::Sine { depth, tolerance } => {
                Ok(sine_select(kb, goal, self.trigger_index(), depth, tolerance))
            }
            Strategy::Simsine { depth, tolerance, k } => Ok(similarity_sine_select(
                kb,
                goal,
                self.trigger_index(),
                &SimSineConfig { depth, tolerance, k },
            )),
            Strategy::Vector { k } => {
                let gv = self.goal_vector(goal)?;
                most_similar(kb, self.vector_index(), &gv, k)
            }
            Strategy::VbUnion { depth, tolerance, k } => {
                let gv = self.goal_vector(goal)?;
                Ok(vb_union_sine(
                    kb,
                    goal,
                    self.trigger_index(),
                    depth,
                    tolerance,
                    self.vector_index(),
                    &gv,
                    k,
                ))
            }
        }
    }

    fn goal_vector(&self, goal: &Goal) -> Result<crate::vector::GoalVector> {
        let (store, mapping) = self.ctx.embedding(&self.strategy)?;
        Ok(vectorize_goal(goal, &self.ctx.kb, &self.ctx.stats, store, mapping))
    }

    fn trigger_index(&self) -> &TriggerIndex {
        self.triggers.as_ref().expect("trigger index prepared")
    }

    fn vector_index(&self) -> &KbVectorIndex {
        self.vectors.as_ref().expect("vector index prepared")
    }
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidConfig("k must be at least 1".into()));
    }
    Ok(())
}
