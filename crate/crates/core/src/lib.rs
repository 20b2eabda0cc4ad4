//! Premise selection for first-order knowledge bases: symbol-frequency
//! trigger selection, its embedding-based extensions, and an evaluation
//! harness around an external prover.

pub mod embedding;
pub mod engine;
pub mod error;
pub mod harness;
pub mod kb;
pub mod mapping;
pub mod selection;
pub mod simsine;
pub mod sine;
pub mod stats;
pub mod vector;

pub use embedding::{cos_sim, EmbeddingStore, SimilarityHit, VectorTable};
pub use engine::{Context, Selector};
pub use error::{Error, Result};
pub use kb::{load_kb, parse_goal, parse_kb, Goal, KnowledgeBase, Symbol, SymbolId};
pub use mapping::{brute_force_normalize, LexicalTable, NormalizeConfig, Source, SymbolMapping};
pub use selection::{Origin, Selected, SelectionResult, Strategy};
pub use stats::SymbolStats;
