//! idf-weighted axiom vectors and vector-based selection.
//!
//! An axiom is represented by the idf-weighted mean of the embedding
//! vectors of its mapped symbols. Vector-based selection returns the `k`
//! axioms whose vectors are most cosine-similar to the goal vector, and
//! vb-union-SInE unions that with a SInE selection.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::embedding::{EmbeddingStore, VectorTable};
use crate::error::{Error, Result};
use crate::kb::{Goal, KnowledgeBase};
use crate::mapping::SymbolMapping;
use crate::selection::{Origin, Selected, SelectionResult, Strategy};
use crate::sine::{sine_select, TriggerIndex};
use crate::stats::SymbolStats;

/// Weighted mean of `(weight, vector)` pairs. Falls back to the plain mean
/// when all weights are zero; `None` for no input or a zero result.
pub fn weighted_mean<'a>(dim: usize, items: impl IntoIterator<Item = (f64, &'a [f64])>) -> Option<Vec<f64>> {
    let items: Vec<(f64, &[f64])> = items.into_iter().collect();
    if items.is_empty() {
        return None;
    }
    let total: f64 = items.iter().map(|(w, _)| w).sum();
    let (use_weights, denom) = if total > 0.0 {
        (true, total)
    } else {
        (false, items.len() as f64)
    };
    let mut acc = vec![0.0; dim];
    for (w, v) in &items {
        let w = if use_weights { *w } else { 1.0 };
        for (a, x) in acc.iter_mut().zip(v.iter()) {
            *a += w * x;
        }
    }
    for a in &mut acc {
        *a /= denom;
    }
    acc.iter().any(|&x| x != 0.0).then_some(acc)
}

/// One vector per axiom, in KB order; axioms without a vector are ABSENT.
#[derive(Clone, Debug)]
pub struct KbVectorIndex {
    rows: Vec<Option<u32>>,
    table: VectorTable,
    axiom_of_row: Vec<usize>,
}

impl KbVectorIndex {
    fn from_vectors(dim: usize, vectors: Vec<Option<Vec<f64>>>) -> Result<Self> {
        let mut table = VectorTable::new(dim);
        let mut rows = Vec::with_capacity(vectors.len());
        let mut axiom_of_row = Vec::new();
        for (pos, v) in vectors.into_iter().enumerate() {
            match v {
                Some(v) => {
                    rows.push(Some(table.len() as u32));
                    table.push(&v)?;
                    axiom_of_row.push(pos);
                }
                None => rows.push(None),
            }
        }
        Ok(KbVectorIndex {
            rows,
            table,
            axiom_of_row,
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.table.dim()
    }

    pub fn vector(&self, pos: usize) -> Option<&[f64]> {
        self.rows[pos].map(|r| self.table.row(r as usize))
    }

    pub fn absent_count(&self) -> usize {
        self.rows.len() - self.table.len()
    }

    pub fn present_count(&self) -> usize {
        self.table.len()
    }
}

/// Token rows of the mapped symbols of an axiom, with their idf weights.
fn axiom_terms<'a>(
    kb: &'a KnowledgeBase,
    stats: &'a SymbolStats,
    store: &'a EmbeddingStore,
    mapping: &'a SymbolMapping,
    pos: usize,
) -> impl Iterator<Item = (f64, &'a [f64])> + 'a {
    kb.axiom(pos).symbols.iter().filter_map(move |&s| {
        let token = mapping.token(kb.symbol(s).as_str())?;
        Some((stats.idf(s), store.vector(token)?))
    })
}

pub fn vectorize_kb(
    kb: &KnowledgeBase,
    stats: &SymbolStats,
    store: &EmbeddingStore,
    mapping: &SymbolMapping,
) -> KbVectorIndex {
    let dim = store.dim();
    let vectors: Vec<Option<Vec<f64>>> = (0..kb.len())
        .into_par_iter()
        .map(|pos| weighted_mean(dim, axiom_terms(kb, stats, store, mapping, pos)))
        .collect();
    // Rows are non-zero and share the store's dimension by construction.
    KbVectorIndex::from_vectors(dim, vectors).expect("axiom vectors are well-formed")
}

#[derive(Clone, Debug, PartialEq)]
pub struct GoalVector {
    pub vector: Option<Vec<f64>>,
    /// Goal symbols that do not occur in the KB.
    pub unknown_symbol_count: usize,
    /// Goal symbols that contributed to the vector.
    pub mapped_symbol_count: usize,
}

/// Goal vector built like an axiom vector; goal symbols the KB does not
/// contain are weighted by the mean idf.
pub fn vectorize_goal(
    goal: &Goal,
    kb: &KnowledgeBase,
    stats: &SymbolStats,
    store: &EmbeddingStore,
    mapping: &SymbolMapping,
) -> GoalVector {
    let mean = stats.mean_idf();
    let mut unknown = 0;
    let mut terms = Vec::new();
    for sym in &goal.symbols {
        let id = kb.symbol_id(sym.as_str());
        if id.is_none() {
            unknown += 1;
        }
        let Some(token) = mapping.goal_token(sym.as_str(), kb, store) else {
            continue;
        };
        let Some(v) = store.vector(&token) else {
            continue;
        };
        terms.push((id.map_or(mean, |id| stats.idf(id)), v));
    }
    let mapped = terms.len();
    GoalVector {
        vector: weighted_mean(store.dim(), terms),
        unknown_symbol_count: unknown,
        mapped_symbol_count: mapped,
    }
}

/// The `k` axioms most similar to the goal, by descending cosine, ties in
/// KB order. ABSENT axioms are never selected.
pub fn most_similar(
    kb: &KnowledgeBase,
    index: &KbVectorIndex,
    goal: &GoalVector,
    k: usize,
) -> Result<SelectionResult> {
    let q = goal.vector.as_deref().ok_or(Error::GoalNotVectorizable)?;
    let hits = index.table.top_k(q, k, None)?;
    Ok(SelectionResult {
        strategy: Strategy::Vector { k },
        selected: hits
            .into_iter()
            .map(|(row, score)| {
                let position = index.axiom_of_row[row];
                Selected {
                    position,
                    id: kb.axiom(position).id.clone(),
                    step: None,
                    score: Some(score),
                    origin: Origin::Vector,
                }
            })
            .collect(),
    })
}

/// Union of a SInE selection and a vector-based selection. SInE hits come
/// first in step order, then the remaining vector hits by score. An
/// unvectorizable goal contributes no vector hits and `k` is capped at the
/// number of vectorizable axioms.
#[allow(clippy::too_many_arguments)]
pub fn vb_union_sine(
    kb: &KnowledgeBase,
    goal: &Goal,
    sine_index: &TriggerIndex,
    depth: usize,
    tolerance: f64,
    vectors: &KbVectorIndex,
    goal_vector: &GoalVector,
    k: usize,
) -> SelectionResult {
    let sine = sine_select(kb, goal, sine_index, depth, tolerance);
    let vector = most_similar(kb, vectors, goal_vector, k.min(vectors.present_count()))
        .map(|r| r.selected)
        .unwrap_or_default();

    let mut score_of = vec![None; kb.len()];
    for v in &vector {
        score_of[v.position] = v.score;
    }
    let mut in_sine = vec![false; kb.len()];
    let mut selected = Vec::with_capacity(sine.len() + vector.len());
    for mut s in sine.selected {
        in_sine[s.position] = true;
        if let Some(score) = score_of[s.position] {
            s.score = Some(score);
            s.origin = Origin::Both;
        }
        selected.push(s);
    }
    selected.extend(vector.into_iter().filter(|v| !in_sine[v.position]));
    SelectionResult {
        strategy: Strategy::VbUnion { depth, tolerance, k },
        selected,
    }
}

const CACHE_MAGIC: &[u8; 8] = b"PSVXIDX1";

/// Cache key over the KB, embedding and mapping contents.
pub fn cache_key(kb: &KnowledgeBase, store: &EmbeddingStore, mapping: &SymbolMapping) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(Sha256::digest(kb.to_tptp().as_bytes()));
    h.update(store.digest());
    h.update(mapping.digest());
    h.finalize().into()
}

fn cache_path(dir: &Path, key: &[u8; 32]) -> PathBuf {
    let hex: String = key[..16].iter().map(|b| format!("{b:02x}")).collect();
    dir.join(format!("axiom-vectors-{hex}.bin"))
}

impl KbVectorIndex {
    pub fn write_cache(&self, mut out: impl Write, key: &[u8; 32]) -> Result<()> {
        out.write_all(CACHE_MAGIC)?;
        out.write_all(key)?;
        out.write_all(&(self.rows.len() as u64).to_le_bytes())?;
        out.write_all(&(self.dim() as u64).to_le_bytes())?;
        let flags: Vec<u8> = self.rows.iter().map(|r| u8::from(r.is_some())).collect();
        out.write_all(&flags)?;
        for x in self.table.raw() {
            out.write_all(&x.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_cache(mut input: impl Read, key: &[u8; 32]) -> Result<Self> {
        let bad = |m: &str| Error::Cache(m.to_owned());
        let mut magic = [0u8; 8];
        input.read_exact(&mut magic)?;
        if &magic != CACHE_MAGIC {
            return Err(bad("bad magic"));
        }
        let mut stored = [0u8; 32];
        input.read_exact(&mut stored)?;
        if &stored != key {
            return Err(bad("key mismatch"));
        }
        let mut word = [0u8; 8];
        input.read_exact(&mut word)?;
        let n = u64::from_le_bytes(word) as usize;
        input.read_exact(&mut word)?;
        let dim = u64::from_le_bytes(word) as usize;
        let mut flags = vec![0u8; n];
        input.read_exact(&mut flags)?;
        let mut vectors = Vec::with_capacity(n);
        for f in flags {
            if f == 0 {
                vectors.push(None);
                continue;
            }
            let mut v = vec![0.0; dim];
            for x in &mut v {
                input.read_exact(&mut word)?;
                *x = f64::from_le_bytes(word);
            }
            vectors.push(Some(v));
        }
        Self::from_vectors(dim, vectors)
    }
}

/// [`vectorize_kb`], reusing a cached index from `cache_dir` when one with
/// a matching key exists and writing one otherwise.
pub fn vectorize_kb_cached(
    cache_dir: &Path,
    kb: &KnowledgeBase,
    stats: &SymbolStats,
    store: &EmbeddingStore,
    mapping: &SymbolMapping,
) -> Result<KbVectorIndex> {
    let key = cache_key(kb, store, mapping);
    let path = cache_path(cache_dir, &key);
    if let Ok(file) = fs::File::open(&path) {
        match KbVectorIndex::read_cache(std::io::BufReader::new(file), &key) {
            Ok(idx) if idx.len() == kb.len() => {
                log::info!("loaded axiom vectors from {}", path.display());
                return Ok(idx);
            }
            Ok(_) => log::warn!("ignoring stale vector cache {}", path.display()),
            Err(e) => log::warn!("ignoring vector cache {}: {e}", path.display()),
        }
    }
    let idx = vectorize_kb(kb, stats, store, mapping);
    fs::create_dir_all(cache_dir)?;
    let tmp = path.with_extension("tmp");
    {
        let mut w = std::io::BufWriter::new(fs::File::create(&tmp)?);
        idx.write_cache(&mut w, &key)?;
        w.flush()?;
    }
    fs::rename(&tmp, &path)?;
    Ok(idx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::{parse_goal, parse_kb};
    use crate::mapping::NormalizeConfig;
    use crate::sine::{build_trigger_index, SineConfig};

    struct Fixture {
        kb: KnowledgeBase,
        stats: SymbolStats,
        store: EmbeddingStore,
        mapping: SymbolMapping,
    }

    fn fixture() -> Fixture {
        let kb = parse_kb(
            "fof(a0, axiom, dog(x) & common).
             fof(a1, axiom, cat(x) & common).
             fof(a2, axiom, car(y) & common).
             fof(a3, axiom, common & zzz).
             fof(a4, axiom, common & dog(x) & cat(y)).",
        )
        .unwrap();
        let stats = SymbolStats::compute(&kb).unwrap();
        let store = EmbeddingStore::from_pairs([
            ("dog", vec![1.0, 0.0, 0.0]),
            ("cat", vec![0.8, 0.6, 0.0]),
            ("car", vec![0.0, 0.0, 1.0]),
            ("common", vec![0.0, 1.0, 0.0]),
            ("tulip", vec![0.5, 0.5, 0.5]),
        ])
        .unwrap();
        let mapping = SymbolMapping::build(&kb, &store, &[], &NormalizeConfig::default());
        Fixture {
            kb,
            stats,
            store,
            mapping,
        }
    }

    #[test]
    fn single_symbol_and_fallbacks() {
        let f = fixture();
        let idx = vectorize_kb(&f.kb, &f.stats, &f.store, &f.mapping);
        // a3: only `common` maps and its idf is 0 -> unweighted fallback
        assert_eq!(idx.vector(3), Some(&[0.0, 1.0, 0.0][..]));
        // a2: car (idf ln 5) and common (idf 0) -> exactly f(car)
        assert_eq!(idx.vector(2), Some(&[0.0, 0.0, 1.0][..]));
        assert_eq!(idx.absent_count(), 0);

        let kb = parse_kb("fof(a, axiom, zzz). fof(b, axiom, dog).").unwrap();
        let st = SymbolStats::compute(&kb).unwrap();
        let m = SymbolMapping::build(&kb, &f.store, &[], &NormalizeConfig::default());
        let idx = vectorize_kb(&kb, &st, &f.store, &m);
        assert_eq!(idx.vector(0), None);
        assert_eq!(idx.absent_count(), 1);
    }

    #[test]
    fn zero_sum_is_absent() {
        assert_eq!(weighted_mean(2, [(1.0, &[1.0, 0.0][..]), (1.0, &[-1.0, 0.0][..])]), None);
        assert_eq!(weighted_mean(2, []), None);
    }

    #[test]
    fn goal_vectors() {
        let f = fixture();
        let g = parse_goal("fof(g, conjecture, dog(q)).").unwrap();
        let gv = vectorize_goal(&g, &f.kb, &f.stats, &f.store, &f.mapping);
        assert_eq!(gv.vector.as_deref(), Some(&[1.0, 0.0, 0.0][..]));
        assert_eq!(gv.unknown_symbol_count, 1);

        let g = parse_goal("fof(g, conjecture, unknown_word(zzz)).").unwrap();
        let gv = vectorize_goal(&g, &f.kb, &f.stats, &f.store, &f.mapping);
        assert_eq!(gv.vector, None);
        assert!(matches!(
            most_similar(&f.kb, &vectorize_kb(&f.kb, &f.stats, &f.store, &f.mapping), &gv, 1),
            Err(Error::GoalNotVectorizable)
        ));

        // unknown-to-KB but in-vocabulary symbol gets the mean idf weight
        let g = parse_goal("fof(g, conjecture, tulip(c)).").unwrap();
        let gv = vectorize_goal(&g, &f.kb, &f.stats, &f.store, &f.mapping);
        assert_eq!(gv.mapped_symbol_count, 1);
        assert_eq!(gv.vector.as_deref(), Some(&[0.5, 0.5, 0.5][..]));
    }

    #[test]
    fn most_similar_ranks_exact_match_first() {
        let f = fixture();
        let idx = vectorize_kb(&f.kb, &f.stats, &f.store, &f.mapping);
        let g = parse_goal("fof(g, conjecture, car(q)).").unwrap();
        let gv = vectorize_goal(&g, &f.kb, &f.stats, &f.store, &f.mapping);
        let r = most_similar(&f.kb, &idx, &gv, 5).unwrap();
        assert_eq!(r.ids()[0], "a2");
        assert!((r.selected[0].score.unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(r.len(), 5);
        assert!(matches!(most_similar(&f.kb, &idx, &gv, 6), Err(Error::KTooLarge { .. })));
    }

    #[test]
    fn union_orders_sine_first() {
        let f = fixture();
        let idx = vectorize_kb(&f.kb, &f.stats, &f.store, &f.mapping);
        let sine = build_trigger_index(&f.kb, &f.stats, &SineConfig::default());
        let g = parse_goal("fof(g, conjecture, zzz).").unwrap();
        let gv = GoalVector {
            vector: Some(vec![0.0, 0.0, 1.0]),
            unknown_symbol_count: 0,
            mapped_symbol_count: 1,
        };
        let r = vb_union_sine(&f.kb, &g, &sine, 1, 1.0, &idx, &gv, 2);
        assert_eq!(r.ids()[0], "a3");
        assert_eq!(r.selected[0].origin, Origin::Sine);
        assert_eq!(r.ids()[1], "a2");
        assert_eq!(r.selected[1].origin, Origin::Vector);
        // capped at the number of vectorizable axioms
        assert_eq!(vb_union_sine(&f.kb, &g, &sine, 1, 1.0, &idx, &gv, 99).len(), 5);
    }

    #[test]
    fn cache_round_trip() {
        let f = fixture();
        let dir = tempfile::tempdir().unwrap();
        let a = vectorize_kb_cached(dir.path(), &f.kb, &f.stats, &f.store, &f.mapping).unwrap();
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
        let b = vectorize_kb_cached(dir.path(), &f.kb, &f.stats, &f.store, &f.mapping).unwrap();
        for pos in 0..f.kb.len() {
            assert_eq!(a.vector(pos), b.vector(pos));
        }
        let mut buf = Vec::new();
        a.write_cache(&mut buf, &[1; 32]).unwrap();
        assert!(matches!(KbVectorIndex::read_cache(&buf[..], &[2; 32]), Err(Error::Cache(_))));
    }
}
