//! Word embeddings: loading, cosine similarity and exact top-k queries.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use flate2::read::MultiGzDecoder;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

// Below this many multiply-adds the scan stays on the calling thread.
const PARALLEL_SCAN_WORK: usize = 1 << 18;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Cosine similarity of two non-zero vectors of equal dimension, clamped to
/// [-1, 1] and rounded to a multiple of 2^-40.
pub fn cos_sim(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            line: None,
            expected: u.len(),
            found: v.len(),
        });
    }
    let (nu, nv) = (norm(u), norm(v));
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroVector { line: None });
    }
    Ok(cosine(dot(u, v), nu, nv))
}

// Scores are snapped to multiples of 2^-40 so that mathematically equal
// similarities compare equal despite rounding noise.
const SCORE_GRID: f64 = (1u64 << 40) as f64;

fn cosine(dot: f64, nu: f64, nv: f64) -> f64 {
    let c = (dot / (nu * nv)).clamp(-1.0, 1.0);
    // `+ 0.0` turns -0.0 into 0.0.
    (c * SCORE_GRID).round() / SCORE_GRID + 0.0
}

/// Ranking order: higher score first, then lower row index.
pub(crate) fn rank_order(a: &(usize, f64), b: &(usize, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then(a.0.cmp(&b.0))
}

/// Keeps the best `k` of `scored` under [`rank_order`], sorted.
pub(crate) fn top_k_of(mut scored: Vec<(usize, f64)>, k: usize) -> Vec<(usize, f64)> {
    if k == 0 {
        return Vec::new();
    }
    if k < scored.len() {
        scored.select_nth_unstable_by(k - 1, rank_order);
        scored.truncate(k);
    }
    scored.sort_unstable_by(rank_order);
    scored
}

/// Row-major table of non-zero vectors with cached norms.
#[derive(Clone, Debug, Default)]
pub struct VectorTable {
    dim: usize,
    data: Vec<f64>,
    norms: Vec<f64>,
}

impl VectorTable {
    pub fn new(dim: usize) -> Self {
        VectorTable {
            dim,
            data: Vec::new(),
            norms: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.norms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.norms.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn push(&mut self, v: &[f64]) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                line: None,
                expected: self.dim,
                found: v.len(),
            });
        }
        let n = norm(v);
        if n == 0.0 {
            return Err(Error::ZeroVector { line: None });
        }
        self.data.extend_from_slice(v);
        self.norms.push(n);
        Ok(())
    }

    /// Cosine of every row against `q`, in row order.
    fn scores(&self, q: &[f64], q_norm: f64) -> Vec<f64> {
        let score = |i: usize| cosine(dot(self.row(i), q), self.norms[i], q_norm);
        if self.len() * self.dim >= PARALLEL_SCAN_WORK {
            (0..self.len()).into_par_iter().map(score).collect()
        } else {
            (0..self.len()).map(score).collect()
        }
    }

    /// Exact top-`k` rows by cosine similarity to `q`, skipping `exclude`.
    /// Ties are broken by row order.
    pub fn top_k(&self, q: &[f64], k: usize, exclude: Option<usize>) -> Result<Vec<(usize, f64)>> {
        if q.len() != self.dim {
            return Err(Error::DimensionMismatch {
                line: None,
                expected: self.dim,
                found: q.len(),
            });
        }
        let q_norm = norm(q);
        if q_norm == 0.0 {
            return Err(Error::ZeroVector { line: None });
        }
        let available = self.len() - usize::from(exclude.is_some_and(|e| e < self.len()));
        if k > available {
            return Err(Error::KTooLarge { k, available });
        }
        let scored: Vec<(usize, f64)> = self
            .scores(q, q_norm)
            .into_iter()
            .enumerate()
            .filter(|&(i, _)| Some(i) != exclude)
            .collect();
        Ok(top_k_of(scored, k))
    }

    pub(crate) fn raw(&self) -> &[f64] {
        &self.data
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimilarityHit {
    pub token: String,
    pub score: f64,
}

/// Vocabulary to vector map with cached norms.
#[derive(Clone, Debug, Default)]
pub struct EmbeddingStore {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    table: VectorTable,
}

impl EmbeddingStore {
    /// Builds a store from `(token, vector)` pairs in vocabulary order.
    pub fn from_pairs<T: Into<String>>(pairs: impl IntoIterator<Item = (T, Vec<f64>)>) -> Result<Self> {
        let mut store = EmbeddingStore::default();
        for (i, (tok, v)) in pairs.into_iter().enumerate() {
            store.insert(tok.into(), &v, i + 1)?;
        }
        Ok(store)
    }

    fn insert(&mut self, token: String, v: &[f64], line: usize) -> Result<()> {
        if self.tokens.is_empty() {
            if v.is_empty() {
                return Err(Error::EmbeddingParse {
                    line,
                    message: "vector has no components".into(),
                });
            }
            self.table = VectorTable::new(v.len());
        }
        if v.len() != self.table.dim() {
            return Err(Error::DimensionMismatch {
                line: Some(line),
                expected: self.table.dim(),
                found: v.len(),
            });
        }
        if self.index.contains_key(&token) {
            return Err(Error::DuplicateToken { token, line });
        }
        self.table.push(v).map_err(|e| match e {
            Error::ZeroVector { .. } => Error::ZeroVector { line: Some(line) },
            e => e,
        })?;
        self.index.insert(token.clone(), self.tokens.len());
        self.tokens.push(token);
        Ok(())
    }

    /// Reads `token v1 ... vn` lines, with an optional `count dim` header.
    pub fn load(reader: impl BufRead) -> Result<Self> {
        let mut store = EmbeddingStore::default();
        let mut header: Option<(usize, usize)> = None;
        let mut first = true;
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = n + 1;
            let mut fields = line.split_whitespace();
            let Some(token) = fields.next() else {
                continue;
            };
            let rest: Vec<&str> = fields.collect();
            if std::mem::take(&mut first) && rest.len() == 1 {
                if let (Ok(count), Ok(dim)) = (token.parse::<usize>(), rest[0].parse::<usize>()) {
                    header = Some((count, dim));
                    continue;
                }
            }
            let v = rest
                .iter()
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::EmbeddingParse {
                    line: lineno,
                    message: format!("bad component for `{token}`: {e}"),
                })?;
            if let Some((_, dim)) = header {
                if v.len() != dim {
                    return Err(Error::DimensionMismatch {
                        line: Some(lineno),
                        expected: dim,
                        found: v.len(),
                    });
                }
            }
            store.insert(token.to_owned(), &v, lineno)?;
        }
        if let Some((count, _)) = header {
            if count != store.len() {
                log::warn!("embedding header declares {count} rows, found {}", store.len());
            }
        }
        Ok(store)
    }

    /// Loads a text embedding file; `.gz` files are decompressed.
    pub fn load_path(path: &Path) -> Result<Self> {
        let file = File::open(path)?;
        if path.extension().is_some_and(|e| e == "gz") {
            Self::load(BufReader::new(MultiGzDecoder::new(file)))
        } else {
            Self::load(BufReader::with_capacity(1 << 20, file))
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.table.dim()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn token(&self, row: usize) -> &str {
        &self.tokens[row]
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn row_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn vector(&self, token: &str) -> Option<&[f64]> {
        self.row_of(token).map(|r| self.table.row(r))
    }

    pub fn row(&self, row: usize) -> &[f64] {
        self.table.row(row)
    }

    pub fn similarity(&self, a: &str, b: &str) -> Option<f64> {
        cos_sim(self.vector(a)?, self.vector(b)?).ok()
    }

    /// The `k` tokens most similar to `word`, excluding `word` itself, as
    /// `(row, score)` pairs. Empty when `word` is not in the vocabulary.
    pub fn simwords_rows(&self, word: &str, k: usize) -> Result<Vec<(usize, f64)>> {
        if k >= self.len() {
            return Err(Error::KTooLarge {
                k,
                available: self.len().saturating_sub(1),
            });
        }
        let Some(row) = self.row_of(word) else {
            return Ok(Vec::new());
        };
        self.table.top_k(self.table.row(row), k, Some(row))
    }

    pub fn simwords(&self, word: &str, k: usize) -> Result<Vec<SimilarityHit>> {
        Ok(self.hits(self.simwords_rows(word, k)?))
    }

    /// Exact top-`k` vocabulary entries by cosine similarity to `q`.
    pub fn top_k_vectors(&self, q: &[f64], k: usize) -> Result<Vec<SimilarityHit>> {
        Ok(self.hits(self.table.top_k(q, k, None)?))
    }

    fn hits(&self, rows: Vec<(usize, f64)>) -> Vec<SimilarityHit> {
        rows.into_iter()
            .map(|(r, score)| SimilarityHit {
                token: self.tokens[r].clone(),
                score,
            })
            .collect()
    }

    /// Content digest over tokens and vector bits.
    pub fn digest(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update((self.dim() as u64).to_le_bytes());
        for t in &self.tokens {
            h.update(t.as_bytes());
            h.update([0]);
        }
        for x in self.table.raw() {
            h.update(x.to_bits().to_le_bytes());
        }
        h.finalize().into()
    }
}
