//! Mapping KB symbol names onto embedding vocabulary tokens.
//!
//! Each KB symbol gets at most one token. Candidates come from brute-force
//! normalization of the symbol name and from external lexical tables
//! (WordNet-style synonym, hyponym and instance links); the strongest
//! source wins.

use std::borrow::Cow;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::embedding::EmbeddingStore;
use crate::error::{Error, Result};
use crate::kb::{KnowledgeBase, Symbol};

/// Prefix and suffix lists applied by [`brute_force_normalize`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizeConfig {
    pub prefixes: Vec<String>,
    pub suffixes: Vec<String>,
}

impl Default for NormalizeConfig {
    fn default() -> Self {
        NormalizeConfig {
            prefixes: ["c__", "p__", "f__", "r__", "s__"].map(String::from).to_vec(),
            suffixes: ["_fn", "_function"].map(String::from).to_vec(),
        }
    }
}

/// Splits one identifier segment at camel-case boundaries.
/// `HTMLParser` gives `HTML`, `Parser`; digits stay attached.
fn camel_parts(seg: &str) -> Vec<&str> {
    let chars: Vec<(usize, char)> = seg.char_indices().collect();
    let mut parts = Vec::new();
    let mut start = 0;
    for w in 1..chars.len() {
        let (i, c) = chars[w];
        let prev = chars[w - 1].1;
        let next_lower = chars.get(w + 1).is_some_and(|&(_, n)| n.is_lowercase());
        let boundary = c.is_uppercase()
            && (prev.is_lowercase() || prev.is_ascii_digit() || (prev.is_uppercase() && next_lower));
        if boundary {
            parts.push(&seg[start..i]);
            start = i;
        }
    }
    if start < seg.len() {
        parts.push(&seg[start..]);
    }
    parts
}

/// Brute-force candidate token for a KB symbol: strip configured prefixes,
/// split camel case, join with `_`, lowercase, strip configured suffixes.
pub fn brute_force_normalize(symbol: &str, config: &NormalizeConfig) -> String {
    let mut rest = symbol;
    while let Some(stripped) = config
        .prefixes
        .iter()
        .find_map(|p| rest.strip_prefix(p.as_str()).filter(|r| !r.is_empty()))
    {
        rest = stripped;
    }

    let words: Vec<String> = rest
        .split(['_', '-', ' '])
        .filter(|s| !s.is_empty())
        .flat_map(camel_parts)
        .map(str::to_lowercase)
        .collect();
    let mut out = words.join("_");

    let mut suffixes: Vec<&str> = config.suffixes.iter().map(String::as_str).collect();
    suffixes.sort_by_key(|s| std::cmp::Reverse(s.len()));
    if let Some(stripped) = suffixes
        .iter()
        .find_map(|s| out.strip_suffix(&s.to_lowercase()).filter(|r| !r.is_empty()).map(str::to_owned))
    {
        out = stripped;
    }
    out
}

/// Provenance of a mapping entry; lower priority value wins.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Bruteforce,
    Synonym,
    Hyponym,
    Instance,
}

impl Source {
    pub fn priority(self) -> u8 {
        self as u8
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Source::Bruteforce => "bruteforce",
            Source::Synonym => "synonym",
            Source::Hyponym => "hyponym",
            Source::Instance => "instance",
        }
    }
}

impl FromStr for Source {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "bruteforce" => Source::Bruteforce,
            "synonym" => Source::Synonym,
            "hyponym" => Source::Hyponym,
            "instance" => Source::Instance,
            _ => return Err(Error::UnknownSource(s.to_owned())),
        })
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MappingEntry {
    pub kb_symbol: Symbol,
    pub token: String,
    pub source: Source,
}

impl MappingEntry {
    pub fn priority(&self) -> u8 {
        self.source.priority()
    }
}

/// One external symbol-to-token table. Rows are in preference order: the
/// first usable row per symbol wins.
#[derive(Clone, Debug)]
pub struct LexicalTable {
    source: Source,
    rows: Vec<(Symbol, String)>,
}

impl LexicalTable {
    pub fn new(source: Source, rows: Vec<(Symbol, String)>) -> Result<Self> {
        if source == Source::Bruteforce {
            return Err(Error::UnknownSource(source.to_string()));
        }
        Ok(LexicalTable { source, rows })
    }

    pub fn source(&self) -> Source {
        self.source
    }

    pub fn rows(&self) -> &[(Symbol, String)] {
        &self.rows
    }

    /// Reads `kb_symbol<TAB>token<TAB>source` rows into one table per
    /// source, keeping row order.
    pub fn read_tsv(reader: impl BufRead) -> Result<Vec<LexicalTable>> {
        let mut by_source: BTreeMap<Source, Vec<(Symbol, String)>> = BTreeMap::new();
        for row in read_rows(reader)? {
            if row.2 == Source::Bruteforce {
                return Err(Error::UnknownSource(row.2.to_string()));
            }
            by_source.entry(row.2).or_default().push((row.0, row.1));
        }
        by_source
            .into_iter()
            .map(|(source, rows)| LexicalTable::new(source, rows))
            .collect()
    }
}

fn read_rows(reader: impl BufRead) -> Result<Vec<(Symbol, String, Source)>> {
    let mut out = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 || fields[0].is_empty() || fields[1].is_empty() {
            return Err(Error::MappingParse {
                line: n + 1,
                message: "expected `kb_symbol<TAB>token<TAB>source`".into(),
            });
        }
        out.push((Symbol::new(fields[0]), fields[1].to_owned(), fields[2].trim().parse()?));
    }
    Ok(out)
}

/// Functional relation from KB symbols to embedding tokens, with its inverse.
#[derive(Clone, Debug)]
pub struct SymbolMapping {
    forward: BTreeMap<Symbol, MappingEntry>,
    inverse: HashMap<String, BTreeSet<Symbol>>,
    kb_symbol_count: usize,
    normalizer: NormalizeConfig,
}

impl SymbolMapping {
    fn from_entries(
        entries: impl IntoIterator<Item = MappingEntry>,
        kb_symbol_count: usize,
        normalizer: NormalizeConfig,
    ) -> Self {
        let mut forward = BTreeMap::new();
        let mut inverse: HashMap<String, BTreeSet<Symbol>> = HashMap::new();
        for e in entries {
            inverse
                .entry(e.token.clone())
                .or_default()
                .insert(e.kb_symbol.clone());
            forward.insert(e.kb_symbol.clone(), e);
        }
        SymbolMapping {
            forward,
            inverse,
            kb_symbol_count,
            normalizer,
        }
    }

    /// The mapping that maps nothing.
    pub fn empty(kb: &KnowledgeBase) -> Self {
        Self::from_entries([], kb.symbol_count(), NormalizeConfig::default())
    }

    /// Builds the mapping for every symbol of `kb`: the brute-force token
    /// when it is in the vocabulary, otherwise the first in-vocabulary
    /// synonym, then hyponym, then instance entry.
    pub fn build(
        kb: &KnowledgeBase,
        store: &EmbeddingStore,
        tables: &[LexicalTable],
        normalizer: &NormalizeConfig,
    ) -> Self {
        // Best table candidate per KB symbol: (priority, sequence number).
        let mut best: HashMap<&str, ((u8, usize), &str)> = HashMap::new();
        let mut seq = 0usize;
        for table in tables {
            for (sym, tok) in &table.rows {
                seq += 1;
                if kb.symbol_id(sym.as_str()).is_none() || !store.contains(tok) {
                    continue;
                }
                let key = (table.source.priority(), seq);
                best.entry(sym.as_str())
                    .and_modify(|cur| {
                        if key < cur.0 {
                            *cur = (key, tok.as_str());
                        }
                    })
                    .or_insert((key, tok.as_str()));
            }
        }

        let entries = kb.symbols().iter().filter_map(|sym| {
            let bf = brute_force_normalize(sym.as_str(), normalizer);
            if store.contains(&bf) {
                return Some(MappingEntry {
                    kb_symbol: sym.clone(),
                    token: bf,
                    source: Source::Bruteforce,
                });
            }
            best.get(sym.as_str()).map(|&((prio, _), tok)| MappingEntry {
                kb_symbol: sym.clone(),
                token: tok.to_owned(),
                source: match prio {
                    1 => Source::Synonym,
                    2 => Source::Hyponym,
                    _ => Source::Instance,
                },
            })
        });
        Self::from_entries(entries.collect::<Vec<_>>(), kb.symbol_count(), normalizer.clone())
    }

    /// Reads a mapping file. Rows for symbols outside `kb` or tokens outside
    /// the vocabulary are dropped; of several rows for one symbol the
    /// strongest source wins, then the earliest row.
    pub fn read_tsv(
        reader: impl BufRead,
        kb: &KnowledgeBase,
        store: &EmbeddingStore,
        normalizer: &NormalizeConfig,
    ) -> Result<Self> {
        let mut chosen: BTreeMap<Symbol, MappingEntry> = BTreeMap::new();
        let mut dropped = 0usize;
        for (sym, token, source) in read_rows(reader)? {
            if kb.symbol_id(sym.as_str()).is_none() || !store.contains(&token) {
                dropped += 1;
                continue;
            }
            let entry = MappingEntry {
                kb_symbol: sym.clone(),
                token,
                source,
            };
            match chosen.get(&sym) {
                Some(cur) if cur.priority() <= entry.priority() => {}
                _ => {
                    chosen.insert(sym, entry);
                }
            }
        }
        if dropped > 0 {
            log::warn!("mapping: dropped {dropped} rows outside the KB symbols or vocabulary");
        }
        Ok(Self::from_entries(
            chosen.into_values(),
            kb.symbol_count(),
            normalizer.clone(),
        ))
    }

    /// Writes `kb_symbol<TAB>token<TAB>source`, sorted by symbol.
    pub fn write_tsv(&self, mut out: impl Write) -> Result<()> {
        for e in self.forward.values() {
            writeln!(out, "{}\t{}\t{}", e.kb_symbol, e.token, e.source)?;
        }
        Ok(())
    }

    pub fn get(&self, symbol: &str) -> Option<&MappingEntry> {
        self.forward.get(symbol)
    }

    pub fn token(&self, symbol: &str) -> Option<&str> {
        self.get(symbol).map(|e| e.token.as_str())
    }

    pub fn entries(&self) -> impl Iterator<Item = &MappingEntry> {
        self.forward.values()
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    /// Fraction of KB symbols with a mapping entry.
    pub fn coverage(&self) -> f64 {
        if self.kb_symbol_count == 0 {
            return 0.0;
        }
        self.forward.len() as f64 / self.kb_symbol_count as f64
    }

    pub fn normalizer(&self) -> &NormalizeConfig {
        &self.normalizer
    }

    /// Tokens of the mapped symbols among `symbols`; unmapped ones are dropped.
    pub fn map_symbols<'a, S>(&self, symbols: impl IntoIterator<Item = &'a S>) -> BTreeSet<String>
    where
        S: AsRef<str> + ?Sized + 'a,
    {
        symbols
            .into_iter()
            .filter_map(|s| self.token(s.as_ref()).map(str::to_owned))
            .collect()
    }

    /// KB symbols whose winning entry maps to `token`.
    pub fn inverse_lookup(&self, token: &str) -> BTreeSet<Symbol> {
        self.inverse.get(token).cloned().unwrap_or_default()
    }

    pub(crate) fn inverse(&self, token: &str) -> Option<&BTreeSet<Symbol>> {
        self.inverse.get(token)
    }

    /// Token for a goal symbol. KB symbols use their mapping entry; symbols
    /// unknown to the KB fall back to brute-force normalization when the
    /// result is in the vocabulary.
    pub fn goal_token<'a>(
        &'a self,
        symbol: &str,
        kb: &KnowledgeBase,
        store: &EmbeddingStore,
    ) -> Option<Cow<'a, str>> {
        if let Some(t) = self.token(symbol) {
            return Some(Cow::Borrowed(t));
        }
        if kb.symbol_id(symbol).is_some() {
            return None;
        }
        let bf = brute_force_normalize(symbol, &self.normalizer);
        store.contains(&bf).then_some(Cow::Owned(bf))
    }

    pub fn digest(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        for e in self.forward.values() {
            h.update(e.kb_symbol.as_str().as_bytes());
            h.update([0]);
            h.update(e.token.as_bytes());
            h.update([0, e.priority()]);
        }
        h.update(serde_json::to_vec(&self.normalizer).unwrap_or_default());
        h.finalize().into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::parse_kb;

    fn norm(s: &str) -> String {
        brute_force_normalize(s, &NormalizeConfig::default())
    }

    #[test]
    fn normalization_examples() {
        assert_eq!(norm("c__SecondarySchool"), "secondary_school");
        assert_eq!(norm("dog"), "dog");
        assert_eq!(norm("c__MeasureFn"), "measure");
        assert_eq!(norm("f__WhenFunction"), "when");
        assert_eq!(norm("s__HTMLParser"), "html_parser");
        assert_eq!(norm("p__instance"), "instance");
        assert_eq!(norm("c__Room101"), "room101");
        assert_eq!(norm("secondary_school"), "secondary_school");
        // Nothing left to strip to.
        assert_eq!(norm("c__"), "c");
        assert_eq!(norm("Fn"), "fn");
    }

    fn toy_store(tokens: &[&str]) -> EmbeddingStore {
        EmbeddingStore::from_pairs(
            tokens
                .iter()
                .enumerate()
                .map(|(i, t)| (*t, vec![1.0, i as f64])),
        )
        .unwrap()
    }

    #[test]
    fn bruteforce_only() {
        let kb = parse_kb("fof(a, axiom, c__Dog(x__Zzz)).").unwrap();
        let store = toy_store(&["dog", "cat"]);
        let m = SymbolMapping::build(&kb, &store, &[], &NormalizeConfig::default());
        let e = m.get("c__Dog").unwrap();
        assert_eq!((e.token.as_str(), e.source), ("dog", Source::Bruteforce));
        assert!(m.get("x__Zzz").is_none());
        assert_eq!(m.coverage(), 0.5);
    }

    #[test]
    fn priority_cascade() {
        let kb = parse_kb("fof(a, axiom, c__Puppy(c__Hound) & c__Kitten(c__Cat)).").unwrap();
        let store = toy_store(&["dog", "canine", "animal", "cat", "feline"]);
        let tables = vec![
            LexicalTable::new(
                Source::Instance,
                vec![
                    ("c__Puppy".into(), "animal".into()),
                    ("c__Kitten".into(), "animal".into()),
                    ("c__Cat".into(), "animal".into()),
                ],
            )
            .unwrap(),
            LexicalTable::new(
                Source::Synonym,
                vec![
                    ("c__Puppy".into(), "missing".into()),
                    ("c__Puppy".into(), "dog".into()),
                    ("c__Puppy".into(), "canine".into()),
                    ("c__Cat".into(), "feline".into()),
                ],
            )
            .unwrap(),
            LexicalTable::new(Source::Hyponym, vec![("c__Kitten".into(), "feline".into())]).unwrap(),
        ];
        let m = SymbolMapping::build(&kb, &store, &tables, &NormalizeConfig::default());
        // first in-vocabulary synonym beats the instance row
        assert_eq!(m.get("c__Puppy").map(|e| (e.token.as_str(), e.source)), Some(("dog", Source::Synonym)));
        // hyponym beats instance
        assert_eq!(m.get("c__Kitten").map(|e| e.source), Some(Source::Hyponym));
        // bruteforce hit cannot be overridden
        assert_eq!(m.get("c__Cat").map(|e| (e.token.as_str(), e.source)), Some(("cat", Source::Bruteforce)));
        assert!(m.get("c__Hound").is_none());
        assert_eq!(m.coverage(), 0.75);

        let inv = m.inverse_lookup("feline");
        assert_eq!(inv.into_iter().collect::<Vec<_>>(), [Symbol::new("c__Kitten")]);
        assert!(m.inverse_lookup("canine").is_empty());
    }

    #[test]
    fn bruteforce_source_not_allowed_in_tables() {
        assert!(matches!(
            LexicalTable::new(Source::Bruteforce, vec![]),
            Err(Error::UnknownSource(_))
        ));
        assert!(matches!("wordnet".parse::<Source>(), Err(Error::UnknownSource(_))));
    }

    #[test]
    fn map_symbols_and_inverse() {
        let kb = parse_kb("fof(a, axiom, dog(hound) & cat(zzz)).").unwrap();
        let store = toy_store(&["dog", "cat"]);
        let tables = vec![LexicalTable::new(Source::Synonym, vec![("hound".into(), "dog".into())]).unwrap()];
        let m = SymbolMapping::build(&kb, &store, &tables, &NormalizeConfig::default());
        assert_eq!(
            m.map_symbols(["dog", "zzz", "cat"].iter().copied()),
            ["cat", "dog"].map(String::from).into_iter().collect()
        );
        assert!(m.map_symbols(["zzz"].iter().copied()).is_empty());
        let inv: Vec<_> = m.inverse_lookup("dog").into_iter().collect();
        assert_eq!(inv, [Symbol::new("dog"), Symbol::new("hound")]);
    }

    #[test]
    fn tsv_round_trip_and_errors() {
        let kb = parse_kb("fof(a, axiom, c__Dog(hound) & cat(extra)).").unwrap();
        let store = toy_store(&["dog", "cat"]);
        let src = "c__Dog\tdog\tbruteforce\nhound\tdog\thyponym\nhound\tcat\tsynonym\nextra\tnotinv\tsynonym\nnotkb\tdog\tsynonym\n";
        let m = SymbolMapping::read_tsv(src.as_bytes(), &kb, &store, &NormalizeConfig::default()).unwrap();
        assert_eq!(m.token("hound"), Some("cat"));
        assert_eq!(m.len(), 2);
        let mut buf = Vec::new();
        m.write_tsv(&mut buf).unwrap();
        let again = SymbolMapping::read_tsv(&buf[..], &kb, &store, &NormalizeConfig::default()).unwrap();
        assert_eq!(again.digest(), m.digest());

        let bad = SymbolMapping::read_tsv("a\tb\n".as_bytes(), &kb, &store, &NormalizeConfig::default());
        assert!(matches!(bad, Err(Error::MappingParse { line: 1, .. })));
        let bad = SymbolMapping::read_tsv("a\tb\twordnet\n".as_bytes(), &kb, &store, &NormalizeConfig::default());
        assert!(matches!(bad, Err(Error::UnknownSource(_))));
    }

    #[test]
    fn goal_token_fallback() {
        let kb = parse_kb("fof(a, axiom, c__Flower(x)).").unwrap();
        let store = toy_store(&["flower", "tulip", "x"]);
        let m = SymbolMapping::build(&kb, &store, &[], &NormalizeConfig::default());
        assert_eq!(m.goal_token("tulip", &kb, &store).as_deref(), Some("tulip"));
        assert_eq!(m.goal_token("c__Flower", &kb, &store).as_deref(), Some("flower"));
        assert_eq!(m.goal_token("daisy", &kb, &store), None);
        let empty = SymbolMapping::empty(&kb);
        // KB symbols never fall back.
        assert_eq!(empty.goal_token("x", &kb, &store), None);
    }
}
