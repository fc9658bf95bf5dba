//! Text normalization, vocabulary pruning, bigram phrasing, and
//! bag-of-words encoding.

mod lemma;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use unicode_general_category::{get_general_category, GeneralCategory as Gc};

use crate::error::{Error, Result};

pub use lemma::{generate_lemma_table, load_lemma_file, LemmaTable};

pub type WordId = u32;

const DEFAULT_STOPWORDS: &str = include_str!("stopwords_en.txt");

pub fn default_stopwords() -> BTreeSet<String> {
    parse_word_list(DEFAULT_STOPWORDS)
}

fn parse_word_list(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(|l| l.trim().to_lowercase())
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect()
}

/// One word per line, UTF-8.
pub fn load_stopword_file(path: &Path) -> Result<BTreeSet<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_word_list(&text))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrepConfig {
    pub df_min: f64,
    pub df_max: f64,
    pub min_token_len: usize,
    pub min_doc_len: usize,
    pub stopwords: BTreeSet<String>,
    pub lemma_table: Option<LemmaTable>,
    pub bigram_min_count: u64,
    pub bigram_threshold: f64,
}

impl Default for PrepConfig {
    fn default() -> Self {
        PrepConfig {
            df_min: 0.001,
            df_max: 0.95,
            min_token_len: 3,
            min_doc_len: 3,
            stopwords: default_stopwords(),
            lemma_table: None,
            bigram_min_count: 20,
            bigram_threshold: 10.0,
        }
    }
}

impl PrepConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 <= self.df_min && self.df_min < self.df_max && self.df_max <= 1.0) {
            return Err(Error::Config(format!(
                "need 0 <= df_min < df_max <= 1, got {} and {}",
                self.df_min, self.df_max
            )));
        }
        if self.min_token_len == 0 || self.min_doc_len == 0 {
            return Err(Error::Config("min_token_len and min_doc_len must be >= 1".into()));
        }
        Ok(())
    }
}

fn is_punct_or_symbol(c: char) -> bool {
    matches!(
        get_general_category(c),
        Gc::ConnectorPunctuation
            | Gc::DashPunctuation
            | Gc::OpenPunctuation
            | Gc::ClosePunctuation
            | Gc::InitialPunctuation
            | Gc::FinalPunctuation
            | Gc::OtherPunctuation
            | Gc::MathSymbol
            | Gc::CurrencySymbol
            | Gc::ModifierSymbol
            | Gc::OtherSymbol
    )
}

/// Strips punctuation and symbols, splits on whitespace, lowercases, and
/// applies the lemma table. Digits are kept.
pub fn normalize(text: &str, lemma_table: Option<&LemmaTable>) -> Vec<String> {
    let cleaned: String = text.chars().filter(|c| !is_punct_or_symbol(*c)).collect();
    cleaned
        .split_whitespace()
        .map(|t| {
            let lower = t.to_lowercase();
            match lemma_table.and_then(|m| m.get(&lower)) {
                Some(lemma) => lemma.clone(),
                None => lower,
            }
        })
        .collect()
}

/// Ordered word list with per-word document frequencies.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(from = "VocabularyRepr", into = "VocabularyRepr")]
pub struct Vocabulary {
    words: Vec<String>,
    doc_freq: Vec<u32>,
    total_docs: usize,
    index: HashMap<String, WordId>,
}

#[derive(Serialize, Deserialize)]
struct VocabularyRepr {
    words: Vec<String>,
    doc_freq: Vec<u32>,
    total_docs: usize,
}

impl From<VocabularyRepr> for Vocabulary {
    fn from(r: VocabularyRepr) -> Self {
        Vocabulary::new(r.words, r.doc_freq, r.total_docs)
    }
}

impl From<Vocabulary> for VocabularyRepr {
    fn from(v: Vocabulary) -> Self {
        VocabularyRepr {
            words: v.words,
            doc_freq: v.doc_freq,
            total_docs: v.total_docs,
        }
    }
}

impl PartialEq for Vocabulary {
    fn eq(&self, other: &Self) -> bool {
        self.words == other.words && self.doc_freq == other.doc_freq && self.total_docs == other.total_docs
    }
}

impl Vocabulary {
    pub fn new(words: Vec<String>, doc_freq: Vec<u32>, total_docs: usize) -> Self {
        assert_eq!(words.len(), doc_freq.len());
        let index = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i as WordId))
            .collect();
        Vocabulary {
            words,
            doc_freq,
            total_docs,
            index,
        }
    }

    /// Lexicographically ordered vocabulary of every token in `docs`.
    pub fn from_docs(docs: &[Vec<String>]) -> Self {
        let df = document_frequencies(docs);
        let mut words: Vec<&String> = df.keys().copied().collect();
        words.sort();
        let doc_freq = words.iter().map(|w| df[*w]).collect();
        Vocabulary::new(words.into_iter().cloned().collect(), doc_freq, docs.len())
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn word(&self, id: WordId) -> &str {
        &self.words[id as usize]
    }

    pub fn id(&self, word: &str) -> Option<WordId> {
        self.index.get(word).copied()
    }

    pub fn doc_freq(&self) -> &[u32] {
        &self.doc_freq
    }

    pub fn total_docs(&self) -> usize {
        self.total_docs
    }

    /// SHA-256 over the newline-joined word list.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        for w in &self.words {
            h.update(w.as_bytes());
            h.update(b"\n");
        }
        hex::encode(h.finalize())
    }

    /// CSV with header `word,index,doc_freq`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["word", "index", "doc_freq"])?;
        for (i, (word, df)) in self.words.iter().zip(&self.doc_freq).enumerate() {
            w.write_record([word.as_str(), &i.to_string(), &df.to_string()])?;
        }
        w.flush().map_err(|e| Error::io("<vocabulary csv>", e))?;
        Ok(())
    }
}

fn document_frequencies(docs: &[Vec<String>]) -> HashMap<&String, u32> {
    let mut df: HashMap<&String, u32> = HashMap::new();
    for doc in docs {
        let unique: HashSet<&String> = doc.iter().collect();
        for w in unique {
            *df.entry(w).or_insert(0) += 1;
        }
    }
    df
}

#[derive(Debug, Clone)]
pub struct Filtered {
    pub docs: Vec<Vec<String>>,
    /// Positions of surviving documents in the input.
    pub kept: Vec<usize>,
    pub vocab: Vocabulary,
}

/// Removes stopwords, short tokens and out-of-band words, then drops short
/// documents.
///
/// Document frequencies are measured over all input documents before short
/// documents are dropped; the returned vocabulary carries those counts, and
/// only words that still occur in a surviving document.
pub fn apply_filters(docs: Vec<Vec<String>>, config: &PrepConfig) -> Result<Filtered> {
    config.validate()?;
    let total = docs.len();
    if total == 0 {
        return Err(Error::EmptyAfterPreprocessing);
    }
    let docs: Vec<Vec<String>> = docs
        .into_par_iter()
        .map(|doc| {
            doc.into_iter()
                .filter(|t| t.chars().count() >= config.min_token_len && !config.stopwords.contains(t))
                .collect()
        })
        .collect();

    let df = document_frequencies(&docs);
    let in_band: HashSet<String> = df
        .iter()
        .filter(|(_, &n)| {
            let frac = n as f64 / total as f64;
            frac >= config.df_min && frac <= config.df_max
        })
        .map(|(w, _)| (*w).clone())
        .collect();
    let counts: HashMap<String, u32> = df.into_iter().map(|(w, n)| (w.clone(), n)).collect();

    let mut kept = Vec::new();
    let mut out = Vec::new();
    for (i, doc) in docs.into_iter().enumerate() {
        let doc: Vec<String> = doc.into_iter().filter(|t| in_band.contains(t)).collect();
        if doc.len() >= config.min_doc_len {
            kept.push(i);
            out.push(doc);
        }
    }
    if out.is_empty() {
        return Err(Error::EmptyAfterPreprocessing);
    }

    let surviving: BTreeSet<&String> = out.iter().flatten().collect();
    let words: Vec<String> = surviving.into_iter().cloned().collect();
    let doc_freq = words.iter().map(|w| counts[w]).collect();
    Ok(Filtered {
        docs: out,
        kept,
        vocab: Vocabulary::new(words, doc_freq, total),
    })
}

/// Adjacent pairs promoted to single `a_b` tokens.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PhraseSet {
    /// first token -> second tokens
    pairs: BTreeMap<String, BTreeSet<String>>,
}

impl FromIterator<(String, String)> for PhraseSet {
    fn from_iter<I: IntoIterator<Item = (String, String)>>(iter: I) -> Self {
        let mut pairs: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for (a, b) in iter {
            pairs.entry(a).or_default().insert(b);
        }
        PhraseSet { pairs }
    }
}

impl PhraseSet {
    pub fn contains(&self, a: &str, b: &str) -> bool {
        self.pairs.get(a).is_some_and(|s| s.contains(b))
    }

    pub fn len(&self) -> usize {
        self.pairs.values().map(BTreeSet::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&str, &str)> {
        self.pairs
            .iter()
            .flat_map(|(a, bs)| bs.iter().map(move |b| (a.as_str(), b.as_str())))
    }

    /// Single greedy left-to-right pass: a qualifying pair is merged and the
    /// scan resumes after its second token.
    pub fn merge(&self, doc: &[String]) -> Vec<String> {
        let mut out = Vec::with_capacity(doc.len());
        let mut i = 0;
        while i < doc.len() {
            if i + 1 < doc.len() && self.contains(&doc[i], &doc[i + 1]) {
                out.push(format!("{}_{}", doc[i], doc[i + 1]));
                i += 2;
            } else {
                out.push(doc[i].clone());
                i += 1;
            }
        }
        out
    }
}

/// `(count(ab) - min_count) * n_tokens / (count(a) * count(b))`
pub fn bigram_score(count_a: u64, count_b: u64, count_ab: u64, min_count: u64, n_tokens: u64) -> f64 {
    (count_ab as f64 - min_count as f64) * n_tokens as f64 / (count_a as f64 * count_b as f64)
}

/// Scores every adjacent pair and merges qualifying ones.
pub fn detect_bigrams(docs: &[Vec<String>], config: &PrepConfig) -> (Vec<Vec<String>>, PhraseSet) {
    let mut unigrams: HashMap<&str, u64> = HashMap::new();
    let mut pairs: HashMap<(&str, &str), u64> = HashMap::new();
    let mut n_tokens = 0u64;
    for doc in docs {
        n_tokens += doc.len() as u64;
        for t in doc {
            *unigrams.entry(t.as_str()).or_insert(0) += 1;
        }
        for w in doc.windows(2) {
            *pairs.entry((w[0].as_str(), w[1].as_str())).or_insert(0) += 1;
        }
    }
    let phrases: PhraseSet = pairs
        .iter()
        .filter(|((a, b), &n)| {
            bigram_score(unigrams[a], unigrams[b], n, config.bigram_min_count, n_tokens) >= config.bigram_threshold
        })
        .map(|((a, b), _)| (a.to_string(), b.to_string()))
        .collect();
    let merged = docs.par_iter().map(|d| phrases.merge(d)).collect();
    (merged, phrases)
}

/// Bag-of-words corpus over a shared vocabulary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BowCorpus {
    pub vocab: Arc<Vocabulary>,
    pub docs: Vec<Vec<WordId>>,
    pub doc_ids: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BowReport {
    pub oov_tokens: usize,
    pub empty_docs: Vec<String>,
}

impl BowCorpus {
    pub fn num_docs(&self) -> usize {
        self.docs.len()
    }

    pub fn num_tokens(&self) -> usize {
        self.docs.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn decode(&self, doc: usize) -> Vec<String> {
        self.docs[doc].iter().map(|&w| self.vocab.word(w).to_string()).collect()
    }

    /// The documents at `indices`, sharing this corpus's vocabulary.
    pub fn subset(&self, indices: &[usize]) -> BowCorpus {
        BowCorpus {
            vocab: Arc::clone(&self.vocab),
            docs: indices.iter().map(|&i| self.docs[i].clone()).collect(),
            doc_ids: indices.iter().map(|&i| self.doc_ids[i].clone()).collect(),
        }
    }
}

/// Encodes token documents against `vocab`, dropping out-of-vocabulary
/// tokens. Documents left empty are kept and listed in the report.
pub fn to_bow(docs: &[Vec<String>], ids: &[String], vocab: Arc<Vocabulary>) -> (BowCorpus, BowReport) {
    assert_eq!(docs.len(), ids.len(), "one id per document");
    let encoded: Vec<(Vec<WordId>, usize)> = docs
        .par_iter()
        .map(|doc| {
            let ids: Vec<WordId> = doc.iter().filter_map(|t| vocab.id(t)).collect();
            let oov = doc.len() - ids.len();
            (ids, oov)
        })
        .collect();
    let mut report = BowReport::default();
    let mut out = Vec::with_capacity(encoded.len());
    for ((doc, oov), id) in encoded.into_iter().zip(ids) {
        report.oov_tokens += oov;
        if doc.is_empty() {
            report.empty_docs.push(id.clone());
        }
        out.push(doc);
    }
    (
        BowCorpus {
            vocab,
            docs: out,
            doc_ids: ids.to_vec(),
        },
        report,
    )
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PrepReport {
    pub input_docs: usize,
    pub dropped_by_filters: usize,
    pub dropped_after_bigrams: usize,
    pub phrases: usize,
    pub vocabulary_size: usize,
    pub tokens: usize,
}

#[derive(Debug, Clone)]
pub struct Prepared {
    pub bow: BowCorpus,
    pub phrases: PhraseSet,
    pub report: PrepReport,
}

/// Full pipeline: normalize, filter, phrase, encode.
///
/// Documents shorter than `min_doc_len` after bigram merging are dropped so
/// that the returned corpus honours that bound.
pub fn prepare(ids: &[String], texts: &[&str], config: &PrepConfig) -> Result<Prepared> {
    assert_eq!(ids.len(), texts.len(), "one id per text");
    let tokens: Vec<Vec<String>> = texts
        .par_iter()
        .map(|t| normalize(t, config.lemma_table.as_ref()))
        .collect();
    let filtered = apply_filters(tokens, config)?;
    let (merged, phrases) = detect_bigrams(&filtered.docs, config);

    let mut kept_docs = Vec::new();
    let mut kept_ids = Vec::new();
    for (doc, &src) in merged.into_iter().zip(&filtered.kept) {
        if doc.len() >= config.min_doc_len {
            kept_docs.push(doc);
            kept_ids.push(ids[src].clone());
        }
    }
    if kept_docs.is_empty() {
        return Err(Error::EmptyAfterPreprocessing);
    }
    let vocab = Arc::new(Vocabulary::from_docs(&kept_docs));
    let (bow, _) = to_bow(&kept_docs, &kept_ids, vocab);
    let report = PrepReport {
        input_docs: ids.len(),
        dropped_by_filters: ids.len() - filtered.kept.len(),
        dropped_after_bigrams: filtered.kept.len() - kept_docs.len(),
        phrases: phrases.len(),
        vocabulary_size: bow.vocab.len(),
        tokens: bow.num_tokens(),
    };
    Ok(Prepared { bow, phrases, report })
}

/// Token stream used for keyword matching: normalization, stopword and
/// length filtering, then phrase merging. No frequency pruning.
pub fn match_tokens(text: &str, config: &PrepConfig, phrases: &PhraseSet) -> Vec<String> {
    let tokens: Vec<String> = normalize(text, config.lemma_table.as_ref())
        .into_iter()
        .filter(|t| t.chars().count() >= config.min_token_len && !config.stopwords.contains(t))
        .collect();
    phrases.merge(&tokens)
}
