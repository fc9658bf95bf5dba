//! Skip-gram word embeddings with negative sampling, neighbour queries and
//! seed-keyword expansion.
//!
//! Training walks documents in order with one random stream per
//! `(document, epoch)`, which makes the default sequential mode
//! bit-reproducible. The opt-in `hogwild` mode runs documents in parallel
//! with unsynchronized updates and is not reproducible.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{BufRead, Write};
use std::sync::atomic::{AtomicU32, Ordering as MemOrder};

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SgConfig {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub min_count: u64,
    pub subsample_threshold: f64,
    pub learning_rate: f64,
    pub min_learning_rate: f64,
    pub seed: u64,
    pub hogwild: bool,
}

impl Default for SgConfig {
    fn default() -> Self {
        SgConfig {
            dim: 100,
            window: 5,
            negatives: 5,
            epochs: 5,
            min_count: 5,
            subsample_threshold: 1e-3,
            learning_rate: 0.025,
            min_learning_rate: 1e-4,
            seed: 2021,
            hogwild: false,
        }
    }
}

impl SgConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.window == 0 || self.negatives == 0 || self.epochs == 0 {
            return Err(Error::Config("dim, window, negatives and epochs must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.min_learning_rate >= 0.0 && self.min_learning_rate <= self.learning_rate) {
            return Err(Error::Config("learning rates must satisfy 0 <= min <= initial, initial > 0".into()));
        }
        if self.subsample_threshold < 0.0 {
            return Err(Error::Config("subsample_threshold must be >= 0".into()));
        }
        Ok(())
    }
}

/// Trained input vectors, one row per retained word in lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    words: Vec<String>,
    index: HashMap<String, usize>,
    counts: Vec<u64>,
    dim: usize,
    vectors: Vec<f32>,
}

impl EmbeddingTable {
    pub fn new(words: Vec<String>, counts: Vec<u64>, dim: usize, vectors: Vec<f32>) -> Result<Self> {
        if vectors.len() != words.len() * dim || counts.len() != words.len() {
            return Err(Error::Format("embedding dimensions do not match".into()));
        }
        if vectors.iter().any(|x| !x.is_finite()) {
            return Err(Error::Format("embedding has non-finite entries".into()));
        }
        let index: HashMap<String, usize> = words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        if index.len() != words.len() {
            return Err(Error::Format("duplicate words in embedding".into()));
        }
        Ok(EmbeddingTable {
            words,
            index,
            counts,
            dim,
            vectors,
        })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn count(&self, word: &str) -> Option<u64> {
        self.index.get(word).map(|&i| self.counts[i])
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn vector(&self, word: &str) -> Option<&[f32]> {
        self.index.get(word).map(|&i| self.row(i))
    }

    fn row(&self, i: usize) -> &[f32] {
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }

    /// Multiplies every vector by `c`.
    pub fn scaled(&self, c: f32) -> Self {
        EmbeddingTable {
            vectors: self.vectors.iter().map(|x| x * c).collect(),
            ..self.clone()
        }
    }

    /// Top-`k` words by cosine to `word`, the query itself first with
    /// similarity 1, ties in lexicographic order.
    pub fn nearest_neighbors(&self, word: &str, k: usize) -> Result<Vec<(String, f64)>> {
        let &q = self.index.get(word).ok_or_else(|| Error::UnknownWord(word.to_string()))?;
        let query = self.row(q);
        let qn = norm(query);
        if qn == 0.0 {
            return Err(Error::ZeroVector);
        }
        let mut scored: Vec<(usize, f64)> = (0..self.len())
            .into_par_iter()
            .filter(|&i| i != q)
            .map(|i| {
                let n = norm(self.row(i));
                let sim = if n == 0.0 { 0.0 } else { (dot(query, self.row(i)) / (qn * n)).clamp(-1.0, 1.0) };
                (i, sim)
            })
            .collect();
        scored.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .unwrap_or(Ordering::Equal)
                .then_with(|| self.words[a.0].cmp(&self.words[b.0]))
        });
        let mut out = vec![(word.to_string(), 1.0)];
        out.extend(scored.into_iter().take(k.saturating_sub(1)).map(|(i, s)| (self.words[i].clone(), s)));
        out.truncate(k);
        Ok(out)
    }

    /// Union of each seed's `k` nearest neighbours, minus `exclude`.
    pub fn expand_keywords(&self, seeds: &[String], k: usize, exclude: &BTreeSet<String>) -> Result<BTreeSet<String>> {
        let missing: Vec<String> = seeds.iter().filter(|s| !self.contains(s)).cloned().collect();
        if !missing.is_empty() {
            return Err(Error::UnknownWords(missing));
        }
        let mut out = BTreeSet::new();
        for seed in seeds {
            for (w, _) in self.nearest_neighbors(seed, k)? {
                if !exclude.contains(&w) {
                    out.insert(w);
                }
            }
        }
        Ok(out)
    }

    /// Text format: a `V dim` header, then `word v1 ... vdim` per line.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        let io = |e| Error::io("<embedding>", e);
        writeln!(out, "{} {}", self.len(), self.dim).map_err(io)?;
        for (i, w) in self.words.iter().enumerate() {
            write!(out, "{w}").map_err(io)?;
            for x in self.row(i) {
                write!(out, " {x}").map_err(io)?;
            }
            writeln!(out).map_err(io)?;
        }
        out.flush().map_err(io)
    }

    /// Reads the text format. Counts are not stored in it and come back as 0.
    pub fn read_text<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Format("empty embedding file".into()))?
            .map_err(|e| Error::io("<embedding>", e))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|x| x.parse().map_err(|_| Error::Format(format!("bad header {header:?}"))))
            .collect::<Result<_>>()?;
        let [v, dim] = dims[..] else {
            return Err(Error::Format(format!("bad header {header:?}")));
        };
        let mut rows: BTreeMap<String, Vec<f32>> = BTreeMap::new();
        for (n, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::io("<embedding>", e))?;
            let mut parts = line.split_whitespace();
            let Some(word) = parts.next() else { continue };
            let values: Vec<f32> = parts
                .map(|x| x.parse().map_err(|_| Error::Format(format!("line {}: bad number {x:?}", n + 2))))
                .collect::<Result<_>>()?;
            if values.len() != dim {
                return Err(Error::Format(format!("line {}: expected {dim} values", n + 2)));
            }
            rows.insert(word.to_string(), values);
        }
        if rows.len() != v {
            return Err(Error::Format(format!("header says {v} words, found {}", rows.len())));
        }
        let words: Vec<String> = rows.keys().cloned().collect();
        let vectors = rows.into_values().flatten().collect();
        EmbeddingTable::new(words.clone(), vec![0; words.len()], dim, vectors)
    }
}

fn dot(a: &[f32], b: &[f32]) -> f64 {
    a.iter().zip(b).map(|(x, y)| f64::from(*x) * f64::from(*y)).sum()
}

fn norm(a: &[f32]) -> f64 {
    dot(a, a).sqrt()
}

/// Cosine similarity; a zero vector is an error.
pub fn cosine(u: &[f32], v: &[f32]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::Config("vectors differ in length".into()));
    }
    let (nu, nv) = (norm(u), norm(v));
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((dot(u, v) / (nu * nv)).clamp(-1.0, 1.0))
}

/// f32 cells shared between training threads.
struct Cells(Vec<AtomicU32>);

impl Cells {
    fn new(values: impl Iterator<Item = f32>) -> Self {
        Cells(values.map(|x| AtomicU32::new(x.to_bits())).collect())
    }

    fn get(&self, i: usize) -> f32 {
        f32::from_bits(self.0[i].load(MemOrder::Relaxed))
    }

    fn add(&self, i: usize, delta: f32) {
        self.0[i].store((self.get(i) + delta).to_bits(), MemOrder::Relaxed);
    }
}

struct Trainer<'a> {
    config: &'a SgConfig,
    dim: usize,
    input: Cells,
    output: Cells,
    noise: WeightedIndex<f64>,
    keep: Vec<f64>,
    total_steps: f64,
}

impl Trainer<'_> {
    fn train_doc(&self, doc: &[u32], key: u64, epoch: usize, offset: u64, grad: &mut Vec<f32>) {
        let cfg = self.config;
        let mut r = rng::stream(cfg.seed, key, epoch as u64 + 1);
        let kept: Vec<u32> = doc.iter().copied().filter(|&w| r.gen::<f64>() < self.keep[w as usize]).collect();
        let dim = self.dim;
        grad.resize(dim, 0.0);
        for (pos, &center) in kept.iter().enumerate() {
            let progress = (offset + pos as u64) as f64 / self.total_steps;
            let lr = (cfg.learning_rate - (cfg.learning_rate - cfg.min_learning_rate) * progress).max(cfg.min_learning_rate) as f32;
            let reach = r.gen_range(1..=cfg.window);
            let lo = pos.saturating_sub(reach);
            let hi = (pos + reach + 1).min(kept.len());
            let ci = center as usize * dim;
            for (ctx_pos, &context) in kept.iter().enumerate().take(hi).skip(lo) {
                if ctx_pos == pos {
                    continue;
                }
                grad.iter_mut().for_each(|g| *g = 0.0);
                for n in 0..=cfg.negatives {
                    let (target, label) = if n == 0 {
                        (context, 1.0f32)
                    } else {
                        let t = self.noise.sample(&mut r) as u32;
                        if t == context {
                            continue;
                        }
                        (t, 0.0)
                    };
                    let ti = target as usize * dim;
                    let mut f = 0.0f32;
                    for d in 0..dim {
                        f += self.input.get(ci + d) * self.output.get(ti + d);
                    }
                    let g = (label - sigmoid(f)) * lr;
                    for (d, gd) in grad.iter_mut().enumerate() {
                        *gd += g * self.output.get(ti + d);
                        self.output.add(ti + d, g * self.input.get(ci + d));
                    }
                }
                for (d, gd) in grad.iter().enumerate() {
                    self.input.add(ci + d, *gd);
                }
            }
        }
    }
}

fn sigmoid(x: f32) -> f32 {
    if x > 8.0 {
        1.0
    } else if x < -8.0 {
        0.0
    } else {
        1.0 / (1.0 + (-x).exp())
    }
}

/// Trains skip-gram vectors on tokenized documents. `ids` key the per-
/// document random streams.
pub fn train_skipgram(docs: &[Vec<String>], ids: &[String], config: &SgConfig) -> Result<EmbeddingTable> {
    config.validate()?;
    if docs.len() != ids.len() {
        return Err(Error::Config("one id per document required".into()));
    }
    let total_tokens: usize = docs.iter().map(Vec::len).sum();
    if total_tokens < 10 * config.dim {
        return Err(Error::Degenerate(format!(
            "{total_tokens} tokens is too few for {}-dimensional vectors (need at least {})",
            config.dim,
            10 * config.dim
        )));
    }
    let mut freq: BTreeMap<&str, u64> = BTreeMap::new();
    for t in docs.iter().flatten() {
        *freq.entry(t.as_str()).or_insert(0) += 1;
    }
    freq.retain(|_, c| *c >= config.min_count);
    if freq.len() < 2 {
        return Err(Error::Degenerate(format!(
            "fewer than 2 words occur at least {} times",
            config.min_count
        )));
    }
    let words: Vec<String> = freq.keys().map(|w| w.to_string()).collect();
    let counts: Vec<u64> = freq.values().copied().collect();
    let lookup: HashMap<&str, u32> = freq.keys().enumerate().map(|(i, w)| (*w, i as u32)).collect();
    let encoded: Vec<Vec<u32>> = docs
        .iter()
        .map(|d| d.iter().filter_map(|t| lookup.get(t.as_str()).copied()).collect())
        .collect();
    let retained: u64 = counts.iter().sum();

    let keep = counts
        .iter()
        .map(|&c| {
            if config.subsample_threshold == 0.0 {
                return 1.0;
            }
            let ratio = c as f64 / (config.subsample_threshold * retained as f64);
            ((ratio.sqrt() + 1.0) / ratio).min(1.0)
        })
        .collect();
    let dim = config.dim;
    let input = Cells::new(words.iter().flat_map(|w| {
        let mut r = rng::stream(config.seed, rng::stable_hash(w.as_bytes()), 0);
        (0..dim).map(move |_| (r.gen::<f32>() - 0.5) / dim as f32)
    }));
    let trainer = Trainer {
        config,
        dim,
        input,
        output: Cells::new(std::iter::repeat_n(0.0, words.len() * dim)),
        noise: WeightedIndex::new(counts.iter().map(|&c| (c as f64).powf(0.75))).expect("positive counts"),
        keep,
        total_steps: (retained * config.epochs as u64) as f64,
    };

    // learning-rate schedule position of each document, fixed in advance so
    // the parallel mode decays the same way
    let mut offsets = Vec::with_capacity(encoded.len());
    let mut acc = 0u64;
    for d in &encoded {
        offsets.push(acc);
        acc += d.len() as u64;
    }
    let keys: Vec<u64> = ids.iter().map(|id| rng::doc_key(id)).collect();
    for epoch in 0..config.epochs {
        let base = epoch as u64 * retained;
        if config.hogwild {
            (0..encoded.len()).into_par_iter().for_each_init(Vec::new, |grad, d| {
                trainer.train_doc(&encoded[d], keys[d], epoch, base + offsets[d], grad)
            });
        } else {
            let mut grad = Vec::new();
            for d in 0..encoded.len() {
                trainer.train_doc(&encoded[d], keys[d], epoch, base + offsets[d], &mut grad);
            }
        }
    }
    let vectors = (0..words.len() * dim).map(|i| trainer.input.get(i)).collect();
    EmbeddingTable::new(words, counts, dim, vectors)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> EmbeddingTable {
        EmbeddingTable::new(
            vec!["a".into(), "b".into(), "c".into(), "d".into()],
            vec![1; 4],
            2,
            vec![1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 2.0, 0.0],
        )
        .unwrap()
    }

    #[test]
    fn cosine_examples() {
        let v = [0.3f32, -1.2, 2.0];
        let neg: Vec<f32> = v.iter().map(|x| -x).collect();
        assert!((cosine(&v, &v).unwrap() - 1.0).abs() < 1e-12);
        assert!((cosine(&v, &neg).unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert!(matches!(cosine(&[0.0, 0.0], &[1.0, 0.0]), Err(Error::ZeroVector)));
    }

    #[test]
    fn neighbours_include_self_and_break_ties() {
        let t = table();
        let nn = t.nearest_neighbors("a", 10).unwrap();
        assert_eq!(nn.len(), 4);
        assert_eq!(nn[0], ("a".to_string(), 1.0));
        // d is parallel to a, then c at 45 degrees, then b orthogonal
        assert_eq!(nn.iter().map(|x| x.0.as_str()).collect::<Vec<_>>(), ["a", "d", "c", "b"]);
        assert_eq!(t.nearest_neighbors("a", 1).unwrap().len(), 1);
        assert!(matches!(t.nearest_neighbors("zz", 3), Err(Error::UnknownWord(_))));
    }

    #[test]
    fn expansion() {
        let t = table();
        let none = BTreeSet::new();
        let one = t.expand_keywords(&["a".into()], 2, &none).unwrap();
        assert_eq!(one, ["a", "d"].iter().map(|s| s.to_string()).collect());
        let excl: BTreeSet<String> = ["d".to_string()].into();
        assert_eq!(t.expand_keywords(&["a".into()], 2, &excl).unwrap().len(), 1);
        let both = t.expand_keywords(&["a".into(), "d".into()], 2, &none).unwrap();
        assert!(both.len() < 4);
        match t.expand_keywords(&["a".into(), "x".into(), "y".into()], 2, &none) {
            Err(Error::UnknownWords(w)) => assert_eq!(w, vec!["x", "y"]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn text_roundtrip() {
        let t = table();
        let mut buf = Vec::new();
        t.write_text(&mut buf).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().starts_with("4 2\na 1 0\n"));
        let back = EmbeddingTable::read_text(&buf[..]).unwrap();
        assert_eq!(back.vector("c"), t.vector("c"));
        assert!(EmbeddingTable::read_text(&b"3 2\na 1 0\n"[..]).is_err());
    }

    #[test]
    fn refuses_tiny_corpora_and_bad_config() {
        let docs = vec![vec!["a".to_string(); 50]];
        let ids = vec!["d".to_string()];
        assert!(matches!(train_skipgram(&docs, &ids, &SgConfig::default()), Err(Error::Degenerate(_))));
        let cfg = SgConfig {
            dim: 0,
            ..SgConfig::default()
        };
        assert!(matches!(train_skipgram(&docs, &ids, &cfg), Err(Error::Config(_))));
    }

    #[test]
    fn min_count_and_determinism() {
        let mut docs: Vec<Vec<String>> = (0..200)
            .map(|i| (0..10).map(|j| format!("w{}", (i + j) % 7)).collect())
            .collect();
        docs[0].push("rare".into());
        let ids: Vec<String> = (0..docs.len()).map(|i| format!("d{i}")).collect();
        let cfg = SgConfig {
            dim: 8,
            epochs: 2,
            ..SgConfig::default()
        };
        let a = train_skipgram(&docs, &ids, &cfg).unwrap();
        assert!(!a.contains("rare"));
        assert_eq!(a.len(), 7);
        assert_eq!(a, train_skipgram(&docs, &ids, &cfg).unwrap());
        let hog = train_skipgram(&docs, &ids, &SgConfig { hogwild: true, ..cfg }).unwrap();
        assert_eq!(hog.len(), 7);
    }
}
