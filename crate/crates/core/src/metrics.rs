//! Topic-model evaluation: NPMI coherence, diversity, quality, topic-count
//! sweeps and per-slice averaged evaluation.
//!
//! Co-occurrence is counted at document level (boolean presence of both
//! words anywhere in the same document).

use std::collections::BTreeMap;
use std::io::Write;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dtm::{DtmModel, SlicedCorpus};
use crate::error::{Error, Result};
use crate::lda::{train_lda, LdaConfig};
use crate::rng;
use crate::textprep::{BowCorpus, WordId};

pub const DEFAULT_TOP_N: usize = 10;
pub const DEFAULT_TOP_D: usize = 25;
pub const DEFAULT_EPSILON: f64 = 1e-12;

/// Document-frequency and pairwise co-document counts for a word set.
#[derive(Debug, Clone, PartialEq)]
pub struct Cooccurrence {
    pub words: Vec<WordId>,
    pub num_docs: usize,
    /// Documents containing `words[i]`.
    pub single: Vec<u64>,
    /// Row-major `m × m`; symmetric, diagonal equals `single`.
    pub pair: Vec<u64>,
}

impl Cooccurrence {
    pub fn count(words: &[WordId], reference: &BowCorpus) -> Self {
        let mut uniq = words.to_vec();
        uniq.sort_unstable();
        uniq.dedup();
        let m = uniq.len();
        let mut local = vec![u32::MAX; reference.vocab.len()];
        for (i, &w) in uniq.iter().enumerate() {
            if (w as usize) < local.len() {
                local[w as usize] = i as u32;
            }
        }
        let pair = reference
            .docs
            .par_iter()
            .fold(
                || (vec![0u64; m * m], Vec::new()),
                |(mut acc, mut present), doc| {
                    present.clear();
                    present.extend(doc.iter().map(|&w| local[w as usize]).filter(|&i| i != u32::MAX));
                    present.sort_unstable();
                    present.dedup();
                    for (a, &i) in present.iter().enumerate() {
                        for &j in &present[a..] {
                            acc[i as usize * m + j as usize] += 1;
                        }
                    }
                    (acc, present)
                },
            )
            .map(|(acc, _)| acc)
            .reduce(
                || vec![0u64; m * m],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            );
        let mut pair = pair;
        for i in 0..m {
            for j in 0..i {
                pair[i * m + j] = pair[j * m + i];
            }
        }
        Cooccurrence {
            single: (0..m).map(|i| pair[i * m + i]).collect(),
            words: uniq,
            num_docs: reference.num_docs(),
            pair,
        }
    }

    fn index(&self, w: WordId) -> Option<usize> {
        self.words.binary_search(&w).ok()
    }

    /// `(P(a), P(b), P(a, b))` as document fractions.
    pub fn probabilities(&self, a: WordId, b: WordId) -> Option<(f64, f64, f64)> {
        let (i, j) = (self.index(a)?, self.index(b)?);
        let n = self.num_docs as f64;
        let m = self.words.len();
        Some((self.single[i] as f64 / n, self.single[j] as f64 / n, self.pair[i * m + j] as f64 / n))
    }
}

/// NPMI of a pair from its probabilities, clamped to [-1, 1]. `None` when a
/// marginal is zero.
///
/// Pairs that never co-occur get -1, the limit of the smoothed formula as
/// `epsilon` goes to 0; at `epsilon = 1e-12` the smoothed value would still
/// be around -0.7 for typical marginals.
pub fn npmi(p_a: f64, p_b: f64, p_ab: f64, epsilon: f64) -> Option<f64> {
    if p_a <= 0.0 || p_b <= 0.0 {
        return None;
    }
    if p_ab <= 0.0 {
        return Some(-1.0);
    }
    let joint = p_ab + epsilon;
    if joint >= 1.0 {
        return Some(1.0);
    }
    let value = (joint / (p_a * p_b)).ln() / -joint.ln();
    Some(value.clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coherence {
    pub per_topic: Vec<f64>,
    pub mean: f64,
    /// Word pairs left out because a word never occurs in the reference.
    pub skipped_pairs: Vec<(String, String)>,
}

/// Mean pairwise NPMI over each topic's first `top_n` words, with
/// probabilities taken from `reference`.
pub fn npmi_coherence(topics: &[Vec<String>], reference: &BowCorpus, top_n: usize, epsilon: f64) -> Result<Coherence> {
    if reference.num_docs() == 0 {
        return Err(Error::EmptyCorpus);
    }
    if topics.is_empty() {
        return Err(Error::Config("no topics to score".into()));
    }
    let vocab = &reference.vocab;
    let ids: Vec<Vec<Option<WordId>>> = topics
        .iter()
        .map(|t| t.iter().take(top_n).map(|w| vocab.id(w)).collect())
        .collect();
    let all: Vec<WordId> = ids.iter().flatten().flatten().copied().collect();
    let co = Cooccurrence::count(&all, reference);

    let mut per_topic = Vec::with_capacity(topics.len());
    let mut skipped_pairs = Vec::new();
    for (t, (words, ids)) in topics.iter().zip(&ids).enumerate() {
        let present = ids
            .iter()
            .filter(|id| id.is_some_and(|w| co.probabilities(w, w).is_some_and(|p| p.0 > 0.0)))
            .count();
        if present < 2 {
            return Err(Error::Degenerate(format!(
                "topic {t} has fewer than 2 of its top words in the reference corpus"
            )));
        }
        let mut sum = 0.0;
        let mut scored = 0usize;
        for i in 0..ids.len() {
            for j in i + 1..ids.len() {
                let value = match (ids[i], ids[j]) {
                    (Some(a), Some(b)) => co.probabilities(a, b).and_then(|(pa, pb, pab)| npmi(pa, pb, pab, epsilon)),
                    _ => None,
                };
                match value {
                    Some(v) => {
                        sum += v;
                        scored += 1;
                    }
                    None => skipped_pairs.push((words[i].clone(), words[j].clone())),
                }
            }
        }
        per_topic.push(sum / scored as f64);
    }
    let mean = per_topic.iter().sum::<f64>() / per_topic.len() as f64;
    Ok(Coherence {
        per_topic,
        mean,
        skipped_pairs,
    })
}

/// Share of unique words among all topics' first `top_d` words.
pub fn topic_diversity(topics: &[Vec<String>], top_d: usize) -> Result<f64> {
    if topics.is_empty() || top_d == 0 {
        return Err(Error::Config("diversity needs at least one topic and top_d ≥ 1".into()));
    }
    if let Some(t) = topics.iter().position(|t| t.len() < top_d) {
        return Err(Error::Degenerate(format!("topic {t} has fewer than {top_d} words")));
    }
    let unique: std::collections::HashSet<&str> = topics.iter().flat_map(|t| t[..top_d].iter().map(String::as_str)).collect();
    Ok(unique.len() as f64 / (topics.len() * top_d) as f64)
}

pub fn topic_quality(mean_npmi: f64, diversity: f64) -> f64 {
    mean_npmi * diversity
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsContext {
    pub corpus_id: String,
    pub model_id: String,
    pub top_n: usize,
    pub top_d: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub per_topic_npmi: Vec<f64>,
    pub mean_npmi: f64,
    pub diversity: f64,
    pub quality: f64,
    pub skipped_pairs: usize,
    pub context: MetricsContext,
}

impl MetricsReport {
    fn new(per_topic_npmi: Vec<f64>, mean_npmi: f64, diversity: f64, skipped_pairs: usize, context: MetricsContext) -> Self {
        MetricsReport {
            per_topic_npmi,
            mean_npmi,
            diversity,
            quality: topic_quality(mean_npmi, diversity),
            skipped_pairs,
            context,
        }
    }
}

/// Scores a set of topics against a reference corpus.
pub fn evaluate_topics(topics: &[Vec<String>], reference: &BowCorpus, context: MetricsContext) -> Result<MetricsReport> {
    let coherence = npmi_coherence(topics, reference, context.top_n, DEFAULT_EPSILON)?;
    let diversity = topic_diversity(topics, context.top_d)?;
    Ok(MetricsReport::new(
        coherence.per_topic,
        coherence.mean,
        diversity,
        coherence.skipped_pairs.len(),
        context,
    ))
}

/// The topic counts searched by default: 25 to 200 in steps of 25.
pub fn default_sweep_ks() -> Vec<usize> {
    (25..=200).step_by(25).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    /// `(k, mean NPMI)` in input order.
    pub scores: Vec<(usize, f64)>,
    /// The k with the highest score; the first one on ties.
    pub best_k: usize,
}

/// Trains one model per k (same seed otherwise) and scores mean NPMI on the
/// training corpus.
pub fn sweep_topic_count(bow: &BowCorpus, ks: &[usize], template: &LdaConfig, top_n: usize) -> Result<SweepResult> {
    if ks.is_empty() {
        return Err(Error::Config("empty list of topic counts".into()));
    }
    if let Some(&k) = ks.iter().find(|&&k| k < 2) {
        return Err(Error::Config(format!("topic count {k} is below 2")));
    }
    let scores = ks
        .par_iter()
        .map(|&k| {
            let tag = |source| Error::Sweep {
                k,
                source: Box::new(source),
            };
            let cfg = LdaConfig {
                num_topics: k,
                ..template.clone()
            };
            let model = train_lda(bow, &cfg, None).map_err(tag)?;
            let topics = (0..k).map(|t| model.top_words(t, top_n)).collect::<Result<Vec<_>>>().map_err(tag)?;
            let c = npmi_coherence(&topics, bow, top_n, DEFAULT_EPSILON).map_err(tag)?;
            Ok((k, c.mean))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut best = scores[0];
    for &s in &scores[1..] {
        if s.1 > best.1 {
            best = s;
        }
    }
    Ok(SweepResult { scores, best_k: best.0 })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

/// Seeded 8:1:1 partition of `0..n`: floor(0.8n) train, floor(0.1n)
/// validation, the remainder test.
pub fn split_811(n: usize, seed: u64) -> Split {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::stream(seed, rng::stable_hash(b"split"), 0));
    let n_train = n * 8 / 10;
    let n_val = n / 10;
    let test = order.split_off(n_train + n_val);
    let validation = order.split_off(n_train);
    Split {
        train: order,
        validation,
        test,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceAveraged {
    pub per_slice: Vec<(String, MetricsReport)>,
    /// Unweighted mean over non-empty slices; `quality` is recomputed from
    /// the averaged NPMI and diversity.
    pub average: MetricsReport,
}

/// Per-slice NPMI on each slice's held-out test partition, diversity from
/// each slice's topics, averaged over non-empty slices.
pub fn slice_averaged_metrics(
    model: &DtmModel,
    sliced: &SlicedCorpus,
    split_seed: u64,
    top_n: usize,
    top_d: usize,
    model_id: &str,
) -> Result<SliceAveraged> {
    if sliced.len() != model.num_slices() {
        return Err(Error::Config(format!(
            "model has {} slices, corpus has {}",
            model.num_slices(),
            sliced.len()
        )));
    }
    let k = model.num_topics();
    let mut per_slice = Vec::new();
    for (t, (bow, label)) in sliced.slices.iter().zip(&sliced.labels).enumerate() {
        if bow.num_docs() == 0 {
            continue;
        }
        if bow.num_docs() < 10 {
            return Err(Error::Degenerate(format!(
                "slice {label} has {} documents; at least 10 are needed for an 8:1:1 split",
                bow.num_docs()
            )));
        }
        let split = split_811(bow.num_docs(), split_seed);
        let test = bow.subset(&split.test);
        let lists = (0..k)
            .map(|topic| model.slices[t].top_words(topic, top_n.max(top_d)))
            .collect::<Result<Vec<_>>>()?;
        let context = MetricsContext {
            corpus_id: label.clone(),
            model_id: model_id.to_string(),
            top_n,
            top_d,
        };
        per_slice.push((label.clone(), evaluate_topics(&lists, &test, context)?));
    }
    if per_slice.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    // running mean: exact when every slice has the same value
    let mean_of = |f: &dyn Fn(&MetricsReport) -> f64| {
        per_slice
            .iter()
            .enumerate()
            .fold(0.0, |m, (i, (_, r))| m + (f(r) - m) / (i + 1) as f64)
    };
    let per_topic = (0..k).map(|i| mean_of(&|r| r.per_topic_npmi[i])).collect();
    let average = MetricsReport::new(
        per_topic,
        mean_of(&|r| r.mean_npmi),
        mean_of(&|r| r.diversity),
        per_slice.iter().map(|(_, r)| r.skipped_pairs).sum(),
        MetricsContext {
            corpus_id: "all".into(),
            model_id: model_id.to_string(),
            top_n,
            top_d,
        },
    );
    Ok(SliceAveraged { per_slice, average })
}

/// CSV `model_id,slice,mean_npmi,diversity,quality`, one row per slice and
/// a final `all` row.
pub fn write_metrics_csv<W: Write>(report: &SliceAveraged, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["model_id", "slice", "mean_npmi", "diversity", "quality"])?;
    let rows = report.per_slice.iter().map(|(l, r)| (l.as_str(), r)).chain([("all", &report.average)]);
    for (label, r) in rows {
        w.write_record([
            r.context.model_id.as_str(),
            label,
            &r.mean_npmi.to_string(),
            &r.diversity.to_string(),
            &r.quality.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<metrics csv>", e))?;
    Ok(())
}

/// Counts, per word pair key `"a b"`, how often a pair was skipped.
pub fn summarize_skipped(pairs: &[(String, String)]) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for (a, b) in pairs {
        *out.entry(format!("{a} {b}")).or_insert(0) += 1;
    }
    out
}
