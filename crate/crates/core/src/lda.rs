//! Latent Dirichlet allocation by collapsed Gibbs sampling.
//!
//! # Parallel sampling
//!
//! Within a pass every document samples against the corpus-wide topic/word
//! counts frozen at the start of the pass plus its own in-pass changes;
//! changes from other documents become visible at the next pass. Each
//! document draws from a random stream keyed by `(seed, document id, pass)`.
//! Together these make the result independent of the number of worker
//! threads and of document order: all counts are integers, so merging them
//! is exact.

use std::cmp::Ordering;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::rng;
use crate::textprep::{BowCorpus, Vocabulary, WordId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaConfig {
    pub num_topics: usize,
    /// Symmetric document-topic prior; `None` means `50 / num_topics`.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub passes: usize,
    /// Passes discarded before averaging; `None` means `passes / 2`.
    pub burn_in: Option<usize>,
    pub seed: u64,
}

impl Default for LdaConfig {
    fn default() -> Self {
        LdaConfig {
            num_topics: 50,
            alpha: None,
            beta: 0.01,
            passes: 20,
            burn_in: None,
            seed: 2021,
        }
    }
}

impl LdaConfig {
    pub fn with_topics(num_topics: usize) -> Self {
        LdaConfig {
            num_topics,
            ..LdaConfig::default()
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(50.0 / self.num_topics as f64)
    }

    pub fn burn_in(&self) -> usize {
        self.burn_in.unwrap_or(self.passes / 2)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_topics == 0 {
            return Err(Error::Config("num_topics must be >= 1".into()));
        }
        if !(self.alpha() > 0.0 && self.alpha().is_finite()) {
            return Err(Error::Config("alpha must be positive".into()));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::Config("beta must be positive".into()));
        }
        if self.passes == 0 {
            return Err(Error::Config("passes must be >= 1".into()));
        }
        if self.burn_in() >= self.passes {
            return Err(Error::Config(format!(
                "burn_in ({}) must be smaller than passes ({})",
                self.burn_in(),
                self.passes
            )));
        }
        Ok(())
    }
}

/// Per-topic, per-word Dirichlet parameters (K×V, row-major).
#[derive(Debug, Clone, PartialEq)]
pub struct TopicPrior {
    num_topics: usize,
    vocab_size: usize,
    values: Vec<f64>,
}

impl TopicPrior {
    pub fn new(num_topics: usize, vocab_size: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != num_topics * vocab_size {
            return Err(Error::Config(format!(
                "topic prior has {} entries, expected {}x{}",
                values.len(),
                num_topics,
                vocab_size
            )));
        }
        if values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::Config("topic prior entries must be positive".into()));
        }
        Ok(TopicPrior {
            num_topics,
            vocab_size,
            values,
        })
    }

    pub fn get(&self, k: usize, w: usize) -> f64 {
        self.values[k * self.vocab_size + w]
    }
}

enum Beta<'a> {
    Symmetric { beta: f64, row_sum: f64 },
    PerWord { prior: &'a TopicPrior, row_sums: Vec<f64> },
}

impl Beta<'_> {
    #[inline]
    fn get(&self, k: usize, w: usize) -> f64 {
        match self {
            Beta::Symmetric { beta, .. } => *beta,
            Beta::PerWord { prior, .. } => prior.get(k, w),
        }
    }

    #[inline]
    fn row_sum(&self, k: usize) -> f64 {
        match self {
            Beta::Symmetric { row_sum, .. } => *row_sum,
            Beta::PerWord { row_sums, .. } => row_sums[k],
        }
    }
}

/// A trained topic model.
#[derive(Debug, Clone, PartialEq)]
pub struct LdaModel {
    pub config: LdaConfig,
    pub vocab: Arc<Vocabulary>,
    /// K×V topic-word probabilities, row-major.
    pub phi: Vec<f64>,
    /// D×K document-topic probabilities, row-major.
    pub theta: Vec<f64>,
    pub doc_ids: Vec<String>,
    /// Fraction of tokens assigned to each topic, averaged after burn-in.
    pub topic_share: Vec<f64>,
    /// Collapsed joint log-likelihood `log p(w, z)` after each pass.
    pub log_likelihood: Vec<f64>,
}

/// Number of sweep blocks per pass; fixed so results do not depend on the
/// worker count.
const SWEEP_BLOCKS: u64 = 32;

/// Global sufficient statistics. `word_topic` is word-major (`w * K + k`).
struct Counts {
    word_topic: Vec<u32>,
    topic: Vec<u32>,
}

struct DocState {
    key: u64,
    words: Vec<WordId>,
    /// Token position -> index into `uniq`.
    slot: Vec<u32>,
    uniq: Vec<WordId>,
    z: Vec<u32>,
    /// Assignments before the latest sweep.
    prev_z: Vec<u32>,
    doc_topic: Vec<u32>,
}

struct Scratch {
    word_delta: Vec<i32>,
    topic_delta: Vec<i32>,
    cumulative: Vec<f64>,
}

impl DocState {
    fn new(id: &str, words: &[WordId], k: usize) -> Self {
        let mut uniq: Vec<WordId> = words.to_vec();
        uniq.sort_unstable();
        uniq.dedup();
        let slot = words
            .iter()
            .map(|w| uniq.binary_search(w).expect("word present") as u32)
            .collect();
        DocState {
            key: rng::doc_key(id),
            words: words.to_vec(),
            slot,
            uniq,
            z: vec![0; words.len()],
            prev_z: Vec::new(),
            doc_topic: vec![0; k],
        }
    }

    fn initialize(&mut self, seed: u64, k: usize) {
        let mut r = rng::stream(seed, self.key, 0);
        self.doc_topic.iter_mut().for_each(|c| *c = 0);
        for z in self.z.iter_mut() {
            *z = r.gen_range(0..k as u32);
            self.doc_topic[*z as usize] += 1;
        }
    }

    fn sample(&mut self, counts: &Counts, beta: &Beta, alpha: f64, seed: u64, pass: u64, scratch: &mut Scratch) {
        let k = self.doc_topic.len();
        let mut r = rng::stream(seed, self.key, pass);
        self.prev_z.clone_from(&self.z);
        scratch.word_delta.clear();
        scratch.word_delta.resize(self.uniq.len() * k, 0);
        scratch.topic_delta.clear();
        scratch.topic_delta.resize(k, 0);
        scratch.cumulative.resize(k, 0.0);

        for i in 0..self.words.len() {
            let w = self.words[i] as usize;
            let s = self.slot[i] as usize;
            let old = self.z[i] as usize;
            self.doc_topic[old] -= 1;
            scratch.word_delta[s * k + old] -= 1;
            scratch.topic_delta[old] -= 1;

            let global = &counts.word_topic[w * k..(w + 1) * k];
            let local = &scratch.word_delta[s * k..(s + 1) * k];
            let mut total = 0.0;
            for t in 0..k {
                let n_wt = (global[t] as i64 + local[t] as i64) as f64;
                let n_t = (counts.topic[t] as i64 + scratch.topic_delta[t] as i64) as f64;
                total += (self.doc_topic[t] as f64 + alpha) * (n_wt + beta.get(t, w)) / (n_t + beta.row_sum(t));
                scratch.cumulative[t] = total;
            }
            let u = r.gen::<f64>() * total;
            let new = scratch.cumulative.iter().position(|&c| c > u).unwrap_or(k - 1);

            self.z[i] = new as u32;
            self.doc_topic[new] += 1;
            scratch.word_delta[s * k + new] += 1;
            scratch.topic_delta[new] += 1;
        }
    }

    fn log_likelihood(&self, alpha: f64) -> f64 {
        let k = self.doc_topic.len() as f64;
        let mut ll = ln_gamma(k * alpha) - ln_gamma(self.words.len() as f64 + k * alpha);
        for &n in &self.doc_topic {
            if n > 0 {
                ll += ln_gamma(n as f64 + alpha) - ln_gamma(alpha);
            }
        }
        ll
    }
}

fn apply_moves(counts: &mut Counts, docs: &[DocState], k: usize) {
    for d in docs {
        for ((&w, &old), &new) in d.words.iter().zip(&d.prev_z).zip(&d.z) {
            if old != new {
                counts.word_topic[w as usize * k + old as usize] -= 1;
                counts.word_topic[w as usize * k + new as usize] += 1;
                counts.topic[old as usize] -= 1;
                counts.topic[new as usize] += 1;
            }
        }
    }
}

fn recount(docs: &[DocState], k: usize, v: usize) -> Counts {
    let mut word_topic = vec![0u32; v * k];
    let mut topic = vec![0u32; k];
    for d in docs {
        for (&w, &z) in d.words.iter().zip(&d.z) {
            word_topic[w as usize * k + z as usize] += 1;
            topic[z as usize] += 1;
        }
    }
    Counts { word_topic, topic }
}

fn word_log_likelihood(counts: &Counts, beta: &Beta, k: usize, v: usize) -> f64 {
    let mut ll = 0.0;
    for t in 0..k {
        ll += ln_gamma(beta.row_sum(t)) - ln_gamma(counts.topic[t] as f64 + beta.row_sum(t));
    }
    for w in 0..v {
        for t in 0..k {
            let n = counts.word_topic[w * k + t];
            if n > 0 {
                let b = beta.get(t, w);
                ll += ln_gamma(n as f64 + b) - ln_gamma(b);
            }
        }
    }
    ll
}

/// Trains LDA on `bow`.
///
/// `topic_prior`, when given, replaces the symmetric `beta` with a per-topic,
/// per-word Dirichlet parameter matrix.
pub fn train_lda(bow: &BowCorpus, config: &LdaConfig, topic_prior: Option<&TopicPrior>) -> Result<LdaModel> {
    config.validate()?;
    let k = config.num_topics;
    let v = bow.vocab.len();
    let n_tokens = bow.num_tokens();
    if bow.is_empty() || n_tokens == 0 {
        return Err(Error::EmptyCorpus);
    }
    if k > n_tokens {
        return Err(Error::Degenerate(format!("{k} topics for {n_tokens} tokens")));
    }
    if bow.docs.iter().flatten().any(|&w| w as usize >= v) {
        return Err(Error::Format("token index outside the vocabulary".into()));
    }
    let beta = match topic_prior {
        None => Beta::Symmetric {
            beta: config.beta,
            row_sum: config.beta * v as f64,
        },
        Some(prior) => {
            if prior.num_topics != k || prior.vocab_size != v {
                return Err(Error::Config(format!(
                    "topic prior is {}x{}, model is {}x{}",
                    prior.num_topics, prior.vocab_size, k, v
                )));
            }
            let row_sums = (0..k).map(|t| prior.values[t * v..(t + 1) * v].iter().sum()).collect();
            Beta::PerWord { prior, row_sums }
        }
    };
    let alpha = config.alpha();
    let seed = config.seed;

    // Documents are grouped into sweep blocks by a hash of their id. Blocks
    // are visited in a fixed order; documents within a block are sampled in
    // parallel against the counts left by earlier blocks.
    let mut order: Vec<usize> = (0..bow.num_docs()).collect();
    let block_of: Vec<u64> = bow.doc_ids.iter().map(|id| rng::mix(seed, rng::doc_key(id), 0) % SWEEP_BLOCKS).collect();
    order.sort_by_key(|&d| block_of[d]);
    let mut bounds = vec![0usize];
    for b in 0..SWEEP_BLOCKS {
        let end = bounds[bounds.len() - 1] + order[bounds[bounds.len() - 1]..].iter().take_while(|&&d| block_of[d] == b).count();
        bounds.push(end);
    }

    let mut docs: Vec<DocState> = order
        .par_iter()
        .map(|&d| {
            let mut state = DocState::new(&bow.doc_ids[d], &bow.docs[d], k);
            state.initialize(seed, k);
            state
        })
        .collect();
    let mut counts = recount(&docs, k, v);

    let burn_in = config.burn_in();
    let mut phi_acc = vec![0.0; k * v];
    let mut theta_acc = vec![0.0; docs.len() * k];
    let mut share_acc = vec![0.0; k];
    let mut log_likelihood = Vec::with_capacity(config.passes);

    for pass in 0..config.passes {
        for block in bounds.windows(2) {
            let members = &mut docs[block[0]..block[1]];
            if members.is_empty() {
                continue;
            }
            let frozen = &counts;
            members.par_iter_mut().for_each_init(
                || Scratch {
                    word_delta: Vec::new(),
                    topic_delta: Vec::new(),
                    cumulative: Vec::new(),
                },
                |scratch, d| d.sample(frozen, &beta, alpha, seed, pass as u64 + 1, scratch),
            );
            apply_moves(&mut counts, members, k);
        }

        let doc_ll: Vec<f64> = docs.par_iter().map(|d| d.log_likelihood(alpha)).collect();
        log_likelihood.push(word_log_likelihood(&counts, &beta, k, v) + doc_ll.iter().sum::<f64>());

        if pass >= burn_in {
            for t in 0..k {
                let denom = counts.topic[t] as f64 + beta.row_sum(t);
                let row = &mut phi_acc[t * v..(t + 1) * v];
                for (w, acc) in row.iter_mut().enumerate() {
                    *acc += (counts.word_topic[w * k + t] as f64 + beta.get(t, w)) / denom;
                }
                share_acc[t] += counts.topic[t] as f64 / n_tokens as f64;
            }
            theta_acc.par_chunks_mut(k).zip(&docs).for_each(|(row, d)| {
                let denom = d.words.len() as f64 + k as f64 * alpha;
                for (acc, &n) in row.iter_mut().zip(&d.doc_topic) {
                    *acc += (n as f64 + alpha) / denom;
                }
            });
        }
    }

    let snapshots = (config.passes - burn_in) as f64;
    for x in phi_acc.iter_mut().chain(theta_acc.iter_mut()).chain(share_acc.iter_mut()) {
        *x /= snapshots;
    }

    let mut theta = vec![0.0; theta_acc.len()];
    for (pos, &d) in order.iter().enumerate() {
        theta[d * k..(d + 1) * k].copy_from_slice(&theta_acc[pos * k..(pos + 1) * k]);
    }

    Ok(LdaModel {
        config: config.clone(),
        vocab: Arc::clone(&bow.vocab),
        phi: phi_acc,
        theta,
        doc_ids: bow.doc_ids.clone(),
        topic_share: share_acc,
        log_likelihood,
    })
}

impl LdaModel {
    pub fn num_topics(&self) -> usize {
        self.config.num_topics
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    pub fn num_docs(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn phi_row(&self, topic: usize) -> &[f64] {
        let v = self.vocab_size();
        &self.phi[topic * v..(topic + 1) * v]
    }

    pub fn theta_row(&self, doc: usize) -> &[f64] {
        let k = self.num_topics();
        &self.theta[doc * k..(doc + 1) * k]
    }

    fn check_topic(&self, topic: usize) -> Result<()> {
        if topic >= self.num_topics() {
            return Err(Error::OutOfRange {
                what: "topic",
                index: topic,
                limit: self.num_topics(),
            });
        }
        Ok(())
    }

    /// Word ids of `topic` by descending probability; ties by word.
    pub fn top_word_ids(&self, topic: usize, n: usize) -> Result<Vec<WordId>> {
        self.check_topic(topic)?;
        let row = self.phi_row(topic);
        let mut ids: Vec<WordId> = (0..row.len() as WordId).collect();
        ids.sort_by(|&a, &b| {
            row[b as usize]
                .partial_cmp(&row[a as usize])
                .unwrap_or(Ordering::Equal)
                .then_with(|| self.vocab.word(a).cmp(self.vocab.word(b)))
        });
        ids.truncate(n);
        Ok(ids)
    }

    pub fn top_words(&self, topic: usize, n: usize) -> Result<Vec<String>> {
        Ok(self
            .top_word_ids(topic, n)?
            .into_iter()
            .map(|w| self.vocab.word(w).to_string())
            .collect())
    }

    /// Topic proportions of an unseen document by Gibbs fold-in with the
    /// topic-word distributions held fixed. Out-of-vocabulary ids are dropped.
    pub fn infer_doc_topics(&self, doc: &[WordId], passes: usize) -> Result<Vec<f64>> {
        let v = self.vocab_size();
        let words: Vec<WordId> = doc.iter().copied().filter(|&w| (w as usize) < v).collect();
        if words.is_empty() {
            return Err(Error::AllOutOfVocabulary);
        }
        let passes = passes.max(1);
        let burn_in = passes / 2;
        let k = self.num_topics();
        let alpha = self.config.alpha();
        let key = rng::stable_hash(&words.iter().flat_map(|w| w.to_le_bytes()).collect::<Vec<u8>>());

        let mut r = rng::stream(self.config.seed, key, 0);
        let mut z: Vec<usize> = words.iter().map(|_| r.gen_range(0..k)).collect();
        let mut counts = vec![0u32; k];
        for &t in &z {
            counts[t] += 1;
        }
        let mut cumulative = vec![0.0; k];
        let mut acc = vec![0.0; k];
        let denom = words.len() as f64 + k as f64 * alpha;
        for pass in 0..passes {
            for (i, &w) in words.iter().enumerate() {
                counts[z[i]] -= 1;
                let mut total = 0.0;
                for t in 0..k {
                    total += (counts[t] as f64 + alpha) * self.phi[t * v + w as usize];
                    cumulative[t] = total;
                }
                let u = r.gen::<f64>() * total;
                let new = cumulative.iter().position(|&c| c > u).unwrap_or(k - 1);
                z[i] = new;
                counts[new] += 1;
            }
            if pass >= burn_in {
                for t in 0..k {
                    acc[t] += (counts[t] as f64 + alpha) / denom;
                }
            }
        }
        let snapshots = (passes - burn_in) as f64;
        acc.iter_mut().for_each(|x| *x /= snapshots);
        Ok(acc)
    }
}

/// Corpus share of each topic for the corpus the model was trained on.
pub fn topic_prevalence(model: &LdaModel, bow: &BowCorpus) -> Result<Vec<f64>> {
    if bow.doc_ids != model.doc_ids {
        return Err(Error::Config("corpus does not match the model's training documents".into()));
    }
    Ok(model.topic_share.clone())
}
