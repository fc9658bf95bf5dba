//! Seeded generators for corpora with known structure.
//!
//! These sample documents directly from given topic-word and document-topic
//! distributions and share no code with the inference routines, so the
//! generating parameters can serve as ground truth in tests and benchmarks.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use crate::textprep::{BowCorpus, Vocabulary, WordId};

pub fn vocabulary(size: usize) -> Arc<Vocabulary> {
    let words = (0..size).map(|i| format!("w{i:04}")).collect();
    Arc::new(Vocabulary::new(words, vec![1; size], 0))
}

/// `k` topics over disjoint blocks of `words_per_topic` words, with Zipf-like
/// weights inside each block.
pub fn block_topics(k: usize, words_per_topic: usize) -> Vec<Vec<f64>> {
    let v = k * words_per_topic;
    (0..k)
        .map(|t| {
            let mut row = vec![0.0; v];
            let norm: f64 = (0..words_per_topic).map(|r| 1.0 / (r as f64 + 2.0)).sum();
            for r in 0..words_per_topic {
                row[t * words_per_topic + r] = 1.0 / (r as f64 + 2.0) / norm;
            }
            row
        })
        .collect()
}

/// Draw from a symmetric Dirichlet; `concentration = 1` is uniform on the
/// simplex, smaller values favour documents dominated by one topic.
pub fn dirichlet<R: Rng>(k: usize, concentration: f64, rng: &mut R) -> Vec<f64> {
    let gamma = Gamma::new(concentration, 1.0).expect("positive concentration");
    loop {
        let draws: Vec<f64> = (0..k).map(|_| gamma.sample(rng)).collect();
        let total: f64 = draws.iter().sum();
        if total > 0.0 {
            return draws.into_iter().map(|x| x / total).collect();
        }
    }
}

pub fn categorical<R: Rng>(cumulative: &[f64], rng: &mut R) -> usize {
    let u = rng.gen::<f64>() * cumulative[cumulative.len() - 1];
    cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1)
}

fn cumulative(p: &[f64]) -> Vec<f64> {
    p.iter()
        .scan(0.0, |acc, x| {
            *acc += x;
            Some(*acc)
        })
        .collect()
}

/// Samples one document per entry of `thetas` from the mixture `phi`.
pub fn sample_docs(
    phi: &[Vec<f64>],
    thetas: &[Vec<f64>],
    doc_len: usize,
    vocab: Arc<Vocabulary>,
    seed: u64,
    id_prefix: &str,
) -> BowCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let word_cdf: Vec<Vec<f64>> = phi.iter().map(|row| cumulative(row)).collect();
    let docs = thetas
        .iter()
        .map(|theta| {
            let topic_cdf = cumulative(theta);
            (0..doc_len)
                .map(|_| {
                    let t = categorical(&topic_cdf, &mut rng);
                    categorical(&word_cdf[t], &mut rng) as WordId
                })
                .collect()
        })
        .collect();
    BowCorpus {
        vocab,
        doc_ids: (0..thetas.len()).map(|i| format!("{id_prefix}{i:06}")).collect(),
        docs,
    }
}

pub struct Generated {
    pub bow: BowCorpus,
    /// Generating topic-word distributions, one row per topic.
    pub phi: Vec<Vec<f64>>,
    pub thetas: Vec<Vec<f64>>,
}

/// Documents mixing `k` disjoint-vocabulary topics with proportions drawn
/// from a symmetric Dirichlet.
pub fn mixture_corpus(
    k: usize,
    words_per_topic: usize,
    n_docs: usize,
    doc_len: usize,
    concentration: f64,
    seed: u64,
) -> Generated {
    let phi = block_topics(k, words_per_topic);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let thetas: Vec<Vec<f64>> = (0..n_docs).map(|_| dirichlet(k, concentration, &mut rng)).collect();
    let bow = sample_docs(&phi, &thetas, doc_len, vocabulary(k * words_per_topic), seed, "doc");
    Generated { bow, phi, thetas }
}

/// Per-slice corpora over a shared vocabulary where word `drift_word` of
/// topic 0 has probability `ramp[t]` in slice `t`; the rest of topic 0 is
/// rescaled to keep the row normalized. Document proportions are drawn from
/// a symmetric Dirichlet with the given concentration.
#[allow(clippy::too_many_arguments)]
pub fn drift_corpus(
    k: usize,
    words_per_topic: usize,
    docs_per_slice: usize,
    doc_len: usize,
    drift_word: usize,
    ramp: &[f64],
    concentration: f64,
    seed: u64,
) -> (Vec<BowCorpus>, Vec<Vec<Vec<f64>>>) {
    let base = block_topics(k, words_per_topic);
    let vocab = vocabulary(k * words_per_topic);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xd41f7);
    let mut slices = Vec::new();
    let mut truths = Vec::new();
    for (t, &p) in ramp.iter().enumerate() {
        let mut phi = base.clone();
        let rest: f64 = phi[0].iter().enumerate().filter(|(w, _)| *w != drift_word).map(|(_, x)| x).sum();
        for (w, x) in phi[0].iter_mut().enumerate() {
            *x = if w == drift_word { p } else { *x / rest * (1.0 - p) };
        }
        let thetas: Vec<Vec<f64>> = (0..docs_per_slice).map(|_| dirichlet(k, concentration, &mut rng)).collect();
        slices.push(sample_docs(
            &phi,
            &thetas,
            doc_len,
            Arc::clone(&vocab),
            seed.wrapping_add(t as u64 * 7919),
            &format!("s{t}-"),
        ));
        truths.push(phi);
    }
    (slices, truths)
}

/// Sentences over two disjoint word cliques: each sentence draws all of its
/// words uniformly from one clique. Words are named `a00..` and `b00..`.
pub fn clique_sentences(clique_size: usize, sentences: usize, sentence_len: usize, seed: u64) -> Vec<Vec<String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..sentences)
        .map(|_| {
            let prefix = if rng.gen::<bool>() { 'a' } else { 'b' };
            (0..sentence_len)
                .map(|_| format!("{prefix}{:02}", rng.gen_range(0..clique_size)))
                .collect()
        })
        .collect()
}
