//! Dynamic topic model over ordered time slices.
//!
//! Slice 0 is fit as plain LDA. Every later slice is fit with a per-word
//! Dirichlet prior `beta + kappa * phi[t-1]` built from its predecessor's
//! topic-word distributions, which carries topic `k` forward as topic `k`
//! and lets word probabilities drift smoothly. Larger `kappa` means
//! smoother trajectories; `kappa = 0` gives independent per-slice fits.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, PeriodSlice};
use crate::error::{Error, Result};
use crate::lda::{train_lda, LdaConfig, LdaModel, TopicPrior};
use crate::textprep::{BowCorpus, Vocabulary};

/// Fold-in passes used when ranking documents.
pub const FOLD_IN_PASSES: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DtmConfig {
    pub num_topics: usize,
    /// `kappa`: weight of the previous slice's topics in the next prior.
    pub chain_strength: f64,
    pub lda: LdaConfig,
    /// Centered moving-average width for display output; 1 disables it.
    pub smoothing_window: usize,
}

impl Default for DtmConfig {
    fn default() -> Self {
        DtmConfig {
            num_topics: 20,
            chain_strength: 100.0,
            lda: LdaConfig::with_topics(20),
            smoothing_window: 1,
        }
    }
}

impl DtmConfig {
    pub fn slice_config(&self) -> LdaConfig {
        LdaConfig {
            num_topics: self.num_topics,
            ..self.lda.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.chain_strength >= 0.0 && self.chain_strength.is_finite()) {
            return Err(Error::Config("chain_strength must be a finite value >= 0".into()));
        }
        if self.smoothing_window == 0 || self.smoothing_window.is_multiple_of(2) {
            return Err(Error::Config("smoothing_window must be odd".into()));
        }
        self.slice_config().validate()
    }
}

/// Bag-of-words documents split into ordered periods over one vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct SlicedCorpus {
    pub labels: Vec<String>,
    pub slices: Vec<BowCorpus>,
}

impl SlicedCorpus {
    pub fn new(labels: Vec<String>, slices: Vec<BowCorpus>) -> Result<Self> {
        if labels.len() != slices.len() {
            return Err(Error::Config("one label per slice required".into()));
        }
        if let Some(first) = slices.first() {
            if slices.iter().any(|s| *s.vocab != *first.vocab) {
                return Err(Error::Config("slices must share one vocabulary".into()));
            }
        }
        Ok(SlicedCorpus { labels, slices })
    }

    /// Assigns the documents of `bow` to the periods computed on `corpus`,
    /// matching by document id. Documents dropped during preprocessing are
    /// simply absent.
    pub fn from_periods(bow: &BowCorpus, corpus: &Corpus, periods: &[PeriodSlice]) -> Result<Self> {
        let mut period_of: HashMap<&str, usize> = HashMap::new();
        for (p, slice) in periods.iter().enumerate() {
            for &i in &slice.indices {
                period_of.insert(corpus.documents[i].id.as_str(), p);
            }
        }
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); periods.len()];
        for (d, id) in bow.doc_ids.iter().enumerate() {
            let p = period_of
                .get(id.as_str())
                .ok_or_else(|| Error::Format(format!("document {id} is not in the corpus")))?;
            members[*p].push(d);
        }
        Ok(SlicedCorpus {
            labels: periods.iter().map(|p| p.label.clone()).collect(),
            slices: members.iter().map(|m| bow.subset(m)).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.slices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slices.is_empty()
    }

    pub fn vocab(&self) -> Option<&Arc<Vocabulary>> {
        self.slices.first().map(|s| &s.vocab)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DtmModel {
    pub config: DtmConfig,
    pub slice_labels: Vec<String>,
    pub slices: Vec<LdaModel>,
}

fn carried_forward(model: &LdaModel) -> LdaModel {
    LdaModel {
        config: model.config.clone(),
        vocab: Arc::clone(&model.vocab),
        phi: model.phi.clone(),
        theta: Vec::new(),
        doc_ids: Vec::new(),
        topic_share: model.topic_share.clone(),
        log_likelihood: Vec::new(),
    }
}

fn chained_prior(prev: &LdaModel, beta: f64, kappa: f64) -> Result<TopicPrior> {
    let values = prev.phi.iter().map(|p| beta + kappa * p).collect();
    TopicPrior::new(prev.num_topics(), prev.vocab_size(), values)
}

/// Fits the chained-prior model slice by slice.
///
/// Empty slices copy their predecessor's topics; leading empty slices copy
/// the first fitted slice.
pub fn train_dtm(sliced: &SlicedCorpus, config: &DtmConfig) -> Result<DtmModel> {
    config.validate()?;
    if sliced.slices.iter().all(|s| s.num_tokens() == 0) {
        return Err(Error::EmptyCorpus);
    }
    let lda = config.slice_config();
    let mut fitted: Vec<Option<LdaModel>> = Vec::with_capacity(sliced.len());
    let mut prev: Option<LdaModel> = None;
    for slice in &sliced.slices {
        let model = if slice.num_tokens() == 0 {
            prev.as_ref().map(carried_forward)
        } else {
            let prior = match &prev {
                Some(p) if config.chain_strength > 0.0 => Some(chained_prior(p, lda.beta, config.chain_strength)?),
                _ => None,
            };
            Some(train_lda(slice, &lda, prior.as_ref())?)
        };
        if model.is_some() {
            prev = model.clone();
        }
        fitted.push(model);
    }
    let first = fitted.iter().flatten().next().map(carried_forward).expect("a non-empty slice");
    Ok(DtmModel {
        config: config.clone(),
        slice_labels: sliced.labels.clone(),
        slices: fitted.into_iter().map(|m| m.unwrap_or_else(|| first.clone())).collect(),
    })
}

impl DtmModel {
    pub fn num_topics(&self) -> usize {
        self.config.num_topics
    }

    pub fn num_slices(&self) -> usize {
        self.slices.len()
    }

    pub fn vocab(&self) -> &Arc<Vocabulary> {
        &self.slices[0].vocab
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

    /// Per-slice token share of `topic`.
    pub fn topic_trajectory(&self, topic: usize) -> Result<Vec<f64>> {
        self.check_topic(topic)?;
        Ok(self.slices.iter().map(|m| m.topic_share[topic]).collect())
    }

    /// Raw per-slice `P(word | topic)`.
    pub fn word_trajectory(&self, topic: usize, word: &str) -> Result<Vec<f64>> {
        self.check_topic(topic)?;
        let w = self.vocab().id(word).ok_or_else(|| Error::UnknownWord(word.to_string()))? as usize;
        Ok(self.slices.iter().map(|m| m.phi_row(topic)[w]).collect())
    }

    /// `word_trajectory` passed through the configured display smoothing.
    pub fn display_word_trajectory(&self, topic: usize, word: &str) -> Result<Vec<f64>> {
        Ok(smooth(&self.word_trajectory(topic, word)?, self.config.smoothing_window))
    }

    /// Ranks the documents of slice `slice` by their folded-in proportion of
    /// `topic`. Ties are broken by document id.
    pub fn top_docs(
        &self,
        sliced: &SlicedCorpus,
        topic: usize,
        slice: usize,
        n: usize,
        required_word: Option<&str>,
    ) -> Result<Vec<(String, f64)>> {
        self.check_topic(topic)?;
        if slice >= self.num_slices() || slice >= sliced.len() {
            return Err(Error::OutOfRange {
                what: "slice",
                index: slice,
                limit: self.num_slices().min(sliced.len()),
            });
        }
        let required = match required_word {
            Some(w) => Some(self.vocab().id(w).ok_or_else(|| Error::UnknownWord(w.to_string()))?),
            None => None,
        };
        let docs = &sliced.slices[slice];
        let model = &self.slices[slice];
        let mut ranked = Vec::new();
        for (doc, id) in docs.docs.iter().zip(&docs.doc_ids) {
            if doc.is_empty() || required.is_some_and(|w| !doc.contains(&w)) {
                continue;
            }
            let theta = model.infer_doc_topics(doc, FOLD_IN_PASSES)?;
            ranked.push((id.clone(), theta[topic]));
        }
        ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal).then_with(|| a.0.cmp(&b.0)));
        ranked.truncate(n);
        Ok(ranked)
    }

    /// Shortlists words of `topic` whose probability moves a lot while
    /// staying small, scored by `variance * (1 - mean)` of the trajectory.
    /// A browsing aid only.
    pub fn rare_word_candidates(&self, topic: usize, n: usize) -> Result<Vec<(String, f64)>> {
        self.check_topic(topic)?;
        let t = self.num_slices() as f64;
        let vocab = self.vocab();
        let mut scored: Vec<(String, f64)> = (0..vocab.len())
            .map(|w| {
                let traj: Vec<f64> = self.slices.iter().map(|m| m.phi_row(topic)[w]).collect();
                let mean = traj.iter().sum::<f64>() / t;
                let var = traj.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / t;
                (vocab.words()[w].clone(), var * (1.0 - mean))
            })
            .collect();
        scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal).then_with(|| a.0.cmp(&b.0)));
        scored.truncate(n);
        Ok(scored)
    }

    /// CSV `slice_label,topic,value` for the given topics.
    pub fn write_topic_trajectories<W: Write>(&self, topics: &[usize], out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["slice_label", "topic", "value"])?;
        for &k in topics {
            for (label, v) in self.slice_labels.iter().zip(self.topic_trajectory(k)?) {
                w.write_record([label.as_str(), &k.to_string(), &v.to_string()])?;
            }
        }
        w.flush().map_err(|e| Error::io("<trajectory csv>", e))?;
        Ok(())
    }

    /// CSV `slice_label,topic,word,value` (raw values).
    pub fn write_word_trajectories<W: Write>(&self, topic: usize, words: &[String], out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["slice_label", "topic", "word", "value"])?;
        for word in words {
            for (label, v) in self.slice_labels.iter().zip(self.word_trajectory(topic, word)?) {
                w.write_record([label.as_str(), &topic.to_string(), word.as_str(), &v.to_string()])?;
            }
        }
        w.flush().map_err(|e| Error::io("<trajectory csv>", e))?;
        Ok(())
    }
}

/// Centered moving average; windows are truncated at the ends.
pub fn smooth(values: &[f64], window: usize) -> Vec<f64> {
    if window <= 1 {
        return values.to_vec();
    }
    let half = window / 2;
    (0..values.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(values.len());
            values[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic;

    fn small_sliced(n_slices: usize) -> SlicedCorpus {
        let (slices, _) = synthetic::drift_corpus(2, 15, 40, 30, 0, &vec![0.05; n_slices], 0.5, 3);
        SlicedCorpus::new((0..n_slices).map(|t| format!("{}", 2000 + t)).collect(), slices).unwrap()
    }

    fn quick() -> DtmConfig {
        DtmConfig {
            num_topics: 2,
            lda: LdaConfig {
                passes: 6,
                ..LdaConfig::with_topics(2)
            },
            ..DtmConfig::default()
        }
    }

    #[test]
    fn smoothing() {
        assert_eq!(smooth(&[1.0, 2.0, 3.0], 1), vec![1.0, 2.0, 3.0]);
        assert_eq!(smooth(&[0.0, 3.0, 0.0, 3.0], 3), vec![1.5, 1.0, 2.0, 1.5]);
    }

    #[test]
    fn config_validation() {
        assert!(DtmConfig { chain_strength: -1.0, ..quick() }.validate().is_err());
        assert!(DtmConfig { smoothing_window: 2, ..quick() }.validate().is_err());
        assert!(quick().validate().is_ok());
    }

    #[test]
    fn empty_slices_carry_forward() {
        let mut s = small_sliced(4);
        let vocab = Arc::clone(&s.slices[0].vocab);
        let empty = BowCorpus {
            vocab: Arc::clone(&vocab),
            docs: vec![],
            doc_ids: vec![],
        };
        s.slices[0] = empty.clone();
        s.slices[2] = empty.clone();
        let m = train_dtm(&s, &quick()).unwrap();
        assert_eq!(m.slices[2].phi, m.slices[1].phi);
        assert_eq!(m.slices[0].phi, m.slices[1].phi);
        for k in 0..2 {
            assert_eq!(m.topic_trajectory(k).unwrap().len(), 4);
        }
        let all_empty = SlicedCorpus::new(vec!["a".into()], vec![empty]).unwrap();
        assert!(matches!(train_dtm(&all_empty, &quick()), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn single_slice_equals_plain_lda() {
        let s = small_sliced(1);
        let cfg = quick();
        let m = train_dtm(&s, &cfg).unwrap();
        let direct = train_lda(&s.slices[0], &cfg.slice_config(), None).unwrap();
        assert_eq!(m.slices[0], direct);
    }

    #[test]
    fn zero_chain_strength_is_independent_fits() {
        let s = small_sliced(3);
        let cfg = DtmConfig {
            chain_strength: 0.0,
            ..quick()
        };
        let m = train_dtm(&s, &cfg).unwrap();
        for (t, slice) in s.slices.iter().enumerate() {
            assert_eq!(m.slices[t], train_lda(slice, &cfg.slice_config(), None).unwrap());
        }
    }

    #[test]
    fn trajectories_and_errors() {
        let s = small_sliced(3);
        let m = train_dtm(&s, &quick()).unwrap();
        for t in 0..3 {
            let total: f64 = (0..2).map(|k| m.topic_trajectory(k).unwrap()[t]).sum();
            assert!((total - 1.0).abs() < 1e-9);
        }
        assert!(matches!(m.topic_trajectory(2), Err(Error::OutOfRange { .. })));
        assert!(matches!(m.word_trajectory(0, "nope"), Err(Error::UnknownWord(_))));
        let traj = m.word_trajectory(0, "w0003").unwrap();
        assert!(traj.iter().all(|&p| p > 0.0 && p <= 1.0));
        assert!(matches!(m.top_docs(&s, 0, 3, 5, None), Err(Error::OutOfRange { .. })));
        let cands = m.rare_word_candidates(0, 5).unwrap();
        assert_eq!(cands.len(), 5);
    }

    #[test]
    fn single_topic_trajectory_is_constant() {
        let s = small_sliced(3);
        let cfg = DtmConfig {
            num_topics: 1,
            ..quick()
        };
        let m = train_dtm(&s, &cfg).unwrap();
        for v in m.topic_trajectory(0).unwrap() {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn top_docs_clamp_and_filter() {
        let s = small_sliced(2);
        let m = train_dtm(&s, &quick()).unwrap();
        let all = m.top_docs(&s, 0, 1, 1000, None).unwrap();
        assert_eq!(all.len(), s.slices[1].num_docs());
        for w in all.windows(2) {
            assert!(w[0].1 >= w[1].1);
        }
        let word = "w0020";
        let wid = s.slices[1].vocab.id(word).unwrap();
        let filtered = m.top_docs(&s, 0, 1, 1000, Some(word)).unwrap();
        let lacking: Vec<&String> = s.slices[1]
            .docs
            .iter()
            .zip(&s.slices[1].doc_ids)
            .filter(|(d, _)| !d.contains(&wid))
            .map(|(_, id)| id)
            .collect();
        assert!(!lacking.is_empty());
        assert!(filtered.iter().all(|(id, _)| !lacking.contains(&id)));
        assert!(matches!(m.top_docs(&s, 0, 1, 3, Some("zzz")), Err(Error::UnknownWord(_))));
    }

    #[test]
    fn trajectory_csv() {
        let s = small_sliced(2);
        let m = train_dtm(&s, &quick()).unwrap();
        let mut buf = Vec::new();
        m.write_topic_trajectories(&[0], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("slice_label,topic,value\n2000,0,"));
        assert_eq!(text.lines().count(), 3);
        let mut buf = Vec::new();
        m.write_word_trajectories(1, &["w0001".to_string()], &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("slice_label,topic,word,value\n2000,1,w0001,"));
    }
}
