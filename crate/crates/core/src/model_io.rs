//! JSON container shared by static and dynamic topic models.
//!
//! A file holds the vocabulary once plus one entry per slice; a static model
//! is a single slice. The vocabulary hash is checked on load.

use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dtm::{DtmConfig, DtmModel};
use crate::error::{Error, Result};
use crate::lda::{LdaConfig, LdaModel};
use crate::textprep::Vocabulary;

pub const FORMAT: &str = "tempotopic-model";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Lda,
    Dtm,
}

#[derive(Serialize, Deserialize)]
struct SliceEntry {
    label: String,
    config: LdaConfig,
    phi: Vec<f64>,
    theta: Vec<f64>,
    doc_ids: Vec<String>,
    topic_share: Vec<f64>,
    log_likelihood: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct Container {
    format: String,
    version: u32,
    kind: ModelKind,
    vocab_hash: String,
    vocab: Vocabulary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dtm: Option<DtmConfig>,
    slices: Vec<SliceEntry>,
}

fn entry(label: &str, m: &LdaModel) -> SliceEntry {
    SliceEntry {
        label: label.to_string(),
        config: m.config.clone(),
        phi: m.phi.clone(),
        theta: m.theta.clone(),
        doc_ids: m.doc_ids.clone(),
        topic_share: m.topic_share.clone(),
        log_likelihood: m.log_likelihood.clone(),
    }
}

fn model(vocab: &Arc<Vocabulary>, e: SliceEntry) -> Result<LdaModel> {
    let k = e.config.num_topics;
    if e.phi.len() != k * vocab.len() || e.topic_share.len() != k || e.theta.len() != k * e.doc_ids.len() {
        return Err(Error::Format(format!("slice {:?} has inconsistent dimensions", e.label)));
    }
    Ok(LdaModel {
        config: e.config,
        vocab: Arc::clone(vocab),
        phi: e.phi,
        theta: e.theta,
        doc_ids: e.doc_ids,
        topic_share: e.topic_share,
        log_likelihood: e.log_likelihood,
    })
}

fn write_container<W: Write>(c: &Container, out: W) -> Result<()> {
    serde_json::to_writer(out, c)?;
    Ok(())
}

fn read_container<R: Read>(input: R) -> Result<(Container, Arc<Vocabulary>)> {
    let mut c: Container = serde_json::from_reader(input)?;
    if c.format != FORMAT {
        return Err(Error::Format(format!("not a model file (format {:?})", c.format)));
    }
    if c.version != VERSION {
        return Err(Error::Format(format!("unsupported model version {}", c.version)));
    }
    let vocab = std::mem::replace(&mut c.vocab, Vocabulary::new(Vec::new(), Vec::new(), 0));
    if vocab.content_hash() != c.vocab_hash {
        return Err(Error::Format("vocabulary hash mismatch".into()));
    }
    Ok((c, Arc::new(vocab)))
}

impl LdaModel {
    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        write_container(
            &Container {
                format: FORMAT.into(),
                version: VERSION,
                kind: ModelKind::Lda,
                vocab_hash: self.vocab.content_hash(),
                vocab: (*self.vocab).clone(),
                dtm: None,
                slices: vec![entry("all", self)],
            },
            out,
        )
    }

    pub fn read_json<R: Read>(input: R) -> Result<Self> {
        let (mut c, vocab) = read_container(input)?;
        if c.kind != ModelKind::Lda || c.slices.len() != 1 {
            return Err(Error::Format("expected a static topic model".into()));
        }
        model(&vocab, c.slices.remove(0))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_json(std::io::BufWriter::new(f))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_json(std::io::BufReader::new(f))
    }
}

impl DtmModel {
    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        let vocab = self.vocab();
        write_container(
            &Container {
                format: FORMAT.into(),
                version: VERSION,
                kind: ModelKind::Dtm,
                vocab_hash: vocab.content_hash(),
                vocab: (**vocab).clone(),
                dtm: Some(self.config.clone()),
                slices: self.slice_labels.iter().zip(&self.slices).map(|(l, m)| entry(l, m)).collect(),
            },
            out,
        )
    }

    pub fn read_json<R: Read>(input: R) -> Result<Self> {
        let (c, vocab) = read_container(input)?;
        let config = match (c.kind, c.dtm) {
            (ModelKind::Dtm, Some(cfg)) => cfg,
            _ => return Err(Error::Format("expected a dynamic topic model".into())),
        };
        if c.slices.is_empty() {
            return Err(Error::Format("model has no slices".into()));
        }
        let slice_labels = c.slices.iter().map(|e| e.label.clone()).collect();
        let slices = c.slices.into_iter().map(|e| model(&vocab, e)).collect::<Result<_>>()?;
        Ok(DtmModel {
            config,
            slice_labels,
            slices,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_json(std::io::BufWriter::new(f))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_json(std::io::BufReader::new(f))
    }
}

/// Reads the kind tag of a model file without validating the rest.
pub fn peek_kind<R: Read>(input: R) -> Result<ModelKind> {
    #[derive(Deserialize)]
    struct Head {
        format: String,
        kind: ModelKind,
    }
    let h: Head = serde_json::from_reader(input)?;
    if h.format != FORMAT {
        return Err(Error::Format(format!("not a model file (format {:?})", h.format)));
    }
    Ok(h.kind)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dtm::{train_dtm, SlicedCorpus};
    use crate::synthetic;

    #[test]
    fn dtm_roundtrip_and_kind_checks() {
        let (slices, _) = synthetic::drift_corpus(2, 10, 10, 15, 0, &[0.1, 0.2], 0.5, 1);
        let sliced = SlicedCorpus::new(vec!["a".into(), "b".into()], slices).unwrap();
        let cfg = DtmConfig {
            num_topics: 2,
            lda: LdaConfig {
                passes: 3,
                ..LdaConfig::with_topics(2)
            },
            ..DtmConfig::default()
        };
        let m = train_dtm(&sliced, &cfg).unwrap();
        let mut buf = Vec::new();
        m.write_json(&mut buf).unwrap();
        assert_eq!(peek_kind(&buf[..]).unwrap(), ModelKind::Dtm);
        assert_eq!(DtmModel::read_json(&buf[..]).unwrap(), m);
        assert!(matches!(LdaModel::read_json(&buf[..]), Err(Error::Format(_))));

        let text = String::from_utf8(buf).unwrap().replacen("\"w0000\"", "\"x0000\"", 1);
        assert!(matches!(DtmModel::read_json(text.as_bytes()), Err(Error::Format(_))));
    }
}
