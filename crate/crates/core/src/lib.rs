//! Temporal topic mining for dated question/answer corpora.
//!
//! The pipeline runs ingest ([`corpus`]) → preprocessing ([`textprep`]) →
//! static topics ([`lda`]) or per-period topics ([`dtm`]) → evaluation
//! ([`metrics`]), with keyword expansion from word embeddings ([`embed`]) and
//! descriptive corpus statistics ([`analytics`]) alongside.

pub mod analytics;
pub mod corpus;
pub mod dtm;
pub mod embed;
pub mod error;
pub mod lda;
pub mod metrics;
pub mod model_io;
pub mod rng;
pub mod synthetic;
pub mod textprep;

pub use error::{Error, Result};
