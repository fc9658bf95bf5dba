//! Run configuration: one JSON document, overridable key by key with
//! dotted flags such as `--lda.passes 20`.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use tempotopic::corpus::{Granularity, SchemaMap, TermSpan, TermTable};
use tempotopic::dtm::DtmConfig;
use tempotopic::embed::SgConfig;
use tempotopic::lda::LdaConfig;
use tempotopic::metrics::{default_sweep_ks, DEFAULT_TOP_D, DEFAULT_TOP_N};
use tempotopic::textprep::{default_stopwords, load_lemma_file, load_stopword_file, PrepConfig};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TextField {
    Question,
    Answer,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LemmaMode {
    /// Plural stripping checked against the corpus's own vocabulary.
    Builtin,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelChoice {
    Lda,
    Dtm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PrepSettings {
    pub text: TextField,
    /// Restricts every downstream command to one ministry.
    pub ministry: Option<String>,
    pub df_min: f64,
    pub df_max: f64,
    pub min_token_len: usize,
    pub min_doc_len: usize,
    pub stopwords_file: Option<PathBuf>,
    pub lemmas: LemmaMode,
    /// `surface<TAB>lemma` file; takes precedence over `lemmas`.
    pub lemma_file: Option<PathBuf>,
    pub bigram_min_count: u64,
    pub bigram_threshold: f64,
}

impl Default for PrepSettings {
    fn default() -> Self {
        let p = PrepConfig::default();
        PrepSettings {
            text: TextField::Both,
            ministry: None,
            df_min: p.df_min,
            df_max: p.df_max,
            min_token_len: p.min_token_len,
            min_doc_len: p.min_doc_len,
            stopwords_file: None,
            lemmas: LemmaMode::Builtin,
            lemma_file: None,
            bigram_min_count: p.bigram_min_count,
            bigram_threshold: p.bigram_threshold,
        }
    }
}

impl PrepSettings {
    /// The library config, without a lemma table when `lemmas` is builtin
    /// (that table depends on the corpus).
    pub fn to_prep_config(&self) -> Result<PrepConfig, CliError> {
        let stopwords = match &self.stopwords_file {
            Some(p) => load_stopword_file(p)?,
            None => default_stopwords(),
        };
        let lemma_table = match &self.lemma_file {
            Some(p) => Some(load_lemma_file(p)?),
            None => None,
        };
        let cfg = PrepConfig {
            df_min: self.df_min,
            df_max: self.df_max,
            min_token_len: self.min_token_len,
            min_doc_len: self.min_doc_len,
            stopwords,
            lemma_table,
            bigram_min_count: self.bigram_min_count,
            bigram_threshold: self.bigram_threshold,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LdaSettings {
    pub num_topics: usize,
    pub alpha: Option<f64>,
    pub beta: f64,
    pub passes: usize,
    pub burn_in: Option<usize>,
    pub seed: u64,
}

impl Default for LdaSettings {
    fn default() -> Self {
        let c = LdaConfig::default();
        LdaSettings {
            num_topics: c.num_topics,
            alpha: c.alpha,
            beta: c.beta,
            passes: c.passes,
            burn_in: c.burn_in,
            seed: c.seed,
        }
    }
}

impl LdaSettings {
    pub fn to_lda_config(&self) -> LdaConfig {
        LdaConfig {
            num_topics: self.num_topics,
            alpha: self.alpha,
            beta: self.beta,
            passes: self.passes,
            burn_in: self.burn_in,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DtmSettings {
    pub num_topics: usize,
    pub chain_strength: f64,
    pub granularity: Granularity,
    pub smoothing_window: usize,
}

impl Default for DtmSettings {
    fn default() -> Self {
        let c = DtmConfig::default();
        DtmSettings {
            num_topics: c.num_topics,
            chain_strength: c.chain_strength,
            granularity: Granularity::Year,
            smoothing_window: c.smoothing_window,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsSettings {
    pub model: ModelChoice,
    pub top_n: usize,
    pub top_d: usize,
    pub split_seed: u64,
    pub sweep_ks: Vec<usize>,
}

impl Default for MetricsSettings {
    fn default() -> Self {
        MetricsSettings {
            model: ModelChoice::Dtm,
            top_n: DEFAULT_TOP_N,
            top_d: DEFAULT_TOP_D,
            split_seed: 2021,
            sweep_ks: default_sweep_ks(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChartSettings {
    pub width: u32,
    pub height: u32,
    /// Centered moving average applied to plotted trajectories only.
    pub smoothing_window: usize,
}

impl Default for ChartSettings {
    fn default() -> Self {
        ChartSettings {
            width: 800,
            height: 480,
            smoothing_window: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub schema: SchemaMap,
    /// JSON schema mapping; replaces `schema` when set.
    pub schema_file: Option<PathBuf>,
    pub terms: Vec<TermSpan>,
    pub strict: bool,
    pub output_dir: PathBuf,
    pub prep: PrepSettings,
    pub lda: LdaSettings,
    pub dtm: DtmSettings,
    pub sg: SgConfig,
    pub metrics: MetricsSettings,
    pub chart: ChartSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            input: None,
            schema: SchemaMap::default(),
            schema_file: None,
            terms: TermTable::default().entries().to_vec(),
            strict: false,
            output_dir: PathBuf::from("out"),
            prep: PrepSettings::default(),
            lda: LdaSettings::default(),
            dtm: DtmSettings::default(),
            sg: SgConfig::default(),
            metrics: MetricsSettings::default(),
            chart: ChartSettings::default(),
        }
    }
}

impl RunConfig {
    pub fn term_table(&self) -> Result<TermTable, CliError> {
        Ok(TermTable::new(self.terms.clone())?)
    }

    pub fn schema_map(&self) -> Result<SchemaMap, CliError> {
        match &self.schema_file {
            Some(p) => Ok(SchemaMap::from_json_file(p)?),
            None => Ok(self.schema.clone()),
        }
    }

    pub fn dtm_config(&self) -> DtmConfig {
        DtmConfig {
            num_topics: self.dtm.num_topics,
            chain_strength: self.dtm.chain_strength,
            lda: LdaConfig {
                num_topics: self.dtm.num_topics,
                ..self.lda.to_lda_config()
            },
            smoothing_window: self.dtm.smoothing_window,
        }
    }

    /// SHA-256 of the compact JSON form.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }

    fn check_files(&self) -> Result<(), CliError> {
        let files = [
            &self.input,
            &self.schema_file,
            &self.prep.stopwords_file,
            &self.prep.lemma_file,
        ];
        for p in files.into_iter().flatten() {
            if !p.is_file() {
                return Err(CliError::Usage(format!("file not found: {}", p.display())));
            }
        }
        Ok(())
    }
}

/// Dotted paths of every leaf in the default config, with their default
/// values. Arrays and nulls are leaves.
pub fn override_keys() -> Vec<(String, Value)> {
    let mut out = Vec::new();
    let root = serde_json::to_value(RunConfig::default()).expect("config serializes");
    collect_leaves(&root, "", &mut out);
    out
}

fn collect_leaves(v: &Value, prefix: &str, out: &mut Vec<(String, Value)>) {
    match v {
        Value::Object(map) => {
            for (k, child) in map {
                let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                collect_leaves(child, &path, out);
            }
        }
        leaf => out.push((prefix.to_string(), leaf.clone())),
    }
}

/// Interprets a flag value by the type of the key's default.
fn parse_value(key: &str, default: &Value, raw: &str) -> Result<Value, CliError> {
    let bad = || CliError::Usage(format!("invalid value {raw:?} for --{key}"));
    match default {
        Value::String(_) => Ok(Value::String(raw.to_string())),
        Value::Bool(_) => raw.parse::<bool>().map(Value::Bool).map_err(|_| bad()),
        Value::Number(_) => match serde_json::from_str::<Value>(raw) {
            Ok(v @ Value::Number(_)) => Ok(v),
            _ => Err(bad()),
        },
        Value::Array(_) => {
            if let Ok(v @ Value::Array(_)) = serde_json::from_str::<Value>(raw) {
                return Ok(v);
            }
            // comma-separated shorthand for flat lists
            raw.split(',')
                .map(|s| serde_json::from_str::<Value>(s.trim()).map_err(|_| bad()))
                .collect::<Result<Vec<_>, _>>()
                .map(Value::Array)
        }
        _ => match serde_json::from_str::<Value>(raw) {
            Ok(v @ (Value::Number(_) | Value::Bool(_) | Value::Null)) => Ok(v),
            _ => Ok(Value::String(raw.to_string())),
        },
    }
}

fn set_path(root: &mut Value, key: &str, value: Value) {
    let mut node = root;
    let mut parts = key.split('.').peekable();
    while let Some(part) = parts.next() {
        if !node.is_object() {
            *node = Value::Object(Map::new());
        }
        let map = node.as_object_mut().expect("object");
        if parts.peek().is_none() {
            map.insert(part.to_string(), value);
            return;
        }
        node = map.entry(part.to_string()).or_insert_with(|| Value::Object(Map::new()));
    }
}

fn unknown_keys(given: &Value, canonical: &Value, prefix: &str, out: &mut Vec<String>) {
    if let (Value::Object(g), Value::Object(c)) = (given, canonical) {
        for (k, v) in g {
            let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
            match c.get(k) {
                None => out.push(path),
                Some(cv) => unknown_keys(v, cv, &path, out),
            }
        }
    }
}

/// Builds the effective config: the file (if any), then flag overrides.
/// Unknown keys anywhere in the file are rejected.
pub fn load(file: Option<&Path>, overrides: &[(String, String)]) -> Result<RunConfig, CliError> {
    let mut doc = match file {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", p.display())))?;
            serde_json::from_str::<Value>(&text)
                .map_err(|e| CliError::Usage(format!("config {} is not valid JSON: {e}", p.display())))?
        }
        None => Value::Object(Map::new()),
    };
    if !doc.is_object() {
        return Err(CliError::Usage("config must be a JSON object".into()));
    }
    let defaults: std::collections::BTreeMap<String, Value> = override_keys().into_iter().collect();
    for (key, raw) in overrides {
        let default = defaults
            .get(key)
            .ok_or_else(|| CliError::Usage(format!("unknown config key {key}")))?;
        set_path(&mut doc, key, parse_value(key, default, raw)?);
    }
    // checked against the full default tree so that the message carries
    // the dotted path
    let canonical = serde_json::to_value(RunConfig::default()).expect("config serializes");
    let mut unknown = Vec::new();
    unknown_keys(&doc, &canonical, "", &mut unknown);
    if !unknown.is_empty() {
        let unique: BTreeSet<String> = unknown.into_iter().collect();
        return Err(CliError::Usage(format!(
            "unknown config key(s): {}",
            unique.into_iter().collect::<Vec<_>>().join(", ")
        )));
    }
    let config: RunConfig =
        serde_json::from_value(doc).map_err(|e| CliError::Usage(format!("invalid config: {e}")))?;
    config.check_files()?;
    std::fs::create_dir_all(&config.output_dir).map_err(|e| {
        CliError::Usage(format!("output directory {} is not writable: {e}", config.output_dir.display()))
    })?;
    Ok(config)
}
