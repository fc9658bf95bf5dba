use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use clap::ArgMatches;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use tempotopic::analytics::{self, GroupKey};
use tempotopic::corpus::{self, Corpus, Document, Granularity};
use tempotopic::dtm::{smooth, train_dtm, DtmModel, SlicedCorpus};
use tempotopic::embed::{train_skipgram, EmbeddingTable};
use tempotopic::lda::{train_lda, LdaModel};
use tempotopic::metrics::{
    evaluate_topics, slice_averaged_metrics, split_811, sweep_topic_count, write_metrics_csv, MetricsContext,
    SliceAveraged,
};
use tempotopic::textprep::{
    self, generate_lemma_table, match_tokens, normalize, BowCorpus, LemmaTable, PhraseSet, PrepConfig, PrepReport,
};

use crate::artifacts::{FileRecord, Run};
use crate::chart::{render_bar_chart, render_line_chart, ChartOptions, Series};
use crate::config::{LemmaMode, ModelChoice, RunConfig, TextField};
use crate::CliError;

const CORPUS: &str = "corpus.json";
const PREPARED: &str = "prepared.json";
const LDA_MODEL: &str = "lda_model.json";
const DTM_MODEL: &str = "dtm_model.json";
const DTM_SLICES: &str = "dtm_slices.json";
const EMBEDDINGS: &str = "embeddings.txt";

/// Top words per topic written next to trained models.
const TOPIC_WORDS: usize = 10;

pub fn run(name: &str, m: &ArgMatches, config: &RunConfig) -> Result<Vec<FileRecord>, CliError> {
    let mut run = Run::new(name, config);
    match name {
        "ingest" => ingest(&mut run, config)?,
        "prep" => prep(&mut run, config)?,
        "train-lda" => train_lda_cmd(&mut run, config)?,
        "sweep" => sweep(&mut run, config)?,
        "train-dtm" => train_dtm_cmd(&mut run, config)?,
        "metrics" => metrics(&mut run, config)?,
        "embed" => embed(&mut run, config)?,
        "expand" => expand(&mut run, m)?,
        "stats" => stats(&mut run, m, config)?,
        "trajectory" => trajectory(&mut run, m, config)?,
        "topdocs" => topdocs(&mut run, m, config)?,
        other => return Err(CliError::Usage(format!("unknown subcommand {other}"))),
    }
    run.finish()
}

/// The prepared corpus plus the settings later commands need to rebuild
/// matching token streams.
#[derive(Debug, Serialize, Deserialize)]
struct Prepared {
    ministry: Option<String>,
    text: TextField,
    min_token_len: usize,
    stopwords: BTreeSet<String>,
    lemma_table: LemmaTable,
    phrases: PhraseSet,
    report: PrepReport,
    bow: BowCorpus,
}

impl Prepared {
    fn match_config(&self) -> PrepConfig {
        PrepConfig {
            min_token_len: self.min_token_len,
            stopwords: self.stopwords.clone(),
            lemma_table: Some(self.lemma_table.clone()),
            ..PrepConfig::default()
        }
    }

    fn match_tokens(&self, corpus: &Corpus) -> Vec<Vec<String>> {
        let cfg = self.match_config();
        corpus
            .documents
            .par_iter()
            .map(|d| match_tokens(&text_of(d, self.text), &cfg, &self.phrases))
            .collect()
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct SliceLayout {
    granularity: Granularity,
    labels: Vec<String>,
    doc_ids: Vec<Vec<String>>,
}

fn text_of(d: &Document, field: TextField) -> String {
    match field {
        TextField::Question => d.question_text.clone(),
        TextField::Answer => d.answer_text.clone(),
        TextField::Both => format!("{}\n{}", d.question_text, d.answer_text),
    }
}

fn parse_json<T: for<'de> Deserialize<'de>>(bytes: &[u8], name: &str, producer: &str) -> Result<T, CliError> {
    serde_json::from_slice(bytes)
        .map_err(|e| CliError::data(format!("{name} is unreadable ({e}); rerun `tempotopic {producer}`")))
}

fn load_corpus(run: &mut Run, config: &RunConfig) -> Result<Corpus, CliError> {
    let bytes = run.read_upstream(CORPUS, "ingest")?;
    let corpus: Corpus = parse_json(&bytes, CORPUS, "ingest")?;
    Ok(match &config.prep.ministry {
        Some(m) => corpus::filter_by_ministry(&corpus, m),
        None => corpus,
    })
}

fn load_prepared(run: &mut Run) -> Result<Prepared, CliError> {
    let bytes = run.read_upstream(PREPARED, "prep")?;
    parse_json(&bytes, PREPARED, "prep")
}

fn load_dtm(run: &mut Run) -> Result<DtmModel, CliError> {
    let bytes = run.read_upstream(DTM_MODEL, "train-dtm")?;
    Ok(DtmModel::read_json(&bytes[..])?)
}

fn load_sliced(run: &mut Run, prepared: &Prepared, model: &DtmModel) -> Result<SlicedCorpus, CliError> {
    let bytes = run.read_upstream(DTM_SLICES, "train-dtm")?;
    let layout: SliceLayout = parse_json(&bytes, DTM_SLICES, "train-dtm")?;
    if layout.labels != model.slice_labels {
        return Err(CliError::data(format!(
            "{DTM_SLICES} does not match {DTM_MODEL}; rerun `tempotopic train-dtm`"
        )));
    }
    let position: HashMap<&str, usize> =
        prepared.bow.doc_ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
    let mut slices = Vec::new();
    for ids in &layout.doc_ids {
        let idx = ids
            .iter()
            .map(|id| {
                position.get(id.as_str()).copied().ok_or_else(|| {
                    CliError::data(format!("{PREPARED} changed since training; rerun `tempotopic train-dtm`"))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        slices.push(prepared.bow.subset(&idx));
    }
    Ok(SlicedCorpus::new(layout.labels, slices)?)
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::data(e.to_string());
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(&r).map_err(err)?;
    }
    w.into_inner().map_err(|e| CliError::data(e.to_string()))
}

fn chart_options(config: &RunConfig, title: &str, x_label: &str, y_label: &str) -> ChartOptions {
    ChartOptions {
        width: config.chart.width,
        height: config.chart.height,
        title: title.into(),
        x_label: x_label.into(),
        y_label: y_label.into(),
        x_categories: None,
    }
}

fn split_list(raw: Option<&String>) -> Vec<String> {
    raw.map(|s| {
        s.split(',')
            .map(|w| w.trim().to_lowercase())
            .filter(|w| !w.is_empty())
            .collect()
    })
    .unwrap_or_default()
}

fn ingest(run: &mut Run, config: &RunConfig) -> Result<(), CliError> {
    let input = config
        .input
        .as_ref()
        .ok_or_else(|| CliError::Usage("ingest needs --input (or `input` in the config)".into()))?;
    if let Some(p) = &config.schema_file {
        run.read(p)?;
    }
    let schema = config.schema_map()?;
    let terms = config.term_table()?;
    run.read(input)?;
    let corpus = corpus::ingest(input, &schema, &terms, config.strict)?;
    println!(
        "{} documents accepted, {} skipped",
        corpus.provenance.accepted, corpus.provenance.skipped
    );
    run.write_json(CORPUS, &corpus)
}

fn prep(run: &mut Run, config: &RunConfig) -> Result<(), CliError> {
    for p in [&config.prep.stopwords_file, &config.prep.lemma_file].into_iter().flatten() {
        run.read(p)?;
    }
    let corpus = load_corpus(run, config)?;
    if corpus.is_empty() {
        return Err(tempotopic::Error::EmptyCorpus.into());
    }
    let mut prep = config.prep.to_prep_config()?;
    let texts: Vec<String> = corpus.documents.iter().map(|d| text_of(d, config.prep.text)).collect();
    if prep.lemma_table.is_none() && config.prep.lemmas == LemmaMode::Builtin {
        let observed: BTreeSet<String> = texts.par_iter().flat_map_iter(|t| normalize(t, None)).collect();
        prep.lemma_table = Some(generate_lemma_table(observed.iter().map(String::as_str)));
    }
    let ids: Vec<String> = corpus.documents.iter().map(|d| d.id.clone()).collect();
    let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
    let out = textprep::prepare(&ids, &refs, &prep)?;
    println!(
        "{} of {} documents kept, {} words, {} phrases",
        out.bow.num_docs(),
        out.report.input_docs,
        out.report.vocabulary_size,
        out.report.phrases
    );

    let mut vocab_csv = Vec::new();
    out.bow.vocab.write_csv(&mut vocab_csv)?;
    run.write("vocab.csv", &vocab_csv)?;
    run.write_json("prep_report.json", &out.report)?;
    let prepared = Prepared {
        ministry: config.prep.ministry.clone(),
        text: config.prep.text,
        min_token_len: prep.min_token_len,
        stopwords: prep.stopwords,
        lemma_table: prep.lemma_table.unwrap_or_default(),
        phrases: out.phrases,
        report: out.report,
        bow: out.bow,
    };
    run.write_json(PREPARED, &prepared)
}

fn topic_word_rows(label: &str, model: &LdaModel) -> Result<Vec<Vec<String>>, CliError> {
    let mut rows = Vec::new();
    for k in 0..model.num_topics() {
        let phi = model.phi_row(k);
        for (rank, w) in model.top_word_ids(k, TOPIC_WORDS)?.into_iter().enumerate() {
            rows.push(vec![
                label.to_string(),
                k.to_string(),
                (rank + 1).to_string(),
                model.vocab.word(w).to_string(),
                phi[w as usize].to_string(),
            ]);
        }
    }
    Ok(rows)
}

fn train_lda_cmd(run: &mut Run, config: &RunConfig) -> Result<(), CliError> {
    let prepared = load_prepared(run)?;
    let model = train_lda(&prepared.bow, &config.lda.to_lda_config(), None)?;
    let mut bytes = Vec::new();
    model.write_json(&mut bytes)?;
    run.write(LDA_MODEL, &bytes)?;
    let rows = topic_word_rows("all", &model)?;
    run.write("lda_topics.csv", &csv_bytes(&["slice", "topic", "rank", "word", "probability"], rows)?)?;
    let svg = render_line_chart(
        &[Series::new(
            "log-likelihood",
            model.log_likelihood.iter().enumerate().map(|(i, &v)| ((i + 1) as f64, v)).collect(),
        )],
        &chart_options(config, "Training log-likelihood", "pass", "log p(w, z)"),
    )?;
    run.write("lda_loglik.svg", svg.as_bytes())
}

fn sweep(run: &mut Run, config: &RunConfig) -> Result<(), CliError> {
    let prepared = load_prepared(run)?;
    let result = sweep_topic_count(
        &prepared.bow,
        &config.metrics.sweep_ks,
        &config.lda.to_lda_config(),
        config.metrics.top_n,
    )?;
    println!("best k = {}", result.best_k);
    let rows = result.scores.iter().map(|(k, s)| vec![k.to_string(), s.to_string()]);
    run.write("sweep.csv", &csv_bytes(&["k", "npmi"], rows)?)?;
    let svg = render_line_chart(
        &[Series::new("mean NPMI", result.scores.iter().map(|&(k, s)| (k as f64, s)).collect())],
        &chart_options(config, "Coherence by number of topics", "number of topics", "mean NPMI"),
    )?;
    run.write("sweep.svg", svg.as_bytes())
}

fn train_dtm_cmd(run: &mut Run, config: &RunConfig) -> Result<(), CliError> {
    let corpus = load_corpus(run, config)?;
    let prepared = load_prepared(run)?;
    let periods = corpus::slice_by_period(&corpus, config.dtm.granularity, &config.term_table()?)?;
    let sliced = SlicedCorpus::from_periods(&prepared.bow, &corpus, &periods)?;
    let model = train_dtm(&sliced, &config.dtm_config())?;
    let mut bytes = Vec::new();
    model.write_json(&mut bytes)?;
    run.write(DTM_MODEL, &bytes)?;
    let layout = SliceLayout {
        granularity: config.dtm.granularity,
        labels: sliced.labels.clone(),
        doc_ids: sliced.slices.iter().map(|s| s.doc_ids.clone()).collect(),
    };
    run.write_json(DTM_SLICES, &layout)?;
    let mut rows = Vec::new();
    for (label, m) in model.slice_labels.iter().zip(&model.slices) {
        rows.extend(topic_word_rows(label, m)?);
    }
    run.write("dtm_topics.csv", &csv_bytes(&["slice", "topic", "rank", "word", "probability"], rows)?)
}

fn metrics(run: &mut Run, config: &RunConfig) -> Result<(), CliError> {
    let ms = &config.metrics;
    let prepared = load_prepared(run)?;
    let report = match ms.model {
        ModelChoice::Dtm => {
            let model = load_dtm(run)?;
            let sliced = load_sliced(run, &prepared, &model)?;
            slice_averaged_metrics(&model, &sliced, ms.split_seed, ms.top_n, ms.top_d, "dtm")?
        }
        ModelChoice::Lda => {
            let bytes = run.read_upstream(LDA_MODEL, "train-lda")?;
            let model = LdaModel::read_json(&bytes[..])?;
            let split = split_811(prepared.bow.num_docs(), ms.split_seed);
            if split.test.is_empty() {
                return Err(tempotopic::Error::Degenerate("test split is empty".into()).into());
            }
            let topics = (0..model.num_topics())
                .map(|k| model.top_words(k, ms.top_n.max(ms.top_d)))
                .collect::<tempotopic::Result<Vec<_>>>()?;
            let context = MetricsContext {
                corpus_id: "test".into(),
                model_id: "lda".into(),
                top_n: ms.top_n,
                top_d: ms.top_d,
            };
            let average = evaluate_topics(&topics, &prepared.bow.subset(&split.test), context)?;
            SliceAveraged {
                per_slice: Vec::new(),
                average,
            }
        }
    };
    let model = match ms.model {
        ModelChoice::Dtm => "dtm",
        ModelChoice::Lda => "lda",
    };
    let a = &report.average;
    println!("NPMI {:.4}  diversity {:.4}  quality {:.4}", a.mean_npmi, a.diversity, a.quality);

    let mut bytes = Vec::new();
    write_metrics_csv(&report, &mut bytes)?;
    run.write(&format!("metrics_{model}.csv"), &bytes)?;
    run.write_json(&format!("metrics_{model}.json"), &report)?;
    let svg = if report.per_slice.is_empty() {
        let bars: Vec<(String, f64)> =
            a.per_topic_npmi.iter().enumerate().map(|(k, &v)| (format!("topic {k}"), v)).collect();
        render_bar_chart(&bars, &chart_options(config, "Per-topic NPMI", "topic", "NPMI"))?
    } else {
        let labels: Vec<String> = report.per_slice.iter().map(|(l, _)| l.clone()).collect();
        let pick = |f: fn(&tempotopic::metrics::MetricsReport) -> f64| {
            report.per_slice.iter().map(|(_, r)| f(r)).collect::<Vec<_>>()
        };
        let series = [
            Series::indexed("NPMI", &pick(|r| r.mean_npmi)),
            Series::indexed("diversity", &pick(|r| r.diversity)),
            Series::indexed("quality", &pick(|r| r.quality)),
        ];
        let opts = ChartOptions {
            x_categories: Some(labels),
            ..chart_options(config, "Topic metrics per slice", "slice", "score")
        };
        render_line_chart(&series, &opts)?
    };
    run.write(&format!("metrics_{model}.svg"), svg.as_bytes())
}

fn embed(run: &mut Run, config: &RunConfig) -> Result<(), CliError> {
    let corpus = load_corpus(run, config)?;
    let prepared = load_prepared(run)?;
    let tokens = prepared.match_tokens(&corpus);
    let ids: Vec<String> = corpus.documents.iter().map(|d| d.id.clone()).collect();
    let table = train_skipgram(&tokens, &ids, &config.sg)?;
    println!("{} words, {} dimensions", table.len(), table.dim());
    let mut bytes = Vec::new();
    table.write_text(&mut bytes)?;
    run.write(EMBEDDINGS, &bytes)
}

fn expand(run: &mut Run, m: &ArgMatches) -> Result<(), CliError> {
    let bytes = run.read_upstream(EMBEDDINGS, "embed")?;
    let table = EmbeddingTable::read_text(&bytes[..])?;
    let seeds = split_list(m.get_one::<String>("seeds"));
    if seeds.is_empty() {
        return Err(CliError::Usage("--seeds is empty".into()));
    }
    let exclude: BTreeSet<String> = split_list(m.get_one::<String>("exclude")).into_iter().collect();
    let k = *m.get_one::<usize>("k").expect("defaulted");
    let words = table.expand_keywords(&seeds, k, &exclude)?;
    let mut text = String::new();
    for w in &words {
        println!("{w}");
        text.push_str(w);
        text.push('\n');
    }
    run.write("expanded.txt", text.as_bytes())
}

fn read_keywords(run: &mut Run, m: &ArgMatches) -> Result<BTreeSet<String>, CliError> {
    let mut words: BTreeSet<String> = split_list(m.get_one::<String>("keywords")).into_iter().collect();
    if let Some(p) = m.get_one::<String>("keywords-file") {
        let bytes = run.read(Path::new(p))?;
        let text = String::from_utf8_lossy(&bytes);
        words.extend(
            text.lines()
                .map(|l| l.trim().to_lowercase())
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        );
    }
    if words.is_empty() {
        return Err(CliError::Usage("themes need --keywords or --keywords-file".into()));
    }
    Ok(words)
}

fn group_key(m: &ArgMatches, default: &str, allowed: &[&str]) -> Result<(GroupKey, String), CliError> {
    let by = m.get_one::<String>("by").map(String::as_str).unwrap_or(default);
    if !allowed.contains(&by) {
        return Err(CliError::Usage(format!("--by {by} is not valid here; use one of {}", allowed.join(", "))));
    }
    Ok((GroupKey::parse(by).expect("value checked by clap"), by.to_string()))
}

fn table_rows(t: &analytics::DistributionTable) -> Result<Vec<u8>, CliError> {
    let mut bytes = Vec::new();
    t.write_csv(&mut bytes)?;
    Ok(bytes)
}

fn stats(run: &mut Run, m: &ArgMatches, config: &RunConfig) -> Result<(), CliError> {
    let kind = m.get_one::<String>("kind").expect("required").as_str();
    let corpus = load_corpus(run, config)?;
    if corpus.is_empty() {
        return Err(tempotopic::Error::EmptyCorpus.into());
    }
    let bar = |t: &analytics::DistributionTable, title: &str, x: &str| {
        let bars: Vec<(String, f64)> = t.rows.iter().map(|r| (r.group.clone(), r.count as f64)).collect();
        render_bar_chart(&bars, &chart_options(config, title, x, "questions"))
    };
    match kind {
        "distribution" => {
            let (key, by) = group_key(m, "ministry", &["ministry", "term", "year", "gender", "category"])?;
            let t = analytics::group_distribution(&corpus, key, m.get_one::<usize>("top").copied())?;
            run.write(&format!("stats_distribution_{by}.csv"), &table_rows(&t)?)?;
            let svg = bar(&t, &format!("Questions by {by}"), &by)?;
            run.write(&format!("stats_distribution_{by}.svg"), svg.as_bytes())
        }
        "shares" => {
            let (key, by) = group_key(m, "gender", &["gender", "category"])?;
            let t = analytics::participation_shares(&corpus, key)?;
            run.write(&format!("stats_shares_{by}.csv"), &table_rows(&t)?)?;
            let svg = bar(&t, &format!("Questions by member {by}"), &by)?;
            run.write(&format!("stats_shares_{by}.svg"), svg.as_bytes())
        }
        "participation" => {
            let path = m
                .get_one::<String>("seats")
                .ok_or_else(|| CliError::Usage("participation needs --seats FILE".into()))?;
            let seats = analytics::read_seats(&run.read(Path::new(path))?[..])?;
            let rows = analytics::participation_by_term(&corpus, &seats)?;
            if rows.is_empty() {
                return Err(CliError::data(format!("{path} lists no terms")));
            }
            let csv = csv_bytes(
                &[
                    "term",
                    "ruling_seats",
                    "opposition_seats",
                    "ruling_questions",
                    "opposition_questions",
                    "ruling_normalized",
                    "opposition_normalized",
                ],
                rows.iter().map(|r| {
                    vec![
                        r.term.to_string(),
                        r.input.ruling_seats.to_string(),
                        r.input.opposition_seats.to_string(),
                        r.input.ruling_questions.to_string(),
                        r.input.opposition_questions.to_string(),
                        r.ruling.to_string(),
                        r.opposition.to_string(),
                    ]
                }),
            )?;
            run.write("stats_participation.csv", &csv)?;
            let ruling: Vec<f64> = rows.iter().map(|r| r.ruling).collect();
            let opposition: Vec<f64> = rows.iter().map(|r| r.opposition).collect();
            let opts = ChartOptions {
                x_categories: Some(rows.iter().map(|r| r.term.to_string()).collect()),
                ..chart_options(config, "Normalized participation", "term", "normalized questions")
            };
            let svg = render_line_chart(
                &[Series::indexed("ruling", &ruling), Series::indexed("opposition", &opposition)],
                &opts,
            )?;
            run.write("stats_participation.svg", svg.as_bytes())
        }
        "themes" => {
            let (key, by) = group_key(m, "year", &["term", "year"])?;
            let keywords = read_keywords(run, m)?;
            let prepared = load_prepared(run)?;
            let tokens = prepared.match_tokens(&corpus);
            let t = analytics::keyword_theme_counts(&corpus, &tokens, &keywords, key)?;
            run.write(&format!("stats_themes_{by}.csv"), &table_rows(&t)?)?;
            let counts: Vec<f64> = t.rows.iter().map(|r| r.count as f64).collect();
            let opts = ChartOptions {
                x_categories: Some(t.rows.iter().map(|r| r.group.clone()).collect()),
                ..chart_options(config, "Questions matching the theme", &by, "questions")
            };
            let svg = render_line_chart(&[Series::indexed("matched", &counts)], &opts)?;
            run.write(&format!("stats_themes_{by}.svg"), svg.as_bytes())
        }
        "sittings" => {
            let path = m
                .get_one::<String>("sittings")
                .ok_or_else(|| CliError::Usage("sittings needs --sittings FILE".into()))?;
            let sittings = analytics::read_sittings(&run.read(Path::new(path))?[..])?;
            let rows = analytics::join_sittings(&corpus, &sittings);
            let per_sitting = |r: &analytics::SittingsRow| match r.sittings {
                Some(s) if s > 0 => Some(r.questions as f64 / f64::from(s)),
                _ => None,
            };
            let csv = csv_bytes(
                &["year", "questions", "sittings", "questions_per_sitting"],
                rows.iter().map(|r| {
                    vec![
                        r.year.to_string(),
                        r.questions.to_string(),
                        r.sittings.map(|s| s.to_string()).unwrap_or_default(),
                        per_sitting(r).map(|v| v.to_string()).unwrap_or_default(),
                    ]
                }),
            )?;
            run.write("stats_sittings.csv", &csv)?;
            let points: Vec<(f64, f64)> =
                rows.iter().filter_map(|r| per_sitting(r).map(|v| (f64::from(r.year), v))).collect();
            if points.is_empty() {
                return Err(CliError::data(format!("{path} has no sittings for the corpus years")));
            }
            let svg = render_line_chart(
                &[Series::new("questions per sitting", points)],
                &chart_options(config, "Questions per sitting", "year", "questions per sitting"),
            )?;
            run.write("stats_sittings.svg", svg.as_bytes())
        }
        other => Err(CliError::Usage(format!("unknown stats kind {other}"))),
    }
}

fn usize_list(raw: Option<&String>, flag: &str) -> Result<Option<Vec<usize>>, CliError> {
    raw.map(|s| {
        s.split(',')
            .map(|x| {
                x.trim()
                    .parse::<usize>()
                    .map_err(|_| CliError::Usage(format!("--{flag}: {x:?} is not a topic index")))
            })
            .collect()
    })
    .transpose()
}

fn trajectory(run: &mut Run, m: &ArgMatches, config: &RunConfig) -> Result<(), CliError> {
    let model = load_dtm(run)?;
    let k = model.num_topics();
    let topics = usize_list(m.get_one::<String>("topics"), "topics")?.unwrap_or_else(|| (0..k.min(5)).collect());
    if let Some(&bad) = topics.iter().find(|&&t| t >= k) {
        return Err(CliError::Usage(format!("topic {bad} out of range; the model has {k} topics")));
    }
    if topics.is_empty() {
        return Err(CliError::Usage("--topics is empty".into()));
    }
    let window = if config.chart.smoothing_window > 1 {
        config.chart.smoothing_window
    } else {
        model.config.smoothing_window
    };
    if window % 2 == 0 {
        return Err(CliError::Usage("chart.smoothing_window must be odd".into()));
    }
    let categories = Some(model.slice_labels.clone());

    let mut bytes = Vec::new();
    model.write_topic_trajectories(&topics, &mut bytes)?;
    run.write("trajectory_topics.csv", &bytes)?;
    let series = topics
        .iter()
        .map(|&t| Ok(Series::indexed(format!("topic {t}"), &smooth(&model.topic_trajectory(t)?, window))))
        .collect::<Result<Vec<_>, CliError>>()?;
    let opts = ChartOptions {
        x_categories: categories.clone(),
        ..chart_options(config, "Topic prevalence over time", "slice", "share of tokens")
    };
    run.write("trajectory_topics.svg", render_line_chart(&series, &opts)?.as_bytes())?;

    let topic = m.get_one::<usize>("topic").copied();
    let words = split_list(m.get_one::<String>("words"));
    let candidates = m.get_one::<usize>("candidates").copied();
    if topic.is_none() && (!words.is_empty() || candidates.is_some()) {
        return Err(CliError::Usage("--words and --candidates need --topic".into()));
    }
    let Some(topic) = topic else { return Ok(()) };
    if topic >= k {
        return Err(CliError::Usage(format!("topic {topic} out of range; the model has {k} topics")));
    }
    if !words.is_empty() {
        let mut bytes = Vec::new();
        model.write_word_trajectories(topic, &words, &mut bytes)?;
        run.write(&format!("trajectory_words_t{topic}.csv"), &bytes)?;
        let series = words
            .iter()
            .map(|w| Ok(Series::indexed(w.clone(), &smooth(&model.word_trajectory(topic, w)?, window))))
            .collect::<Result<Vec<_>, CliError>>()?;
        let opts = ChartOptions {
            x_categories: categories,
            ..chart_options(config, &format!("Word probabilities in topic {topic}"), "slice", "probability")
        };
        run.write(&format!("trajectory_words_t{topic}.svg"), render_line_chart(&series, &opts)?.as_bytes())?;
    }
    if let Some(n) = candidates {
        let rows = model
            .rare_word_candidates(topic, n)?
            .into_iter()
            .map(|(w, s)| vec![w, s.to_string()]);
        run.write(&format!("candidates_t{topic}.csv"), &csv_bytes(&["word", "score"], rows)?)?;
    }
    Ok(())
}

fn topdocs(run: &mut Run, m: &ArgMatches, config: &RunConfig) -> Result<(), CliError> {
    let topic = *m.get_one::<usize>("topic").expect("required");
    let label = m.get_one::<String>("slice").expect("required");
    let n = *m.get_one::<usize>("n").expect("defaulted");
    let word = m.get_one::<String>("word").map(|w| w.trim().to_lowercase());

    let model = load_dtm(run)?;
    let prepared = load_prepared(run)?;
    let sliced = load_sliced(run, &prepared, &model)?;
    let corpus = load_corpus(run, config)?;
    let slice = model.slice_labels.iter().position(|l| l == label).ok_or_else(|| {
        CliError::Usage(format!("no slice {label:?}; slices are {}", model.slice_labels.join(", ")))
    })?;
    let ranked = model.top_docs(&sliced, topic, slice, n, word.as_deref())?;
    let docs: HashMap<&str, &Document> = corpus.documents.iter().map(|d| (d.id.as_str(), d)).collect();
    let rows: Vec<Vec<String>> = ranked
        .iter()
        .enumerate()
        .map(|(i, (id, score))| {
            let d = docs.get(id.as_str());
            vec![
                (i + 1).to_string(),
                id.clone(),
                score.to_string(),
                d.map(|d| d.date.to_string()).unwrap_or_default(),
                d.map(|d| d.ministry.clone()).unwrap_or_default(),
                d.map(|d| d.question_text.clone()).unwrap_or_default(),
            ]
        })
        .collect();
    for (i, (id, score)) in ranked.iter().enumerate() {
        println!("{:>3}  {id}  {score:.4}", i + 1);
    }
    let name = match &word {
        Some(w) => format!("topdocs_t{topic}_{label}_{w}.csv"),
        None => format!("topdocs_t{topic}_{label}.csv"),
    };
    run.write(&name, &csv_bytes(&["rank", "id", "score", "date", "ministry", "question_text"], rows)?)
}
