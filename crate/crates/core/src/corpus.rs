//! Dated question/answer records: ingest, term assignment, and partitioning.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gender {
    Male,
    Female,
    Other,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    General,
    ScheduledCaste,
    ScheduledTribe,
    Obc,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alliance {
    Ruling,
    Opposition,
    Unknown,
}

fn fold_label(raw: &str) -> String {
    raw.trim()
        .to_lowercase()
        .chars()
        .map(|c| if c == '-' || c == ' ' { '_' } else { c })
        .collect()
}

impl Gender {
    pub fn parse(raw: &str) -> Self {
        match fold_label(raw).as_str() {
            "male" | "m" | "man" => Gender::Male,
            "female" | "f" | "woman" => Gender::Female,
            "other" | "o" | "third_gender" | "transgender" => Gender::Other,
            _ => Gender::Unknown,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Gender::Male => "male",
            Gender::Female => "female",
            Gender::Other => "other",
            Gender::Unknown => "unknown",
        }
    }
}

impl Category {
    pub fn parse(raw: &str) -> Self {
        match fold_label(raw).as_str() {
            "general" | "gen" => Category::General,
            "sc" | "scheduled_caste" => Category::ScheduledCaste,
            "st" | "scheduled_tribe" => Category::ScheduledTribe,
            "obc" | "other_backward_class" | "other_backward_classes" => Category::Obc,
            _ => Category::Unknown,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Category::General => "general",
            Category::ScheduledCaste => "scheduled_caste",
            Category::ScheduledTribe => "scheduled_tribe",
            Category::Obc => "obc",
            Category::Unknown => "unknown",
        }
    }
}

impl Alliance {
    pub fn parse(raw: &str) -> Self {
        match fold_label(raw).as_str() {
            "ruling" | "ruling_alliance" | "government" | "treasury" => Alliance::Ruling,
            "opposition" => Alliance::Opposition,
            _ => Alliance::Unknown,
        }
    }
}

/// One question/answer pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub date: NaiveDate,
    pub ministry: String,
    pub question_text: String,
    pub answer_text: String,
    pub member_name: String,
    pub member_gender: Gender,
    pub member_category: Category,
    pub member_alliance: Alliance,
    /// Lok Sabha term, `None` when the date falls outside the term table.
    pub term: Option<u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Provenance {
    pub source: String,
    /// Kept in memory only; excluded from equality and from serialized
    /// artifacts so that re-ingesting a file reproduces identical bytes.
    #[serde(skip)]
    pub ingested_at: Option<String>,
    pub accepted: usize,
    pub skipped: usize,
}

impl PartialEq for Provenance {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source
            && self.accepted == other.accepted
            && self.skipped == other.skipped
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub documents: Vec<Document>,
    pub provenance: Provenance,
}

impl Corpus {
    /// Builds a corpus from already-validated documents, sorting by date.
    pub fn from_documents(source: impl Into<String>, mut documents: Vec<Document>) -> Self {
        documents.sort_by_key(|d| d.date);
        let accepted = documents.len();
        Corpus {
            documents,
            provenance: Provenance {
                source: source.into(),
                ingested_at: None,
                accepted,
                skipped: 0,
            },
        }
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermSpan {
    pub term: u32,
    pub start_year: i32,
    pub end_year: i32,
}

/// Maps dates onto Lok Sabha terms.
///
/// Each term starts on January 1 of its start year and runs until the next
/// term starts; the last term runs through December 31 of its end year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermTable {
    entries: Vec<TermSpan>,
}

impl Default for TermTable {
    fn default() -> Self {
        TermTable {
            entries: vec![
                TermSpan { term: 13, start_year: 1999, end_year: 2004 },
                TermSpan { term: 14, start_year: 2004, end_year: 2009 },
                TermSpan { term: 15, start_year: 2009, end_year: 2014 },
                TermSpan { term: 16, start_year: 2014, end_year: 2019 },
            ],
        }
    }
}

impl TermTable {
    pub fn new(entries: Vec<TermSpan>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Config("term table is empty".into()));
        }
        for e in &entries {
            if e.end_year < e.start_year {
                return Err(Error::Config(format!("term {} ends before it starts", e.term)));
            }
        }
        for pair in entries.windows(2) {
            if pair[1].start_year < pair[0].end_year || pair[1].start_year <= pair[0].start_year {
                return Err(Error::Config(format!(
                    "terms {} and {} overlap or are out of order",
                    pair[0].term, pair[1].term
                )));
            }
        }
        Ok(TermTable { entries })
    }

    pub fn entries(&self) -> &[TermSpan] {
        &self.entries
    }

    pub fn term_of(&self, date: NaiveDate) -> Option<u32> {
        let year = date.year();
        for (i, e) in self.entries.iter().enumerate() {
            let end_exclusive = match self.entries.get(i + 1) {
                Some(next) => next.start_year,
                None => e.end_year + 1,
            };
            if year >= e.start_year && year < end_exclusive {
                return Some(e.term);
            }
        }
        None
    }

    pub fn year_span(&self) -> (i32, i32) {
        (self.entries[0].start_year, self.entries[self.entries.len() - 1].end_year)
    }
}

/// Binds source column names to document fields.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SchemaMap {
    pub id: String,
    pub date: String,
    pub ministry: String,
    pub question_text: String,
    pub answer_text: String,
    pub member_name: String,
    pub member_gender: String,
    pub member_category: String,
    pub member_alliance: String,
}

impl Default for SchemaMap {
    fn default() -> Self {
        SchemaMap {
            id: "id".into(),
            date: "date".into(),
            ministry: "ministry".into(),
            question_text: "question_text".into(),
            answer_text: "answer_text".into(),
            member_name: "member_name".into(),
            member_gender: "member_gender".into(),
            member_category: "member_category".into(),
            member_alliance: "member_alliance".into(),
        }
    }
}

impl SchemaMap {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    fn mandatory(&self) -> [&str; 4] {
        [&self.id, &self.date, &self.ministry, &self.question_text]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    JsonLines,
    Csv,
}

impl InputFormat {
    fn detect(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase) {
            Some(ext) if ext == "jsonl" || ext == "ndjson" || ext == "json" => {
                return Ok(InputFormat::JsonLines)
            }
            Some(ext) if ext == "csv" => return Ok(InputFormat::Csv),
            _ => {}
        }
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        for line in BufReader::new(file).lines() {
            let line = line.map_err(|e| Error::io(path, e))?;
            let trimmed = line.trim_start();
            if trimmed.is_empty() {
                continue;
            }
            return Ok(if trimmed.starts_with('{') {
                InputFormat::JsonLines
            } else {
                InputFormat::Csv
            });
        }
        Ok(InputFormat::Csv)
    }
}

/// A raw record: field lookup by source column name.
trait RawRecord {
    fn get(&self, column: &str) -> Option<String>;
}

impl RawRecord for serde_json::Map<String, serde_json::Value> {
    fn get(&self, column: &str) -> Option<String> {
        match serde_json::Map::get(self, column)? {
            serde_json::Value::Null => None,
            serde_json::Value::String(s) => Some(s.clone()),
            other => Some(other.to_string()),
        }
    }
}

struct CsvRow<'a> {
    columns: &'a BTreeMap<String, usize>,
    record: &'a csv::StringRecord,
}

impl RawRecord for CsvRow<'_> {
    fn get(&self, column: &str) -> Option<String> {
        let idx = *self.columns.get(column)?;
        self.record.get(idx).map(str::to_string)
    }
}

struct RowBuilder<'a> {
    schema: &'a SchemaMap,
    terms: &'a TermTable,
    seen: HashSet<String>,
}

impl RowBuilder<'_> {
    fn build(&mut self, rec: &dyn RawRecord) -> std::result::Result<Document, String> {
        let s = self.schema;
        let required = |col: &str, name: &str| -> std::result::Result<String, String> {
            match rec.get(col) {
                Some(v) if !v.trim().is_empty() => Ok(v),
                _ => Err(format!("missing {name}")),
            }
        };
        let id = required(&s.id, "id")?.trim().to_string();
        let raw_date = required(&s.date, "date")?;
        let date = parse_date(raw_date.trim()).ok_or_else(|| format!("unparseable date {raw_date:?}"))?;
        let ministry = required(&s.ministry, "ministry")?.trim().to_string();
        let question_text = rec
            .get(&s.question_text)
            .ok_or_else(|| "missing question_text".to_string())?;
        if self.seen.contains(&id) {
            return Err(format!("duplicate id {id:?}"));
        }
        self.seen.insert(id.clone());
        let optional = |col: &str| rec.get(col).unwrap_or_default();
        Ok(Document {
            term: self.terms.term_of(date),
            id,
            date,
            ministry,
            question_text,
            answer_text: optional(&s.answer_text),
            member_name: optional(&s.member_name).trim().to_string(),
            member_gender: Gender::parse(&optional(&s.member_gender)),
            member_category: Category::parse(&optional(&s.member_category)),
            member_alliance: Alliance::parse(&optional(&s.member_alliance)),
        })
    }
}

/// Accepts `YYYY-MM-DD`, optionally followed by a time part.
fn parse_date(raw: &str) -> Option<NaiveDate> {
    let head = raw.get(..10).unwrap_or(raw);
    NaiveDate::parse_from_str(head, "%Y-%m-%d").ok()
}

/// Reads a line-delimited JSON or CSV file into a [`Corpus`].
///
/// In lenient mode invalid rows are skipped and counted; in strict mode the
/// first invalid row aborts with its line number.
pub fn ingest(path: &Path, schema: &SchemaMap, terms: &TermTable, strict: bool) -> Result<Corpus> {
    let format = InputFormat::detect(path)?;
    let mut builder = RowBuilder {
        schema,
        terms,
        seen: HashSet::new(),
    };
    let mut documents = Vec::new();
    let mut skipped = 0usize;
    let mut accept = |line: usize, row: std::result::Result<Document, String>| -> Result<()> {
        match row {
            Ok(doc) => documents.push(doc),
            Err(reason) if strict => return Err(Error::InvalidRow { line, reason }),
            Err(_) => skipped += 1,
        }
        Ok(())
    };

    match format {
        InputFormat::JsonLines => {
            let file = File::open(path).map_err(|e| Error::io(path, e))?;
            for (i, line) in BufReader::new(file).lines().enumerate() {
                let line = line.map_err(|e| Error::io(path, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                let row = match serde_json::from_str::<serde_json::Map<String, serde_json::Value>>(&line) {
                    Ok(obj) => builder.build(&obj),
                    Err(e) => Err(format!("not a JSON object: {e}")),
                };
                accept(i + 1, row)?;
            }
        }
        InputFormat::Csv => {
            let file = File::open(path).map_err(|e| Error::io(path, e))?;
            let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(file);
            let columns: BTreeMap<String, usize> = reader
                .headers()?
                .iter()
                .enumerate()
                .map(|(i, h)| (h.trim().to_string(), i))
                .collect();
            let missing: Vec<String> = schema
                .mandatory()
                .iter()
                .filter(|c| !columns.contains_key(**c))
                .map(|c| c.to_string())
                .collect();
            if !missing.is_empty() {
                return Err(Error::MissingColumns(missing));
            }
            let mut record = csv::StringRecord::new();
            loop {
                let line = reader.position().line() as usize;
                match reader.read_record(&mut record) {
                    Ok(false) => break,
                    Ok(true) => {
                        let row = builder.build(&CsvRow {
                            columns: &columns,
                            record: &record,
                        });
                        accept(line, row)?;
                    }
                    Err(e) => accept(line, Err(e.to_string()))?,
                }
            }
        }
    }

    documents.sort_by_key(|d| d.date);
    Ok(Corpus {
        provenance: Provenance {
            source: path.display().to_string(),
            ingested_at: Some(chrono::Utc::now().to_rfc3339()),
            accepted: documents.len(),
            skipped,
        },
        documents,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Granularity {
    Year,
    Term,
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Granularity::Year => "year",
            Granularity::Term => "term",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodSlice {
    pub label: String,
    pub indices: Vec<usize>,
}

/// Partitions document indices into chronological periods.
///
/// Year slices cover the term table's year span, extended to any document
/// years outside it; term slices cover every term in the table. Empty
/// periods are kept so that different subsets share the same slice layout.
pub fn slice_by_period(corpus: &Corpus, granularity: Granularity, terms: &TermTable) -> Result<Vec<PeriodSlice>> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    match granularity {
        Granularity::Year => {
            let (mut lo, mut hi) = terms.year_span();
            for d in &corpus.documents {
                lo = lo.min(d.date.year());
                hi = hi.max(d.date.year());
            }
            let mut slices: Vec<PeriodSlice> = (lo..=hi)
                .map(|y| PeriodSlice {
                    label: y.to_string(),
                    indices: Vec::new(),
                })
                .collect();
            for (i, d) in corpus.documents.iter().enumerate() {
                slices[(d.date.year() - lo) as usize].indices.push(i);
            }
            Ok(slices)
        }
        Granularity::Term => {
            let mut slices: Vec<PeriodSlice> = terms
                .entries()
                .iter()
                .map(|e| PeriodSlice {
                    label: e.term.to_string(),
                    indices: Vec::new(),
                })
                .collect();
            for (i, d) in corpus.documents.iter().enumerate() {
                let pos = terms
                    .term_of(d.date)
                    .and_then(|t| terms.entries().iter().position(|e| e.term == t))
                    .ok_or_else(|| Error::OutsideTermTable {
                        id: d.id.clone(),
                        date: d.date.to_string(),
                    })?;
                slices[pos].indices.push(i);
            }
            Ok(slices)
        }
    }
}

pub fn normalize_ministry(name: &str) -> String {
    name.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Keeps documents whose ministry matches after case-folding and whitespace
/// normalization.
pub fn filter_by_ministry(corpus: &Corpus, ministry: &str) -> Corpus {
    let wanted = normalize_ministry(ministry);
    let documents: Vec<Document> = corpus
        .documents
        .iter()
        .filter(|d| normalize_ministry(&d.ministry) == wanted)
        .cloned()
        .collect();
    Corpus {
        provenance: Provenance {
            source: corpus.provenance.source.clone(),
            ingested_at: corpus.provenance.ingested_at.clone(),
            accepted: documents.len(),
            skipped: corpus.provenance.skipped,
        },
        documents,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(ext: &str, body: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(ext).tempfile().unwrap();
        f.write_all(body.as_bytes()).unwrap();
        f
    }

    fn doc(id: &str, date: &str, ministry: &str) -> Document {
        let date = NaiveDate::parse_from_str(date, "%Y-%m-%d").unwrap();
        Document {
            id: id.into(),
            date,
            ministry: ministry.into(),
            question_text: String::new(),
            answer_text: String::new(),
            member_name: String::new(),
            member_gender: Gender::Unknown,
            member_category: Category::Unknown,
            member_alliance: Alliance::Unknown,
            term: TermTable::default().term_of(date),
        }
    }

    const THREE_ROWS: &str = "id,date,ministry,question_text\n\
        a,2001-02-03,Finance,q one\n\
        b,,Railways,q two\n\
        c,2008-03-14,Finance,q three\n";

    #[test]
    fn lenient_skips_bad_rows() {
        let f = write_tmp(".csv", THREE_ROWS);
        let c = ingest(f.path(), &SchemaMap::default(), &TermTable::default(), false).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.provenance.accepted, 2);
        assert_eq!(c.provenance.skipped, 1);
    }

    #[test]
    fn strict_names_offending_line() {
        let f = write_tmp(".csv", THREE_ROWS);
        let err = ingest(f.path(), &SchemaMap::default(), &TermTable::default(), true).unwrap_err();
        match err {
            Error::InvalidRow { line, reason } => {
                assert_eq!(line, 3);
                assert!(reason.contains("date"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn term_derivation() {
        let t = TermTable::default();
        let d = |s| NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap();
        assert_eq!(t.term_of(d("2008-03-14")), Some(14));
        assert_eq!(t.term_of(d("1999-05-01")), Some(13));
        assert_eq!(t.term_of(d("2004-01-01")), Some(14));
        assert_eq!(t.term_of(d("2019-12-31")), Some(16));
        assert_eq!(t.term_of(d("2020-01-01")), None);
        assert_eq!(t.term_of(d("1998-12-31")), None);
    }

    #[test]
    fn missing_mandatory_column() {
        let f = write_tmp(".csv", "id,date,question_text\n1,2001-01-01,x\n");
        let err = ingest(f.path(), &SchemaMap::default(), &TermTable::default(), false).unwrap_err();
        assert!(matches!(err, Error::MissingColumns(ref c) if c == &vec!["ministry".to_string()]));
    }

    #[test]
    fn unreadable_file() {
        let err = ingest(
            Path::new("/nonexistent/file.csv"),
            &SchemaMap::default(),
            &TermTable::default(),
            false,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn jsonl_with_schema_mapping_and_metadata() {
        let body = r#"{"qid": 7, "qdate": "2015-07-21", "min": "Health", "q": "malaria cases", "gender": "F", "party_side": "Opposition", "caste": "SC"}
{"qid": 8, "qdate": "2000-01-05", "min": "Health", "q": "vaccines"}
"#;
        let f = write_tmp(".jsonl", body);
        let schema = SchemaMap {
            id: "qid".into(),
            date: "qdate".into(),
            ministry: "min".into(),
            question_text: "q".into(),
            member_gender: "gender".into(),
            member_alliance: "party_side".into(),
            member_category: "caste".into(),
            ..SchemaMap::default()
        };
        let c = ingest(f.path(), &schema, &TermTable::default(), true).unwrap();
        assert_eq!(c.len(), 2);
        // sorted by date
        assert_eq!(c.documents[0].id, "8");
        let d = &c.documents[1];
        assert_eq!(d.member_gender, Gender::Female);
        assert_eq!(d.member_alliance, Alliance::Opposition);
        assert_eq!(d.member_category, Category::ScheduledCaste);
        assert_eq!(d.term, Some(16));
        assert_eq!(c.documents[0].member_gender, Gender::Unknown);
    }

    #[test]
    fn duplicate_ids_are_invalid() {
        let f = write_tmp(
            ".csv",
            "id,date,ministry,question_text\na,2001-01-01,F,x\na,2001-01-02,F,y\n",
        );
        let c = ingest(f.path(), &SchemaMap::default(), &TermTable::default(), false).unwrap();
        assert_eq!((c.len(), c.provenance.skipped), (1, 1));
    }

    #[test]
    fn ingest_is_idempotent() {
        let f = write_tmp(".csv", THREE_ROWS);
        let a = ingest(f.path(), &SchemaMap::default(), &TermTable::default(), false).unwrap();
        let b = ingest(f.path(), &SchemaMap::default(), &TermTable::default(), false).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn year_and_term_slices() {
        let docs: Vec<Document> = (1999..=2019)
            .map(|y| doc(&format!("d{y}"), &format!("{y}-06-01"), "Finance"))
            .collect();
        let c = Corpus::from_documents("t", docs);
        let years = slice_by_period(&c, Granularity::Year, &TermTable::default()).unwrap();
        assert_eq!(years.len(), 21);
        assert_eq!(years[0].label, "1999");
        let terms = slice_by_period(&c, Granularity::Term, &TermTable::default()).unwrap();
        assert_eq!(terms.len(), 4);
        assert_eq!(terms.iter().map(|s| s.indices.len()).sum::<usize>(), 21);
    }

    #[test]
    fn single_document_slices() {
        let c = Corpus::from_documents("t", vec![doc("x", "2010-02-02", "Finance")]);
        let terms = slice_by_period(&c, Granularity::Term, &TermTable::default()).unwrap();
        let non_empty: Vec<_> = terms.iter().filter(|s| !s.indices.is_empty()).collect();
        assert_eq!(non_empty.len(), 1);
        assert_eq!(non_empty[0].label, "15");
        assert_eq!(terms.len() - non_empty.len(), 3);
        let years = slice_by_period(&c, Granularity::Year, &TermTable::default()).unwrap();
        assert_eq!(years.iter().filter(|s| !s.indices.is_empty()).count(), 1);
    }

    #[test]
    fn slicing_errors() {
        let empty = Corpus::from_documents("t", vec![]);
        assert!(matches!(
            slice_by_period(&empty, Granularity::Year, &TermTable::default()),
            Err(Error::EmptyCorpus)
        ));
        let c = Corpus::from_documents("t", vec![doc("x", "1990-02-02", "Finance")]);
        assert!(matches!(
            slice_by_period(&c, Granularity::Term, &TermTable::default()),
            Err(Error::OutsideTermTable { .. })
        ));
        // year granularity widens to cover the stray year
        let years = slice_by_period(&c, Granularity::Year, &TermTable::default()).unwrap();
        assert_eq!(years[0].label, "1990");
        assert_eq!(years.len(), 30);
    }

    #[test]
    fn ministry_filter_semantics() {
        let c = Corpus::from_documents(
            "t",
            vec![
                doc("1", "2001-01-01", "Finance"),
                doc("2", "2001-01-02", "Railways"),
                doc("3", "2001-01-03", " finance  "),
                doc("4", "2001-01-04", "Health and  Family Welfare"),
            ],
        );
        let f = filter_by_ministry(&c, "Finance");
        assert_eq!(f.documents.iter().map(|d| d.id.as_str()).collect::<Vec<_>>(), ["1", "3"]);
        assert_eq!(filter_by_ministry(&c, "finance"), f);
        assert_eq!(filter_by_ministry(&c, "health and family welfare").len(), 1);
        let none = filter_by_ministry(&c, "Coal");
        assert!(none.is_empty());
        assert_eq!(none.provenance.accepted, 0);
    }

    #[test]
    fn term_table_validation() {
        assert!(TermTable::new(vec![]).is_err());
        let overlapping = vec![
            TermSpan { term: 1, start_year: 2000, end_year: 2005 },
            TermSpan { term: 2, start_year: 2003, end_year: 2008 },
        ];
        assert!(TermTable::new(overlapping).is_err());
    }
}
