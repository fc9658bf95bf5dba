//! Descriptive corpus statistics: group distributions, normalized
//! ruling/opposition participation, member participation shares and
//! keyword-matched theme counts.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{Read, Write};

use chrono::Datelike;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::corpus::{Alliance, Corpus, Document};
use crate::error::{Error, Result};

pub const OTHER: &str = "other";
pub const UNKNOWN: &str = "unknown";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupKey {
    Ministry,
    Term,
    Year,
    Gender,
    Category,
}

impl GroupKey {
    pub fn parse(raw: &str) -> Option<Self> {
        Some(match raw {
            "ministry" => GroupKey::Ministry,
            "term" => GroupKey::Term,
            "year" => GroupKey::Year,
            "gender" => GroupKey::Gender,
            "category" => GroupKey::Category,
            _ => return None,
        })
    }

    /// Group label of a document; `None` for missing metadata.
    pub fn label(self, doc: &Document) -> Option<String> {
        match self {
            GroupKey::Ministry => Some(doc.ministry.trim().to_string()),
            GroupKey::Term => doc.term.map(|t| t.to_string()),
            GroupKey::Year => Some(doc.date.year().to_string()),
            GroupKey::Gender => Some(doc.member_gender.label()).filter(|l| *l != UNKNOWN).map(str::to_string),
            GroupKey::Category => Some(doc.member_category.label()).filter(|l| *l != UNKNOWN).map(str::to_string),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistRow {
    pub group: String,
    pub count: u64,
    pub share: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DistributionTable {
    pub rows: Vec<DistRow>,
    /// Documents with missing metadata, when kept out of the shares.
    pub unknown: Option<u64>,
}

impl DistributionTable {
    pub fn total(&self) -> u64 {
        self.rows.iter().map(|r| r.count).sum::<u64>() + self.unknown.unwrap_or(0)
    }

    pub fn get(&self, group: &str) -> Option<&DistRow> {
        self.rows.iter().find(|r| r.group == group)
    }

    /// CSV `group,count,share`; an aside unknown count is written as an
    /// `unknown` row with an empty share.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["group", "count", "share"])?;
        for r in &self.rows {
            w.write_record([r.group.as_str(), &r.count.to_string(), &r.share.to_string()])?;
        }
        if let Some(u) = self.unknown {
            w.write_record([UNKNOWN, &u.to_string(), ""])?;
        }
        w.flush().map_err(|e| Error::io("<distribution csv>", e))?;
        Ok(())
    }
}

fn shares(counts: Vec<(String, u64)>) -> Vec<DistRow> {
    let total: u64 = counts.iter().map(|c| c.1).sum();
    counts
        .into_iter()
        .map(|(group, count)| DistRow {
            share: if total == 0 { 0.0 } else { count as f64 / total as f64 },
            group,
            count,
        })
        .collect()
}

fn by_count_desc(counts: HashMap<String, u64>) -> Vec<(String, u64)> {
    let mut v: Vec<(String, u64)> = counts.into_iter().collect();
    v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    v
}

/// Document counts per group, largest first. Missing metadata forms an
/// `unknown` group; with `top_n`, groups past the first `top_n` are merged
/// into a final `other` row.
pub fn group_distribution(corpus: &Corpus, key: GroupKey, top_n: Option<usize>) -> Result<DistributionTable> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut counts: HashMap<String, u64> = HashMap::new();
    for d in &corpus.documents {
        *counts.entry(key.label(d).unwrap_or_else(|| UNKNOWN.into())).or_insert(0) += 1;
    }
    let mut ordered = by_count_desc(counts);
    if let Some(n) = top_n {
        if ordered.len() > n {
            let rest: u64 = ordered[n..].iter().map(|c| c.1).sum();
            ordered.truncate(n);
            ordered.push((OTHER.into(), rest));
        }
    }
    Ok(DistributionTable {
        rows: shares(ordered),
        unknown: None,
    })
}

/// Shares of questions per member group over documents with known
/// metadata; the unknown count is reported aside.
pub fn participation_shares(corpus: &Corpus, key: GroupKey) -> Result<DistributionTable> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut counts: HashMap<String, u64> = HashMap::new();
    let mut unknown = 0;
    for d in &corpus.documents {
        match key.label(d) {
            Some(g) => *counts.entry(g).or_insert(0) += 1,
            None => unknown += 1,
        }
    }
    Ok(DistributionTable {
        rows: shares(by_count_desc(counts)),
        unknown: Some(unknown),
    })
}

/// Seat and question counts for one term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParticipationInput {
    pub ruling_seats: u32,
    pub opposition_seats: u32,
    pub ruling_questions: u32,
    pub opposition_questions: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Participation {
    pub ruling: Ratio<u128>,
    pub opposition: Ratio<u128>,
}

impl Participation {
    pub fn ruling_f64(&self) -> f64 {
        *self.ruling.numer() as f64 / *self.ruling.denom() as f64
    }

    pub fn opposition_f64(&self) -> f64 {
        *self.opposition.numer() as f64 / *self.opposition.denom() as f64
    }
}

/// Question counts weighted by the other side's seat share, in exact
/// rational arithmetic:
/// `R_pp = R_q * O_n / (R_n + O_n)`, `O_pp = O_q * R_n / (R_n + O_n)`.
pub fn normalized_participation(p: ParticipationInput) -> Result<Participation> {
    let seats = u128::from(p.ruling_seats) + u128::from(p.opposition_seats);
    if seats == 0 {
        return Err(Error::Degenerate("ruling and opposition seats are both zero".into()));
    }
    Ok(Participation {
        ruling: Ratio::new(u128::from(p.ruling_questions) * u128::from(p.opposition_seats), seats),
        opposition: Ratio::new(u128::from(p.opposition_questions) * u128::from(p.ruling_seats), seats),
    })
}

/// Questions asked by ruling and opposition members per term. Documents
/// with unknown alliance or term are not counted.
pub fn alliance_question_counts(corpus: &Corpus) -> BTreeMap<u32, (u32, u32)> {
    let mut out: BTreeMap<u32, (u32, u32)> = BTreeMap::new();
    for d in &corpus.documents {
        let Some(term) = d.term else { continue };
        let entry = out.entry(term).or_default();
        match d.member_alliance {
            Alliance::Ruling => entry.0 += 1,
            Alliance::Opposition => entry.1 += 1,
            Alliance::Unknown => {}
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TermParticipation {
    pub term: u32,
    pub input: ParticipationInput,
    pub ruling: f64,
    pub opposition: f64,
}

/// Normalized participation per term for the terms that have seat counts.
/// `seats` maps term to `(ruling, opposition)` seats.
pub fn participation_by_term(corpus: &Corpus, seats: &BTreeMap<u32, (u32, u32)>) -> Result<Vec<TermParticipation>> {
    let questions = alliance_question_counts(corpus);
    let mut out = Vec::new();
    for (&term, &(ruling_seats, opposition_seats)) in seats {
        let (rq, oq) = questions.get(&term).copied().unwrap_or((0, 0));
        let input = ParticipationInput {
            ruling_seats,
            opposition_seats,
            ruling_questions: rq,
            opposition_questions: oq,
        };
        let p = normalized_participation(input)?;
        out.push(TermParticipation {
            term,
            input,
            ruling: p.ruling_f64(),
            opposition: p.opposition_f64(),
        });
    }
    Ok(out)
}

/// Reads `term,ruling_seats,opposition_seats`.
pub fn read_seats<R: Read>(input: R) -> Result<BTreeMap<u32, (u32, u32)>> {
    #[derive(Deserialize)]
    struct Row {
        term: u32,
        ruling_seats: u32,
        opposition_seats: u32,
    }
    let mut out = BTreeMap::new();
    for row in csv::Reader::from_reader(input).deserialize() {
        let r: Row = row?;
        out.insert(r.term, (r.ruling_seats, r.opposition_seats));
    }
    Ok(out)
}

/// Number of documents per group containing at least one keyword, in
/// chronological group order. `tokens[i]` is the matching token stream of
/// `corpus.documents[i]`. Every group present in the corpus gets a row,
/// matched or not; shares are over all matched documents.
pub fn keyword_theme_counts(
    corpus: &Corpus,
    tokens: &[Vec<String>],
    keywords: &BTreeSet<String>,
    key: GroupKey,
) -> Result<DistributionTable> {
    if !matches!(key, GroupKey::Term | GroupKey::Year) {
        return Err(Error::Config("theme counts group by term or year".into()));
    }
    if tokens.len() != corpus.len() {
        return Err(Error::Config("one token stream per document required".into()));
    }
    if keywords.is_empty() {
        return Err(Error::Config("empty keyword set".into()));
    }
    // numeric group order; unknown last
    let mut counts: BTreeMap<(i64, String), u64> = BTreeMap::new();
    for (d, toks) in corpus.documents.iter().zip(tokens) {
        let group = match key.label(d) {
            Some(g) => (g.parse::<i64>().unwrap_or(i64::MAX - 1), g),
            None => (i64::MAX, UNKNOWN.to_string()),
        };
        let hit = toks.iter().any(|t| keywords.contains(t));
        *counts.entry(group).or_insert(0) += u64::from(hit);
    }
    Ok(DistributionTable {
        rows: shares(counts.into_iter().map(|((_, g), c)| (g, c)).collect()),
        unknown: None,
    })
}

/// Reads a sittings file `year,sittings`.
pub fn read_sittings<R: Read>(input: R) -> Result<BTreeMap<i32, u32>> {
    #[derive(Deserialize)]
    struct Row {
        year: i32,
        sittings: u32,
    }
    let mut out = BTreeMap::new();
    for row in csv::Reader::from_reader(input).deserialize() {
        let r: Row = row?;
        out.insert(r.year, r.sittings);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SittingsRow {
    pub year: i32,
    pub questions: u64,
    pub sittings: Option<u32>,
}

/// Questions per year next to the sittings that year, for every year with
/// questions or sittings.
pub fn join_sittings(corpus: &Corpus, sittings: &BTreeMap<i32, u32>) -> Vec<SittingsRow> {
    let mut questions: BTreeMap<i32, u64> = BTreeMap::new();
    for d in &corpus.documents {
        *questions.entry(d.date.year()).or_insert(0) += 1;
    }
    let years: BTreeSet<i32> = questions.keys().chain(sittings.keys()).copied().collect();
    years
        .into_iter()
        .map(|year| SittingsRow {
            year,
            questions: questions.get(&year).copied().unwrap_or(0),
            sittings: sittings.get(&year).copied(),
        })
        .collect()
}
