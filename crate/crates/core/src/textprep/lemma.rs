use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use crate::error::{Error, Result};

pub type LemmaTable = BTreeMap<String, String>;

const IRREGULAR: &[(&str, &str)] = &[
    ("men", "man"),
    ("women", "woman"),
    ("children", "child"),
    ("feet", "foot"),
    ("teeth", "tooth"),
    ("mice", "mouse"),
    ("geese", "goose"),
    ("lives", "life"),
    ("wives", "wife"),
    ("knives", "knife"),
    ("leaves", "leaf"),
    ("halves", "half"),
    ("shelves", "shelf"),
    ("thieves", "thief"),
    ("indices", "index"),
    ("matrices", "matrix"),
    ("crises", "crisis"),
    ("analyses", "analysis"),
    ("diagnoses", "diagnosis"),
    ("criteria", "criterion"),
    ("phenomena", "phenomenon"),
    ("media", "medium"),
];

/// Reads a `surface<TAB>lemma` file. Blank lines and `#` comments are ignored.
pub fn load_lemma_file(path: &Path) -> Result<LemmaTable> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut table = LemmaTable::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (surface, lemma) = line.split_once('\t').ok_or_else(|| Error::InvalidRow {
            line: i + 1,
            reason: "expected surface<TAB>lemma".into(),
        })?;
        table.insert(surface.trim().to_lowercase(), lemma.trim().to_lowercase());
    }
    Ok(table)
}

fn plural_stem(word: &str) -> Vec<String> {
    let mut out = Vec::new();
    let n = word.len();
    if !word.is_ascii() || n < 4 {
        return out;
    }
    if let Some(stem) = word.strip_suffix("ies") {
        if n > 4 {
            out.push(format!("{stem}y"));
        }
    }
    for suffix in ["sses", "xes", "zes", "ches", "shes"] {
        if word.ends_with(suffix) {
            out.push(word[..n - 2].to_string());
        }
    }
    if word.ends_with('s') && !word.ends_with("ss") && !word.ends_with("us") && !word.ends_with("is") {
        out.push(word[..n - 1].to_string());
    }
    out
}

/// Builds a lemma table for the observed tokens: a short table of irregular
/// plurals plus `-s`/`-es`/`-ies` stripping. A stripped form is used only when
/// it is itself observed, so "gas" never becomes "ga".
pub fn generate_lemma_table<'a>(observed: impl IntoIterator<Item = &'a str>) -> LemmaTable {
    let observed: BTreeSet<&str> = observed.into_iter().collect();
    let mut table = LemmaTable::new();
    for &word in &observed {
        if let Some((_, lemma)) = IRREGULAR.iter().find(|(s, _)| *s == word) {
            table.insert(word.to_string(), lemma.to_string());
            continue;
        }
        if let Some(stem) = plural_stem(word).into_iter().find(|s| observed.contains(s.as_str())) {
            table.insert(word.to_string(), stem);
        }
    }
    table
}
