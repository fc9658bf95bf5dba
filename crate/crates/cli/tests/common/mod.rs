#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const BIN: &str = env!("CARGO_BIN_EXE_tempotopic");

const THEMES: [(&str, &[&str]); 4] = [
    (
        "Railways",
        &[
            "railway", "train", "station", "passenger", "ticket", "coach", "track", "freight", "platform",
            "signal", "locomotive", "reservation", "railway zone", "gauge conversion",
        ],
    ),
    (
        "Finance",
        &[
            "bank", "loan", "credit card", "interest", "deposit", "tax", "rupee", "budget", "insurance",
            "fund", "public private", "partnership", "investment", "revenue",
        ],
    ),
    (
        "Health and Family Welfare",
        &[
            "hospital", "doctor", "health", "medicine", "vaccine", "patient", "disease", "clinic", "nurse",
            "treatment", "malaria", "polio", "health centre", "drug",
        ],
    ),
    (
        "Agriculture",
        &[
            "farmer", "crop", "irrigation", "seed", "fertilizer", "harvest", "wheat", "rice", "soil",
            "drought", "procurement", "minimum support", "price", "cultivation",
        ],
    ),
];

const FILLER: &[&str] = &[
    "the", "of", "and", "whether", "government", "has", "any", "details", "thereof", "state", "is", "to", "in",
];

fn sentence(rng: &mut ChaCha8Rng, theme: usize, other: usize, len: usize) -> String {
    let mut words = Vec::new();
    for _ in 0..len {
        let r: f64 = rng.gen();
        let w = if r < 0.6 {
            THEMES[theme].1.choose(rng).unwrap()
        } else if r < 0.75 {
            THEMES[other].1.choose(rng).unwrap()
        } else {
            FILLER.choose(rng).unwrap()
        };
        words.push(*w);
    }
    let mut s = words.join(" ");
    s.push('?');
    s
}

/// Writes a CSV of synthetic questions spread over 1999..=2018.
pub fn write_qa_csv(path: &Path, n_docs: usize, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = csv::Writer::from_path(path).unwrap();
    w.write_record([
        "id",
        "date",
        "ministry",
        "question_text",
        "answer_text",
        "member_name",
        "member_gender",
        "member_category",
        "member_alliance",
    ])
    .unwrap();
    for i in 0..n_docs {
        let year = 1999 + (i % 20) as i32;
        let theme = rng.gen_range(0..THEMES.len());
        let other = rng.gen_range(0..THEMES.len());
        let (q_len, a_len) = (rng.gen_range(14..24), rng.gen_range(10..20));
        let q = sentence(&mut rng, theme, other, q_len);
        let a = sentence(&mut rng, theme, other, a_len);
        let gender = if rng.gen_bool(0.9) { "male" } else { "female" };
        let category = ["General", "SC", "ST", "OBC"][rng.gen_range(0..4)];
        let alliance = if rng.gen_bool(0.55) { "ruling" } else { "opposition" };
        w.write_record([
            format!("q{i:05}"),
            format!("{year}-{:02}-{:02}", rng.gen_range(1..13), rng.gen_range(1..29)),
            THEMES[theme].0.to_string(),
            q,
            a,
            format!("member {}", rng.gen_range(0..60)),
            gender.to_string(),
            category.to_string(),
            alliance.to_string(),
        ])
        .unwrap();
    }
    w.flush().unwrap();
}

pub fn tempotopic(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env("NO_COLOR", "1").output().unwrap()
}

pub fn run_ok(args: &[&str]) -> Output {
    let out = tempotopic(args);
    assert!(
        out.status.success(),
        "tempotopic {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

/// Writes a small but complete run configuration.
pub fn write_config(dir: &Path, input: &Path, out: &Path) -> PathBuf {
    let config = serde_json::json!({
        "input": input,
        "output_dir": out,
        "prep": { "df_min": 0.0, "bigram_min_count": 5 },
        "lda": { "num_topics": 4, "passes": 20, "seed": 11 },
        "dtm": { "num_topics": 4, "chain_strength": 50.0, "granularity": "term" },
        "sg": { "dim": 16, "epochs": 2, "min_count": 2 },
        "metrics": { "top_n": 5, "top_d": 10, "sweep_ks": [2, 4, 6] },
        "chart": { "width": 640, "height": 400 }
    });
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(&config).unwrap()).unwrap();
    path
}

/// ingest -> prep -> train-lda -> train-dtm -> metrics -> trajectory, with
/// the given worker count. Returns every file in the output directory.
pub fn pipeline(config: &Path, out: &Path, workers: usize) -> BTreeMap<String, Vec<u8>> {
    if out.exists() {
        std::fs::remove_dir_all(out).unwrap();
    }
    let c = config.to_str().unwrap();
    let w = workers.to_string();
    for cmd in [
        vec!["ingest"],
        vec!["prep"],
        vec!["train-lda"],
        vec!["train-dtm"],
        vec!["metrics"],
        vec!["metrics", "--metrics.model", "lda"],
        vec!["trajectory", "--topic", "0", "--words", "bank,train"],
    ] {
        let mut args: Vec<&str> = vec!["--workers", &w];
        args.extend(&cmd);
        args.extend(["--config", c]);
        run_ok(&args);
    }
    snapshot(out)
}

pub fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    for e in std::fs::read_dir(dir).unwrap() {
        let e = e.unwrap();
        if e.file_type().unwrap().is_file() {
            files.insert(e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap());
        }
    }
    files
}
