//! Acceptance checks. One PASS/FAIL/SKIP line per check; exits non-zero
//! when any check fails.

mod common;

use std::collections::HashSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tempotopic::analytics::{group_distribution, normalized_participation, participation_shares, GroupKey, ParticipationInput};
use tempotopic::corpus::{ingest, normalize_ministry, SchemaMap, TermTable};
use tempotopic::dtm::{train_dtm, DtmConfig, DtmModel, SlicedCorpus};
use tempotopic::embed::{cosine, train_skipgram, SgConfig};
use tempotopic::lda::{train_lda, LdaConfig, LdaModel};
use tempotopic::metrics::{npmi, npmi_coherence, topic_diversity, topic_quality, Cooccurrence, DEFAULT_EPSILON};
use tempotopic::synthetic::{clique_sentences, drift_corpus, mixture_corpus, vocabulary};
use tempotopic::textprep::{BowCorpus, WordId};

type Check = (&'static str, fn() -> Outcome);

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn pool(threads: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap()
}

fn within(limit: Duration, start: Instant, detail: String) -> Outcome {
    let took = start.elapsed();
    if took <= limit {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(format!("{detail}; took {took:.1?}, limit {limit:?}"))
    }
}

fn round_half_up_3(x: f64) -> i64 {
    // nudge by a few ulps so that exact halves written in decimal round up
    (x * 1000.0 + 0.5 + 1e-9).floor() as i64
}

fn quality_identity() -> Outcome {
    let cases = [((0.088, 0.652), 57), ((0.129, 0.686), 88), ((0.103, 0.617), 64)];
    let mut got = Vec::new();
    for ((c, d), want) in cases {
        let q = round_half_up_3(topic_quality(c, d));
        got.push(format!("{:.3}", q as f64 / 1000.0));
        if q != want {
            return Outcome::Fail(format!("quality({c}, {d}) rounds to {q}/1000, expected {want}/1000"));
        }
    }
    Outcome::Pass(got.join(" "))
}

fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>() / 2.0
}

fn greedy_match(model: &LdaModel, truth: &[Vec<f64>]) -> Vec<(usize, usize, f64)> {
    let mut pairs: Vec<(usize, usize, f64)> = (0..model.num_topics())
        .flat_map(|a| (0..truth.len()).map(move |b| (a, b)))
        .map(|(a, b)| (a, b, total_variation(model.phi_row(a), &truth[b])))
        .collect();
    pairs.sort_by(|x, y| x.2.partial_cmp(&y.2).unwrap());
    let (mut ua, mut ub, mut out) = (HashSet::new(), HashSet::new(), Vec::new());
    for (a, b, d) in pairs {
        if !ua.contains(&a) && !ub.contains(&b) {
            ua.insert(a);
            ub.insert(b);
            out.push((a, b, d));
        }
    }
    out
}

fn lda_recovery() -> Outcome {
    let start = Instant::now();
    let g = mixture_corpus(2, 50, 400, 60, 0.5, 7);
    let model = pool(1).install(|| train_lda(&g.bow, &LdaConfig::with_topics(2), None)).unwrap();
    let matched = greedy_match(&model, &g.phi);
    if matched.len() != 2 {
        return Outcome::Fail("topics could not be matched".into());
    }
    let mut tvs = Vec::new();
    for (learned, truth, tv) in matched {
        if tv > 0.15 {
            return Outcome::Fail(format!("topic {learned}: total variation {tv:.4} > 0.15"));
        }
        for w in model.top_word_ids(learned, 10).unwrap() {
            if g.phi[truth][w as usize] == 0.0 {
                return Outcome::Fail(format!("topic {learned}: top word {w} is from another topic"));
            }
        }
        tvs.push(format!("{tv:.4}"));
    }
    within(Duration::from_secs(60), start, format!("total variation {}", tvs.join(", ")))
}

fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].partial_cmp(&xs[b]).unwrap());
    let mut r = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        for &p in &idx[i..=j] {
            r[p] = (i + j) as f64 / 2.0;
        }
        i = j + 1;
    }
    r
}

fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    let (rx, ry) = (ranks(xs), ranks(ys));
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

fn phi_cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    dot / (a.iter().map(|x| x * x).sum::<f64>().sqrt() * b.iter().map(|x| x * x).sum::<f64>().sqrt())
}

fn dtm_drift() -> Outcome {
    let start = Instant::now();
    let ramp = [0.01, 0.0825, 0.155, 0.2275, 0.30];
    let (slices, truths) = drift_corpus(2, 50, 300, 40, 7, &ramp, 0.5, 17);
    let labels: Vec<String> = (0..5).map(|t| (2001 + t).to_string()).collect();
    let sliced = SlicedCorpus::new(labels, slices).unwrap();
    let cfg = DtmConfig {
        num_topics: 2,
        lda: LdaConfig::with_topics(2),
        ..DtmConfig::default()
    };
    let model = train_dtm(&sliced, &cfg).unwrap();
    let k = (0..2)
        .max_by(|&a, &b| {
            phi_cosine(model.slices[0].phi_row(a), &truths[0][0])
                .partial_cmp(&phi_cosine(model.slices[0].phi_row(b), &truths[0][0]))
                .unwrap()
        })
        .unwrap();
    let traj = model.word_trajectory(k, "w0007").unwrap();
    let rho = spearman(&traj, &[0.0, 1.0, 2.0, 3.0, 4.0]);
    if rho < 0.9 {
        return Outcome::Fail(format!("Spearman {rho:.3} < 0.9 for {traj:?}"));
    }

    let independent = DtmConfig {
        chain_strength: 0.0,
        ..cfg
    };
    let chained_off = train_dtm(&sliced, &independent).unwrap();
    let separate: Vec<LdaModel> = sliced
        .slices
        .iter()
        .map(|s| train_lda(s, &independent.slice_config(), None).unwrap())
        .collect();
    if chained_off.slices != separate {
        return Outcome::Fail("chain strength 0 differs from independent per-slice models".into());
    }
    within(
        Duration::from_secs(90),
        start,
        format!("Spearman {rho:.3}; chain strength 0 equals independent models"),
    )
}

fn bow_from(docs: Vec<Vec<WordId>>, v: usize) -> BowCorpus {
    BowCorpus {
        vocab: vocabulary(v),
        doc_ids: (0..docs.len()).map(|i| format!("d{i:03}")).collect(),
        docs,
    }
}

fn metric_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let v = 12;
    let words: Vec<String> = (0..v).map(|i| format!("w{i:04}")).collect();
    for case in 0..500 {
        let n_docs = rng.gen_range(1..=50);
        let docs: Vec<Vec<WordId>> = (0..n_docs)
            .map(|_| (0..rng.gen_range(0..15)).map(|_| rng.gen_range(0..v as WordId)).collect())
            .collect();
        let bow = bow_from(docs.clone(), v);
        let probe: Vec<WordId> = (0..rng.gen_range(2..8)).map(|_| rng.gen_range(0..v as WordId)).collect();
        let co = Cooccurrence::count(&probe, &bow);
        let m = co.words.len();
        for (i, &a) in co.words.iter().enumerate() {
            let da = docs.iter().filter(|d| d.contains(&a)).count() as u64;
            if co.single[i] != da {
                return Outcome::Fail(format!("case {case}: document count of {a} is {} not {da}", co.single[i]));
            }
            for (j, &b) in co.words.iter().enumerate() {
                let dab = docs.iter().filter(|d| d.contains(&a) && d.contains(&b)).count() as u64;
                if co.pair[i * m + j] != dab {
                    return Outcome::Fail(format!("case {case}: pair ({a}, {b}) count mismatch"));
                }
                if let Some((pa, pb, pab)) = co.probabilities(a, b) {
                    let n = n_docs as f64;
                    if (pa, pb, pab) != (da as f64 / n, co.single[j] as f64 / n, dab as f64 / n) {
                        return Outcome::Fail(format!("case {case}: probabilities of ({a}, {b}) differ"));
                    }
                    if let Some(x) = npmi(pa, pb, pab, DEFAULT_EPSILON) {
                        if !(-1.0..=1.0).contains(&x) {
                            return Outcome::Fail(format!("case {case}: NPMI {x} out of range"));
                        }
                    }
                }
            }
        }
        let n_topics = rng.gen_range(1..6);
        let topics: Vec<Vec<String>> = (0..n_topics)
            .map(|_| words.choose_multiple(&mut rng, 5).cloned().collect())
            .collect();
        let div = topic_diversity(&topics, 5).unwrap();
        if !(1.0 / n_topics as f64 - 1e-12..=1.0).contains(&div) {
            return Outcome::Fail(format!("case {case}: diversity {div} outside [1/{n_topics}, 1]"));
        }
        if let Ok(c) = npmi_coherence(&topics, &bow, 5, DEFAULT_EPSILON) {
            if c.per_topic.iter().any(|x| !(-1.0..=1.0).contains(x)) {
                return Outcome::Fail(format!("case {case}: topic coherence out of range"));
            }
        }
    }
    // w0 and w1 always together; w2 and w3 never together
    let docs: Vec<Vec<WordId>> = (0..40)
        .map(|i| if i % 2 == 0 { vec![0, 1, 4] } else { vec![2, 5] })
        .chain((0..20).map(|_| vec![3, 5]))
        .collect();
    let bow = bow_from(docs, 6);
    let pair = |a: &str, b: &str| {
        npmi_coherence(&[vec![a.to_string(), b.to_string()]], &bow, 2, DEFAULT_EPSILON).unwrap().mean
    };
    let (together, apart) = (pair("w0000", "w0001"), pair("w0002", "w0003"));
    if together < 0.999 || apart > -0.99 {
        return Outcome::Fail(format!("co-occurring pair {together}, disjoint pair {apart}"));
    }
    Outcome::Pass(format!(
        "500 random corpora match exhaustive counts; co-occurring {together:.4}, disjoint {apart:.4}"
    ))
}

fn participation_formula() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2021);
    for i in 0..10_000 {
        let equal = i % 4 == 0;
        let rn: u32 = rng.gen_range(1..1000);
        let on: u32 = if equal { rn } else { rng.gen_range(1..1000) };
        let (rq, oq): (u32, u32) = (rng.gen_range(0..100_000), rng.gen_range(0..100_000));
        let p = normalized_participation(ParticipationInput {
            ruling_seats: rn,
            opposition_seats: on,
            ruling_questions: rq,
            opposition_questions: oq,
        })
        .unwrap();
        let (rn, on, rq, oq) = (u128::from(rn), u128::from(on), u128::from(rq), u128::from(oq));
        if p.ruling != Ratio::new(rq * on, rn + on) || p.opposition != Ratio::new(oq * rn, rn + on) {
            return Outcome::Fail(format!("case {i}: formula mismatch"));
        }
        if oq > 0 && on > 0 && p.ruling / p.opposition != Ratio::new(rq, oq) * Ratio::new(on, rn) {
            return Outcome::Fail(format!("case {i}: ratio identity fails"));
        }
        if equal && (p.ruling.cmp(&p.opposition) != rq.cmp(&oq)) {
            return Outcome::Fail(format!("case {i}: comparison not preserved at equal seats"));
        }
    }
    within(Duration::from_secs(1), start, "10000 random inputs, exact rationals".into())
}

fn embedding_separation() -> Outcome {
    let start = Instant::now();
    let sentences = clique_sentences(20, 5000, 10, 2021);
    let ids: Vec<String> = (0..sentences.len()).map(|i| format!("s{i:05}")).collect();
    let t = train_skipgram(&sentences, &ids, &SgConfig::default()).unwrap();
    let sim = |x: &str, y: &str| cosine(t.vector(x).unwrap(), t.vector(y).unwrap()).unwrap();
    let group = |p: char| (0..20).map(|i| format!("{p}{i:02}")).collect::<Vec<_>>();
    let (a, b) = (group('a'), group('b'));
    let mut intra = Vec::new();
    for g in [&a, &b] {
        for i in 0..20 {
            for j in i + 1..20 {
                intra.push(sim(&g[i], &g[j]));
            }
        }
    }
    let inter: Vec<f64> = a.iter().flat_map(|x| b.iter().map(move |y| (x, y))).map(|(x, y)| sim(x, y)).collect();
    let inter_mean = inter.iter().sum::<f64>() / inter.len() as f64;
    let frac = intra.iter().filter(|&&c| c > inter_mean).count() as f64 / intra.len() as f64;
    if frac < 0.95 {
        return Outcome::Fail(format!("{:.1}% of intra-clique pairs beat the inter mean", frac * 100.0));
    }
    within(
        Duration::from_secs(60),
        start,
        format!("{:.1}% of intra-clique pairs above inter-clique mean {inter_mean:.3}", frac * 100.0),
    )
}

fn pipeline_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("qa.csv");
    common::write_qa_csv(&input, 600, 3);
    let out = dir.path().join("out");
    let config = common::write_config(dir.path(), &input, &out);
    let first = common::pipeline(&config, &out, 1);
    let second = common::pipeline(&config, &out, 1);
    let parallel = common::pipeline(&config, &out, 8);
    let charts = first.keys().filter(|k| k.ends_with(".svg")).count();
    for (name, other) in [("repeat run", &second), ("8 workers", &parallel)] {
        if first.keys().ne(other.keys()) {
            return Outcome::Fail(format!("{name}: different artifact sets"));
        }
        if let Some(k) = first.keys().find(|k| first[*k] != other[*k]) {
            return Outcome::Fail(format!("{name}: {k} differs"));
        }
    }
    Outcome::Pass(format!(
        "{} artifacts ({charts} charts) identical across repeats and 1 vs 8 workers",
        first.len()
    ))
}

fn dtm_performance() -> Outcome {
    let ramp: Vec<f64> = (0..20).map(|t| 0.01 + 0.01 * t as f64).collect();
    let (slices, _) = drift_corpus(20, 250, 2500, 40, 0, &ramp, 0.5, 99);
    let docs: usize = slices.iter().map(|s| s.num_docs()).sum();
    let labels: Vec<String> = (0..20).map(|t| (1999 + t).to_string()).collect();
    let sliced = SlicedCorpus::new(labels, slices).unwrap();
    let cfg = DtmConfig {
        num_topics: 20,
        lda: LdaConfig {
            passes: 20,
            ..LdaConfig::with_topics(20)
        },
        ..DtmConfig::default()
    };
    let start = Instant::now();
    let model: DtmModel = pool(8).install(|| train_dtm(&sliced, &cfg)).unwrap();
    let took = start.elapsed();
    let cores = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let detail = format!(
        "{docs} documents, {} slices, 20 topics, 20 passes in {took:.1?} (8 workers on {cores} core(s))",
        model.num_slices()
    );
    within(Duration::from_secs(20 * 60), start, detail)
}

fn dataset_counts() -> Outcome {
    let Some(path) = std::env::var_os("TEMPOTOPIC_IPD_PATH") else {
        return Outcome::Skip("set TEMPOTOPIC_IPD_PATH (and optionally TEMPOTOPIC_IPD_SCHEMA) to run".into());
    };
    let schema = match std::env::var_os("TEMPOTOPIC_IPD_SCHEMA") {
        Some(p) => SchemaMap::from_json_file(std::path::Path::new(&p)).unwrap(),
        None => SchemaMap::default(),
    };
    let corpus = ingest(std::path::Path::new(&path), &schema, &TermTable::default(), false).unwrap();
    let terms = group_distribution(&corpus, GroupKey::Term, None).unwrap();
    let mut problems = Vec::new();
    let expected = [("13", 73_531), ("14", 66_371), ("15", 79_401), ("16", 78_989)];
    for (term, want) in expected {
        let got = terms.get(term).map(|r| r.count).unwrap_or(0);
        if got != want {
            problems.push(format!("term {term}: {got} != {want}"));
        }
    }
    if corpus.len() != 298_292 {
        problems.push(format!("total {} != 298292", corpus.len()));
    }
    let pct = |t: &tempotopic::analytics::DistributionTable, g: &str| t.get(g).map(|r| r.share * 100.0).unwrap_or(0.0);
    let gender = participation_shares(&corpus, GroupKey::Gender).unwrap();
    let category = participation_shares(&corpus, GroupKey::Category).unwrap();
    for (label, got, want) in [
        ("male", pct(&gender, "male"), 91.6),
        ("female", pct(&gender, "female"), 8.4),
        ("general", pct(&category, "general"), 80.6),
    ] {
        if (got - want).abs() > 0.1 {
            problems.push(format!("{label} share {got:.2}% vs {want}%"));
        }
    }
    let ministries = group_distribution(&corpus, GroupKey::Ministry, None).unwrap();
    let top: Vec<String> = ministries.rows.iter().take(3).map(|r| normalize_ministry(&r.group)).collect();
    if top != ["finance", "railways", "health and family welfare"] {
        problems.push(format!("top ministries {top:?}"));
    }
    if problems.is_empty() {
        Outcome::Pass("term totals, member shares and top ministries match".into())
    } else {
        Outcome::Fail(problems.join("; "))
    }
}

fn main() {
    let checks: [Check; 9] = [
        ("topic quality arithmetic", quality_identity),
        ("synthetic topic recovery", lda_recovery),
        ("dynamic model drift tracking", dtm_drift),
        ("metric bounds and oracles", metric_oracles),
        ("participation formula", participation_formula),
        ("embedding clique separation", embedding_separation),
        ("pipeline determinism", pipeline_determinism),
        ("dynamic model performance", dtm_performance),
        ("dataset statistics", dataset_counts),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Outcome::Fail(format!("panicked: {msg}"))
        });
        let took = start.elapsed();
        match outcome {
            Outcome::Pass(d) => println!("PASS  {name}: {d} [{took:.1?}]"),
            Outcome::Fail(d) => {
                failed += 1;
                println!("FAIL  {name}: {d} [{took:.1?}]");
            }
            Outcome::Skip(d) => println!("SKIP  {name}: {d}"),
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
