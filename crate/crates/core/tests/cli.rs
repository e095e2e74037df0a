mod common;

use std::fs;
use std::path::Path;

use seedtopic::cli::{command_dispatch, RunManifest};
use seedtopic::eval::npmi;
use seedtopic::topics::NamedTopics;

use common::fixture;

fn dispatch(args: &[&str]) -> i32 {
    command_dispatch(std::iter::once("seedtopic").chain(args.iter().copied()))
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const QUICK: &str = "iterations=1\nfinal_top_k=6\ndim=16\nepochs=2\n";

fn run_quick(out: &Path, cfg: &Path) -> i32 {
    dispatch(&[
        "run",
        "--corpus",
        p(&fixture("planted/corpus.txt")),
        "--seeds",
        p(&fixture("planted/seeds.txt")),
        "--embeddings",
        p(&fixture("planted/general.emb")),
        "--config",
        p(cfg),
        "--out",
        p(out),
    ])
}

#[test]
fn vocab_lists_terms_then_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("terms.txt");
    let counts = dir.path().join("counts.tsv");
    let code = dispatch(&[
        "vocab",
        "--corpus",
        p(&fixture("planted/corpus.txt")),
        "--seeds",
        p(&fixture("planted/seeds.txt")),
        "--out",
        p(&out),
        "--counts",
        p(&counts),
    ]);
    assert_eq!(code, 0);
    let terms: Vec<String> = fs::read_to_string(&out).unwrap().lines().map(str::to_string).collect();
    assert_eq!(terms.len(), 110 + 2);
    assert_eq!(&terms[110..], ["alpha topic", "beta topic"]);
    let mut sorted = terms[..110].to_vec();
    sorted.sort();
    assert_eq!(sorted, terms[..110]);
    assert_eq!(fs::read_to_string(&counts).unwrap().lines().count(), 110);
}

#[test]
fn run_writes_topics_and_manifest_reproducibly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("quick.cfg");
    fs::write(&cfg, QUICK).unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(run_quick(&a, &cfg), 0);
    assert_eq!(run_quick(&b, &cfg), 0);
    let topics = fs::read(a.join("topics.txt")).unwrap();
    assert_eq!(topics, fs::read(b.join("topics.txt")).unwrap());

    let named = NamedTopics::read(a.join("topics.txt")).unwrap();
    assert_eq!(named.seeds, ["alpha topic", "beta topic"]);
    assert!(named.sets.iter().all(|s| s.len() == 6));

    let manifest: RunManifest = serde_json::from_str(&fs::read_to_string(a.join("manifest.json")).unwrap()).unwrap();
    let names: Vec<&str> = manifest.input_hashes.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(names, ["corpus", "seeds", "embeddings", "config"]);
    assert!(manifest.stages.iter().all(|s| s.finished_unix.is_some()));
    assert_eq!(
        manifest.topics_hash.as_deref(),
        Some(seedtopic::cli::sha256_file(&a.join("topics.txt")).unwrap().as_str())
    );
    assert!(a.join("checkpoints/sets_iter0.txt").exists());
    assert!(a.join("checkpoints/sets_iter1.txt").exists());

    // a rerun into the same directory resumes from the checkpoints
    assert_eq!(run_quick(&a, &cfg), 0);
    assert_eq!(topics, fs::read(a.join("topics.txt")).unwrap());
}

#[test]
fn eval_reports_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.tsv");
    let code = dispatch(&[
        "eval",
        "--topics",
        p(&fixture("metrics/topics.txt")),
        "--test-corpus",
        p(&fixture("metrics/test_corpus.txt")),
        "--annotations",
        p(&fixture("metrics/annotations.tsv")),
        "--out",
        p(&out),
    ]);
    assert_eq!(code, 0);
    let report = fs::read_to_string(&out).unwrap();
    let keys: Vec<&str> = report.lines().map(|l| l.split('\t').next().unwrap()).collect();
    assert_eq!(keys, ["npmi", "lcp", "diversity", "macc", "fleiss_kappa"]);
    let npmi_value: f64 = report
        .lines()
        .next()
        .unwrap()
        .split('\t')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    let sets = NamedTopics::read(fixture("metrics/topics.txt")).unwrap().sets;
    let probs = seedtopic::eval::DocProbabilities::load(fixture("metrics/test_corpus.txt"), true).unwrap();
    assert_eq!(npmi_value, npmi(&sets, &probs).unwrap());
}

#[test]
fn split_partitions_documents() {
    let dir = tempfile::tempdir().unwrap();
    let (train, test) = (dir.path().join("train.txt"), dir.path().join("test.txt"));
    let code = dispatch(&[
        "split",
        "--corpus",
        p(&fixture("planted/corpus.txt")),
        "--train-out",
        p(&train),
        "--test-out",
        p(&test),
    ]);
    assert_eq!(code, 0);
    let lines = |f: &Path| fs::read_to_string(f).unwrap().lines().count();
    assert_eq!((lines(&train), lines(&test)), (600, 400));
}

#[test]
fn exit_codes_by_failure_kind() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(dispatch(&["run", "--corpus"]), 2);
    assert_eq!(dispatch(&["frobnicate"]), 2);

    let missing = dir.path().join("nope.txt");
    let code = dispatch(&[
        "vocab",
        "--corpus",
        p(&missing),
        "--seeds",
        p(&fixture("planted/seeds.txt")),
        "--out",
        p(&dir.path().join("t.txt")),
    ]);
    assert_eq!(code, 3);

    let bad_cfg = dir.path().join("bad.cfg");
    fs::write(&bad_cfg, "no_such_key=1\n").unwrap();
    assert_eq!(run_quick(&dir.path().join("o1"), &bad_cfg), 4);

    let short_cfg = dir.path().join("short.cfg");
    fs::write(&short_cfg, "iterations=1\n").unwrap();
    assert_eq!(run_quick(&dir.path().join("o2"), &short_cfg), 4);

    let bad_emb = dir.path().join("bad.emb");
    fs::write(&bad_emb, "1 2\nalpha\t1.0 nan\n").unwrap();
    let cfg = dir.path().join("quick.cfg");
    fs::write(&cfg, QUICK).unwrap();
    let code = dispatch(&[
        "run",
        "--corpus",
        p(&fixture("planted/corpus.txt")),
        "--seeds",
        p(&fixture("planted/seeds.txt")),
        "--embeddings",
        p(&bad_emb),
        "--config",
        p(&cfg),
        "--out",
        p(&dir.path().join("o3")),
    ]);
    assert_eq!(code, 5);

    let partial = dir.path().join("partial.tsv");
    fs::write(&partial, "ann1\t0\tapple\t1\n").unwrap();
    let code = dispatch(&[
        "eval",
        "--topics",
        p(&fixture("metrics/topics.txt")),
        "--test-corpus",
        p(&fixture("metrics/test_corpus.txt")),
        "--annotations",
        p(&partial),
    ]);
    assert_eq!(code, 5);
}
