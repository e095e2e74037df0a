mod common;

use std::fs;

use seedtopic::general::init_topic_sets;
use seedtopic::pipeline::{run, run_detailed, Checkpoints, PipelineConfig};
use seedtopic::Error;

use common::{planted, planted_config};

fn quick() -> PipelineConfig {
    let mut cfg = planted_config();
    cfg.iterations = 2;
    cfg.final_top_k = 8;
    cfg.train.dim = 12;
    cfg.train.epochs = 2;
    cfg
}

#[test]
fn resumes_from_checkpoints() {
    let p = planted();
    let dir = tempfile::tempdir().unwrap();
    let ck = Checkpoints::new(dir.path().join("ck"), "fp-1");
    let first = run_detailed(&p.corpus, &p.seeds, &p.general, &quick(), Some(&ck)).unwrap();
    assert!(first.iterations.iter().all(|r| !r.fused.is_empty()));
    assert!(dir.path().join("ck/scores_iter2.tsv").exists());

    let again = run_detailed(&p.corpus, &p.seeds, &p.general, &quick(), Some(&ck)).unwrap();
    assert!(again.iterations.iter().all(|r| r.fused.is_empty()));
    assert_eq!(again.topics, first.topics);

    // drop the last iteration: only that one is recomputed
    fs::remove_file(dir.path().join("ck/sets_iter2.txt")).unwrap();
    let partial = run_detailed(&p.corpus, &p.seeds, &p.general, &quick(), Some(&ck)).unwrap();
    assert!(partial.iterations[0].fused.is_empty());
    assert!(!partial.iterations[1].fused.is_empty());
    assert_eq!(partial.topics, first.topics);
}

#[test]
fn other_fingerprint_resets_checkpoints() {
    let p = planted();
    let dir = tempfile::tempdir().unwrap();
    let ck = Checkpoints::new(dir.path(), "fp-a");
    run_detailed(&p.corpus, &p.seeds, &p.general, &quick(), Some(&ck)).unwrap();
    let other = Checkpoints::new(dir.path(), "fp-b");
    let out = run_detailed(&p.corpus, &p.seeds, &p.general, &quick(), Some(&other)).unwrap();
    assert!(out.iterations.iter().all(|r| !r.fused.is_empty()));
    assert_eq!(
        fs::read_to_string(dir.path().join("fingerprint")).unwrap().trim(),
        "fp-b"
    );
}

#[test]
fn zero_iterations_is_truncated_init() {
    let p = planted();
    let cfg = PipelineConfig {
        iterations: 0,
        final_top_k: 2,
        ..quick()
    };
    let topics = run(&p.corpus, &p.seeds, &p.general, &cfg).unwrap();
    let init = init_topic_sets(&p.general, &p.seeds, p.corpus.vocabulary(), cfg.n).unwrap();
    assert_eq!(topics, init.truncated(2));
}

#[test]
fn multithreaded_run_keeps_structure() {
    let p = planted();
    let mut cfg = quick();
    cfg.train.threads = 4;
    let out = run_detailed(&p.corpus, &p.seeds, &p.general, &cfg, None).unwrap();
    for (t, r) in out.iterations.iter().enumerate() {
        assert!(r.sets.is_disjoint());
        assert!(r.sets.sets().iter().all(|s| s.len() == (t + 2) * cfg.n));
    }
    assert!(out.topics.sets().iter().all(|s| s.len() == 8));
}

#[test]
fn iteration_failures_name_the_iteration() {
    let p = planted();
    let mut cfg = quick();
    // two lists of 2 cannot supply the 6 terms the first expansion needs
    cfg.ensemble.top_m = 2;
    let err = run(&p.corpus, &p.seeds, &p.general, &cfg).unwrap_err();
    match err {
        Error::Iteration { iteration, source } => {
            assert_eq!(iteration, 1);
            assert!(matches!(*source, Error::CategoryExhausted { .. }), "{source}");
        }
        other => panic!("unexpected {other}"),
    }
}
