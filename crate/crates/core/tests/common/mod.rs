#![allow(dead_code)]

use std::fs;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use seedtopic::corpus::{load_corpus, Corpus};
use seedtopic::general::{load_embedding_file, GeneralEmbeddingTable};
use seedtopic::pipeline::PipelineConfig;

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(rel)
}

pub fn read_lines(rel: &str) -> Vec<String> {
    fs::read_to_string(fixture(rel))
        .unwrap()
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(str::to_string)
        .collect()
}

pub struct Planted {
    pub corpus: Corpus,
    pub seeds: Vec<String>,
    pub general: GeneralEmbeddingTable,
    /// Planted sub-vocabulary of each seed, in seed order.
    pub truth: Vec<Vec<String>>,
}

pub fn planted() -> Planted {
    let corpus = load_corpus(fixture("planted/corpus.txt"), 3, true).unwrap();
    let seeds = read_lines("planted/seeds.txt");
    let mut wanted: Vec<String> = corpus.vocabulary().terms().map(str::to_string).collect();
    wanted.extend(seeds.iter().cloned());
    let general = load_embedding_file(fixture("planted/general.emb"), &wanted).unwrap();
    Planted {
        corpus,
        seeds,
        general,
        truth: vec![
            read_lines("planted/alpha_terms.txt"),
            read_lines("planted/beta_terms.txt"),
        ],
    }
}

/// Defaults with a smaller local model so a full run takes seconds.
pub fn planted_config() -> PipelineConfig {
    let mut cfg = PipelineConfig::default();
    cfg.train.dim = 32;
    cfg.train.epochs = 5;
    cfg.train.rng_seed = 1;
    cfg
}

/// Documents drawn from disjoint sub-vocabularies `c{k}_w{i}`, one cluster
/// per document, cycling through clusters.
pub fn clustered_docs(clusters: usize, words: usize, docs: usize, len: usize, seed: u64) -> Vec<Vec<String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..docs)
        .map(|d| {
            let c = d % clusters;
            (0..len)
                .map(|_| format!("c{c}_w{}", rng.random_range(0..words)))
                .collect()
        })
        .collect()
}
