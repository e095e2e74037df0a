//! End-to-end topic discovery: seed-nearest initialization from the general
//! table, then `iterations` rounds of retraining the local model against the
//! frozen sets, ranking under both tables, fusing, and rebuilding every set
//! from scratch at size `(t + 1) * n`.

use std::fs;
use std::path::{Path, PathBuf};

use log::info;

use crate::corpus::Corpus;
use crate::ensemble::{build_ranked_lists, expand_topic_sets, fuse, fused_tsv, EnsembleConfig, FusedEntry};
use crate::error::{Error, Result};
use crate::general::{init_topic_sets, GeneralEmbeddingTable};
use crate::local::{train, TrainConfig};
use crate::topics::{NamedTopics, TopicSets};
use crate::vectors::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// Terms added to every set per iteration (also the initial set size).
    pub n: usize,
    /// Number of refinement iterations `T`.
    pub iterations: usize,
    pub ensemble: EnsembleConfig,
    pub train: TrainConfig,
    pub final_top_k: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            n: 3,
            iterations: 4,
            ensemble: EnsembleConfig::default(),
            train: TrainConfig::default(),
            final_top_k: 10,
        }
    }
}

impl PipelineConfig {
    pub fn final_set_size(&self) -> usize {
        (self.iterations + 1) * self.n
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("N must be at least 1".into()));
        }
        if self.final_top_k == 0 {
            return Err(Error::Config("final_top_k must be at least 1".into()));
        }
        if self.final_top_k > self.final_set_size() {
            return Err(Error::Config(format!(
                "final_top_k={} exceeds the final set size (T+1)*N={}",
                self.final_top_k,
                self.final_set_size()
            )));
        }
        self.ensemble.validate()?;
        self.train.validate()
    }
}

/// State after one refinement iteration.
#[derive(Debug, Clone)]
pub struct IterationRecord {
    pub iteration: usize,
    pub sets: TopicSets,
    /// Fused candidates per category; empty when the iteration was restored
    /// from a checkpoint.
    pub fused: Vec<Vec<FusedEntry>>,
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub initial: TopicSets,
    pub iterations: Vec<IterationRecord>,
    /// Final sets truncated to `final_top_k`.
    pub topics: TopicSets,
}

/// Per-iteration sets and fused scores on disk, keyed by an input
/// fingerprint. A directory written for different inputs is reset.
#[derive(Debug, Clone)]
pub struct Checkpoints {
    dir: PathBuf,
    fingerprint: String,
}

impl Checkpoints {
    pub fn new(dir: impl Into<PathBuf>, fingerprint: impl Into<String>) -> Self {
        Checkpoints {
            dir: dir.into(),
            fingerprint: fingerprint.into(),
        }
    }

    fn sets_path(&self, t: usize) -> PathBuf {
        self.dir.join(format!("sets_iter{t}.txt"))
    }

    fn scores_path(&self, t: usize) -> PathBuf {
        self.dir.join(format!("scores_iter{t}.tsv"))
    }

    fn io<T>(&self, path: &Path, r: std::io::Result<T>) -> Result<T> {
        r.map_err(|e| Error::io(path, e))
    }

    /// Ensures the directory belongs to this fingerprint and returns the
    /// most advanced stored iteration, if any.
    fn prepare(&self, max_t: usize) -> Result<Option<usize>> {
        self.io(&self.dir, fs::create_dir_all(&self.dir))?;
        let fp = self.dir.join("fingerprint");
        let matches = fs::read_to_string(&fp)
            .map(|s| s.trim() == self.fingerprint)
            .unwrap_or(false);
        if !matches {
            for t in 0..=max_t.max(64) {
                let _ = fs::remove_file(self.sets_path(t));
                let _ = fs::remove_file(self.scores_path(t));
            }
            self.io(&fp, fs::write(&fp, format!("{}\n", self.fingerprint)))?;
            return Ok(None);
        }
        Ok((0..=max_t).rev().find(|&t| self.sets_path(t).exists()))
    }

    fn store(&self, t: usize, sets: &TopicSets, fused: &[Vec<FusedEntry>], corpus: &Corpus) -> Result<()> {
        sets.named(corpus.vocabulary()).write(self.sets_path(t))?;
        if !fused.is_empty() {
            let p = self.scores_path(t);
            self.io(&p, fs::write(&p, fused_tsv(fused, corpus.vocabulary())))?;
        }
        Ok(())
    }

    fn load(&self, t: usize, corpus: &Corpus) -> Result<TopicSets> {
        let named = NamedTopics::read(self.sets_path(t))?;
        TopicSets::from_named(&named, corpus.vocabulary())
    }
}

/// Runs the full procedure and returns the truncated final sets.
pub fn run(
    corpus: &Corpus,
    seeds: &[String],
    general: &GeneralEmbeddingTable,
    config: &PipelineConfig,
) -> Result<TopicSets> {
    Ok(run_detailed(corpus, seeds, general, config, None)?.topics)
}

pub fn run_detailed(
    corpus: &Corpus,
    seeds: &[String],
    general: &GeneralEmbeddingTable,
    config: &PipelineConfig,
    checkpoints: Option<&Checkpoints>,
) -> Result<PipelineOutput> {
    config.validate()?;
    let vocab = corpus.vocabulary();
    let general_terms = general.vocabulary_matrix(vocab)?.normalized();

    let resume_from = match checkpoints {
        Some(c) => c.prepare(config.iterations)?,
        None => None,
    };

    let initial = match (checkpoints, resume_from) {
        (Some(c), Some(_)) => c.load(0, corpus)?,
        _ => {
            let s = init_topic_sets(general, seeds, vocab, config.n)?;
            if let Some(c) = checkpoints {
                c.store(0, &s, &[], corpus)?;
            }
            s
        }
    };
    info!("initialized {} topic sets of size {}", initial.len(), config.n);

    let mut current = initial.clone();
    let mut iterations = Vec::with_capacity(config.iterations);
    for t in 1..=config.iterations {
        if let (Some(c), Some(done)) = (checkpoints, resume_from) {
            if t <= done {
                current = c.load(t, corpus)?;
                info!("iteration {t}: restored from checkpoint");
                iterations.push(IterationRecord {
                    iteration: t,
                    sets: current.clone(),
                    fused: Vec::new(),
                });
                continue;
            }
        }
        let record = iterate(corpus, &general_terms, &current, config, t).map_err(|e| Error::Iteration {
            iteration: t,
            source: Box::new(e),
        })?;
        if let Some(c) = checkpoints {
            c.store(t, &record.sets, &record.fused, corpus)?;
        }
        current = record.sets.clone();
        iterations.push(record);
    }

    Ok(PipelineOutput {
        topics: current.truncated(config.final_top_k),
        initial,
        iterations,
    })
}

fn iterate(
    corpus: &Corpus,
    general_terms: &Matrix,
    current: &TopicSets,
    config: &PipelineConfig,
    t: usize,
) -> Result<IterationRecord> {
    let train_cfg = TrainConfig {
        rng_seed: config.train.rng_seed.wrapping_add(t as u64),
        ..config.train.clone()
    };
    let model = train(corpus, current, &train_cfg)?;
    let local_terms = model.u.normalized();
    let rankings = build_ranked_lists(current, general_terms, &local_terms, &config.ensemble)?;
    let fused: Vec<Vec<FusedEntry>> = rankings.iter().map(|r| fuse(r, config.ensemble.rho)).collect();
    let scores: Vec<Vec<_>> = fused
        .iter()
        .map(|f| f.iter().map(|e| (e.term, e.score)).collect())
        .collect();
    let target = (t + 1) * config.n;
    let sets = expand_topic_sets(&scores, target, current.seeds())?;
    info!("iteration {t}: expanded to {target} terms per set");
    Ok(IterationRecord {
        iteration: t,
        sets,
        fused,
    })
}
