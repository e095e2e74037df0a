//! Command-line entry point: `vocab`, `split`, `run` and `eval`.
//!
//! Failures print a single `error<TAB><kind><TAB><message>` line on stderr
//! and exit with a code specific to the kind (see [`ExitKind`]).

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::corpus::{load_corpus, split_indices, tokenize, DEFAULT_MIN_COUNT};
use crate::error::Error;
use crate::eval::{diversity, lcp, macc, metric_report, npmi, AnnotationSet, DocProbabilities};
use crate::general::load_embedding_file;
use crate::pipeline::{run_detailed, Checkpoints};
use crate::topics::NamedTopics;

#[derive(Debug, Parser)]
#[command(name = "seedtopic", version, about = "Seed-guided topic discovery")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the term list (vocabulary, then seeds) for the external encoder
    Vocab {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        seeds: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MIN_COUNT)]
        min_count: u64,
        /// Keep token case as written
        #[arg(long)]
        no_lowercase: bool,
        #[arg(long)]
        out: PathBuf,
        /// Also write a `term<TAB>count` vocabulary dump
        #[arg(long)]
        counts: Option<PathBuf>,
    },
    /// Split a corpus file into training and test files by document
    Split {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value_t = 0.6)]
        ratio: f64,
        #[arg(long, default_value_t = 0)]
        rng_seed: u64,
        #[arg(long)]
        train_out: PathBuf,
        #[arg(long)]
        test_out: PathBuf,
    },
    /// Discover topics and write `topics.txt` plus `manifest.json`
    Run {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        seeds: PathBuf,
        #[arg(long)]
        embeddings: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        rng_seed: Option<u64>,
        /// Write the last iteration's fused ranking table
        #[arg(long)]
        debug_scores: bool,
    },
    /// Compute coherence, diversity and (optionally) accuracy metrics
    Eval {
        #[arg(long)]
        topics: PathBuf,
        #[arg(long)]
        test_corpus: PathBuf,
        #[arg(long)]
        annotations: Option<PathBuf>,
        #[arg(long)]
        no_lowercase: bool,
        /// Write the report here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Process exit codes by failure kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    Usage = 2,
    Io = 3,
    Config = 4,
    Input = 5,
    Runtime = 6,
}

impl ExitKind {
    pub fn code(self) -> i32 {
        self as i32
    }

    fn name(self) -> &'static str {
        match self {
            ExitKind::Usage => "usage",
            ExitKind::Io => "io",
            ExitKind::Config => "config",
            ExitKind::Input => "input",
            ExitKind::Runtime => "runtime",
        }
    }

    pub fn of(err: &Error) -> ExitKind {
        match err.root() {
            Error::Io { .. } => ExitKind::Io,
            Error::Config(_) => ExitKind::Config,
            Error::Parse { .. }
            | Error::EmptyCorpus { .. }
            | Error::MissingTerms(_)
            | Error::MissingJudgments(_)
            | Error::UnknownTerm { .. } => ExitKind::Input,
            _ => ExitKind::Runtime,
        }
    }
}

fn report(kind: ExitKind, message: &str) -> i32 {
    let one_line = message.replace(['\n', '\t'], " ");
    eprintln!("error\t{}\t{one_line}", kind.name());
    kind.code()
}

/// Parses `argv` (including the program name) and runs the subcommand.
pub fn command_dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments");
            return report(ExitKind::Usage, first.trim_start_matches("error: "));
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => report(ExitKind::of(&e), &e.to_string()),
    }
}

fn read_seeds(path: &Path) -> crate::Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let seeds: Vec<String> = text
        .lines()
        .map(|l| l.trim_end_matches('\r').trim())
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect();
    if seeds.is_empty() {
        return Err(Error::Config(format!("{}: no seeds", path.display())));
    }
    Ok(seeds)
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> crate::Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn sha256_file(path: &Path) -> crate::Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Record of one `run` invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_path: Option<PathBuf>,
    pub corpus_path: PathBuf,
    pub seeds_path: PathBuf,
    pub embeddings_path: PathBuf,
    pub output_dir: PathBuf,
    pub config: String,
    pub input_hashes: Vec<(String, String)>,
    pub stages: Vec<StageRecord>,
    pub topics_hash: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub name: String,
    pub started_unix: u64,
    pub finished_unix: Option<u64>,
}

impl RunManifest {
    fn begin(&mut self, name: &str) {
        self.stages.push(StageRecord {
            name: name.to_string(),
            started_unix: unix_now(),
            finished_unix: None,
        });
    }

    fn finish(&mut self) {
        if let Some(s) = self.stages.last_mut() {
            s.finished_unix = Some(unix_now());
        }
    }

    /// Digest of everything the topics depend on.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        for (name, digest) in &self.input_hashes {
            h.update(name.as_bytes());
            h.update(digest.as_bytes());
        }
        h.update(self.config.as_bytes());
        hex::encode(h.finalize())
    }

    fn save(&self) -> crate::Result<()> {
        let json = serde_json::to_string_pretty(self).expect("manifest serializes");
        write(&self.output_dir.join("manifest.json"), json + "\n")
    }
}

fn execute(cmd: Command) -> crate::Result<()> {
    match cmd {
        Command::Vocab {
            corpus,
            seeds,
            min_count,
            no_lowercase,
            out,
            counts,
        } => {
            let corpus = load_corpus(&corpus, min_count, !no_lowercase)?;
            let seeds = read_seeds(&seeds)?;
            let vocab = corpus.vocabulary();
            let mut text = String::new();
            let mut seen = std::collections::HashSet::new();
            for t in vocab.terms().chain(seeds.iter().map(String::as_str)) {
                if seen.insert(t) {
                    text.push_str(t);
                    text.push('\n');
                }
            }
            write(&out, text)?;
            if let Some(p) = counts {
                let mut buf = Vec::new();
                vocab.write_tsv(&mut buf).map_err(|e| Error::io(&p, e))?;
                write(&p, buf)?;
            }
            Ok(())
        }
        Command::Split {
            corpus,
            ratio,
            rng_seed,
            train_out,
            test_out,
        } => {
            if !(ratio > 0.0 && ratio < 1.0) {
                return Err(Error::Config(format!("ratio must lie in (0, 1), got {ratio}")));
            }
            let text = fs::read_to_string(&corpus).map_err(|e| Error::io(&corpus, e))?;
            let docs = tokenize(&text, false);
            let (train, test) = split_indices(docs.len(), ratio, rng_seed);
            let render = |idx: &[usize]| -> String { idx.iter().map(|&d| docs[d].join(" ") + "\n").collect() };
            write(&train_out, render(&train))?;
            write(&test_out, render(&test))
        }
        Command::Run {
            corpus,
            seeds,
            embeddings,
            config,
            out,
            threads,
            rng_seed,
            debug_scores,
        } => {
            let mut cfg = match &config {
                Some(p) => RunConfig::load(p)?,
                None => RunConfig::default(),
            };
            if let Some(t) = threads {
                cfg.pipeline.train.threads = t;
            }
            if let Some(s) = rng_seed {
                cfg.pipeline.train.rng_seed = s;
            }
            cfg.validate()?;

            let mut input_hashes = vec![
                ("corpus".to_string(), sha256_file(&corpus)?),
                ("seeds".to_string(), sha256_file(&seeds)?),
                ("embeddings".to_string(), sha256_file(&embeddings)?),
            ];
            if let Some(p) = &config {
                input_hashes.push(("config".to_string(), sha256_file(p)?));
            }
            let mut manifest = RunManifest {
                config_path: config.clone(),
                corpus_path: corpus.clone(),
                seeds_path: seeds.clone(),
                embeddings_path: embeddings.clone(),
                output_dir: out.clone(),
                config: cfg.to_text(),
                input_hashes,
                stages: Vec::new(),
                topics_hash: None,
            };
            manifest.save()?;

            manifest.begin("load");
            let corpus_data = load_corpus(&corpus, cfg.min_count, cfg.lowercase)?;
            let seed_list = read_seeds(&seeds)?;
            let expected = corpus_data
                .vocabulary()
                .terms()
                .map(str::to_string)
                .chain(seed_list.iter().cloned())
                .collect::<Vec<_>>();
            let table = load_embedding_file(&embeddings, &expected)?;
            manifest.finish();

            manifest.begin("discover");
            manifest.save()?;
            let checkpoints = Checkpoints::new(out.join("checkpoints"), manifest.fingerprint());
            let output = run_detailed(&corpus_data, &seed_list, &table, &cfg.pipeline, Some(&checkpoints))?;
            manifest.finish();

            let topics_path = out.join("topics.txt");
            output.topics.named(corpus_data.vocabulary()).write(&topics_path)?;
            if debug_scores {
                if let Some(last) = output.iterations.last().filter(|r| !r.fused.is_empty()) {
                    write(
                        &out.join("scores.tsv"),
                        crate::ensemble::fused_tsv(&last.fused, corpus_data.vocabulary()),
                    )?;
                }
            }
            manifest.topics_hash = Some(sha256_file(&topics_path)?);
            manifest.save()
        }
        Command::Eval {
            topics,
            test_corpus,
            annotations,
            no_lowercase,
            out,
        } => {
            let named = NamedTopics::read(&topics)?;
            let probs = DocProbabilities::load(&test_corpus, !no_lowercase)?;
            let mut rows = vec![
                ("npmi", npmi(&named.sets, &probs)?),
                ("lcp", lcp(&named.sets, &probs)?),
                ("diversity", diversity(&named.sets)?),
            ];
            if let Some(p) = annotations {
                let ann = AnnotationSet::load(&p)?;
                let r = macc(&named.sets, &ann)?;
                if r.kappa_degenerate {
                    log::warn!("Fleiss' kappa undefined for these judgments; reporting 1.0");
                }
                rows.push(("macc", r.macc));
                rows.push(("fleiss_kappa", r.fleiss_kappa));
            }
            let text = metric_report(&rows);
            match out {
                Some(p) => write(&p, text),
                None => {
                    print!("{text}");
                    Ok(())
                }
            }
        }
    }
}
