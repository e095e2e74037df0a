//! Flat `key = value` run configuration. Blank lines and `#` comments are
//! ignored; unknown keys are rejected.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::corpus::DEFAULT_MIN_COUNT;
use crate::error::{Error, Result};
use crate::pipeline::PipelineConfig;

/// Everything a `run` needs besides its input files.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub pipeline: PipelineConfig,
    pub min_count: u64,
    pub lowercase: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            pipeline: PipelineConfig::default(),
            min_count: DEFAULT_MIN_COUNT,
            lowercase: true,
        }
    }
}

pub const KEYS: &[&str] = &[
    "n",
    "iterations",
    "rho",
    "top_m",
    "final_top_k",
    "dim",
    "window",
    "negatives",
    "epochs",
    "initial_lr",
    "rng_seed",
    "threads",
    "word_negative_power",
    "min_count",
    "lowercase",
];

fn value<T: FromStr>(key: &str, raw: &str, origin: &str, line: usize) -> Result<T> {
    raw.parse()
        .map_err(|_| Error::parse(origin, line, format!("invalid value {raw:?} for {key}")))
}

impl RunConfig {
    pub fn set(&mut self, key: &str, raw: &str, origin: &str, line: usize) -> Result<()> {
        let p = &mut self.pipeline;
        match key {
            "n" => p.n = value(key, raw, origin, line)?,
            "iterations" => p.iterations = value(key, raw, origin, line)?,
            "rho" => p.ensemble.rho = value(key, raw, origin, line)?,
            "top_m" => p.ensemble.top_m = value(key, raw, origin, line)?,
            "final_top_k" => p.final_top_k = value(key, raw, origin, line)?,
            "dim" => p.train.dim = value(key, raw, origin, line)?,
            "window" => p.train.window = value(key, raw, origin, line)?,
            "negatives" => p.train.negatives = value(key, raw, origin, line)?,
            "epochs" => p.train.epochs = value(key, raw, origin, line)?,
            "initial_lr" => p.train.initial_lr = value(key, raw, origin, line)?,
            "rng_seed" => p.train.rng_seed = value(key, raw, origin, line)?,
            "threads" => p.train.threads = value(key, raw, origin, line)?,
            "word_negative_power" => p.train.word_negative_power = value(key, raw, origin, line)?,
            "min_count" => self.min_count = value(key, raw, origin, line)?,
            "lowercase" => self.lowercase = value(key, raw, origin, line)?,
            _ => {
                return Err(Error::Config(format!(
                    "{origin}:{line}: unknown key {key:?} (known: {})",
                    KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Parses config text over the defaults, then validates the result.
    pub fn parse(text: &str, origin: &str) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, raw) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(origin, i + 1, "expected key=value"))?;
            cfg.set(key.trim(), raw.trim(), origin, i + 1)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<RunConfig> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_count == 0 {
            return Err(Error::Config("min_count must be at least 1".into()));
        }
        self.pipeline.validate()
    }

    /// Canonical text with every key, in [`KEYS`] order.
    pub fn to_text(&self) -> String {
        let p = &self.pipeline;
        let t = &p.train;
        let mut out = String::new();
        let rows: [(&str, String); 15] = [
            ("n", p.n.to_string()),
            ("iterations", p.iterations.to_string()),
            ("rho", p.ensemble.rho.to_string()),
            ("top_m", p.ensemble.top_m.to_string()),
            ("final_top_k", p.final_top_k.to_string()),
            ("dim", t.dim.to_string()),
            ("window", t.window.to_string()),
            ("negatives", t.negatives.to_string()),
            ("epochs", t.epochs.to_string()),
            ("initial_lr", t.initial_lr.to_string()),
            ("rng_seed", t.rng_seed.to_string()),
            ("threads", t.threads.to_string()),
            ("word_negative_power", t.word_negative_power.to_string()),
            ("min_count", self.min_count.to_string()),
            ("lowercase", self.lowercase.to_string()),
        ];
        for (k, v) in rows {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }
}
