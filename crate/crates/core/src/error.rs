use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by every stage of topic discovery.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("empty corpus: no documents remain after filtering with min_count={min_count}")]
    EmptyCorpus { min_count: u64 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },
    #[error("embedding table is missing {} term(s): {}", .0.len(), preview(.0))]
    MissingTerms(Vec<String>),
    #[error("not enough distinct terms: need {needed}, have {available}")]
    InsufficientTerms { needed: usize, available: usize },
    #[error("category {category} ({seed:?}) ran out of positive-score candidates at size {placed}")]
    CategoryExhausted {
        category: usize,
        seed: String,
        placed: usize,
    },
    #[error("topic set {category} references term id {term} outside the vocabulary")]
    UnknownTerm { category: usize, term: usize },
    #[error("empty term set")]
    EmptySet,
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("missing annotation(s): {}", preview(.0))]
    MissingJudgments(Vec<String>),
    #[error("iteration {iteration}: {source}")]
    Iteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl AsRef<str>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.as_ref().to_string(),
            line,
            message: message.into(),
        }
    }

    /// The innermost error, with iteration wrappers removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::Iteration { source, .. } => source.root(),
            other => other,
        }
    }
}

fn preview(items: &[String]) -> String {
    const SHOWN: usize = 10;
    let mut out = items
        .iter()
        .take(SHOWN)
        .map(|s| format!("{s:?}"))
        .collect::<Vec<_>>()
        .join(", ");
    if items.len() > SHOWN {
        out.push_str(&format!(", ... ({} more)", items.len() - SHOWN));
    }
    out
}
