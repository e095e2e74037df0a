//! General-purpose term vectors produced by an external encoder, and the
//! initial topic sets derived from them.
//!
//! Exchange format: a `<count> <dim>` header line, then one
//! `<term><TAB><dim space-separated floats>` line per term. Term strings may
//! contain spaces but never tabs.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::corpus::{TermId, Vocabulary};
use crate::error::{Error, Result};
use crate::topics::{fill_round_robin, TopicSets};
use crate::vectors::{dot, Matrix};

/// Term string to vector map with a shared dimension.
#[derive(Debug, Clone)]
pub struct GeneralEmbeddingTable {
    index: HashMap<String, usize>,
    terms: Vec<String>,
    vectors: Matrix,
}

impl GeneralEmbeddingTable {
    pub fn from_entries<S, V>(dim: usize, entries: impl IntoIterator<Item = (S, V)>) -> Result<Self>
    where
        S: Into<String>,
        V: AsRef<[f64]>,
    {
        let mut index = HashMap::new();
        let mut terms = Vec::new();
        let mut data = Vec::new();
        for (term, v) in entries {
            let term = term.into();
            let v = v.as_ref();
            if v.len() != dim {
                return Err(Error::Config(format!(
                    "vector for {term:?} has {} values, expected {dim}",
                    v.len()
                )));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::Config(format!("vector for {term:?} is not finite")));
            }
            if index.insert(term.clone(), terms.len()).is_some() {
                return Err(Error::Config(format!("duplicate vector for {term:?}")));
            }
            terms.push(term);
            data.extend_from_slice(v);
        }
        let vectors = Matrix::from_vec(terms.len(), dim, data);
        Ok(GeneralEmbeddingTable { index, terms, vectors })
    }

    pub fn dim(&self) -> usize {
        self.vectors.dim()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn get(&self, term: &str) -> Option<&[f64]> {
        self.index.get(term).map(|&i| self.vectors.row(i))
    }

    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.terms.iter().map(String::as_str)
    }

    /// Vectors of the vocabulary, row `i` holding term id `i`.
    pub fn vocabulary_matrix(&self, vocab: &Vocabulary) -> Result<Matrix> {
        let mut missing = Vec::new();
        let mut out = Matrix::zeros(vocab.len(), self.dim());
        for (id, term) in vocab.terms().enumerate() {
            match self.get(term) {
                Some(v) => out.row_mut(id).copy_from_slice(v),
                None => missing.push(term.to_string()),
            }
        }
        if missing.is_empty() {
            Ok(out)
        } else {
            Err(Error::MissingTerms(missing))
        }
    }

    pub fn seed_matrix(&self, seeds: &[String]) -> Result<Matrix> {
        let missing: Vec<String> = seeds.iter().filter(|s| self.get(s).is_none()).cloned().collect();
        if !missing.is_empty() {
            return Err(Error::MissingTerms(missing));
        }
        Ok(Matrix::from_rows(
            self.dim(),
            seeds.iter().map(|s| self.get(s).expect("checked above")),
        ))
    }

    pub fn to_file_string(&self) -> String {
        format_exchange(
            self.dim(),
            self.terms
                .iter()
                .enumerate()
                .map(|(i, t)| (t.as_str(), self.vectors.row(i))),
        )
    }
}

/// Renders rows in the exchange format. Floats use the shortest
/// representation that round-trips.
pub fn format_exchange<'a>(dim: usize, rows: impl ExactSizeIterator<Item = (&'a str, &'a [f64])>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", rows.len(), dim);
    for (term, v) in rows {
        out.push_str(term);
        out.push('\t');
        for (k, x) in v.iter().enumerate() {
            if k > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{x}");
        }
        out.push('\n');
    }
    out
}

/// Parses exchange-format text, keeping every row.
pub fn parse_embeddings(text: &str, origin: &str) -> Result<GeneralEmbeddingTable> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(origin, 1, "missing '<count> <dim>' header"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let parse_usize = |s: &str| s.parse::<usize>().ok();
    let (count, dim) = match fields.as_slice() {
        [c, d] => match (parse_usize(c), parse_usize(d)) {
            (Some(c), Some(d)) if d > 0 => (c, d),
            _ => return Err(Error::parse(origin, 1, format!("bad header {header:?}"))),
        },
        _ => return Err(Error::parse(origin, 1, format!("bad header {header:?}"))),
    };

    let mut entries: Vec<(String, Vec<f64>)> = Vec::with_capacity(count);
    let mut seen = HashSet::new();
    for (i, line) in lines {
        let lineno = i + 1;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let (term, values) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(origin, lineno, "expected '<term><TAB><floats>'"))?;
        let mut v = Vec::with_capacity(dim);
        for tok in values.split_whitespace() {
            let x: f64 = tok
                .parse()
                .map_err(|_| Error::parse(origin, lineno, format!("malformed float {tok:?}")))?;
            if !x.is_finite() {
                return Err(Error::parse(origin, lineno, format!("non-finite value {tok:?}")));
            }
            v.push(x);
        }
        if v.len() != dim {
            return Err(Error::parse(
                origin,
                lineno,
                format!("{} values for {term:?}, header says dim {dim}", v.len()),
            ));
        }
        if !seen.insert(term.to_string()) {
            return Err(Error::parse(origin, lineno, format!("duplicate term {term:?}")));
        }
        entries.push((term.to_string(), v));
    }
    if entries.len() != count {
        return Err(Error::parse(
            origin,
            1,
            format!("header declares {count} rows, found {}", entries.len()),
        ));
    }
    GeneralEmbeddingTable::from_entries(dim, entries)
}

/// Loads an exchange file and restricts it to `expected_terms`, failing with
/// the full list of terms that have no vector.
pub fn load_embedding_file<S: AsRef<str>>(
    path: impl AsRef<Path>,
    expected_terms: impl IntoIterator<Item = S>,
) -> Result<GeneralEmbeddingTable> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let table = parse_embeddings(&text, &path.display().to_string())?;
    restrict(&table, expected_terms)
}

pub fn restrict<S: AsRef<str>>(
    table: &GeneralEmbeddingTable,
    expected_terms: impl IntoIterator<Item = S>,
) -> Result<GeneralEmbeddingTable> {
    let mut missing = Vec::new();
    let mut keep = Vec::new();
    let mut seen = HashSet::new();
    for t in expected_terms {
        let t = t.as_ref();
        if !seen.insert(t.to_string()) {
            continue;
        }
        match table.get(t) {
            Some(v) => keep.push((t.to_string(), v.to_vec())),
            None => missing.push(t.to_string()),
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingTerms(missing));
    }
    GeneralEmbeddingTable::from_entries(table.dim(), keep)
}

/// Candidates for every seed ordered by descending cosine with the seed,
/// ties broken by lower term id. An in-vocabulary seed's own term leads its
/// list.
pub fn seed_rankings(table: &GeneralEmbeddingTable, seeds: &[String], vocab: &Vocabulary) -> Result<Vec<Vec<TermId>>> {
    let terms = table.vocabulary_matrix(vocab)?.normalized();
    let seed_vecs = table.seed_matrix(seeds)?.normalized();
    Ok(seeds
        .iter()
        .enumerate()
        .map(|(i, seed)| {
            let target = seed_vecs.row(i);
            let own = vocab.seed_term(seed);
            let mut scored: Vec<(TermId, f64)> = (0..vocab.len())
                .map(|w| {
                    let s = if Some(w) == own {
                        f64::INFINITY
                    } else {
                        dot(terms.row(w), target).clamp(-1.0, 1.0)
                    };
                    (w, s)
                })
                .collect();
            sort_by_score(&mut scored);
            scored.into_iter().map(|(w, _)| w).collect()
        })
        .collect())
}

/// Descending by score, then ascending by id.
pub(crate) fn sort_by_score(scored: &mut [(TermId, f64)]) {
    scored.sort_unstable_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
}

/// Builds the initial sets by `n` round-robin rounds over the seeds, each
/// pick being the unplaced term closest to the seed.
pub fn init_topic_sets(
    table: &GeneralEmbeddingTable,
    seeds: &[String],
    vocab: &Vocabulary,
    n: usize,
) -> Result<TopicSets> {
    if n == 0 {
        return Err(Error::Config("initial set size N must be at least 1".into()));
    }
    if seeds.is_empty() {
        return Err(Error::Config("at least one seed is required".into()));
    }
    let needed = n * seeds.len();
    if needed > vocab.len() {
        return Err(Error::InsufficientTerms {
            needed,
            available: vocab.len(),
        });
    }
    let ranked = seed_rankings(table, seeds, vocab)?;
    fill_round_robin(seeds, &ranked, n, vocab.len()).map_err(|_| Error::InsufficientTerms {
        needed,
        available: vocab.len(),
    })
}
