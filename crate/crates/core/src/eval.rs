//! Topic quality metrics on a held-out corpus and from human judgments.
//!
//! Coherence metrics use document-level co-occurrence with every probability
//! smoothed by `ε = 1/|D_test|`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::corpus::{tokenize, Corpus};
use crate::error::{Error, Result};

/// Document frequencies of a held-out corpus.
#[derive(Debug, Clone)]
pub struct DocProbabilities {
    doc_count: usize,
    postings: HashMap<String, Vec<u32>>,
    epsilon: f64,
}

impl DocProbabilities {
    pub fn from_documents<D, T>(docs: D) -> Result<Self>
    where
        D: IntoIterator,
        D::Item: IntoIterator<Item = T>,
        T: AsRef<str>,
    {
        let mut postings: HashMap<String, Vec<u32>> = HashMap::new();
        let mut doc_count = 0usize;
        for (d, doc) in docs.into_iter().enumerate() {
            doc_count += 1;
            for tok in doc {
                let list = postings.entry(tok.as_ref().to_string()).or_default();
                if list.last() != Some(&(d as u32)) {
                    list.push(d as u32);
                }
            }
        }
        if doc_count == 0 {
            return Err(Error::EmptyCorpus { min_count: 1 });
        }
        Ok(DocProbabilities {
            doc_count,
            postings,
            epsilon: 1.0 / doc_count as f64,
        })
    }

    pub fn from_corpus(corpus: &Corpus) -> Result<Self> {
        Self::from_documents((0..corpus.len()).map(|d| corpus.document_strings(d)))
    }

    /// Reads an unfiltered evaluation corpus (one document per line).
    pub fn load(path: impl AsRef<Path>, lowercase: bool) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_documents(tokenize(&text, lowercase))
    }

    pub fn doc_count(&self) -> usize {
        self.doc_count
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Fraction of documents containing `w`.
    pub fn single(&self, w: &str) -> f64 {
        self.postings.get(w).map_or(0, Vec::len) as f64 / self.doc_count as f64
    }

    /// Fraction of documents containing both terms.
    pub fn pair(&self, a: &str, b: &str) -> f64 {
        let (Some(pa), Some(pb)) = (self.postings.get(a), self.postings.get(b)) else {
            return 0.0;
        };
        let (mut i, mut j, mut n) = (0, 0, 0usize);
        while i < pa.len() && j < pb.len() {
            match pa[i].cmp(&pb[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        n as f64 / self.doc_count as f64
    }

    /// Smoothed NPMI of one pair. A zero normalizer (smoothed joint
    /// probability of exactly 1) contributes 0.
    pub fn pair_npmi(&self, a: &str, b: &str) -> f64 {
        let e = self.epsilon;
        let joint = self.pair(a, b) + e;
        let denom = -joint.ln();
        if denom == 0.0 {
            return 0.0;
        }
        (joint / ((self.single(a) + e) * (self.single(b) + e))).ln() / denom
    }

    /// Smoothed `log P(b | a)`.
    pub fn pair_lcp(&self, a: &str, b: &str) -> f64 {
        let e = self.epsilon;
        ((self.pair(a, b) + e) / (self.single(a) + e)).ln()
    }
}

fn check_pairs(sets: &[Vec<String>]) -> Result<()> {
    if sets.is_empty() {
        return Err(Error::EmptySet);
    }
    if let Some(i) = sets.iter().position(|s| s.len() < 2) {
        return Err(Error::InsufficientData(format!(
            "topic {i} has {} term(s); coherence needs at least 2",
            sets[i].len()
        )));
    }
    Ok(())
}

fn mean_over_pairs(set: &[String], f: impl Fn(&str, &str) -> f64) -> f64 {
    let mut total = 0.0;
    let mut n = 0usize;
    for j in 0..set.len() {
        for k in j + 1..set.len() {
            total += f(&set[j], &set[k]);
            n += 1;
        }
    }
    total / n as f64
}

/// Mean over topics of the mean NPMI over unordered term pairs.
pub fn npmi(sets: &[Vec<String>], probs: &DocProbabilities) -> Result<f64> {
    check_pairs(sets)?;
    let sum: f64 = sets
        .iter()
        .map(|s| mean_over_pairs(s, |a, b| probs.pair_npmi(a, b)))
        .sum();
    Ok(sum / sets.len() as f64)
}

/// Mean over topics of `log P(w_k | w_j)` over pairs `j < k` in set order.
pub fn lcp(sets: &[Vec<String>], probs: &DocProbabilities) -> Result<f64> {
    check_pairs(sets)?;
    let sum: f64 = sets
        .iter()
        .map(|s| mean_over_pairs(s, |a, b| probs.pair_lcp(a, b)))
        .sum();
    Ok(sum / sets.len() as f64)
}

/// Fraction of unique terms across all topics.
pub fn diversity<S: AsRef<str>>(sets: &[Vec<S>]) -> Result<f64> {
    let total: usize = sets.iter().map(Vec::len).sum();
    if total == 0 {
        return Err(Error::EmptySet);
    }
    let unique: HashSet<&str> = sets.iter().flatten().map(AsRef::as_ref).collect();
    Ok(unique.len() as f64 / total as f64)
}

/// Binary relevance judgments keyed by `(annotator, category, term)`.
#[derive(Debug, Clone, Default)]
pub struct AnnotationSet {
    judgments: BTreeMap<String, HashMap<(usize, String), bool>>,
}

impl AnnotationSet {
    pub fn insert(&mut self, annotator: &str, category: usize, term: &str, relevant: bool) {
        self.judgments
            .entry(annotator.to_string())
            .or_default()
            .insert((category, term.to_string()), relevant);
    }

    pub fn annotators(&self) -> usize {
        self.judgments.len()
    }

    /// Parses `annotator_id<TAB>category_index<TAB>term<TAB>{0,1}` lines.
    /// Category indices are 0-based in topics-file order.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut set = AnnotationSet::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let [annotator, category, term, label] = fields.as_slice() else {
                return Err(Error::parse(origin, i + 1, "expected 4 tab-separated fields"));
            };
            let category: usize = category
                .parse()
                .map_err(|_| Error::parse(origin, i + 1, format!("bad category index {category:?}")))?;
            let relevant = match *label {
                "1" => true,
                "0" => false,
                other => {
                    return Err(Error::parse(
                        origin,
                        i + 1,
                        format!("label must be 0 or 1, got {other:?}"),
                    ))
                }
            };
            set.insert(annotator, category, term, relevant);
        }
        if set.annotators() == 0 {
            return Err(Error::InsufficientData(format!("{origin}: no judgments")));
        }
        Ok(set)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaccReport {
    /// MACC averaged over annotators.
    pub macc: f64,
    pub per_annotator: Vec<f64>,
    pub fleiss_kappa: f64,
    /// Set when kappa is undefined (fewer than two annotators or no
    /// variation in labels) and reported as 1.0 by convention.
    pub kappa_degenerate: bool,
}

/// Mean accuracy per annotator, averaged, plus Fleiss' kappa over the judged
/// `(category, term)` items.
pub fn macc(sets: &[Vec<String>], annotations: &AnnotationSet) -> Result<MaccReport> {
    if sets.is_empty() || sets.iter().any(Vec::is_empty) {
        return Err(Error::EmptySet);
    }
    let mut gaps = Vec::new();
    for (annotator, judged) in &annotations.judgments {
        for (c, set) in sets.iter().enumerate() {
            for t in set {
                if !judged.contains_key(&(c, t.clone())) {
                    gaps.push(format!("{annotator}/{c}/{t}"));
                }
            }
        }
    }
    if !gaps.is_empty() {
        return Err(Error::MissingJudgments(gaps));
    }

    let per_annotator: Vec<f64> = annotations
        .judgments
        .values()
        .map(|judged| {
            sets.iter()
                .enumerate()
                .map(|(c, set)| {
                    let hits = set.iter().filter(|t| judged[&(c, (*t).clone())]).count();
                    hits as f64 / set.len() as f64
                })
                .sum::<f64>()
                / sets.len() as f64
        })
        .collect();
    let macc = per_annotator.iter().sum::<f64>() / per_annotator.len() as f64;

    let votes: Vec<usize> = sets
        .iter()
        .enumerate()
        .flat_map(|(c, set)| set.iter().map(move |t| (c, t)))
        .map(|(c, t)| annotations.judgments.values().filter(|j| j[&(c, t.clone())]).count())
        .collect();
    let (fleiss_kappa, kappa_degenerate) = fleiss_kappa_binary(&votes, annotations.annotators());
    Ok(MaccReport {
        macc,
        per_annotator,
        fleiss_kappa,
        kappa_degenerate,
    })
}

/// Fleiss' kappa for two categories, given the number of "relevant" votes
/// per item out of `raters`. Returns `(1.0, true)` when undefined.
pub fn fleiss_kappa_binary(relevant_votes: &[usize], raters: usize) -> (f64, bool) {
    if raters < 2 || relevant_votes.is_empty() {
        return (1.0, true);
    }
    let n = raters as f64;
    let items = relevant_votes.len() as f64;
    let mut agreement = 0.0;
    let mut positive = 0.0;
    for &k in relevant_votes {
        let (a, b) = (k as f64, n - k as f64);
        agreement += (a * a + b * b - n) / (n * (n - 1.0));
        positive += a;
    }
    let p_bar = agreement / items;
    let p1 = positive / (items * n);
    let p_e = p1 * p1 + (1.0 - p1) * (1.0 - p1);
    if (1.0 - p_e).abs() < 1e-15 {
        return (1.0, true);
    }
    ((p_bar - p_e) / (1.0 - p_e), false)
}

/// `metric<TAB>value` report lines.
pub fn metric_report(rows: &[(&str, f64)]) -> String {
    let mut out = String::new();
    for (name, value) in rows {
        let _ = writeln!(out, "{name}\t{value}");
    }
    out
}
