//! Pre-chunked corpora, their vocabulary and the occurrence statistics used
//! by training, ranking and evaluation.
//!
//! A corpus file holds one document per line with space separated tokens.
//! Multi-word phrases arrive already joined by [`PHRASE_SEPARATOR`].

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Index of a term in a [`Vocabulary`].
pub type TermId = usize;

/// Joins the words of a phrase into a single corpus token.
pub const PHRASE_SEPARATOR: char = '_';

/// Tokens occurring fewer times than this are dropped by default.
pub const DEFAULT_MIN_COUNT: u64 = 3;

/// Retained terms with their corpus frequencies.
///
/// Ids are assigned in lexicographic order of the term strings, so a lower id
/// doubles as the deterministic tie-breaker everywhere an argmax is taken.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    terms: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, TermId>,
    min_count: u64,
}

impl Vocabulary {
    fn from_counts(raw: HashMap<String, u64>, min_count: u64) -> Self {
        let mut kept: Vec<(String, u64)> = raw.into_iter().filter(|&(_, c)| c >= min_count).collect();
        kept.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        let index = kept.iter().enumerate().map(|(id, (t, _))| (t.clone(), id)).collect();
        let (terms, counts) = kept.into_iter().unzip();
        Vocabulary {
            terms,
            counts,
            index,
            min_count,
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term(&self, id: TermId) -> &str {
        &self.terms[id]
    }

    /// Number of occurrences of `id` in the corpus.
    pub fn count(&self, id: TermId) -> u64 {
        self.counts[id]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn id(&self, term: &str) -> Option<TermId> {
        self.index.get(term).copied()
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.terms.iter().map(String::as_str)
    }

    /// Looks a seed up as a corpus term, accepting either the verbatim string
    /// or its words joined with the phrase separator.
    pub fn seed_term(&self, seed: &str) -> Option<TermId> {
        self.id(seed).or_else(|| {
            let joined = seed
                .split_whitespace()
                .collect::<Vec<_>>()
                .join(&PHRASE_SEPARATOR.to_string());
            self.id(&joined).or_else(|| self.id(&joined.to_lowercase()))
        })
    }

    /// Writes `term<TAB>count` lines in id order.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (t, c) in self.terms.iter().zip(&self.counts) {
            writeln!(out, "{t}\t{c}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: usize,
    pub terms: Vec<TermId>,
}

impl Document {
    /// Number of retained tokens.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Ordered `(center, context)` pairs for a symmetric window of radius `h`,
    /// clipped at the document boundaries.
    pub fn context_pairs(&self, h: usize) -> impl Iterator<Item = (TermId, TermId)> + '_ {
        let n = self.terms.len();
        (0..n).flat_map(move |i| {
            let lo = i.saturating_sub(h);
            let hi = (i + h).min(n.saturating_sub(1));
            (lo..=hi)
                .filter(move |&j| j != i)
                .map(move |j| (self.terms[i], self.terms[j]))
        })
    }
}

#[derive(Debug, Clone)]
pub struct Corpus {
    documents: Vec<Document>,
    vocabulary: Vocabulary,
    total_term_count: u64,
}

impl Corpus {
    /// Builds a corpus from already tokenized documents. Tokens are taken
    /// verbatim (no lowercasing).
    pub fn from_token_documents<D, T>(docs: D, min_count: u64) -> Result<Corpus>
    where
        D: IntoIterator,
        D::Item: IntoIterator<Item = T>,
        T: AsRef<str>,
    {
        let docs: Vec<Vec<String>> = docs
            .into_iter()
            .map(|d| d.into_iter().map(|t| t.as_ref().to_string()).collect())
            .collect();
        let mut raw: HashMap<String, u64> = HashMap::new();
        for tok in docs.iter().flatten() {
            *raw.entry(tok.clone()).or_default() += 1;
        }
        let vocabulary = Vocabulary::from_counts(raw, min_count);
        let documents: Vec<Document> = docs
            .iter()
            .enumerate()
            .map(|(id, toks)| Document {
                id,
                terms: toks.iter().filter_map(|t| vocabulary.id(t)).collect(),
            })
            .collect();
        let total_term_count = documents.iter().map(|d| d.len() as u64).sum();
        if total_term_count == 0 {
            return Err(Error::EmptyCorpus { min_count });
        }
        Ok(Corpus {
            documents,
            vocabulary,
            total_term_count,
        })
    }

    /// Parses corpus text: one document per non-blank line.
    pub fn parse(text: &str, min_count: u64, lowercase: bool) -> Result<Corpus> {
        let docs = tokenize(text, lowercase);
        Corpus::from_token_documents(docs, min_count)
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    /// Total number of retained tokens over all documents.
    pub fn total_term_count(&self) -> u64 {
        self.total_term_count
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    /// The documents as term strings, used to rebuild sub-corpora.
    pub fn document_strings(&self, doc: usize) -> Vec<&str> {
        self.documents[doc]
            .terms
            .iter()
            .map(|&t| self.vocabulary.term(t))
            .collect()
    }
}

pub(crate) fn tokenize(text: &str, lowercase: bool) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split_whitespace()
                .map(|t| if lowercase { t.to_lowercase() } else { t.to_string() })
                .collect()
        })
        .collect()
}

/// Reads a corpus file and drops tokens with fewer than `min_count` occurrences.
pub fn load_corpus(path: impl AsRef<Path>, min_count: u64, lowercase: bool) -> Result<Corpus> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Corpus::parse(&text, min_count, lowercase)
}

/// All in-window `(center, context)` pairs of the corpus, document by document.
pub fn context_pairs(corpus: &Corpus, h: usize) -> impl Iterator<Item = (TermId, TermId)> + '_ {
    corpus.documents.iter().flat_map(move |d| d.context_pairs(h))
}

/// Splits documents into a training and a test corpus.
///
/// The first `floor(ratio * n)` documents of a seeded shuffle form the
/// training part; both parts keep their original relative order. The
/// training corpus is re-filtered with the source `min_count` so its counts
/// describe only its own documents. The test corpus keeps every token that
/// survived the source filter.
pub fn split_train_test(corpus: &Corpus, ratio: f64, rng_seed: u64) -> Result<(Corpus, Corpus)> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::Config(format!(
            "split ratio must lie strictly between 0 and 1, got {ratio}"
        )));
    }
    let (train_idx, test_idx) = split_indices(corpus.len(), ratio, rng_seed);
    let gather = |idx: &[usize]| -> Vec<Vec<&str>> { idx.iter().map(|&d| corpus.document_strings(d)).collect() };
    let train = Corpus::from_token_documents(gather(&train_idx), corpus.vocabulary.min_count)?;
    let test = Corpus::from_token_documents(gather(&test_idx), 1)?;
    Ok((train, test))
}

/// Document indices of a seeded split, each side in ascending order.
pub fn split_indices(n: usize, ratio: f64, rng_seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(rng_seed));
    let n_train = (ratio * n as f64).floor() as usize;
    let mut train = order[..n_train].to_vec();
    let mut test = order[n_train..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}

/// Window co-occurrence and per-document occurrence tallies.
#[derive(Debug, Clone)]
pub struct CooccurrenceStats {
    pair_counts: HashMap<(TermId, TermId), u64>,
    per_doc_counts: Vec<Vec<(TermId, u64)>>,
    window: usize,
}

impl CooccurrenceStats {
    /// Ordered co-occurrence count; symmetric in its arguments.
    pub fn pair_count(&self, a: TermId, b: TermId) -> u64 {
        self.pair_counts.get(&(a, b)).copied().unwrap_or(0)
    }

    /// Every nonzero `((center, context), count)` entry.
    pub fn pairs(&self) -> impl Iterator<Item = ((TermId, TermId), u64)> + '_ {
        self.pair_counts.iter().map(|(&k, &v)| (k, v))
    }

    /// Number of times `term` occurs in document `doc`.
    pub fn doc_count(&self, term: TermId, doc: usize) -> u64 {
        let row = &self.per_doc_counts[doc];
        row.binary_search_by_key(&term, |e| e.0).map(|i| row[i].1).unwrap_or(0)
    }

    /// Nonzero `(term, count)` entries of one document, ordered by term id.
    pub fn doc_terms(&self, doc: usize) -> &[(TermId, u64)] {
        &self.per_doc_counts[doc]
    }

    pub fn window(&self) -> usize {
        self.window
    }
}

pub fn cooccurrence_stats(corpus: &Corpus, h: usize) -> CooccurrenceStats {
    let mut pair_counts: HashMap<(TermId, TermId), u64> = HashMap::new();
    for pair in context_pairs(corpus, h) {
        *pair_counts.entry(pair).or_default() += 1;
    }
    let per_doc_counts = corpus
        .documents
        .iter()
        .map(|d| {
            let mut tally: HashMap<TermId, u64> = HashMap::new();
            for &t in &d.terms {
                *tally.entry(t).or_default() += 1;
            }
            let mut row: Vec<_> = tally.into_iter().collect();
            row.sort_unstable();
            row
        })
        .collect();
    CooccurrenceStats {
        pair_counts,
        per_doc_counts,
        window: h,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(c: &Corpus, d: usize) -> Vec<&str> {
        c.document_strings(d)
    }

    #[test]
    fn min_count_filters_rare_tokens() {
        let c = Corpus::parse("a b a\na c\n", 2, true).unwrap();
        assert_eq!(c.vocabulary().len(), 1);
        assert_eq!(c.vocabulary().term(0), "a");
        assert_eq!(names(&c, 0), ["a", "a"]);
        assert_eq!(names(&c, 1), ["a"]);
        assert_eq!(c.total_term_count(), 3);
    }

    #[test]
    fn min_count_three_drops_token_seen_twice() {
        let c = Corpus::parse("x y x\ny y z\nx", 3, true).unwrap();
        let v = c.vocabulary();
        assert!(v.id("y").is_some());
        assert!(v.id("x").is_some());
        assert!(v.id("z").is_none());
        let c = Corpus::parse("x y x\ny y\nz", 3, true).unwrap();
        assert!(c.vocabulary().id("x").is_none());
    }

    #[test]
    fn empty_after_filtering_is_an_error() {
        let err = Corpus::parse("a b\nc", 3, true).unwrap_err();
        assert!(matches!(err, Error::EmptyCorpus { min_count: 3 }));
    }

    #[test]
    fn unreadable_file_is_io_error() {
        let err = load_corpus("/definitely/not/here.txt", 1, true).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn lowercasing_and_phrases() {
        let c = Corpus::parse("Mental_Disorders b\nmental_disorders B", 1, true).unwrap();
        let v = c.vocabulary();
        assert_eq!(v.count(v.id("mental_disorders").unwrap()), 2);
        assert_eq!(v.seed_term("mental disorders"), v.id("mental_disorders"));
        let raw = Corpus::parse("Mental_Disorders b", 1, false).unwrap();
        assert!(raw.vocabulary().id("Mental_Disorders").is_some());
    }

    #[test]
    fn ids_are_lexicographic() {
        let c = Corpus::parse("zeta alpha mid alpha", 1, true).unwrap();
        let terms: Vec<_> = c.vocabulary().terms().collect();
        assert_eq!(terms, ["alpha", "mid", "zeta"]);
    }

    #[test]
    fn window_pairs_three_terms() {
        let d = Document {
            id: 0,
            terms: vec![0, 1, 2],
        };
        let pairs: Vec<_> = d.context_pairs(1).collect();
        assert_eq!(pairs, [(0, 1), (1, 0), (1, 2), (2, 1)]);
    }

    #[test]
    fn single_token_document_has_no_pairs() {
        let d = Document { id: 0, terms: vec![7] };
        assert_eq!(d.context_pairs(5).count(), 0);
        let e = Document { id: 1, terms: vec![] };
        assert_eq!(e.context_pairs(3).count(), 0);
    }

    #[test]
    fn four_terms_window_two_by_enumeration() {
        let d = Document {
            id: 0,
            terms: vec![0, 1, 2, 3],
        };
        let mut expected = Vec::new();
        for i in 0..4i64 {
            for j in 0..4i64 {
                if i != j && (i - j).abs() <= 2 {
                    expected.push((i as usize, j as usize));
                }
            }
        }
        let got: Vec<_> = d.context_pairs(2).collect();
        assert_eq!(got.len(), 10);
        assert_eq!(got, expected);
    }

    #[test]
    fn split_sizes_and_determinism() {
        let text: String = (0..10).map(|i| format!("t{i} common\n")).collect();
        let c = Corpus::parse(&text, 1, true).unwrap();
        let (a, b) = split_indices(10, 0.6, 7);
        assert_eq!(a.len(), 6);
        assert_eq!(b.len(), 4);
        assert!(a.iter().all(|i| !b.contains(i)));
        assert_eq!(split_indices(10, 0.6, 7), (a, b));
        let (train, test) = split_train_test(&c, 0.6, 7).unwrap();
        assert_eq!(train.len() + test.len(), 10);
    }

    #[test]
    fn split_floor_rule_at_scale() {
        let (train, test) = split_indices(23_473, 0.6, 1);
        assert_eq!(train.len(), 14_083);
        assert_eq!(test.len(), 23_473 - 14_083);
    }

    #[test]
    fn split_rejects_bad_ratio() {
        let c = Corpus::parse("a b", 1, true).unwrap();
        for r in [0.0, 1.0, -0.3, 1.5, f64::NAN] {
            assert!(matches!(split_train_test(&c, r, 0), Err(Error::Config(_))));
        }
    }

    #[test]
    fn two_token_doc_pair_count() {
        let c = Corpus::parse("a b", 1, true).unwrap();
        let s = cooccurrence_stats(&c, 1);
        let (a, b) = (0, 1);
        assert_eq!(s.pair_count(a, b), 1);
        assert_eq!(s.pair_count(b, a), 1);
        assert_eq!(s.pair_count(a, a), 0);
    }

    #[test]
    fn per_doc_counts_conserve_totals() {
        let c = Corpus::parse("a b a c\nb b a\nc a c c", 1, true).unwrap();
        let s = cooccurrence_stats(&c, 2);
        for w in 0..c.vocabulary().len() {
            let total: u64 = (0..c.len()).map(|d| s.doc_count(w, d)).sum();
            assert_eq!(total, c.vocabulary().count(w));
        }
        let lens: u64 = c.documents().iter().map(|d| d.len() as u64).sum();
        assert_eq!(lens, c.total_term_count());
    }

    #[test]
    fn vocabulary_dump() {
        let c = Corpus::parse("b a b", 1, true).unwrap();
        let mut buf = Vec::new();
        c.vocabulary().write_tsv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a\t1\nb\t2\n");
    }
}
