//! Corpus-local term embeddings trained with negative sampling.
//!
//! Three kinds of positive pairs share the input vectors `u`:
//! a term with each term in its context window (`v_word`), a term with its
//! document (`v_doc`), and a seeded term with its category (`v_cat`). Every
//! positive pair is contrasted with `negatives` sampled targets of the same
//! kind. Word negatives follow `count^word_negative_power`, document
//! negatives follow document length, category negatives are uniform.
//!
//! With `threads > 1` workers update the shared tables without locks
//! (relaxed atomics, lost updates tolerated). Only single-threaded training
//! is reproducible bit for bit.

use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{weighted::WeightedAliasIndex, Distribution};

use crate::corpus::{CooccurrenceStats, Corpus, Document, TermId};
use crate::error::{Error, Result};
use crate::general::format_exchange;
use crate::topics::TopicSets;
use crate::vectors::{dot, Matrix};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub dim: usize,
    /// Context window radius `h`.
    pub window: usize,
    /// Negative samples per positive pair (`b`).
    pub negatives: usize,
    pub epochs: usize,
    pub initial_lr: f64,
    pub rng_seed: u64,
    pub threads: usize,
    /// Exponent applied to term counts for the word negative distribution.
    pub word_negative_power: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 768,
            window: 5,
            negatives: 5,
            epochs: 5,
            initial_lr: 0.025,
            rng_seed: 0,
            threads: 1,
            word_negative_power: 0.75,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("dim", self.dim),
            ("window", self.window),
            ("negatives", self.negatives),
            ("epochs", self.epochs),
            ("threads", self.threads),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        if !(self.initial_lr.is_finite() && self.initial_lr > 0.0) {
            return Err(Error::Config(format!(
                "initial_lr must be positive, got {}",
                self.initial_lr
            )));
        }
        if !(self.word_negative_power.is_finite() && self.word_negative_power >= 0.0) {
            return Err(Error::Config("word_negative_power must be non-negative".into()));
        }
        Ok(())
    }
}

/// Trained input vectors and the three output-side tables.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalEmbeddingModel {
    /// Input vectors `u_w`, row per term id.
    pub u: Matrix,
    pub v_word: Matrix,
    pub v_doc: Matrix,
    pub v_cat: Matrix,
}

impl LocalEmbeddingModel {
    pub fn dim(&self) -> usize {
        self.u.dim()
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.v_word.is_finite() && self.v_doc.is_finite() && self.v_cat.is_finite()
    }

    /// The `u` table in the embedding exchange format.
    pub fn u_exchange_string(&self, vocab: &crate::corpus::Vocabulary) -> String {
        format_exchange(
            self.dim(),
            vocab.terms().zip(self.u.iter_rows()).collect::<Vec<_>>().into_iter(),
        )
    }

    /// Output table and row a given objective term scores against.
    pub fn output(&self, term: ObjectiveTerm) -> &Matrix {
        match term {
            ObjectiveTerm::Context => &self.v_word,
            ObjectiveTerm::Document => &self.v_doc,
            ObjectiveTerm::Category => &self.v_cat,
        }
    }

    pub fn output_mut(&mut self, term: ObjectiveTerm) -> &mut Matrix {
        match term {
            ObjectiveTerm::Context => &mut self.v_word,
            ObjectiveTerm::Document => &mut self.v_doc,
            ObjectiveTerm::Category => &mut self.v_cat,
        }
    }
}

/// The three parts of the training objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectiveTerm {
    Context,
    Document,
    Category,
}

pub const OBJECTIVE_TERMS: [ObjectiveTerm; 3] =
    [ObjectiveTerm::Context, ObjectiveTerm::Document, ObjectiveTerm::Category];

/// `log σ(x)`, stable for large `|x|`.
pub fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `log σ(u·v_pos) + Σ log σ(−u·v_neg)`.
pub fn negative_sampling_loss(u: &[f64], v_pos: &[f64], v_negs: &[&[f64]]) -> f64 {
    log_sigmoid(dot(u, v_pos)) + v_negs.iter().map(|v| log_sigmoid(-dot(u, v))).sum::<f64>()
}

/// Value and gradient of [`negative_sampling_loss`] with respect to each input.
#[derive(Debug, Clone, PartialEq)]
pub struct NsGradient {
    pub loss: f64,
    pub d_u: Vec<f64>,
    pub d_pos: Vec<f64>,
    pub d_negs: Vec<Vec<f64>>,
}

pub fn negative_sampling_gradient(u: &[f64], v_pos: &[f64], v_negs: &[&[f64]]) -> NsGradient {
    let dim = u.len();
    let mut d_u = vec![0.0; dim];
    let pos_dot = dot(u, v_pos);
    let g = 1.0 - sigmoid(pos_dot);
    axpy(&mut d_u, g, v_pos);
    let d_pos = u.iter().map(|x| g * x).collect();
    let d_negs = v_negs
        .iter()
        .map(|v| {
            let g = -sigmoid(dot(u, v));
            axpy(&mut d_u, g, v);
            u.iter().map(|x| g * x).collect()
        })
        .collect();
    NsGradient {
        loss: negative_sampling_loss(u, v_pos, v_negs),
        d_u,
        d_pos,
        d_negs,
    }
}

fn axpy(acc: &mut [f64], a: f64, x: &[f64]) {
    acc.iter_mut().zip(x).for_each(|(y, x)| *y += a * x);
}

/// One objective term's contribution for a single positive pair, read off a
/// model: `center` indexes `u`, `positive` and `negatives` index the output
/// table of `term`.
pub fn pair_objective(
    model: &LocalEmbeddingModel,
    term: ObjectiveTerm,
    center: TermId,
    positive: usize,
    negatives: &[usize],
) -> NsGradient {
    let out = model.output(term);
    let negs: Vec<&[f64]> = negatives.iter().map(|&n| out.row(n)).collect();
    negative_sampling_gradient(model.u.row(center), out.row(positive), &negs)
}

/// Row table shared between training workers.
struct SharedTable {
    dim: usize,
    cells: Vec<AtomicU64>,
}

impl SharedTable {
    fn from_matrix(m: &Matrix) -> Self {
        SharedTable {
            dim: m.dim(),
            cells: m.as_slice().iter().map(|x| AtomicU64::new(x.to_bits())).collect(),
        }
    }

    fn load(&self, row: usize, buf: &mut [f64]) {
        let cells = &self.cells[row * self.dim..(row + 1) * self.dim];
        for (b, c) in buf.iter_mut().zip(cells) {
            *b = f64::from_bits(c.load(Ordering::Relaxed));
        }
    }

    fn add_scaled(&self, row: usize, a: f64, x: &[f64]) {
        let cells = &self.cells[row * self.dim..(row + 1) * self.dim];
        for (c, x) in cells.iter().zip(x) {
            let cur = f64::from_bits(c.load(Ordering::Relaxed));
            c.store((cur + a * x).to_bits(), Ordering::Relaxed);
        }
    }

    fn into_matrix(self) -> Matrix {
        let rows = self.cells.len().checked_div(self.dim).unwrap_or(0);
        let data = self.cells.into_iter().map(|c| f64::from_bits(c.into_inner())).collect();
        Matrix::from_vec(rows, self.dim, data)
    }
}

struct Negatives {
    words: WeightedAliasIndex<f64>,
    docs: WeightedAliasIndex<f64>,
    categories: usize,
}

impl Negatives {
    fn sample(&self, term: ObjectiveTerm, rng: &mut impl Rng) -> usize {
        match term {
            ObjectiveTerm::Context => self.words.sample(rng),
            ObjectiveTerm::Document => self.docs.sample(rng),
            ObjectiveTerm::Category => rng.random_range(0..self.categories),
        }
    }
}

struct Trainer<'a> {
    cfg: &'a TrainConfig,
    u: SharedTable,
    v_word: SharedTable,
    v_doc: SharedTable,
    v_cat: SharedTable,
    negatives: Negatives,
    category_of: Vec<Option<usize>>,
    progress: AtomicU64,
    total_steps: u64,
}

/// Per-worker scratch buffers.
struct Scratch {
    u: Vec<f64>,
    v: Vec<f64>,
    grad: Vec<f64>,
    negs: Vec<usize>,
}

impl Trainer<'_> {
    fn output(&self, term: ObjectiveTerm) -> &SharedTable {
        match term {
            ObjectiveTerm::Context => &self.v_word,
            ObjectiveTerm::Document => &self.v_doc,
            ObjectiveTerm::Category => &self.v_cat,
        }
    }

    fn lr(&self, done: u64) -> f64 {
        let frac = (done as f64 / self.total_steps.max(1) as f64).min(1.0);
        self.cfg.initial_lr * (1.0 - 0.99 * frac)
    }

    /// Gradient ascent on the negative-sampling objective of one positive pair.
    fn step(
        &self,
        term: ObjectiveTerm,
        center: TermId,
        positive: usize,
        lr: f64,
        s: &mut Scratch,
        rng: &mut ChaCha8Rng,
    ) {
        s.negs.clear();
        for _ in 0..self.cfg.negatives {
            s.negs.push(self.negatives.sample(term, rng));
        }
        let out = self.output(term);
        self.u.load(center, &mut s.u);
        s.grad.iter_mut().for_each(|g| *g = 0.0);
        let targets = std::iter::once((positive, 1.0)).chain(s.negs.iter().map(|&n| (n, 0.0)));
        for (target, label) in targets {
            out.load(target, &mut s.v);
            let g = lr * (label - sigmoid(dot(&s.u, &s.v)));
            axpy(&mut s.grad, g, &s.v);
            out.add_scaled(target, g, &s.u);
        }
        self.u.add_scaled(center, 1.0, &s.grad);
    }

    fn run_documents<'d>(&self, docs: impl Iterator<Item = &'d Document> + Clone, rng: &mut ChaCha8Rng) {
        let dim = self.cfg.dim;
        let mut s = Scratch {
            u: vec![0.0; dim],
            v: vec![0.0; dim],
            grad: vec![0.0; dim],
            negs: Vec::with_capacity(self.cfg.negatives),
        };
        const FLUSH: u64 = 1024;
        let mut local = 0u64;
        let mut base = 0u64;
        for _epoch in 0..self.cfg.epochs {
            for doc in docs.clone() {
                let n = doc.terms.len();
                for (i, &w) in doc.terms.iter().enumerate() {
                    let lr = self.lr(base + local);
                    let lo = i.saturating_sub(self.cfg.window);
                    let hi = (i + self.cfg.window).min(n - 1);
                    for j in lo..=hi {
                        if j != i {
                            self.step(ObjectiveTerm::Context, w, doc.terms[j], lr, &mut s, rng);
                        }
                    }
                    self.step(ObjectiveTerm::Document, w, doc.id, lr, &mut s, rng);
                    if let Some(c) = self.category_of[w] {
                        self.step(ObjectiveTerm::Category, w, c, lr, &mut s, rng);
                    }
                    local += 1;
                    if local == FLUSH {
                        base = self.progress.fetch_add(local, Ordering::Relaxed) + local;
                        local = 0;
                    }
                }
            }
        }
        self.progress.fetch_add(local, Ordering::Relaxed);
    }
}

/// Trains a fresh model on `corpus` with the category pairs given by the
/// frozen `topic_sets`.
pub fn train(corpus: &Corpus, topic_sets: &TopicSets, cfg: &TrainConfig) -> Result<LocalEmbeddingModel> {
    cfg.validate()?;
    if topic_sets.is_empty() {
        return Err(Error::Config("training needs at least one topic set".into()));
    }
    let vocab = corpus.vocabulary();
    topic_sets.check_against(vocab)?;
    if !topic_sets.is_disjoint() {
        return Err(Error::Config("topic sets overlap".into()));
    }
    let mut category_of = vec![None; vocab.len()];
    for (c, set) in topic_sets.sets().iter().enumerate() {
        for &w in set {
            category_of[w] = Some(c);
        }
    }

    let dim = cfg.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let half = 0.5 / dim as f64;
    let u: Vec<f64> = (0..vocab.len() * dim).map(|_| rng.random_range(-half..=half)).collect();
    let u = Matrix::from_vec(vocab.len(), dim, u);

    let word_weights: Vec<f64> = vocab
        .counts()
        .iter()
        .map(|&c| (c as f64).powf(cfg.word_negative_power))
        .collect();
    let doc_weights: Vec<f64> = corpus.documents().iter().map(|d| d.len() as f64).collect();
    let negatives = Negatives {
        words: WeightedAliasIndex::new(word_weights)
            .map_err(|e| Error::Config(format!("word negative distribution: {e}")))?,
        docs: WeightedAliasIndex::new(doc_weights)
            .map_err(|e| Error::Config(format!("document negative distribution: {e}")))?,
        categories: topic_sets.len(),
    };

    let trainer = Trainer {
        cfg,
        u: SharedTable::from_matrix(&u),
        v_word: SharedTable::from_matrix(&Matrix::zeros(vocab.len(), dim)),
        v_doc: SharedTable::from_matrix(&Matrix::zeros(corpus.len(), dim)),
        v_cat: SharedTable::from_matrix(&Matrix::zeros(topic_sets.len(), dim)),
        negatives,
        category_of,
        progress: AtomicU64::new(0),
        total_steps: cfg.epochs as u64 * corpus.total_term_count(),
    };

    let docs = corpus.documents();
    if cfg.threads == 1 {
        trainer.run_documents(docs.iter(), &mut rng);
    } else {
        let workers = cfg.threads.min(docs.len().max(1));
        let seeds: Vec<u64> = (0..workers).map(|_| rng.random()).collect();
        std::thread::scope(|scope| {
            for (k, seed) in seeds.into_iter().enumerate() {
                let trainer = &trainer;
                scope.spawn(move || {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    trainer.run_documents(docs.iter().skip(k).step_by(workers), &mut rng);
                });
            }
        });
    }

    let Trainer {
        u,
        v_word,
        v_doc,
        v_cat,
        ..
    } = trainer;
    Ok(LocalEmbeddingModel {
        u: u.into_matrix(),
        v_word: v_word.into_matrix(),
        v_doc: v_doc.into_matrix(),
        v_cat: v_cat.into_matrix(),
    })
}

/// Word-word PMI target shifted by `log b`.
pub fn pmi_word_word(pair_count: u64, count_i: u64, count_j: u64, total_terms: u64, b: usize) -> f64 {
    ((pair_count as f64 * total_terms as f64) / (count_i as f64 * count_j as f64 * b as f64)).ln()
}

/// Word-document PMI target shifted by `log b`.
pub fn pmi_word_doc(doc_count: u64, term_count: u64, doc_len: u64, total_terms: u64, b: usize) -> f64 {
    ((doc_count as f64 * total_terms as f64) / (term_count as f64 * doc_len as f64 * b as f64)).ln()
}

pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

/// Agreement between learned dot products and one PMI block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockCorrelation {
    pub entries: usize,
    pub pearson: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorizationReport {
    pub word_word: BlockCorrelation,
    pub word_doc: BlockCorrelation,
}

const MIN_REPORT_ENTRIES: usize = 10;

fn correlate(block: &str, pairs: Vec<(f64, f64)>) -> Result<BlockCorrelation> {
    let pairs: Vec<_> = pairs
        .into_iter()
        .filter(|(a, b)| a.is_finite() && b.is_finite())
        .collect();
    if pairs.len() < MIN_REPORT_ENTRIES {
        return Err(Error::InsufficientData(format!(
            "{block} block has {} finite entries, need {MIN_REPORT_ENTRIES}",
            pairs.len()
        )));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let pearson =
        pearson(&xs, &ys).ok_or_else(|| Error::InsufficientData(format!("{block} block has zero variance")))?;
    Ok(BlockCorrelation {
        entries: xs.len(),
        pearson,
    })
}

/// Pearson correlation of `u_i·v_j` against the word-word PMI matrix and of
/// `u_w·v_d` against the word-document PMI matrix, over entries with
/// nonzero counts.
pub fn pmi_factorization_report(
    model: &LocalEmbeddingModel,
    stats: &CooccurrenceStats,
    corpus: &Corpus,
    b: usize,
) -> Result<FactorizationReport> {
    let vocab = corpus.vocabulary();
    let total = corpus.total_term_count();
    let mut ww: Vec<((TermId, TermId), u64)> = stats.pairs().collect();
    ww.sort_unstable();
    let ww = ww
        .into_iter()
        .map(|((i, j), n)| {
            let x = pmi_word_word(n, vocab.count(i), vocab.count(j), total, b);
            (dot(model.u.row(i), model.v_word.row(j)), x)
        })
        .collect();
    let mut wd = Vec::new();
    for doc in corpus.documents() {
        for &(w, n) in stats.doc_terms(doc.id) {
            let x = pmi_word_doc(n, vocab.count(w), doc.len() as u64, total, b);
            wd.push((dot(model.u.row(w), model.v_doc.row(doc.id)), x));
        }
    }
    Ok(FactorizationReport {
        word_word: correlate("word-word", ww)?,
        word_doc: correlate("word-document", wd)?,
    })
}
