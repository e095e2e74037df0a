//! Power-mean fusion of the general and local rankings and the disjoint
//! by-turns expansion of topic sets.

use std::collections::HashMap;
use std::fmt;
use std::fmt::Write as _;

use crate::corpus::{TermId, Vocabulary};
use crate::error::{Error, Result};
use crate::general::sort_by_score;
use crate::topics::{fill_round_robin, TopicSets};
use crate::vectors::{cosine, dot, Matrix};

/// A 1-based position in a ranking list, or absent from its top-M.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rank {
    Finite(u64),
    Infinite,
}

impl Rank {
    pub fn finite(r: u64) -> Rank {
        assert!(r >= 1, "ranks start at 1");
        Rank::Finite(r)
    }

    /// `rank^{-rho}`, zero for an infinite rank.
    pub fn reciprocal_pow(self, rho: f64) -> f64 {
        match self {
            Rank::Finite(r) => (r as f64).powf(-rho),
            Rank::Infinite => 0.0,
        }
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rank::Finite(r) => write!(f, "{r}"),
            Rank::Infinite => f.write_str("inf"),
        }
    }
}

/// Power mean with exponent `rho` of the two reciprocal ranks:
/// `(½·rank_g^{−ρ} + ½·rank_l^{−ρ})^{1/ρ}`.
///
/// `rho = 1` is the plain mean of reciprocal ranks; as `rho → 0` the value
/// approaches their geometric mean.
pub fn ensemble_score(rank_g: Rank, rank_l: Rank, rho: f64) -> f64 {
    debug_assert!(rho > 0.0 && rho <= 1.0, "rho must lie in (0, 1]");
    let ln = |r: u64| (r as f64).ln();
    match (rank_g, rank_l) {
        (Rank::Infinite, Rank::Infinite) => 0.0,
        _ if rho == 1.0 => 0.5 * rank_g.reciprocal_pow(1.0) + 0.5 * rank_l.reciprocal_pow(1.0),
        (Rank::Finite(r), Rank::Infinite) | (Rank::Infinite, Rank::Finite(r)) => {
            (std::f64::consts::LN_2.mul_add(-1.0 / rho, -ln(r))).exp()
        }
        (Rank::Finite(a), Rank::Finite(b)) => {
            // log-domain evaluation keeps small rho accurate
            let (la, lb) = (-rho * ln(a), -rho * ln(b));
            let hi = la.max(lb);
            let gap = (la - lb).abs();
            ((hi + ((-gap).exp_m1() * 0.5).ln_1p()) / rho).exp()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleConfig {
    pub rho: f64,
    /// Length of each ranking list.
    pub top_m: usize,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig { rho: 0.1, top_m: 100 }
    }
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return Err(Error::Config(format!("rho must lie in (0, 1], got {}", self.rho)));
        }
        if self.top_m == 0 {
            return Err(Error::Config("M must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scorer {
    General,
    Local,
}

/// Top-M terms of one category under one scorer, best first.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedList {
    pub category: usize,
    pub scorer: Scorer,
    pub entries: Vec<(TermId, f64)>,
}

impl RankedList {
    pub fn rank_of(&self, term: TermId) -> Rank {
        self.entries
            .iter()
            .position(|&(t, _)| t == term)
            .map_or(Rank::Infinite, |p| Rank::Finite(p as u64 + 1))
    }

    pub fn ranks(&self) -> HashMap<TermId, Rank> {
        self.entries
            .iter()
            .enumerate()
            .map(|(p, &(t, _))| (t, Rank::Finite(p as u64 + 1)))
            .collect()
    }
}

/// Mean cosine between `table[w]` and every member of `set`.
pub fn set_similarity_score(w: TermId, set: &[TermId], table: &Matrix) -> Result<f64> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    let sum: f64 = set.iter().map(|&s| cosine(table.row(w), table.row(s))).sum();
    Ok(sum / set.len() as f64)
}

/// [`set_similarity_score`] for every row at once. `normalized` must already
/// have unit (or zero) rows; the mean of cosines is then a dot product with
/// the mean of the set's rows.
pub fn set_similarity_scores(set: &[TermId], normalized: &Matrix) -> Result<Vec<f64>> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut centroid = vec![0.0; normalized.dim()];
    for &s in set {
        centroid.iter_mut().zip(normalized.row(s)).for_each(|(c, x)| *c += x);
    }
    let k = set.len() as f64;
    centroid.iter_mut().for_each(|c| *c /= k);
    Ok(normalized.iter_rows().map(|r| dot(r, &centroid)).collect())
}

fn top_m(category: usize, scorer: Scorer, scores: &[f64], m: usize) -> RankedList {
    let mut scored: Vec<(TermId, f64)> = scores.iter().copied().enumerate().collect();
    let m = m.min(scored.len());
    if m < scored.len() && m > 0 {
        scored.select_nth_unstable_by(m - 1, |a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        scored.truncate(m);
    }
    sort_by_score(&mut scored);
    scored.truncate(m);
    RankedList {
        category,
        scorer,
        entries: scored,
    }
}

/// Both ranking lists of one category.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoryRankings {
    pub general: RankedList,
    pub local: RankedList,
}

/// Ranks every vocabulary term against each current set under both tables.
/// Both matrices are indexed by term id and must be row-normalized.
pub fn build_ranked_lists(
    topic_sets: &TopicSets,
    general: &Matrix,
    local: &Matrix,
    config: &EnsembleConfig,
) -> Result<Vec<CategoryRankings>> {
    topic_sets
        .sets()
        .iter()
        .enumerate()
        .map(|(i, set)| {
            let g = set_similarity_scores(set, general)?;
            let l = set_similarity_scores(set, local)?;
            Ok(CategoryRankings {
                general: top_m(i, Scorer::General, &g, config.top_m),
                local: top_m(i, Scorer::Local, &l, config.top_m),
            })
        })
        .collect()
}

/// One fused candidate for one category.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusedEntry {
    pub term: TermId,
    pub rank_general: Rank,
    pub rank_local: Rank,
    pub score: f64,
}

/// Ensemble scores of every term appearing in either list of a category,
/// best first. Terms in neither list score 0 and are omitted.
pub fn fuse(rankings: &CategoryRankings, rho: f64) -> Vec<FusedEntry> {
    let g = rankings.general.ranks();
    let l = rankings.local.ranks();
    let mut terms: Vec<TermId> = g.keys().chain(l.keys()).copied().collect();
    terms.sort_unstable();
    terms.dedup();
    let mut fused: Vec<FusedEntry> = terms
        .into_iter()
        .map(|t| {
            let rg = g.get(&t).copied().unwrap_or(Rank::Infinite);
            let rl = l.get(&t).copied().unwrap_or(Rank::Infinite);
            FusedEntry {
                term: t,
                rank_general: rg,
                rank_local: rl,
                score: ensemble_score(rg, rl, rho),
            }
        })
        .collect();
    fused.sort_unstable_by(|a, b| b.score.total_cmp(&a.score).then(a.term.cmp(&b.term)));
    fused
}

/// Rebuilds the sets from scratch: `target_size` rounds, each category in
/// turn taking its highest-scoring term not yet placed anywhere. Only
/// positive scores are candidates; ties go to the lower term id.
pub fn expand_topic_sets(scores: &[Vec<(TermId, f64)>], target_size: usize, seeds: &[String]) -> Result<TopicSets> {
    assert_eq!(scores.len(), seeds.len(), "one score table per category");
    let mut n_terms = 0;
    let ranked: Vec<Vec<TermId>> = scores
        .iter()
        .map(|table| {
            let mut positive: Vec<(TermId, f64)> = table.iter().copied().filter(|&(_, s)| s > 0.0).collect();
            sort_by_score(&mut positive);
            n_terms = positive.iter().map(|&(t, _)| t + 1).fold(n_terms, usize::max);
            positive.into_iter().map(|(t, _)| t).collect()
        })
        .collect();
    fill_round_robin(seeds, &ranked, target_size, n_terms).map_err(|(category, placed)| Error::CategoryExhausted {
        category,
        seed: seeds[category].clone(),
        placed,
    })
}

/// Debug table: `category<TAB>term<TAB>rank_G<TAB>rank_L<TAB>ensemble_score`.
pub fn fused_tsv(fused: &[Vec<FusedEntry>], vocab: &Vocabulary) -> String {
    let mut out = String::new();
    for (c, entries) in fused.iter().enumerate() {
        for e in entries {
            let _ = writeln!(
                out,
                "{c}\t{}\t{}\t{}\t{}",
                vocab.term(e.term),
                e.rank_general,
                e.rank_local,
                e.score
            );
        }
    }
    out
}
