//! Ordered, mutually disjoint per-category term sets and their text format.
//!
//! A topics file has one block per category: a `# <seed>` header line
//! followed by one term per line. Blocks are separated by a blank line.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::corpus::{TermId, Vocabulary};
use crate::error::{Error, Result};

/// Term sets `S_1..S_|C|`, one per seed. Insertion order encodes rank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopicSets {
    seeds: Vec<String>,
    sets: Vec<Vec<TermId>>,
}

impl TopicSets {
    pub fn empty(seeds: Vec<String>) -> Self {
        let sets = vec![Vec::new(); seeds.len()];
        TopicSets { seeds, sets }
    }

    pub fn from_parts(seeds: Vec<String>, sets: Vec<Vec<TermId>>) -> Self {
        assert_eq!(seeds.len(), sets.len(), "one set per seed");
        TopicSets { seeds, sets }
    }

    pub fn seeds(&self) -> &[String] {
        &self.seeds
    }

    pub fn sets(&self) -> &[Vec<TermId>] {
        &self.sets
    }

    pub fn set(&self, category: usize) -> &[TermId] {
        &self.sets[category]
    }

    /// Number of categories.
    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn category_of(&self, term: TermId) -> Option<usize> {
        self.sets.iter().position(|s| s.contains(&term))
    }

    pub fn is_disjoint(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.sets.iter().flatten().all(|t| seen.insert(*t))
    }

    /// Keeps the first `k` terms of every set.
    pub fn truncated(&self, k: usize) -> TopicSets {
        TopicSets {
            seeds: self.seeds.clone(),
            sets: self.sets.iter().map(|s| s[..s.len().min(k)].to_vec()).collect(),
        }
    }

    /// Fails if any set references a term id outside `vocab`.
    pub fn check_against(&self, vocab: &Vocabulary) -> Result<()> {
        for (category, set) in self.sets.iter().enumerate() {
            if let Some(&term) = set.iter().find(|&&t| t >= vocab.len()) {
                return Err(Error::UnknownTerm { category, term });
            }
        }
        Ok(())
    }

    pub fn named(&self, vocab: &Vocabulary) -> NamedTopics {
        NamedTopics {
            seeds: self.seeds.clone(),
            sets: self
                .sets
                .iter()
                .map(|s| s.iter().map(|&t| vocab.term(t).to_string()).collect())
                .collect(),
        }
    }

    /// Resolves named sets back to ids; every term must be in `vocab`.
    pub fn from_named(named: &NamedTopics, vocab: &Vocabulary) -> Result<TopicSets> {
        let mut missing = Vec::new();
        let sets = named
            .sets
            .iter()
            .map(|s| {
                s.iter()
                    .filter_map(|t| {
                        let id = vocab.id(t);
                        if id.is_none() {
                            missing.push(t.clone());
                        }
                        id
                    })
                    .collect()
            })
            .collect();
        if !missing.is_empty() {
            return Err(Error::MissingTerms(missing));
        }
        Ok(TopicSets::from_parts(named.seeds.clone(), sets))
    }
}

/// Fills sets by turns: in each of `target` rounds, every category in index
/// order takes its best not-yet-placed candidate. `ranked[i]` lists category
/// `i`'s candidates best first. On failure returns the category that ran dry
/// together with the number of terms it already held.
pub(crate) fn fill_round_robin(
    seeds: &[String],
    ranked: &[Vec<TermId>],
    target: usize,
    n_terms: usize,
) -> std::result::Result<TopicSets, (usize, usize)> {
    let mut placed = vec![false; n_terms];
    let mut cursor = vec![0usize; ranked.len()];
    let mut sets = vec![Vec::with_capacity(target); ranked.len()];
    for _round in 0..target {
        for (i, candidates) in ranked.iter().enumerate() {
            while cursor[i] < candidates.len() && placed[candidates[cursor[i]]] {
                cursor[i] += 1;
            }
            let Some(&term) = candidates.get(cursor[i]) else {
                return Err((i, sets[i].len()));
            };
            placed[term] = true;
            sets[i].push(term);
        }
    }
    Ok(TopicSets::from_parts(seeds.to_vec(), sets))
}

/// Topic sets spelled out as term strings, as stored in a topics file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedTopics {
    pub seeds: Vec<String>,
    pub sets: Vec<Vec<String>>,
}

impl NamedTopics {
    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        for (i, (seed, set)) in self.seeds.iter().zip(&self.sets).enumerate() {
            if i > 0 {
                out.push('\n');
            }
            let _ = writeln!(out, "# {seed}");
            for t in set {
                let _ = writeln!(out, "{t}");
            }
        }
        out
    }

    pub fn parse(text: &str, origin: &str) -> Result<NamedTopics> {
        let mut seeds = Vec::new();
        let mut sets: Vec<Vec<String>> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            if let Some(seed) = line.strip_prefix("# ") {
                seeds.push(seed.to_string());
                sets.push(Vec::new());
            } else {
                let Some(set) = sets.last_mut() else {
                    return Err(Error::parse(origin, lineno + 1, "term before any '# <seed>' header"));
                };
                set.push(line.trim().to_string());
            }
        }
        Ok(NamedTopics { seeds, sets })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<NamedTopics> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        NamedTopics::parse(&text, &path.display().to_string())
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_file_string()).map_err(|e| Error::io(path, e))
    }
}
