mod common;

use std::collections::HashMap;

use proptest::prelude::*;

use seedtopic::corpus::{context_pairs, cooccurrence_stats, split_train_test, Corpus};
use seedtopic::ensemble::{ensemble_score, expand_topic_sets, Rank};
use seedtopic::eval::{diversity, DocProbabilities};
use seedtopic::general::{init_topic_sets, GeneralEmbeddingTable};

fn docs_strategy(max_docs: usize) -> impl Strategy<Value = Vec<Vec<String>>> {
    prop::collection::vec(
        prop::collection::vec((0u8..12).prop_map(|t| format!("w{t}")), 0..15),
        1..max_docs,
    )
}

fn brute_pair_counts(corpus: &Corpus, h: usize) -> HashMap<(usize, usize), u64> {
    let mut counts = HashMap::new();
    for doc in corpus.documents() {
        let t = &doc.terms;
        for i in 0..t.len() {
            for j in 0..t.len() {
                if i != j && i.abs_diff(j) <= h {
                    *counts.entry((t[i], t[j])).or_default() += 1;
                }
            }
        }
    }
    counts
}

#[test]
fn pair_counts_match_brute_force_on_200_docs() {
    let docs = common::clustered_docs(4, 15, 200, 25, 3);
    let corpus = Corpus::from_token_documents(docs, 1).unwrap();
    for h in [1, 2, 5] {
        let stats = cooccurrence_stats(&corpus, h);
        let brute = brute_pair_counts(&corpus, h);
        let ours: HashMap<(usize, usize), u64> = stats.pairs().collect();
        assert_eq!(ours, brute, "window {h}");
    }
}

proptest! {
    #[test]
    fn doc_lengths_sum_to_total(docs in docs_strategy(20)) {
        if let Ok(c) = Corpus::from_token_documents(docs, 2) {
            let sum: u64 = c.documents().iter().map(|d| d.len() as u64).sum();
            prop_assert_eq!(sum, c.total_term_count());
            prop_assert_eq!(c.vocabulary().counts().iter().sum::<u64>(), sum);
        }
    }

    #[test]
    fn context_pair_count_formula(docs in docs_strategy(10), h in 1usize..6) {
        let Ok(c) = Corpus::from_token_documents(docs, 1) else {
            return Ok(());
        };
        let expected: usize = c
            .documents()
            .iter()
            .map(|d| {
                let l = d.len();
                (0..l).map(|i| (i + h).min(l - 1) - i.saturating_sub(h)).sum::<usize>()
            })
            .sum();
        prop_assert_eq!(context_pairs(&c, h).count(), expected);
    }

    #[test]
    fn split_is_a_partition(n in 2usize..200, ratio in 0.05f64..0.95, seed in any::<u64>()) {
        let (train, test) = seedtopic::corpus::split_indices(n, ratio, seed);
        let mut all: Vec<usize> = train.iter().chain(&test).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        prop_assert_eq!(train.len(), (ratio * n as f64).floor() as usize);
    }

    #[test]
    fn init_is_scale_invariant(
        vecs in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 4), 14),
        scales in prop::collection::vec(0.01f64..100.0, 14),
        n in 1usize..5,
    ) {
        let docs: Vec<Vec<String>> = (0..12).map(|i| vec![format!("t{i:02}")]).collect();
        let c = Corpus::from_token_documents(docs, 1).unwrap();
        let names: Vec<String> = (0..12).map(|i| format!("t{i:02}")).chain(["s a".into(), "s b".into()]).collect();
        let seeds = vec!["s a".to_string(), "s b".to_string()];
        let table = GeneralEmbeddingTable::from_entries(4, names.iter().cloned().zip(vecs.iter().cloned())).unwrap();
        let scaled = GeneralEmbeddingTable::from_entries(
            4,
            names.iter().cloned().zip(vecs.iter().zip(&scales).map(|(v, s)| v.iter().map(|x| x * s).collect::<Vec<_>>())),
        )
        .unwrap();
        let a = init_topic_sets(&table, &seeds, c.vocabulary(), n).unwrap();
        let b = init_topic_sets(&scaled, &seeds, c.vocabulary(), n).unwrap();
        prop_assert!(a.is_disjoint());
        prop_assert!(a.sets().iter().all(|s| s.len() == n));
        // cosines are computed after normalization, so ties are the only
        // way scaling could change the order; random vectors have none
        prop_assert_eq!(a, b);
    }

    #[test]
    fn veto_at_small_rho(r in 1u64..100, a in 1u64..100, b in 1u64..100) {
        let vetoed = ensemble_score(Rank::Finite(r), Rank::Infinite, 1e-6);
        prop_assert!(vetoed < ensemble_score(Rank::Finite(a), Rank::Finite(b), 1e-6));
        prop_assert_eq!(ensemble_score(Rank::Infinite, Rank::Infinite, 1e-6), 0.0);
    }

    #[test]
    fn expansion_is_disjoint_and_exact(
        raw in prop::collection::vec(prop::collection::vec((0usize..60, 0.001f64..1.0), 30..60), 1..4),
        target in 1usize..8,
    ) {
        let scores: Vec<Vec<(usize, f64)>> = raw
            .into_iter()
            .map(|mut v| {
                v.sort_by_key(|e| e.0);
                v.dedup_by_key(|e| e.0);
                v
            })
            .collect();
        let seeds: Vec<String> = (0..scores.len()).map(|i| format!("seed{i}")).collect();
        match expand_topic_sets(&scores, target, &seeds) {
            Ok(sets) => {
                prop_assert!(sets.is_disjoint());
                prop_assert!(sets.sets().iter().all(|s| s.len() == target));
            }
            Err(seedtopic::Error::CategoryExhausted { category, placed, .. }) => {
                prop_assert!(placed < target && category < scores.len());
            }
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn npmi_pairs_are_bounded(docs in docs_strategy(20)) {
        prop_assume!(docs.iter().any(|d| !d.is_empty()));
        let probs = DocProbabilities::from_documents(docs.clone()).unwrap();
        for a in 0..12 {
            for b in a + 1..12 {
                let v = probs.pair_npmi(&format!("w{a}"), &format!("w{b}"));
                prop_assert!(v.is_finite() && (-1.0 - 1e-12..=1.0 + 1e-12).contains(&v), "{v}");
            }
        }
    }

    #[test]
    fn diversity_ignores_category_order(
        sets in prop::collection::vec(prop::collection::vec(0u8..20, 1..6), 1..5),
        rot in 0usize..5,
    ) {
        let sets: Vec<Vec<String>> = sets.iter().map(|s| s.iter().map(|t| format!("t{t}")).collect()).collect();
        let mut rotated = sets.clone();
        let k = rot % rotated.len();
        rotated.rotate_left(k);
        prop_assert_eq!(diversity(&sets).unwrap(), diversity(&rotated).unwrap());
    }

    #[test]
    fn split_corpora_cover_every_document(docs in docs_strategy(30), seed in any::<u64>()) {
        let docs: Vec<Vec<String>> = docs.into_iter().map(|mut d| { d.push("anchor".into()); d }).collect();
        prop_assume!(docs.len() >= 4);
        let c = Corpus::from_token_documents(docs, 1).unwrap();
        let (train, test) = split_train_test(&c, 0.5, seed).unwrap();
        prop_assert_eq!(train.len() + test.len(), c.len());
    }
}
