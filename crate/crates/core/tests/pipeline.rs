use std::collections::HashMap;

use cwibtd_core::conet::{accumulate_pair_counts, prune, WindowMode};
use cwibtd_core::corpus::{decode_document, preprocess, PreprocessConfig, WordId};
use cwibtd_core::inference::infer_doc_topics;
use cwibtd_core::metrics::purity;
use cwibtd_core::model::{train_model, ModelKind, ModelParams};
use cwibtd_core::pseudodoc::{count_pseudo_docs, pmi_pseudo_docs};
use cwibtd_core::synthetic::SyntheticSpec;
use proptest::prelude::*;

fn corpus_strategy() -> impl Strategy<Value = Vec<Vec<WordId>>> {
    prop::collection::vec(prop::collection::vec(0u32..12, 0..15), 1..20)
}

/// Node weights and total straight from the edge list.
fn marginals(edges: &[(WordId, WordId, u64)], words: usize) -> (Vec<u64>, u64) {
    let mut m = vec![0u64; words];
    let mut total = 0;
    for &(x, y, d) in edges {
        m[x as usize] += d;
        m[y as usize] += d;
        total += d;
    }
    (m, total)
}

proptest! {
    #[test]
    fn activity_is_pmi_of_window_probabilities(docs in corpus_strategy(), l in 2usize..8) {
        let raw = accumulate_pair_counts(&docs, 12, WindowMode::Sliding { size: l }).unwrap();
        let (m, total) = marginals(raw.edges(), 12);
        let pruned = prune(&raw);
        for &(x, y, d) in raw.edges() {
            // p(x,y) = D/T and p(x) = m_x / 2T
            let t = total as f64;
            let p_xy = d as f64 / t;
            let p_x = m[x as usize] as f64 / (2.0 * t);
            let p_y = m[y as usize] as f64 / (2.0 * t);
            let expected = (p_xy / (p_x * p_y)).ln();
            let got = raw.pmi_degree(x, y).unwrap();
            prop_assert!((got - expected).abs() < 1e-9, "{} vs {}", got, expected);
            match pruned.activity(x, y) {
                Some(a) => prop_assert!(a > 0.0 && (a - got).abs() < 1e-12),
                None => prop_assert!(got <= 1e-9),
            }
        }
    }

    #[test]
    fn count_pseudo_docs_mirror_the_network(docs in corpus_strategy()) {
        let raw = accumulate_pair_counts(&docs, 12, WindowMode::default()).unwrap();
        let pseudo = count_pseudo_docs(&raw);
        prop_assert_eq!(pseudo.total_tokens(), 2 * raw.total_weight());
        for x in 0..12u32 {
            for y in 0..12u32 {
                prop_assert_eq!(pseudo.multiplicity(x, y) as u64, raw.weight(x, y));
            }
        }
    }

    #[test]
    fn pmi_pseudo_docs_scale_and_round(docs in corpus_strategy(), scale in 1.0f64..20.0) {
        let raw = accumulate_pair_counts(&docs, 12, WindowMode::default()).unwrap();
        let pruned = prune(&raw);
        let pseudo = pmi_pseudo_docs(&pruned, scale).unwrap();
        let mut expected: HashMap<(WordId, WordId), u32> = HashMap::new();
        for &(x, y, a) in pruned.edges() {
            let c = ((scale * a).round_ties_even() as u32).max(1);
            expected.insert((x, y), c);
            expected.insert((y, x), c);
        }
        for x in 0..12u32 {
            for y in 0..12u32 {
                prop_assert_eq!(pseudo.multiplicity(x, y), expected.get(&(x, y)).copied().unwrap_or(0));
            }
        }
    }
}

#[test]
fn preprocessing_round_trip() {
    let raw = SyntheticSpec::two_topics(20, 3).generate();
    let config = PreprocessConfig {
        min_count: 1,
        ..PreprocessConfig::default()
    };
    let (corpus, vocab) = preprocess(&raw, &config).unwrap();
    for (doc, text) in corpus.docs.iter().zip(&raw.texts) {
        assert_eq!(decode_document(doc, &vocab).join(" "), *text);
    }
}

#[test]
fn every_model_separates_disjoint_topics() {
    let raw = SyntheticSpec::two_topics(60, 11).generate();
    let (corpus, vocab) = preprocess(&raw, &PreprocessConfig::default()).unwrap();
    for kind in ModelKind::ALL {
        let params = ModelParams {
            iterations: 200,
            seed: 1,
            ..ModelParams::defaults(kind, 2)
        };
        let model = train_model(kind, &corpus.docs, vocab.len(), &params).unwrap();
        let pred: Vec<usize> = model
            .training_doc_topics(&corpus.docs)
            .unwrap()
            .iter()
            .map(|d| d.cluster())
            .collect();
        let p = purity(&pred, &corpus.labels).unwrap();
        assert!(p >= 0.9, "{kind}: purity {p}");
    }
}

#[test]
fn network_doc_topics_average_word_rows() {
    let raw = SyntheticSpec::two_topics(30, 2).generate();
    let (corpus, vocab) = preprocess(&raw, &PreprocessConfig::default()).unwrap();
    let params = ModelParams {
        iterations: 30,
        ..ModelParams::defaults(ModelKind::Wntm, 2)
    };
    let model = train_model(ModelKind::Wntm, &corpus.docs, vocab.len(), &params).unwrap();
    let topics = model.word_topics().unwrap();
    for doc in corpus.docs.iter().filter(|d| !d.is_empty()) {
        let mut sum = [0.0; 2];
        let mut covered = 0;
        for &w in &doc.tokens {
            if let Some(row) = topics.get(w) {
                covered += 1;
                sum[0] += row[0];
                sum[1] += row[1];
            }
        }
        let d = infer_doc_topics(&doc.tokens, &topics);
        assert!((d.coverage - covered as f64 / doc.len() as f64).abs() < 1e-15);
        let s = sum[0] + sum[1];
        assert!((d.p[0] - sum[0] / s).abs() < 1e-12);
    }
}
