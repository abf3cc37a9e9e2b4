//! Seeded synthetic labeled corpora with a known class structure.
//!
//! Each class owns a private vocabulary whose words are drawn with Zipf-like
//! frequencies. A token is drawn from the shared background vocabulary with
//! probability `shared_fraction`, from another class's vocabulary with
//! probability `overlap_fraction`, and from its own class otherwise. This
//! gives short documents whose class signal is diluted by common words, the
//! setting the imbalanced-corpus experiments are built around.

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::RawCorpus;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    /// `(class name, document count)` in output order.
    pub classes: Vec<(String, usize)>,
    pub words_per_class: usize,
    pub shared_words: usize,
    pub shared_fraction: f64,
    pub overlap_fraction: f64,
    pub min_len: usize,
    pub max_len: usize,
    /// Exponent `s` of the `1 / rank^s` word weights inside each vocabulary.
    pub zipf_exponent: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    /// Two classes with disjoint 50-word vocabularies and no shared words.
    pub fn two_topics(docs_per_class: usize, seed: u64) -> Self {
        SyntheticSpec {
            classes: vec![
                ("alpha".into(), docs_per_class),
                ("beta".into(), docs_per_class),
            ],
            words_per_class: 50,
            shared_words: 0,
            shared_fraction: 0.0,
            overlap_fraction: 0.0,
            min_len: 6,
            max_len: 12,
            zipf_exponent: 0.5,
            seed,
        }
    }

    /// Four large classes of 300 documents and four rare classes of 20,
    /// mirroring the imbalanced SearchSnippets subset (N = 1280).
    pub fn imbalanced(seed: u64) -> Self {
        let mut classes: Vec<(String, usize)> =
            (0..4).map(|i| (format!("large{i}"), 300)).collect();
        classes.extend((0..4).map(|i| (format!("rare{i}"), 20)));
        SyntheticSpec {
            classes,
            words_per_class: 50,
            shared_words: 40,
            shared_fraction: 0.3,
            overlap_fraction: 0.1,
            min_len: 6,
            max_len: 12,
            zipf_exponent: 1.0,
            seed,
        }
    }

    /// Corpus with documents grouped by class, in class order.
    pub fn generate(&self) -> RawCorpus {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let zipf = |n: usize| {
            WeightedIndex::new((1..=n).map(|r| 1.0 / (r as f64).powf(self.zipf_exponent))).ok()
        };
        let class_dist = zipf(self.words_per_class);
        let shared_dist = zipf(self.shared_words);
        let n_classes = self.classes.len();

        let mut texts = Vec::new();
        let mut labels = Vec::new();
        for (c, (_, count)) in self.classes.iter().enumerate() {
            for _ in 0..*count {
                let len = rng.gen_range(self.min_len..=self.max_len);
                let mut words = Vec::with_capacity(len);
                for _ in 0..len {
                    let u: f64 = rng.gen();
                    let word = match (&shared_dist, &class_dist) {
                        (Some(shared), _) if u < self.shared_fraction => {
                            format!("common{}", shared.sample(&mut rng))
                        }
                        (_, Some(own))
                            if n_classes > 1
                                && u < self.shared_fraction + self.overlap_fraction =>
                        {
                            let other = (c + rng.gen_range(1..n_classes)) % n_classes;
                            format!("c{}w{}", other, own.sample(&mut rng))
                        }
                        (_, Some(own)) => format!("c{}w{}", c, own.sample(&mut rng)),
                        (Some(shared), None) => format!("common{}", shared.sample(&mut rng)),
                        (None, None) => continue,
                    };
                    words.push(word);
                }
                texts.push(words.join(" "));
                labels.push(c);
            }
        }
        RawCorpus {
            texts,
            labels: Some(labels),
            class_names: self.classes.iter().map(|(n, _)| n.clone()).collect(),
        }
    }

    /// `<class>\t<text>` lines.
    pub fn to_tsv(&self) -> String {
        let raw = self.generate();
        let labels = raw.labels.as_ref().expect("synthetic corpora are labeled");
        let mut out = String::new();
        for (text, &l) in raw.texts.iter().zip(labels) {
            out.push_str(&raw.class_names[l]);
            out.push('\t');
            out.push_str(text);
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_and_determinism() {
        let spec = SyntheticSpec::imbalanced(3);
        let a = spec.generate();
        assert_eq!(a.len(), 1280);
        assert_eq!(a, spec.generate());
        let labels = a.labels.unwrap();
        assert_eq!(labels.iter().filter(|&&l| l == 7).count(), 20);
        assert_ne!(SyntheticSpec::imbalanced(4).generate().texts, a.texts);
    }

    #[test]
    fn two_topic_vocabularies_are_disjoint() {
        let raw = SyntheticSpec::two_topics(10, 1).generate();
        let labels = raw.labels.unwrap();
        for (text, l) in raw.texts.iter().zip(labels) {
            let prefix = format!("c{l}w");
            assert!(text.split(' ').all(|w| w.starts_with(&prefix)));
        }
    }
}
