//! Document-level topic proportions from word-level ones.
//!
//! For network models every connected word `w_i` has a topic distribution
//! `θ_i` learned from its pseudo-document. A document's distribution is the
//! average of its words' distributions weighted by their empirical frequency:
//!
//! ```text
//! P(z|d) = Σ_i θ_{i,z} · n_d(w_i) / Len(d)
//! ```
//!
//! Words without a network row (pruned or isolated) contribute nothing; the
//! sum is renormalized over the covered mass and the covered fraction is
//! reported as `coverage`. A document with no covered token gets the uniform
//! distribution and coverage 0.

use std::io::{self, Write};

use crate::corpus::{Document, WordId};
use crate::sampler::Theta;

/// Topic distributions indexed by word id, for words that have one.
#[derive(Debug, Clone, PartialEq)]
pub struct WordTopics {
    theta: Theta,
    row_of_word: Vec<Option<usize>>,
}

impl WordTopics {
    /// `origin_words[i]` is the word whose distribution is row `i` of `theta`.
    pub fn new(theta: Theta, origin_words: &[WordId], vocab_size: usize) -> Self {
        assert_eq!(
            theta.rows(),
            origin_words.len(),
            "one theta row per origin word"
        );
        let mut row_of_word = vec![None; vocab_size];
        for (row, &w) in origin_words.iter().enumerate() {
            row_of_word[w as usize] = Some(row);
        }
        WordTopics { theta, row_of_word }
    }

    pub fn num_topics(&self) -> usize {
        self.theta.cols()
    }

    pub fn theta(&self) -> &Theta {
        &self.theta
    }

    /// `P(z | w)`, when the word has a row.
    pub fn get(&self, word: WordId) -> Option<&[f64]> {
        self.row_of_word
            .get(word as usize)
            .copied()
            .flatten()
            .map(|r| self.theta.row(r))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DocTopicDistribution {
    pub p: Vec<f64>,
    /// Fraction of the document's tokens whose word has a topic distribution.
    pub coverage: f64,
}

impl DocTopicDistribution {
    pub fn uniform(topics: usize) -> Self {
        DocTopicDistribution {
            p: vec![1.0 / topics as f64; topics],
            coverage: 0.0,
        }
    }

    /// True when no token carried topic information and `p` is the uniform
    /// fallback.
    pub fn is_uninformative(&self) -> bool {
        self.coverage == 0.0
    }

    pub fn cluster(&self) -> usize {
        assign_cluster(&self.p)
    }
}

/// The unnormalized sum `Σ_i θ_{i,z} · n_d(w_i) / Len(d)` over covered words,
/// plus the covered token count.
pub fn doc_topic_mass(doc: &[WordId], topics: &WordTopics) -> (Vec<f64>, usize) {
    let k = topics.num_topics();
    let mut p = vec![0.0; k];
    if doc.is_empty() {
        return (p, 0);
    }
    let len = doc.len() as f64;
    let mut covered = 0;
    for (w, n) in Document::new(doc.to_vec()).term_counts() {
        if let Some(row) = topics.get(w) {
            covered += n;
            let weight = n as f64 / len;
            for (acc, &t) in p.iter_mut().zip(row) {
                *acc += t * weight;
            }
        }
    }
    (p, covered)
}

pub fn infer_doc_topics(doc: &[WordId], topics: &WordTopics) -> DocTopicDistribution {
    let (mut p, covered) = doc_topic_mass(doc, topics);
    if covered == 0 {
        return DocTopicDistribution::uniform(topics.num_topics());
    }
    let s: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= s);
    DocTopicDistribution {
        p,
        coverage: covered as f64 / doc.len() as f64,
    }
}

/// Index of the largest entry; ties go to the lowest index.
pub fn assign_cluster(p: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in p.iter().enumerate().skip(1) {
        if x > p[best] {
            best = i;
        }
    }
    best
}

/// One line per document: `index\tcluster\tcoverage\tp_0 p_1 … p_{K-1}`,
/// six decimals.
pub fn write_inference_line<W: Write>(
    mut out: W,
    index: usize,
    dist: &DocTopicDistribution,
) -> io::Result<()> {
    write!(out, "{}\t{}\t{:.6}\t", index, dist.cluster(), dist.coverage)?;
    for (i, p) in dist.p.iter().enumerate() {
        if i > 0 {
            write!(out, " ")?;
        }
        write!(out, "{:.6}", p)?;
    }
    writeln!(out)
}
