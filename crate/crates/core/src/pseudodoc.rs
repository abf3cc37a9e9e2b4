//! Pseudo-documents built from a co-occurrence network.
//!
//! Each connected word gets one pseudo-document: the list of its neighbors,
//! each repeated according to the edge. In count mode (WNTM) a neighbor is
//! repeated `D(i,j)` times. In PMI-scaled mode (CWIBTD) it is repeated
//! `max(1, round_half_even(s · activity(i,j)))` times, which turns real
//! activities into the integer multiplicities an ordinary LDA sampler needs.
//! The scale `s` trades quantization error for pseudo-document length.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conet::{PrunedCoNetwork, RawCoNetwork};
use crate::corpus::{Vocabulary, WordId};

pub const DEFAULT_PMI_SCALE: f64 = 10.0;

#[derive(Debug, Error, PartialEq)]
pub enum PseudoDocError {
    #[error("scale must be a positive finite number, got {0}")]
    InvalidScale(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum PseudoDocMode {
    Count,
    PmiScaled { scale: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PseudoDocumentSet {
    /// Neighbor lists `(word, multiplicity)` sorted by word id.
    docs: Vec<Vec<(WordId, u32)>>,
    origin_word: Vec<WordId>,
    num_words: usize,
    mode: PseudoDocMode,
}

impl PseudoDocumentSet {
    fn from_weighted_edges<I>(num_words: usize, edges: I, mode: PseudoDocMode) -> Self
    where
        I: IntoIterator<Item = (WordId, WordId, u32)>,
    {
        let mut adjacency: Vec<Vec<(WordId, u32)>> = vec![Vec::new(); num_words];
        for (x, y, mult) in edges {
            adjacency[x as usize].push((y, mult));
            adjacency[y as usize].push((x, mult));
        }
        let mut docs = Vec::new();
        let mut origin_word = Vec::new();
        for (w, mut neighbors) in adjacency.into_iter().enumerate() {
            if neighbors.is_empty() {
                continue;
            }
            neighbors.sort_unstable_by_key(|&(n, _)| n);
            docs.push(neighbors);
            origin_word.push(w as WordId);
        }
        PseudoDocumentSet {
            docs,
            origin_word,
            num_words,
            mode,
        }
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn mode(&self) -> PseudoDocMode {
        self.mode
    }

    pub fn num_words(&self) -> usize {
        self.num_words
    }

    /// Word whose adjacency list pseudo-document `i` is.
    pub fn origin_word(&self, i: usize) -> WordId {
        self.origin_word[i]
    }

    pub fn origin_words(&self) -> &[WordId] {
        &self.origin_word
    }

    pub fn neighbors(&self, i: usize) -> &[(WordId, u32)] {
        &self.docs[i]
    }

    /// Multiplicity of `neighbor` in the pseudo-document of `word`.
    pub fn multiplicity(&self, word: WordId, neighbor: WordId) -> u32 {
        let Ok(i) = self.origin_word.binary_search(&word) else {
            return 0;
        };
        self.docs[i]
            .binary_search_by_key(&neighbor, |&(n, _)| n)
            .map(|k| self.docs[i][k].1)
            .unwrap_or(0)
    }

    pub fn total_tokens(&self) -> u64 {
        self.docs.iter().flatten().map(|&(_, m)| m as u64).sum()
    }

    /// Token sequences for the sampler: each neighbor repeated by its
    /// multiplicity, in neighbor-id order.
    pub fn expand(&self) -> Vec<Vec<WordId>> {
        self.docs
            .iter()
            .map(|neighbors| {
                neighbors
                    .iter()
                    .flat_map(|&(n, m)| std::iter::repeat_n(n, m as usize))
                    .collect()
            })
            .collect()
    }

    /// Undirected edges `(x, y)` with `x < y` recoverable from the lists.
    pub fn edge_set(&self) -> Vec<(WordId, WordId)> {
        let mut out: Vec<(WordId, WordId)> = self
            .origin_word
            .iter()
            .zip(&self.docs)
            .flat_map(|(&w, ns)| {
                ns.iter()
                    .filter(move |&&(n, _)| w < n)
                    .map(move |&(n, _)| (w, n))
            })
            .collect();
        out.sort_unstable();
        out
    }

    pub fn write_dump<W: Write>(&self, vocab: &Vocabulary, mut out: W) -> io::Result<()> {
        for (w, neighbors) in self.origin_word.iter().zip(&self.docs) {
            write!(out, "{}\t", vocab.word(*w))?;
            for (k, (n, m)) in neighbors.iter().enumerate() {
                if k > 0 {
                    write!(out, " ")?;
                }
                write!(out, "{}:{}", vocab.word(*n), m)?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// WNTM pseudo-documents: multiplicity equals the raw co-occurrence count.
pub fn count_pseudo_docs(net: &RawCoNetwork) -> PseudoDocumentSet {
    PseudoDocumentSet::from_weighted_edges(
        net.num_words(),
        net.edges()
            .iter()
            .map(|&(x, y, d)| (x, y, u32::try_from(d).unwrap_or(u32::MAX))),
        PseudoDocMode::Count,
    )
}

/// `max(1, round_half_even(scale · activity))`.
pub fn pmi_multiplicity(activity: f64, scale: f64) -> u32 {
    let scaled = (scale * activity).round_ties_even();
    if scaled >= u32::MAX as f64 {
        u32::MAX
    } else {
        (scaled as u32).max(1)
    }
}

/// CWIBTD pseudo-documents from the PMI-pruned network.
pub fn pmi_pseudo_docs(
    net: &PrunedCoNetwork,
    scale: f64,
) -> Result<PseudoDocumentSet, PseudoDocError> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(PseudoDocError::InvalidScale(scale));
    }
    Ok(PseudoDocumentSet::from_weighted_edges(
        net.num_words(),
        net.edges()
            .iter()
            .map(|&(x, y, a)| (x, y, pmi_multiplicity(a, scale))),
        PseudoDocMode::PmiScaled { scale },
    ))
}
