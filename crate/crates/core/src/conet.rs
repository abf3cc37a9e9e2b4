//! Word co-occurrence network.
//!
//! Documents are scanned with a window of `L` tokens moved at stride 1.
//! Every pair of token positions holding two different words inside a window
//! adds 1 to the weight of the edge between those words, once per window.
//! Nearby positions share more windows than distant ones, so adjacent words
//! accumulate more weight.
//!
//! Edge activity is the PMI of the pair under the pair distribution:
//!
//! ```text
//! p(x,y) = D(x,y) / T      p(x) = m(x) / 2T
//! activity(x,y) = ln( p(x,y) / (p(x) p(y)) ) = ln( 4 D(x,y) T / (m(x) m(y)) )
//! ```
//!
//! where `m(x)` is the total weight incident to `x` and `T` the total edge
//! weight. Pruning keeps only edges with strictly positive activity.

use std::collections::HashMap;
use std::io::{self, Write};
use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Vocabulary, WordId};

#[derive(Debug, Error, PartialEq)]
pub enum ConetError {
    #[error("window size must be at least 2, got {0}")]
    InvalidWindow(usize),
    #[error("no co-occurrence between word {0} and word {1}")]
    UndefinedActivity(WordId, WordId),
}

/// How co-occurrence contexts are formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum WindowMode {
    /// Windows of `size` tokens at stride 1. Documents no longer than `size`
    /// form a single window.
    Sliding { size: usize },
    /// Each document is one window, whatever its length.
    Document,
}

impl Default for WindowMode {
    fn default() -> Self {
        WindowMode::Sliding { size: 10 }
    }
}

impl WindowMode {
    fn validate(&self) -> Result<(), ConetError> {
        match *self {
            WindowMode::Sliding { size } if size < 2 => Err(ConetError::InvalidWindow(size)),
            _ => Ok(()),
        }
    }

    fn effective_size(&self, doc_len: usize) -> usize {
        match *self {
            WindowMode::Sliding { size } => size,
            WindowMode::Document => doc_len.max(2),
        }
    }
}

/// Token spans scanned over a document of `doc_len` tokens.
pub fn enumerate_windows(
    doc_len: usize,
    window_size: usize,
) -> Result<Vec<Range<usize>>, ConetError> {
    if window_size < 2 {
        return Err(ConetError::InvalidWindow(window_size));
    }
    Ok(if doc_len < 2 {
        Vec::new()
    } else if doc_len <= window_size {
        std::iter::once(0..doc_len).collect()
    } else {
        (0..=doc_len - window_size)
            .map(|s| s..s + window_size)
            .collect()
    })
}

/// Number of windows containing both positions `i < j`.
#[inline]
fn shared_windows(i: usize, j: usize, doc_len: usize, window: usize) -> u64 {
    if doc_len <= window {
        return 1;
    }
    // window start s covers i and j iff j + 1 - window <= s <= i, s <= doc_len - window
    let lo = (j + 1).saturating_sub(window);
    let hi = i.min(doc_len - window);
    if hi >= lo {
        (hi - lo + 1) as u64
    } else {
        0
    }
}

#[inline]
fn edge_key(x: WordId, y: WordId) -> (WordId, WordId) {
    if x < y {
        (x, y)
    } else {
        (y, x)
    }
}

/// Pair counts accumulated over a set of documents, before conversion to the
/// sorted edge list. Partials over disjoint document sets merge by addition.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PairCounts {
    counts: HashMap<(WordId, WordId), u64>,
}

impl PairCounts {
    pub fn add_document(&mut self, tokens: &[WordId], mode: WindowMode) {
        let n = tokens.len();
        if n < 2 {
            return;
        }
        let window = mode.effective_size(n);
        for i in 0..n {
            let end = n.min(i + window);
            for j in i + 1..end {
                let (x, y) = (tokens[i], tokens[j]);
                if x == y {
                    continue;
                }
                *self.counts.entry(edge_key(x, y)).or_insert(0) += shared_windows(i, j, n, window);
            }
        }
    }

    pub fn merge(mut self, other: PairCounts) -> PairCounts {
        let (mut big, small) = if self.counts.len() >= other.counts.len() {
            (std::mem::take(&mut self.counts), other.counts)
        } else {
            (other.counts, std::mem::take(&mut self.counts))
        };
        for (k, v) in small {
            *big.entry(k).or_insert(0) += v;
        }
        PairCounts { counts: big }
    }

    pub fn get(&self, x: WordId, y: WordId) -> u64 {
        self.counts.get(&edge_key(x, y)).copied().unwrap_or(0)
    }

    pub fn into_network(self, num_words: usize, mode: WindowMode) -> RawCoNetwork {
        let mut edges: Vec<(WordId, WordId, u64)> = self
            .counts
            .into_iter()
            .map(|((x, y), d)| (x, y, d))
            .collect();
        edges.sort_unstable_by_key(|&(x, y, _)| (x, y));
        RawCoNetwork::from_edges(num_words, edges, mode)
    }
}

/// The weighted co-occurrence network before pruning.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawCoNetwork {
    /// Edges `(x, y, D(x,y))` with `x < y`, sorted by `(x, y)`.
    edges: Vec<(WordId, WordId, u64)>,
    /// `m(x)`: total weight incident to each word.
    node_weight: Vec<u64>,
    /// `T`: total weight over unordered pairs.
    total: u64,
    mode: WindowMode,
}

impl RawCoNetwork {
    /// Builds a network from an explicit edge list. Edges must have `x != y`;
    /// duplicate pairs (in either orientation) are summed.
    pub fn from_edges(
        num_words: usize,
        edges: Vec<(WordId, WordId, u64)>,
        mode: WindowMode,
    ) -> Self {
        let mut merged: Vec<(WordId, WordId, u64)> = edges
            .into_iter()
            .filter(|&(x, y, d)| x != y && d > 0)
            .map(|(x, y, d)| {
                let (a, b) = edge_key(x, y);
                (a, b, d)
            })
            .collect();
        merged.sort_unstable_by_key(|&(x, y, _)| (x, y));
        merged.dedup_by(|next, prev| {
            if next.0 == prev.0 && next.1 == prev.1 {
                prev.2 += next.2;
                true
            } else {
                false
            }
        });
        let mut node_weight = vec![0u64; num_words];
        let mut total = 0u64;
        for &(x, y, d) in &merged {
            node_weight[x as usize] += d;
            node_weight[y as usize] += d;
            total += d;
        }
        RawCoNetwork {
            edges: merged,
            node_weight,
            total,
            mode,
        }
    }

    pub fn num_words(&self) -> usize {
        self.node_weight.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Words with at least one edge.
    pub fn num_connected_words(&self) -> usize {
        self.node_weight.iter().filter(|&&m| m > 0).count()
    }

    pub fn edges(&self) -> &[(WordId, WordId, u64)] {
        &self.edges
    }

    /// `D(x,y)`; symmetric, zero when absent or `x == y`.
    pub fn weight(&self, x: WordId, y: WordId) -> u64 {
        let key = edge_key(x, y);
        self.edges
            .binary_search_by_key(&key, |&(a, b, _)| (a, b))
            .map(|i| self.edges[i].2)
            .unwrap_or(0)
    }

    /// `m(x)`.
    pub fn node_weight(&self, x: WordId) -> u64 {
        self.node_weight[x as usize]
    }

    /// `T`.
    pub fn total_weight(&self) -> u64 {
        self.total
    }

    pub fn mode(&self) -> WindowMode {
        self.mode
    }

    /// Activity of an existing edge.
    pub fn pmi_degree(&self, x: WordId, y: WordId) -> Result<f64, ConetError> {
        let d = self.weight(x, y);
        if d == 0 || self.total == 0 {
            return Err(ConetError::UndefinedActivity(x, y));
        }
        Ok(pmi_from_counts(
            d,
            self.node_weight(x),
            self.node_weight(y),
            self.total,
        ))
    }

    pub fn write_dump<W: Write>(&self, vocab: &Vocabulary, mut out: W) -> io::Result<()> {
        for &(x, y, d) in &self.edges {
            let a = pmi_from_counts(d, self.node_weight(x), self.node_weight(y), self.total);
            writeln!(out, "{}\t{}\t{}\t{}", vocab.word(x), vocab.word(y), d, a)?;
        }
        Ok(())
    }
}

/// `ln(4·D·T / (m_x·m_y))`. Integer numerator and denominator are compared
/// first so that exact independence yields exactly 0.
pub fn pmi_from_counts(pair: u64, m_x: u64, m_y: u64, total: u64) -> f64 {
    let num = 4u128 * pair as u128 * total as u128;
    let den = m_x as u128 * m_y as u128;
    if num == den {
        0.0
    } else {
        (num as f64 / den as f64).ln()
    }
}

/// Sums sliding-window pair counts over all documents.
///
/// Work is split across documents with rayon; partial counts are summed,
/// which is exact and order-independent, and the final edge list is sorted.
pub fn accumulate_pair_counts<D>(
    docs: &[D],
    num_words: usize,
    mode: WindowMode,
) -> Result<RawCoNetwork, ConetError>
where
    D: AsRef<[WordId]> + Sync,
{
    mode.validate()?;
    let counts = docs
        .par_iter()
        .fold(PairCounts::default, |mut acc, d| {
            acc.add_document(d.as_ref(), mode);
            acc
        })
        .reduce(PairCounts::default, PairCounts::merge);
    Ok(counts.into_network(num_words, mode))
}

/// The network after removing every edge with activity `<= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrunedCoNetwork {
    /// `(x, y, activity)` with `x < y`, sorted, activity strictly positive.
    edges: Vec<(WordId, WordId, f64)>,
    num_words: usize,
    raw_edges: usize,
    raw_total: u64,
}

impl PrunedCoNetwork {
    pub fn edges(&self) -> &[(WordId, WordId, f64)] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_words(&self) -> usize {
        self.num_words
    }

    pub fn num_connected_words(&self) -> usize {
        let mut seen = vec![false; self.num_words];
        for &(x, y, _) in &self.edges {
            seen[x as usize] = true;
            seen[y as usize] = true;
        }
        seen.into_iter().filter(|&s| s).count()
    }

    /// Edge count of the network this was pruned from.
    pub fn raw_edge_count(&self) -> usize {
        self.raw_edges
    }

    pub fn raw_total_weight(&self) -> u64 {
        self.raw_total
    }

    /// Symmetric; `None` for pruned or absent edges.
    pub fn activity(&self, x: WordId, y: WordId) -> Option<f64> {
        let key = edge_key(x, y);
        self.edges
            .binary_search_by_key(&key, |&(a, b, _)| (a, b))
            .ok()
            .map(|i| self.edges[i].2)
    }
}

pub fn prune(net: &RawCoNetwork) -> PrunedCoNetwork {
    let edges = net
        .edges
        .iter()
        .filter_map(|&(x, y, d)| {
            let a = pmi_from_counts(d, net.node_weight(x), net.node_weight(y), net.total);
            (a > 0.0).then_some((x, y, a))
        })
        .collect();
    PrunedCoNetwork {
        edges,
        num_words: net.num_words(),
        raw_edges: net.num_edges(),
        raw_total: net.total,
    }
}
