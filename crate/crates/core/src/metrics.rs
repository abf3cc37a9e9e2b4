//! Clustering quality against gold classes: Purity and NMI.
//!
//! Both are computed from the class × cluster contingency table. NMI uses
//! natural logarithms; the base cancels in the ratio. When either partition
//! has zero entropy (a single class or a single cluster) NMI is defined as 0.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("{pred} predicted labels but {truth} true labels")]
    LengthMismatch { pred: usize, truth: usize },
    #[error("no documents to evaluate")]
    EmptyInput,
    #[error("rare class {0} does not occur in the true labels")]
    UnknownClass(usize),
}

/// Class × cluster counts. Rows and columns are the distinct labels in
/// ascending order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    /// `d_hl`, row-major: classes × clusters
    counts: Vec<u64>,
    class_totals: Vec<u64>,
    cluster_totals: Vec<u64>,
    total: u64,
}

impl ContingencyTable {
    pub fn new(pred: &[usize], truth: &[usize]) -> Result<Self, MetricsError> {
        if pred.len() != truth.len() {
            return Err(MetricsError::LengthMismatch {
                pred: pred.len(),
                truth: truth.len(),
            });
        }
        if pred.is_empty() {
            return Err(MetricsError::EmptyInput);
        }
        let index = |labels: &[usize]| -> BTreeMap<usize, usize> {
            let set: BTreeSet<usize> = labels.iter().copied().collect();
            set.into_iter().enumerate().map(|(i, l)| (l, i)).collect()
        };
        let classes = index(truth);
        let clusters = index(pred);
        let (h, l) = (classes.len(), clusters.len());
        let mut counts = vec![0u64; h * l];
        let mut class_totals = vec![0u64; h];
        let mut cluster_totals = vec![0u64; l];
        for (p, t) in pred.iter().zip(truth) {
            let (r, c) = (classes[t], clusters[p]);
            counts[r * l + c] += 1;
            class_totals[r] += 1;
            cluster_totals[c] += 1;
        }
        Ok(ContingencyTable {
            counts,
            class_totals,
            cluster_totals,
            total: pred.len() as u64,
        })
    }

    pub fn num_classes(&self) -> usize {
        self.class_totals.len()
    }

    pub fn num_clusters(&self) -> usize {
        self.cluster_totals.len()
    }

    pub fn count(&self, class: usize, cluster: usize) -> u64 {
        self.counts[class * self.num_clusters() + cluster]
    }

    pub fn class_totals(&self) -> &[u64] {
        &self.class_totals
    }

    pub fn cluster_totals(&self) -> &[u64] {
        &self.cluster_totals
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// `(1/N) Σ_clusters max_class d_hl`.
    pub fn purity(&self) -> f64 {
        let matched: u64 = (0..self.num_clusters())
            .map(|c| {
                (0..self.num_classes())
                    .map(|h| self.count(h, c))
                    .max()
                    .unwrap_or(0)
            })
            .sum();
        matched as f64 / self.total as f64
    }

    pub fn nmi(&self) -> f64 {
        let d = self.total;
        // Σ d_h ln(D/d_h) and Σ c_l ln(D/c_l): the negated denominator factors
        let entropy = |totals: &[u64]| -> f64 {
            totals
                .iter()
                .filter(|&&n| n > 0)
                .map(|&n| n as f64 * (d as f64 / n as f64).ln())
                .sum()
        };
        let h_class = entropy(&self.class_totals);
        let h_cluster = entropy(&self.cluster_totals);
        if h_class == 0.0 || h_cluster == 0.0 {
            return 0.0;
        }
        let l = self.num_clusters();
        let mut mutual = 0.0;
        for h in 0..self.num_classes() {
            for c in 0..l {
                let n = self.counts[h * l + c];
                if n == 0 {
                    continue;
                }
                let num = d * n;
                let den = self.class_totals[h] * self.cluster_totals[c];
                mutual += n as f64 * (num as f64 / den as f64).ln();
            }
        }
        let norm = if h_class == h_cluster {
            h_class
        } else {
            (h_class * h_cluster).sqrt()
        };
        (mutual / norm).clamp(0.0, 1.0)
    }
}

pub fn purity(pred: &[usize], truth: &[usize]) -> Result<f64, MetricsError> {
    Ok(ContingencyTable::new(pred, truth)?.purity())
}

pub fn nmi(pred: &[usize], truth: &[usize]) -> Result<f64, MetricsError> {
    Ok(ContingencyTable::new(pred, truth)?.nmi())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scope {
    All,
    RareOnly,
}

impl Scope {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scope::All => "all",
            Scope::RareOnly => "rare",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScopeMetrics {
    pub purity: f64,
    pub nmi: f64,
    pub documents: usize,
}

/// Metrics for one scope, or a marker that the scope selected no documents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum ScopeResult {
    Evaluated(ScopeMetrics),
    EmptyScope,
}

impl ScopeResult {
    pub fn metrics(&self) -> Option<&ScopeMetrics> {
        match self {
            ScopeResult::Evaluated(m) => Some(m),
            ScopeResult::EmptyScope => None,
        }
    }
}

/// Metrics over every document and over the documents whose true class is
/// in `rare_classes`. The rare scope keeps predicted labels unchanged.
pub fn scoped_metrics(
    pred: &[usize],
    truth: &[usize],
    rare_classes: &[usize],
) -> Result<(ScopeMetrics, ScopeResult), MetricsError> {
    let table = ContingencyTable::new(pred, truth)?;
    let all = ScopeMetrics {
        purity: table.purity(),
        nmi: table.nmi(),
        documents: pred.len(),
    };
    let rare: BTreeSet<usize> = rare_classes.iter().copied().collect();
    for &c in &rare {
        if !truth.contains(&c) {
            return Err(MetricsError::UnknownClass(c));
        }
    }
    if rare.is_empty() {
        return Ok((all, ScopeResult::EmptyScope));
    }
    let (rp, rt): (Vec<usize>, Vec<usize>) = pred
        .iter()
        .zip(truth)
        .filter(|(_, t)| rare.contains(t))
        .map(|(&p, &t)| (p, t))
        .unzip();
    let rt_table = ContingencyTable::new(&rp, &rt)?;
    let rare_metrics = ScopeMetrics {
        purity: rt_table.purity(),
        nmi: rt_table.nmi(),
        documents: rp.len(),
    };
    Ok((all, ScopeResult::Evaluated(rare_metrics)))
}

/// Per-run values of one scope plus their means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub scope: Scope,
    pub purity: Vec<f64>,
    pub nmi: Vec<f64>,
    pub mean_purity: f64,
    pub mean_nmi: f64,
}

impl MetricReport {
    /// Returns `None` when no run produced a value for this scope.
    pub fn aggregate(scope: Scope, runs: &[ScopeMetrics]) -> Option<Self> {
        if runs.is_empty() {
            return None;
        }
        let purity: Vec<f64> = runs.iter().map(|r| r.purity).collect();
        let nmi: Vec<f64> = runs.iter().map(|r| r.nmi).collect();
        Some(MetricReport {
            scope,
            mean_purity: mean(&purity),
            mean_nmi: mean(&nmi),
            purity,
            nmi,
        })
    }

    pub fn runs(&self) -> usize {
        self.purity.len()
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}
