//! Training dispatch for the three models.
//!
//! * `lda`: the sampler runs on the documents themselves.
//! * `wntm`: sliding-window network → count pseudo-documents → sampler.
//! * `cwibtd`: sliding-window network → PMI pruning → PMI-scaled
//!   pseudo-documents → sampler.
//!
//! Network models learn one topic distribution per connected word and infer
//! document topics from those; LDA reads document topics straight from its
//! θ rows.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conet::{accumulate_pair_counts, prune, ConetError, WindowMode};
use crate::corpus::{Document, WordId};
use crate::inference::{infer_doc_topics, DocTopicDistribution, WordTopics};
use crate::pseudodoc::{
    count_pseudo_docs, pmi_pseudo_docs, PseudoDocError, PseudoDocumentSet, DEFAULT_PMI_SCALE,
};
use crate::sampler::{train, Phi, SamplerConfig, SamplerError, Theta};

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error(transparent)]
    Network(#[from] ConetError),
    #[error(transparent)]
    PseudoDoc(#[from] PseudoDocError),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error("the co-occurrence network has no edges left to build pseudo-documents from")]
    EmptyNetwork,
    #[error("LDA models only hold topic proportions for their training documents")]
    NoWordTopics,
    #[error("document index {index} out of range for {docs} training documents")]
    DocumentOutOfRange { index: usize, docs: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Lda,
    Wntm,
    Cwibtd,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Lda, ModelKind::Wntm, ModelKind::Cwibtd];

    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKind::Lda => "lda",
            ModelKind::Wntm => "wntm",
            ModelKind::Cwibtd => "cwibtd",
        }
    }

    pub fn display_name(&self) -> &'static str {
        match self {
            ModelKind::Lda => "LDA",
            ModelKind::Wntm => "WNTM",
            ModelKind::Cwibtd => "CWIBTD",
        }
    }

    pub fn is_network(&self) -> bool {
        !matches!(self, ModelKind::Lda)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "lda" => Ok(ModelKind::Lda),
            "wntm" => Ok(ModelKind::Wntm),
            "cwibtd" => Ok(ModelKind::Cwibtd),
            other => Err(format!(
                "unknown model `{other}` (expected lda, wntm or cwibtd)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub topics: usize,
    pub alpha: f64,
    pub beta: f64,
    pub iterations: usize,
    pub seed: u64,
    /// Ignored by LDA.
    pub window: WindowMode,
    /// Multiplier applied to PMI activities before rounding; CWIBTD only.
    pub pmi_scale: f64,
}

impl ModelParams {
    /// LDA: α = 0.05, β = 0.01. WNTM and CWIBTD: α = β = 0.1 with a
    /// 10-word window. 2000 iterations for all three.
    pub fn defaults(kind: ModelKind, topics: usize) -> Self {
        let (alpha, beta) = match kind {
            ModelKind::Lda => (0.05, 0.01),
            ModelKind::Wntm | ModelKind::Cwibtd => (0.1, 0.1),
        };
        ModelParams {
            topics,
            alpha,
            beta,
            iterations: 2000,
            seed: 0,
            window: WindowMode::Sliding { size: 10 },
            pmi_scale: DEFAULT_PMI_SCALE,
        }
    }

    pub fn sampler_config(&self) -> SamplerConfig {
        SamplerConfig {
            topics: self.topics,
            alpha: self.alpha,
            beta: self.beta,
            iterations: self.iterations,
            seed: self.seed,
        }
    }
}

/// Size of the network and pseudo-document set behind a network model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkStats {
    pub nodes: usize,
    pub raw_edges: usize,
    /// Edge count after PMI pruning; `None` when the model does not prune.
    pub pruned_edges: Option<usize>,
    pub total_pair_weight: u64,
    pub pseudo_docs: usize,
    pub pseudo_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub kind: ModelKind,
    pub params: ModelParams,
    pub vocab_size: usize,
    pub phi: Phi,
    /// Rows are training documents (LDA) or connected words (network models).
    pub theta: Theta,
    /// Word of each θ row, for network models.
    pub origin_words: Option<Vec<WordId>>,
    pub topic_totals: Vec<u64>,
    pub network: Option<NetworkStats>,
}

impl TrainedModel {
    pub fn num_topics(&self) -> usize {
        self.params.topics
    }

    pub fn word_topics(&self) -> Result<WordTopics, ModelError> {
        match &self.origin_words {
            Some(origin) => Ok(WordTopics::new(self.theta.clone(), origin, self.vocab_size)),
            None => Err(ModelError::NoWordTopics),
        }
    }

    /// Topic distribution of each training document. Network models infer
    /// from word distributions; LDA returns its θ rows, with coverage 0 for
    /// documents that had no tokens.
    pub fn training_doc_topics(
        &self,
        docs: &[Document],
    ) -> Result<Vec<DocTopicDistribution>, ModelError> {
        match self.kind {
            ModelKind::Lda => {
                if docs.len() != self.theta.rows() {
                    return Err(ModelError::DocumentOutOfRange {
                        index: docs.len(),
                        docs: self.theta.rows(),
                    });
                }
                Ok(docs
                    .iter()
                    .enumerate()
                    .map(|(i, d)| {
                        if d.is_empty() {
                            DocTopicDistribution::uniform(self.num_topics())
                        } else {
                            DocTopicDistribution {
                                p: self.theta.row(i).to_vec(),
                                coverage: 1.0,
                            }
                        }
                    })
                    .collect())
            }
            ModelKind::Wntm | ModelKind::Cwibtd => {
                let topics = self.word_topics()?;
                Ok(docs
                    .iter()
                    .map(|d| infer_doc_topics(&d.tokens, &topics))
                    .collect())
            }
        }
    }
}

fn train_on_pseudo_docs(
    kind: ModelKind,
    pseudo: PseudoDocumentSet,
    params: &ModelParams,
    mut stats: NetworkStats,
) -> Result<TrainedModel, ModelError> {
    if pseudo.is_empty() {
        return Err(ModelError::EmptyNetwork);
    }
    stats.pseudo_docs = pseudo.len();
    stats.pseudo_tokens = pseudo.total_tokens();
    let vocab_size = pseudo.num_words();
    let trained = train(&pseudo.expand(), vocab_size, params.sampler_config())?;
    Ok(TrainedModel {
        kind,
        params: *params,
        vocab_size,
        phi: trained.phi,
        theta: trained.theta,
        origin_words: Some(pseudo.origin_words().to_vec()),
        topic_totals: trained.state.topic_counts().to_vec(),
        network: Some(stats),
    })
}

pub fn train_model(
    kind: ModelKind,
    docs: &[Document],
    vocab_size: usize,
    params: &ModelParams,
) -> Result<TrainedModel, ModelError> {
    params.sampler_config().validate()?;
    match kind {
        ModelKind::Lda => {
            let trained = train(docs, vocab_size, params.sampler_config())?;
            Ok(TrainedModel {
                kind,
                params: *params,
                vocab_size,
                phi: trained.phi,
                theta: trained.theta,
                origin_words: None,
                topic_totals: trained.state.topic_counts().to_vec(),
                network: None,
            })
        }
        ModelKind::Wntm => {
            let raw = accumulate_pair_counts(docs, vocab_size, params.window)?;
            let stats = NetworkStats {
                nodes: raw.num_connected_words(),
                raw_edges: raw.num_edges(),
                pruned_edges: None,
                total_pair_weight: raw.total_weight(),
                pseudo_docs: 0,
                pseudo_tokens: 0,
            };
            train_on_pseudo_docs(kind, count_pseudo_docs(&raw), params, stats)
        }
        ModelKind::Cwibtd => {
            let raw = accumulate_pair_counts(docs, vocab_size, params.window)?;
            let pruned = prune(&raw);
            let stats = NetworkStats {
                nodes: raw.num_connected_words(),
                raw_edges: raw.num_edges(),
                pruned_edges: Some(pruned.num_edges()),
                total_pair_weight: raw.total_weight(),
                pseudo_docs: 0,
                pseudo_tokens: 0,
            };
            train_on_pseudo_docs(
                kind,
                pmi_pseudo_docs(&pruned, params.pmi_scale)?,
                params,
                stats,
            )
        }
    }
}
