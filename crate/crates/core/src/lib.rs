//! Topic models for short and imbalanced text collections.
//!
//! Three models share one collapsed Gibbs sampler:
//!
//! * **LDA** samples topics for the tokens of each document.
//! * **WNTM** builds a sliding-window word co-occurrence network, turns each
//!   word's adjacency list into a pseudo-document with count multiplicities,
//!   and samples on those.
//! * **CWIBTD** weights the network edges by PMI, drops every edge with
//!   non-positive PMI, and scales the surviving activities into pseudo-document
//!   multiplicities. Frequent words lose weight relative to words that are
//!   rare but consistently co-occur, which helps small classes surface as
//!   topics.
//!
//! Document topics for the network models come from averaging word topic
//! distributions ([`inference`]); clusters are scored with Purity and NMI
//! ([`metrics`]).

pub mod conet;
pub mod corpus;
pub mod inference;
pub mod metrics;
pub mod model;
pub mod pseudodoc;
pub mod sampler;
pub mod stopwords;
pub mod synthetic;

pub use conet::{accumulate_pair_counts, prune, PrunedCoNetwork, RawCoNetwork, WindowMode};
pub use corpus::{Document, LabeledCorpus, PreprocessConfig, Vocabulary, WordId};
pub use inference::{assign_cluster, infer_doc_topics, DocTopicDistribution, WordTopics};
pub use metrics::{nmi, purity, scoped_metrics, MetricReport, Scope, ScopeMetrics, ScopeResult};
pub use model::{train_model, ModelKind, ModelParams, TrainedModel};
pub use pseudodoc::PseudoDocumentSet;
pub use sampler::{GibbsSampler, SamplerConfig, TopicModelState};
