use std::path::PathBuf;

use cwibtd_core::conet::ConetError;
use cwibtd_core::corpus::CorpusError;
use cwibtd_core::metrics::MetricsError;
use cwibtd_core::model::ModelError;
use cwibtd_core::sampler::SamplerError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("{0}")]
    Data(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Artifact { path: PathBuf, message: String },
    #[error("vocabulary mismatch: model expects {expected}, input has {found}")]
    VocabularyMismatch { expected: String, found: String },
    #[error("{model} run {run} (seed {seed}) failed: {source}")]
    Run {
        model: String,
        run: usize,
        seed: u64,
        #[source]
        source: Box<CliError>,
    },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn artifact(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        CliError::Artifact {
            path: path.into(),
            message: message.into(),
        }
    }

    /// 1 usage, 2 data, 3 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Model(ModelError::Sampler(SamplerError::Numerical { .. })) => 3,
            CliError::Model(ModelError::Sampler(SamplerError::InvalidConfig(_))) => 1,
            CliError::Model(ModelError::Network(ConetError::InvalidWindow(_)))
            | CliError::Model(ModelError::PseudoDoc(_)) => 1,
            CliError::Run { source, .. } => source.exit_code(),
            _ => 2,
        }
    }
}
