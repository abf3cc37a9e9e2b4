//! TOML config file. Every section is optional and command-line flags win
//! over the file.
//!
//! ```toml
//! [preprocess]
//! min_count = 2
//! stopwords = "english"          # "none" or { file = "stop.txt" }
//!
//! [train]                        # applies to every model
//! topics = 8
//! iterations = 2000
//! window = 10                    # or "document"
//!
//! [cwibtd]                       # per-model overrides
//! pmi_scale = 10.0
//!
//! [benchmark]
//! corpus = "snippets.tsv"
//! models = ["lda", "wntm", "cwibtd"]
//! runs = 10
//! base_seed = 0
//! rare = ["sports", "health"]
//! output = "bench"
//!
//! [subset]
//! large = ["business", "computers"]
//! per_large = 300
//! rare = ["sports", "health"]
//! per_rare = 20
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use cwibtd_core::conet::WindowMode;
use cwibtd_core::corpus::{CorpusFormat, PreprocessConfig};
use cwibtd_core::model::{ModelKind, ModelParams};
use serde::Deserialize;

use crate::artifact::SubsetSpec;
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum WindowSpec {
    Size(usize),
    Named(String),
}

impl WindowSpec {
    pub fn resolve(&self) -> Result<WindowMode, CliError> {
        match self {
            WindowSpec::Size(size) => Ok(WindowMode::Sliding { size: *size }),
            WindowSpec::Named(s) => parse_window(s),
        }
    }
}

/// `document` or a window length.
pub fn parse_window(s: &str) -> Result<WindowMode, CliError> {
    if s.eq_ignore_ascii_case("document") {
        return Ok(WindowMode::Document);
    }
    s.parse::<usize>()
        .map(|size| WindowMode::Sliding { size })
        .map_err(|_| CliError::Usage(format!("window must be a length or `document`, got `{s}`")))
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamOverrides {
    pub topics: Option<usize>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub iterations: Option<usize>,
    pub seed: Option<u64>,
    pub window: Option<WindowSpec>,
    pub pmi_scale: Option<f64>,
}

impl ParamOverrides {
    pub fn apply(&self, params: &mut ModelParams) -> Result<(), CliError> {
        if let Some(v) = self.topics {
            params.topics = v;
        }
        if let Some(v) = self.alpha {
            params.alpha = v;
        }
        if let Some(v) = self.beta {
            params.beta = v;
        }
        if let Some(v) = self.iterations {
            params.iterations = v;
        }
        if let Some(v) = self.seed {
            params.seed = v;
        }
        if let Some(w) = &self.window {
            params.window = w.resolve()?;
        }
        if let Some(v) = self.pmi_scale {
            params.pmi_scale = v;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchmarkSection {
    pub corpus: Option<PathBuf>,
    pub format: Option<CorpusFormat>,
    pub models: Option<Vec<ModelKind>>,
    pub runs: Option<usize>,
    pub base_seed: Option<u64>,
    pub rare: Option<Vec<String>>,
    pub output: Option<PathBuf>,
    pub include_uncovered: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub preprocess: Option<PreprocessConfig>,
    pub train: ParamOverrides,
    pub lda: ParamOverrides,
    pub wntm: ParamOverrides,
    pub cwibtd: ParamOverrides,
    pub benchmark: BenchmarkSection,
    pub subset: Option<SubsetSpec>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {}", path.display(), e)))
    }

    pub fn load_optional(path: Option<&Path>) -> Result<Self, CliError> {
        path.map_or_else(|| Ok(FileConfig::default()), FileConfig::load)
    }

    pub fn model_overrides(&self, kind: ModelKind) -> &ParamOverrides {
        match kind {
            ModelKind::Lda => &self.lda,
            ModelKind::Wntm => &self.wntm,
            ModelKind::Cwibtd => &self.cwibtd,
        }
    }

    /// Defaults, then `[train]`, then the model's own section, then `flags`.
    pub fn model_params(
        &self,
        kind: ModelKind,
        default_topics: usize,
        flags: &ParamOverrides,
    ) -> Result<ModelParams, CliError> {
        let mut params = ModelParams::defaults(kind, default_topics);
        self.train.apply(&mut params)?;
        self.model_overrides(kind).apply(&mut params)?;
        flags.apply(&mut params)?;
        Ok(params)
    }
}
