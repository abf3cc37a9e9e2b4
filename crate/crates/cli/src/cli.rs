use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cwibtd_core::corpus::{CorpusFormat, PreprocessConfig, StopwordSource};
use cwibtd_core::model::ModelKind;

use crate::artifact::SubsetSpec;
use crate::config::{parse_window, ParamOverrides, WindowSpec};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "cwibtd",
    version,
    about = "Topic models for short and imbalanced text collections"
)]
pub struct Cli {
    /// TOML config file; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Preprocess a corpus file into an encoded corpus directory.
    Prepare(PrepareArgs),
    /// Train one model on a prepared corpus.
    Train(TrainArgs),
    /// Infer document topics and clusters with a trained model.
    Infer(InferArgs),
    /// Train and evaluate several models over a seed schedule.
    Benchmark(BenchmarkArgs),
    /// Purity and NMI of a predicted labeling against gold labels.
    Eval(EvalArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Labeled,
    Unlabeled,
}

impl From<FormatArg> for CorpusFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Labeled => CorpusFormat::Labeled,
            FormatArg::Unlabeled => CorpusFormat::Unlabeled,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct PreprocessArgs {
    #[arg(long)]
    pub min_count: Option<usize>,
    /// `english`, `none`, or a file with one word per line.
    #[arg(long, value_name = "LIST")]
    pub stopwords: Option<String>,
    /// Keep letter case.
    #[arg(long)]
    pub keep_case: bool,
    /// Drop all-digit tokens.
    #[arg(long)]
    pub drop_numeric: bool,
    #[arg(long)]
    pub min_token_len: Option<usize>,
}

impl PreprocessArgs {
    pub fn apply(&self, mut config: PreprocessConfig) -> PreprocessConfig {
        if let Some(v) = self.min_count {
            config.min_count = v;
        }
        if let Some(s) = &self.stopwords {
            config.stopwords = match s.as_str() {
                "english" => StopwordSource::English,
                "none" => StopwordSource::None,
                path => StopwordSource::File(PathBuf::from(path)),
            };
        }
        if self.keep_case {
            config.lowercase = false;
        }
        if self.drop_numeric {
            config.drop_numeric = true;
        }
        if let Some(v) = self.min_token_len {
            config.min_token_len = v;
        }
        config
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct SubsetArgs {
    /// Comma-separated large classes of the imbalanced subset.
    #[arg(long, value_delimiter = ',', value_name = "CLASSES")]
    pub large: Option<Vec<String>>,
    #[arg(long)]
    pub per_large: Option<usize>,
    /// Comma-separated rare classes of the imbalanced subset.
    #[arg(long, value_delimiter = ',', value_name = "CLASSES")]
    pub subset_rare: Option<Vec<String>>,
    #[arg(long)]
    pub per_rare: Option<usize>,
}

impl SubsetArgs {
    pub fn is_empty(&self) -> bool {
        self.large.is_none()
            && self.per_large.is_none()
            && self.subset_rare.is_none()
            && self.per_rare.is_none()
    }

    /// Merges flags into the file's subset, if any. All four fields must end
    /// up set.
    pub fn resolve(&self, file: Option<&SubsetSpec>) -> Result<Option<SubsetSpec>, CliError> {
        if self.is_empty() {
            return Ok(file.cloned());
        }
        let missing = |name: &str| CliError::Usage(format!("imbalanced subset needs --{name}"));
        Ok(Some(SubsetSpec {
            large: self
                .large
                .clone()
                .or_else(|| file.map(|f| f.large.clone()))
                .ok_or_else(|| missing("large"))?,
            per_large: self
                .per_large
                .or(file.map(|f| f.per_large))
                .ok_or_else(|| missing("per-large"))?,
            rare: self
                .subset_rare
                .clone()
                .or_else(|| file.map(|f| f.rare.clone()))
                .ok_or_else(|| missing("subset-rare"))?,
            per_rare: self
                .per_rare
                .or(file.map(|f| f.per_rare))
                .ok_or_else(|| missing("per-rare"))?,
        }))
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct ParamArgs {
    /// Number of topics; defaults to the number of non-empty classes.
    #[arg(long, short = 'k')]
    pub topics: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Window length, or `document` for whole-document contexts.
    #[arg(long, value_parser = check_window)]
    pub window: Option<String>,
    #[arg(long)]
    pub pmi_scale: Option<f64>,
}

fn check_window(s: &str) -> Result<String, String> {
    parse_window(s)
        .map(|_| s.to_string())
        .map_err(|e| e.to_string())
}

impl ParamArgs {
    pub fn overrides(&self, seed: Option<u64>) -> ParamOverrides {
        ParamOverrides {
            topics: self.topics,
            alpha: self.alpha,
            beta: self.beta,
            iterations: self.iterations,
            seed,
            window: self.window.clone().map(WindowSpec::Named),
            pmi_scale: self.pmi_scale,
        }
    }
}

#[derive(Debug, Args)]
pub struct PrepareArgs {
    /// Corpus file: `<class>\t<text>` lines, or plain lines with --format unlabeled.
    pub input: PathBuf,
    /// Output directory.
    #[arg(long, short)]
    pub output: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    #[command(flatten)]
    pub preprocess: PreprocessArgs,
    #[command(flatten)]
    pub subset: SubsetArgs,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Prepared corpus directory.
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, short)]
    pub model: ModelKind,
    /// Model file to write.
    #[arg(long, short)]
    pub output: PathBuf,
    /// Training manifest path; defaults to `<output stem>.manifest.json`.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub params: ParamArgs,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["input", "corpus"])))]
pub struct InferArgs {
    #[arg(long, short)]
    pub model: PathBuf,
    /// Raw text file, preprocessed with the model's own settings.
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "unlabeled")]
    pub format: FormatArg,
    /// Prepared corpus directory; its vocabulary must match the model's.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Write here instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    /// Labeled corpus file.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    #[arg(long, value_delimiter = ',', value_name = "MODELS")]
    pub models: Option<Vec<ModelKind>>,
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub base_seed: Option<u64>,
    /// Comma-separated rare classes for the rare scope; defaults to the
    /// subset's rare classes.
    #[arg(long, value_delimiter = ',', value_name = "CLASSES")]
    pub rare: Option<Vec<String>>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Also write per-document inference lines for every run.
    #[arg(long)]
    pub assignments: bool,
    /// Score documents without topic information as cluster 0 instead of
    /// leaving them out.
    #[arg(long)]
    pub include_uncovered: bool,
    #[command(flatten)]
    pub preprocess: PreprocessArgs,
    #[command(flatten)]
    pub subset: SubsetArgs,
    #[command(flatten)]
    pub params: ParamArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Predicted labels, one per line. Tab-separated lines are read as
    /// inference output and their second field is used.
    #[arg(long)]
    pub pred: PathBuf,
    /// Gold labels, one per line. Tab-separated lines are read as a labeled
    /// corpus and their first field is used.
    #[arg(long)]
    pub truth: PathBuf,
    /// Comma-separated gold classes forming the rare scope.
    #[arg(long, value_delimiter = ',', value_name = "CLASSES")]
    pub rare: Option<Vec<String>>,
    /// Skip documents whose inference line has coverage 0.
    #[arg(long)]
    pub skip_uncovered: bool,
}
