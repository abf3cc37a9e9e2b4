//! On-disk formats.
//!
//! A corpus artifact is a directory:
//!
//! ```text
//! vocab.txt      one word per line, line i is word id i
//! corpus.txt     <class id>\t<space separated word ids>, one document per line
//! manifest.json  preprocessing parameters, class names, statistics, hashes
//! ```
//!
//! A model artifact is one JSON file holding the vocabulary, the
//! preprocessing parameters and the trained model. Nothing time-dependent is
//! written into either, so rerunning a command reproduces them byte for byte.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use cwibtd_core::corpus::{
    encode_with_vocabulary, load_labeled_corpus, preprocess, select_imbalanced_indices,
    CorpusFormat, CorpusStats, Document, LabeledCorpus, PreprocessConfig, RawCorpus, Vocabulary,
    WordId,
};
use cwibtd_core::model::{NetworkStats, TrainedModel};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const CORPUS_FORMAT: &str = "cwibtd-corpus";
pub const MODEL_FORMAT: &str = "cwibtd-model";
pub const FORMAT_VERSION: u32 = 1;

/// The imbalanced-subset recipe: the first `per_large` documents of each
/// large class and the first `per_rare` of each rare class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubsetSpec {
    pub large: Vec<String>,
    pub per_large: usize,
    pub rare: Vec<String>,
    pub per_rare: usize,
}

impl SubsetSpec {
    pub fn apply(&self, raw: &RawCorpus) -> Result<RawCorpus, CliError> {
        let labels = raw
            .labels
            .as_ref()
            .ok_or_else(|| CliError::Usage("an imbalanced subset needs a labeled corpus".into()))?;
        let large = class_ids(&raw.class_names, &self.large)?;
        let rare = class_ids(&raw.class_names, &self.rare)?;
        let idx = select_imbalanced_indices(
            labels,
            &raw.class_names,
            &large,
            self.per_large,
            &rare,
            self.per_rare,
        )?;
        Ok(raw.select(&idx))
    }
}

pub fn class_ids(class_names: &[String], wanted: &[String]) -> Result<Vec<usize>, CliError> {
    wanted
        .iter()
        .map(|name| {
            class_names.iter().position(|c| c == name).ok_or_else(|| {
                CliError::Usage(format!(
                    "unknown class `{name}` (known: {})",
                    class_names.join(", ")
                ))
            })
        })
        .collect()
}

/// SHA-256 over the token ids of `docs`, ignoring labels.
pub fn docs_hash(docs: &[Document]) -> String {
    let mut hasher = Sha256::new();
    for doc in docs {
        hasher.update((doc.len() as u64).to_le_bytes());
        for t in &doc.tokens {
            hasher.update(t.to_le_bytes());
        }
    }
    hex::encode(hasher.finalize())
}

pub fn file_sha256(path: &Path) -> Result<String, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Reads a corpus file, applies the optional subset, and preprocesses it.
pub fn load_and_preprocess(
    path: &Path,
    format: CorpusFormat,
    config: &PreprocessConfig,
    subset: Option<&SubsetSpec>,
) -> Result<(LabeledCorpus, Vocabulary), CliError> {
    let mut raw = load_labeled_corpus(path, format)?;
    if let Some(spec) = subset {
        raw = spec.apply(&raw)?;
    }
    Ok(preprocess(&raw, config)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub format: String,
    pub version: u32,
    /// Input path as given on the command line.
    pub source: String,
    pub source_sha256: String,
    pub input_format: CorpusFormat,
    pub preprocess: PreprocessConfig,
    pub subset: Option<SubsetSpec>,
    pub class_names: Vec<String>,
    pub stats: CorpusStats,
    pub vocab_hash: String,
    pub corpus_hash: String,
    pub docs_hash: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusArtifact {
    pub manifest: CorpusManifest,
    pub corpus: LabeledCorpus,
    pub vocab: Vocabulary,
}

impl CorpusArtifact {
    pub fn build(
        source: &Path,
        input_format: CorpusFormat,
        preprocess: PreprocessConfig,
        subset: Option<SubsetSpec>,
    ) -> Result<Self, CliError> {
        let (corpus, vocab) =
            load_and_preprocess(source, input_format, &preprocess, subset.as_ref())?;
        let manifest = CorpusManifest {
            format: CORPUS_FORMAT.into(),
            version: FORMAT_VERSION,
            source: source.display().to_string(),
            source_sha256: file_sha256(source)?,
            input_format,
            preprocess,
            subset,
            class_names: corpus.class_names.clone(),
            stats: corpus.stats(vocab.len()),
            vocab_hash: vocab.hash(),
            corpus_hash: corpus.content_hash(),
            docs_hash: docs_hash(&corpus.docs),
        };
        Ok(CorpusArtifact {
            manifest,
            corpus,
            vocab,
        })
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        write_with(&dir.join("vocab.txt"), |w| {
            for word in self.vocab.words() {
                writeln!(w, "{word}")?;
            }
            Ok(())
        })?;
        write_with(&dir.join("corpus.txt"), |w| {
            for (doc, label) in self.corpus.docs.iter().zip(&self.corpus.labels) {
                write!(w, "{label}\t")?;
                for (i, t) in doc.tokens.iter().enumerate() {
                    if i > 0 {
                        write!(w, " ")?;
                    }
                    write!(w, "{t}")?;
                }
                writeln!(w)?;
            }
            Ok(())
        })?;
        write_json(&dir.join("manifest.json"), &self.manifest)
    }

    pub fn read(dir: &Path) -> Result<Self, CliError> {
        let manifest: CorpusManifest = read_json(&dir.join("manifest.json"))?;
        if manifest.format != CORPUS_FORMAT || manifest.version != FORMAT_VERSION {
            return Err(CliError::artifact(
                dir,
                format!("not a {CORPUS_FORMAT} v{FORMAT_VERSION} artifact"),
            ));
        }
        let vocab_path = dir.join("vocab.txt");
        let words = read_lines(&vocab_path)?;
        let vocab = Vocabulary::from_words(&words);
        if vocab.len() != words.len() {
            return Err(CliError::artifact(&vocab_path, "duplicate words"));
        }

        let corpus_path = dir.join("corpus.txt");
        let mut docs = Vec::new();
        let mut labels = Vec::new();
        for (i, line) in read_lines(&corpus_path)?.iter().enumerate() {
            let bad =
                |msg: &str| CliError::artifact(&corpus_path, format!("line {}: {msg}", i + 1));
            let (label, ids) = line
                .split_once('\t')
                .ok_or_else(|| bad("expected `<class>\\t<ids>`"))?;
            labels.push(label.parse::<usize>().map_err(|_| bad("bad class id"))?);
            let tokens = ids
                .split_whitespace()
                .map(|t| match t.parse::<WordId>() {
                    Ok(id) if (id as usize) < vocab.len() => Ok(id),
                    _ => Err(bad(&format!("bad word id `{t}`"))),
                })
                .collect::<Result<Vec<_>, _>>()?;
            docs.push(Document::new(tokens));
        }
        let corpus = LabeledCorpus::new(docs, labels, manifest.class_names.clone())?;
        if vocab.hash() != manifest.vocab_hash {
            return Err(CliError::artifact(
                &vocab_path,
                "vocabulary hash does not match manifest",
            ));
        }
        if corpus.content_hash() != manifest.corpus_hash {
            return Err(CliError::artifact(
                &corpus_path,
                "corpus hash does not match manifest",
            ));
        }
        Ok(CorpusArtifact {
            manifest,
            corpus,
            vocab,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub format: String,
    pub version: u32,
    pub vocabulary: Vec<String>,
    pub vocab_hash: String,
    pub preprocess: PreprocessConfig,
    /// Token hash of the training documents.
    pub training_docs_hash: String,
    pub model: TrainedModel,
}

impl ModelArtifact {
    pub fn new(corpus: &CorpusArtifact, model: TrainedModel) -> Self {
        ModelArtifact {
            format: MODEL_FORMAT.into(),
            version: FORMAT_VERSION,
            vocabulary: corpus.vocab.words().to_vec(),
            vocab_hash: corpus.manifest.vocab_hash.clone(),
            preprocess: corpus.manifest.preprocess.clone(),
            training_docs_hash: corpus.manifest.docs_hash.clone(),
            model,
        }
    }

    pub fn vocabulary(&self) -> Vocabulary {
        Vocabulary::from_words(&self.vocabulary)
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        write_json(path, self)
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let artifact: ModelArtifact = read_json(path)?;
        if artifact.format != MODEL_FORMAT || artifact.version != FORMAT_VERSION {
            return Err(CliError::artifact(
                path,
                format!("not a {MODEL_FORMAT} v{FORMAT_VERSION} artifact"),
            ));
        }
        if artifact.vocabulary().hash() != artifact.vocab_hash {
            return Err(CliError::artifact(
                path,
                "vocabulary hash does not match its word list",
            ));
        }
        Ok(artifact)
    }

    /// Encodes raw text with the model's own preprocessing and vocabulary.
    pub fn encode(&self, raw: &RawCorpus) -> Result<LabeledCorpus, CliError> {
        Ok(encode_with_vocabulary(
            raw,
            &self.preprocess,
            &self.vocabulary(),
        )?)
    }
}

/// Written next to the model; holds the run-specific facts that are kept out
/// of the model file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainManifest {
    pub kind: String,
    pub params: cwibtd_core::model::ModelParams,
    pub seed: u64,
    pub corpus: String,
    pub vocab_hash: String,
    pub corpus_hash: String,
    pub model_sha256: String,
    pub wall_time_secs: f64,
    pub network: Option<NetworkStats>,
}

/// `model.json` → `model.manifest.json`.
pub fn default_manifest_path(model: &Path) -> PathBuf {
    let stem = model
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "model".into());
    model.with_file_name(format!("{stem}.manifest.json"))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    write_with(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        writeln!(w)
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_reader(BufReader::new(file))
        .map_err(|e| CliError::artifact(path, e.to_string()))
}

pub fn write_with<F>(path: &Path, f: F) -> Result<(), CliError>
where
    F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
{
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    f(&mut w)
        .and_then(|_| w.flush())
        .map_err(|e| CliError::io(path, e))
}

fn read_lines(path: &Path) -> Result<Vec<String>, CliError> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    BufReader::new(file)
        .lines()
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::io(path, e))
}
