//! Corpus ingestion and preprocessing.
//!
//! Raw labeled short texts are tokenized (lowercase, split on every
//! non-alphanumeric character), filtered against a stopword list and a
//! minimum corpus frequency, and encoded as dense word ids. Documents that
//! lose every token to filtering are kept as empty documents so that labels
//! stay aligned; evaluation code is expected to skip them.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::stopwords::ENGLISH_STOPWORDS;

pub type WordId = u32;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("no token survives filtering (min_count={min_count})")]
    EmptyVocabulary { min_count: usize },
    #[error("min_count must be at least 1")]
    InvalidMinCount,
    #[error("{docs} documents but {labels} labels")]
    LabelMismatch { docs: usize, labels: usize },
    #[error("class {class} has {available} documents, {requested} requested")]
    InsufficientClassSize {
        class: String,
        available: usize,
        requested: usize,
    },
    #[error("class id {0} is out of range")]
    UnknownClass(usize),
    #[error("class {0} listed more than once")]
    OverlappingClasses(String),
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Where the stopword list comes from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopwordSource {
    /// Bundled English list.
    English,
    None,
    /// One word per line; blank lines and `#` comments ignored.
    File(PathBuf),
}

/// Preprocessing options. Every field has a default so a config file may
/// override any subset of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessConfig {
    pub lowercase: bool,
    /// Minimum corpus frequency for a word to enter the vocabulary.
    pub min_count: usize,
    pub stopwords: StopwordSource,
    /// Drop tokens made only of digits.
    pub drop_numeric: bool,
    /// Drop tokens shorter than this many characters.
    pub min_token_len: usize,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            lowercase: true,
            min_count: 2,
            stopwords: StopwordSource::English,
            drop_numeric: false,
            min_token_len: 1,
        }
    }
}

impl PreprocessConfig {
    pub fn load_stopwords(&self) -> Result<HashSet<String>, CorpusError> {
        match &self.stopwords {
            StopwordSource::English => {
                Ok(ENGLISH_STOPWORDS.iter().map(|w| w.to_string()).collect())
            }
            StopwordSource::None => Ok(HashSet::new()),
            StopwordSource::File(path) => {
                let file = File::open(path).map_err(|source| CorpusError::Io {
                    path: path.clone(),
                    source,
                })?;
                let mut words = HashSet::new();
                for line in BufReader::new(file).lines() {
                    let line = line.map_err(|source| CorpusError::Io {
                        path: path.clone(),
                        source,
                    })?;
                    let word = line.trim();
                    if word.is_empty() || word.starts_with('#') {
                        continue;
                    }
                    let word = if self.lowercase {
                        word.to_lowercase()
                    } else {
                        word.to_string()
                    };
                    words.insert(word);
                }
                Ok(words)
            }
        }
    }
}

/// Splits text into tokens.
///
/// Every character for which [`char::is_alphanumeric`] is false (ASCII and
/// Unicode punctuation, symbols such as `+`, `/`, `'`, `-`, and whitespace)
/// acts as a separator. Token order is preserved.
pub fn tokenize(raw_text: &str, config: &PreprocessConfig) -> Vec<String> {
    raw_text
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| {
            if config.lowercase {
                t.to_lowercase()
            } else {
                t.to_string()
            }
        })
        .filter(|t| t.chars().count() >= config.min_token_len)
        .filter(|t| !(config.drop_numeric && t.chars().all(|c| c.is_numeric())))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    index: HashMap<String, WordId>,
}

impl Vocabulary {
    /// Builds a vocabulary from an ordered word list. Duplicates keep their
    /// first position.
    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut vocab = Vocabulary {
            words: Vec::new(),
            index: HashMap::new(),
        };
        for w in words {
            vocab.insert(w.into());
        }
        vocab
    }

    fn insert(&mut self, word: String) -> WordId {
        if let Some(&id) = self.index.get(&word) {
            return id;
        }
        let id = self.words.len() as WordId;
        self.index.insert(word.clone(), id);
        self.words.push(word);
        id
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn id(&self, word: &str) -> Option<WordId> {
        self.index.get(word).copied()
    }

    pub fn word(&self, id: WordId) -> &str {
        &self.words[id as usize]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    /// SHA-256 over the words in id order, newline-terminated, hex encoded.
    pub fn hash(&self) -> String {
        let mut hasher = Sha256::new();
        for w in &self.words {
            hasher.update(w.as_bytes());
            hasher.update(b"\n");
        }
        hex::encode(hasher.finalize())
    }
}

/// Keeps tokens with corpus frequency `>= min_count` that are not stopwords.
/// Ids follow first occurrence in the corpus.
///
/// Stopwords are removed before frequencies are compared; since a token's
/// count does not depend on any other token, the order of the two filters
/// does not change the result.
pub fn build_vocabulary<S: AsRef<str>>(
    docs: &[Vec<S>],
    min_count: usize,
    stopwords: &HashSet<String>,
) -> Result<Vocabulary, CorpusError> {
    if min_count == 0 {
        return Err(CorpusError::InvalidMinCount);
    }
    let mut counts: HashMap<&str, usize> = HashMap::new();
    let mut order: Vec<&str> = Vec::new();
    for doc in docs {
        for tok in doc {
            let tok = tok.as_ref();
            if stopwords.contains(tok) {
                continue;
            }
            let c = counts.entry(tok).or_insert(0);
            if *c == 0 {
                order.push(tok);
            }
            *c += 1;
        }
    }
    let vocab = Vocabulary::from_words(order.into_iter().filter(|t| counts[t] >= min_count));
    if vocab.is_empty() {
        return Err(CorpusError::EmptyVocabulary { min_count });
    }
    Ok(vocab)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Document {
    pub tokens: Vec<WordId>,
}

impl Document {
    pub fn new(tokens: Vec<WordId>) -> Self {
        Self { tokens }
    }

    /// Number of tokens after filtering.
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    /// True for documents emptied by filtering; these carry no signal.
    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Occurrence count of each word, sorted by word id.
    pub fn term_counts(&self) -> Vec<(WordId, usize)> {
        let mut sorted = self.tokens.clone();
        sorted.sort_unstable();
        let mut out: Vec<(WordId, usize)> = Vec::new();
        for w in sorted {
            match out.last_mut() {
                Some((last, n)) if *last == w => *n += 1,
                _ => out.push((w, 1)),
            }
        }
        out
    }
}

impl AsRef<[WordId]> for Document {
    fn as_ref(&self) -> &[WordId] {
        &self.tokens
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledCorpus {
    pub docs: Vec<Document>,
    pub labels: Vec<usize>,
    pub class_names: Vec<String>,
}

impl LabeledCorpus {
    pub fn new(
        docs: Vec<Document>,
        labels: Vec<usize>,
        class_names: Vec<String>,
    ) -> Result<Self, CorpusError> {
        if docs.len() != labels.len() {
            return Err(CorpusError::LabelMismatch {
                docs: docs.len(),
                labels: labels.len(),
            });
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= class_names.len()) {
            return Err(CorpusError::UnknownClass(bad));
        }
        Ok(Self {
            docs,
            labels,
            class_names,
        })
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    /// Number of gold classes.
    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn total_tokens(&self) -> usize {
        self.docs.iter().map(Document::len).sum()
    }

    pub fn class_id(&self, name: &str) -> Option<usize> {
        self.class_names.iter().position(|c| c == name)
    }

    pub fn stats(&self, vocab_size: usize) -> CorpusStats {
        let lens: Vec<usize> = self.docs.iter().map(Document::len).collect();
        let total: usize = lens.iter().sum();
        CorpusStats {
            classes: self.num_classes(),
            documents: self.len(),
            mean_len: if lens.is_empty() {
                0.0
            } else {
                total as f64 / lens.len() as f64
            },
            max_len: lens.iter().copied().max().unwrap_or(0),
            vocab_size,
            tokens: total,
            empty_documents: lens.iter().filter(|&&l| l == 0).count(),
        }
    }

    /// SHA-256 over labels and token ids, for detecting whether two encoded
    /// corpora are identical.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        for (doc, label) in self.docs.iter().zip(&self.labels) {
            hasher.update((*label as u64).to_le_bytes());
            hasher.update((doc.len() as u64).to_le_bytes());
            for t in &doc.tokens {
                hasher.update(t.to_le_bytes());
            }
        }
        hex::encode(hasher.finalize())
    }
}

/// The corpus statistics reported per dataset: class count K, document
/// count N, mean/max length and vocabulary size V.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub classes: usize,
    pub documents: usize,
    pub mean_len: f64,
    pub max_len: usize,
    pub vocab_size: usize,
    pub tokens: usize,
    pub empty_documents: usize,
}

/// Encodes token lists against `vocab`, dropping out-of-vocabulary tokens.
/// Unlabeled input gets a single class named `unlabeled`.
pub fn encode_corpus<S: AsRef<str>>(
    docs: &[Vec<S>],
    labels: Option<(&[usize], &[String])>,
    vocab: &Vocabulary,
) -> Result<LabeledCorpus, CorpusError> {
    let encoded: Vec<Document> = docs
        .iter()
        .map(|d| Document::new(d.iter().filter_map(|t| vocab.id(t.as_ref())).collect()))
        .collect();
    match labels {
        Some((labels, names)) => LabeledCorpus::new(encoded, labels.to_vec(), names.to_vec()),
        None => {
            let n = encoded.len();
            LabeledCorpus::new(encoded, vec![0; n], vec!["unlabeled".to_string()])
        }
    }
}

pub fn decode_document(doc: &Document, vocab: &Vocabulary) -> Vec<String> {
    doc.tokens
        .iter()
        .map(|&t| vocab.word(t).to_string())
        .collect()
}

/// Indices of the first `per_large` documents of each large class followed by
/// the first `per_rare` of each rare class, classes in the order given and
/// documents in original order within a class.
pub fn select_imbalanced_indices(
    labels: &[usize],
    class_names: &[String],
    large_classes: &[usize],
    per_large: usize,
    rare_classes: &[usize],
    per_rare: usize,
) -> Result<Vec<usize>, CorpusError> {
    let mut seen = HashSet::new();
    for &c in large_classes.iter().chain(rare_classes) {
        if c >= class_names.len() {
            return Err(CorpusError::UnknownClass(c));
        }
        if !seen.insert(c) {
            return Err(CorpusError::OverlappingClasses(class_names[c].clone()));
        }
    }
    let plan = large_classes
        .iter()
        .map(|&c| (c, per_large))
        .chain(rare_classes.iter().map(|&c| (c, per_rare)));
    let mut out = Vec::new();
    for (class, wanted) in plan {
        let members: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == class)
            .map(|(i, _)| i)
            .take(wanted)
            .collect();
        if members.len() < wanted {
            let available = labels.iter().filter(|&&l| l == class).count();
            return Err(CorpusError::InsufficientClassSize {
                class: class_names[class].clone(),
                available,
                requested: wanted,
            });
        }
        out.extend(members);
    }
    Ok(out)
}

/// Builds the imbalanced evaluation subset: a few large classes keep many
/// documents and the rare classes keep only a handful (300 and 20 per class
/// in the standard SearchSnippets recipe, N = 4·300 + 4·20 = 1280).
///
/// Class ids and names are preserved, so a class with zero selected
/// documents (e.g. `per_rare == 0`) stays in `class_names` but has no
/// members.
pub fn make_imbalanced_subset(
    corpus: &LabeledCorpus,
    large_classes: &[usize],
    per_large: usize,
    rare_classes: &[usize],
    per_rare: usize,
) -> Result<LabeledCorpus, CorpusError> {
    let idx = select_imbalanced_indices(
        &corpus.labels,
        &corpus.class_names,
        large_classes,
        per_large,
        rare_classes,
        per_rare,
    )?;
    LabeledCorpus::new(
        idx.iter().map(|&i| corpus.docs[i].clone()).collect(),
        idx.iter().map(|&i| corpus.labels[i]).collect(),
        corpus.class_names.clone(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorpusFormat {
    /// `<class-name>\t<document text>` per line.
    Labeled,
    /// One document per line, no label.
    Unlabeled,
}

/// Raw documents as read from disk, before tokenization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawCorpus {
    pub texts: Vec<String>,
    pub labels: Option<Vec<usize>>,
    pub class_names: Vec<String>,
}

impl RawCorpus {
    pub fn parse<R: BufRead>(
        reader: R,
        format: CorpusFormat,
        path: &Path,
    ) -> Result<Self, CorpusError> {
        let mut texts = Vec::new();
        let mut labels = Vec::new();
        let mut class_names: Vec<String> = Vec::new();
        let mut class_index: HashMap<String, usize> = HashMap::new();
        for (i, line) in reader.lines().enumerate() {
            let lineno = i + 1;
            let line = line.map_err(|source| CorpusError::Io {
                path: path.to_path_buf(),
                source,
            })?;
            let line = line.strip_suffix('\r').unwrap_or(&line);
            if line.trim().is_empty() {
                continue;
            }
            match format {
                CorpusFormat::Unlabeled => texts.push(line.to_string()),
                CorpusFormat::Labeled => {
                    let (class, text) =
                        line.split_once('\t').ok_or_else(|| CorpusError::Parse {
                            path: path.to_path_buf(),
                            line: lineno,
                            message: "expected `<class>\\t<text>`".to_string(),
                        })?;
                    let class = class.trim();
                    if class.is_empty() {
                        return Err(CorpusError::Parse {
                            path: path.to_path_buf(),
                            line: lineno,
                            message: "empty class name".to_string(),
                        });
                    }
                    let id = *class_index.entry(class.to_string()).or_insert_with(|| {
                        class_names.push(class.to_string());
                        class_names.len() - 1
                    });
                    labels.push(id);
                    texts.push(text.to_string());
                }
            }
        }
        Ok(RawCorpus {
            texts,
            labels: match format {
                CorpusFormat::Labeled => Some(labels),
                CorpusFormat::Unlabeled => None,
            },
            class_names,
        })
    }

    pub fn len(&self) -> usize {
        self.texts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.texts.is_empty()
    }

    /// Keeps the records at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> RawCorpus {
        RawCorpus {
            texts: indices.iter().map(|&i| self.texts[i].clone()).collect(),
            labels: self
                .labels
                .as_ref()
                .map(|l| indices.iter().map(|&i| l[i]).collect()),
            class_names: self.class_names.clone(),
        }
    }
}

/// Reads a corpus file. Blank lines are skipped; class names are collected
/// in order of first appearance.
pub fn load_labeled_corpus(path: &Path, format: CorpusFormat) -> Result<RawCorpus, CorpusError> {
    let file = File::open(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    RawCorpus::parse(BufReader::new(file), format, path)
}

/// Tokenizes, builds the vocabulary, and encodes: the whole preprocessing
/// pipeline in one call.
pub fn preprocess(
    raw: &RawCorpus,
    config: &PreprocessConfig,
) -> Result<(LabeledCorpus, Vocabulary), CorpusError> {
    let tokens: Vec<Vec<String>> = raw.texts.iter().map(|t| tokenize(t, config)).collect();
    let stopwords = config.load_stopwords()?;
    let vocab = build_vocabulary(&tokens, config.min_count, &stopwords)?;
    let labels = raw
        .labels
        .as_deref()
        .map(|l| (l, raw.class_names.as_slice()));
    let corpus = encode_corpus(&tokens, labels, &vocab)?;
    Ok((corpus, vocab))
}

/// Encodes raw text against an existing vocabulary (no vocabulary building).
pub fn encode_with_vocabulary(
    raw: &RawCorpus,
    config: &PreprocessConfig,
    vocab: &Vocabulary,
) -> Result<LabeledCorpus, CorpusError> {
    let tokens: Vec<Vec<String>> = raw.texts.iter().map(|t| tokenize(t, config)).collect();
    let labels = raw
        .labels
        .as_deref()
        .map(|l| (l, raw.class_names.as_slice()));
    encode_corpus(&tokens, labels, vocab)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(docs: &[&[&str]]) -> Vec<Vec<String>> {
        docs.iter()
            .map(|d| d.iter().map(|s| s.to_string()).collect())
            .collect()
    }

    fn plain() -> PreprocessConfig {
        PreprocessConfig {
            stopwords: StopwordSource::None,
            min_count: 1,
            ..Default::default()
        }
    }

    #[test]
    fn tokenize_lowercases_and_strips_punctuation() {
        assert_eq!(
            tokenize("Stock markets FELL today.", &plain()),
            vec!["stock", "markets", "fell", "today"]
        );
        assert!(tokenize("", &plain()).is_empty());
        assert_eq!(tokenize("a+b a+b", &plain()), vec!["a", "b", "a", "b"]);
        assert_eq!(
            tokenize("don't  stop-me\tnow!!", &plain()),
            vec!["don", "t", "stop", "me", "now"]
        );
    }

    #[test]
    fn tokenize_options() {
        let cfg = PreprocessConfig {
            drop_numeric: true,
            min_token_len: 2,
            ..plain()
        };
        assert_eq!(
            tokenize("In 2013 a GPU x86", &cfg),
            vec!["in", "gpu", "x86"]
        );
        let keep_case = PreprocessConfig {
            lowercase: false,
            ..plain()
        };
        assert_eq!(tokenize("Rust Lang", &keep_case), vec!["Rust", "Lang"]);
    }

    #[test]
    fn vocabulary_min_count() {
        let docs = toks(&[&["a", "b", "a"], &["a", "c"]]);
        let v = build_vocabulary(&docs, 2, &HashSet::new()).unwrap();
        assert_eq!(v.words(), ["a"]);
    }

    #[test]
    fn vocabulary_without_filtering_keeps_all_in_first_occurrence_order() {
        let docs = toks(&[&["a", "b", "a"], &["a", "c"]]);
        let v = build_vocabulary(&docs, 1, &HashSet::new()).unwrap();
        assert_eq!(v.words(), ["a", "b", "c"]);
    }

    #[test]
    fn vocabulary_stopwords() {
        let docs = toks(&[&["a", "b", "a"], &["a", "c"]]);
        let stop: HashSet<String> = ["a".to_string()].into();
        let v = build_vocabulary(&docs, 1, &stop).unwrap();
        assert_eq!(v.words(), ["b", "c"]);
    }

    #[test]
    fn vocabulary_errors() {
        let docs = toks(&[&["a"]]);
        assert!(matches!(
            build_vocabulary(&docs, 2, &HashSet::new()),
            Err(CorpusError::EmptyVocabulary { .. })
        ));
        assert!(matches!(
            build_vocabulary(&docs, 0, &HashSet::new()),
            Err(CorpusError::InvalidMinCount)
        ));
    }

    #[test]
    fn encode_drops_oov_and_keeps_empty_docs() {
        let vocab = Vocabulary::from_words(["a", "b"]);
        let c = encode_corpus(&toks(&[&["a", "zz", "b"], &["zz"]]), None, &vocab).unwrap();
        assert_eq!(c.docs[0].tokens, vec![0, 1]);
        assert!(c.docs[1].is_empty());
        assert_eq!(c.len(), 2);
    }

    #[test]
    fn encode_label_mismatch() {
        let vocab = Vocabulary::from_words(["a"]);
        let names = vec!["x".to_string()];
        let err =
            encode_corpus(&toks(&[&["a"], &["a"]]), Some((&[0], &names)), &vocab).unwrap_err();
        assert!(matches!(
            err,
            CorpusError::LabelMismatch { docs: 2, labels: 1 }
        ));
    }

    fn class_corpus(sizes: &[usize]) -> LabeledCorpus {
        let mut docs = Vec::new();
        let mut labels = Vec::new();
        // interleave classes so "first n in original order" is exercised
        let max = sizes.iter().copied().max().unwrap_or(0);
        for i in 0..max {
            for (c, &n) in sizes.iter().enumerate() {
                if i < n {
                    docs.push(Document::new(vec![(c * 1000 + i) as u32]));
                    labels.push(c);
                }
            }
        }
        let names = (0..sizes.len()).map(|c| format!("c{c}")).collect();
        LabeledCorpus::new(docs, labels, names).unwrap()
    }

    #[test]
    fn imbalanced_subset_recipe_gives_1280() {
        let corpus = class_corpus(&[400, 400, 400, 400, 50, 50, 50, 50]);
        let sub = make_imbalanced_subset(&corpus, &[0, 1, 2, 3], 300, &[4, 5, 6, 7], 20).unwrap();
        assert_eq!(sub.len(), 1280);
        for c in 0..4 {
            assert_eq!(sub.labels.iter().filter(|&&l| l == c).count(), 300);
        }
        for c in 4..8 {
            assert_eq!(sub.labels.iter().filter(|&&l| l == c).count(), 20);
        }
        // first documents of each class, in original order
        let class4: Vec<u32> = sub
            .docs
            .iter()
            .zip(&sub.labels)
            .filter(|(_, &l)| l == 4)
            .map(|(d, _)| d.tokens[0])
            .collect();
        assert_eq!(class4, (4000..4020).collect::<Vec<u32>>());
    }

    #[test]
    fn imbalanced_subset_full_sizes_is_reordered_identity() {
        let corpus = class_corpus(&[3, 2]);
        let sub = make_imbalanced_subset(&corpus, &[0], 3, &[1], 2).unwrap();
        assert_eq!(sub.labels, vec![0, 0, 0, 1, 1]);
        let mut a: Vec<_> = sub.docs.iter().map(|d| d.tokens[0]).collect();
        let mut b: Vec<_> = corpus.docs.iter().map(|d| d.tokens[0]).collect();
        a.sort();
        b.sort();
        assert_eq!(a, b);
    }

    #[test]
    fn imbalanced_subset_zero_rare() {
        let corpus = class_corpus(&[3, 2]);
        let sub = make_imbalanced_subset(&corpus, &[0], 2, &[1], 0).unwrap();
        assert_eq!(sub.labels, vec![0, 0]);
    }

    #[test]
    fn imbalanced_subset_errors() {
        let corpus = class_corpus(&[3, 2]);
        match make_imbalanced_subset(&corpus, &[0], 2, &[1], 5) {
            Err(CorpusError::InsufficientClassSize {
                class,
                available,
                requested,
            }) => {
                assert_eq!((class.as_str(), available, requested), ("c1", 2, 5));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            make_imbalanced_subset(&corpus, &[0], 1, &[0], 1),
            Err(CorpusError::OverlappingClasses(_))
        ));
    }

    #[test]
    fn parse_labeled_and_unlabeled() {
        let text = "sports\tGoal scored!\nbusiness\tStocks up\n\nsports\tRace won\r\n";
        let raw =
            RawCorpus::parse(text.as_bytes(), CorpusFormat::Labeled, Path::new("x.tsv")).unwrap();
        assert_eq!(raw.class_names, vec!["sports", "business"]);
        assert_eq!(raw.labels, Some(vec![0, 1, 0]));
        assert_eq!(raw.texts[2], "Race won");

        let raw = RawCorpus::parse(
            "one\ntwo\n".as_bytes(),
            CorpusFormat::Unlabeled,
            Path::new("x"),
        )
        .unwrap();
        assert_eq!(raw.texts, vec!["one", "two"]);
        assert_eq!(raw.labels, None);
    }

    #[test]
    fn parse_error_names_line() {
        let mut text = String::new();
        for i in 0..16 {
            text.push_str(&format!("c\tdoc {i}\n"));
        }
        text.push_str("no tab here\n");
        let err = RawCorpus::parse(text.as_bytes(), CorpusFormat::Labeled, Path::new("in.tsv"))
            .unwrap_err();
        assert!(matches!(err, CorpusError::Parse { line: 17, .. }));
        assert!(err.to_string().starts_with("in.tsv:17:"));
    }

    #[test]
    fn preprocessing_is_deterministic() {
        let text = "a\tThe cat sat on the mat\nb\tDogs bark at the cat\na\tThe mat is red\n";
        let raw = RawCorpus::parse(text.as_bytes(), CorpusFormat::Labeled, Path::new("x")).unwrap();
        let cfg = PreprocessConfig::default();
        let (c1, v1) = preprocess(&raw, &cfg).unwrap();
        let (c2, v2) = preprocess(&raw, &cfg).unwrap();
        assert_eq!(c1, c2);
        assert_eq!(v1.hash(), v2.hash());
        assert_eq!(c1.content_hash(), c2.content_hash());
        assert_eq!(v1.words(), ["cat", "mat"]);
    }

    fn corpus_strategy() -> impl Strategy<Value = Vec<Vec<String>>> {
        let word =
            prop::sample::select(vec!["a", "b", "c", "d", "e", "f", "g"]).prop_map(String::from);
        prop::collection::vec(prop::collection::vec(word, 0..12), 0..15)
    }

    proptest! {
        #[test]
        fn vocabulary_is_a_bijection(docs in corpus_strategy(), min_count in 1usize..4) {
            if let Ok(v) = build_vocabulary(&docs, min_count, &HashSet::new()) {
                for (i, w) in v.words().iter().enumerate() {
                    prop_assert_eq!(v.id(w), Some(i as WordId));
                }
                let distinct: HashSet<&String> = v.words().iter().collect();
                prop_assert_eq!(distinct.len(), v.len());
            }
        }

        #[test]
        fn decode_encode_roundtrip_drops_only_oov(docs in corpus_strategy()) {
            let vocab = Vocabulary::from_words(["a", "c", "e", "g"]);
            let corpus = encode_corpus(&docs, None, &vocab).unwrap();
            let mut recount = 0;
            for (doc, raw) in corpus.docs.iter().zip(&docs) {
                let expected: Vec<String> = raw.iter().filter(|t| vocab.id(t).is_some()).cloned().collect();
                recount += expected.len();
                prop_assert_eq!(decode_document(doc, &vocab), expected);
                prop_assert!(doc.tokens.iter().all(|&t| (t as usize) < vocab.len()));
            }
            prop_assert_eq!(corpus.total_tokens(), recount);
        }

        #[test]
        fn subset_size_is_exact(sizes in prop::collection::vec(5usize..20, 4), per_large in 0usize..6, per_rare in 0usize..6) {
            let corpus = class_corpus(&sizes);
            let sub = make_imbalanced_subset(&corpus, &[0, 1], per_large, &[2, 3], per_rare).unwrap();
            prop_assert_eq!(sub.len(), 2 * per_large + 2 * per_rare);
        }
    }
}
