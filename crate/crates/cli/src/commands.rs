use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use cwibtd_core::corpus::{load_labeled_corpus, CorpusFormat, Document};
use cwibtd_core::inference::DocTopicDistribution;
use cwibtd_core::metrics::{scoped_metrics, ScopeResult};
use cwibtd_core::model::{train_model, ModelError, ModelKind};

use crate::artifact::{
    default_manifest_path, docs_hash, file_sha256, write_json, write_with, CorpusArtifact,
    ModelArtifact, TrainManifest,
};
use crate::benchmark::{
    run_benchmark, write_distributions, BenchmarkPlan, BenchmarkReport, ModelPlan,
};
use crate::cli::{BenchmarkArgs, EvalArgs, InferArgs, PrepareArgs, TrainArgs};
use crate::config::FileConfig;
use crate::error::CliError;

pub fn prepare(
    args: &PrepareArgs,
    config: &FileConfig,
    out: &mut dyn Write,
) -> Result<CorpusArtifact, CliError> {
    let preprocess = args
        .preprocess
        .apply(config.preprocess.clone().unwrap_or_default());
    let subset = args.subset.resolve(config.subset.as_ref())?;
    let format = args
        .format
        .map(Into::into)
        .or(config.benchmark.format)
        .unwrap_or(CorpusFormat::Labeled);
    let artifact = CorpusArtifact::build(&args.input, format, preprocess, subset)?;
    artifact.write(&args.output)?;
    let s = &artifact.manifest.stats;
    writeln!(
        out,
        "K={} N={} Len={:.2}/{} V={} tokens={} empty={}",
        s.classes, s.documents, s.mean_len, s.max_len, s.vocab_size, s.tokens, s.empty_documents
    )
    .map_err(|e| CliError::io("<stdout>", e))?;
    Ok(artifact)
}

/// Classes that own at least one document.
fn populated_classes(labels: &[usize], classes: usize) -> usize {
    let mut seen = vec![false; classes];
    for &l in labels {
        seen[l] = true;
    }
    seen.iter().filter(|&&b| b).count().max(1)
}

pub fn train(
    args: &TrainArgs,
    config: &FileConfig,
    out: &mut dyn Write,
) -> Result<TrainManifest, CliError> {
    let corpus = CorpusArtifact::read(&args.corpus)?;
    let default_topics = populated_classes(&corpus.corpus.labels, corpus.corpus.num_classes());
    let params = config.model_params(
        args.model,
        default_topics,
        &args.params.overrides(args.seed),
    )?;

    let start = Instant::now();
    let model = train_model(args.model, &corpus.corpus.docs, corpus.vocab.len(), &params)?;
    let wall_time_secs = start.elapsed().as_secs_f64();

    let network = model.network.clone();
    ModelArtifact::new(&corpus, model).write(&args.output)?;
    let manifest = TrainManifest {
        kind: args.model.to_string(),
        params,
        seed: params.seed,
        corpus: args.corpus.display().to_string(),
        vocab_hash: corpus.manifest.vocab_hash.clone(),
        corpus_hash: corpus.manifest.corpus_hash.clone(),
        model_sha256: file_sha256(&args.output)?,
        wall_time_secs,
        network,
    };
    let manifest_path = args
        .manifest
        .clone()
        .unwrap_or_else(|| default_manifest_path(&args.output));
    write_json(&manifest_path, &manifest)?;
    writeln!(
        out,
        "{} K={} seed={} {:.2}s -> {}",
        manifest.kind,
        params.topics,
        params.seed,
        wall_time_secs,
        args.output.display()
    )
    .map_err(|e| CliError::io("<stdout>", e))?;
    Ok(manifest)
}

/// Topic distributions for `docs`. LDA only knows its training documents, so
/// any other input is rejected.
pub fn infer_docs(
    artifact: &ModelArtifact,
    docs: &[Document],
) -> Result<Vec<DocTopicDistribution>, CliError> {
    if docs.is_empty() {
        return Ok(Vec::new());
    }
    let model = &artifact.model;
    if model.kind == ModelKind::Lda && docs_hash(docs) != artifact.training_docs_hash {
        return Err(ModelError::NoWordTopics.into());
    }
    Ok(model.training_doc_topics(docs)?)
}

pub fn infer(args: &InferArgs, out: &mut dyn Write) -> Result<Vec<DocTopicDistribution>, CliError> {
    let artifact = ModelArtifact::read(&args.model)?;
    let docs = match (&args.corpus, &args.input) {
        (Some(dir), _) => {
            let corpus = CorpusArtifact::read(dir)?;
            if corpus.manifest.vocab_hash != artifact.vocab_hash {
                return Err(CliError::VocabularyMismatch {
                    expected: artifact.vocab_hash.clone(),
                    found: corpus.manifest.vocab_hash,
                });
            }
            corpus.corpus.docs
        }
        (None, Some(path)) => {
            let raw = load_labeled_corpus(path, args.format.into())?;
            artifact.encode(&raw)?.docs
        }
        (None, None) => return Err(CliError::Usage("infer needs --input or --corpus".into())),
    };
    let dists = infer_docs(&artifact, &docs)?;
    match &args.output {
        Some(path) => write_with(path, |w| write_distributions(w, &dists))?,
        None => write_distributions(&mut *out, &dists).map_err(|e| CliError::io("<stdout>", e))?,
    }
    Ok(dists)
}

pub fn resolve_plan(args: &BenchmarkArgs, config: &FileConfig) -> Result<BenchmarkPlan, CliError> {
    let b = &config.benchmark;
    let corpus = args
        .corpus
        .clone()
        .or_else(|| b.corpus.clone())
        .ok_or_else(|| CliError::Usage("benchmark needs --corpus".into()))?;
    let format = args
        .format
        .map(Into::into)
        .or(b.format)
        .unwrap_or(CorpusFormat::Labeled);
    let preprocess = args
        .preprocess
        .apply(config.preprocess.clone().unwrap_or_default());
    let subset = args.subset.resolve(config.subset.as_ref())?;
    let rare_classes = args
        .rare
        .clone()
        .or_else(|| b.rare.clone())
        .or_else(|| subset.as_ref().map(|s| s.rare.clone()))
        .unwrap_or_default();
    let output = args
        .output
        .clone()
        .or_else(|| b.output.clone())
        .ok_or_else(|| CliError::Usage("benchmark needs --output".into()))?;
    let kinds = args
        .models
        .clone()
        .or_else(|| b.models.clone())
        .unwrap_or_else(|| ModelKind::ALL.to_vec());

    // The topic default needs the class count after preprocessing.
    let default_topics = if args.params.topics.is_some() || config.train.topics.is_some() {
        1
    } else {
        let (c, _) =
            crate::artifact::load_and_preprocess(&corpus, format, &preprocess, subset.as_ref())?;
        populated_classes(&c.labels, c.num_classes())
    };
    let flags = args.params.overrides(None);
    let models = kinds
        .into_iter()
        .map(|kind| {
            Ok(ModelPlan {
                kind,
                params: config.model_params(kind, default_topics, &flags)?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(BenchmarkPlan {
        corpus,
        format,
        preprocess,
        subset,
        models,
        runs: args.runs.or(b.runs).unwrap_or(10),
        base_seed: args.base_seed.or(b.base_seed).unwrap_or(0),
        rare_classes,
        output,
        include_uncovered: args.include_uncovered || b.include_uncovered.unwrap_or(false),
        write_assignments: args.assignments,
    })
}

pub fn benchmark(
    args: &BenchmarkArgs,
    config: &FileConfig,
    out: &mut dyn Write,
) -> Result<BenchmarkReport, CliError> {
    let plan = resolve_plan(args, config)?;
    let report = run_benchmark(&plan)?;
    out.write_all(crate::benchmark::render_report(&report).as_bytes())
        .map_err(|e| CliError::io("<stdout>", e))?;
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum LabelColumn {
    Pred,
    Truth,
}

/// Label per non-blank line, plus whether the line had zero coverage.
fn read_labels(path: &Path, column: LabelColumn) -> Result<Vec<(String, bool)>, CliError> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut labels = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CliError::io(path, e))?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let entry = match (column, fields.len()) {
            (_, 1) => (fields[0].trim().to_string(), false),
            (LabelColumn::Truth, _) => (fields[0].trim().to_string(), false),
            (LabelColumn::Pred, n) if n >= 3 => {
                let uncovered = fields[2]
                    .trim()
                    .parse::<f64>()
                    .map(|c| c == 0.0)
                    .unwrap_or(false);
                (fields[1].trim().to_string(), uncovered)
            }
            _ => {
                return Err(cwibtd_core::corpus::CorpusError::Parse {
                    path: PathBuf::from(path),
                    line: i + 1,
                    message: "expected a label or an inference line".into(),
                }
                .into())
            }
        };
        if entry.0.is_empty() {
            return Err(cwibtd_core::corpus::CorpusError::Parse {
                path: PathBuf::from(path),
                line: i + 1,
                message: "empty label".into(),
            }
            .into());
        }
        labels.push(entry);
    }
    Ok(labels)
}

fn intern(labels: &[String], names: &mut Vec<String>) -> Vec<usize> {
    let mut index: HashMap<String, usize> = names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.clone(), i))
        .collect();
    labels
        .iter()
        .map(|l| {
            *index.entry(l.clone()).or_insert_with(|| {
                names.push(l.clone());
                names.len() - 1
            })
        })
        .collect()
}

pub fn eval(args: &EvalArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let pred = read_labels(&args.pred, LabelColumn::Pred)?;
    let truth = read_labels(&args.truth, LabelColumn::Truth)?;
    if pred.len() != truth.len() {
        return Err(CliError::Data(format!(
            "{} predictions but {} gold labels",
            pred.len(),
            truth.len()
        )));
    }
    let keep: Vec<usize> = (0..pred.len())
        .filter(|&i| !(args.skip_uncovered && pred[i].1))
        .collect();
    let mut cluster_names = Vec::new();
    let mut class_names = Vec::new();
    let p = intern(
        &keep.iter().map(|&i| pred[i].0.clone()).collect::<Vec<_>>(),
        &mut cluster_names,
    );
    let t = intern(
        &keep.iter().map(|&i| truth[i].0.clone()).collect::<Vec<_>>(),
        &mut class_names,
    );
    let rare = crate::artifact::class_ids(&class_names, args.rare.as_deref().unwrap_or(&[]))?;
    let (all, rare) = scoped_metrics(&p, &t, &rare)?;
    let io = |e| CliError::io("<stdout>", e);
    writeln!(out, "scope  documents  purity  nmi").map_err(io)?;
    writeln!(
        out,
        "all    {:>9}  {:.4}  {:.4}",
        all.documents, all.purity, all.nmi
    )
    .map_err(io)?;
    if let ScopeResult::Evaluated(r) = rare {
        writeln!(
            out,
            "rare   {:>9}  {:.4}  {:.4}",
            r.documents, r.purity, r.nmi
        )
        .map_err(io)?;
    }
    if args.skip_uncovered {
        writeln!(
            out,
            "skipped {} uncovered documents",
            pred.len() - keep.len()
        )
        .map_err(io)?;
    }
    Ok(())
}
