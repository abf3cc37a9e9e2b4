//! Train every model over a seed schedule, evaluate each run on both scopes,
//! and write the aggregated tables.
//!
//! Run `i` of every model uses seed `base_seed + i`. Runs execute in
//! parallel; results are joined in plan order so reports do not depend on
//! scheduling.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};

use cwibtd_core::corpus::{CorpusFormat, LabeledCorpus, PreprocessConfig, Vocabulary};
use cwibtd_core::inference::{write_inference_line, DocTopicDistribution};
use cwibtd_core::metrics::{scoped_metrics, MetricReport, Scope, ScopeMetrics, ScopeResult};
use cwibtd_core::model::{train_model, ModelKind, ModelParams, NetworkStats};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::artifact::{
    class_ids, file_sha256, load_and_preprocess, write_json, write_with, SubsetSpec,
};
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelPlan {
    pub kind: ModelKind,
    /// `seed` is replaced by the run schedule.
    pub params: ModelParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkPlan {
    pub corpus: PathBuf,
    pub format: CorpusFormat,
    pub preprocess: PreprocessConfig,
    pub subset: Option<SubsetSpec>,
    pub models: Vec<ModelPlan>,
    pub runs: usize,
    pub base_seed: u64,
    pub rare_classes: Vec<String>,
    #[serde(skip)]
    pub output: PathBuf,
    /// Score documents without topic information too, using the uniform
    /// fallback's cluster 0. Off by default.
    #[serde(default)]
    pub include_uncovered: bool,
    /// Also write per-document inference lines for every run.
    #[serde(skip)]
    pub write_assignments: bool,
}

impl BenchmarkPlan {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.runs == 0 {
            return Err(CliError::Usage("runs must be at least 1".into()));
        }
        if self.models.is_empty() {
            return Err(CliError::Usage("no models selected".into()));
        }
        for (i, m) in self.models.iter().enumerate() {
            if self.models[..i].iter().any(|o| o.kind == m.kind) {
                return Err(CliError::Usage(format!("model {} listed twice", m.kind)));
            }
            m.params
                .sampler_config()
                .validate()
                .map_err(|e| CliError::Usage(format!("{}: {e}", m.kind)))?;
        }
        if self.format != CorpusFormat::Labeled {
            return Err(CliError::Usage("benchmarks need a labeled corpus".into()));
        }
        Ok(())
    }

    pub fn seed(&self, run: usize) -> u64 {
        self.base_seed.wrapping_add(run as u64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub model: ModelKind,
    pub run: usize,
    pub seed: u64,
    pub all: ScopeMetrics,
    pub rare: ScopeResult,
    /// Documents left out because no token had a topic distribution.
    pub excluded: usize,
    pub network: Option<NetworkStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub model: ModelKind,
    pub params: ModelParams,
    pub all: MetricReport,
    pub rare: Option<MetricReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub source_sha256: String,
    pub documents: usize,
    pub vocab_size: usize,
    pub classes: Vec<String>,
    pub class_sizes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub plan: BenchmarkPlan,
    pub corpus: CorpusSummary,
    pub status: String,
    pub summaries: Vec<ModelSummary>,
    pub runs: Vec<RunResult>,
}

impl BenchmarkReport {
    pub fn summary(&self, kind: ModelKind) -> Option<&ModelSummary> {
        self.summaries.iter().find(|s| s.model == kind)
    }
}

/// Predicted clusters and gold labels of the documents to score.
pub fn evaluable(
    dists: &[DocTopicDistribution],
    labels: &[usize],
    include_uncovered: bool,
) -> (Vec<usize>, Vec<usize>) {
    dists
        .iter()
        .zip(labels)
        .filter(|(d, _)| include_uncovered || !d.is_uninformative())
        .map(|(d, &l)| (d.cluster(), l))
        .unzip()
}

struct RunOutput {
    result: RunResult,
    dists: Vec<DocTopicDistribution>,
}

fn run_one(
    plan: &BenchmarkPlan,
    corpus: &LabeledCorpus,
    vocab: &Vocabulary,
    rare: &[usize],
    model: &ModelPlan,
    run: usize,
) -> Result<RunOutput, CliError> {
    let seed = plan.seed(run);
    let params = ModelParams {
        seed,
        ..model.params
    };
    let trained = train_model(model.kind, &corpus.docs, vocab.len(), &params)?;
    let dists = trained.training_doc_topics(&corpus.docs)?;
    let (pred, truth) = evaluable(&dists, &corpus.labels, plan.include_uncovered);
    if pred.is_empty() {
        return Err(CliError::Data(
            "no document has any topic information".into(),
        ));
    }
    // rare classes that lost every document to exclusion drop out of the scope
    let present: Vec<usize> = rare.iter().copied().filter(|c| truth.contains(c)).collect();
    let (all, rare_result) = scoped_metrics(&pred, &truth, &present)?;
    Ok(RunOutput {
        result: RunResult {
            model: model.kind,
            run,
            seed,
            all,
            rare: rare_result,
            excluded: dists.len() - pred.len(),
            network: trained.network.clone(),
        },
        dists,
    })
}

pub fn run_benchmark(plan: &BenchmarkPlan) -> Result<BenchmarkReport, CliError> {
    plan.validate()?;
    let (corpus, vocab) = load_and_preprocess(
        &plan.corpus,
        plan.format,
        &plan.preprocess,
        plan.subset.as_ref(),
    )?;
    let rare = class_ids(&corpus.class_names, &plan.rare_classes)?;
    let mut class_sizes = vec![0; corpus.num_classes()];
    for &l in &corpus.labels {
        class_sizes[l] += 1;
    }
    for &c in &rare {
        if class_sizes[c] == 0 {
            return Err(CliError::Usage(format!(
                "rare class `{}` has no documents",
                corpus.class_names[c]
            )));
        }
    }
    let corpus_summary = CorpusSummary {
        source_sha256: file_sha256(&plan.corpus)?,
        documents: corpus.len(),
        vocab_size: vocab.len(),
        classes: corpus.class_names.clone(),
        class_sizes,
    };

    let jobs: Vec<(usize, usize)> = (0..plan.models.len())
        .flat_map(|m| (0..plan.runs).map(move |r| (m, r)))
        .collect();
    // after a failure, runs that have not started yet are skipped
    let failed = AtomicBool::new(false);
    let outputs: Vec<Option<Result<RunOutput, CliError>>> = jobs
        .par_iter()
        .map(|&(m, r)| {
            if failed.load(Ordering::Relaxed) {
                return None;
            }
            let model = &plan.models[m];
            let out = run_one(plan, &corpus, &vocab, &rare, model, r).map_err(|e| CliError::Run {
                model: model.kind.to_string(),
                run: r,
                seed: plan.seed(r),
                source: Box::new(e),
            });
            if out.is_err() {
                failed.store(true, Ordering::Relaxed);
            }
            Some(out)
        })
        .collect();

    let mut results = Vec::new();
    let mut failure = None;
    for out in outputs.into_iter().flatten() {
        match out {
            Ok(o) => {
                if plan.write_assignments {
                    let r = &o.result;
                    let path = plan
                        .output
                        .join("assignments")
                        .join(format!("{}_run{}.txt", r.model, r.run));
                    write_with(&path, |w| write_distributions(w, &o.dists))?;
                }
                results.push(o.result);
            }
            Err(e) if failure.is_none() => failure = Some(e),
            Err(_) => {}
        }
    }

    let summaries = plan
        .models
        .iter()
        .filter_map(|m| {
            let runs: Vec<&RunResult> = results.iter().filter(|r| r.model == m.kind).collect();
            let all: Vec<ScopeMetrics> = runs.iter().map(|r| r.all).collect();
            let rare: Vec<ScopeMetrics> = runs
                .iter()
                .filter_map(|r| r.rare.metrics().copied())
                .collect();
            Some(ModelSummary {
                model: m.kind,
                params: m.params,
                all: MetricReport::aggregate(Scope::All, &all)?,
                rare: MetricReport::aggregate(Scope::RareOnly, &rare),
            })
        })
        .collect();
    let report = BenchmarkReport {
        plan: plan.clone(),
        corpus: corpus_summary,
        status: match &failure {
            None => "ok".into(),
            Some(e) => format!("FAILED: {e}"),
        },
        summaries,
        runs: results,
    };
    write_report(&report, &plan.output)?;
    match failure {
        None => Ok(report),
        Some(e) => Err(e),
    }
}

pub fn write_distributions<W: Write>(
    mut w: W,
    dists: &[DocTopicDistribution],
) -> std::io::Result<()> {
    for (i, d) in dists.iter().enumerate() {
        write_inference_line(&mut w, i, d)?;
    }
    Ok(())
}

pub fn write_report(report: &BenchmarkReport, dir: &Path) -> Result<(), CliError> {
    write_json(&dir.join("report.json"), report)?;
    let text = render_report(report);
    write_with(&dir.join("report.txt"), |w| w.write_all(text.as_bytes()))
}

/// Mean Purity and NMI per model and scope, followed by every run.
pub fn render_report(report: &BenchmarkReport) -> String {
    let mut s = String::new();
    if report.status != "ok" {
        let _ = writeln!(s, "{}\n", report.status);
    }
    let plan = &report.plan;
    let c = &report.corpus;
    let _ = writeln!(
        s,
        "corpus {}  N={}  V={}  classes={}  runs={}  seeds {}..{}",
        plan.corpus.display(),
        c.documents,
        c.vocab_size,
        c.classes.len(),
        plan.runs,
        plan.seed(0),
        plan.seed(plan.runs - 1)
    );
    if !plan.rare_classes.is_empty() {
        let _ = writeln!(s, "rare classes: {}", plan.rare_classes.join(", "));
    }
    s.push('\n');

    let _ = write!(s, "{:<6} {:<7}", "scope", "metric");
    for m in &report.summaries {
        let _ = write!(s, " {:>8}", m.model.display_name());
    }
    s.push('\n');
    let scopes: &[Scope] = if plan.rare_classes.is_empty() {
        &[Scope::All]
    } else {
        &[Scope::RareOnly, Scope::All]
    };
    for &scope in scopes {
        for metric in ["Purity", "NMI"] {
            let _ = write!(s, "{:<6} {:<7}", scope.as_str(), metric);
            for m in &report.summaries {
                let r = match scope {
                    Scope::All => Some(&m.all),
                    Scope::RareOnly => m.rare.as_ref(),
                };
                match r {
                    Some(r) if metric == "Purity" => {
                        let _ = write!(s, " {:>8.4}", r.mean_purity);
                    }
                    Some(r) => {
                        let _ = write!(s, " {:>8.4}", r.mean_nmi);
                    }
                    None => {
                        let _ = write!(s, " {:>8}", "-");
                    }
                }
            }
            s.push('\n');
        }
    }

    let _ = writeln!(
        s,
        "\n{:<7} {:>4} {:>20} {:>10} {:>10} {:>10} {:>10} {:>8}",
        "model", "run", "seed", "all_P", "all_NMI", "rare_P", "rare_NMI", "excluded"
    );
    for r in &report.runs {
        let _ = write!(
            s,
            "{:<7} {:>4} {:>20} {:>10.4} {:>10.4}",
            r.model.as_str(),
            r.run,
            r.seed,
            r.all.purity,
            r.all.nmi
        );
        match r.rare.metrics() {
            Some(m) => {
                let _ = write!(s, " {:>10.4} {:>10.4}", m.purity, m.nmi);
            }
            None => {
                let _ = write!(s, " {:>10} {:>10}", "-", "-");
            }
        }
        let _ = writeln!(s, " {:>8}", r.excluded);
    }
    s
}
