//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Criterion 9 runs only when `CWIBTD_SEARCHSNIPPETS` names a labeled
//! SearchSnippets file (`<class>\t<text>` lines).

use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use cwibtd_cli::benchmark::{run_benchmark, BenchmarkPlan, BenchmarkReport, ModelPlan};
use cwibtd_core::conet::{accumulate_pair_counts, prune, RawCoNetwork, WindowMode};
use cwibtd_core::corpus::{load_labeled_corpus, CorpusFormat, PreprocessConfig, WordId};
use cwibtd_core::metrics::{nmi, purity};
use cwibtd_core::model::{ModelKind, ModelParams};
use cwibtd_core::sampler::{GibbsSampler, SamplerConfig};
use cwibtd_core::synthetic::SyntheticSpec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn within(limit: Duration, elapsed: Duration) -> bool {
    elapsed < limit
}

// ---------------------------------------------------------------- 1

fn naive_pair_counts(docs: &[Vec<WordId>], window: usize) -> HashMap<(WordId, WordId), u64> {
    let mut counts = HashMap::new();
    for doc in docs {
        let windows: Vec<&[WordId]> = if doc.len() <= window {
            vec![&doc[..]]
        } else {
            doc.windows(window).collect()
        };
        for w in windows {
            for i in 0..w.len() {
                for j in i + 1..w.len() {
                    if w[i] != w[j] {
                        *counts.entry((w[i].min(w[j]), w[i].max(w[j]))).or_insert(0) += 1;
                    }
                }
            }
        }
    }
    counts
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut mismatches = 0;
    for c in 0..200 {
        let vocab = rng.gen_range(2..40u32);
        let docs: Vec<Vec<WordId>> = (0..rng.gen_range(1..=50))
            .map(|_| {
                (0..rng.gen_range(0..=30))
                    .map(|_| rng.gen_range(0..vocab))
                    .collect()
            })
            .collect();
        let l = [2, 5, 10][c % 3];
        let net =
            accumulate_pair_counts(&docs, vocab as usize, WindowMode::Sliding { size: l }).unwrap();
        let oracle = naive_pair_counts(&docs, l);
        let got: HashMap<(WordId, WordId), u64> =
            net.edges().iter().map(|&(x, y, d)| ((x, y), d)).collect();
        if got != oracle {
            mismatches += 1;
        }
    }
    let elapsed = start.elapsed();
    check(
        mismatches == 0 && within(Duration::from_secs(10), elapsed),
        format!("200 corpora, {mismatches} mismatches, {elapsed:.2?}"),
    )
}

// ---------------------------------------------------------------- 2

fn criterion_2() -> Outcome {
    // W0..W4 under a 4-word window: windows {W0..W3} and {W1..W4}
    let doc = vec![vec![0u32, 1, 2, 3, 4]];
    let net = accumulate_pair_counts(&doc, 5, WindowMode::Sliding { size: 4 }).unwrap();
    let (adjacent, boundary) = (net.weight(2, 3), net.weight(0, 1));
    check(
        adjacent == 2 && boundary == 1,
        format!("D(W2,W3)={adjacent}, D(W0,W1)={boundary}"),
    )
}

// ---------------------------------------------------------------- 3

fn criterion_3() -> Outcome {
    // T = 16, m(0) = m(1) = 8 and D(0,1) = 1: p(x,y) = 1/16 = p(x) p(y)
    let raw = RawCoNetwork::from_edges(
        6,
        vec![(0, 1, 1), (0, 2, 7), (1, 3, 7), (4, 5, 1)],
        WindowMode::default(),
    );
    let activity = raw.pmi_degree(0, 1).unwrap();
    let pruned = prune(&raw);
    let dropped = pruned.activity(0, 1).is_none();
    check(
        activity.abs() <= 1e-12 && dropped,
        format!("activity {activity:e}, pruned {dropped}"),
    )
}

// ---------------------------------------------------------------- 4

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let vocab = 300;
    let docs: Vec<Vec<WordId>> = (0..500)
        .map(|_| {
            (0..rng.gen_range(1..=20))
                .map(|_| rng.gen_range(0..vocab as u32))
                .collect()
        })
        .collect();
    let mut sampler =
        GibbsSampler::new(&docs, vocab, SamplerConfig::new(10, 0.1, 0.01).with_seed(4)).unwrap();
    let mut violation = None;
    for sweep in 0..2000 {
        sampler.sweep().unwrap();
        if let Err(e) = sampler.state().check_invariants() {
            violation = Some(format!("after sweep {sweep}: {e}"));
            break;
        }
    }
    let phi_err = sampler.phi().max_row_sum_error();
    let theta_err = sampler.theta().max_row_sum_error();
    let elapsed = start.elapsed();
    check(
        violation.is_none()
            && phi_err <= 1e-9
            && theta_err <= 1e-9
            && within(Duration::from_secs(60), elapsed),
        format!(
            "{}, row-sum error phi {phi_err:.1e} theta {theta_err:.1e}, {elapsed:.2?}",
            violation.unwrap_or_else(|| "2000 sweeps conserve counts".into())
        ),
    )
}

// ---------------------------------------------------------------- 5, 6, 8

fn plan(
    corpus: &Path,
    output: &Path,
    runs: usize,
    topics: usize,
    rare: &[&str],
    iterations: Option<usize>,
) -> BenchmarkPlan {
    BenchmarkPlan {
        corpus: corpus.to_path_buf(),
        format: CorpusFormat::Labeled,
        preprocess: PreprocessConfig::default(),
        subset: None,
        models: ModelKind::ALL
            .iter()
            .map(|&kind| {
                let mut params = ModelParams::defaults(kind, topics);
                if let Some(i) = iterations {
                    params.iterations = i;
                }
                ModelPlan { kind, params }
            })
            .collect(),
        runs,
        base_seed: 0,
        rare_classes: rare.iter().map(|s| s.to_string()).collect(),
        output: output.to_path_buf(),
        include_uncovered: false,
        write_assignments: false,
    }
}

fn write_tsv(dir: &Path, name: &str, spec: &SyntheticSpec) -> std::path::PathBuf {
    let path = dir.join(name);
    fs::write(&path, spec.to_tsv()).unwrap();
    path
}

fn rare_purity(report: &BenchmarkReport, kind: ModelKind) -> f64 {
    report
        .summary(kind)
        .and_then(|s| s.rare.as_ref())
        .map(|r| r.mean_purity)
        .unwrap_or(f64::NAN)
}

fn criterion_5(tmp: &Path) -> Outcome {
    let start = Instant::now();
    let corpus = write_tsv(tmp, "two_topics.tsv", &SyntheticSpec::two_topics(100, 5));
    let report = match run_benchmark(&plan(&corpus, &tmp.join("c5"), 10, 2, &[], None)) {
        Ok(r) => r,
        Err(e) => return Outcome::Fail(e.to_string()),
    };
    let elapsed = start.elapsed();
    let purities: Vec<(ModelKind, f64)> = ModelKind::ALL
        .iter()
        .map(|&k| (k, report.summary(k).unwrap().all.mean_purity))
        .collect();
    let detail = purities
        .iter()
        .map(|(k, p)| format!("{} {p:.3}", k.display_name()))
        .collect::<Vec<_>>()
        .join(", ");
    check(
        purities.iter().all(|&(_, p)| p >= 0.95) && within(Duration::from_secs(120), elapsed),
        format!("mean purity {detail} (need >= 0.95), {elapsed:.1?}"),
    )
}

fn criterion_6(tmp: &Path) -> Outcome {
    let start = Instant::now();
    let corpus = write_tsv(tmp, "imbalanced.tsv", &SyntheticSpec::imbalanced(2024));
    let rare = ["rare0", "rare1", "rare2", "rare3"];
    let report = match run_benchmark(&plan(&corpus, &tmp.join("c6"), 10, 8, &rare, None)) {
        Ok(r) => r,
        Err(e) => return Outcome::Fail(e.to_string()),
    };
    let elapsed = start.elapsed();
    let (lda, wntm, cw) = (
        rare_purity(&report, ModelKind::Lda),
        rare_purity(&report, ModelKind::Wntm),
        rare_purity(&report, ModelKind::Cwibtd),
    );
    let excluded: usize = report.runs.iter().map(|r| r.excluded).sum();
    check(
        cw > wntm && cw > lda && within(Duration::from_secs(600), elapsed),
        format!(
            "rare purity CWIBTD {cw:.3} vs WNTM {wntm:.3}, LDA {lda:.3}; {excluded} uncovered docs over {} runs; {elapsed:.1?}",
            report.runs.len()
        ),
    )
}

fn criterion_8(tmp: &Path) -> Outcome {
    let corpus = write_tsv(tmp, "det.tsv", &SyntheticSpec::imbalanced(8));
    let rare = ["rare0", "rare1", "rare2", "rare3"];
    let (a, b) = (tmp.join("c8a"), tmp.join("c8b"));
    for out in [&a, &b] {
        if let Err(e) = run_benchmark(&plan(&corpus, out, 3, 8, &rare, Some(100))) {
            return Outcome::Fail(e.to_string());
        }
    }
    let same = ["report.txt", "report.json"]
        .iter()
        .all(|f| fs::read(a.join(f)).unwrap() == fs::read(b.join(f)).unwrap());
    check(
        same,
        "report.txt and report.json byte-identical across two runs".into(),
    )
}

// ---------------------------------------------------------------- 7

fn oracle_purity(pred: &[usize], truth: &[usize]) -> f64 {
    let clusters = pred.iter().max().unwrap() + 1;
    let classes = truth.iter().max().unwrap() + 1;
    let mut best = 0;
    for k in 0..clusters {
        best += (0..classes)
            .map(|c| {
                pred.iter()
                    .zip(truth)
                    .filter(|&(&p, &t)| p == k && t == c)
                    .count()
            })
            .max()
            .unwrap();
    }
    best as f64 / pred.len() as f64
}

/// Mutual information over the geometric mean of the entropies, natural
/// log; 0 when either side has a single block.
fn oracle_nmi(pred: &[usize], truth: &[usize]) -> f64 {
    let n = pred.len() as f64;
    let count = |xs: &[usize], v: usize| xs.iter().filter(|&&x| x == v).count() as f64;
    let kmax = pred.iter().max().unwrap() + 1;
    let cmax = truth.iter().max().unwrap() + 1;
    let mut mi = 0.0;
    for k in 0..kmax {
        for c in 0..cmax {
            let joint = pred
                .iter()
                .zip(truth)
                .filter(|&(&p, &t)| p == k && t == c)
                .count() as f64;
            if joint > 0.0 {
                mi += joint * (n * joint / (count(pred, k) * count(truth, c))).ln();
            }
        }
    }
    let h = |xs: &[usize], m: usize| -> f64 {
        (0..m)
            .map(|v| count(xs, v))
            .filter(|&c| c > 0.0)
            .map(|c| c * (c / n).ln())
            .sum()
    };
    let (hk, hc) = (h(pred, kmax), h(truth, cmax));
    if hk == 0.0 || hc == 0.0 {
        return 0.0;
    }
    (mi / (hk * hc).sqrt()).clamp(0.0, 1.0)
}

/// Every labeling of `n` items with values below `m`.
fn all_labelings(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|l| (0..m).map(move |v| [l.clone(), vec![v]].concat()))
            .collect();
    }
    out
}

/// Labelings in first-appearance canonical form with at most `m` blocks.
fn canonical_labelings(n: usize, m: usize) -> Vec<Vec<usize>> {
    all_labelings(n, m)
        .into_iter()
        .filter(|l| {
            let mut next = 0;
            l.iter().all(|&v| {
                if v == next {
                    next += 1;
                }
                v < next
            })
        })
        .collect()
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let mut pairs = 0u64;
    let mut worst_nmi: f64 = 0.0;
    let mut purity_errors = 0;
    let mut compare = |pred: &[usize], truth: &[usize]| {
        pairs += 1;
        if purity(pred, truth).unwrap() != oracle_purity(pred, truth) {
            purity_errors += 1;
        }
        worst_nmi = worst_nmi.max((nmi(pred, truth).unwrap() - oracle_nmi(pred, truth)).abs());
    };
    // every raw labeling pair up to N = 5, canonical pairs up to N = 8
    for n in 1..=5 {
        let ls = all_labelings(n, 3);
        for p in &ls {
            for t in &ls {
                compare(p, t);
            }
        }
    }
    for n in 6..=8 {
        let ls = canonical_labelings(n, 3);
        for p in &ls {
            for t in &ls {
                compare(p, t);
            }
        }
    }

    let mut identical_exact = true;
    for n in 2..=8 {
        for l in canonical_labelings(n, 3)
            .iter()
            .filter(|l| l.iter().any(|&v| v > 0))
        {
            identical_exact &= nmi(l, l).unwrap() == 1.0;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let a: Vec<usize> = (0..10_000).map(|_| rng.gen_range(0..8)).collect();
    let b: Vec<usize> = (0..10_000).map(|_| rng.gen_range(0..8)).collect();
    let random_nmi = nmi(&a, &b).unwrap();
    let elapsed = start.elapsed();
    check(
        purity_errors == 0 && worst_nmi <= 1e-12 && identical_exact && random_nmi < 0.05,
        format!(
            "{pairs} labeling pairs, purity mismatches {purity_errors}, max NMI error {worst_nmi:.1e}, \
             identical partitions exact {identical_exact}, random NMI {random_nmi:.4}, {elapsed:.1?}"
        ),
    )
}

// ---------------------------------------------------------------- 9

fn criterion_9(tmp: &Path) -> Outcome {
    let Some(path) = std::env::var_os("CWIBTD_SEARCHSNIPPETS") else {
        return Outcome::Skip("set CWIBTD_SEARCHSNIPPETS to a labeled SearchSnippets file".into());
    };
    let path = Path::new(&path);
    let raw = match load_labeled_corpus(path, CorpusFormat::Labeled) {
        Ok(r) => r,
        Err(e) => return Outcome::Fail(e.to_string()),
    };
    if raw.class_names.len() < 8 {
        return Outcome::Fail(format!(
            "expected 8 classes, found {}",
            raw.class_names.len()
        ));
    }
    // first four classes large, last four rare, in file order
    let large = raw.class_names[..4].to_vec();
    let rare = raw.class_names[4..8].to_vec();
    let rare_refs: Vec<&str> = rare.iter().map(String::as_str).collect();
    let mut p = plan(path, &tmp.join("c9"), 10, 8, &rare_refs, None);
    p.subset = Some(cwibtd_cli::artifact::SubsetSpec {
        large,
        per_large: 300,
        rare,
        per_rare: 20,
    });
    match run_benchmark(&p) {
        Ok(report) => {
            let text = cwibtd_cli::benchmark::render_report(&report);
            println!("{text}");
            check(
                report.corpus.documents == 1280,
                format!("N={} report written", report.corpus.documents),
            )
        }
        Err(e) => Outcome::Fail(e.to_string()),
    }
}

fn main() {
    let tmp = TempDir::new().unwrap();
    let criteria: Vec<Criterion> = vec![
        ("1 pair-count oracle equivalence", Box::new(criterion_1)),
        (
            "2 sliding-window multiplicity pattern",
            Box::new(criterion_2),
        ),
        ("3 PMI independence zero", Box::new(criterion_3)),
        ("4 sampler invariants", Box::new(criterion_4)),
        (
            "5 synthetic separation",
            Box::new(|| criterion_5(tmp.path())),
        ),
        (
            "6 rare-topic ordering",
            Box::new(|| criterion_6(tmp.path())),
        ),
        ("7 metric oracles", Box::new(criterion_7)),
        (
            "8 benchmark determinism",
            Box::new(|| criterion_8(tmp.path())),
        ),
        ("9 real-data smoke", Box::new(|| criterion_9(tmp.path()))),
    ];
    let filter = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let mut failed = 0;
    for (name, run) in &criteria {
        if let Some(f) = &filter {
            if !name.contains(f.as_str()) {
                continue;
            }
        }
        match run() {
            Outcome::Pass(d) => println!("PASS criterion {name}: {d}"),
            Outcome::Fail(d) => {
                failed += 1;
                println!("FAIL criterion {name}: {d}");
            }
            Outcome::Skip(d) => println!("SKIP criterion {name}: {d}"),
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
