//! Ranking metrics, split evaluation with baselines, ablation, and scoring of
//! data-flow edges against hand labels.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{train, CorpusAnalysis, FileRecord, Fold, SplitPlan};
use crate::dataflow::file_edges;
use crate::error::{Error, Result};
use crate::features::{Feature, FeatureMask};
use crate::par_map;
use crate::recommender::{recommend, ModelConfig};

/// Cutoffs reported for top-k accuracy.
pub const KS: [usize; 6] = [1, 2, 3, 4, 5, 10];

/// Rank of the truth (1-based), or `None` for a miss.
pub type Outcome = Option<usize>;

/// Fraction of queries answered within the first `k`; 0 for no queries.
pub fn topk_accuracy(results: &[Outcome], k: usize) -> f64 {
    assert!(k >= 1, "k must be at least 1");
    if results.is_empty() {
        return 0.0;
    }
    let hits = results.iter().filter(|r| matches!(r, Some(n) if *n <= k)).count();
    hits as f64 / results.len() as f64
}

/// Mean reciprocal rank; misses contribute 0.
pub fn mrr(results: &[Outcome]) -> f64 {
    if results.is_empty() {
        return 0.0;
    }
    results.iter().map(|r| r.map_or(0.0, |n| 1.0 / n as f64)).sum::<f64>() / results.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub queries: usize,
    /// Keyed by k.
    pub topk: BTreeMap<usize, f64>,
    pub mrr: f64,
    /// Fraction of queries whose truth is among the candidates at all.
    pub containment: f64,
}

impl Metrics {
    pub fn from_outcomes(results: &[Outcome]) -> Self {
        Metrics {
            queries: results.len(),
            topk: KS.iter().map(|&k| (k, topk_accuracy(results, k))).collect(),
            mrr: mrr(results),
            containment: if results.is_empty() {
                0.0
            } else {
                results.iter().filter(|r| r.is_some()).count() as f64 / results.len() as f64
            },
        }
    }

    pub fn top(&self, k: usize) -> f64 {
        self.topk.get(&k).copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LatencyStats {
    pub count: usize,
    pub median_ms: f64,
    pub p95_ms: f64,
    pub max_ms: f64,
}

impl LatencyStats {
    pub fn from_samples(ms: &[f64]) -> Self {
        if ms.is_empty() {
            return LatencyStats::default();
        }
        let mut v = ms.to_vec();
        v.sort_by(f64::total_cmp);
        let at = |q: f64| v[((q * (v.len() - 1) as f64).round() as usize).min(v.len() - 1)];
        LatencyStats {
            count: v.len(),
            median_ms: at(0.5),
            p95_ms: at(0.95),
            max_ms: v[v.len() - 1],
        }
    }
}

/// Outcomes of the model and both baselines on the same queries.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Outcomes {
    pub model: Vec<Outcome>,
    pub alphabetical: Vec<Outcome>,
    pub frequency: Vec<Outcome>,
    pub latency_ms: Vec<f64>,
    pub candidate_sizes: Vec<usize>,
    /// Queries that failed before ranking (parse or empty candidates).
    pub failed: usize,
}

impl Outcomes {
    fn extend(&mut self, o: Outcomes) {
        self.model.extend(o.model);
        self.alphabetical.extend(o.alphabetical);
        self.frequency.extend(o.frequency);
        self.latency_ms.extend(o.latency_ms);
        self.candidate_sizes.extend(o.candidate_sizes);
        self.failed += o.failed;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    pub model: Metrics,
    pub alphabetical: Metrics,
    pub frequency: Metrics,
    pub latency: LatencyStats,
    pub mean_candidates: f64,
    pub failed_queries: usize,
}

impl MethodReport {
    fn from_outcomes(o: &Outcomes) -> Self {
        MethodReport {
            model: Metrics::from_outcomes(&o.model),
            alphabetical: Metrics::from_outcomes(&o.alphabetical),
            frequency: Metrics::from_outcomes(&o.frequency),
            latency: LatencyStats::from_samples(&o.latency_ms),
            mean_candidates: if o.candidate_sizes.is_empty() {
                0.0
            } else {
                o.candidate_sizes.iter().sum::<usize>() as f64 / o.candidate_sizes.len() as f64
            },
            failed_queries: o.failed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectReport {
    pub project: String,
    pub folds: usize,
    /// Training points whose truth was not a candidate.
    pub skipped_training_points: usize,
    /// Mined points whose context could not be analysed.
    pub unanalysable_points: usize,
    #[serde(flatten)]
    pub report: MethodReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub plan: SplitPlan,
    pub config: ModelConfig,
    pub projects: Vec<ProjectReport>,
    pub aggregate: MethodReport,
    pub skipped_files: Vec<String>,
    /// How misses enter the metrics.
    pub miss_policy: String,
}

const MISS_POLICY: &str = "a miss (truth not ranked) fails every top-k and adds 0 to MRR";

fn rank_by<K: Ord>(names: &[&str], truth: &str, key: impl Fn(&str) -> K) -> Outcome {
    let mut v: Vec<&str> = names.to_vec();
    v.sort_by(|a, b| key(a).cmp(&key(b)).then_with(|| a.cmp(b)));
    v.iter().position(|n| *n == truth).map(|i| i + 1)
}

fn evaluate_fold(analysis: &CorpusAnalysis, fold: &Fold, config: &ModelConfig) -> Result<(Outcomes, usize)> {
    let by_id: HashMap<&str, &FileRecord> = analysis.files.iter().map(|f| (f.file.file_id.as_str(), f)).collect();
    let pick = |ids: &[String]| -> Vec<&FileRecord> { ids.iter().filter_map(|id| by_id.get(id.as_str()).copied()).collect() };
    let train_files = pick(&fold.train);
    let test_files = pick(&fold.test);
    let (bundle, stats) = train(&train_files, config)?;
    debug_assert!(test_files.iter().all(|f| !bundle.provenance.files.contains_key(&f.file.file_id)));

    let mut freq: HashMap<&str, usize> = HashMap::new();
    for f in &train_files {
        for p in &f.points {
            *freq.entry(p.mined.truth.as_str()).or_default() += 1;
        }
    }
    let queries: Vec<(&FileRecord, usize)> = test_files
        .iter()
        .flat_map(|f| (0..f.points.len()).map(move |i| (*f, i)))
        .collect();
    let per_query = par_map(&queries, |&(f, i)| {
        let p = &f.points[i];
        let truth = p.mined.truth.as_str();
        match recommend(&f.file.text, &p.mined.point, &bundle, None) {
            Ok(rec) => {
                let names: Vec<&str> = rec.ranked.iter().map(|r| r.candidate.name.as_str()).collect();
                Some((
                    rec.rank_of(truth),
                    rank_by(&names, truth, |n| n.to_string()),
                    rank_by(&names, truth, |n| std::cmp::Reverse(freq.get(n).copied().unwrap_or(0))),
                    rec.timings.total_ms,
                    names.len(),
                ))
            }
            Err(e) => {
                log::debug!("{}:{}: {e}", p.mined.file_id, p.mined.point.line);
                None
            }
        }
    });
    let mut out = Outcomes::default();
    for q in per_query {
        match q {
            Some((m, a, fr, ms, n)) => {
                out.model.push(m);
                out.alphabetical.push(a);
                out.frequency.push(fr);
                out.latency_ms.push(ms);
                out.candidate_sizes.push(n);
            }
            None => {
                out.failed += 1;
                out.model.push(None);
                out.alphabetical.push(None);
                out.frequency.push(None);
            }
        }
    }
    Ok((out, stats.skipped_points))
}

/// Trains on every fold of `plan` and ranks every test point.
pub fn evaluate(analysis: &CorpusAnalysis, plan: &SplitPlan, config: &ModelConfig) -> Result<EvalReport> {
    evaluate_with(analysis, plan, config, &BTreeMap::new())
}

pub fn evaluate_with(
    analysis: &CorpusAnalysis,
    plan: &SplitPlan,
    config: &ModelConfig,
    assigned: &BTreeMap<String, usize>,
) -> Result<EvalReport> {
    let files: Vec<(String, String)> = analysis
        .files
        .iter()
        .map(|f| (f.file.project.clone(), f.file.file_id.clone()))
        .collect();
    let folds = plan.folds(&files, assigned);
    if folds.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut per_project: BTreeMap<String, (Outcomes, usize, usize)> = BTreeMap::new();
    for fold in &folds {
        let (o, skipped) = evaluate_fold(analysis, fold, config)?;
        log::info!(
            "fold {}#{}: {} queries, top-1 {:.3}",
            fold.project,
            fold.index,
            o.model.len(),
            topk_accuracy(&o.model, 1)
        );
        let entry = per_project.entry(fold.project.clone()).or_default();
        entry.0.extend(o);
        entry.1 += skipped;
        entry.2 += 1;
    }
    let mut all = Outcomes::default();
    let mut projects = Vec::new();
    for (project, (o, skipped, nfolds)) in per_project {
        let unanalysable = analysis
            .files
            .iter()
            .filter(|f| f.file.project == project)
            .map(|f| f.failed_points)
            .sum();
        projects.push(ProjectReport {
            project,
            folds: nfolds,
            skipped_training_points: skipped,
            unanalysable_points: unanalysable,
            report: MethodReport::from_outcomes(&o),
        });
        all.extend(o);
    }
    Ok(EvalReport {
        plan: plan.clone(),
        config: config.clone(),
        projects,
        aggregate: MethodReport::from_outcomes(&all),
        skipped_files: analysis.skipped_files.clone(),
        miss_policy: MISS_POLICY.into(),
    })
}

impl EvalReport {
    /// Human-readable summary table.
    pub fn table(&self) -> String {
        let mut s = String::new();
        let header = KS.iter().map(|k| format!("top-{k:<2}")).collect::<Vec<_>>().join(" ");
        let _ = writeln!(s, "{:<18} {:<6} {:>6} {header}  mrr    cont", "project", "method", "n");
        let mut row = |name: &str, method: &str, m: &Metrics| {
            let cells = KS
                .iter()
                .map(|&k| format!("{:>6.3}", m.top(k)))
                .collect::<Vec<_>>()
                .join(" ");
            let _ = writeln!(
                s,
                "{name:<18} {method:<6} {:>6} {cells}  {:.3}  {:.3}",
                m.queries, m.mrr, m.containment
            );
        };
        let sections = self
            .projects
            .iter()
            .map(|p| (p.project.as_str(), &p.report))
            .chain(std::iter::once(("ALL", &self.aggregate)));
        for (name, r) in sections {
            row(name, "model", &r.model);
            row(name, "alpha", &r.alphabetical);
            row(name, "freq", &r.frequency);
        }
        let l = &self.aggregate.latency;
        let _ = writeln!(
            s,
            "latency: median {:.1} ms, p95 {:.1} ms, max {:.1} ms over {} queries; mean candidates {:.0}",
            l.median_ms, l.p95_ms, l.max_ms, l.count, self.aggregate.mean_candidates
        );
        s
    }
}

/// Mean and range of one metric over seeds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spread {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl Spread {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len().max(1) as f64;
        Spread {
            mean: xs.iter().sum::<f64>() / n,
            min: xs.iter().copied().fold(f64::INFINITY, f64::min),
            max: xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedSummary {
    pub seeds: Vec<u64>,
    /// Model top-k over seeds, keyed by k.
    pub topk: BTreeMap<usize, Spread>,
    pub mrr: Spread,
}

fn summarize(seeds: &[u64], reports: &[EvalReport]) -> SeedSummary {
    SeedSummary {
        seeds: seeds.to_vec(),
        topk: KS
            .iter()
            .map(|&k| {
                let xs: Vec<f64> = reports.iter().map(|r| r.aggregate.model.top(k)).collect();
                (k, Spread::of(&xs))
            })
            .collect(),
        mrr: Spread::of(&reports.iter().map(|r| r.aggregate.model.mrr).collect::<Vec<_>>()),
    }
}

fn with_seed(plan: &SplitPlan, config: &ModelConfig, seed: u64, mask: FeatureMask) -> (SplitPlan, ModelConfig) {
    let mut plan = plan.clone();
    plan.seed = seed;
    let mut config = config.clone();
    config.forest.seed = seed;
    config.mask = mask;
    (plan, config)
}

/// Repeats an evaluation under several seeds.
pub fn evaluate_seeds(
    analysis: &CorpusAnalysis,
    plan: &SplitPlan,
    config: &ModelConfig,
    seeds: &[u64],
) -> Result<(Vec<EvalReport>, SeedSummary)> {
    let reports = seeds
        .iter()
        .map(|&s| {
            let (p, c) = with_seed(plan, config, s, config.mask);
            evaluate(analysis, &p, &c)
        })
        .collect::<Result<Vec<_>>>()?;
    let summary = summarize(seeds, &reports);
    Ok((reports, summary))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureDelta {
    pub feature: Feature,
    pub summary: SeedSummary,
    /// Dropped minus full, per k, over seeds (paired by seed).
    pub topk_delta: BTreeMap<usize, Spread>,
    pub mrr_delta: Spread,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub plan: SplitPlan,
    pub full: SeedSummary,
    pub deltas: Vec<FeatureDelta>,
}

/// Re-runs the evaluation with each feature zeroed at training and test time.
pub fn ablate(
    analysis: &CorpusAnalysis,
    plan: &SplitPlan,
    config: &ModelConfig,
    seeds: &[u64],
    features: &[Feature],
) -> Result<AblationReport> {
    let run = |mask: FeatureMask| -> Result<Vec<EvalReport>> {
        seeds
            .iter()
            .map(|&s| {
                let (p, c) = with_seed(plan, config, s, mask);
                evaluate(analysis, &p, &c)
            })
            .collect()
    };
    let full = run(config.mask)?;
    let mut deltas = Vec::new();
    for &f in features {
        let mut dropped = config.mask.dropped();
        dropped.push(f);
        let reports = run(FeatureMask::dropping(dropped))?;
        let paired = |g: &dyn Fn(&EvalReport) -> f64| {
            let xs: Vec<f64> = reports.iter().zip(&full).map(|(d, b)| g(d) - g(b)).collect();
            Spread::of(&xs)
        };
        deltas.push(FeatureDelta {
            feature: f,
            summary: summarize(seeds, &reports),
            topk_delta: KS.iter().map(|&k| (k, paired(&|r| r.aggregate.model.top(k)))).collect(),
            mrr_delta: paired(&|r| r.aggregate.model.mrr),
        });
    }
    Ok(AblationReport {
        plan: plan.clone(),
        full: summarize(seeds, &full),
        deltas,
    })
}

impl AblationReport {
    pub fn table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "seeds {:?}", self.full.seeds);
        let _ = writeln!(
            s,
            "full      top-1 {:.3} top-5 {:.3} top-10 {:.3} mrr {:.3}",
            self.full.topk[&1].mean, self.full.topk[&5].mean, self.full.topk[&10].mean, self.full.mrr.mean
        );
        for d in &self.deltas {
            let _ = writeln!(
                s,
                "drop {}   top-1 {:+.3} [{:+.3}, {:+.3}] top-5 {:+.3} top-10 {:+.3} mrr {:+.3}",
                d.feature,
                d.topk_delta[&1].mean,
                d.topk_delta[&1].min,
                d.topk_delta[&1].max,
                d.topk_delta[&5].mean,
                d.topk_delta[&10].mean,
                d.mrr_delta.mean
            );
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Set counts behind a precision/recall pair.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeCounts {
    pub true_positive: usize,
    pub predicted: usize,
    pub golden: usize,
}

impl EdgeCounts {
    pub fn prf(self) -> Prf {
        let ratio = |a: usize, b: usize| if b == 0 { f64::from(u8::from(a == 0)) } else { a as f64 / b as f64 };
        let precision = ratio(self.true_positive, self.predicted);
        let recall = ratio(self.true_positive, self.golden);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Prf { precision, recall, f1 }
    }

    fn add(&mut self, o: EdgeCounts) {
        self.true_positive += o.true_positive;
        self.predicted += o.predicted;
        self.golden += o.golden;
    }
}

pub type Edge = (String, String);

pub fn edge_counts(predicted: &BTreeSet<Edge>, golden: &BTreeSet<Edge>) -> EdgeCounts {
    EdgeCounts {
        true_positive: predicted.intersection(golden).count(),
        predicted: predicted.len(),
        golden: golden.len(),
    }
}

/// Set precision, recall and F1 over `(src, dst)` pairs.
pub fn dataflow_score(predicted: &BTreeSet<Edge>, golden: &BTreeSet<Edge>) -> Prf {
    edge_counts(predicted, golden).prf()
}

/// Hand-labelled edges of one source file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldenFile {
    /// Source file, relative to the label file.
    pub file: String,
    pub edges: Vec<Edge>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldenFileScore {
    pub file: String,
    pub lines: usize,
    pub counts: EdgeCounts,
    pub score: Prf,
    pub missing: Vec<Edge>,
    pub extra: Vec<Edge>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldenReport {
    pub files: Vec<GoldenFileScore>,
    /// Pooled over every edge of every file.
    pub total: Prf,
    pub elapsed_ms: f64,
}

/// Predicted `(src, dst)` edges of a complete file.
pub fn predicted_edges(text: &str, file_id: &str) -> Result<BTreeSet<Edge>> {
    Ok(file_edges(text, file_id)?.into_iter().map(|e| (e.src, e.dst)).collect())
}

/// Scores every `*.json` label file in `dir` against the analysis.
pub fn score_golden(dir: &Path) -> Result<GoldenReport> {
    let start = web_time::Instant::now();
    let mut labels: Vec<_> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    labels.sort();
    let mut files = Vec::new();
    let mut total = EdgeCounts::default();
    for label in labels {
        let text = fs::read_to_string(&label).map_err(|e| Error::io(&label, e))?;
        let g: GoldenFile = serde_json::from_str(&text)?;
        let src_path = dir.join(&g.file);
        let src = fs::read_to_string(&src_path).map_err(|e| Error::io(&src_path, e))?;
        let predicted = predicted_edges(&src, &g.file)?;
        let golden: BTreeSet<Edge> = g.edges.into_iter().collect();
        let counts = edge_counts(&predicted, &golden);
        total.add(counts);
        files.push(GoldenFileScore {
            file: g.file,
            lines: src.lines().count(),
            counts,
            score: counts.prf(),
            missing: golden.difference(&predicted).cloned().collect(),
            extra: predicted.difference(&golden).cloned().collect(),
        });
    }
    Ok(GoldenReport {
        files,
        total: total.prf(),
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn topk_examples() {
        let r = [Some(1), Some(3), None];
        assert!((topk_accuracy(&r, 1) - 1.0 / 3.0).abs() < 1e-15);
        assert!((topk_accuracy(&r, 3) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(topk_accuracy(&[None, None], 5), 0.0);
        assert_eq!(topk_accuracy(&[], 1), 0.0);
    }

    #[test]
    fn mrr_examples() {
        assert_eq!(mrr(&[Some(1)]), 1.0);
        assert!((mrr(&[Some(1), Some(2), Some(4)]) - 0.58333).abs() < 1e-5);
        assert_eq!(mrr(&[None, None]), 0.0);
    }

    fn edges(v: &[(&str, &str)]) -> BTreeSet<Edge> {
        v.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
    }

    #[test]
    fn dataflow_score_examples() {
        let g: Vec<(String, String)> = (0..10).map(|i| (format!("a{i}"), format!("b{i}"))).collect();
        let golden: BTreeSet<Edge> = g.iter().cloned().collect();
        assert_eq!(dataflow_score(&golden, &golden), Prf { precision: 1.0, recall: 1.0, f1: 1.0 });
        let mut more = golden.clone();
        more.insert(("x".into(), "y".into()));
        let s = dataflow_score(&more, &golden);
        assert_eq!(s.precision, 10.0 / 11.0);
        assert_eq!(s.recall, 1.0);
        let s = dataflow_score(&edges(&[("p", "q")]), &golden);
        assert_eq!(s, Prf { precision: 0.0, recall: 0.0, f1: 0.0 });
    }

    #[test]
    fn latency_quantiles() {
        let l = LatencyStats::from_samples(&[5.0, 1.0, 3.0, 2.0, 4.0]);
        assert_eq!((l.median_ms, l.max_ms, l.count), (3.0, 5.0, 5));
    }

    #[test]
    fn baseline_ranks() {
        let names = ["zeta", "alpha", "mid"];
        assert_eq!(rank_by(&names, "mid", |n| n.to_string()), Some(2));
        let freq = HashMap::from([("zeta", 5usize), ("mid", 5)]);
        let key = |n: &str| std::cmp::Reverse(freq.get(n).copied().unwrap_or(0));
        assert_eq!(rank_by(&names, "zeta", key), Some(2));
        assert_eq!(rank_by(&names, "nope", key), None);
    }
}
