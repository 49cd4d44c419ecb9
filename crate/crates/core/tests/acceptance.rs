//! One line per acceptance criterion. Runs without the test harness so the
//! lines always show; exits non-zero if any criterion fails.

mod common;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use dotrank::corpus::{
    analyze_files, bundle_from_str, bundle_to_string, train, CorpusAnalysis, CorpusManifest, FileRecord, SplitMode,
    SplitPlan,
};
use dotrank::eval::{ablate, evaluate_with, mrr, score_golden, topk_accuracy, EvalReport, Outcome};
use dotrank::features::{encode_t3, encode_t4, sim, CooccurTables, Feature, FeatureVector, FileObservations, NGramModel};
use dotrank::forest::{auc, ForestConfig, ForestModel, TrainingSample};
use dotrank::frontend::DEFAULT_WINDOW;
use dotrank::recommender::ModelConfig;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn repo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn corpus() -> (CorpusManifest, CorpusAnalysis, f64) {
    let start = Instant::now();
    let (m, base) = CorpusManifest::load(&repo().join("corpus/manifest.json")).expect("manifest");
    let files = m.load_files(&base).expect("corpus files");
    let analysis = analyze_files(&files, DEFAULT_WINDOW);
    (m, analysis, start.elapsed().as_secs_f64())
}

fn dataflow_fidelity() -> Check {
    let dir = repo().join("corpus/golden");
    let start = Instant::now();
    let r = score_golden(&dir).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let prf = r.total;
    let locs: Vec<usize> = r.files.iter().map(|f| f.lines).collect();
    let sized = locs.iter().all(|&n| (27..=1700).contains(&n));
    ensure(
        r.files.len() >= 10 && sized && prf.precision >= 0.90 && prf.recall >= 0.90 && secs < 10.0,
        format!(
            "{} files ({}-{} loc), P {:.4} R {:.4}, {:.3} s",
            r.files.len(),
            locs.iter().min().unwrap_or(&0),
            locs.iter().max().unwrap_or(&0),
            prf.precision,
            prf.recall,
            secs
        ),
    )
}

fn accuracy(report: &EvalReport, projects: usize, secs: f64) -> Check {
    let a = &report.aggregate;
    let (m, al, fr) = (&a.model, &a.alphabetical, &a.frequency);
    let ok = projects >= 3
        && report.plan.folds == 10
        && m.top(10) >= al.top(10) + 0.10
        && m.top(10) >= fr.top(10) + 0.10
        && m.top(1) > al.top(1)
        && m.top(1) > fr.top(1)
        && secs < 1800.0;
    ensure(
        ok,
        format!(
            "{projects} projects, {} queries; top-1 {:.3} vs alpha {:.3} freq {:.3}; top-10 {:.3} vs alpha {:.3} freq {:.3}; {:.0} s",
            m.queries,
            m.top(1),
            al.top(1),
            fr.top(1),
            m.top(10),
            al.top(10),
            fr.top(10),
            secs
        ),
    )
}

fn latency(report: &EvalReport) -> Check {
    let l = &report.aggregate.latency;
    ensure(
        l.count > 0 && l.median_ms < 1000.0 && l.p95_ms < 3000.0,
        format!("{} queries, median {:.1} ms, p95 {:.1} ms, max {:.1} ms", l.count, l.median_ms, l.p95_ms, l.max_ms),
    )
}

fn metric_oracles() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let names = ["a", "b", "c", "d", "e", "f", "g", "h"];
    let mut mismatches = 0;
    for _ in 0..1000 {
        let queries = rng.gen_range(1..20);
        let lists: Vec<(Vec<&str>, &str)> = (0..queries)
            .map(|_| {
                let mut ranked = names.to_vec();
                ranked.shuffle(&mut rng);
                ranked.truncate(rng.gen_range(0..=names.len()));
                (ranked, *names.choose(&mut rng).unwrap())
            })
            .collect();
        let results: Vec<Outcome> =
            lists.iter().map(|(r, t)| r.iter().position(|n| n == t).map(|i| i + 1)).collect();
        for k in 1..=names.len() {
            let hits = lists.iter().filter(|(r, t)| r.iter().take(k).any(|n| n == t)).count();
            if topk_accuracy(&results, k) != hits as f64 / queries as f64 {
                mismatches += 1;
            }
        }
        let mut rr = 0.0;
        for (r, t) in &lists {
            for (i, n) in r.iter().enumerate() {
                if n == t {
                    rr += 1.0 / (i + 1) as f64;
                }
            }
        }
        if mrr(&results) != rr / queries as f64 {
            mismatches += 1;
        }
    }
    let m = mrr(&[Some(1), Some(2), Some(4)]);
    ensure(
        mismatches == 0 && (m - 0.58333).abs() <= 1e-5 && (m - 1.75 / 3.0).abs() <= 1e-9,
        format!("1000 random lists, {mismatches} mismatches; mrr [1,2,4] = {m:.9}"),
    )
}

fn formula_suites() -> Check {
    let mut fails = Vec::new();
    let mut check = |name: &str, ok: bool| {
        if !ok {
            fails.push(name.to_string());
        }
    };
    check("sim identity", sim("get_adapter", "get_adapter", 1) == 1.0);
    check("sim halving", sim("get_adapter", "get_adapter", 2) == 0.5);
    check("sim lcs", sim("entry_point", "iter_entry_points", 1) == 0.4);

    let obs: Vec<FileObservations> = (0..10)
        .map(|i| FileObservations {
            calls: vec![("list".into(), if i < 8 { "append" } else { "pop" }.into())],
            tokens: if i < 5 { ["open".to_string()].into() } else { Default::default() },
        })
        .collect();
    let t = CooccurTables::build(&obs);
    check("t3 ratio", encode_t3(&t, Some("list"), "append", None) == 0.8);
    check("t3 unseen object", encode_t3(&t, Some("dict"), "append", None) == 0.0);
    let full = CooccurTables::build(&[FileObservations {
        calls: vec![("f".into(), "read".into())],
        tokens: Default::default(),
    }]);
    check("t3 upper bound", encode_t3(&full, Some("f"), "read", None) == 1.0);
    let conf = t.context_confidence("open", "append", None);
    check("t4 confidence range", (0.0..=1.0).contains(&conf) && conf == 1.0);
    check("t4 unseen token", t.context_confidence("close", "append", None) == 0.0);
    check("t4 empty bag", encode_t4(&t, &[], "append", None) == 0.0);
    let at = |d: usize| encode_t4(&t, &[("open".to_string(), d)], "append", None);
    check("t4 distance weighting", (1..10).all(|d| at(d + 1) < at(d)) && at(1) == 1.0 && at(4) == 0.25);
    ensure(fails.is_empty(), if fails.is_empty() { "sim, t3, t4 exact".into() } else { fails.join(", ") })
}

fn ngram_correctness() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let alphabet = ["a", "b", "c", "d", "e", "f"];
    let mut worst_sum: f64 = 0.0;
    let mut mismatches = 0;
    let mut checked = 0;
    for round in 0..20 {
        let seqs: Vec<Vec<String>> = (0..rng.gen_range(1..=20))
            .map(|_| (0..rng.gen_range(1..6)).map(|_| alphabet.choose(&mut rng).unwrap().to_string()).collect())
            .collect();
        let order = 1 + round % 3;
        let model = NGramModel::train(order, &seqs).unwrap();
        for _ in 0..100 {
            let ctx: Vec<&str> = (0..rng.gen_range(0..4)).map(|_| *["a", "c", "f", "zz"].choose(&mut rng).unwrap()).collect();
            let sum: f64 = model.distribution(&ctx).iter().map(|(_, p)| p).sum();
            worst_sum = worst_sum.max((sum - 1.0).abs());
            for w in ["a", "b", "f", "zz"] {
                checked += 1;
                if model.prob(&ctx, w) != common::oracle_prob(order, &seqs, &ctx, w) {
                    mismatches += 1;
                }
            }
        }
    }
    ensure(
        worst_sum <= 1e-9 && mismatches == 0,
        format!("2000 contexts, max |sum - 1| = {worst_sum:.1e}; {checked} probabilities vs oracle, {mismatches} mismatches"),
    )
}

fn synthetic(n: usize, rng: &mut ChaCha8Rng, first_id: u64) -> Vec<TrainingSample> {
    (0..n)
        .map(|i| {
            let v = FeatureVector {
                t1: rng.gen_range(-10.0..0.0),
                t2: rng.gen_range(0.0..1.0),
                t3: rng.gen_range(0.0..1.0),
                t4: rng.gen_range(0.0..1.0),
            };
            TrainingSample {
                label: v.t2 > 0.5,
                vector: v,
                point_id: first_id + i as u64,
            }
        })
        .collect()
}

fn forest_sanity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let train_set = synthetic(2000, &mut rng, 0);
    let held_out = synthetic(1000, &mut rng, 2000);
    let config = ForestConfig {
        n_trees: 100,
        ..ForestConfig::default()
    };
    let a = ForestModel::train(&train_set, &config).map_err(|e| e.to_string())?;
    let b = ForestModel::train(&train_set, &config).map_err(|e| e.to_string())?;
    let scores: Vec<f64> = held_out.iter().map(|s| a.predict_proba(&s.vector)).collect();
    let labels: Vec<bool> = held_out.iter().map(|s| s.label).collect();
    let area = auc(&scores, &labels);
    let same = a == b
        && held_out
            .iter()
            .all(|s| a.predict_proba(&s.vector).to_bits() == b.predict_proba(&s.vector).to_bits());
    ensure(
        area >= 0.95 && same,
        format!("held-out AUC {area:.4} (2000 train, 1000 test, 100 trees); retrain identical: {same}"),
    )
}

fn serialization(analysis: &CorpusAnalysis) -> Check {
    let files: Vec<&FileRecord> = analysis.files.iter().filter(|f| f.file.project == "h11").collect();
    let (bundle, _) = train(&files, &ModelConfig::default()).map_err(|e| e.to_string())?;
    let text = bundle_to_string(&bundle).map_err(|e| e.to_string())?;
    let back = bundle_from_str(&text).map_err(|e| e.to_string())?;
    // probe with real feature vectors of the first 100 points
    let enc = bundle.encoder();
    let probes: Vec<FeatureVector> = files
        .iter()
        .flat_map(|f| &f.points)
        .take(100)
        .map(|p| enc.encode(&p.analysis.evidence, &p.mined.truth))
        .collect();
    let identical = probes
        .iter()
        .all(|v| bundle.forest.predict_proba(v).to_bits() == back.forest.predict_proba(v).to_bits());
    ensure(
        probes.len() == 100 && identical && back == bundle,
        format!("{} probes, bit-identical {identical}, {} kB bundle", probes.len(), text.len() / 1024),
    )
}

fn ablation(analysis: &CorpusAnalysis) -> Check {
    // reduced settings: 3 folds, 30 trees
    let plan = SplitPlan {
        mode: SplitMode::IntraProjectKfold,
        folds: 3,
        seed: 0,
    };
    let mut config = ModelConfig::default();
    config.forest.n_trees = 30;
    let seeds = [0, 1, 2];
    let start = Instant::now();
    let r = ablate(analysis, &plan, &config, &seeds, &Feature::ALL).map_err(|e| e.to_string())?;
    println!("{}", r.table().trim_end());
    let complete = r.deltas.len() == 4 && r.full.seeds.len() == 3 && r.deltas.iter().all(|d| d.topk_delta.len() == 6);
    let summary: Vec<String> =
        r.deltas.iter().map(|d| format!("{} {:+.3}", d.feature, d.topk_delta[&1].mean)).collect();
    ensure(
        complete,
        format!(
            "3 seeds, top-1 deltas {}; {:.0} s",
            summary.join(", "),
            start.elapsed().as_secs_f64()
        ),
    )
}

fn main() -> ExitCode {
    let mut lines: Vec<(usize, &str, Check)> = Vec::new();
    lines.push((1, "data-flow fidelity", dataflow_fidelity()));

    let start = Instant::now();
    let (manifest, analysis, _) = corpus();
    let plan = manifest.split.clone().unwrap_or(SplitPlan {
        mode: SplitMode::IntraProjectKfold,
        folds: 10,
        seed: 0,
    });
    let report = evaluate_with(&analysis, &plan, &ModelConfig::default(), &manifest.assignments());
    let secs = start.elapsed().as_secs_f64();
    match &report {
        Ok(r) => {
            println!("{}", r.table().trim_end());
            lines.push((2, "accuracy over baselines", accuracy(r, r.projects.len(), secs)));
            lines.push((3, "latency", latency(r)));
        }
        Err(e) => {
            lines.push((2, "accuracy over baselines", Err(e.to_string())));
            lines.push((3, "latency", Err(e.to_string())));
        }
    }
    lines.push((4, "metric oracles", metric_oracles()));
    lines.push((5, "formula suites", formula_suites()));
    lines.push((6, "n-gram correctness", ngram_correctness()));
    lines.push((7, "forest sanity", forest_sanity()));
    lines.push((8, "bundle serialization", serialization(&analysis)));
    lines.push((9, "ablation harness", ablation(&analysis)));

    let mut failed = 0;
    println!();
    for (n, name, check) in &lines {
        match check {
            Ok(d) => println!("criterion {n} PASS {name}: {d}"),
            Err(d) => {
                failed += 1;
                println!("criterion {n} FAIL {name}: {d}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
