mod common;

use std::collections::BTreeSet;

use dotrank::candidates::{ApiCandidate, CandidateSet, CandidateSource};
use dotrank::corpus::{
    analyze_files, build_tables, bundle_from_str, bundle_to_string, load_bundle, point_samples, save_bundle, train,
    FileRecord, SplitMode, SplitPlan, BUNDLE_FORMAT,
};
use dotrank::dataflow::{analyze, HoleFlow};
use dotrank::eval::{ablate, evaluate, KS};
use dotrank::features::ngram::NGramModel;
use dotrank::features::similarity::lcs_len;
use dotrank::features::{
    encode_t1, encode_t2, encode_t3, encode_t4, sim, CooccurTables, Encoder, Feature, FeatureMask, FeatureVector,
    FileObservations, PointEvidence,
};
use dotrank::forest::{ForestConfig, ForestModel, Node};
use dotrank::frontend::{parse_context, split_identifier, RecommendationPoint, DEFAULT_WINDOW, HOLE};
use dotrank::recommender::{build_vector, recommend, ModelBundle};
use dotrank::{Error, Stage};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{file, small_config, toy_analysis, toy_files};

fn strings(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

fn flow(upstream: &[&[&str]], sinks: &[&str]) -> HoleFlow {
    HoleFlow {
        receiver: upstream.first().and_then(|p| p.last()).map(|s| s.to_string()),
        upstream: upstream.iter().map(|p| strings(p)).collect(),
        sinks: strings(sinks),
        receiver_seen: true,
    }
}

fn toy_bundle() -> ModelBundle {
    let analysis = toy_analysis();
    let files: Vec<&FileRecord> = analysis.files.iter().collect();
    train(&files, &small_config(0)).unwrap().0
}

// similarity

#[test]
fn sim_identity_and_distance() {
    assert_eq!(sim("get_adapter", "get_adapter", 1), 1.0);
    assert_eq!(sim("get_adapter", "get_adapter", 2), 0.5);
}

#[test]
fn sim_uses_sub_token_lcs() {
    let (x, y) = (split_identifier("entry_point"), split_identifier("iter_entry_points"));
    assert_eq!(lcs_len(&x, &y), 1);
    assert_eq!(sim("entry_point", "iter_entry_points", 1), 0.4);
}

#[test]
fn t2_of_the_entry_point_path() {
    let f = flow(&[&["pkg_resources"]], &["entry_point"]);
    let want = sim("pkg_resources", "iter_entry_points", 1) + sim("entry_point", "iter_entry_points", 1);
    assert_eq!(encode_t2(Some(&f), "iter_entry_points"), want);
    assert_eq!(want, 0.4);
    assert_eq!(encode_t2(Some(&f), "working_set"), 0.0);
}

#[test]
fn t2_guard_for_a_single_token() {
    let f = flow(&[&["read_buf"]], &[]);
    assert_eq!(encode_t2(Some(&f), "read"), 2.0 / 3.0);
}

#[test]
fn fig2c_true_api_has_higher_t2() {
    let src = "import pkg_resources\n\n\
               def load(group):\n\
               \x20   for entry_point in pkg_resources.";
    let point = RecommendationPoint::at_end("f.py", src).unwrap();
    let ctx = parse_context(src, &point).unwrap();
    let analysis = analyze(&ctx);
    let paths: Vec<Vec<String>> = analysis.paths_to().unwrap().into_iter().map(|p| p.nodes).collect();
    assert!(paths.contains(&strings(&["pkg_resources", HOLE, "entry_point"])));
    let hole = analysis.hole.as_ref();
    assert!(encode_t2(hole, "iter_entry_points") > encode_t2(hole, "working_set"));
}

#[test]
fn fig2b_self_flows_into_three_sinks() {
    let src = "class Spider:\n    def crawl(self, url):\n        status, newtasks, result = self.";
    let point = RecommendationPoint::at_end("f.py", src).unwrap();
    let paths: Vec<Vec<String>> = analyze(&parse_context(src, &point).unwrap())
        .paths_to()
        .unwrap()
        .into_iter()
        .map(|p| p.nodes)
        .collect();
    assert!(paths.contains(&strings(&["self", HOLE, "status|newtasks|result"])));
}

// co-occurrence

fn calls(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
    pairs.iter().map(|(x, a)| (x.to_string(), a.to_string())).collect()
}

#[test]
fn t3_from_a_ten_file_fixture() {
    let files: Vec<FileObservations> = (0..10)
        .map(|i| FileObservations {
            calls: calls(&[("list", if i < 8 { "append" } else { "pop" })]),
            tokens: BTreeSet::new(),
        })
        .collect();
    let t = CooccurTables::build(&files);
    // brute force over the fixture
    let n_x = files.iter().flat_map(|f| &f.calls).filter(|(x, _)| x == "list").count() as u64;
    let n_pair = files.iter().flat_map(|f| &f.calls).filter(|(x, a)| x == "list" && a == "append").count() as u64;
    assert_eq!((n_pair, n_x), (8, 10));
    assert_eq!(t.object_counts("list", "append"), (8, 10));
    assert_eq!(encode_t3(&t, Some("list"), "append", None), 0.8);
    assert_eq!(encode_t3(&t, Some("tuple"), "append", None), 0.0);
    assert_eq!(encode_t3(&t, None, "append", None), 0.0);

    let all = CooccurTables::build(&[FileObservations {
        calls: calls(&[("f", "read"), ("f", "read")]),
        tokens: BTreeSet::new(),
    }]);
    assert_eq!(encode_t3(&all, Some("f"), "read", None), 1.0);
}

fn context_fixture() -> CooccurTables {
    // open appears in 5 files, 3 of which call read
    let files: Vec<FileObservations> = (0..6)
        .map(|i| FileObservations {
            calls: if i < 3 { calls(&[("f", "read")]) } else { calls(&[("f", "close")]) },
            tokens: if i < 5 { ["open".to_string()].into() } else { BTreeSet::new() },
        })
        .collect();
    CooccurTables::build(&files)
}

#[test]
fn t4_single_term() {
    let t = context_fixture();
    assert_eq!(t.context_counts("open", "read"), (3, 5));
    let bag = vec![("open".to_string(), 1)];
    assert_eq!(encode_t4(&t, &bag, "read", None), 0.6);
    assert_eq!(encode_t4(&t, &bag, "write", None), 0.0);
    assert_eq!(encode_t4(&t, &[], "read", None), 0.0);
}

#[test]
fn t4_weights_by_distance() {
    let t = context_fixture();
    let near = encode_t4(&t, &[("open".to_string(), 1)], "read", None);
    let far = encode_t4(&t, &[("open".to_string(), 3)], "read", None);
    assert!(far < near);
    let both = encode_t4(&t, &[("open".to_string(), 1), ("open".to_string(), 2)], "read", None);
    assert_eq!(both, (0.6 + 0.3) / 2.0);
}

// n-gram

#[test]
fn bigram_prefers_the_trained_order() {
    let m = NGramModel::train(2, &[strings(&["a", "b", "c"])]).unwrap();
    // vocabulary a b c plus end and unknown markers
    assert_eq!(m.prob(&["a"], "b"), 2.0 / 6.0);
    assert!(m.score(&["a", "b", "c"], None) > m.score(&["a", "c", "b"], None));
}

#[test]
fn single_node_path_scores_receiver_then_candidate() {
    let m = NGramModel::train(
        3,
        &[strings(&["x", "read"]), strings(&["x", "write"]), strings(&["y", "read"])],
    )
    .unwrap();
    let f = flow(&[&["x"]], &[]);
    // (<s>, x) seen twice, once before read; 6 predictable tokens
    assert_eq!(encode_t1(&m, Some(&f), "read", None), (2.0f64 / 8.0).ln());
    assert_eq!(encode_t1(&m, Some(&f), "nope", None), (1.0f64 / 8.0).ln());
}

#[test]
fn dict_items_outscores_keys() {
    let mut seqs = vec![strings(&["d", "items", "k", "v"]); 6];
    seqs.push(strings(&["d", "keys", "k"]));
    let m = NGramModel::train(3, &seqs).unwrap();
    let f = flow(&[&["d"]], &["k", "v"]);
    assert!(encode_t1(&m, Some(&f), "items", None) > encode_t1(&m, Some(&f), "keys", None));
}

// feature vector

#[test]
fn all_fallback_vector() {
    let bundle = toy_bundle();
    let c = ApiCandidate {
        name: "anything".into(),
        source: CandidateSource::StandardLibrary,
        owner: None,
    };
    let v = build_vector(&bundle, &PointEvidence::default(), &c);
    assert_eq!(v, FeatureVector { t1: bundle.ngram.floor(), t2: 0.0, t3: 0.0, t4: 0.0 });
}

#[test]
fn fixture_vector_is_exact() {
    let m = NGramModel::train(
        2,
        &[strings(&["read_buf", "read"]), strings(&["read_buf", "read"]), strings(&["read_buf", "write"])],
    )
    .unwrap();
    let obs = [
        FileObservations {
            calls: calls(&[("read_buf", "read")]),
            tokens: strings(&["open", "read_buf"]).into_iter().collect(),
        },
        FileObservations {
            calls: calls(&[("read_buf", "read")]),
            tokens: strings(&["read_buf"]).into_iter().collect(),
        },
        FileObservations {
            calls: calls(&[("read_buf", "write")]),
            tokens: strings(&["open"]).into_iter().collect(),
        },
    ];
    let t = CooccurTables::build(&obs);
    let ev = PointEvidence {
        flow: Some(flow(&[&["read_buf"]], &[])),
        object_key: Some("read_buf".into()),
        bag: vec![("open".into(), 1), ("read_buf".into(), 2)],
    };
    let v = Encoder::new(&m, &t, FeatureMask::default()).encode(&ev, "read");
    let want = FeatureVector {
        t1: (3.0f64 / 8.0).ln(),
        t2: 2.0 / 3.0,
        t3: 2.0 / 3.0,
        t4: (0.5 / 1.0 + 1.0 / 2.0) / 2.0,
    };
    assert_eq!(v, want);
}

// recommender

#[test]
fn dict_iteration_ranks_items_first() {
    let bundle = toy_bundle();
    let src = "def f(conf):\n    d = dict(conf)\n    for k, v in d.";
    let point = RecommendationPoint::at_end("q.py", src).unwrap();
    let rec = recommend(src, &point, &bundle, Some(10)).unwrap();
    assert_eq!(rec.ranked[0].candidate.name, "items", "{:?}", rec.ranked);
    assert!(rec.ranked.iter().all(|r| r.candidate.source == CandidateSource::InferredType));
}

#[test]
fn empty_candidates_name_the_stage() {
    // no project definitions either, so every source is empty
    let mut bundle = toy_bundle();
    bundle.project = Default::default();
    let src = "y.";
    let point = RecommendationPoint::at_end("q.py", src).unwrap();
    let err = recommend(src, &point, &bundle, None).unwrap_err();
    assert_eq!(err.stage(), Some(Stage::Candidates));
    assert!(matches!(err.root(), Error::EmptyCandidates));
    assert!(err.to_string().contains("candidates"));
}

#[test]
fn parse_errors_name_the_frontend() {
    let bundle = toy_bundle();
    let src = ".";
    let point = RecommendationPoint::new("q.py", 1, 0);
    let err = recommend(src, &point, &bundle, None).unwrap_err();
    assert_eq!(err.stage(), Some(Stage::Frontend));
}

#[test]
fn ties_are_alphabetical() {
    let mut bundle = toy_bundle();
    bundle.forest = ForestModel {
        config: ForestConfig::default(),
        trees: vec![Node::Leaf { leaf_counts: [1, 1] }],
    };
    let src = "d = {}\nd.";
    let point = RecommendationPoint::at_end("q.py", src).unwrap();
    let rec = recommend(src, &point, &bundle, None).unwrap();
    let names: Vec<&str> = rec.ranked.iter().map(|r| r.candidate.name.as_str()).collect();
    let mut sorted = names.clone();
    sorted.sort();
    assert!(names.len() > 2);
    assert_eq!(names, sorted);
    assert!(rec.ranked.iter().all(|r| r.probability == 0.5));
}

#[test]
fn json_output_shape() {
    let bundle = toy_bundle();
    let src = "d = {}\nd.";
    let point = RecommendationPoint::at_end("q.py", src).unwrap();
    let j = recommend(src, &point, &bundle, Some(3)).unwrap().to_json();
    assert_eq!(j["candidates"].as_array().unwrap().len(), 3);
    for c in j["candidates"].as_array().unwrap() {
        assert!(c["name"].is_string() && c["source"].is_string() && c["score"].is_number());
    }
    assert!(j["timings"]["total_ms"].is_number());
    assert_eq!(j["point"]["line"], 2);
}

// samples

fn candidate_set(n: usize) -> CandidateSet {
    CandidateSet {
        point: RecommendationPoint::new("q.py", 1, 1),
        candidates: (0..n)
            .map(|i| ApiCandidate {
                name: format!("api{i:02}"),
                source: CandidateSource::ScopeMethod,
                owner: None,
            })
            .collect(),
    }
}

#[test]
fn negative_sampling_policy() {
    let bundle = toy_bundle();
    let enc = bundle.encoder();
    let ev = PointEvidence::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let many = point_samples(&enc, &ev, &candidate_set(40), "api07", 20, &mut rng, 3).unwrap();
    assert_eq!(many.len(), 21);
    assert_eq!(many.iter().filter(|s| s.label).count(), 1);
    assert!(many.iter().all(|s| s.point_id == 3));

    let two = point_samples(&enc, &ev, &candidate_set(2), "api01", 20, &mut rng, 4).unwrap();
    assert_eq!((two.len(), two.iter().filter(|s| s.label).count()), (2, 1));

    let missing = point_samples(&enc, &ev, &candidate_set(5), "nope", 20, &mut rng, 5);
    assert!(matches!(missing, Err(Error::SkippedPoint { .. })));
}

// bundles

fn probes(n: usize) -> Vec<FeatureVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    use rand::Rng;
    (0..n)
        .map(|_| FeatureVector {
            t1: rng.gen_range(-8.0..0.0),
            t2: rng.gen_range(0.0..1.0),
            t3: rng.gen_range(0.0..1.0),
            t4: rng.gen_range(0.0..1.0),
        })
        .collect()
}

#[test]
fn bundle_round_trip_is_bit_identical() {
    let bundle = toy_bundle();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("b.json");
    save_bundle(&bundle, &path).unwrap();
    let back = load_bundle(&path).unwrap();
    assert_eq!(back, bundle);
    for v in probes(100) {
        assert_eq!(bundle.forest.predict_proba(&v).to_bits(), back.forest.predict_proba(&v).to_bits());
    }
}

#[test]
fn truncated_bundle_is_corrupt() {
    let text = bundle_to_string(&toy_bundle()).unwrap();
    let cut = &text[..text.len() / 2];
    assert!(matches!(bundle_from_str(cut), Err(Error::CorruptBundle(_))));
    let tampered = text.replacen("\"order\":3", "\"order\":2", 1);
    assert_ne!(tampered, text);
    assert!(matches!(bundle_from_str(&tampered), Err(Error::CorruptBundle(_))));
}

#[test]
fn old_bundle_version_is_rejected() {
    let text = bundle_to_string(&toy_bundle()).unwrap();
    let old = text.replacen(BUNDLE_FORMAT, "dotrank-bundle/0", 1);
    let err = bundle_from_str(&old).unwrap_err();
    assert!(matches!(err, Error::VersionMismatch { .. }));
    let msg = err.to_string();
    assert!(msg.contains("dotrank-bundle/0") && msg.contains(BUNDLE_FORMAT));
}

#[test]
fn bundle_counts_come_only_from_provenance_files() {
    let analysis = toy_analysis();
    let plan = SplitPlan {
        mode: SplitMode::IntraProjectKfold,
        folds: 4,
        seed: 0,
    };
    let ids: Vec<(String, String)> =
        analysis.files.iter().map(|f| (f.file.project.clone(), f.file.file_id.clone())).collect();
    let fold = &plan.folds(&ids, &Default::default())[0];
    let train_files: Vec<&FileRecord> =
        analysis.files.iter().filter(|f| fold.train.contains(&f.file.file_id)).collect();
    let (bundle, _) = train(&train_files, &small_config(0)).unwrap();

    for t in &fold.test {
        assert!(!bundle.provenance.files.contains_key(t));
    }
    let from_provenance: Vec<&FileRecord> = analysis
        .files
        .iter()
        .filter(|f| bundle.provenance.files.get(&f.file.file_id) == Some(&f.file.sha256()))
        .collect();
    assert_eq!(from_provenance.len(), bundle.provenance.files.len());
    let rebuilt = build_tables(&from_provenance, bundle.config.ngram_order).unwrap();
    assert_eq!(rebuilt.ngram, bundle.ngram);
    assert_eq!(rebuilt.tables, bundle.tables);
    assert_eq!(rebuilt.project, bundle.project);
}

// evaluation

fn six_point_analysis() -> dotrank::corpus::CorpusAnalysis {
    let a = "def f(conf):\n    d = dict(conf)\n    for k, v in d.items():\n        d.get(k)\n    d.pop(1)\n";
    let b = "def g(conf):\n    t = dict(conf)\n    for k, v in t.items():\n        t.setdefault(k, v)\n    t.get(1)\n";
    analyze_files(&[file("toy", "a.py", a), file("toy", "b.py", b)], DEFAULT_WINDOW)
}

fn two_fold() -> SplitPlan {
    SplitPlan {
        mode: SplitMode::IntraProjectKfold,
        folds: 2,
        seed: 0,
    }
}

#[test]
fn two_fold_report_is_complete() {
    let analysis = six_point_analysis();
    assert_eq!(analysis.files.iter().map(|f| f.points.len()).sum::<usize>(), 6);
    let r = evaluate(&analysis, &two_fold(), &small_config(0)).unwrap();
    assert_eq!(r.projects.len(), 1);
    assert_eq!(r.projects[0].folds, 2);
    let m = &r.aggregate.model;
    assert_eq!(m.queries, 6);
    for w in KS.windows(2) {
        assert!(m.top(w[0]) <= m.top(w[1]));
    }
    assert!(m.top(10) <= m.containment);
    assert_eq!(r.aggregate.latency.count, 6);
    assert!(r.aggregate.mean_candidates > 0.0);
    assert!(!r.miss_policy.is_empty());
    let j = serde_json::to_value(&r).unwrap();
    for key in ["plan", "config", "projects", "aggregate", "skipped_files", "miss_policy"] {
        assert!(j.get(key).is_some(), "{key}");
    }
    assert!(r.table().contains("toy"));
}

#[test]
fn seeded_runs_repeat() {
    let analysis = toy_analysis();
    let plan = SplitPlan {
        mode: SplitMode::IntraProjectKfold,
        folds: 4,
        seed: 7,
    };
    let a = evaluate(&analysis, &plan, &small_config(7)).unwrap();
    let b = evaluate(&analysis, &plan, &small_config(7)).unwrap();
    assert_eq!(a.aggregate.model, b.aggregate.model);
    assert_eq!(a.aggregate.alphabetical, b.aggregate.alphabetical);
    assert_eq!(a.aggregate.frequency, b.aggregate.frequency);
}

#[test]
fn dropping_a_feature_reports_deltas() {
    let analysis = toy_analysis();
    let r = ablate(&analysis, &two_fold(), &small_config(0), &[0, 1], &[Feature::T1]).unwrap();
    assert_eq!(r.deltas.len(), 1);
    let d = &r.deltas[0];
    assert_eq!(d.feature, Feature::T1);
    let want = d.summary.topk[&1].mean - r.full.topk[&1].mean;
    assert!((d.topk_delta[&1].mean - want).abs() < 1e-12);
    assert!(r.table().contains("drop t1"));
}

#[test]
fn toy_corpus_mines_every_call() {
    let analysis = toy_analysis();
    assert_eq!(analysis.files.len(), toy_files().len());
    assert!(analysis.skipped_files.is_empty());
    // items, keys, update, append, join, get, items, setdefault, pop per file
    assert!(analysis.files.iter().all(|f| f.points.len() == 9 && f.failed_points == 0));
}
