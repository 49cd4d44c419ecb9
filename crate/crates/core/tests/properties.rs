mod common;

use std::collections::{BTreeMap, BTreeSet};

use dotrank::candidates::{ApiCandidate, CandidateSource};
use dotrank::corpus::{SplitMode, SplitPlan};
use dotrank::dataflow::{analyze, analyze_module, file_edges};
use dotrank::eval::{mrr, topk_accuracy, Metrics, Outcome, KS};
use dotrank::features::{sim, CooccurTables, FileObservations, NGramModel};
use dotrank::forest::{ForestConfig, ForestModel, TrainingSample};
use dotrank::frontend::{parse_context, parse_module, split_identifier, RecommendationPoint, HOLE};
use dotrank::recommender::{rank, Ranked};
use dotrank::features::FeatureVector;
use proptest::prelude::*;

fn ident() -> impl Strategy<Value = String> {
    "[a-z]{1,5}(_[a-z]{1,5}){0,3}|[a-z]{1,4}([A-Z][a-z]{1,4}){0,3}"
}

proptest! {
    #[test]
    fn sim_is_symmetric(x in ident(), y in ident(), d in 1usize..6) {
        prop_assert_eq!(sim(&x, &y, d), sim(&y, &x, d));
    }

    #[test]
    fn sim_does_not_grow_with_distance(x in ident(), y in ident(), d in 1usize..8) {
        prop_assert!(sim(&x, &y, d + 1) <= sim(&x, &y, d));
    }

    #[test]
    fn sim_range_at_distance_one(x in ident(), y in ident()) {
        let xs: BTreeSet<String> = split_identifier(&x).into_iter().collect();
        let shared = split_identifier(&y).iter().any(|t| xs.contains(t));
        let s = sim(&x, &y, 1);
        if shared {
            prop_assert!(s > 0.0 && s <= 1.0);
        } else {
            prop_assert_eq!(s, 0.0);
        }
    }

    #[test]
    fn split_identifier_round_trips(name in "[A-Za-z_][A-Za-z0-9_]{0,20}") {
        let joined: String = split_identifier(&name).concat();
        let bare: String = name.chars().filter(|&c| c != '_').collect();
        prop_assert_eq!(joined, bare.to_lowercase());
    }
}

fn corpus() -> impl Strategy<Value = Vec<Vec<String>>> {
    prop::collection::vec(prop::collection::vec("[a-f]", 1..6), 1..=20)
}

proptest! {
    #[test]
    fn ngram_matches_brute_force(
        seqs in corpus(),
        order in 1usize..=3,
        ctx in prop::collection::vec("[a-h]", 0..4),
        w in "[a-h]",
    ) {
        let model = NGramModel::train(order, &seqs).unwrap();
        let ctx: Vec<&str> = ctx.iter().map(String::as_str).collect();
        prop_assert_eq!(model.prob(&ctx, &w), common::oracle_prob(order, &seqs, &ctx, &w));
    }

    #[test]
    fn ngram_distributions_sum_to_one(
        seqs in corpus(),
        contexts in prop::collection::vec(prop::collection::vec("[a-h]", 0..4), 100),
    ) {
        let model = NGramModel::train(3, &seqs).unwrap();
        for ctx in &contexts {
            let ctx: Vec<&str> = ctx.iter().map(String::as_str).collect();
            let total: f64 = model.distribution(&ctx).iter().map(|(_, p)| p).sum();
            prop_assert!((total - 1.0).abs() <= 1e-9, "sum {total}");
        }
    }

    #[test]
    fn ngram_scores_are_log_probabilities(seqs in corpus(), probe in prop::collection::vec("[a-h]", 0..6)) {
        let model = NGramModel::train(3, &seqs).unwrap();
        let s = model.score(&probe, None);
        prop_assert!(s <= 0.0);
        prop_assert!(s >= model.floor() - 1e-12);
    }
}

/// A statement drawn from a few shapes, with the edges the flow rules give it.
#[derive(Debug, Clone)]
enum Shape {
    Copy(usize, usize),
    Call(usize, usize, usize),
    Para(usize, usize, usize),
    Index(usize, usize, usize),
    Loop(usize, usize, usize, usize),
    Invoke(usize, usize, usize),
}

const VARS: [&str; 6] = ["a", "b", "c", "d", "e", "g"];
const FUNCS: [&str; 4] = ["p", "q", "r", "s"];

impl Shape {
    fn source(&self) -> String {
        match *self {
            Shape::Copy(v, u) => format!("{} = {}", VARS[v], VARS[u]),
            Shape::Call(v, u, m) => format!("{} = {}.{}()", VARS[v], VARS[u], FUNCS[m]),
            Shape::Para(f, a, b) => format!("{}({}, {})", FUNCS[f], VARS[a], VARS[b]),
            Shape::Index(v, x, y) => format!("{} = {}[{}]", VARS[v], VARS[x], VARS[y]),
            Shape::Loop(v, u, m, a) => format!("for {} in {}.{}({}):\n    pass", VARS[v], VARS[u], FUNCS[m], VARS[a]),
            Shape::Invoke(u, m, a) => format!("{}.{}({})", VARS[u], FUNCS[m], VARS[a]),
        }
    }

    fn edges(&self) -> Vec<(&'static str, &'static str)> {
        match *self {
            Shape::Copy(v, u) => vec![(VARS[u], VARS[v])],
            Shape::Call(v, u, m) => vec![(VARS[u], FUNCS[m]), (VARS[u], VARS[v]), (FUNCS[m], VARS[v])],
            Shape::Para(f, a, b) => vec![(VARS[a], FUNCS[f]), (VARS[b], FUNCS[f])],
            Shape::Index(v, x, y) => vec![(VARS[y], VARS[x]), (VARS[x], VARS[v]), (VARS[y], VARS[v])],
            Shape::Loop(v, u, m, a) => vec![
                (VARS[u], FUNCS[m]),
                (VARS[a], FUNCS[m]),
                (VARS[u], VARS[v]),
                (FUNCS[m], VARS[v]),
                (VARS[a], VARS[v]),
            ],
            Shape::Invoke(u, m, a) => vec![(VARS[u], FUNCS[m]), (VARS[a], FUNCS[m])],
        }
    }
}

fn shape() -> impl Strategy<Value = Shape> {
    let v = || 0..VARS.len();
    let f = || 0..FUNCS.len();
    prop_oneof![
        (v(), v()).prop_map(|(a, b)| Shape::Copy(a, b)),
        (v(), v(), f()).prop_map(|(a, b, c)| Shape::Call(a, b, c)),
        (f(), v(), v()).prop_map(|(a, b, c)| Shape::Para(a, b, c)),
        (v(), v(), v()).prop_map(|(a, b, c)| Shape::Index(a, b, c)),
        (v(), v(), f(), v()).prop_map(|(a, b, c, d)| Shape::Loop(a, b, c, d)),
        (v(), f(), v()).prop_map(|(a, b, c)| Shape::Invoke(a, b, c)),
    ]
}

fn program(shapes: &[Shape]) -> String {
    shapes.iter().map(|s| s.source() + "\n").collect()
}

proptest! {
    #[test]
    fn edges_match_rule_enumeration(shapes in prop::collection::vec(shape(), 1..12)) {
        let src = program(&shapes);
        let got: BTreeSet<(String, String)> =
            file_edges(&src, "p.py").unwrap().into_iter().map(|e| (e.src, e.dst)).collect();
        let want: BTreeSet<(String, String)> = shapes
            .iter()
            .flat_map(Shape::edges)
            .filter(|(s, d)| s != d)
            .map(|(s, d)| (s.to_string(), d.to_string()))
            .collect();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn analysis_is_deterministic(shapes in prop::collection::vec(shape(), 1..10), recv in 0..VARS.len()) {
        let src = format!("{}{}.", program(&shapes), VARS[recv]);
        let point = RecommendationPoint::at_end("p.py", &src).unwrap();
        let a = parse_context(&src, &point).unwrap();
        let b = parse_context(&src, &point).unwrap();
        prop_assert_eq!(&a, &b);
        let (fa, fb) = (analyze(&a), analyze(&b));
        prop_assert_eq!(fa.edges, fb.edges);
        prop_assert_eq!(fa.state, fb.state);
        prop_assert_eq!(fa.hole, fb.hole);
    }

    #[test]
    fn edges_only_use_names_before_the_point(
        before in prop::collection::vec(shape(), 1..8),
        after in prop::collection::vec(shape(), 1..4),
        recv in 0..VARS.len(),
    ) {
        let prefix = format!("{}{}.", program(&before), VARS[recv]);
        let src = format!("{prefix}__hole_target__()\n{}", program(&after));
        let point = RecommendationPoint::at_end("p.py", &prefix).unwrap();
        let flow = analyze(&parse_context(&src, &point).unwrap());
        let mut seen: BTreeSet<String> = prefix
            .split(|c: char| !c.is_alphanumeric() && c != '_')
            .map(String::from)
            .collect();
        seen.insert(HOLE.to_string());
        for e in &flow.edges {
            prop_assert!(seen.contains(&e.src) && seen.contains(&e.dst), "{e:?}");
        }
    }

    #[test]
    fn rebinding_kills_earlier_paths(shapes in prop::collection::vec(shape(), 0..10), v in 0..VARS.len()) {
        let src = format!("{}{} = fresh\n", program(&shapes), VARS[v]);
        let flow = analyze_module(&parse_module(&src, "p.py").unwrap());
        prop_assert_eq!(flow.state.dfs(VARS[v]).to_vec(), vec![vec!["fresh".to_string(), VARS[v].to_string()]]);
    }

    #[test]
    fn straight_line_code_preserves_state(
        shapes in prop::collection::vec(shape(), 1..8),
        extra in (0..FUNCS.len(), 0..VARS.len(), 0..VARS.len()),
    ) {
        // a call statement rebinds nothing, so every earlier path survives
        let src = program(&shapes);
        let before = analyze_module(&parse_module(&src, "p.py").unwrap()).state;
        let more = format!("{src}{}({}, {})\n", FUNCS[extra.0], VARS[extra.1], VARS[extra.2]);
        let after = analyze_module(&parse_module(&more, "p.py").unwrap()).state;
        for (var, paths) in &before.vars {
            if FUNCS.contains(&var.as_str()) {
                continue;
            }
            for p in paths {
                prop_assert!(after.dfs(var).contains(p), "{var}: {p:?} lost");
            }
        }
    }
}

fn outcomes() -> impl Strategy<Value = Vec<Outcome>> {
    prop::collection::vec(prop::option::of(1usize..15), 1..60)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn metrics_match_brute_force(lists in prop::collection::vec(
        (prop::collection::vec("[a-e]{1,2}", 0..12), "[a-e]{1,2}"), 1..30)
    ) {
        let results: Vec<Outcome> = lists
            .iter()
            .map(|(ranked, truth)| ranked.iter().position(|n| n == truth).map(|i| i + 1))
            .collect();
        for k in 1..=12 {
            let hits = lists.iter().filter(|(r, t)| r.iter().take(k).any(|n| n == t)).count();
            prop_assert_eq!(topk_accuracy(&results, k), hits as f64 / lists.len() as f64);
        }
        let mut rr = 0.0;
        for (r, t) in &lists {
            if let Some(i) = r.iter().position(|n| n == t) {
                rr += 1.0 / (i + 1) as f64;
            }
        }
        prop_assert_eq!(mrr(&results), rr / lists.len() as f64);
    }
}

proptest! {
    #[test]
    fn metric_ordering(results in outcomes()) {
        let m = Metrics::from_outcomes(&results);
        for w in KS.windows(2) {
            prop_assert!(m.top(w[0]) <= m.top(w[1]));
        }
        prop_assert!(m.top(1) <= m.mrr + 1e-12);
        prop_assert!(m.mrr <= m.containment + 1e-12);
        for k in KS {
            prop_assert!(m.top(k) <= m.containment);
        }
    }

    #[test]
    fn rank_matches_sort_oracle(items in prop::collection::vec(("[a-f]{1,3}", 0u8..5), 0..25)) {
        let scored: Vec<Ranked> = items
            .iter()
            .map(|(n, p)| Ranked {
                candidate: ApiCandidate { name: n.clone(), source: CandidateSource::ScopeMethod, owner: None },
                probability: *p as f64 / 4.0,
            })
            .collect();
        let got: Vec<(String, f64)> = rank(scored.clone())
            .into_iter()
            .map(|r| (r.candidate.name, r.probability))
            .collect();
        // selection sort: highest probability first, smallest name among ties
        let mut left: Vec<(String, f64)> = scored.into_iter().map(|r| (r.candidate.name, r.probability)).collect();
        let mut want = Vec::new();
        while !left.is_empty() {
            let mut best = 0;
            for i in 1..left.len() {
                let (b, c) = (&left[best], &left[i]);
                if c.1 > b.1 || (c.1 == b.1 && c.0 < b.0) {
                    best = i;
                }
            }
            want.push(left.remove(best));
        }
        prop_assert_eq!(got.iter().map(|x| &x.0).collect::<Vec<_>>(), want.iter().map(|x| &x.0).collect::<Vec<_>>());
        for w in got.windows(2) {
            prop_assert!(w[0].1 >= w[1].1);
        }
    }

    #[test]
    fn cooccurrence_pairs_bounded(files in prop::collection::vec(
        (prop::collection::vec(("[a-d]", "[p-s]"), 0..8), prop::collection::btree_set("[a-h]", 0..6)), 1..10)
    ) {
        let obs: Vec<FileObservations> = files
            .into_iter()
            .map(|(calls, tokens)| FileObservations { calls, tokens })
            .collect();
        let t = CooccurTables::build(&obs);
        prop_assert!(t.pair_counts_bounded());
        for x in ["a", "b", "e", "zz"] {
            for api in ["p", "s", "zz"] {
                let (c3, c4) = (t.object_confidence(x, api, None), t.context_confidence(x, api, None));
                prop_assert!((0.0..=1.0).contains(&c3) && (0.0..=1.0).contains(&c4));
            }
        }
    }

    #[test]
    fn kfold_train_and_test_are_disjoint(n in 1usize..40, folds in 2usize..6, seed in 0u64..50) {
        let files: Vec<(String, String)> = (0..n).map(|i| ("p".to_string(), format!("p/f{i}.py"))).collect();
        let plan = SplitPlan { mode: SplitMode::IntraProjectKfold, folds, seed };
        let mut tested = BTreeSet::new();
        for f in plan.folds(&files, &BTreeMap::new()) {
            let train: BTreeSet<&String> = f.train.iter().collect();
            prop_assert!(f.test.iter().all(|t| !train.contains(t)));
            tested.extend(f.test.clone());
        }
        prop_assert_eq!(tested.len(), n);
    }
}

fn samples() -> impl Strategy<Value = Vec<TrainingSample>> {
    prop::collection::vec((prop::array::uniform4(-1.0f64..1.0), any::<bool>()), 4..40).prop_map(|rows| {
        let mut v: Vec<TrainingSample> = rows
            .into_iter()
            .enumerate()
            .map(|(i, (a, label))| TrainingSample { vector: FeatureVector::from_array(a), label, point_id: i as u64 })
            .collect();
        v[0].label = true;
        v[1].label = false;
        v
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn forest_is_deterministic_and_bounded(data in samples(), seed in 0u64..1000, probes in prop::collection::vec(prop::array::uniform4(-2.0f64..2.0), 20)) {
        let config = ForestConfig { n_trees: 15, max_depth: 6, max_features: 2, seed };
        let a = ForestModel::train(&data, &config).unwrap();
        let b = ForestModel::train(&data, &config).unwrap();
        prop_assert_eq!(&a, &b);
        let mut reversed = a.clone();
        reversed.trees.reverse();
        for p in probes {
            let v = FeatureVector::from_array(p);
            let (pa, pr) = (a.predict_proba(&v), reversed.predict_proba(&v));
            prop_assert!((0.0..=1.0).contains(&pa));
            prop_assert!((pa - pr).abs() < 1e-12);
        }
    }
}
