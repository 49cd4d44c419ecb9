use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn dotrank(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dotrank"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn write_project(dir: &Path) {
    for i in 0..6 {
        let text = format!(
            "import os\n\n\
             def merge_{i}(conf, extra):\n\
             \x20   out = dict(conf)\n\
             \x20   for k, v in extra.items():\n\
             \x20       out.setdefault(k, v)\n\
             \x20   keys = list(out.keys())\n\
             \x20   keys.append('x')\n\
             \x20   out.update(extra)\n\
             \x20   return os.path.join('a', out.get('b'))\n\n\
             def walk_{i}(d):\n\
             \x20   for k, v in d.items():\n\
             \x20       d.pop(k)\n\
             \x20   return d\n"
        );
        fs::write(dir.join(format!("m{i}.py")), text).unwrap();
    }
}

fn train(dir: &Path) -> PathBuf {
    let proj = dir.join("proj");
    fs::create_dir(&proj).unwrap();
    write_project(&proj);
    let model = dir.join("model.json");
    let o = dotrank(&[
        "train",
        "--project",
        proj.to_str().unwrap(),
        "--trees",
        "10",
        "--out",
        model.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    model
}

#[test]
fn train_then_recommend_json() {
    let tmp = tempfile::tempdir().unwrap();
    let model = train(tmp.path());
    let query = tmp.path().join("q.py");
    fs::write(&query, "def f(conf):\n    d = dict(conf)\n    for k in d.items():\n        pass\n").unwrap();
    let col = "    for k in d.items():".find('.').unwrap().to_string();
    let o = dotrank(&[
        "recommend",
        query.to_str().unwrap(),
        "--line",
        "3",
        "--col",
        &col,
        "--model",
        model.to_str().unwrap(),
        "--k",
        "5",
        "--json",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let cands = v["candidates"].as_array().unwrap();
    assert!(!cands.is_empty() && cands.len() <= 5);
    let names: Vec<&str> = cands.iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"items"), "{names:?}");
    let scores: Vec<f64> = cands.iter().map(|c| c["score"].as_f64().unwrap()).collect();
    assert!(scores.windows(2).all(|w| w[0] >= w[1]));
    assert_eq!(v["point"]["line"], 3);
}

#[test]
fn recommend_with_missing_model_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let query = tmp.path().join("q.py");
    fs::write(&query, "x = []\nx.append(1)\n").unwrap();
    let o = dotrank(&[
        "recommend",
        query.to_str().unwrap(),
        "--line",
        "2",
        "--col",
        "1",
        "--model",
        tmp.path().join("nope.json").to_str().unwrap(),
    ]);
    assert!(!o.status.success());
    assert!(!o.stderr.is_empty());
}

#[test]
fn recommend_on_a_corrupt_bundle_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let model = train(tmp.path());
    let text = fs::read_to_string(&model).unwrap();
    fs::write(&model, &text[..text.len() / 2]).unwrap();
    let query = tmp.path().join("q.py");
    fs::write(&query, "x = []\nx.append(1)\n").unwrap();
    let o = dotrank(&[
        "recommend",
        query.to_str().unwrap(),
        "--line",
        "2",
        "--col",
        "1",
        "--model",
        model.to_str().unwrap(),
    ]);
    assert!(!o.status.success());
}

#[test]
fn mine_writes_one_json_line_per_call() {
    let tmp = tempfile::tempdir().unwrap();
    write_project(tmp.path());
    let out = tmp.path().join("points.jsonl");
    let o = dotrank(&["mine", tmp.path().to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let lines: Vec<serde_json::Value> = fs::read_to_string(&out)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    // 9 attribute calls per file, os.path.join counted once
    assert_eq!(lines.len(), 6 * 9);
    assert!(lines.iter().all(|p| p["truth"].is_string() && p["context_hash"].as_str().unwrap().len() == 64));
}

#[test]
fn dataflow_dump_json() {
    let tmp = tempfile::tempdir().unwrap();
    let f = tmp.path().join("a.py");
    fs::write(&f, "a = b\nc = a.items()\n").unwrap();
    let o = dotrank(&["dataflow", "dump", f.to_str().unwrap(), "--json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let pairs: Vec<(String, String)> = v
        .as_array()
        .unwrap()
        .iter()
        .map(|e| (e["src"].as_str().unwrap().into(), e["dst"].as_str().unwrap().into()))
        .collect();
    assert!(pairs.contains(&("b".into(), "a".into())), "{pairs:?}");
    assert!(pairs.contains(&("a".into(), "items".into())), "{pairs:?}");
}

#[test]
fn dataflow_dump_rejects_bad_syntax() {
    let tmp = tempfile::tempdir().unwrap();
    let f = tmp.path().join("bad.py");
    fs::write(&f, "def (:\n").unwrap();
    let o = dotrank(&["dataflow", "dump", f.to_str().unwrap()]);
    assert!(!o.status.success());
}

#[test]
fn dataflow_score_golden_via_manifest() {
    let manifest = repo_root().join("corpus/manifest.json");
    let o = dotrank(&["dataflow", "score", manifest.to_str().unwrap(), "--json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["files"].as_array().unwrap().len() >= 10);
    assert!(v["total"]["precision"].as_f64().unwrap() >= 0.9);
    assert!(v["total"]["recall"].as_f64().unwrap() >= 0.9);
}

#[test]
fn evaluate_writes_a_json_report() {
    let tmp = tempfile::tempdir().unwrap();
    let proj = tmp.path().join("proj");
    fs::create_dir(&proj).unwrap();
    write_project(&proj);
    let report = tmp.path().join("report.json");
    let o = dotrank(&[
        "evaluate",
        "--project",
        proj.to_str().unwrap(),
        "--folds",
        "2",
        "--trees",
        "5",
        "--json",
        report.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("top-1"));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert!(v.is_object());
}

#[test]
fn unknown_feature_is_a_usage_error() {
    let o = dotrank(&["ablate", "--project", ".", "--features", "t9"]);
    assert_eq!(o.status.code(), Some(2));
}
