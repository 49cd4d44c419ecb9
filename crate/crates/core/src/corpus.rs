//! Corpus ingestion, point mining, training, splits and bundle files.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use sha2::{Digest, Sha256};

use crate::candidates::{module_name, CandidateSet, ProjectIndex, StdlibIndex};
use crate::error::{Error, Result};
use crate::features::{training_sequence, CooccurTables, Encoder, FileObservations, NGramModel, PointEvidence};
use crate::forest::{ForestModel, TrainingSample};
use crate::frontend::{self, LineIndex, RecommendationPoint};
use crate::par_map;
use crate::recommender::{analyze_point, ModelBundle, ModelConfig, PointAnalysis, Provenance};

pub const BUNDLE_FORMAT: &str = "dotrank-bundle/1";
pub const MANIFEST_FORMAT: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceFile {
    pub project: String,
    /// `project/relative/path.py`, unique across a corpus.
    pub file_id: String,
    pub text: String,
}

impl SourceFile {
    pub fn sha256(&self) -> String {
        hex::encode(Sha256::digest(self.text.as_bytes()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinedPoint {
    pub file_id: String,
    pub point: RecommendationPoint,
    /// Method called at the point in the original file.
    pub truth: String,
    /// SHA-256 of the prefix up to and including the dot.
    pub context_hash: String,
}

/// Reads every `.py` file under `root` in lexicographic path order.
pub fn load_project(name: &str, root: &Path) -> Result<Vec<SourceFile>> {
    let mut paths: Vec<PathBuf> = walkdir::WalkDir::new(root)
        .sort_by_file_name()
        .into_iter()
        .filter_entry(|e| e.depth() == 0 || !e.file_name().to_string_lossy().starts_with('.'))
        .filter_map(|e| e.ok())
        .filter(|e| e.file_type().is_file() && e.path().extension().is_some_and(|x| x == "py"))
        .map(|e| e.into_path())
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let text = fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
            let rel = p.strip_prefix(root).unwrap_or(&p).to_string_lossy().replace('\\', "/");
            Ok(SourceFile {
                project: name.to_string(),
                file_id: format!("{name}/{rel}"),
                text,
            })
        })
        .collect()
}

/// Every `expr.name(...)` of a file that parses, top to bottom.
pub fn mine_file(file: &SourceFile) -> Result<Vec<MinedPoint>> {
    frontend::parse_module(&file.text, &file.file_id)?;
    let lines = LineIndex::new(&file.text);
    Ok(frontend::attribute_calls(&file.text)
        .into_iter()
        .map(|(dot, truth)| MinedPoint {
            file_id: file.file_id.clone(),
            point: RecommendationPoint::new(
                file.file_id.clone(),
                lines.line_of(dot),
                lines.column_of(&file.text, dot),
            ),
            truth,
            context_hash: hex::encode(Sha256::digest(&file.text.as_bytes()[..=dot])),
        })
        .collect())
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MiningResult {
    pub points: Vec<MinedPoint>,
    /// Files that failed to parse.
    pub skipped_files: Vec<String>,
}

pub fn mine_files(files: &[SourceFile]) -> MiningResult {
    let mut out = MiningResult::default();
    for (file, mined) in files.iter().zip(par_map(files, mine_file)) {
        match mined {
            Ok(points) => out.points.extend(points),
            Err(_) => out.skipped_files.push(file.file_id.clone()),
        }
    }
    out
}

/// Mines the project at `root`, named after its directory.
pub fn mine_points(root: &Path) -> Result<MiningResult> {
    let name = root
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "project".into());
    Ok(mine_files(&load_project(&name, root)?))
}

pub fn write_points_jsonl(points: &[MinedPoint], out: &mut impl std::io::Write) -> std::io::Result<()> {
    for p in points {
        serde_json::to_writer(&mut *out, p)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// A mined point with everything training and evaluation reuse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub mined: MinedPoint,
    pub analysis: PointAnalysis,
}

impl PointRecord {
    /// N-gram training sequence with the truth in the hole.
    pub fn sequence(&self) -> Option<Vec<String>> {
        self.analysis
            .evidence
            .flow
            .as_ref()
            .map(|f| training_sequence(f, &self.mined.truth))
    }
}

/// One analysed file.
#[derive(Debug, Clone, PartialEq)]
pub struct FileRecord {
    pub file: SourceFile,
    pub points: Vec<PointRecord>,
    pub observations: FileObservations,
    pub index: ProjectIndex,
    /// Mined points whose context could not be analysed.
    pub failed_points: usize,
}

impl FileRecord {
    pub fn sequences(&self) -> Vec<Vec<String>> {
        self.points.iter().filter_map(PointRecord::sequence).collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CorpusAnalysis {
    pub files: Vec<FileRecord>,
    pub skipped_files: Vec<String>,
}

pub fn analyze_file(file: &SourceFile, window: usize) -> Result<FileRecord> {
    let module = frontend::parse_module(&file.text, &file.file_id)?;
    let mined = mine_file(file)?;
    let mut index = ProjectIndex::default();
    index.add_file(&file.file_id, &module);
    let mut points = Vec::with_capacity(mined.len());
    let mut failed_points = 0;
    for m in mined {
        match analyze_point(&file.text, &m.point, window) {
            Ok(analysis) => points.push(PointRecord { mined: m, analysis }),
            Err(e) => {
                log::debug!("{}:{}: {e}", m.file_id, m.point.line);
                failed_points += 1;
            }
        }
    }
    let observations = FileObservations {
        calls: points
            .iter()
            .filter_map(|p| Some((p.analysis.evidence.object_key.clone()?, p.mined.truth.clone())))
            .collect(),
        tokens: frontend::code_tokens(&file.text).into_iter().collect(),
    };
    Ok(FileRecord {
        file: file.clone(),
        points,
        observations,
        index,
        failed_points,
    })
}

pub fn analyze_files(files: &[SourceFile], window: usize) -> CorpusAnalysis {
    let mut out = CorpusAnalysis::default();
    for (file, rec) in files.iter().zip(par_map(files, |f| analyze_file(f, window))) {
        match rec {
            Ok(r) => out.files.push(r),
            Err(_) => out.skipped_files.push(file.file_id.clone()),
        }
    }
    out
}

/// One positive and up to `max_negatives` uniformly sampled negatives.
pub fn point_samples(
    encoder: &Encoder<'_>,
    evidence: &PointEvidence,
    set: &CandidateSet,
    truth: &str,
    max_negatives: usize,
    rng: &mut ChaCha8Rng,
    point_id: u64,
) -> Result<Vec<TrainingSample>> {
    if !set.contains(truth) {
        return Err(Error::SkippedPoint { truth: truth.into() });
    }
    let negatives: Vec<&str> = set.names().filter(|n| *n != truth).collect();
    let mut keep: Vec<usize> = if negatives.len() > max_negatives {
        rand::seq::index::sample(rng, negatives.len(), max_negatives).into_vec()
    } else {
        (0..negatives.len()).collect()
    };
    keep.sort_unstable();
    let sample = |api: &str, label| TrainingSample {
        vector: encoder.encode(evidence, api),
        label,
        point_id,
    };
    let mut out = vec![sample(truth, true)];
    out.extend(keep.into_iter().map(|i| sample(negatives[i], false)));
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainStats {
    pub files: usize,
    pub points: usize,
    pub skipped_points: usize,
    pub sequences: usize,
    pub samples: usize,
}

/// Tables learned from training files, before the forest.
pub struct TrainingTables {
    pub ngram: NGramModel,
    pub tables: CooccurTables,
    pub project: ProjectIndex,
}

pub fn build_tables(files: &[&FileRecord], order: usize) -> Result<TrainingTables> {
    let sequences: Vec<Vec<String>> = files.iter().flat_map(|f| f.sequences()).collect();
    let ngram = NGramModel::train(order, &sequences)?;
    let tables = CooccurTables::build(files.iter().map(|f| &f.observations));
    let mut project = ProjectIndex::default();
    for f in files {
        project.merge(&f.index);
    }
    Ok(TrainingTables { ngram, tables, project })
}

/// Training samples of every point, each file scored as if it were not part
/// of the tables. Points whose truth is not a candidate are counted and left
/// out.
pub fn build_samples(
    files: &[&FileRecord],
    tables: &TrainingTables,
    stdlib: &StdlibIndex,
    config: &ModelConfig,
) -> (Vec<TrainingSample>, usize) {
    let mut offsets = Vec::with_capacity(files.len());
    let mut n = 0u64;
    for f in files {
        offsets.push(n);
        n += f.points.len() as u64;
    }
    let jobs: Vec<(&FileRecord, u64)> = files.iter().copied().zip(offsets).collect();
    let per_file = par_map(&jobs, |&(f, first_id)| {
        let held_ngram = tables.ngram.counts_of(&f.sequences());
        let held_tables = tables.tables.counts_of(&f.observations);
        let encoder =
            Encoder::new(&tables.ngram, &tables.tables, config.mask).holding_out(&held_ngram, &held_tables);
        let own = module_name(&f.file.file_id);
        let mut samples = Vec::new();
        let mut skipped = 0;
        for (i, p) in f.points.iter().enumerate() {
            let id = first_id + i as u64;
            let mut rng = ChaCha8Rng::seed_from_u64(config.forest.seed);
            rng.set_stream(id);
            let set = p
                .analysis
                .query
                .generate_without(&p.mined.point, stdlib, &tables.project, Some(&own));
            let got = set.and_then(|set| {
                point_samples(
                    &encoder,
                    &p.analysis.evidence,
                    &set,
                    &p.mined.truth,
                    config.max_negatives,
                    &mut rng,
                    id,
                )
            });
            match got {
                Ok(s) => samples.extend(s),
                Err(_) => skipped += 1,
            }
        }
        (samples, skipped)
    });
    let mut samples = Vec::new();
    let mut skipped = 0;
    for (s, k) in per_file {
        samples.extend(s);
        skipped += k;
    }
    (samples, skipped)
}

/// Trains a complete bundle from analysed training files.
pub fn train(files: &[&FileRecord], config: &ModelConfig) -> Result<(ModelBundle, TrainStats)> {
    if files.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let tables = build_tables(files, config.ngram_order)?;
    let stdlib = StdlibIndex::bundled().clone();
    let (samples, skipped_points) = build_samples(files, &tables, &stdlib, config);
    let forest = ForestModel::train(&samples, &config.forest)?;
    let stats = TrainStats {
        files: files.len(),
        points: files.iter().map(|f| f.points.len()).sum(),
        skipped_points,
        sequences: files.iter().map(|f| f.sequences().len()).sum(),
        samples: samples.len(),
    };
    let provenance = Provenance {
        files: files.iter().map(|f| (f.file.file_id.clone(), f.file.sha256())).collect(),
    };
    let bundle = ModelBundle {
        config: config.clone(),
        ngram: tables.ngram,
        tables: tables.tables,
        stdlib,
        project: tables.project,
        forest,
        provenance,
    };
    Ok((bundle, stats))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitMode {
    IntraProjectKfold,
    CrossProject,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub mode: SplitMode,
    pub folds: usize,
    pub seed: u64,
}

impl Default for SplitPlan {
    fn default() -> Self {
        SplitPlan {
            mode: SplitMode::IntraProjectKfold,
            folds: 10,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    /// Project tested in this fold.
    pub project: String,
    pub index: usize,
    pub train: Vec<String>,
    pub test: Vec<String>,
}

impl SplitPlan {
    /// Train/test file ids per fold. `assigned` pins files to folds (from a
    /// manifest); other files are shuffled with the seed and dealt round-robin.
    pub fn folds(&self, files: &[(String, String)], assigned: &BTreeMap<String, usize>) -> Vec<Fold> {
        let mut by_project: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for (project, id) in files {
            by_project.entry(project).or_default().push(id);
        }
        match self.mode {
            SplitMode::CrossProject => by_project
                .keys()
                .enumerate()
                .map(|(i, &p)| Fold {
                    project: p.to_string(),
                    index: i,
                    train: files.iter().filter(|(q, _)| q != p).map(|(_, id)| id.clone()).collect(),
                    test: by_project[p].iter().map(|s| s.to_string()).collect(),
                })
                .collect(),
            SplitMode::IntraProjectKfold => {
                let mut out = Vec::new();
                for (project, ids) in by_project {
                    let mut ids: Vec<&str> = ids;
                    ids.sort_unstable();
                    let k = self.folds.clamp(1, ids.len().max(1));
                    let mut free: Vec<&str> = ids.iter().copied().filter(|id| !assigned.contains_key(*id)).collect();
                    let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                    free.shuffle(&mut rng);
                    let mut fold_of: BTreeMap<&str, usize> = BTreeMap::new();
                    for (i, id) in free.into_iter().enumerate() {
                        fold_of.insert(id, i % k);
                    }
                    for id in &ids {
                        if let Some(&f) = assigned.get(*id) {
                            fold_of.insert(id, f % k);
                        }
                    }
                    for f in 0..k {
                        let (test, train): (Vec<&str>, Vec<&str>) = ids.iter().partition(|id| fold_of[*id] == f);
                        if test.is_empty() {
                            continue;
                        }
                        out.push(Fold {
                            project: project.to_string(),
                            index: f,
                            train: train.into_iter().map(String::from).collect(),
                            test: test.into_iter().map(String::from).collect(),
                        });
                    }
                }
                out
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestProject {
    pub name: String,
    /// Relative to the manifest's directory.
    pub root: PathBuf,
    /// File id to fold, for pinned assignments.
    #[serde(default)]
    pub folds: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub format_version: u32,
    pub projects: Vec<ManifestProject>,
    #[serde(default)]
    pub split: Option<SplitPlan>,
    /// Hand-labelled data-flow files, relative to the manifest.
    #[serde(default)]
    pub golden: Option<PathBuf>,
}

impl CorpusManifest {
    pub fn load(path: &Path) -> Result<(Self, PathBuf)> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let m: CorpusManifest = serde_json::from_str(&text).map_err(|e| Error::Manifest(e.to_string()))?;
        if m.format_version != MANIFEST_FORMAT {
            return Err(Error::VersionMismatch {
                found: m.format_version.to_string(),
                expected: MANIFEST_FORMAT.to_string(),
            });
        }
        let mut names = BTreeSet::new();
        for p in &m.projects {
            if !names.insert(&p.name) {
                return Err(Error::Manifest(format!("duplicate project `{}`", p.name)));
            }
        }
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((m, base))
    }

    pub fn load_files(&self, base: &Path) -> Result<Vec<SourceFile>> {
        let mut out = Vec::new();
        for p in &self.projects {
            let root = base.join(&p.root);
            if !root.is_dir() {
                return Err(Error::Manifest(format!("project root {} is not a directory", root.display())));
            }
            out.extend(load_project(&p.name, &root)?);
        }
        Ok(out)
    }

    pub fn assignments(&self) -> BTreeMap<String, usize> {
        self.projects.iter().flat_map(|p| p.folds.clone()).collect()
    }
}

#[derive(Serialize, Deserialize)]
struct Envelope<'a> {
    format_version: String,
    /// SHA-256 of the payload text.
    sha256: String,
    #[serde(borrow)]
    payload: &'a RawValue,
}

pub fn bundle_to_string(bundle: &ModelBundle) -> Result<String> {
    let payload = serde_json::to_string(bundle)?;
    let raw = RawValue::from_string(payload)?;
    let env = Envelope {
        format_version: BUNDLE_FORMAT.into(),
        sha256: hex::encode(Sha256::digest(raw.get().as_bytes())),
        payload: &raw,
    };
    Ok(serde_json::to_string(&env)?)
}

pub fn bundle_from_str(text: &str) -> Result<ModelBundle> {
    let env: Envelope = serde_json::from_str(text).map_err(|e| Error::CorruptBundle(e.to_string()))?;
    if env.format_version != BUNDLE_FORMAT {
        return Err(Error::VersionMismatch {
            found: env.format_version,
            expected: BUNDLE_FORMAT.into(),
        });
    }
    if hex::encode(Sha256::digest(env.payload.get().as_bytes())) != env.sha256 {
        return Err(Error::CorruptBundle("checksum mismatch".into()));
    }
    serde_json::from_str(env.payload.get()).map_err(|e| Error::CorruptBundle(e.to_string()))
}

pub fn save_bundle(bundle: &ModelBundle, path: &Path) -> Result<()> {
    let text = bundle_to_string(bundle)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_bundle(path: &Path) -> Result<ModelBundle> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    bundle_from_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file(id: &str, text: &str) -> SourceFile {
        SourceFile {
            project: "p".into(),
            file_id: format!("p/{id}"),
            text: text.into(),
        }
    }

    #[test]
    fn three_calls_three_points() {
        let f = file("a.py", "import os\nx = os.getcwd()\ny = x.strip()\nprint(y.upper())\n");
        let pts = mine_file(&f).unwrap();
        let truths: Vec<&str> = pts.iter().map(|p| p.truth.as_str()).collect();
        assert_eq!(truths, ["getcwd", "strip", "upper"]);
        assert_eq!((pts[0].point.line, pts[0].point.column), (2, 6));
    }

    #[test]
    fn chained_calls_in_source_order() {
        let f = file("a.py", "a.b().c()\n");
        let pts = mine_file(&f).unwrap();
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[0].truth, "b");
        assert_eq!(pts[1].truth, "c");
        assert!(pts[1].point.column > pts[0].point.column);
        assert_ne!(pts[0].context_hash, pts[1].context_hash);
    }

    #[test]
    fn broken_file_is_skipped() {
        let files = vec![file("ok.py", "x.y()\n"), file("bad.py", "def f(:\n    x.y()\n")];
        let r = mine_files(&files);
        assert_eq!(r.points.len(), 1);
        assert_eq!(r.skipped_files, vec!["p/bad.py".to_string()]);
    }

    #[test]
    fn attribute_without_call_is_not_a_point() {
        let f = file("a.py", "from . import m\nx = a.b\ny = a.c[0]\nz = 1.5\n");
        assert!(mine_file(&f).unwrap().is_empty());
    }

    #[test]
    fn kfold_is_disjoint_and_covers() {
        let files: Vec<(String, String)> = (0..23)
            .map(|i| (if i < 13 { "a" } else { "b" }.to_string(), format!("f{i:02}")))
            .collect();
        let plan = SplitPlan { folds: 5, ..SplitPlan::default() };
        let folds = plan.folds(&files, &BTreeMap::new());
        for p in ["a", "b"] {
            let mut tested: Vec<String> = folds
                .iter()
                .filter(|f| f.project == p)
                .flat_map(|f| f.test.clone())
                .collect();
            tested.sort();
            let mut all: Vec<String> = files.iter().filter(|(q, _)| q == p).map(|(_, id)| id.clone()).collect();
            all.sort();
            assert_eq!(tested, all);
        }
        for f in &folds {
            assert!(f.train.iter().all(|t| !f.test.contains(t)));
            assert!(f.train.iter().all(|t| files.iter().any(|(q, id)| id == t && *q == f.project)));
        }
        assert_eq!(folds, plan.folds(&files, &BTreeMap::new()));
    }

    #[test]
    fn pinned_assignment_wins() {
        let files: Vec<(String, String)> = (0..4).map(|i| ("a".to_string(), format!("f{i}"))).collect();
        let plan = SplitPlan { folds: 2, ..SplitPlan::default() };
        let pinned = BTreeMap::from([("f0".to_string(), 1), ("f1".to_string(), 1)]);
        let folds = plan.folds(&files, &pinned);
        let f1 = folds.iter().find(|f| f.index == 1).unwrap();
        assert!(f1.test.contains(&"f0".to_string()) && f1.test.contains(&"f1".to_string()));
    }

    #[test]
    fn cross_project_holds_out_whole_projects() {
        let files = vec![
            ("a".to_string(), "a1".to_string()),
            ("b".to_string(), "b1".to_string()),
            ("b".to_string(), "b2".to_string()),
        ];
        let plan = SplitPlan {
            mode: SplitMode::CrossProject,
            ..SplitPlan::default()
        };
        let folds = plan.folds(&files, &BTreeMap::new());
        assert_eq!(folds.len(), 2);
        assert_eq!(folds[1].test, vec!["b1", "b2"]);
        assert_eq!(folds[1].train, vec!["a1"]);
    }
}
