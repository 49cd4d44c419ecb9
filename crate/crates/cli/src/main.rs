use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use dotrank::corpus::{self, CorpusManifest, SourceFile, SplitMode, SplitPlan};
use dotrank::eval;
use dotrank::features::{Feature, FeatureMask};
use dotrank::frontend::RecommendationPoint;
use dotrank::recommender::{self, ModelConfig, DEFAULT_K};

#[derive(Parser)]
#[command(name = "dotrank", version, about = "Rank the API a Python programmer is about to call")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model bundle from a corpus.
    Train {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Recommend APIs for the `.` at LINE:COL of a file.
    Recommend {
        file: PathBuf,
        #[arg(long)]
        line: usize,
        /// 0-based column of the dot.
        #[arg(long)]
        col: usize,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = DEFAULT_K)]
        k: usize,
        #[arg(long)]
        json: bool,
    },
    /// Cross-validate on a corpus against the alphabetical and frequency baselines.
    Evaluate {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        split: SplitArgs,
        /// Also run with these features zeroed and report the deltas.
        #[arg(long = "drop-feature", value_delimiter = ',')]
        drop_feature: Vec<Feature>,
        /// Write the JSON report here.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Per-feature accuracy deltas over several seeds.
    Ablate {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        split: SplitArgs,
        #[arg(long, value_delimiter = ',', default_value = "t1,t2,t3,t4")]
        features: Vec<Feature>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Mine recommendation points as JSON lines.
    Mine {
        roots: Vec<PathBuf>,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    #[command(subcommand)]
    Dataflow(DataflowCommand),
}

#[derive(Subcommand)]
enum DataflowCommand {
    /// Print the data-flow edges of a file.
    Dump {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Score edges against hand-labelled files.
    Score {
        /// Directory of label files, or a corpus manifest naming one.
        path: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct CorpusArgs {
    /// Corpus manifest.
    #[arg(long, conflicts_with = "project")]
    manifest: Option<PathBuf>,
    /// Project root; repeatable.
    #[arg(long)]
    project: Vec<PathBuf>,
}

#[derive(Args)]
struct ModelArgs {
    /// ModelConfig as JSON; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    trees: Option<usize>,
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_negatives: Option<usize>,
    /// Zero these features at training and prediction time.
    #[arg(long, value_delimiter = ',')]
    mask: Vec<Feature>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Intra,
    Cross,
}

#[derive(Args)]
struct SplitArgs {
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    #[arg(long)]
    folds: Option<usize>,
    /// Split and forest seeds; repeated runs report mean and range.
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<u64>,
}

struct Corpus {
    files: Vec<SourceFile>,
    manifest: Option<CorpusManifest>,
}

impl CorpusArgs {
    fn load(&self) -> Result<Corpus> {
        if let Some(path) = &self.manifest {
            let (m, base) = CorpusManifest::load(path)?;
            let files = m.load_files(&base)?;
            return Ok(Corpus { files, manifest: Some(m) });
        }
        if self.project.is_empty() {
            bail!("give --manifest or at least one --project");
        }
        let mut files = Vec::new();
        for root in &self.project {
            files.extend(corpus::load_project(&project_name(root), root)?);
        }
        Ok(Corpus { files, manifest: None })
    }
}

fn project_name(root: &Path) -> String {
    root.canonicalize()
        .ok()
        .and_then(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .unwrap_or_else(|| root.display().to_string())
}

impl ModelArgs {
    fn config(&self) -> Result<ModelConfig> {
        let mut c = match &self.config {
            Some(p) => serde_json::from_str(&fs::read_to_string(p).with_context(|| p.display().to_string())?)
                .with_context(|| format!("bad config {}", p.display()))?,
            None => ModelConfig::default(),
        };
        if let Some(t) = self.trees {
            c.forest.n_trees = t;
        }
        if let Some(d) = self.max_depth {
            c.forest.max_depth = d;
        }
        if let Some(s) = self.seed {
            c.forest.seed = s;
        }
        if let Some(n) = self.max_negatives {
            c.max_negatives = n;
        }
        if !self.mask.is_empty() {
            c.mask = FeatureMask::dropping(self.mask.iter().copied());
        }
        Ok(c)
    }
}

impl SplitArgs {
    fn plan(&self, manifest: Option<&CorpusManifest>) -> SplitPlan {
        let mut plan = manifest.and_then(|m| m.split.clone()).unwrap_or_default();
        match self.mode {
            Some(Mode::Intra) => plan.mode = SplitMode::IntraProjectKfold,
            Some(Mode::Cross) => plan.mode = SplitMode::CrossProject,
            None => {}
        }
        if let Some(f) = self.folds {
            plan.folds = f;
        }
        plan
    }

    fn seeds(&self, plan: &SplitPlan, default: &[u64]) -> Vec<u64> {
        if !self.seeds.is_empty() {
            self.seeds.clone()
        } else if default.is_empty() {
            vec![plan.seed]
        } else {
            default.to_vec()
        }
    }
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)?).with_context(|| path.display().to_string())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Train { corpus, model, out } => {
            let config = model.config()?;
            let c = corpus.load()?;
            let analysis = corpus::analyze_files(&c.files, config.window);
            let records: Vec<_> = analysis.files.iter().collect();
            let (bundle, stats) = corpus::train(&records, &config)?;
            corpus::save_bundle(&bundle, &out)?;
            eprintln!(
                "trained on {} files, {} points ({} skipped), {} samples; {} files unparsable",
                stats.files,
                stats.points,
                stats.skipped_points,
                stats.samples,
                analysis.skipped_files.len()
            );
        }
        Command::Recommend {
            file,
            line,
            col,
            model,
            k,
            json,
        } => {
            let bundle = corpus::load_bundle(&model)?;
            let text = fs::read_to_string(&file).with_context(|| file.display().to_string())?;
            let point = RecommendationPoint::new(file.display().to_string(), line, col);
            let rec = recommender::recommend(&text, &point, &bundle, Some(k))?;
            if json {
                println!("{}", serde_json::to_string_pretty(&rec.to_json())?);
            } else {
                for (i, r) in rec.ranked.iter().enumerate() {
                    println!("{:>3}. {:<32} {:.4}", i + 1, r.candidate.name, r.probability);
                }
                eprintln!("{} candidates, {:.1} ms", rec.candidate_count, rec.timings.total_ms);
            }
        }
        Command::Evaluate {
            corpus,
            model,
            split,
            drop_feature,
            json,
        } => {
            let config = model.config()?;
            let c = corpus.load()?;
            let plan = split.plan(c.manifest.as_ref());
            let assigned = c.manifest.as_ref().map(|m| m.assignments()).unwrap_or_default();
            let analysis = corpus::analyze_files(&c.files, config.window);
            let seeds = split.seeds(&plan, &[]);
            if drop_feature.is_empty() && seeds.len() == 1 {
                let mut plan = plan;
                plan.seed = seeds[0];
                let report = eval::evaluate_with(&analysis, &plan, &config, &assigned)?;
                print!("{}", report.table());
                if let Some(p) = json {
                    write_json(&p, &report)?;
                }
            } else if drop_feature.is_empty() {
                let (reports, summary) = eval::evaluate_seeds(&analysis, &plan, &config, &seeds)?;
                for r in &reports {
                    print!("{}", r.table());
                }
                for (k, s) in &summary.topk {
                    println!("top-{k}: {:.3} [{:.3}, {:.3}]", s.mean, s.min, s.max);
                }
                if let Some(p) = json {
                    write_json(&p, &serde_json::json!({ "runs": reports, "summary": summary }))?;
                }
            } else {
                let report = eval::ablate(&analysis, &plan, &config, &seeds, &drop_feature)?;
                print!("{}", report.table());
                if let Some(p) = json {
                    write_json(&p, &report)?;
                }
            }
        }
        Command::Ablate {
            corpus,
            model,
            split,
            features,
            json,
        } => {
            let config = model.config()?;
            let c = corpus.load()?;
            let plan = split.plan(c.manifest.as_ref());
            let analysis = corpus::analyze_files(&c.files, config.window);
            let seeds = split.seeds(&plan, &[0, 1, 2]);
            let report = eval::ablate(&analysis, &plan, &config, &seeds, &features)?;
            print!("{}", report.table());
            if let Some(p) = json {
                write_json(&p, &report)?;
            }
        }
        Command::Mine { roots, out } => {
            let mut sink: Box<dyn Write> = match &out {
                Some(p) => Box::new(io::BufWriter::new(
                    fs::File::create(p).with_context(|| p.display().to_string())?,
                )),
                None => Box::new(io::stdout().lock()),
            };
            for root in &roots {
                let files = corpus::load_project(&project_name(root), root)?;
                let mined = corpus::mine_files(&files);
                corpus::write_points_jsonl(&mined.points, &mut sink)?;
                eprintln!(
                    "{}: {} points, {} files skipped",
                    root.display(),
                    mined.points.len(),
                    mined.skipped_files.len()
                );
            }
            sink.flush()?;
        }
        Command::Dataflow(DataflowCommand::Dump { file, json }) => {
            let text = fs::read_to_string(&file).with_context(|| file.display().to_string())?;
            let edges = dotrank::dataflow::file_edges(&text, &file.display().to_string())?;
            if json {
                println!("{}", serde_json::to_string_pretty(&edges)?);
            } else {
                for e in edges {
                    println!("{:>5}  {} -> {}  ({:?})", e.line, e.src, e.dst, e.rule);
                }
            }
        }
        Command::Dataflow(DataflowCommand::Score { path, json }) => {
            let dir = if path.is_dir() {
                path
            } else {
                let (m, base) = CorpusManifest::load(&path)?;
                match m.golden {
                    Some(g) => base.join(g),
                    None => bail!("manifest {} names no golden directory", path.display()),
                }
            };
            let report = eval::score_golden(&dir)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                for f in &report.files {
                    println!(
                        "{:<36} {:>5} loc  P {:.3}  R {:.3}  F1 {:.3}",
                        f.file, f.lines, f.score.precision, f.score.recall, f.score.f1
                    );
                }
                println!(
                    "total  P {:.4}  R {:.4}  F1 {:.4}  ({:.0} ms)",
                    report.total.precision, report.total.recall, report.total.f1, report.elapsed_ms
                );
            }
        }
    }
    Ok(())
}
