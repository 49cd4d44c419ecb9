//! The end-to-end pipeline from a point in source text to ranked APIs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use web_time::Instant;

use crate::candidates::{ApiCandidate, CandidateQuery, CandidateSet, LiteralInference, ProjectIndex, StdlibIndex};
use crate::dataflow::{self, HoleFlow};
use crate::error::{Result, Stage};
use crate::features::{CooccurTables, Encoder, FeatureMask, FeatureVector, NGramModel, PointEvidence};
use crate::forest::{ForestConfig, ForestModel};
use crate::frontend::{self, RecommendationPoint, SourceContext, DEFAULT_WINDOW};

pub const DEFAULT_K: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub ngram_order: usize,
    /// Context tokens kept for the context-API feature.
    pub window: usize,
    /// Negatives sampled per training point.
    pub max_negatives: usize,
    pub mask: FeatureMask,
    pub forest: ForestConfig,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            ngram_order: 3,
            window: DEFAULT_WINDOW,
            max_negatives: 20,
            mask: FeatureMask::default(),
            forest: ForestConfig::default(),
        }
    }
}

/// Training files and their SHA-256, the only sources of every count.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub files: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    pub config: ModelConfig,
    pub ngram: NGramModel,
    pub tables: CooccurTables,
    pub stdlib: StdlibIndex,
    pub project: ProjectIndex,
    pub forest: ForestModel,
    pub provenance: Provenance,
}

impl ModelBundle {
    pub fn encoder(&self) -> Encoder<'_> {
        Encoder::new(&self.ngram, &self.tables, self.config.mask)
    }
}

/// What the model needs from one point, independent of any trained tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointAnalysis {
    pub evidence: PointEvidence,
    pub query: CandidateQuery,
}

/// Flow through the hole, `None` when there is none to speak of.
pub fn hole_flow(ctx: &SourceContext) -> Option<HoleFlow> {
    dataflow::analyze(ctx).hole.filter(|h| !h.is_empty())
}

pub fn evidence(ctx: &SourceContext, flow: Option<HoleFlow>, inferred: Option<&str>, window: usize) -> PointEvidence {
    PointEvidence {
        flow,
        object_key: inferred.or_else(|| ctx.receiver.head()).map(String::from),
        bag: frontend::collect_token_bag(ctx, &ctx.point, window)
            .into_iter()
            .map(|(t, d)| (t.text, d))
            .collect(),
    }
}

/// Runs the front end, data flow and candidate query for one point.
pub fn analyze_point(text: &str, point: &RecommendationPoint, window: usize) -> Result<PointAnalysis> {
    let ctx = frontend::parse_context(text, point).map_err(|e| e.at(Stage::Frontend))?;
    let flow = hole_flow(&ctx);
    let query = CandidateQuery::from_context(&ctx, &LiteralInference);
    let evidence = evidence(&ctx, flow, query.inferred_type.as_deref(), window);
    Ok(PointAnalysis { evidence, query })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranked {
    pub candidate: ApiCandidate,
    pub probability: f64,
}

/// Milliseconds spent per stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub frontend_ms: f64,
    pub dataflow_ms: f64,
    pub candidates_ms: f64,
    pub features_ms: f64,
    pub forest_ms: f64,
    pub total_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub point: RecommendationPoint,
    pub ranked: Vec<Ranked>,
    /// Candidates considered before the cutoff.
    pub candidate_count: usize,
    pub timings: StageTimings,
}

#[derive(Serialize)]
struct JsonCandidate<'a> {
    name: &'a str,
    source: crate::candidates::CandidateSource,
    score: f64,
}

#[derive(Serialize)]
struct JsonRecommendation<'a> {
    point: &'a RecommendationPoint,
    candidates: Vec<JsonCandidate<'a>>,
    timings: &'a StageTimings,
}

impl Recommendation {
    /// 1-based rank of `name`, if it was returned.
    pub fn rank_of(&self, name: &str) -> Option<usize> {
        self.ranked.iter().position(|r| r.candidate.name == name).map(|i| i + 1)
    }

    /// `{point, candidates: [{name, source, score}], timings}`.
    pub fn to_json(&self) -> serde_json::Value {
        let view = JsonRecommendation {
            point: &self.point,
            candidates: self
                .ranked
                .iter()
                .map(|r| JsonCandidate {
                    name: &r.candidate.name,
                    source: r.candidate.source,
                    score: r.probability,
                })
                .collect(),
            timings: &self.timings,
        };
        serde_json::to_value(view).expect("recommendation serializes")
    }
}

/// Orders by descending probability, then by name.
pub fn rank(mut scored: Vec<Ranked>) -> Vec<Ranked> {
    scored.sort_by(|a, b| {
        b.probability
            .total_cmp(&a.probability)
            .then_with(|| a.candidate.name.cmp(&b.candidate.name))
    });
    scored
}

pub fn build_vector(bundle: &ModelBundle, evidence: &PointEvidence, candidate: &ApiCandidate) -> FeatureVector {
    bundle.encoder().encode(evidence, &candidate.name)
}

/// Scores every candidate of a set with the bundle's forest.
pub fn score_candidates(bundle: &ModelBundle, evidence: &PointEvidence, set: CandidateSet) -> Vec<Ranked> {
    let encoder = bundle.encoder();
    set.candidates
        .into_iter()
        .map(|c| {
            let v = encoder.encode(evidence, &c.name);
            Ranked {
                probability: bundle.forest.predict_proba(&v),
                candidate: c,
            }
        })
        .collect()
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

/// Ranked API recommendations for the `.` at `point`; the top `k` when given.
pub fn recommend(
    text: &str,
    point: &RecommendationPoint,
    bundle: &ModelBundle,
    k: Option<usize>,
) -> Result<Recommendation> {
    let start = Instant::now();
    let mut timings = StageTimings::default();

    let t = Instant::now();
    let ctx = frontend::parse_context(text, point).map_err(|e| e.at(Stage::Frontend))?;
    timings.frontend_ms = ms(t);

    let t = Instant::now();
    let flow = hole_flow(&ctx);
    timings.dataflow_ms = ms(t);

    let t = Instant::now();
    let query = CandidateQuery::from_context(&ctx, &LiteralInference);
    let set = query
        .generate(&ctx.point, &bundle.stdlib, &bundle.project)
        .map_err(|e| e.at(Stage::Candidates))?;
    timings.candidates_ms = ms(t);

    let t = Instant::now();
    let ev = evidence(&ctx, flow, query.inferred_type.as_deref(), bundle.config.window);
    let encoder = bundle.encoder();
    let vectors: Vec<(ApiCandidate, FeatureVector)> = set
        .candidates
        .into_iter()
        .map(|c| {
            let v = encoder.encode(&ev, &c.name);
            (c, v)
        })
        .collect();
    timings.features_ms = ms(t);

    let t = Instant::now();
    let candidate_count = vectors.len();
    let scored = vectors
        .into_iter()
        .map(|(candidate, v)| Ranked {
            probability: bundle.forest.predict_proba(&v),
            candidate,
        })
        .collect();
    let mut ranked = rank(scored);
    ranked.truncate(k.unwrap_or(usize::MAX));
    timings.forest_ms = ms(t);

    timings.total_ms = ms(start);
    log::debug!(
        "recommend {}:{}:{} {:.1} ms",
        point.file_id,
        point.line,
        point.column,
        timings.total_ms
    );
    Ok(Recommendation {
        point: ctx.point,
        ranked,
        candidate_count,
        timings,
    })
}

