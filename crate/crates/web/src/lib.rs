//! Browser bindings. The page loads a bundle trained offline and keeps it in memory.

use std::cell::RefCell;

use dotrank::corpus::bundle_from_str;
use dotrank::features::similarity::sim;
use dotrank::frontend::RecommendationPoint;
use dotrank::recommender::{self, ModelBundle};
use dotrank::dataflow;
use wasm_bindgen::prelude::*;

static DEFAULT_BUNDLE: &str = include_str!("../assets/bundle.json");

thread_local! {
    static BUNDLE: RefCell<Option<ModelBundle>> = const { RefCell::new(None) };
}

fn err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

/// Replaces the model; an empty string restores the built-in one.
#[wasm_bindgen(js_name = loadBundle)]
pub fn load_bundle(text: &str) -> Result<(), JsError> {
    let text = if text.trim().is_empty() { DEFAULT_BUNDLE } else { text };
    let bundle = bundle_from_str(text).map_err(err)?;
    BUNDLE.with(|b| *b.borrow_mut() = Some(bundle));
    Ok(())
}

/// Ranked candidates for the dot at `line` (1-based) and `col` (0-based), as JSON.
pub fn recommend_json(source: &str, line: usize, col: usize, k: usize) -> Result<String, String> {
    BUNDLE.with(|b| {
        let mut slot = b.borrow_mut();
        if slot.is_none() {
            *slot = Some(bundle_from_str(DEFAULT_BUNDLE).map_err(|e| e.to_string())?);
        }
        let bundle = slot.as_ref().expect("bundle loaded");
        let point = RecommendationPoint::new("<editor>".to_string(), line, col);
        let rec = recommender::recommend(source, &point, bundle, Some(k)).map_err(|e| e.to_string())?;
        Ok(rec.to_json().to_string())
    })
}

#[wasm_bindgen]
pub fn recommend(source: &str, line: usize, col: usize, k: usize) -> Result<String, JsError> {
    recommend_json(source, line, col, k).map_err(|e| JsError::new(&e))
}

/// Data-flow edges of a whole file, as JSON.
pub fn dataflow_json(source: &str) -> Result<String, String> {
    let edges = dataflow::file_edges(source, "<editor>").map_err(|e| e.to_string())?;
    serde_json::to_string(&edges).map_err(|e| e.to_string())
}

#[wasm_bindgen(js_name = dataflowEdges)]
pub fn dataflow_edges(source: &str) -> Result<String, JsError> {
    dataflow_json(source).map_err(|e| JsError::new(&e))
}

/// Name similarity between a receiver and an API at token distance `d`.
#[wasm_bindgen]
pub fn similarity(receiver: &str, api: &str, d: usize) -> f64 {
    sim(receiver, api, d.max(1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_model_recommends() {
        let src = "def f(conf):\n    d = dict(conf)\n    for k in d.items():\n        pass\n";
        let col = "    for k in d.items():".find('.').unwrap();
        let out = recommend_json(src, 3, col, 5).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert!(!v["candidates"].as_array().unwrap().is_empty());
    }

    #[test]
    fn dataflow_lists_edges() {
        let v: serde_json::Value = serde_json::from_str(&dataflow_json("a = b\nc = a.x()\n").unwrap()).unwrap();
        assert!(v.as_array().unwrap().iter().any(|e| e["src"] == "b" && e["dst"] == "a"));
        assert!(dataflow_json("def (:").is_err());
    }

    #[test]
    fn similarity_matches_core() {
        assert_eq!(similarity("items", "items", 1), 1.0);
    }
}
