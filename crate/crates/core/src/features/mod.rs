//! The four features of a (point, candidate) pair.

pub mod cooccur;
pub mod ngram;
pub mod similarity;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataflow::HoleFlow;
pub use cooccur::{CooccurCounts, CooccurTables, FileObservations};
pub use ngram::{NGramCounts, NGramModel};
pub use similarity::{sim, tosim};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    /// Mean log-probability of the flow sequence through the candidate.
    pub t1: f64,
    /// Sub-token similarity to the tokens along the flow.
    pub t2: f64,
    /// Receiver-candidate co-occurrence confidence.
    pub t3: f64,
    /// Distance-weighted context-candidate co-occurrence confidence.
    pub t4: f64,
}

impl FeatureVector {
    pub fn to_array(self) -> [f64; 4] {
        [self.t1, self.t2, self.t3, self.t4]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        FeatureVector {
            t1: a[0],
            t2: a[1],
            t3: a[2],
            t4: a[3],
        }
    }

    /// Zeroes the dropped columns.
    pub fn masked(self, mask: FeatureMask) -> Self {
        let mut a = self.to_array();
        for f in Feature::ALL {
            if mask.is_dropped(f) {
                a[f.index()] = 0.0;
            }
        }
        Self::from_array(a)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Feature {
    T1,
    T2,
    T3,
    T4,
}

impl Feature {
    pub const ALL: [Feature; 4] = [Feature::T1, Feature::T2, Feature::T3, Feature::T4];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{}", self.index() + 1)
    }
}

impl FromStr for Feature {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "t1" => Ok(Feature::T1),
            "t2" => Ok(Feature::T2),
            "t3" => Ok(Feature::T3),
            "t4" => Ok(Feature::T4),
            other => Err(format!("unknown feature `{other}` (expected t1..t4)")),
        }
    }
}

/// Features zeroed at training and prediction time.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureMask {
    dropped: [bool; 4],
}

impl FeatureMask {
    pub fn dropping(features: impl IntoIterator<Item = Feature>) -> Self {
        let mut m = FeatureMask::default();
        for f in features {
            m.dropped[f.index()] = true;
        }
        m
    }

    pub fn is_dropped(self, f: Feature) -> bool {
        self.dropped[f.index()]
    }

    pub fn dropped(self) -> Vec<Feature> {
        Feature::ALL.into_iter().filter(|&f| self.is_dropped(f)).collect()
    }
}

/// What the encoders need to know about one recommendation point.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PointEvidence {
    /// Flow through the hole; `None` when the receiver has none.
    pub flow: Option<HoleFlow>,
    /// Receiver type if inferred, else the receiver's head identifier.
    pub object_key: Option<String>,
    /// Context tokens with their distance to the point.
    pub bag: Vec<(String, usize)>,
}

/// Upstream tokens ordered from farthest to nearest to the hole, each once.
fn upstream_order(flow: &HoleFlow) -> Vec<&str> {
    let mut best: Vec<(&str, usize, usize)> = Vec::new();
    for (x, d) in flow.upstream.iter().flat_map(|p| {
        let n = p.len();
        p.iter().enumerate().map(move |(i, x)| (x.as_str(), n - i))
    }) {
        match best.iter_mut().find(|(y, _, _)| *y == x) {
            Some(entry) => entry.1 = entry.1.min(d),
            None => {
                let seen = best.len();
                best.push((x, d, seen));
            }
        }
    }
    best.sort_by(|a, b| b.1.cmp(&a.1).then(a.2.cmp(&b.2)));
    best.into_iter().map(|(x, _, _)| x).collect()
}

/// Token sequence for the n-gram model: upstream tokens by decreasing
/// distance, the API, then the sinks in the given order.
pub fn flow_sequence<'a>(flow: &'a HoleFlow, api: &'a str, sinks: &[&'a str]) -> Vec<&'a str> {
    let mut seq = upstream_order(flow);
    seq.push(api);
    seq.extend_from_slice(sinks);
    seq
}

/// Sequence used for training: sinks in source order.
pub fn training_sequence(flow: &HoleFlow, api: &str) -> Vec<String> {
    let sinks: Vec<&str> = flow.sinks.iter().map(String::as_str).collect();
    flow_sequence(flow, api, &sinks).into_iter().map(String::from).collect()
}

fn permutations<'a>(items: &[&'a str]) -> Vec<Vec<&'a str>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let first = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, first);
            out.push(tail);
        }
    }
    out
}

/// Sink orderings tried for a multi-sink point.
const MAX_PERMUTED_SINKS: usize = 3;

pub fn encode_t1(model: &NGramModel, flow: Option<&HoleFlow>, api: &str, held_out: Option<&NGramCounts>) -> f64 {
    let Some(flow) = flow else {
        return model.floor();
    };
    let sinks: Vec<&str> = flow.sinks.iter().map(String::as_str).collect();
    let orders = if sinks.len() <= MAX_PERMUTED_SINKS {
        permutations(&sinks)
    } else {
        vec![sinks]
    };
    orders
        .iter()
        .map(|o| model.score(&flow_sequence(flow, api, o), held_out))
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn encode_t2(flow: Option<&HoleFlow>, api: &str) -> f64 {
    match flow {
        Some(flow) => tosim(flow.tokens_with_distance(), api),
        None => 0.0,
    }
}

pub fn encode_t3(tables: &CooccurTables, object: Option<&str>, api: &str, held_out: Option<&CooccurCounts>) -> f64 {
    object.map_or(0.0, |x| tables.object_confidence(x, api, held_out))
}

pub fn encode_t4(tables: &CooccurTables, bag: &[(String, usize)], api: &str, held_out: Option<&CooccurCounts>) -> f64 {
    if bag.is_empty() {
        return 0.0;
    }
    let total: f64 = bag
        .iter()
        .map(|(x, d)| tables.context_confidence(x, api, held_out) / (*d).max(1) as f64)
        .sum();
    total / bag.len() as f64
}

/// Feature encoding against fixed tables. Held-out counts, when given, are
/// subtracted so a training point is scored as if its file were unseen.
#[derive(Clone, Copy)]
pub struct Encoder<'a> {
    pub ngram: &'a NGramModel,
    pub tables: &'a CooccurTables,
    pub held_ngram: Option<&'a NGramCounts>,
    pub held_tables: Option<&'a CooccurCounts>,
    pub mask: FeatureMask,
}

impl<'a> Encoder<'a> {
    pub fn new(ngram: &'a NGramModel, tables: &'a CooccurTables, mask: FeatureMask) -> Self {
        Encoder {
            ngram,
            tables,
            held_ngram: None,
            held_tables: None,
            mask,
        }
    }

    pub fn holding_out(self, ngram: &'a NGramCounts, tables: &'a CooccurCounts) -> Self {
        Encoder {
            held_ngram: Some(ngram),
            held_tables: Some(tables),
            ..self
        }
    }

    pub fn encode(&self, ev: &PointEvidence, api: &str) -> FeatureVector {
        let skip = |f| self.mask.is_dropped(f);
        FeatureVector {
            t1: if skip(Feature::T1) {
                0.0
            } else {
                encode_t1(self.ngram, ev.flow.as_ref(), api, self.held_ngram)
            },
            t2: if skip(Feature::T2) { 0.0 } else { encode_t2(ev.flow.as_ref(), api) },
            t3: if skip(Feature::T3) {
                0.0
            } else {
                encode_t3(self.tables, ev.object_key.as_deref(), api, self.held_tables)
            },
            t4: if skip(Feature::T4) {
                0.0
            } else {
                encode_t4(self.tables, &ev.bag, api, self.held_tables)
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flow(upstream: &[&[&str]], sinks: &[&str]) -> HoleFlow {
        HoleFlow {
            receiver: upstream.first().and_then(|p| p.last()).map(|s| s.to_string()),
            upstream: upstream
                .iter()
                .map(|p| p.iter().map(|s| s.to_string()).collect())
                .collect(),
            sinks: sinks.iter().map(|s| s.to_string()).collect(),
            receiver_seen: true,
        }
    }

    #[test]
    fn sequence_orders_by_distance() {
        let f = flow(&[&["path", "load", "d"], &["q", "d"]], &["k", "v"]);
        assert_eq!(
            flow_sequence(&f, "items", &["k", "v"]),
            vec!["path", "load", "q", "d", "items", "k", "v"]
        );
    }

    #[test]
    fn dict_items_beats_keys() {
        let mut corpus = Vec::new();
        for _ in 0..5 {
            corpus.push(training_sequence(&flow(&[&["d"]], &["k", "v"]), "items"));
        }
        corpus.push(training_sequence(&flow(&[&["d"]], &["k"]), "keys"));
        corpus.push(training_sequence(&flow(&[&["s"]], &[]), "split"));
        let m = NGramModel::train(3, &corpus).unwrap();
        let f = flow(&[&["d"]], &["k", "v"]);
        let items = encode_t1(&m, Some(&f), "items", None);
        let keys = encode_t1(&m, Some(&f), "keys", None);
        assert!(items > keys, "{items} <= {keys}");
        assert!(items <= 0.0);
    }

    #[test]
    fn empty_flow_falls_back() {
        let m = NGramModel::train(3, &[vec!["a", "b"]]).unwrap();
        let t = CooccurTables::default();
        let v = Encoder::new(&m, &t, FeatureMask::default()).encode(&PointEvidence::default(), "x");
        assert_eq!(v, FeatureVector { t1: m.floor(), t2: 0.0, t3: 0.0, t4: 0.0 });
    }

    #[test]
    fn mask_zeroes_columns() {
        let v = FeatureVector { t1: -1.0, t2: 0.5, t3: 0.25, t4: 0.125 };
        let m = FeatureMask::dropping([Feature::T1, Feature::T3]);
        assert_eq!(v.masked(m).to_array(), [0.0, 0.5, 0.0, 0.125]);
        assert_eq!(m.dropped(), vec![Feature::T1, Feature::T3]);
        assert_eq!("T2".parse::<Feature>().unwrap(), Feature::T2);
        assert_eq!(Feature::T4.to_string(), "t4");
    }

    #[test]
    fn permutations_cover_all_orders() {
        assert_eq!(permutations(&["a", "b", "c"]).len(), 6);
        assert_eq!(permutations(&[]).len(), 1);
    }
}
