//! Random forest of Gini CART trees over feature vectors.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureVector;

const N_FEATURES: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    /// Features considered at each split.
    pub max_features: usize,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 100,
            max_depth: 12,
            max_features: 2,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSample {
    pub vector: FeatureVector,
    pub label: bool,
    /// Groups the samples of one recommendation point.
    pub point_id: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Node {
    Split {
        feature_index: usize,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
    Leaf {
        /// Bootstrap-weighted `[negative, positive]` counts.
        leaf_counts: [u64; 2],
    },
}

impl Node {
    fn leaf_for(&self, x: &[f64; N_FEATURES]) -> [u64; 2] {
        let mut node = self;
        loop {
            match node {
                Node::Leaf { leaf_counts } => return *leaf_counts,
                Node::Split {
                    feature_index,
                    threshold,
                    left,
                    right,
                } => {
                    node = if x[*feature_index] <= *threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Node::Leaf { .. } => 0,
            Node::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub config: ForestConfig,
    pub trees: Vec<Node>,
}

impl ForestModel {
    pub fn train(samples: &[TrainingSample], config: &ForestConfig) -> Result<Self> {
        let pos = samples.iter().filter(|s| s.label).count();
        if pos == 0 || pos == samples.len() || config.n_trees == 0 {
            return Err(Error::DegenerateData);
        }
        let xs: Vec<[f64; N_FEATURES]> = samples.iter().map(|s| s.vector.to_array()).collect();
        let ys: Vec<bool> = samples.iter().map(|s| s.label).collect();
        let build = |t: usize| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(t as u64);
            let mut weights = vec![0u64; xs.len()];
            for _ in 0..xs.len() {
                weights[rng.gen_range(0..xs.len())] += 1;
            }
            let idx: Vec<usize> = (0..xs.len()).filter(|&i| weights[i] > 0).collect();
            let mut builder = TreeBuilder {
                xs: &xs,
                ys: &ys,
                weights: &weights,
                config,
                rng,
            };
            builder.grow(idx, 0)
        };
        #[cfg(feature = "parallel")]
        let trees = {
            use rayon::prelude::*;
            (0..config.n_trees).into_par_iter().map(build).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let trees = (0..config.n_trees).map(build).collect();
        Ok(ForestModel {
            config: config.clone(),
            trees,
        })
    }

    /// Mean over trees of the positive fraction in the reached leaf.
    pub fn predict_proba(&self, v: &FeatureVector) -> f64 {
        let x = v.to_array();
        let total: f64 = self
            .trees
            .iter()
            .map(|t| {
                let [n, p] = t.leaf_for(&x);
                if n + p == 0 {
                    0.0
                } else {
                    p as f64 / (n + p) as f64
                }
            })
            .sum();
        total / self.trees.len() as f64
    }
}

struct TreeBuilder<'a> {
    xs: &'a [[f64; N_FEATURES]],
    ys: &'a [bool],
    weights: &'a [u64],
    config: &'a ForestConfig,
    rng: ChaCha8Rng,
}

fn gini(neg: u64, pos: u64) -> f64 {
    let n = (neg + pos) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let p = pos as f64 / n;
    2.0 * p * (1.0 - p)
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    score: f64,
}

impl TreeBuilder<'_> {
    fn counts(&self, idx: &[usize]) -> [u64; 2] {
        let mut c = [0u64; 2];
        for &i in idx {
            c[self.ys[i] as usize] += self.weights[i];
        }
        c
    }

    fn grow(&mut self, idx: Vec<usize>, depth: usize) -> Node {
        let counts = self.counts(&idx);
        if depth >= self.config.max_depth || counts[0] == 0 || counts[1] == 0 {
            return Node::Leaf { leaf_counts: counts };
        }
        let mut features: Vec<usize> = (0..N_FEATURES).collect();
        features.shuffle(&mut self.rng);
        let want = self.config.max_features.clamp(1, N_FEATURES);
        let mut best: Option<BestSplit> = None;
        // Like the usual implementations, keep drawing features past the
        // quota while none of the drawn ones can split the node.
        for (k, &f) in features.iter().enumerate() {
            if k >= want && best.is_some() {
                break;
            }
            if let Some(s) = self.best_split(&idx, f, counts) {
                if best.as_ref().map_or(true, |b| s.score < b.score) {
                    best = Some(s);
                }
            }
        }
        let Some(best) = best else {
            return Node::Leaf { leaf_counts: counts };
        };
        let (left, right): (Vec<usize>, Vec<usize>) = idx
            .into_iter()
            .partition(|&i| self.xs[i][best.feature] <= best.threshold);
        Node::Split {
            feature_index: best.feature,
            threshold: best.threshold,
            left: Box::new(self.grow(left, depth + 1)),
            right: Box::new(self.grow(right, depth + 1)),
        }
    }

    /// Lowest weighted child impurity over thresholds of feature `f`.
    fn best_split(&self, idx: &[usize], f: usize, total: [u64; 2]) -> Option<BestSplit> {
        let mut order: Vec<(f64, usize)> = idx.iter().map(|&i| (self.xs[i][f], i)).collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0));
        let n = (total[0] + total[1]) as f64;
        let mut left = [0u64; 2];
        let mut best: Option<BestSplit> = None;
        for w in 0..order.len() - 1 {
            let (v, i) = order[w];
            left[self.ys[i] as usize] += self.weights[i];
            let next = order[w + 1].0;
            if next <= v {
                continue;
            }
            let right = [total[0] - left[0], total[1] - left[1]];
            let nl = (left[0] + left[1]) as f64;
            let nr = (right[0] + right[1]) as f64;
            let score = (nl * gini(left[0], left[1]) + nr * gini(right[0], right[1])) / n;
            if best.as_ref().map_or(true, |b| score < b.score) {
                let mut threshold = v + (next - v) / 2.0;
                if threshold >= next {
                    threshold = v;
                }
                best = Some(BestSplit {
                    feature: f,
                    threshold,
                    score,
                });
            }
        }
        best
    }
}

/// Area under the ROC curve of scores against labels, ties counted half.
pub fn auc(scores: &[f64], labels: &[bool]) -> f64 {
    let mut pairs: Vec<(f64, bool)> = scores.iter().copied().zip(labels.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n_pos = labels.iter().filter(|&&l| l).count() as f64;
    let n_neg = labels.len() as f64 - n_pos;
    if n_pos == 0.0 || n_neg == 0.0 {
        return 0.5;
    }
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < pairs.len() {
        let mut j = i;
        while j < pairs.len() && pairs[j].0 == pairs[i].0 {
            j += 1;
        }
        let avg_rank = (i + j + 1) as f64 / 2.0;
        rank_sum += avg_rank * pairs[i..j].iter().filter(|p| p.1).count() as f64;
        i = j;
    }
    (rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(a: [f64; 4], label: bool, id: u64) -> TrainingSample {
        TrainingSample {
            vector: FeatureVector::from_array(a),
            label,
            point_id: id,
        }
    }

    fn separable(n: usize, seed: u64) -> Vec<TrainingSample> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|i| {
                let label = i % 2 == 0;
                let x0 = if label { rng.gen_range(0.6..1.0) } else { rng.gen_range(0.0..0.4) };
                let x1 = rng.gen_range(0.0..1.0);
                sample([x0, x1, 0.0, 0.0], label, i as u64)
            })
            .collect()
    }

    fn small() -> ForestConfig {
        ForestConfig {
            n_trees: 15,
            ..ForestConfig::default()
        }
    }

    #[test]
    fn separable_training_accuracy() {
        let data = separable(200, 1);
        let m = ForestModel::train(&data, &small()).unwrap();
        let correct = data
            .iter()
            .filter(|s| (m.predict_proba(&s.vector) > 0.5) == s.label)
            .count();
        assert!(correct as f64 / data.len() as f64 >= 0.99);
    }

    #[test]
    fn unsplittable_node_gives_prior() {
        let data: Vec<_> = (0..40).map(|i| sample([0.3; 4], i % 4 == 0, i)).collect();
        let m = ForestModel::train(&data, &small()).unwrap();
        for t in &m.trees {
            assert!(matches!(t, Node::Leaf { .. }));
        }
        // Bootstrap priors scatter around 1/4; their mean stays close.
        let p = m.predict_proba(&data[0].vector);
        assert!((p - 0.25).abs() < 0.1, "{p}");
        // A single tree on the full data is exactly the prior.
        let one = ForestConfig { n_trees: 1, ..small() };
        let m = ForestModel::train(&data, &one).unwrap();
        let Node::Leaf { leaf_counts } = &m.trees[0] else { panic!() };
        let p = m.predict_proba(&data[0].vector);
        assert_eq!(p, leaf_counts[1] as f64 / (leaf_counts[0] + leaf_counts[1]) as f64);
    }

    #[test]
    fn single_label_is_degenerate() {
        let data: Vec<_> = (0..5).map(|i| sample([i as f64; 4], true, i)).collect();
        assert!(matches!(ForestModel::train(&data, &small()), Err(Error::DegenerateData)));
    }

    #[test]
    fn pure_single_tree_gives_hard_probabilities() {
        let data = separable(60, 2);
        let one = ForestConfig { n_trees: 1, max_depth: 30, ..small() };
        let m = ForestModel::train(&data, &one).unwrap();
        for s in &data {
            let p = m.predict_proba(&s.vector);
            assert!(p == 0.0 || p == 1.0);
        }
    }

    #[test]
    fn overfits_small_fixture() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let data: Vec<_> = (0..50)
            .map(|i| sample([rng.gen(), rng.gen(), rng.gen(), rng.gen()], rng.gen_bool(0.5), i))
            .collect();
        let m = ForestModel::train(&data, &ForestConfig { n_trees: 100, max_depth: 30, ..small() }).unwrap();
        // Random labels: in-bag trees recall the label, out-of-bag ones guess.
        let mut err = 0.0;
        for s in &data {
            let p = m.predict_proba(&s.vector);
            assert_eq!(p > 0.5, s.label, "p = {p}");
            err += (p - s.label as u8 as f64).abs();
        }
        assert!(err / data.len() as f64 <= 0.3);
    }

    #[test]
    fn tree_order_does_not_matter() {
        let data = separable(100, 4);
        let m = ForestModel::train(&data, &small()).unwrap();
        let mut r = m.clone();
        r.trees.reverse();
        for s in &data {
            assert_eq!(m.predict_proba(&s.vector), r.predict_proba(&s.vector));
        }
    }

    #[test]
    fn auc_values() {
        assert_eq!(auc(&[0.1, 0.2, 0.8, 0.9], &[false, false, true, true]), 1.0);
        assert_eq!(auc(&[0.5, 0.5], &[false, true]), 0.5);
        assert_eq!(auc(&[0.9, 0.1], &[false, true]), 0.0);
    }

    #[test]
    fn node_json_shape() {
        let n = Node::Split {
            feature_index: 1,
            threshold: 0.5,
            left: Box::new(Node::Leaf { leaf_counts: [3, 0] }),
            right: Box::new(Node::Leaf { leaf_counts: [0, 2] }),
        };
        let json = serde_json::to_value(&n).unwrap();
        assert_eq!(json["feature_index"], 1);
        assert_eq!(json["left"]["leaf_counts"][0], 3);
        let back: Node = serde_json::from_value(json).unwrap();
        assert_eq!(back, n);
    }
}
