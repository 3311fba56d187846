//! CART decision trees with Gini splits and a bagged random forest.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::EncodedRecord;
use crate::error::{Error, Result};
use crate::util::{derive_seed, map_indexed};

/// Gini impurity `1 - Σ p_c²` of a class histogram.
pub fn gini(counts: &[f64]) -> Result<f64> {
    if counts.iter().any(|&c| c < 0.0 || !c.is_finite()) {
        return Err(Error::Contract("class counts must be finite and non-negative".into()));
    }
    let total: f64 = counts.iter().sum();
    if total == 0.0 {
        return Err(Error::Contract("gini of an empty node".into()));
    }
    Ok(1.0 - counts.iter().map(|c| (c / total) * (c / total)).sum::<f64>())
}

#[inline]
fn gini2(c0: f64, c1: f64) -> f64 {
    let n = c0 + c1;
    if n == 0.0 {
        return 0.0;
    }
    let (p0, p1) = (c0 / n, c1 / n);
    1.0 - p0 * p0 - p1 * p1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        class: u8,
        counts: [f64; 2],
    },
}

/// A binary tree stored as a flat node list; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<TreeNode>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TreeParams {
    /// Candidate features examined per node; `None` means all.
    pub max_features: Option<usize>,
    pub min_samples_split: usize,
    pub max_depth: Option<usize>,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_features: None,
            min_samples_split: 2,
            max_depth: None,
        }
    }
}

struct Sample {
    index: usize,
    weight: f64,
}

fn leaf(counts: [f64; 2]) -> TreeNode {
    TreeNode::Leaf {
        class: if counts[1] > counts[0] { 1 } else { 0 },
        counts,
    }
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    impurity: f64,
}

fn best_split_on_feature(
    data: &[EncodedRecord],
    samples: &[Sample],
    feature: usize,
    totals: [f64; 2],
    scratch: &mut Vec<(f64, u8, f64)>,
) -> Option<(f64, f64)> {
    scratch.clear();
    scratch.extend(
        samples
            .iter()
            .map(|s| (data[s.index].x[feature], data[s.index].y, s.weight)),
    );
    scratch.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
    if scratch[0].0 == scratch[scratch.len() - 1].0 {
        return None;
    }
    let total = totals[0] + totals[1];
    let mut left = [0.0; 2];
    let mut best: Option<(f64, f64)> = None;
    for k in 0..scratch.len() - 1 {
        let (value, y, w) = scratch[k];
        left[usize::from(y)] += w;
        let next = scratch[k + 1].0;
        if value == next {
            continue;
        }
        let right = [totals[0] - left[0], totals[1] - left[1]];
        let n_left = left[0] + left[1];
        let n_right = total - n_left;
        let impurity = (n_left * gini2(left[0], left[1]) + n_right * gini2(right[0], right[1])) / total;
        if best.is_none_or(|(b, _)| impurity < b) {
            let mut threshold = 0.5 * (value + next);
            if threshold >= next {
                threshold = value;
            }
            best = Some((impurity, threshold));
        }
    }
    best
}

impl DecisionTree {
    /// Grow a tree on weighted samples `(record index, weight)`.
    pub fn fit_weighted<R: Rng>(
        data: &[EncodedRecord],
        weighted: &[(usize, f64)],
        params: &TreeParams,
        rng: &mut R,
    ) -> Result<Self> {
        if weighted.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let width = data[weighted[0].0].x.len();
        let max_features = params.max_features.unwrap_or(width).clamp(1, width);
        let mut features: Vec<usize> = (0..width).collect();
        let mut scratch = Vec::new();
        let mut nodes: Vec<TreeNode> = Vec::new();

        let root: Vec<Sample> = weighted
            .iter()
            .map(|&(index, weight)| Sample { index, weight })
            .collect();
        // (node slot, samples, depth)
        let mut stack = vec![(0usize, root, 0usize)];
        nodes.push(leaf([0.0, 0.0]));
        while let Some((slot, samples, depth)) = stack.pop() {
            let mut counts = [0.0; 2];
            for s in &samples {
                counts[usize::from(data[s.index].y)] += s.weight;
            }
            let pure = counts[0] == 0.0 || counts[1] == 0.0;
            let too_small = counts[0] + counts[1] < params.min_samples_split as f64;
            let too_deep = params.max_depth.is_some_and(|d| depth >= d);
            if pure || too_small || too_deep {
                nodes[slot] = leaf(counts);
                continue;
            }

            features.shuffle(rng);
            let mut best: Option<BestSplit> = None;
            let mut examined = 0;
            for &f in &features {
                if examined >= max_features {
                    break;
                }
                if let Some((impurity, threshold)) = best_split_on_feature(data, &samples, f, counts, &mut scratch) {
                    examined += 1;
                    if best.as_ref().is_none_or(|b| impurity < b.impurity) {
                        best = Some(BestSplit {
                            feature: f,
                            threshold,
                            impurity,
                        });
                    }
                }
            }
            let Some(split) = best else {
                nodes[slot] = leaf(counts);
                continue;
            };
            let (left, right): (Vec<Sample>, Vec<Sample>) = samples
                .into_iter()
                .partition(|s| data[s.index].x[split.feature] <= split.threshold);
            let left_slot = nodes.len();
            nodes.push(leaf([0.0, 0.0]));
            let right_slot = nodes.len();
            nodes.push(leaf([0.0, 0.0]));
            nodes[slot] = TreeNode::Split {
                feature: split.feature,
                threshold: split.threshold,
                left: left_slot,
                right: right_slot,
            };
            stack.push((right_slot, right, depth + 1));
            stack.push((left_slot, left, depth + 1));
        }
        Ok(DecisionTree { nodes })
    }

    pub fn fit<R: Rng>(data: &[EncodedRecord], params: &TreeParams, rng: &mut R) -> Result<Self> {
        let all: Vec<(usize, f64)> = (0..data.len()).map(|i| (i, 1.0)).collect();
        Self::fit_weighted(data, &all, params, rng)
    }

    pub fn predict(&self, x: &[f64]) -> u8 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                TreeNode::Leaf { class, .. } => return *class,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], at: usize) -> usize {
            match &nodes[at] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestConfig {
    pub trees: usize,
    /// Features per split; `None` means `ceil(sqrt(width))`.
    pub max_features: Option<usize>,
    pub min_samples_split: usize,
    pub max_depth: Option<usize>,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            trees: 100,
            max_features: None,
            min_samples_split: 2,
            max_depth: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForestModel {
    pub trees: Vec<DecisionTree>,
    pub tree_seeds: Vec<u64>,
    pub max_features: usize,
    pub input_width: usize,
}

pub fn train_forest(data: &[EncodedRecord], tree_count: usize, seed: u64) -> Result<RandomForestModel> {
    train_forest_with(
        data,
        &ForestConfig {
            trees: tree_count,
            ..ForestConfig::default()
        },
        seed,
    )
}

/// Bagged Gini trees. Tree `t` draws its bootstrap and feature subsets from
/// `derive_seed(seed, t)`, so the forest is identical however the trees are
/// scheduled.
pub fn train_forest_with(data: &[EncodedRecord], config: &ForestConfig, seed: u64) -> Result<RandomForestModel> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if config.trees == 0 {
        return Err(Error::Config("a forest needs at least one tree".into()));
    }
    let width = data[0].x.len();
    if let Some(bad) = data.iter().find(|r| r.x.len() != width) {
        return Err(Error::shape("forest training width", width, bad.x.len()));
    }
    let max_features = config
        .max_features
        .unwrap_or_else(|| (width as f64).sqrt().ceil() as usize)
        .clamp(1, width);
    let params = TreeParams {
        max_features: Some(max_features),
        min_samples_split: config.min_samples_split,
        max_depth: config.max_depth,
    };
    let tree_seeds: Vec<u64> = (0..config.trees as u64).map(|t| derive_seed(seed, t)).collect();
    let n = data.len();
    let trees = map_indexed(config.trees, |t| {
        let mut rng = ChaCha8Rng::seed_from_u64(tree_seeds[t]);
        let mut multiplicity = vec![0u32; n];
        for _ in 0..n {
            multiplicity[rng.gen_range(0..n)] += 1;
        }
        let bag: Vec<(usize, f64)> = multiplicity
            .iter()
            .enumerate()
            .filter(|(_, &m)| m > 0)
            .map(|(i, &m)| (i, f64::from(m)))
            .collect();
        DecisionTree::fit_weighted(data, &bag, &params, &mut rng)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(RandomForestModel {
        trees,
        tree_seeds,
        max_features,
        input_width: width,
    })
}

impl RandomForestModel {
    /// Votes for class 1.
    pub fn attack_votes(&self, x: &[f64]) -> usize {
        self.trees.iter().filter(|t| t.predict(x) == 1).count()
    }

    /// Majority class and the fraction of trees that voted for it; ties go
    /// to class 0.
    pub fn predict(&self, x: &[f64]) -> Result<(u8, f64)> {
        let width = self.width();
        if x.len() != width {
            return Err(Error::shape("forest input", width, x.len()));
        }
        Ok(majority(self.attack_votes(x), self.trees.len()))
    }

    pub fn width(&self) -> usize {
        self.input_width
    }
}

/// `(class, fraction of votes for that class)` from the attack vote count.
pub fn majority(attack_votes: usize, total: usize) -> (u8, f64) {
    let attack = attack_votes as f64 / total as f64;
    if 2 * attack_votes > total {
        (1, attack)
    } else {
        (0, 1.0 - attack)
    }
}

pub fn predict_forest(model: &RandomForestModel, x: &[f64]) -> Result<(u8, f64)> {
    model.predict(x)
}
