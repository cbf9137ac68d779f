use rand::seq::index::sample as sample_indices;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::data::LabeledMatrix;
use super::split::Splitter;
use super::{ForestParams, MaxDepth};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: u32,
        right: u32,
    },
    Leaf {
        counts: Vec<u32>,
    },
}

/// Nodes in depth-first preorder; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
}

/// What growth needs from [`ForestParams`].
#[derive(Debug, Clone, Copy)]
pub(crate) struct GrowConfig {
    pub max_depth: MaxDepth,
    pub features_per_split: usize,
    pub min_samples_split: usize,
}

impl GrowConfig {
    pub(crate) fn from_params(params: &ForestParams, width: usize) -> Self {
        Self {
            max_depth: params.max_depth,
            features_per_split: params.max_features.resolve(width),
            min_samples_split: params.min_samples_split.max(2),
        }
    }
}

impl DecisionTree {
    /// Grows a tree on `samples` (row indices, repeats allowed). Candidate
    /// features are resampled at every node from `rng`.
    pub(crate) fn grow<R: Rng>(data: &LabeledMatrix, samples: &mut [usize], config: GrowConfig, rng: &mut R) -> Self {
        assert!(!samples.is_empty(), "cannot grow a tree on zero samples");
        let mut builder = Builder {
            data,
            config,
            splitter: Splitter::default(),
            nodes: Vec::new(),
            all_features: (0..data.width()).collect(),
        };
        builder.grow(samples, 0, rng);
        DecisionTree { nodes: builder.nodes }
    }

    pub fn leaf_for(&self, x: &[f64]) -> &[u32] {
        let mut i = 0usize;
        loop {
            match &self.nodes[i] {
                Node::Leaf { counts } => return counts,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if x[*feature] <= *threshold { *left } else { *right } as usize;
                }
            }
        }
    }

    /// Class index with the most training samples in the reached leaf;
    /// lowest index on ties.
    pub fn predict(&self, x: &[f64]) -> usize {
        argmax_first(self.leaf_for(x).iter().map(|&c| c as f64))
    }

    /// Edges on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        fn walk(tree: &DecisionTree, i: usize) -> usize {
            match &tree.nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(tree, *left as usize).max(walk(tree, *right as usize)),
            }
        }
        walk(self, 0)
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    /// Internal nodes as `(feature, threshold)`, in preorder.
    pub fn splits(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.nodes.iter().filter_map(|n| match n {
            Node::Split { feature, threshold, .. } => Some((*feature, *threshold)),
            Node::Leaf { .. } => None,
        })
    }
}

pub(crate) fn argmax_first(values: impl Iterator<Item = f64>) -> usize {
    let mut best = 0usize;
    let mut best_value = f64::NEG_INFINITY;
    for (i, v) in values.enumerate() {
        if v > best_value {
            best = i;
            best_value = v;
        }
    }
    best
}

struct Builder<'a> {
    data: &'a LabeledMatrix,
    config: GrowConfig,
    splitter: Splitter,
    nodes: Vec<Node>,
    all_features: Vec<usize>,
}

impl Builder<'_> {
    fn grow<R: Rng>(&mut self, samples: &mut [usize], depth: usize, rng: &mut R) -> u32 {
        let id = self.nodes.len() as u32;
        let mut counts = vec![0u32; self.data.n_classes()];
        for &i in samples.iter() {
            counts[self.data.label(i)] += 1;
        }
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let depth_left = self.config.max_depth.allows_split_at(depth);
        if pure || !depth_left || samples.len() < self.config.min_samples_split {
            self.nodes.push(Node::Leaf { counts });
            return id;
        }
        let width = self.data.width();
        let split = if self.config.features_per_split >= width {
            self.splitter.best_split(self.data, samples, &self.all_features)
        } else {
            let mut candidates = sample_indices(rng, width, self.config.features_per_split).into_vec();
            candidates.sort_unstable();
            self.splitter.best_split(self.data, samples, &candidates)
        };
        let Some(split) = split else {
            self.nodes.push(Node::Leaf { counts });
            return id;
        };
        let mut boundary = 0;
        for k in 0..samples.len() {
            if self.data.value(samples[k], split.feature) <= split.threshold {
                samples.swap(k, boundary);
                boundary += 1;
            }
        }
        // Placeholder, patched once both children exist.
        self.nodes.push(Node::Leaf { counts: Vec::new() });
        let (left_samples, right_samples) = samples.split_at_mut(boundary);
        let left = self.grow(left_samples, depth + 1, rng);
        let right = self.grow(right_samples, depth + 1, rng);
        self.nodes[id as usize] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        id
    }
}
