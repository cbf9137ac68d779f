//! Gini decision trees and bagged random forests.
//!
//! Trees split numeric features at midpoints between consecutive distinct
//! values and compare candidate splits in exact integer arithmetic, so tie
//! rules (lower feature, then lower threshold) hold bit for bit. Each tree
//! draws its bootstrap sample and per-node feature subsets from a seed
//! derived from `(master seed, tree index)`; training is parallel over trees
//! and independent of the worker count.

mod data;
mod split;
mod tree;
mod tune;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng_from};

pub use data::LabeledMatrix;
pub use split::{best_split, gini, midpoint, Split};
pub use tree::{DecisionTree, Node};
pub use tune::{default_depth_grid, holdout_split, select_depth, tune_depth, DepthScore, DepthTuning};

use tree::{argmax_first, GrowConfig};

/// Maximum tree depth in edges; `unlimited` grows until leaves are pure or
/// unsplittable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MaxDepth(Option<usize>);

impl MaxDepth {
    pub const UNLIMITED: MaxDepth = MaxDepth(None);

    pub fn limited(depth: usize) -> Self {
        MaxDepth(Some(depth))
    }

    pub fn get(self) -> Option<usize> {
        self.0
    }

    pub(crate) fn allows_split_at(self, depth: usize) -> bool {
        self.0.map_or(true, |d| depth < d)
    }
}

// `None` sorts before `Some` for Option; unlimited must be the largest depth.
impl MaxDepth {
    fn rank(self) -> (bool, usize) {
        match self.0 {
            Some(d) => (false, d),
            None => (true, 0),
        }
    }

    pub fn cmp_depth(&self, other: &Self) -> std::cmp::Ordering {
        self.rank().cmp(&other.rank())
    }
}

impl fmt::Display for MaxDepth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(d) => write!(f, "{d}"),
            None => f.write_str("unlimited"),
        }
    }
}

impl FromStr for MaxDepth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "unlimited" | "none" | "inf" => Ok(MaxDepth::UNLIMITED),
            t => match t.parse::<usize>() {
                Ok(d) if d > 0 => Ok(MaxDepth::limited(d)),
                _ => Err(Error::invalid(format!("depth `{t}` is not a positive integer or `unlimited`"))),
            },
        }
    }
}

impl Serialize for MaxDepth {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.0 {
            Some(d) => s.serialize_u64(d as u64),
            None => s.serialize_str("unlimited"),
        }
    }
}

impl<'de> Deserialize<'de> for MaxDepth {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Depth(usize),
            Word(String),
        }
        match Repr::deserialize(d)? {
            Repr::Depth(0) => Err(serde::de::Error::custom("max depth must be positive")),
            Repr::Depth(n) => Ok(MaxDepth::limited(n)),
            Repr::Word(w) => w.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// How many features each split considers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    /// `ceil(sqrt(width))`.
    Sqrt,
    All,
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(self, width: usize) -> usize {
        let k = match self {
            MaxFeatures::Sqrt => (width as f64).sqrt().ceil() as usize,
            MaxFeatures::All => width,
            MaxFeatures::Count(k) => k,
        };
        k.clamp(1, width.max(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub trees: usize,
    pub max_depth: MaxDepth,
    pub max_features: MaxFeatures,
    /// Draw each tree's training rows with replacement.
    pub bootstrap: bool,
    /// Bootstrap sample size as a fraction of the training rows.
    pub sample_fraction: f64,
    pub min_samples_split: usize,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            trees: 100,
            max_depth: MaxDepth::UNLIMITED,
            max_features: MaxFeatures::Sqrt,
            bootstrap: true,
            sample_fraction: 1.0,
            min_samples_split: 2,
            seed: 0,
        }
    }
}

impl ForestParams {
    /// A single deterministic tree on all rows and all features.
    pub fn single_tree() -> Self {
        Self {
            trees: 1,
            max_features: MaxFeatures::All,
            bootstrap: false,
            ..Self::default()
        }
    }

    pub fn with_depth(self, max_depth: MaxDepth) -> Self {
        Self { max_depth, ..self }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trees == 0 {
            return Err(Error::invalid("tree count must be at least 1"));
        }
        if !(self.sample_fraction > 0.0 && self.sample_fraction <= 1.0) {
            return Err(Error::invalid(format!(
                "sample fraction {} outside (0, 1]",
                self.sample_fraction
            )));
        }
        if let MaxFeatures::Count(0) = self.max_features {
            return Err(Error::invalid("features per split must be at least 1"));
        }
        Ok(())
    }
}

pub const MODEL_FORMAT: &str = "contextrec-forest/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub format: String,
    pub params: ForestParams,
    pub width: usize,
    pub labels: Vec<String>,
    /// Seed each tree was grown from.
    pub tree_seeds: Vec<u64>,
    pub trees: Vec<DecisionTree>,
}

/// Predicted class and per-class vote shares (summing to 1).
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub class: usize,
    pub votes: Vec<f64>,
}

/// Trains `params.trees` trees in parallel. `labels` names the classes of
/// `data` by index.
pub fn train_forest(data: &LabeledMatrix, labels: &[String], params: &ForestParams) -> Result<RandomForest> {
    params.validate()?;
    if data.is_empty() {
        return Err(Error::invalid("cannot train on an empty dataset"));
    }
    if labels.len() != data.n_classes() {
        return Err(Error::invalid(format!(
            "{} label names for {} classes",
            labels.len(),
            data.n_classes()
        )));
    }
    let config = GrowConfig::from_params(params, data.width());
    let n = data.len();
    let draw = ((params.sample_fraction * n as f64).ceil() as usize).max(1);
    let tree_seeds: Vec<u64> = (0..params.trees as u64).map(|t| derive_seed(params.seed, t)).collect();
    let trees = tree_seeds
        .par_iter()
        .map(|&seed| {
            let mut rng = rng_from(seed);
            let mut samples: Vec<usize> = if params.bootstrap {
                (0..draw).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            DecisionTree::grow(data, &mut samples, config, &mut rng)
        })
        .collect();
    Ok(RandomForest {
        format: MODEL_FORMAT.to_string(),
        params: *params,
        width: data.width(),
        labels: labels.to_vec(),
        tree_seeds,
        trees,
    })
}

impl RandomForest {
    pub fn n_classes(&self) -> usize {
        self.labels.len()
    }

    /// Averages the class shares of the leaves each tree reaches. Ties go to
    /// the lowest class index.
    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        if x.len() != self.width {
            return Err(Error::invalid(format!(
                "feature vector has width {}, model expects {}",
                x.len(),
                self.width
            )));
        }
        Ok(self.predict_unchecked(x))
    }

    fn predict_unchecked(&self, x: &[f64]) -> Prediction {
        let mut votes = vec![0.0; self.n_classes()];
        for tree in &self.trees {
            let counts = tree.leaf_for(x);
            let total: u32 = counts.iter().sum();
            for (v, &c) in votes.iter_mut().zip(counts) {
                *v += f64::from(c) / f64::from(total);
            }
        }
        let n = self.trees.len() as f64;
        for v in votes.iter_mut() {
            *v /= n;
        }
        Prediction {
            class: argmax_first(votes.iter().copied()),
            votes,
        }
    }

    pub fn predict_label(&self, x: &[f64]) -> Result<&str> {
        let p = self.predict(x)?;
        Ok(&self.labels[p.class])
    }

    /// Class indices for every row, computed in parallel.
    pub fn predict_matrix(&self, data: &LabeledMatrix) -> Result<Vec<usize>> {
        if data.width() != self.width {
            return Err(Error::invalid(format!(
                "matrix has width {}, model expects {}",
                data.width(),
                self.width
            )));
        }
        Ok((0..data.len())
            .into_par_iter()
            .map(|i| self.predict_unchecked(data.row(i)).class)
            .collect())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("forest serializes")
    }

    /// Loads a model file; the format string must match [`MODEL_FORMAT`].
    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Header {
            format: String,
        }
        let header: Header = serde_json::from_str(text).map_err(|e| Error::Model(format!("unreadable model file: {e}")))?;
        if header.format != MODEL_FORMAT {
            return Err(Error::Model(format!(
                "model format `{}` is not supported (expected `{MODEL_FORMAT}`)",
                header.format
            )));
        }
        let forest: RandomForest = serde_json::from_str(text).map_err(|e| Error::Model(format!("corrupt model file: {e}")))?;
        forest.check()?;
        Ok(forest)
    }

    fn check(&self) -> Result<()> {
        if self.trees.is_empty() || self.trees.len() != self.tree_seeds.len() {
            return Err(Error::Model("tree list and seed list disagree".into()));
        }
        for (t, tree) in self.trees.iter().enumerate() {
            for node in &tree.nodes {
                match node {
                    Node::Split {
                        feature, left, right, ..
                    } => {
                        if *feature >= self.width
                            || *left as usize >= tree.nodes.len()
                            || *right as usize >= tree.nodes.len()
                        {
                            return Err(Error::Model(format!("tree {t} has an out-of-range split")));
                        }
                    }
                    Node::Leaf { counts } => {
                        if counts.len() != self.n_classes() || counts.iter().all(|&c| c == 0) {
                            return Err(Error::Model(format!("tree {t} has a malformed leaf")));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(k: usize) -> Vec<String> {
        (0..k).map(|i| format!("c{i}")).collect()
    }

    fn xor() -> LabeledMatrix {
        LabeledMatrix::from_rows(
            &[vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]],
            vec![0, 1, 1, 0],
            2,
        )
        .unwrap()
    }

    fn accuracy(forest: &RandomForest, data: &LabeledMatrix) -> f64 {
        let pred = forest.predict_matrix(data).unwrap();
        pred.iter().zip(data.labels()).filter(|(a, b)| a == b).count() as f64 / data.len() as f64
    }

    #[test]
    fn pure_samples_make_a_single_leaf() {
        let data = LabeledMatrix::from_rows(&[vec![0.0], vec![3.0], vec![1.0]], vec![1, 1, 1], 2).unwrap();
        let f = train_forest(&data, &names(2), &ForestParams::single_tree()).unwrap();
        assert_eq!(f.trees[0].nodes.len(), 1);
        let p = f.predict(&[5.0]).unwrap();
        assert_eq!(p.class, 1);
        assert_eq!(p.votes, [0.0, 1.0]);
    }

    #[test]
    fn xor_needs_two_levels() {
        // Every depth-1 stump on XOR leaves one child with both labels.
        let unlimited = train_forest(&xor(), &names(2), &ForestParams::single_tree()).unwrap();
        assert_eq!(accuracy(&unlimited, &xor()), 1.0);
        let stump_params = ForestParams::single_tree().with_depth(MaxDepth::limited(1));
        let stump = train_forest(&xor(), &names(2), &stump_params).unwrap();
        assert!(accuracy(&stump, &xor()) <= 0.75);
        assert!(stump.trees[0].depth() <= 1);
    }

    #[test]
    fn tie_goes_to_lower_class() {
        let mut forest = train_forest(&xor(), &names(2), &ForestParams::single_tree()).unwrap();
        forest.trees = vec![
            DecisionTree {
                nodes: vec![Node::Leaf { counts: vec![0, 3] }],
            },
            DecisionTree {
                nodes: vec![Node::Leaf { counts: vec![2, 0] }],
            },
        ];
        forest.tree_seeds = vec![0, 1];
        let p = forest.predict(&[0.0, 0.0]).unwrap();
        assert_eq!(p.votes, [0.5, 0.5]);
        assert_eq!(p.class, 0);
    }

    #[test]
    fn same_seed_same_forest() {
        let data = xor();
        let params = ForestParams {
            trees: 8,
            seed: 42,
            ..ForestParams::default()
        };
        let a = train_forest(&data, &names(2), &params).unwrap();
        let b = train_forest(&data, &names(2), &params).unwrap();
        assert_eq!(a, b);
        let c = train_forest(&data, &names(2), &params.with_seed(43)).unwrap();
        assert_ne!(a.tree_seeds, c.tree_seeds);
    }

    #[test]
    fn width_mismatch_is_an_error() {
        let f = train_forest(&xor(), &names(2), &ForestParams::single_tree()).unwrap();
        assert!(f.predict(&[1.0]).is_err());
    }

    #[test]
    fn empty_or_invalid_inputs() {
        let empty = LabeledMatrix::new(vec![], 2, vec![], 2).unwrap();
        assert!(train_forest(&empty, &names(2), &ForestParams::default()).is_err());
        let zero_trees = ForestParams {
            trees: 0,
            ..ForestParams::default()
        };
        assert!(train_forest(&xor(), &names(2), &zero_trees).is_err());
        let bad_fraction = ForestParams {
            sample_fraction: 1.5,
            ..ForestParams::default()
        };
        assert!(train_forest(&xor(), &names(2), &bad_fraction).is_err());
    }

    #[test]
    fn model_file_version_is_checked() {
        let f = train_forest(&xor(), &names(2), &ForestParams::single_tree()).unwrap();
        let text = f.to_json();
        assert_eq!(RandomForest::from_json(&text).unwrap(), f);
        let bumped = text.replace(MODEL_FORMAT, "contextrec-forest/0");
        let err = RandomForest::from_json(&bumped).unwrap_err().to_string();
        assert!(err.contains("not supported"), "{err}");
    }

    #[test]
    fn depth_parsing_and_order() {
        assert_eq!("8".parse::<MaxDepth>().unwrap(), MaxDepth::limited(8));
        assert_eq!("unlimited".parse::<MaxDepth>().unwrap(), MaxDepth::UNLIMITED);
        assert!("0".parse::<MaxDepth>().is_err());
        assert_eq!(
            MaxDepth::limited(100).cmp_depth(&MaxDepth::UNLIMITED),
            std::cmp::Ordering::Less
        );
        let json = serde_json::to_string(&[MaxDepth::limited(3), MaxDepth::UNLIMITED]).unwrap();
        assert_eq!(json, "[3,\"unlimited\"]");
        let back: Vec<MaxDepth> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, [MaxDepth::limited(3), MaxDepth::UNLIMITED]);
    }

    #[test]
    fn sqrt_features() {
        assert_eq!(MaxFeatures::Sqrt.resolve(30), 6);
        assert_eq!(MaxFeatures::Sqrt.resolve(122), 12);
        assert_eq!(MaxFeatures::Sqrt.resolve(16), 4);
        assert_eq!(MaxFeatures::Count(50).resolve(10), 10);
    }
}
