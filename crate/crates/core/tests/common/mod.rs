//! Helpers shared by the integration test targets.
#![allow(dead_code)]

use contextrec::forest::{DecisionTree, LabeledMatrix, Node};
use num_rational::Ratio;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Q = Ratio<i128>;

fn exact_gini(counts: &[i128]) -> Q {
    let n: i128 = counts.iter().sum();
    let mut g = Q::from_integer(1);
    for &c in counts {
        g -= Q::new(c * c, n * n);
    }
    g
}

/// Exhaustive split search in exact arithmetic: every feature, every
/// midpoint between consecutive distinct values, weighted Gini compared as
/// rationals. Ties keep the earlier (feature, threshold) candidate.
pub fn brute_force_split(data: &LabeledMatrix, samples: &[usize]) -> Option<(usize, f64)> {
    let k = data.n_classes();
    let mut totals = vec![0i128; k];
    for &i in samples {
        totals[data.label(i)] += 1;
    }
    if totals.iter().filter(|&&c| c > 0).count() < 2 {
        return None;
    }
    let n = samples.len() as i128;
    let mut best: Option<(Q, usize, f64)> = None;
    for f in 0..data.width() {
        let mut values: Vec<f64> = samples.iter().map(|&i| data.value(i, f)).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for w in values.windows(2) {
            let t = (w[0] + w[1]) / 2.0;
            let mut left = vec![0i128; k];
            let mut right = vec![0i128; k];
            for &i in samples {
                if data.value(i, f) <= t {
                    left[data.label(i)] += 1;
                } else {
                    right[data.label(i)] += 1;
                }
            }
            let nl: i128 = left.iter().sum();
            let nr: i128 = right.iter().sum();
            let imp = Q::new(nl, n) * exact_gini(&left) + Q::new(nr, n) * exact_gini(&right);
            if best.as_ref().map_or(true, |(b, _, _)| imp < *b) {
                best = Some((imp, f, t));
            }
        }
    }
    best.map(|(_, f, t)| (f, t))
}

/// Walks a tree grown without bootstrap on all features and checks every
/// node against the brute-force search on the samples that reach it.
pub fn check_tree_against_oracle(tree: &DecisionTree, data: &LabeledMatrix) -> Result<usize, String> {
    let all: Vec<usize> = (0..data.len()).collect();
    let mut checked = 0;
    walk(tree, data, 0, &all, &mut checked)?;
    Ok(checked)
}

fn walk(tree: &DecisionTree, data: &LabeledMatrix, node: usize, samples: &[usize], checked: &mut usize) -> Result<(), String> {
    *checked += 1;
    let oracle = brute_force_split(data, samples);
    match &tree.nodes[node] {
        Node::Leaf { counts } => {
            let mut expect = vec![0u32; data.n_classes()];
            for &i in samples {
                expect[data.label(i)] += 1;
            }
            if *counts != expect {
                return Err(format!("node {node}: leaf counts {counts:?}, expected {expect:?}"));
            }
            if let Some(s) = oracle {
                return Err(format!("node {node}: leaf, but a split {s:?} exists"));
            }
            Ok(())
        }
        Node::Split {
            feature,
            threshold,
            left,
            right,
        } => {
            if oracle != Some((*feature, *threshold)) {
                return Err(format!(
                    "node {node}: chose ({feature}, {threshold}), oracle says {oracle:?} on {} samples",
                    samples.len()
                ));
            }
            let (l, r): (Vec<usize>, Vec<usize>) = samples.iter().partition(|&&i| data.value(i, *feature) <= *threshold);
            walk(tree, data, *left as usize, &l, checked)?;
            walk(tree, data, *right as usize, &r, checked)
        }
    }
}

/// Random small classification problem with heavily tied feature values.
pub fn random_problem(seed: u64, max_n: usize, max_d: usize) -> LabeledMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=max_n);
    let d = rng.random_range(1..=max_d);
    let k = rng.random_range(2..=4);
    let levels = rng.random_range(2..=8);
    let features: Vec<f64> = (0..n * d).map(|_| rng.random_range(0..levels) as f64 * 0.5).collect();
    let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
    LabeledMatrix::new(features, d, labels, k).expect("valid problem")
}

pub fn class_names(k: usize) -> Vec<String> {
    (0..k).map(|c| format!("c{c}")).collect()
}
