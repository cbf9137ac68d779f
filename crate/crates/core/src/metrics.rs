//! Classification scores.

use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_lengths<T>(truth: &[T], predicted: &[T]) -> Result<()> {
    if truth.len() != predicted.len() {
        return Err(Error::invalid(format!(
            "{} true labels but {} predictions",
            truth.len(),
            predicted.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::invalid("cannot score an empty label sequence"));
    }
    Ok(())
}

#[derive(Debug, Default, Clone, Copy)]
struct Counts {
    tp: u64,
    fp: u64,
    fn_: u64,
}

fn per_class_counts<T: Eq + Hash + Clone>(truth: &[T], predicted: &[T]) -> HashMap<T, Counts> {
    let mut counts: HashMap<T, Counts> = HashMap::new();
    for (t, p) in truth.iter().zip(predicted) {
        if t == p {
            counts.entry(t.clone()).or_default().tp += 1;
        } else {
            counts.entry(p.clone()).or_default().fp += 1;
            counts.entry(t.clone()).or_default().fn_ += 1;
        }
    }
    counts
}

fn f1(c: Counts) -> f64 {
    let denom = 2 * c.tp + c.fp + c.fn_;
    if denom == 0 {
        0.0
    } else {
        (2 * c.tp) as f64 / denom as f64
    }
}

/// F1 over true/false positives and false negatives pooled across classes.
pub fn micro_f1<T: Eq + Hash + Clone>(truth: &[T], predicted: &[T]) -> Result<f64> {
    check_lengths(truth, predicted)?;
    let pooled = per_class_counts(truth, predicted)
        .into_values()
        .fold(Counts::default(), |acc, c| Counts {
            tp: acc.tp + c.tp,
            fp: acc.fp + c.fp,
            fn_: acc.fn_ + c.fn_,
        });
    Ok(f1(pooled))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelF1 {
    pub label: String,
    pub f1: f64,
    /// Occurrences in the ground truth.
    pub support: u64,
    /// False when the label occurs in neither truth nor predictions; `f1` is
    /// then reported as 0.
    pub supported: bool,
}

/// One-vs-rest F1 for every label of `vocabulary`, in vocabulary order.
pub fn per_label_f1<T: Eq + Hash + Clone + ToString>(
    truth: &[T],
    predicted: &[T],
    vocabulary: &[T],
) -> Result<Vec<LabelF1>> {
    check_lengths(truth, predicted)?;
    let counts = per_class_counts(truth, predicted);
    Ok(vocabulary
        .iter()
        .map(|label| {
            let c = counts.get(label).copied().unwrap_or_default();
            LabelF1 {
                label: label.to_string(),
                f1: f1(c),
                support: c.tp + c.fn_,
                supported: c.tp + c.fp + c.fn_ > 0,
            }
        })
        .collect())
}

pub fn accuracy<T: PartialEq>(truth: &[T], predicted: &[T]) -> f64 {
    let right = truth.iter().zip(predicted).filter(|(a, b)| a == b).count();
    right as f64 / truth.len().max(1) as f64
}
