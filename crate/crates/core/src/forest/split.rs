use std::cmp::Ordering;

use super::data::LabeledMatrix;
use crate::error::{Error, Result};

/// Gini impurity `1 - sum(p_i^2)`.
pub fn gini(class_counts: &[u32]) -> Result<f64> {
    let total: u64 = class_counts.iter().map(|&c| u64::from(c)).sum();
    if total == 0 {
        return Err(Error::invalid("gini of an empty count vector"));
    }
    let sum_sq: u64 = class_counts.iter().map(|&c| u64::from(c) * u64::from(c)).sum();
    Ok(1.0 - sum_sq as f64 / (total * total) as f64)
}

/// Samples with `value <= threshold` go left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    /// Size-weighted Gini impurity of the two children.
    pub impurity: f64,
}

/// `sum_sq_left / n_left + sum_sq_right / n_right` as an exact fraction.
/// Weighted child impurity is `1 - score / n`, so a larger score is a
/// better split.
#[derive(Debug, Clone, Copy)]
struct Score {
    num: u128,
    den: u128,
}

impl Score {
    fn cmp(&self, other: &Score) -> Ordering {
        (self.num * other.den).cmp(&(other.num * self.den))
    }
}

/// Midpoint of two consecutive distinct values, kept strictly below `hi` so
/// `hi` lands on the right.
pub fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid >= hi || mid < lo {
        lo
    } else {
        mid
    }
}

/// Reusable buffers for the split search.
#[derive(Debug, Default)]
pub(crate) struct Splitter {
    order: Vec<(f64, usize)>,
    left: Vec<u64>,
    right: Vec<u64>,
}

impl Splitter {
    /// Best `(feature, threshold)` over `candidates` for the rows in `samples`
    /// (which may repeat). Ties go to the lower feature index, then the lower
    /// threshold. `None` when the node is pure or no candidate feature takes
    /// two distinct values. Zero-gain splits are returned: Gini never rises
    /// under a split, and refusing them would leave XOR-like nodes unsplit.
    pub(crate) fn best_split(
        &mut self,
        data: &LabeledMatrix,
        samples: &[usize],
        candidates: &[usize],
    ) -> Option<Split> {
        let n = samples.len();
        if n < 2 {
            return None;
        }
        let k = data.n_classes();
        let mut totals = vec![0u64; k];
        for &i in samples {
            totals[data.label(i)] += 1;
        }
        if totals.iter().filter(|&&c| c > 0).count() < 2 {
            return None;
        }
        let parent_sq: u64 = totals.iter().map(|c| c * c).sum();

        let mut best: Option<(Score, usize, f64)> = None;
        let mut features: Vec<usize> = candidates.to_vec();
        features.sort_unstable();
        features.dedup();
        for &f in &features {
            self.order.clear();
            self.order.extend(samples.iter().map(|&i| (data.value(i, f), data.label(i))));
            self.order.sort_by(|a, b| a.0.total_cmp(&b.0));
            if self.order[0].0 == self.order[n - 1].0 {
                continue;
            }
            self.left.clear();
            self.left.resize(k, 0);
            self.right.clear();
            self.right.extend_from_slice(&totals);
            let mut sq_left: u64 = 0;
            let mut sq_right: u64 = parent_sq;
            for pos in 0..n - 1 {
                let (x, y) = self.order[pos];
                // Move one sample of class y from right to left.
                sq_left += 2 * self.left[y] + 1;
                sq_right -= 2 * self.right[y] - 1;
                self.left[y] += 1;
                self.right[y] -= 1;
                let next = self.order[pos + 1].0;
                if x == next {
                    continue;
                }
                let n_left = (pos + 1) as u128;
                let n_right = (n - pos - 1) as u128;
                let score = Score {
                    num: u128::from(sq_left) * n_right + u128::from(sq_right) * n_left,
                    den: n_left * n_right,
                };
                if best.as_ref().map_or(true, |(b, _, _)| score.cmp(b) == Ordering::Greater) {
                    best = Some((score, f, midpoint(x, next)));
                }
            }
        }
        let (score, feature, threshold) = best?;
        let impurity = 1.0 - (score.num as f64 / score.den as f64) / n as f64;
        Some(Split {
            feature,
            threshold,
            impurity: impurity.max(0.0),
        })
    }
}

/// Exhaustive split search; see [`Splitter::best_split`].
pub fn best_split(data: &LabeledMatrix, samples: &[usize], candidates: &[usize]) -> Option<Split> {
    Splitter::default().best_split(data, samples, candidates)
}
