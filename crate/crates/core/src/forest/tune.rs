use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{train_forest, ForestParams, LabeledMatrix, MaxDepth};
use crate::error::{Error, Result};
use crate::metrics::micro_f1;
use crate::seed::rng_from;

/// Share of rows used for training when tuning depth.
pub const TUNING_TRAIN_SHARE: f64 = 0.75;

pub fn default_depth_grid() -> Vec<MaxDepth> {
    let mut grid: Vec<MaxDepth> = [2, 4, 6, 8, 12, 16, 24].into_iter().map(MaxDepth::limited).collect();
    grid.push(MaxDepth::UNLIMITED);
    grid
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthScore {
    pub depth: MaxDepth,
    pub validation_micro_f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthTuning {
    pub chosen: MaxDepth,
    pub scores: Vec<DepthScore>,
}

/// Seeded random `(train, validation)` partition of `0..n`, 75/25.
pub fn holdout_split(n: usize, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if n < 4 {
        return Err(Error::invalid(format!("{n} records are too few for a train/validation split")));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng_from(seed));
    let n_train = ((n as f64 * TUNING_TRAIN_SHARE).round() as usize).clamp(1, n - 1);
    let valid = idx.split_off(n_train);
    Ok((idx, valid))
}

/// Trains one forest per grid depth on `train` and keeps the depth with the
/// best validation micro-F1; ties go to the smaller depth.
pub fn select_depth(
    train: &LabeledMatrix,
    valid: &LabeledMatrix,
    labels: &[String],
    grid: &[MaxDepth],
    params: &ForestParams,
) -> Result<DepthTuning> {
    if grid.is_empty() {
        return Err(Error::invalid("depth grid is empty"));
    }
    let mut grid = grid.to_vec();
    grid.sort_by(MaxDepth::cmp_depth);
    grid.dedup();
    let mut scores = Vec::with_capacity(grid.len());
    let mut best: Option<(MaxDepth, f64)> = None;
    for depth in grid {
        let forest = train_forest(train, labels, &params.with_depth(depth))?;
        let predicted = forest.predict_matrix(valid)?;
        let score = micro_f1(valid.labels(), &predicted)?;
        if best.map_or(true, |(_, b)| score > b) {
            best = Some((depth, score));
        }
        scores.push(DepthScore {
            depth,
            validation_micro_f1: score,
        });
    }
    Ok(DepthTuning {
        chosen: best.expect("grid is nonempty").0,
        scores,
    })
}

/// Depth selection on a seeded 75/25 split of `data`.
pub fn tune_depth(
    data: &LabeledMatrix,
    labels: &[String],
    grid: &[MaxDepth],
    params: &ForestParams,
    seed: u64,
) -> Result<DepthTuning> {
    if grid.is_empty() {
        return Err(Error::invalid("depth grid is empty"));
    }
    let (train_idx, valid_idx) = holdout_split(data.len(), seed)?;
    select_depth(&data.select(&train_idx), &data.select(&valid_idx), labels, grid, params)
}
