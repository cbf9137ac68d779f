//! Recognition experiments: predict one aspect from sensor features, with
//! and without other aspects' labels appended as one-hot inputs, scored by
//! k-fold cross-validation.
//!
//! Scores are micro-F1. The headline number of a report is the unweighted
//! mean over users of each user's out-of-fold micro-F1; record-pooled and
//! fold-mean scores are reported next to it.

mod encode;
mod folds;
mod run;
mod table;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use encode::{augment, augment_with, augmented_width, canonical_order, one_hot, Vocabularies};
pub use folds::{kfold, stratified_kfold, training_indices};
pub use run::{run_experiment, run_suite, suite_specs};
pub use table::{improvement_table, Cell, ImprovementTable, TableRow, TABLE_COLUMNS, TABLE_ROWS};

use crate::error::{Error, Result};
use crate::forest::{default_depth_grid, DepthScore, ForestParams, MaxDepth};
use crate::ontology::AspectId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    /// Depth tuned once on a 75/25 split of the whole dataset, then fixed for
    /// every fold.
    Cv5,
    /// Depth tuned inside each fold's training part.
    Nested,
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Protocol::Cv5 => "cv5",
            Protocol::Nested => "nested",
        })
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cv5" => Ok(Protocol::Cv5),
            "nested" => Ok(Protocol::Nested),
            _ => Err(Error::invalid(format!("unknown protocol `{s}` (expected cv5 or nested)"))),
        }
    }
}

/// Where the appended input-aspect labels come from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelSource {
    /// Annotated labels, for training and test rows alike.
    #[default]
    Truth,
    /// Test rows get labels predicted by a sensors-only forest trained on the
    /// fold's training rows; training rows keep annotated labels.
    Predicted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub target: AspectId,
    /// Kept in WE, WA, WO order.
    pub inputs: Vec<AspectId>,
    pub protocol: Protocol,
    /// `seed` is not used directly: every forest gets a seed derived from the
    /// experiment seed and its fold.
    pub forest: ForestParams,
    /// A single entry fixes the depth and skips tuning.
    pub depth_grid: Vec<MaxDepth>,
    pub folds: usize,
    #[serde(default)]
    pub label_source: LabelSource,
    pub seed: u64,
}

impl ExperimentSpec {
    /// Sensors-only arm with the default forest, grid and five folds.
    pub fn baseline(target: AspectId, seed: u64) -> Self {
        Self {
            target,
            inputs: Vec::new(),
            protocol: Protocol::Cv5,
            forest: ForestParams::default(),
            depth_grid: default_depth_grid(),
            folds: 5,
            label_source: LabelSource::Truth,
            seed,
        }
    }

    pub fn with_inputs(mut self, inputs: &[AspectId]) -> Self {
        self.inputs = canonical_order(inputs);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !AspectId::RECOGNIZED.contains(&self.target) {
            return Err(Error::invalid(format!("{} is not a recognition target", self.target)));
        }
        for (i, a) in self.inputs.iter().enumerate() {
            if !AspectId::RECOGNIZED.contains(a) {
                return Err(Error::invalid(format!("{a} cannot be an input aspect")));
            }
            if *a == self.target {
                return Err(Error::invalid(format!("target {a} is also an input")));
            }
            if self.inputs[..i].contains(a) {
                return Err(Error::invalid(format!("input {a} listed twice")));
            }
        }
        if self.depth_grid.is_empty() {
            return Err(Error::invalid("depth grid is empty"));
        }
        if self.folds < 2 {
            return Err(Error::invalid(format!("need at least 2 folds, got {}", self.folds)));
        }
        self.forest.validate()
    }

    /// Short arm name such as `WA <- sensors+WE+WO`.
    pub fn arm_name(&self) -> String {
        let mut s = format!("{} <- sensors", self.target);
        for a in &self.inputs {
            s.push('+');
            s.push_str(a.as_str());
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldScore {
    pub fold: usize,
    pub test_records: usize,
    pub micro_f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserScore {
    pub user: String,
    pub records: usize,
    pub micro_f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserSummary {
    /// Unweighted mean of `users[..].micro_f1`.
    pub mean_micro_f1: f64,
    /// Micro-F1 of all out-of-fold predictions pooled.
    pub pooled_micro_f1: f64,
    pub fold_mean_micro_f1: f64,
    pub users: Vec<UserScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelScore {
    pub label: String,
    /// Mean F1 over the users for whom the label is supported.
    pub user_mean_f1: f64,
    pub users: usize,
    pub pooled_f1: f64,
    pub support: u64,
    pub supported: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthReport {
    /// Depth used in each fold.
    pub per_fold: Vec<MaxDepth>,
    /// Validation scores of the single up-front tuning run; empty when the
    /// depth was fixed or tuned per fold.
    pub tuning: Vec<DepthScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub spec: ExperimentSpec,
    pub folds: Vec<FoldScore>,
    pub per_user: UserSummary,
    pub per_label: Vec<LabelScore>,
    pub depth: DepthReport,
    pub digest: String,
}

impl ExperimentReport {
    pub fn score(&self) -> f64 {
        self.per_user.mean_micro_f1
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Experiment(format!("bad report: {e}")))
    }
}

/// Serializes several reports as one JSON array.
pub fn reports_to_json(reports: &[ExperimentReport]) -> String {
    let mut s = serde_json::to_string_pretty(reports).expect("reports serialize");
    s.push('\n');
    s
}

/// Accepts either a single report object or an array of reports.
pub fn reports_from_json(text: &str) -> Result<Vec<ExperimentReport>> {
    let parsed = if text.trim_start().starts_with('[') {
        serde_json::from_str(text)
    } else {
        serde_json::from_str(text).map(|r| vec![r])
    };
    parsed.map_err(|e| Error::Experiment(format!("bad report file: {e}")))
}
