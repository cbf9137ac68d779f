use std::collections::BTreeMap;

use rayon::prelude::*;

use super::encode::{augment_with, Vocabularies};
use super::folds::{kfold, training_indices};
use super::{
    DepthReport, ExperimentReport, ExperimentSpec, FoldScore, LabelScore, LabelSource, Protocol, UserScore,
    UserSummary,
};
use crate::error::{Error, Result};
use crate::forest::{holdout_split, select_depth, train_forest, DepthTuning, ForestParams, LabeledMatrix, MaxDepth};
use crate::ingest::{Dataset, ImputePolicy, MedianImputer};
use crate::metrics::{micro_f1, per_label_f1};
use crate::ontology::AspectId;
use crate::seed::derive_path;

const STREAM_FOLDS: u64 = 11;
const STREAM_TUNE: u64 = 12;
const STREAM_FOREST: u64 = 13;
const STREAM_STACK: u64 = 14;

struct Problem<'a> {
    dataset: &'a Dataset,
    spec: &'a ExperimentSpec,
    vocabularies: &'a Vocabularies,
    classes: Vec<String>,
    targets: Vec<usize>,
}

impl<'a> Problem<'a> {
    fn new(dataset: &'a Dataset, spec: &'a ExperimentSpec, vocabularies: &'a Vocabularies) -> Result<Self> {
        spec.validate()?;
        if dataset.len() < spec.folds {
            return Err(Error::Experiment(format!(
                "{} records cannot fill {} folds",
                dataset.len(),
                spec.folds
            )));
        }
        let classes = vocabularies.get(spec.target)?.to_vec();
        let targets = label_indices(dataset, spec.target, vocabularies)?;
        for &a in &spec.inputs {
            label_indices(dataset, a, vocabularies)?;
        }
        Ok(Self {
            dataset,
            spec,
            vocabularies,
            classes,
            targets,
        })
    }

    fn imputer(&self, rows: &[usize]) -> Result<MedianImputer> {
        MedianImputer::fit(
            rows.iter().map(|&i| &self.dataset.records[i]),
            &self.dataset.feature_names,
            ImputePolicy::default(),
        )
    }

    /// Imputed sensor features of `rows`, augmented with `inputs` labels.
    /// `override_labels[i]`, when given, replaces row `i`'s annotated labels.
    fn matrix(
        &self,
        rows: &[usize],
        imputer: &MedianImputer,
        inputs: &[AspectId],
        override_labels: Option<&BTreeMap<usize, BTreeMap<AspectId, String>>>,
        targets: &[usize],
        n_classes: usize,
    ) -> Result<LabeledMatrix> {
        let mut features = Vec::new();
        let mut labels = Vec::with_capacity(rows.len());
        let mut width = 0;
        for &i in rows {
            let record = &self.dataset.records[i];
            let base = imputer.transform(record);
            let replaced = override_labels.and_then(|m| m.get(&i));
            let x = augment_with(&base, inputs, self.vocabularies, |a| match replaced.and_then(|m| m.get(&a)) {
                Some(l) => Some(l.as_str()),
                None => record.labels.get(a),
            })?;
            width = x.len();
            features.extend(x);
            labels.push(targets[i]);
        }
        LabeledMatrix::new(features, width, labels, n_classes)
    }

    fn target_matrix(
        &self,
        rows: &[usize],
        imputer: &MedianImputer,
        override_labels: Option<&BTreeMap<usize, BTreeMap<AspectId, String>>>,
    ) -> Result<LabeledMatrix> {
        self.matrix(rows, imputer, &self.spec.inputs, override_labels, &self.targets, self.classes.len())
    }

    fn forest_params(&self, depth: MaxDepth, stream: &[u64]) -> ForestParams {
        ForestParams {
            max_depth: depth,
            seed: derive_path(self.spec.seed, stream),
            ..self.spec.forest
        }
    }

    /// Depth selection on a seeded 75/25 split of `rows`.
    fn tune(&self, rows: &[usize], stream: &[u64]) -> Result<DepthTuning> {
        let mut path = stream.to_vec();
        path.push(0);
        let (tr, va) = holdout_split(rows.len(), derive_path(self.spec.seed, &path))?;
        let train: Vec<usize> = tr.iter().map(|&p| rows[p]).collect();
        let valid: Vec<usize> = va.iter().map(|&p| rows[p]).collect();
        let imputer = self.imputer(&train)?;
        let train_m = self.target_matrix(&train, &imputer, None)?;
        let valid_m = self.target_matrix(&valid, &imputer, None)?;
        path.pop();
        path.push(1);
        let params = self.forest_params(self.spec.forest.max_depth, &path);
        select_depth(&train_m, &valid_m, &self.classes, &self.spec.depth_grid, &params)
    }

    /// Test-row input labels predicted by sensors-only forests.
    fn predicted_inputs(
        &self,
        train: &[usize],
        test: &[usize],
        imputer: &MedianImputer,
        depth: MaxDepth,
        fold: usize,
    ) -> Result<BTreeMap<usize, BTreeMap<AspectId, String>>> {
        let mut out: BTreeMap<usize, BTreeMap<AspectId, String>> = BTreeMap::new();
        for &aspect in &self.spec.inputs {
            let vocab = self.vocabularies.get(aspect)?;
            let targets = label_indices(self.dataset, aspect, self.vocabularies)?;
            let train_m = self.matrix(train, imputer, &[], None, &targets, vocab.len())?;
            let params = self.forest_params(depth, &[STREAM_STACK, fold as u64, aspect_stream(aspect)]);
            let forest = train_forest(&train_m, vocab, &params)?;
            for &i in test {
                let x = imputer.transform(&self.dataset.records[i]);
                let label = forest.predict_label(&x)?.to_string();
                out.entry(i).or_default().insert(aspect, label);
            }
        }
        Ok(out)
    }
}

fn aspect_stream(aspect: AspectId) -> u64 {
    AspectId::ALL.iter().position(|&a| a == aspect).expect("aspect listed") as u64
}

fn label_indices(dataset: &Dataset, aspect: AspectId, vocabularies: &Vocabularies) -> Result<Vec<usize>> {
    let vocab = vocabularies.get(aspect)?;
    let index: BTreeMap<&str, usize> = vocab.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    dataset
        .records
        .iter()
        .enumerate()
        .map(|(row, r)| match r.labels.get(aspect).filter(|l| !l.is_empty()) {
            None => Err(Error::Experiment(format!("record {row} lacks a {aspect} label"))),
            Some(l) => index
                .get(l)
                .copied()
                .ok_or_else(|| Error::Experiment(format!("record {row}: `{l}` is not in the {aspect} vocabulary"))),
        })
        .collect()
}

struct FoldOutcome {
    test: Vec<usize>,
    predicted: Vec<usize>,
    depth: MaxDepth,
}

/// Cross-validated evaluation of one experiment arm. Folds run in parallel;
/// results are assembled in fold order, so the report depends only on the
/// dataset and the spec.
pub fn run_experiment(dataset: &Dataset, spec: &ExperimentSpec, vocabularies: &Vocabularies) -> Result<ExperimentReport> {
    let problem = Problem::new(dataset, spec, vocabularies)?;
    let n = dataset.len();
    let all: Vec<usize> = (0..n).collect();

    let mut tuning = Vec::new();
    let fixed_depth = match (spec.depth_grid.as_slice(), spec.protocol) {
        ([only], _) => Some(*only),
        (_, Protocol::Cv5) => {
            let t = problem.tune(&all, &[STREAM_TUNE])?;
            log::debug!("{}: tuned depth {}", spec.arm_name(), t.chosen);
            tuning = t.scores;
            Some(t.chosen)
        }
        (_, Protocol::Nested) => None,
    };

    let folds = kfold(n, spec.folds, derive_path(spec.seed, &[STREAM_FOLDS]))?;
    let outcomes: Vec<FoldOutcome> = (0..spec.folds)
        .into_par_iter()
        .map(|f| -> Result<FoldOutcome> {
            let train = training_indices(&folds, f);
            let test = folds[f].clone();
            debug_assert!(test.iter().all(|i| train.binary_search(i).is_err()));
            let depth = match fixed_depth {
                Some(d) => d,
                None => problem.tune(&train, &[STREAM_TUNE, f as u64 + 1])?.chosen,
            };
            let imputer = problem.imputer(&train)?;
            let train_m = problem.target_matrix(&train, &imputer, None)?;
            let replaced = match spec.label_source {
                LabelSource::Truth => None,
                LabelSource::Predicted => Some(problem.predicted_inputs(&train, &test, &imputer, depth, f)?),
            };
            let test_m = problem.target_matrix(&test, &imputer, replaced.as_ref())?;
            let forest = train_forest(&train_m, &problem.classes, &problem.forest_params(depth, &[STREAM_FOREST, f as u64]))?;
            let predicted = forest.predict_matrix(&test_m)?;
            Ok(FoldOutcome { test, predicted, depth })
        })
        .collect::<Result<_>>()?;

    let mut oof = vec![usize::MAX; n];
    let mut fold_scores = Vec::with_capacity(spec.folds);
    for (f, o) in outcomes.iter().enumerate() {
        let truth: Vec<usize> = o.test.iter().map(|&i| problem.targets[i]).collect();
        fold_scores.push(FoldScore {
            fold: f,
            test_records: o.test.len(),
            micro_f1: micro_f1(&truth, &o.predicted)?,
        });
        for (&i, &p) in o.test.iter().zip(&o.predicted) {
            oof[i] = p;
        }
    }
    debug_assert!(oof.iter().all(|&p| p != usize::MAX));

    let (per_user, per_label) = summarize(dataset, &problem.targets, &oof, &problem.classes, &fold_scores)?;
    log::info!("{}: mean per-user micro-F1 {:.4}", spec.arm_name(), per_user.mean_micro_f1);
    Ok(ExperimentReport {
        spec: spec.clone(),
        folds: fold_scores,
        per_user,
        per_label,
        depth: DepthReport {
            per_fold: outcomes.iter().map(|o| o.depth).collect(),
            tuning,
        },
        digest: dataset.digest(),
    })
}

fn summarize(
    dataset: &Dataset,
    truth: &[usize],
    predicted: &[usize],
    classes: &[String],
    folds: &[FoldScore],
) -> Result<(UserSummary, Vec<LabelScore>)> {
    let mut by_user: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, r) in dataset.records.iter().enumerate() {
        by_user.entry(r.user.as_str()).or_default().push(i);
    }
    let class_ids: Vec<usize> = (0..classes.len()).collect();
    let mut users = Vec::with_capacity(by_user.len());
    let mut label_sums = vec![(0.0f64, 0usize); classes.len()];
    for (user, rows) in &by_user {
        let t: Vec<usize> = rows.iter().map(|&i| truth[i]).collect();
        let p: Vec<usize> = rows.iter().map(|&i| predicted[i]).collect();
        users.push(UserScore {
            user: user.to_string(),
            records: rows.len(),
            micro_f1: micro_f1(&t, &p)?,
        });
        for (c, s) in per_label_f1(&t, &p, &class_ids)?.into_iter().enumerate() {
            if s.supported {
                label_sums[c].0 += s.f1;
                label_sums[c].1 += 1;
            }
        }
    }
    let mean = users.iter().map(|u| u.micro_f1).sum::<f64>() / users.len() as f64;
    let pooled = per_label_f1(truth, predicted, &class_ids)?;
    let per_label = pooled
        .into_iter()
        .zip(&label_sums)
        .zip(classes)
        .map(|((p, &(sum, count)), name)| LabelScore {
            label: name.clone(),
            user_mean_f1: if count > 0 { sum / count as f64 } else { 0.0 },
            users: count,
            pooled_f1: p.f1,
            support: p.support,
            supported: p.supported,
        })
        .collect();
    let summary = UserSummary {
        mean_micro_f1: mean,
        pooled_micro_f1: micro_f1(truth, predicted)?,
        fold_mean_micro_f1: folds.iter().map(|f| f.micro_f1).sum::<f64>() / folds.len() as f64,
        users,
    };
    Ok((summary, per_label))
}

/// The arms of a full improvement study for `template`'s settings: for each
/// target in WA, WE, WO order, the sensors-only arm, each single other
/// aspect, then both other aspects.
pub fn suite_specs(template: &ExperimentSpec) -> Vec<ExperimentSpec> {
    let mut specs = Vec::new();
    for target in [AspectId::Wa, AspectId::We, AspectId::Wo] {
        let others: Vec<AspectId> = AspectId::RECOGNIZED.into_iter().filter(|&a| a != target).collect();
        let base = ExperimentSpec {
            target,
            inputs: Vec::new(),
            ..template.clone()
        };
        specs.push(base.clone());
        for &o in &others {
            specs.push(base.clone().with_inputs(&[o]));
        }
        specs.push(base.with_inputs(&others));
    }
    specs
}

/// Runs every arm of [`suite_specs`]. With `share_depth`, each target's
/// sensors-only arm is tuned as usual and its chosen depth is then fixed for
/// that target's augmented arms, so arms differ only in their inputs.
pub fn run_suite(
    dataset: &Dataset,
    template: &ExperimentSpec,
    vocabularies: &Vocabularies,
    share_depth: bool,
) -> Result<Vec<ExperimentReport>> {
    let specs = suite_specs(template);
    let groups: Vec<&[ExperimentSpec]> = specs.chunks(4).collect();
    let per_target: Vec<Vec<ExperimentReport>> = groups
        .into_par_iter()
        .map(|arms| -> Result<Vec<ExperimentReport>> {
            let baseline = run_experiment(dataset, &arms[0], vocabularies)?;
            let derived: Vec<ExperimentSpec> = arms[1..]
                .iter()
                .map(|s| {
                    let mut s = s.clone();
                    if share_depth && s.protocol == Protocol::Cv5 {
                        s.depth_grid = vec![baseline.depth.per_fold[0]];
                    }
                    s
                })
                .collect();
            let rest: Vec<ExperimentReport> = derived
                .par_iter()
                .map(|s| run_experiment(dataset, s, vocabularies))
                .collect::<Result<_>>()?;
            let mut out = vec![baseline];
            out.extend(rest);
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(per_target.into_iter().flatten().collect())
}
