use serde::{Deserialize, Serialize};

use super::record::{Dataset, Record, MISSING_SUFFIX};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImputePolicy {
    /// Append one 0/1 indicator column per feature marking imputed entries.
    pub append_mask: bool,
}

/// Per-column medians learned from a fitting split.
#[derive(Debug, Clone, PartialEq)]
pub struct MedianImputer {
    medians: Vec<f64>,
    policy: ImputePolicy,
}

impl MedianImputer {
    /// Learns medians from unmasked entries of `records`. Fails on a column
    /// with no observed value.
    pub fn fit<'a>(
        records: impl IntoIterator<Item = &'a Record>,
        feature_names: &[String],
        policy: ImputePolicy,
    ) -> Result<Self> {
        let width = feature_names.len();
        let mut columns: Vec<Vec<f64>> = vec![Vec::new(); width];
        for r in records {
            for j in 0..width {
                if !r.mask[j] {
                    columns[j].push(r.features[j]);
                }
            }
        }
        let mut medians = Vec::with_capacity(width);
        for (j, mut col) in columns.into_iter().enumerate() {
            if col.is_empty() {
                return Err(Error::Ingest(format!(
                    "feature column `{}` is masked in every fitting record",
                    feature_names[j]
                )));
            }
            col.sort_by(f64::total_cmp);
            let mid = col.len() / 2;
            medians.push(if col.len() % 2 == 1 {
                col[mid]
            } else {
                (col[mid - 1] + col[mid]) / 2.0
            });
        }
        Ok(Self { medians, policy })
    }

    pub fn medians(&self) -> &[f64] {
        &self.medians
    }

    pub fn output_width(&self) -> usize {
        if self.policy.append_mask {
            2 * self.medians.len()
        } else {
            self.medians.len()
        }
    }

    /// Filled feature vector, with indicator columns appended when the policy
    /// asks for them. Unmasked values pass through unchanged.
    pub fn transform(&self, record: &Record) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.output_width());
        out.extend(
            record
                .features
                .iter()
                .zip(&record.mask)
                .zip(&self.medians)
                .map(|((&x, &m), &med)| if m { med } else { x }),
        );
        if self.policy.append_mask {
            out.extend(record.mask.iter().map(|&m| if m { 1.0 } else { 0.0 }));
        }
        out
    }

    pub fn output_names(&self, feature_names: &[String]) -> Vec<String> {
        let mut names = feature_names.to_vec();
        if self.policy.append_mask {
            names.extend(feature_names.iter().map(|n| format!("{n}{MISSING_SUFFIX}_flag")));
        }
        names
    }

    /// Applies the imputer to every record of `target`. Masks are kept (they
    /// now mark imputed entries); indicator columns become unmasked features.
    pub fn apply(&self, target: &Dataset) -> Dataset {
        let names = self.output_names(&target.feature_names);
        let mut out = Dataset::new(names);
        for r in &target.records {
            let features = self.transform(r);
            let mut mask = r.mask.clone();
            if self.policy.append_mask {
                mask.extend(std::iter::repeat(false).take(r.mask.len()));
            }
            out.records.push(Record {
                user: r.user.clone(),
                window_start: r.window_start,
                features,
                mask,
                labels: r.labels.clone(),
            });
        }
        out
    }
}

/// Fits on the whole dataset and applies to it.
pub fn impute(dataset: &Dataset, policy: ImputePolicy) -> Result<Dataset> {
    let imputer = MedianImputer::fit(&dataset.records, &dataset.feature_names, policy)?;
    Ok(imputer.apply(dataset))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::record::Labels;

    fn rec(values: &[Option<f64>]) -> Record {
        Record {
            user: "u".into(),
            window_start: 0,
            features: values.iter().map(|v| v.unwrap_or(f64::NAN)).collect(),
            mask: values.iter().map(Option::is_none).collect(),
            labels: Labels {
                we: "a".into(),
                wa: "b".into(),
                wo: "c".into(),
            },
        }
    }

    fn ds(rows: &[&[Option<f64>]]) -> Dataset {
        let width = rows[0].len();
        let mut d = Dataset::new((0..width).map(|j| format!("f{j}")).collect());
        for r in rows {
            d.push(rec(r)).unwrap();
        }
        d
    }

    #[test]
    fn fills_with_median_of_observed() {
        let d = ds(&[&[Some(1.0)], &[None], &[Some(3.0)]]);
        let out = impute(&d, ImputePolicy::default()).unwrap();
        let col: Vec<f64> = out.records.iter().map(|r| r.features[0]).collect();
        assert_eq!(col, [1.0, 2.0, 3.0]);
        assert!(out.records[1].mask[0], "mask still marks the imputed entry");
        assert!(!out.records.iter().any(Record::has_pending));
    }

    #[test]
    fn complete_data_is_unchanged() {
        let d = ds(&[&[Some(1.0), Some(5.0)], &[Some(2.0), Some(-1.0)]]);
        assert_eq!(impute(&d, ImputePolicy::default()).unwrap(), d);
    }

    #[test]
    fn test_split_takes_train_median() {
        let train = ds(&[&[Some(10.0)], &[Some(20.0)], &[Some(30.0)]]);
        let test = ds(&[&[None], &[Some(100.0)], &[Some(200.0)]]);
        let imputer = MedianImputer::fit(&train.records, &train.feature_names, ImputePolicy::default()).unwrap();
        let out = imputer.apply(&test);
        assert_eq!(out.records[0].features[0], 20.0);
        assert_eq!(out.records[1].features[0], 100.0);
    }

    #[test]
    fn all_masked_column_is_an_error() {
        let d = ds(&[&[Some(1.0), None], &[Some(2.0), None]]);
        let err = impute(&d, ImputePolicy::default()).unwrap_err().to_string();
        assert!(err.contains("`f1`"), "{err}");
    }

    #[test]
    fn indicator_columns() {
        let d = ds(&[&[Some(1.0)], &[None]]);
        let out = impute(&d, ImputePolicy { append_mask: true }).unwrap();
        assert_eq!(out.feature_names, ["f0", "f0_missing_flag"]);
        assert_eq!(out.records[1].features, [1.0, 1.0]);
        assert_eq!(out.records[0].features, [1.0, 0.0]);
    }
}
