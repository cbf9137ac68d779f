use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{Dataset, Record};
use crate::ontology::AspectId;

/// Label vocabularies of the recognized aspects, each in a fixed order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabularies {
    #[serde(rename = "WE")]
    pub we: Vec<String>,
    #[serde(rename = "WA")]
    pub wa: Vec<String>,
    #[serde(rename = "WO")]
    pub wo: Vec<String>,
}

impl Vocabularies {
    /// Sorted labels that occur in `dataset`.
    pub fn observed(dataset: &Dataset) -> Self {
        let labels = |a| {
            let mut v = dataset.observed_labels(a);
            v.retain(|l| !l.is_empty());
            v
        };
        Self {
            we: labels(AspectId::We),
            wa: labels(AspectId::Wa),
            wo: labels(AspectId::Wo),
        }
    }

    pub fn get(&self, aspect: AspectId) -> Result<&[String]> {
        match aspect {
            AspectId::We => Ok(&self.we),
            AspectId::Wa => Ok(&self.wa),
            AspectId::Wo => Ok(&self.wo),
            other => Err(Error::invalid(format!("{other} has no recognition vocabulary"))),
        }
    }

    pub fn index_of(&self, aspect: AspectId, label: &str) -> Result<usize> {
        self.get(aspect)?
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::invalid(format!("label `{label}` is not in the {aspect} vocabulary")))
    }
}

pub fn one_hot(label: &str, vocabulary: &[String]) -> Result<Vec<f64>> {
    let idx = vocabulary
        .iter()
        .position(|l| l == label)
        .ok_or_else(|| Error::invalid(format!("label `{label}` is not in the vocabulary")))?;
    let mut v = vec![0.0; vocabulary.len()];
    v[idx] = 1.0;
    Ok(v)
}

/// Puts `aspects` in the fixed augmentation order WE, WA, WO.
pub fn canonical_order(aspects: &[AspectId]) -> Vec<AspectId> {
    AspectId::RECOGNIZED.into_iter().filter(|a| aspects.contains(a)).collect()
}

/// `features` followed by one one-hot block per aspect, in WE, WA, WO order.
/// `label_of` supplies the label to encode for each aspect.
pub fn augment_with<'a>(
    features: &[f64],
    aspects: &[AspectId],
    vocabularies: &Vocabularies,
    mut label_of: impl FnMut(AspectId) -> Option<&'a str>,
) -> Result<Vec<f64>> {
    let mut out = features.to_vec();
    for aspect in canonical_order(aspects) {
        let label = label_of(aspect)
            .filter(|l| !l.is_empty())
            .ok_or_else(|| Error::Experiment(format!("record lacks a {aspect} label")))?;
        let vocab = vocabularies.get(aspect)?;
        let block = one_hot(label, vocab).map_err(|_| {
            Error::Experiment(format!("label `{label}` is not in the {aspect} vocabulary"))
        })?;
        out.extend(block);
    }
    Ok(out)
}

/// The record's features extended with its ground-truth labels for
/// `aspects`.
pub fn augment(record: &Record, aspects: &[AspectId], vocabularies: &Vocabularies) -> Result<Vec<f64>> {
    augment_with(&record.features, aspects, vocabularies, |a| record.labels.get(a))
}

pub fn augmented_width(base: usize, aspects: &[AspectId], vocabularies: &Vocabularies) -> Result<usize> {
    let mut w = base;
    for &a in &canonical_order(aspects) {
        w += vocabularies.get(a)?.len();
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Labels;

    fn names(prefix: &str, n: usize) -> Vec<String> {
        (0..n).map(|i| format!("{prefix}{i}")).collect()
    }

    fn vocabs(we: usize, wa: usize, wo: usize) -> Vocabularies {
        Vocabularies {
            we: names("e", we),
            wa: names("a", wa),
            wo: names("o", wo),
        }
    }

    fn record(d: usize) -> Record {
        Record::dense(
            "u",
            0,
            (0..d).map(|i| i as f64).collect(),
            Labels {
                we: "e3".into(),
                wa: "a1".into(),
                wo: "o4".into(),
            },
        )
    }

    #[test]
    fn one_hot_cases() {
        assert_eq!(one_hot("x2", &names("x", 4)).unwrap(), vec![0.0, 0.0, 1.0, 0.0]);
        assert_eq!(one_hot("x0", &names("x", 1)).unwrap(), vec![1.0]);
        assert!(one_hot("y", &names("x", 3)).is_err());
    }

    #[test]
    fn widths() {
        let v = vocabs(9, 7, 5);
        let r = record(122);
        let x = augment(&r, &[AspectId::Wo, AspectId::We], &v).unwrap();
        assert_eq!(x.len(), 136);
        // WE block comes first regardless of request order.
        assert_eq!(x[122 + 3], 1.0);
        assert_eq!(x[122 + 9 + 4], 1.0);
        assert_eq!(augment(&r, &[], &v).unwrap(), r.features);
        let only_wa = augment(&r, &[AspectId::Wa], &v).unwrap();
        assert_eq!(only_wa.len(), 129);
        assert_eq!(only_wa[122..].iter().sum::<f64>(), 1.0);
        assert_eq!(augmented_width(122, &[AspectId::We, AspectId::Wo], &v).unwrap(), 136);
    }

    #[test]
    fn missing_or_unknown_labels() {
        let v = vocabs(2, 2, 2);
        let mut r = record(3);
        r.labels.wa = String::new();
        assert!(augment(&r, &[AspectId::Wa], &v).unwrap_err().to_string().contains("lacks a WA label"));
        r.labels.wa = "a1".into();
        assert!(augment(&r, &[AspectId::We], &v).is_err());
        assert!(v.get(AspectId::Time).is_err());
    }
}
