use crate::error::{Error, Result};

/// Dense row-major feature matrix with class-index labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledMatrix {
    features: Vec<f64>,
    width: usize,
    labels: Vec<usize>,
    n_classes: usize,
}

impl LabeledMatrix {
    pub fn new(features: Vec<f64>, width: usize, labels: Vec<usize>, n_classes: usize) -> Result<Self> {
        if width == 0 {
            return Err(Error::invalid("feature width must be positive"));
        }
        if features.len() != width * labels.len() {
            return Err(Error::invalid(format!(
                "{} feature values do not form {} rows of width {width}",
                features.len(),
                labels.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&y| y >= n_classes) {
            return Err(Error::invalid(format!("label index {bad} outside {n_classes} classes")));
        }
        if let Some(x) = features.iter().find(|x| !x.is_finite()) {
            return Err(Error::invalid(format!("non-finite feature value {x}")));
        }
        Ok(Self {
            features,
            width,
            labels,
            n_classes,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>], labels: Vec<usize>, n_classes: usize) -> Result<Self> {
        let width = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != width) {
            return Err(Error::invalid("rows have differing widths"));
        }
        Self::new(rows.concat(), width, labels, n_classes)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.width..(i + 1) * self.width]
    }

    #[inline]
    pub fn value(&self, i: usize, feature: usize) -> f64 {
        self.features[i * self.width + feature]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Rows `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Self {
        let mut features = Vec::with_capacity(indices.len() * self.width);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Self {
            features,
            width: self.width,
            labels,
            n_classes: self.n_classes,
        }
    }
}
