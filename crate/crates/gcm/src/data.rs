//! Observation-side domain types: feature vectors, class labels, and the
//! per-trial datasets the classifier consumes.

use nalgebra::DVector;

use crate::error::{Error, Result};

/// One D-dimensional observation (a processed sample).
///
/// Entries are guaranteed finite by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    values: DVector<f64>,
}

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::dimension("feature vector must be non-empty"));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::dimension(format!(
                "feature vector contains non-finite entry {bad}"
            )));
        }
        Ok(Self {
            values: DVector::from_vec(values),
        })
    }

    pub(crate) fn from_dvector(values: DVector<f64>) -> Result<Self> {
        Self::new(values.iter().copied().collect())
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn as_slice(&self) -> &[f64] {
        self.values.as_slice()
    }
}

/// A class index in `[0, C)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClassLabel(pub usize);

impl ClassLabel {
    pub fn index(self) -> usize {
        self.0
    }

    /// Length-`num_classes` 0/1 vector with exactly one 1.
    pub fn one_hot(self, num_classes: usize) -> Vec<f64> {
        let mut v = vec![0.0; num_classes];
        v[self.0] = 1.0;
        v
    }

    pub(crate) fn check(self, num_classes: usize) -> Result<Self> {
        if self.0 >= num_classes {
            return Err(Error::dimension(format!(
                "class label {} out of range for {num_classes} classes",
                self.0
            )));
        }
        Ok(self)
    }
}

/// Ordered feature vectors of one trial, optionally with true labels.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialDataset {
    trial_id: u32,
    dim: usize,
    features: Vec<FeatureVector>,
    labels: Option<Vec<ClassLabel>>,
}

impl TrialDataset {
    pub fn new(
        trial_id: u32,
        features: Vec<FeatureVector>,
        labels: Option<Vec<ClassLabel>>,
    ) -> Result<Self> {
        let dim = match features.first() {
            Some(f) => f.dim(),
            None => return Err(Error::dimension("trial dataset must be non-empty")),
        };
        if let Some(bad) = features.iter().find(|f| f.dim() != dim) {
            return Err(Error::dimension(format!(
                "inconsistent feature dimension: expected {dim}, found {}",
                bad.dim()
            )));
        }
        if let Some(labels) = &labels {
            if labels.len() != features.len() {
                return Err(Error::dimension(format!(
                    "label count {} does not match sample count {}",
                    labels.len(),
                    features.len()
                )));
            }
        }
        Ok(Self {
            trial_id,
            dim,
            features,
            labels,
        })
    }

    pub fn trial_id(&self) -> u32 {
        self.trial_id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn features(&self) -> &[FeatureVector] {
        &self.features
    }

    pub fn labels(&self) -> Option<&[ClassLabel]> {
        self.labels.as_deref()
    }

    pub fn is_labeled(&self) -> bool {
        self.labels.is_some()
    }

    /// Iterates `(feature, label)` pairs; errors if the trial is unlabeled.
    pub fn labeled_pairs(&self) -> Result<impl Iterator<Item = (&FeatureVector, ClassLabel)>> {
        let labels = self.labels.as_deref().ok_or_else(|| {
            Error::MissingLabel(format!("trial {} carries no labels", self.trial_id))
        })?;
        Ok(self.features.iter().zip(labels.iter().copied()))
    }

    /// Copies the dataset out as owned `(feature, label)` pairs.
    pub fn to_labeled_vec(&self) -> Result<Vec<(FeatureVector, ClassLabel)>> {
        Ok(self.labeled_pairs()?.map(|(f, l)| (f.clone(), l)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite_features() {
        assert!(FeatureVector::new(vec![1.0, f64::NAN]).is_err());
        assert!(FeatureVector::new(vec![f64::INFINITY]).is_err());
        assert!(FeatureVector::new(vec![]).is_err());
    }

    #[test]
    fn one_hot_has_single_one() {
        let v = ClassLabel(2).one_hot(6);
        assert_eq!(v.iter().sum::<f64>(), 1.0);
        assert_eq!(v[2], 1.0);
        assert_eq!(v.len(), 6);
    }

    #[test]
    fn dataset_validates_shapes() {
        let f = |v: Vec<f64>| FeatureVector::new(v).unwrap();
        assert!(TrialDataset::new(1, vec![], None).is_err());
        assert!(
            TrialDataset::new(1, vec![f(vec![1.0]), f(vec![1.0, 2.0])], None).is_err(),
            "mixed dims must be rejected"
        );
        assert!(TrialDataset::new(
            1,
            vec![f(vec![1.0])],
            Some(vec![ClassLabel(0), ClassLabel(1)])
        )
        .is_err());
        let ds = TrialDataset::new(3, vec![f(vec![1.0, 2.0])], Some(vec![ClassLabel(1)])).unwrap();
        assert_eq!(ds.dim(), 2);
        assert_eq!(ds.trial_id(), 3);
        assert!(ds.is_labeled());
    }

    #[test]
    fn labeled_pairs_requires_labels() {
        let ds = TrialDataset::new(1, vec![FeatureVector::new(vec![0.0]).unwrap()], None).unwrap();
        assert!(ds.labeled_pairs().is_err());
    }
}
