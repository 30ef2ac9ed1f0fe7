use std::collections::HashMap;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::DatasetManifest;
use crate::error::{Error, Result};

/// Identity of one trained model run.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RunInfo {
    pub model_id: String,
    pub method_id: String,
    pub replicate_index: u32,
    pub dataset_id: String,
}

/// One model run's raw (pre-softmax) class scores, one row per image.
///
/// Row order is the order of `image_ids`. Scores are finite by construction.
#[derive(Debug, Clone)]
pub struct PredictionSet {
    info: RunInfo,
    image_ids: Vec<String>,
    scores: Array2<f32>,
    rows: HashMap<String, usize>,
}

impl PredictionSet {
    pub fn new(info: RunInfo, image_ids: Vec<String>, scores: Array2<f32>) -> Result<Self> {
        if scores.nrows() != image_ids.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} ids but {} score rows",
                image_ids.len(),
                scores.nrows()
            )));
        }
        let scores = scores.as_standard_layout().into_owned();
        for ((row, column), v) in scores.indexed_iter() {
            if !v.is_finite() {
                return Err(Error::NonFiniteScore { row, column });
            }
        }
        let mut rows = HashMap::with_capacity(image_ids.len());
        for (i, id) in image_ids.iter().enumerate() {
            if rows.insert(id.clone(), i).is_some() {
                return Err(Error::DuplicateImageId(id.clone()));
            }
        }
        Ok(PredictionSet {
            info,
            image_ids,
            scores,
            rows,
        })
    }

    /// Builds a set from row-major values.
    pub fn from_rows(info: RunInfo, image_ids: Vec<String>, num_classes: usize, values: Vec<f32>) -> Result<Self> {
        let expected = image_ids.len() * num_classes;
        if values.len() != expected {
            return Err(Error::ShapeMismatch(format!(
                "{} values for a {}x{} matrix",
                values.len(),
                image_ids.len(),
                num_classes
            )));
        }
        let scores = Array2::from_shape_vec((image_ids.len(), num_classes), values)
            .map_err(|e| Error::ShapeMismatch(e.to_string()))?;
        PredictionSet::new(info, image_ids, scores)
    }

    /// Checks that this set can be analysed against `manifest`.
    pub fn validate_against(&self, manifest: &DatasetManifest) -> Result<()> {
        if self.info.dataset_id != manifest.dataset_id() {
            return Err(Error::DatasetIdMismatch {
                expected: manifest.dataset_id().to_string(),
                found: self.info.dataset_id.clone(),
            });
        }
        if self.num_classes() != manifest.num_classes() {
            return Err(Error::ShapeMismatch(format!(
                "run {} has {} classes, manifest has {}",
                self.info.model_id,
                self.num_classes(),
                manifest.num_classes()
            )));
        }
        if let Some(id) = self.image_ids.iter().find(|id| !manifest.contains(id)) {
            return Err(Error::UnknownImageId(id.clone()));
        }
        Ok(())
    }

    pub fn info(&self) -> &RunInfo {
        &self.info
    }

    pub fn model_id(&self) -> &str {
        &self.info.model_id
    }

    pub fn method_id(&self) -> &str {
        &self.info.method_id
    }

    pub fn replicate_index(&self) -> u32 {
        self.info.replicate_index
    }

    pub fn dataset_id(&self) -> &str {
        &self.info.dataset_id
    }

    pub fn image_ids(&self) -> &[String] {
        &self.image_ids
    }

    pub fn scores(&self) -> &Array2<f32> {
        &self.scores
    }

    pub fn num_images(&self) -> usize {
        self.scores.nrows()
    }

    pub fn num_classes(&self) -> usize {
        self.scores.ncols()
    }

    pub fn contains(&self, image_id: &str) -> bool {
        self.rows.contains_key(image_id)
    }

    pub fn row_of(&self, image_id: &str) -> Option<usize> {
        self.rows.get(image_id).copied()
    }

    /// Score row for `image_id`.
    pub fn row(&self, image_id: &str) -> Option<&[f32]> {
        let r = self.row_of(image_id)?;
        Some(self.row_at(r))
    }

    pub fn row_at(&self, row: usize) -> &[f32] {
        let c = self.num_classes();
        &self.scores.as_slice().expect("standard layout")[row * c..(row + 1) * c]
    }

    /// Row for `image_id` or a `MissingImageCoverage` error naming this run.
    pub fn covered_row(&self, image_id: &str) -> Result<&[f32]> {
        self.row(image_id).ok_or_else(|| Error::MissingImageCoverage {
            run: self.info.model_id.clone(),
            image: image_id.to_string(),
        })
    }

    /// Bit-level equality: metadata, row order and raw score bit patterns.
    pub fn bit_identical(&self, other: &PredictionSet) -> bool {
        self.info == other.info
            && self.image_ids == other.image_ids
            && self.scores.shape() == other.scores.shape()
            && self
                .scores
                .iter()
                .zip(other.scores.iter())
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

impl PartialEq for PredictionSet {
    fn eq(&self, other: &Self) -> bool {
        self.bit_identical(other)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn info() -> RunInfo {
        RunInfo {
            model_id: "m0".into(),
            method_id: "wsdan".into(),
            replicate_index: 0,
            dataset_id: "d".into(),
        }
    }

    #[test]
    fn rejects_nan_with_position() {
        let err = PredictionSet::from_rows(info(), vec!["a".into(), "b".into()], 2, vec![0.0, 1.0, 2.0, f32::NAN])
            .unwrap_err();
        assert!(matches!(err, Error::NonFiniteScore { row: 1, column: 1 }));
        let err = PredictionSet::from_rows(info(), vec!["a".into()], 2, vec![f32::INFINITY, 0.0]).unwrap_err();
        assert!(matches!(err, Error::NonFiniteScore { row: 0, column: 0 }));
    }

    #[test]
    fn rejects_duplicate_ids_and_bad_shapes() {
        let err = PredictionSet::from_rows(info(), vec!["a".into(), "a".into()], 2, vec![0.0; 4]).unwrap_err();
        assert!(matches!(err, Error::DuplicateImageId(id) if id == "a"));
        let err = PredictionSet::from_rows(info(), vec!["a".into()], 2, vec![0.0; 3]).unwrap_err();
        assert!(matches!(err, Error::ShapeMismatch(_)));
    }

    #[test]
    fn rows_follow_id_order() {
        let ps = PredictionSet::from_rows(info(), vec!["b".into(), "a".into()], 3, (0..6).map(|v| v as f32).collect())
            .unwrap();
        assert_eq!(ps.row("a").unwrap(), &[3.0, 4.0, 5.0]);
        assert_eq!(ps.row("b").unwrap(), &[0.0, 1.0, 2.0]);
        assert!(matches!(ps.covered_row("c"), Err(Error::MissingImageCoverage { .. })));
    }

    #[test]
    fn negative_zero_is_not_bit_identical_to_zero() {
        let a = PredictionSet::from_rows(info(), vec!["a".into()], 2, vec![0.0, 1.0]).unwrap();
        let b = PredictionSet::from_rows(info(), vec!["a".into()], 2, vec![-0.0, 1.0]).unwrap();
        assert!(!a.bit_identical(&b));
    }
}
