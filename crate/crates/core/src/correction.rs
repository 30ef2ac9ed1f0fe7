//! Applying corrected labels to a manifest.
//!
//! Corrections name classes, not indices. A correction whose class is in the
//! vocabulary relabels the image; one whose class is not drops the image.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DatasetManifest, ImageSet, LabelCorrectionTable, PredictionSet};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrectionOutcome {
    pub manifest: DatasetManifest,
    pub dropped: Vec<String>,
    pub relabeled: Vec<String>,
}

/// The id lists of a [`CorrectionOutcome`], as written by `remap --report`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrectionReport {
    pub source_dataset_id: String,
    pub corrected_dataset_id: String,
    pub correction_source: String,
    pub dropped: Vec<String>,
    pub relabeled: Vec<String>,
    pub remaining: usize,
}

impl CorrectionOutcome {
    pub fn report(&self, source: &DatasetManifest, table: &LabelCorrectionTable) -> CorrectionReport {
        CorrectionReport {
            source_dataset_id: source.dataset_id().to_string(),
            corrected_dataset_id: self.manifest.dataset_id().to_string(),
            correction_source: table.source.clone(),
            dropped: self.dropped.clone(),
            relabeled: self.relabeled.clone(),
            remaining: self.manifest.len(),
        }
    }
}

/// Applies `table` to `manifest`. The new dataset id is the old one plus
/// `"++"`. `relabeled` lists only images whose label index changed; a
/// correction that names the current class is a no-op. Both lists are sorted.
pub fn apply_corrections(manifest: &DatasetManifest, table: &LabelCorrectionTable) -> Result<CorrectionOutcome> {
    if let Some(unknown) = table.corrections.keys().find(|id| !manifest.contains(id)) {
        return Err(Error::UnknownImageId(unknown.clone()));
    }
    let vocab = manifest.vocabulary();
    let mut dropped = Vec::new();
    let mut relabeled = Vec::new();
    let mut records = Vec::with_capacity(manifest.len());
    for rec in manifest.records() {
        let Some(name) = table.corrections.get(&rec.image_id) else {
            records.push(rec.clone());
            continue;
        };
        match vocab.index_of(name) {
            None => dropped.push(rec.image_id.clone()),
            Some(idx) => {
                let mut updated = rec.clone();
                if idx != rec.label_index {
                    updated.label_index = idx;
                    relabeled.push(rec.image_id.clone());
                }
                records.push(updated);
            }
        }
    }
    dropped.sort();
    relabeled.sort();
    let manifest = manifest.with_records(format!("{}++", manifest.dataset_id()), records)?;
    Ok(CorrectionOutcome {
        manifest,
        dropped,
        relabeled,
    })
}

/// Keeps only the rows for `kept`, preserving row order and metadata.
pub fn restrict_predictions(ps: &PredictionSet, kept: &ImageSet) -> Result<PredictionSet> {
    if let Some(unknown) = kept.iter().find(|id| !ps.contains(id)) {
        return Err(Error::UnknownImageId(unknown.clone()));
    }
    let c = ps.num_classes();
    let mut ids = Vec::with_capacity(kept.len());
    let mut values = Vec::with_capacity(kept.len() * c);
    for (r, id) in ps.image_ids().iter().enumerate() {
        if kept.contains(id) {
            ids.push(id.clone());
            values.extend_from_slice(ps.row_at(r));
        }
    }
    PredictionSet::from_rows(ps.info().clone(), ids, c, values)
}

/// A prediction set re-tagged for a corrected dataset and restricted to the
/// images that survived correction.
pub fn retarget_predictions(ps: &PredictionSet, corrected: &DatasetManifest) -> Result<PredictionSet> {
    let kept: ImageSet = ps
        .image_ids()
        .iter()
        .filter(|id| corrected.contains(id))
        .cloned()
        .collect();
    let restricted = restrict_predictions(ps, &kept)?;
    let mut info = restricted.info().clone();
    info.dataset_id = corrected.dataset_id().to_string();
    PredictionSet::new(info, restricted.image_ids().to_vec(), restricted.scores().clone())
}
