//! Domain types shared by every analysis: manifests, prediction sets,
//! overlap partitions, ensemble results, corrections and annotations.
//!
//! Class identity is positional: a class is an index into the manifest's
//! [`ClassVocabulary`]. Scores are stored as `f32`; everything derived from
//! them is computed in `f64` or exactly.

mod annotation;
mod manifest;
mod prediction;
mod results;

use std::collections::BTreeSet;

pub use annotation::{AnnotationDraft, ErrorAnnotation, ErrorClass};
pub use manifest::{ClassVocabulary, DatasetManifest, ImageRecord, Split};
pub use prediction::{PredictionSet, RunInfo};
pub use results::{
    EnsembleResult, EnsembleRule, LabelCorrectionTable, OverlapPartition, SubsetCorrectnessTable,
};

/// An ordered set of image ids. Ordering is lexicographic so that every
/// iteration over images is deterministic.
pub type ImageSet = BTreeSet<String>;
