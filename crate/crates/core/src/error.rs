use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the toolkit can report. Variants name the offending record
/// so that a bad input can be located without a debugger.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed JSON in {path}: {message}")]
    MalformedJson { path: PathBuf, message: String },

    #[error("unsupported format in {path}: {message}")]
    UnsupportedFormat { path: PathBuf, message: String },

    #[error("I/O failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("duplicate image id {0:?}")]
    DuplicateImageId(String),

    #[error("image {image_id:?} has label index {label_index}, but there are only {num_classes} classes")]
    LabelOutOfRange {
        image_id: String,
        label_index: usize,
        num_classes: usize,
    },

    #[error("duplicate class name {0:?}")]
    DuplicateClassName(String),

    #[error("a vocabulary needs at least 2 classes, got {0}")]
    TooFewClasses(usize),

    #[error("scores.bin holds {actual} bytes, expected {expected}")]
    SizeMismatch { expected: u64, actual: u64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("unknown image id {0:?}")]
    UnknownImageId(String),

    #[error("non-finite score at row {row}, column {column}")]
    NonFiniteScore { row: usize, column: usize },

    #[error("prediction set belongs to dataset {found:?}, expected {expected:?}")]
    DatasetIdMismatch { expected: String, found: String },

    #[error("invalid error class {0:?}")]
    InvalidErrorClass(String),

    #[error("journal {path} line {line}: {message}")]
    MalformedJournal {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("run {run:?} has no prediction for image {image:?}")]
    MissingImageCoverage { run: String, image: String },

    #[error("at least one run is required")]
    NoRuns,

    #[error("{0} methods requested; at most 16 are supported")]
    TooManyMethods(usize),

    #[error("duplicate method id {0:?}")]
    DuplicateMethod(String),

    #[error("image set is empty")]
    EmptyImageSet,

    #[error("method {method:?} supplies {found} replicates, expected {expected}")]
    ReplicateCountMismatch {
        method: String,
        expected: usize,
        found: usize,
    },

    #[error("port {0} is already in use")]
    PortInUse(u16),

    #[error("images root {0} is not a directory")]
    MissingImagesRoot(PathBuf),

    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable code, used in HTTP error bodies.
    pub fn code(&self) -> &'static str {
        match self {
            Error::MalformedJson { .. } => "malformed_json",
            Error::UnsupportedFormat { .. } => "unsupported_format",
            Error::Io { .. } => "io_failure",
            Error::DuplicateImageId(_) => "duplicate_image_id",
            Error::LabelOutOfRange { .. } => "label_out_of_range",
            Error::DuplicateClassName(_) => "duplicate_class_name",
            Error::TooFewClasses(_) => "too_few_classes",
            Error::SizeMismatch { .. } => "size_mismatch",
            Error::ShapeMismatch(_) => "shape_mismatch",
            Error::UnknownImageId(_) => "unknown_image_id",
            Error::NonFiniteScore { .. } => "non_finite_score",
            Error::DatasetIdMismatch { .. } => "dataset_id_mismatch",
            Error::InvalidErrorClass(_) => "invalid_error_class",
            Error::MalformedJournal { .. } => "malformed_journal",
            Error::MissingImageCoverage { .. } => "missing_image_coverage",
            Error::NoRuns => "no_runs",
            Error::TooManyMethods(_) => "too_many_methods",
            Error::DuplicateMethod(_) => "duplicate_method",
            Error::EmptyImageSet => "empty_image_set",
            Error::ReplicateCountMismatch { .. } => "replicate_count_mismatch",
            Error::PortInUse(_) => "port_in_use",
            Error::MissingImagesRoot(_) => "missing_images_root",
            Error::Invalid(_) => "invalid",
        }
    }
}
