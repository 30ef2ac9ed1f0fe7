use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, SecondsFormat, SubsecRound, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// The closed error taxonomy for hard images. Declaration order is the
/// triage shortcut order (1..=5).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ErrorClass {
    SimilarClassConfusion,
    NonTargetSubject,
    InadequateRepresentation,
    PoorQuality,
    Other,
}

impl ErrorClass {
    pub const ALL: [ErrorClass; 5] = [
        ErrorClass::SimilarClassConfusion,
        ErrorClass::NonTargetSubject,
        ErrorClass::InadequateRepresentation,
        ErrorClass::PoorQuality,
        ErrorClass::Other,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ErrorClass::SimilarClassConfusion => "SimilarClassConfusion",
            ErrorClass::NonTargetSubject => "NonTargetSubject",
            ErrorClass::InadequateRepresentation => "InadequateRepresentation",
            ErrorClass::PoorQuality => "PoorQuality",
            ErrorClass::Other => "Other",
        }
    }

    /// Human-readable label for charts.
    pub fn label(&self) -> &'static str {
        match self {
            ErrorClass::SimilarClassConfusion => "Similar Class Confusion",
            ErrorClass::NonTargetSubject => "Non-target Subject",
            ErrorClass::InadequateRepresentation => "Inadequate Representation",
            ErrorClass::PoorQuality => "Poor Quality",
            ErrorClass::Other => "Other",
        }
    }

    pub fn shortcut(&self) -> u8 {
        *self as u8 + 1
    }
}

impl fmt::Display for ErrorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ErrorClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ErrorClass::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::InvalidErrorClass(s.to_string()))
    }
}

/// A human-assigned error class for one image.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorAnnotation {
    pub image_id: String,
    pub error_class: ErrorClass,
    pub annotator: String,
    #[serde(with = "timestamp_ms")]
    pub timestamp: DateTime<Utc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ErrorAnnotation {
    /// Builds an annotation; the timestamp is truncated to milliseconds.
    pub fn new(
        image_id: impl Into<String>,
        error_class: ErrorClass,
        annotator: impl Into<String>,
        timestamp: DateTime<Utc>,
        note: Option<String>,
    ) -> Self {
        ErrorAnnotation {
            image_id: image_id.into(),
            error_class,
            annotator: annotator.into(),
            timestamp: timestamp.trunc_subsecs(3),
            note,
        }
    }
}

/// An annotation as submitted by a client: unvalidated class, no timestamp.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationDraft {
    pub image_id: String,
    pub error_class: String,
    pub annotator: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl AnnotationDraft {
    pub fn stamp(self, at: DateTime<Utc>) -> Result<ErrorAnnotation> {
        let class: ErrorClass = self.error_class.parse()?;
        Ok(ErrorAnnotation::new(self.image_id, class, self.annotator, at, self.note))
    }
}

/// RFC 3339, UTC, millisecond precision: `2026-10-16T09:30:00.125Z`.
pub(crate) mod timestamp_ms {
    use super::*;

    pub fn serialize<S: Serializer>(t: &DateTime<Utc>, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&t.to_rfc3339_opts(SecondsFormat::Millis, true))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<DateTime<Utc>, D::Error> {
        let s = String::deserialize(d)?;
        DateTime::parse_from_rfc3339(&s)
            .map(|t| t.with_timezone(&Utc).trunc_subsecs(3))
            .map_err(serde::de::Error::custom)
    }
}
