//! Error-class prevalence over the hard subset.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::model::{ErrorAnnotation, ErrorClass, ImageSet};
use crate::rational::{self, Rational};

/// Final annotation per image: latest timestamp wins, and among equal
/// timestamps the later journal entry wins.
pub fn resolve_annotations(entries: &[ErrorAnnotation]) -> BTreeMap<String, ErrorAnnotation> {
    let mut out: BTreeMap<String, ErrorAnnotation> = BTreeMap::new();
    for e in entries {
        match out.get(&e.image_id) {
            Some(prev) if prev.timestamp > e.timestamp => {}
            _ => {
                out.insert(e.image_id.clone(), e.clone());
            }
        }
    }
    out
}

/// An image whose annotators' latest verdicts differ.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Disagreement {
    pub image_id: String,
    pub by_annotator: BTreeMap<String, ErrorClass>,
}

pub fn disagreements(entries: &[ErrorAnnotation]) -> Vec<Disagreement> {
    let mut latest: BTreeMap<&str, BTreeMap<&str, &ErrorAnnotation>> = BTreeMap::new();
    for e in entries {
        let per_image = latest.entry(&e.image_id).or_default();
        match per_image.get(e.annotator.as_str()) {
            Some(prev) if prev.timestamp > e.timestamp => {}
            _ => {
                per_image.insert(&e.annotator, e);
            }
        }
    }
    latest
        .into_iter()
        .filter_map(|(image, per)| {
            let classes: BTreeSet<ErrorClass> = per.values().map(|a| a.error_class).collect();
            (classes.len() > 1).then(|| Disagreement {
                image_id: image.to_string(),
                by_annotator: per.iter().map(|(k, a)| (k.to_string(), a.error_class)).collect(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrevalenceRow {
    pub error_class: ErrorClass,
    pub count: u64,
    /// Share of annotated hard images, in percent.
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prevalence {
    pub hard_images: u64,
    pub annotated: u64,
    /// Hard images with no annotation yet.
    pub remainder: u64,
    pub rows: Vec<PrevalenceRow>,
    /// Annotated images outside the hard set; excluded from the counts.
    pub stray: Vec<String>,
}

impl Prevalence {
    pub fn row(&self, class: ErrorClass) -> &PrevalenceRow {
        self.rows
            .iter()
            .find(|r| r.error_class == class)
            .expect("every class has a row")
    }

    /// `percent` of `class` rendered with two decimals, rounded half-up on
    /// the exact fraction.
    pub fn percent_text(&self, class: ErrorClass) -> String {
        if self.annotated == 0 {
            return "0.00".into();
        }
        rational::percent_fixed(&Rational::new(self.row(class).count, self.annotated), 2)
    }
}

/// Per-class counts and shares over the annotated members of `hard`.
pub fn prevalence(resolved: &BTreeMap<String, ErrorAnnotation>, hard: &ImageSet) -> Prevalence {
    let mut counts = [0u64; 5];
    let mut stray = Vec::new();
    for (id, a) in resolved {
        if hard.contains(id) {
            counts[a.error_class as usize] += 1;
        } else {
            stray.push(id.clone());
        }
    }
    let annotated: u64 = counts.iter().sum();
    let rows = ErrorClass::ALL
        .iter()
        .map(|&class| {
            let count = counts[class as usize];
            let percent = if annotated == 0 {
                0.0
            } else {
                count as f64 * 100.0 / annotated as f64
            };
            PrevalenceRow {
                error_class: class,
                count,
                percent,
            }
        })
        .collect();
    Prevalence {
        hard_images: hard.len() as u64,
        annotated,
        remainder: hard.len() as u64 - annotated,
        rows,
        stray,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{TimeZone, Utc};

    fn ann(id: &str, class: ErrorClass, who: &str, secs: u32) -> ErrorAnnotation {
        ErrorAnnotation::new(id, class, who, Utc.with_ymd_and_hms(2026, 3, 1, 12, 0, secs).unwrap(), None)
    }

    fn hard(ids: &[&str]) -> ImageSet {
        ids.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn single_entries_resolve_to_themselves() {
        let entries = vec![ann("a", ErrorClass::Other, "x", 1), ann("b", ErrorClass::PoorQuality, "x", 2)];
        let r = resolve_annotations(&entries);
        assert_eq!(r.len(), 2);
        assert_eq!(r["a"], entries[0]);
        assert_eq!(r["b"], entries[1]);
    }

    #[test]
    fn newer_entry_wins_and_ties_go_to_later_position() {
        let entries = vec![
            ann("a", ErrorClass::Other, "x", 5),
            ann("a", ErrorClass::PoorQuality, "y", 9),
            ann("a", ErrorClass::NonTargetSubject, "z", 3),
        ];
        assert_eq!(resolve_annotations(&entries)["a"].error_class, ErrorClass::PoorQuality);
        let tie = vec![ann("a", ErrorClass::Other, "x", 5), ann("a", ErrorClass::PoorQuality, "y", 5)];
        assert_eq!(resolve_annotations(&tie)["a"].error_class, ErrorClass::PoorQuality);
    }

    #[test]
    fn one_per_class_gives_quarters() {
        let entries = vec![
            ann("a", ErrorClass::SimilarClassConfusion, "x", 1),
            ann("b", ErrorClass::NonTargetSubject, "x", 1),
            ann("c", ErrorClass::InadequateRepresentation, "x", 1),
            ann("d", ErrorClass::PoorQuality, "x", 1),
        ];
        let p = prevalence(&resolve_annotations(&entries), &hard(&["a", "b", "c", "d"]));
        for class in &ErrorClass::ALL[..4] {
            assert_eq!(p.row(*class).percent, 25.0);
            assert_eq!(p.percent_text(*class), "25.00");
        }
        assert_eq!(p.row(ErrorClass::Other).count, 0);
        assert_eq!(p.remainder, 0);
    }

    #[test]
    fn no_annotations_leaves_everything_in_remainder() {
        let p = prevalence(&BTreeMap::new(), &hard(&["a", "b", "c"]));
        assert!(p.rows.iter().all(|r| r.count == 0 && r.percent == 0.0));
        assert_eq!(p.remainder, 3);
        assert_eq!(p.annotated, 0);
    }

    #[test]
    fn two_other_of_three_hundred() {
        let entries: Vec<_> = (0..300)
            .map(|i| {
                let class = if i < 2 { ErrorClass::Other } else { ErrorClass::ALL[i % 4] };
                ann(&format!("h{i:03}"), class, "x", 0)
            })
            .collect();
        let ids: ImageSet = (0..300).map(|i| format!("h{i:03}")).collect();
        let p = prevalence(&resolve_annotations(&entries), &ids);
        assert_eq!(p.row(ErrorClass::Other).count, 2);
        assert_eq!(p.percent_text(ErrorClass::Other), "0.67");
        let total: f64 = p.rows.iter().map(|r| r.percent).sum();
        assert!((total - 100.0).abs() <= 0.01);
    }

    #[test]
    fn stray_annotations_are_reported_not_counted() {
        let entries = vec![ann("a", ErrorClass::Other, "x", 1), ann("zz", ErrorClass::Other, "x", 1)];
        let p = prevalence(&resolve_annotations(&entries), &hard(&["a", "b"]));
        assert_eq!(p.stray, ["zz"]);
        assert_eq!(p.annotated, 1);
        assert_eq!(p.remainder, 1);
    }

    #[test]
    fn disagreement_uses_each_annotators_latest() {
        let entries = vec![
            ann("a", ErrorClass::Other, "x", 1),
            ann("a", ErrorClass::PoorQuality, "y", 2),
            ann("a", ErrorClass::PoorQuality, "x", 3),
            ann("b", ErrorClass::Other, "x", 1),
            ann("b", ErrorClass::PoorQuality, "y", 2),
        ];
        let d = disagreements(&entries);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].image_id, "b");
    }
}
