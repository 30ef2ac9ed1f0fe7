use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize};

use super::ImageSet;
use crate::error::{Error, Result};

/// Ordered class names. Index `i` is class `i` in every score matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassVocabulary {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl ClassVocabulary {
    pub fn new(names: Vec<String>) -> Result<Self> {
        if names.len() < 2 {
            return Err(Error::TooFewClasses(names.len()));
        }
        let mut index = HashMap::with_capacity(names.len());
        for (i, name) in names.iter().enumerate() {
            if index.insert(name.clone(), i).is_some() {
                return Err(Error::DuplicateClassName(name.clone()));
            }
        }
        Ok(ClassVocabulary { names, index })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, index: usize) -> Option<&str> {
        self.names.get(index).map(String::as_str)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }
}

/// Dataset split. Anything other than `train` or `test` is evaluation-only
/// data and collapses to [`Split::Extra`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
    Extra,
}

impl Split {
    pub fn parse(s: &str) -> Split {
        match s {
            "train" => Split::Train,
            "test" => Split::Test,
            _ => Split::Extra,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
            Split::Extra => "extra",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Split {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(Split::parse(&s))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageRecord {
    pub image_id: String,
    pub label_index: usize,
    pub split: Split,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_path: Option<String>,
}

/// A validated dataset: vocabulary plus uniquely identified, in-range records.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetManifest {
    dataset_id: String,
    vocabulary: ClassVocabulary,
    records: Vec<ImageRecord>,
    index: HashMap<String, usize>,
}

impl DatasetManifest {
    pub fn new(
        dataset_id: impl Into<String>,
        vocabulary: ClassVocabulary,
        records: Vec<ImageRecord>,
    ) -> Result<Self> {
        let mut index = HashMap::with_capacity(records.len());
        for (i, rec) in records.iter().enumerate() {
            if rec.label_index >= vocabulary.len() {
                return Err(Error::LabelOutOfRange {
                    image_id: rec.image_id.clone(),
                    label_index: rec.label_index,
                    num_classes: vocabulary.len(),
                });
            }
            if index.insert(rec.image_id.clone(), i).is_some() {
                return Err(Error::DuplicateImageId(rec.image_id.clone()));
            }
        }
        Ok(DatasetManifest {
            dataset_id: dataset_id.into(),
            vocabulary,
            records,
            index,
        })
    }

    pub fn dataset_id(&self) -> &str {
        &self.dataset_id
    }

    pub fn vocabulary(&self) -> &ClassVocabulary {
        &self.vocabulary
    }

    pub fn num_classes(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn records(&self) -> &[ImageRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn contains(&self, image_id: &str) -> bool {
        self.index.contains_key(image_id)
    }

    pub fn record(&self, image_id: &str) -> Option<&ImageRecord> {
        self.index.get(image_id).map(|&i| &self.records[i])
    }

    pub fn label_of(&self, image_id: &str) -> Option<usize> {
        self.record(image_id).map(|r| r.label_index)
    }

    /// Ground truth for `image_id`, or `UnknownImageId`.
    pub fn truth(&self, image_id: &str) -> Result<usize> {
        self.label_of(image_id)
            .ok_or_else(|| Error::UnknownImageId(image_id.to_string()))
    }

    pub fn split_ids(&self, split: Split) -> ImageSet {
        self.records
            .iter()
            .filter(|r| r.split == split)
            .map(|r| r.image_id.clone())
            .collect()
    }

    pub fn split_counts(&self) -> BTreeMap<Split, usize> {
        let mut counts = BTreeMap::new();
        for r in &self.records {
            *counts.entry(r.split).or_insert(0) += 1;
        }
        counts
    }

    /// Copy of this manifest with a different id and record list, re-validated.
    pub fn with_records(&self, dataset_id: impl Into<String>, records: Vec<ImageRecord>) -> Result<Self> {
        DatasetManifest::new(dataset_id, self.vocabulary.clone(), records)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vocab(names: &[&str]) -> Result<ClassVocabulary> {
        ClassVocabulary::new(names.iter().map(|s| s.to_string()).collect())
    }

    fn rec(id: &str, label: usize, split: Split) -> ImageRecord {
        ImageRecord {
            image_id: id.into(),
            label_index: label,
            split,
            image_path: None,
        }
    }

    #[test]
    fn vocabulary_rules() {
        assert!(matches!(vocab(&["a"]), Err(Error::TooFewClasses(1))));
        assert!(matches!(vocab(&["a", "a"]), Err(Error::DuplicateClassName(n)) if n == "a"));
        let v = vocab(&["a", "b", "c"]).unwrap();
        for i in 0..v.len() {
            assert_eq!(v.index_of(v.name(i).unwrap()), Some(i));
        }
        assert_eq!(v.index_of("z"), None);
    }

    #[test]
    fn manifest_rejects_bad_records() {
        let v = vocab(&["a", "b"]).unwrap();
        let dup = vec![rec("img1", 0, Split::Test), rec("img1", 1, Split::Test)];
        assert!(matches!(
            DatasetManifest::new("d", v.clone(), dup),
            Err(Error::DuplicateImageId(id)) if id == "img1"
        ));
        let oob = vec![rec("img1", 2, Split::Test)];
        assert!(matches!(
            DatasetManifest::new("d", v, oob),
            Err(Error::LabelOutOfRange { label_index: 2, num_classes: 2, .. })
        ));
    }

    #[test]
    fn unknown_splits_collapse_to_extra() {
        let s: Split = serde_json::from_str("\"icub100\"").unwrap();
        assert_eq!(s, Split::Extra);
        assert_eq!(serde_json::to_string(&s).unwrap(), "\"extra\"");
        assert_eq!(Split::parse("train"), Split::Train);
    }

    #[test]
    fn split_queries() {
        let v = vocab(&["a", "b"]).unwrap();
        let m = DatasetManifest::new(
            "d",
            v,
            vec![
                rec("x", 0, Split::Train),
                rec("y", 1, Split::Test),
                rec("z", 1, Split::Test),
            ],
        )
        .unwrap();
        assert_eq!(m.split_ids(Split::Test).len(), 2);
        assert_eq!(m.split_counts()[&Split::Train], 1);
        assert_eq!(m.truth("z").unwrap(), 1);
        assert!(matches!(m.truth("w"), Err(Error::UnknownImageId(_))));
    }
}
