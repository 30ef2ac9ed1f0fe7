use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Accuracy;

/// Per-image overlap labels: `o_i` is how many of the `n` runs predict the
/// ground-truth class of image `i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawPartition")]
pub struct OverlapPartition {
    n: usize,
    runs: Vec<String>,
    labels: BTreeMap<String, usize>,
    group_sizes: Vec<u64>,
}

#[derive(Deserialize)]
struct RawPartition {
    n: usize,
    #[serde(default)]
    runs: Vec<String>,
    labels: BTreeMap<String, usize>,
    group_sizes: Vec<u64>,
}

impl TryFrom<RawPartition> for OverlapPartition {
    type Error = Error;

    fn try_from(raw: RawPartition) -> Result<Self> {
        let p = OverlapPartition::from_labels(raw.n, raw.runs, raw.labels)?;
        if p.group_sizes != raw.group_sizes {
            return Err(Error::Invalid("group_sizes disagree with labels".into()));
        }
        Ok(p)
    }
}

impl OverlapPartition {
    pub fn from_labels(n: usize, runs: Vec<String>, labels: BTreeMap<String, usize>) -> Result<Self> {
        if !runs.is_empty() && runs.len() != n {
            return Err(Error::Invalid(format!("{} run ids for n = {}", runs.len(), n)));
        }
        let mut group_sizes = vec![0u64; n + 1];
        for (id, &o) in &labels {
            if o > n {
                return Err(Error::Invalid(format!("overlap {o} for {id:?} exceeds n = {n}")));
            }
            group_sizes[o] += 1;
        }
        Ok(OverlapPartition {
            n,
            runs,
            labels,
            group_sizes,
        })
    }

    /// Number of runs considered.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn runs(&self) -> &[String] {
        &self.runs
    }

    pub fn labels(&self) -> &BTreeMap<String, usize> {
        &self.labels
    }

    pub fn label(&self, image_id: &str) -> Option<usize> {
        self.labels.get(image_id).copied()
    }

    pub fn group_sizes(&self) -> &[u64] {
        &self.group_sizes
    }

    pub fn num_images(&self) -> u64 {
        self.labels.len() as u64
    }

    /// Ids with overlap exactly `o`, lexicographically sorted. Empty when `o > n`.
    pub fn ids_with(&self, o: usize) -> Vec<String> {
        self.labels
            .iter()
            .filter(|&(_, &v)| v == o)
            .map(|(id, _)| id.clone())
            .collect()
    }

    /// Images no run classifies correctly.
    pub fn hard(&self) -> Vec<String> {
        self.ids_with(0)
    }

    /// Images every run classifies correctly.
    pub fn easy(&self) -> Vec<String> {
        self.ids_with(self.n)
    }
}

/// Counts of images correct by exactly each subset of methods.
/// Subset `S` is a bitmask: bit `j` set means `methods[j]` is in `S`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSubsetTable", into = "RawSubsetTable")]
pub struct SubsetCorrectnessTable {
    methods: Vec<String>,
    counts: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct RawSubsetTable {
    methods: Vec<String>,
    counts: Vec<SubsetCount>,
}

#[derive(Serialize, Deserialize)]
struct SubsetCount {
    mask: u32,
    subset: Vec<String>,
    count: u64,
}

impl From<SubsetCorrectnessTable> for RawSubsetTable {
    fn from(t: SubsetCorrectnessTable) -> Self {
        let counts = (0..t.counts.len() as u32)
            .map(|mask| SubsetCount {
                mask,
                subset: t.subset_names(mask).into_iter().map(String::from).collect(),
                count: t.counts[mask as usize],
            })
            .collect();
        RawSubsetTable {
            methods: t.methods,
            counts,
        }
    }
}

impl TryFrom<RawSubsetTable> for SubsetCorrectnessTable {
    type Error = Error;

    fn try_from(raw: RawSubsetTable) -> Result<Self> {
        let size = 1usize << raw.methods.len();
        if raw.counts.len() != size {
            return Err(Error::Invalid(format!("expected {size} subset counts, got {}", raw.counts.len())));
        }
        let mut counts = vec![0; size];
        for (i, c) in raw.counts.iter().enumerate() {
            if c.mask as usize != i {
                return Err(Error::Invalid("subset counts out of mask order".into()));
            }
            counts[i] = c.count;
        }
        SubsetCorrectnessTable::new(raw.methods, counts)
    }
}

impl SubsetCorrectnessTable {
    pub fn new(methods: Vec<String>, counts: Vec<u64>) -> Result<Self> {
        if methods.len() > 16 {
            return Err(Error::TooManyMethods(methods.len()));
        }
        if counts.len() != 1 << methods.len() {
            return Err(Error::Invalid("subset count vector has the wrong length".into()));
        }
        Ok(SubsetCorrectnessTable { methods, counts })
    }

    pub fn methods(&self) -> &[String] {
        &self.methods
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn count(&self, mask: u32) -> u64 {
        self.counts[mask as usize]
    }

    /// Images correct by no method.
    pub fn empty_count(&self) -> u64 {
        self.counts[0]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn subset_names(&self, mask: u32) -> Vec<&str> {
        self.methods
            .iter()
            .enumerate()
            .filter(|(j, _)| mask & (1 << j) != 0)
            .map(|(_, m)| m.as_str())
            .collect()
    }

    /// Bitmask for a list of method ids, if all are known.
    pub fn mask_of(&self, names: &[&str]) -> Option<u32> {
        names.iter().try_fold(0u32, |mask, n| {
            let j = self.methods.iter().position(|m| m == n)?;
            Some(mask | 1 << j)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleRule {
    /// Majority vote over member argmax labels.
    Vote,
    /// Argmax of the mean softmax probability vector.
    CpAvg,
}

impl EnsembleRule {
    pub fn as_str(&self) -> &'static str {
        match self {
            EnsembleRule::Vote => "vote",
            EnsembleRule::CpAvg => "cp_avg",
        }
    }
}

impl fmt::Display for EnsembleRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub rule: EnsembleRule,
    pub member_run_ids: Vec<String>,
    pub predictions: BTreeMap<String, usize>,
    pub accuracy: Accuracy,
}

/// Corrected class names keyed by image id, as read from `corrections.json`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelCorrectionTable {
    pub source: String,
    pub corrections: BTreeMap<String, String>,
}
