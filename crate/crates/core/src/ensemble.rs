//! Vote and probability-average ensembles over model runs.
//!
//! Both rules work from per-member softmax probabilities computed in `f64`.
//! Per-class probability sums are accumulated in sorted order so that the
//! outcome, tie-breaks included, does not depend on member order.

use std::collections::BTreeMap;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DatasetManifest, EnsembleResult, EnsembleRule, ImageSet, OverlapPartition, PredictionSet};
use crate::overlap::{argmax, MAX_METHODS};
use crate::rational::{self, Accuracy, Rational};

/// Numerically stable softmax of one score row.
pub fn softmax_row(row: &[f32]) -> Vec<f64> {
    let max = row.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v as f64));
    let exps: Vec<f64> = row.iter().map(|&v| (v as f64 - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

pub fn softmax_rows(scores: &Array2<f32>) -> Array2<f64> {
    let mut out = Array2::zeros(scores.raw_dim());
    for (src, mut dst) in scores.rows().into_iter().zip(out.rows_mut()) {
        let row: Vec<f32> = src.iter().copied().collect();
        for (d, p) in dst.iter_mut().zip(softmax_row(&row)) {
            *d = p;
        }
    }
    out
}

/// One run restricted to a fixed image order: top-1 votes and softmax rows.
struct Member {
    votes: Vec<usize>,
    probs: Vec<f64>,
}

impl Member {
    fn prepare(run: &PredictionSet, images: &[&str]) -> Result<Member> {
        let c = run.num_classes();
        let mut votes = Vec::with_capacity(images.len());
        let mut probs = Vec::with_capacity(images.len() * c);
        for id in images {
            let row = run.covered_row(id)?;
            votes.push(argmax(row));
            probs.extend(softmax_row(row));
        }
        Ok(Member { votes, probs })
    }
}

fn sorted_sum(buf: &mut [f64]) -> f64 {
    buf.sort_by(f64::total_cmp);
    buf.iter().sum()
}

/// Order-independent sum of member probabilities for `class` on image `i`.
fn class_mass(members: &[&Member], i: usize, class: usize, c: usize, buf: &mut Vec<f64>) -> f64 {
    buf.clear();
    buf.extend(members.iter().map(|m| m.probs[i * c + class]));
    sorted_sum(buf)
}

fn predict_one(members: &[&Member], rule: EnsembleRule, i: usize, c: usize) -> usize {
    let mut buf = Vec::with_capacity(members.len());
    match rule {
        EnsembleRule::CpAvg => {
            let mut best = 0;
            let mut best_mass = class_mass(members, i, 0, c, &mut buf);
            for class in 1..c {
                let mass = class_mass(members, i, class, c, &mut buf);
                if mass > best_mass {
                    best = class;
                    best_mass = mass;
                }
            }
            best
        }
        EnsembleRule::Vote => {
            let mut counts = vec![0u32; c];
            for m in members {
                counts[m.votes[i]] += 1;
            }
            let top = *counts.iter().max().expect("at least two classes");
            let mut candidates = (0..c).filter(|&k| counts[k] == top);
            let first = candidates.next().expect("some class has the top count");
            let mut best = first;
            let mut best_mass = None;
            for class in std::iter::once(first).chain(candidates) {
                let mass = class_mass(members, i, class, c, &mut buf);
                if best_mass.is_none_or(|b| mass > b) {
                    best = class;
                    best_mass = Some(mass);
                }
            }
            best
        }
    }
}

fn combine(members: &[&Member], rule: EnsembleRule, num_images: usize, c: usize) -> Vec<usize> {
    (0..num_images)
        .into_par_iter()
        .map(|i| predict_one(members, rule, i, c))
        .collect()
}

fn check_runs(runs: &[&PredictionSet], manifest: &DatasetManifest) -> Result<()> {
    if runs.is_empty() {
        return Err(Error::NoRuns);
    }
    for run in runs {
        if run.num_classes() != manifest.num_classes() {
            return Err(Error::ShapeMismatch(format!(
                "run {} has {} classes, manifest has {}",
                run.model_id(),
                run.num_classes(),
                manifest.num_classes()
            )));
        }
    }
    Ok(())
}

fn truths(manifest: &DatasetManifest, images: &[&str]) -> Result<Vec<usize>> {
    images.iter().map(|id| manifest.truth(id)).collect()
}

fn count_correct(preds: &[usize], truth: &[usize]) -> u64 {
    preds.iter().zip(truth).filter(|(p, t)| p == t).count() as u64
}

/// Ensemble of `runs` under `rule`, evaluated on `images`.
pub fn ensemble(
    rule: EnsembleRule,
    runs: &[&PredictionSet],
    manifest: &DatasetManifest,
    images: &ImageSet,
) -> Result<EnsembleResult> {
    check_runs(runs, manifest)?;
    if images.is_empty() {
        return Err(Error::EmptyImageSet);
    }
    let order: Vec<&str> = images.iter().map(String::as_str).collect();
    let truth = truths(manifest, &order)?;
    let members = runs
        .iter()
        .map(|r| Member::prepare(r, &order))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&Member> = members.iter().collect();
    let preds = combine(&refs, rule, order.len(), manifest.num_classes());
    let accuracy = Accuracy::new(count_correct(&preds, &truth), order.len() as u64);
    Ok(EnsembleResult {
        rule,
        member_run_ids: runs.iter().map(|r| r.model_id().to_string()).collect(),
        predictions: order.iter().map(|s| s.to_string()).zip(preds).collect(),
        accuracy,
    })
}

/// Majority vote over member top-1 labels. Vote ties go to the tied class
/// with the highest mean softmax probability, then to the lowest index.
pub fn vote_ensemble(runs: &[PredictionSet], manifest: &DatasetManifest, images: &ImageSet) -> Result<EnsembleResult> {
    let refs: Vec<&PredictionSet> = runs.iter().collect();
    ensemble(EnsembleRule::Vote, &refs, manifest, images)
}

/// Argmax of the mean member softmax vector, lowest index on ties.
pub fn cp_avg_ensemble(
    runs: &[PredictionSet],
    manifest: &DatasetManifest,
    images: &ImageSet,
) -> Result<EnsembleResult> {
    let refs: Vec<&PredictionSet> = runs.iter().collect();
    ensemble(EnsembleRule::CpAvg, &refs, manifest, images)
}

/// Accuracy of a selector that is right whenever any member is right:
/// `1 - |hard| / |images|`. An empty partition has nothing to miss and
/// yields 1.
pub fn oracle_upper_bound(partition: &OverlapPartition) -> Rational {
    let total = partition.num_images();
    if total == 0 {
        return Rational::from_integer(1);
    }
    Rational::new(total - partition.group_sizes()[0], total)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub mask: u32,
    pub subset: Vec<String>,
    /// Accuracy of the ensemble built from replicate `r` of each method.
    pub replicate_accuracies: Vec<Accuracy>,
    #[serde(with = "rational::serde_rational")]
    pub mean_accuracy: Rational,
}

/// Mean ensemble accuracy for every non-empty subset of methods.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepTable {
    pub rule: EnsembleRule,
    pub methods: Vec<String>,
    pub replicates: usize,
    pub entries: Vec<SweepEntry>,
}

impl SweepTable {
    pub fn mean(&self, mask: u32) -> Option<Rational> {
        self.entries.iter().find(|e| e.mask == mask).map(|e| e.mean_accuracy)
    }

    pub fn as_map(&self) -> BTreeMap<u32, Rational> {
        self.entries.iter().map(|e| (e.mask, e.mean_accuracy)).collect()
    }
}

/// For each non-empty method subset `S` and replicate position `r`, ensembles
/// replicate `r` of every method in `S`; reports the mean over `r`. Pairing by
/// position keeps the `R` ensembles disjoint.
pub fn sweep_subsets(
    runs_by_method: &[(String, Vec<PredictionSet>)],
    manifest: &DatasetManifest,
    images: &ImageSet,
    rule: EnsembleRule,
) -> Result<SweepTable> {
    let grouped: Vec<(String, Vec<&PredictionSet>)> = runs_by_method
        .iter()
        .map(|(m, runs)| (m.clone(), runs.iter().collect()))
        .collect();
    sweep_subsets_ref(&grouped, manifest, images, rule)
}

/// [`sweep_subsets`] over borrowed runs.
pub fn sweep_subsets_ref(
    runs_by_method: &[(String, Vec<&PredictionSet>)],
    manifest: &DatasetManifest,
    images: &ImageSet,
    rule: EnsembleRule,
) -> Result<SweepTable> {
    let k = runs_by_method.len();
    if k == 0 {
        return Err(Error::NoRuns);
    }
    if k > MAX_METHODS {
        return Err(Error::TooManyMethods(k));
    }
    let replicates = runs_by_method[0].1.len();
    if replicates == 0 {
        return Err(Error::NoRuns);
    }
    for (i, (method, runs)) in runs_by_method.iter().enumerate() {
        if runs_by_method[..i].iter().any(|(m, _)| m == method) {
            return Err(Error::DuplicateMethod(method.clone()));
        }
        if runs.len() != replicates {
            return Err(Error::ReplicateCountMismatch {
                method: method.clone(),
                expected: replicates,
                found: runs.len(),
            });
        }
        check_runs(runs, manifest)?;
    }
    if images.is_empty() {
        return Err(Error::EmptyImageSet);
    }

    let order: Vec<&str> = images.iter().map(String::as_str).collect();
    let truth = truths(manifest, &order)?;
    let members: Vec<Vec<Member>> = runs_by_method
        .iter()
        .map(|(_, runs)| runs.iter().map(|r| Member::prepare(r, &order)).collect())
        .collect::<Result<_>>()?;
    let c = manifest.num_classes();
    let m = order.len() as u64;

    let entries = (1u32..1 << k)
        .into_par_iter()
        .map(|mask| {
            let in_subset: Vec<usize> = (0..k).filter(|j| mask & (1 << j) != 0).collect();
            let replicate_accuracies: Vec<Accuracy> = (0..replicates)
                .map(|r| {
                    let team: Vec<&Member> = in_subset.iter().map(|&j| &members[j][r]).collect();
                    let preds = combine(&team, rule, order.len(), c);
                    Accuracy::new(count_correct(&preds, &truth), m)
                })
                .collect();
            let ratios: Vec<Rational> = replicate_accuracies.iter().map(Accuracy::ratio).collect();
            SweepEntry {
                mask,
                subset: in_subset.iter().map(|&j| runs_by_method[j].0.clone()).collect(),
                mean_accuracy: rational::mean(&ratios),
                replicate_accuracies,
            }
        })
        .collect();

    Ok(SweepTable {
        rule,
        methods: runs_by_method.iter().map(|(m, _)| m.clone()).collect(),
        replicates,
        entries,
    })
}
