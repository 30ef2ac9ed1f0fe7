//! Prediction-overlap analysis.
//!
//! Every image gets an overlap label `o_i`: the number of runs whose top-1
//! prediction equals the ground truth. Passing replicates of one method gives
//! within-method overlap; passing one run per method gives between-method
//! overlap. Both go through [`overlap_labels`].

use std::collections::{BTreeMap, HashSet};

use crate::error::{Error, Result};
use crate::model::{DatasetManifest, ImageSet, OverlapPartition, PredictionSet, SubsetCorrectnessTable};
use crate::rational::Accuracy;

pub const MAX_METHODS: usize = 16;

/// Index of the largest score; ties go to the lowest index.
pub fn argmax(row: &[f32]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = i;
        }
    }
    best
}

/// Top-1 class for every image in the run.
pub fn argmax_labels(ps: &PredictionSet) -> BTreeMap<String, usize> {
    ps.image_ids()
        .iter()
        .enumerate()
        .map(|(r, id)| (id.clone(), argmax(ps.row_at(r))))
        .collect()
}

fn is_correct(ps: &PredictionSet, manifest: &DatasetManifest, image_id: &str) -> Result<bool> {
    let truth = manifest.truth(image_id)?;
    Ok(argmax(ps.covered_row(image_id)?) == truth)
}

pub fn overlap_labels(
    manifest: &DatasetManifest,
    runs: &[PredictionSet],
    images: &ImageSet,
) -> Result<OverlapPartition> {
    if runs.is_empty() {
        return Err(Error::NoRuns);
    }
    let mut labels = BTreeMap::new();
    for id in images {
        let mut o = 0;
        for run in runs {
            if is_correct(run, manifest, id)? {
                o += 1;
            }
        }
        labels.insert(id.clone(), o);
    }
    let run_ids = runs.iter().map(|r| r.model_id().to_string()).collect();
    OverlapPartition::from_labels(runs.len(), run_ids, labels)
}

/// Images in `images` that `ps` classifies correctly.
pub fn correct_set(ps: &PredictionSet, manifest: &DatasetManifest, images: &ImageSet) -> Result<ImageSet> {
    let mut out = ImageSet::new();
    for id in images {
        if is_correct(ps, manifest, id)? {
            out.insert(id.clone());
        }
    }
    Ok(out)
}

/// Counts, for every subset `S` of methods, the images correct by exactly `S`.
pub fn subset_correctness(
    correct_sets: &[(String, ImageSet)],
    universe: &ImageSet,
) -> Result<SubsetCorrectnessTable> {
    if correct_sets.is_empty() {
        return Err(Error::NoRuns);
    }
    if correct_sets.len() > MAX_METHODS {
        return Err(Error::TooManyMethods(correct_sets.len()));
    }
    let mut seen = HashSet::new();
    for (method, set) in correct_sets {
        if !seen.insert(method.as_str()) {
            return Err(Error::DuplicateMethod(method.clone()));
        }
        if let Some(stray) = set.iter().find(|id| !universe.contains(*id)) {
            return Err(Error::UnknownImageId(stray.clone()));
        }
    }
    let mut counts = vec![0u64; 1 << correct_sets.len()];
    for id in universe {
        let mask = correct_sets
            .iter()
            .enumerate()
            .filter(|(_, (_, set))| set.contains(id))
            .fold(0usize, |m, (j, _)| m | 1 << j);
        counts[mask] += 1;
    }
    let methods = correct_sets.iter().map(|(m, _)| m.clone()).collect();
    SubsetCorrectnessTable::new(methods, counts)
}

/// Correct sets keyed by method, one run per method, in run order.
pub fn method_correct_sets(
    runs: &[PredictionSet],
    manifest: &DatasetManifest,
    images: &ImageSet,
) -> Result<Vec<(String, ImageSet)>> {
    let mut out: Vec<(String, ImageSet)> = Vec::with_capacity(runs.len());
    for run in runs {
        if out.iter().any(|(m, _)| m == run.method_id()) {
            return Err(Error::DuplicateMethod(run.method_id().to_string()));
        }
        out.push((run.method_id().to_string(), correct_set(run, manifest, images)?));
    }
    Ok(out)
}

pub fn accuracy(ps: &PredictionSet, manifest: &DatasetManifest, images: &ImageSet) -> Result<Accuracy> {
    if images.is_empty() {
        return Err(Error::EmptyImageSet);
    }
    let correct = correct_set(ps, manifest, images)?.len() as u64;
    Ok(Accuracy::new(correct, images.len() as u64))
}

/// Accuracy restricted to each ground-truth class present in `images`.
pub fn per_class_accuracy(
    ps: &PredictionSet,
    manifest: &DatasetManifest,
    images: &ImageSet,
) -> Result<BTreeMap<usize, Accuracy>> {
    let mut tally: BTreeMap<usize, (u64, u64)> = BTreeMap::new();
    for id in images {
        let truth = manifest.truth(id)?;
        let hit = argmax(ps.covered_row(id)?) == truth;
        let entry = tally.entry(truth).or_default();
        entry.0 += hit as u64;
        entry.1 += 1;
    }
    Ok(tally
        .into_iter()
        .map(|(c, (correct, total))| (c, Accuracy::new(correct, total)))
        .collect())
}

/// Ids whose overlap label equals `o`, sorted.
pub fn export_subset(partition: &OverlapPartition, o: usize) -> Vec<String> {
    partition.ids_with(o)
}

/// Runs grouped by method id, methods in order of first appearance, runs in
/// input order within each method.
pub fn group_by_method(runs: &[PredictionSet]) -> Vec<(String, Vec<&PredictionSet>)> {
    let mut groups: Vec<(String, Vec<&PredictionSet>)> = Vec::new();
    for run in runs {
        match groups.iter_mut().find(|(m, _)| m == run.method_id()) {
            Some((_, members)) => members.push(run),
            None => groups.push((run.method_id().to_string(), vec![run])),
        }
    }
    groups
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ClassVocabulary, ImageRecord, RunInfo, Split};

    fn manifest(truth: &[usize], classes: usize) -> DatasetManifest {
        let vocab = ClassVocabulary::new((0..classes).map(|c| format!("c{c}")).collect()).unwrap();
        let records = truth
            .iter()
            .enumerate()
            .map(|(i, &t)| ImageRecord {
                image_id: format!("img{i}"),
                label_index: t,
                split: Split::Test,
                image_path: None,
            })
            .collect();
        DatasetManifest::new("d", vocab, records).unwrap()
    }

    /// A run whose argmax on image i is `preds[i]`.
    fn run(name: &str, preds: &[usize], classes: usize) -> PredictionSet {
        let mut values = vec![0.0f32; preds.len() * classes];
        for (i, &p) in preds.iter().enumerate() {
            values[i * classes + p] = 1.0;
        }
        let info = RunInfo {
            model_id: name.into(),
            method_id: name.into(),
            replicate_index: 0,
            dataset_id: "d".into(),
        };
        let ids = (0..preds.len()).map(|i| format!("img{i}")).collect();
        PredictionSet::from_rows(info, ids, classes, values).unwrap()
    }

    fn all(m: &DatasetManifest) -> ImageSet {
        m.split_ids(Split::Test)
    }

    #[test]
    fn argmax_examples() {
        assert_eq!(argmax(&[0.1, 2.0, -1.0]), 1);
        assert_eq!(argmax(&[3.0, 3.0, 0.0]), 0);
        assert_eq!(argmax(&[-5.0, -1.0, -1.0]), 1);
    }

    #[test]
    fn all_correct_runs() {
        let m = manifest(&[0, 1, 2, 1], 3);
        let runs: Vec<_> = (0..3).map(|k| run(&format!("r{k}"), &[0, 1, 2, 1], 3)).collect();
        let p = overlap_labels(&m, &runs, &all(&m)).unwrap();
        assert!(p.labels().values().all(|&o| o == 3));
        assert_eq!(p.group_sizes(), &[0, 0, 0, 4]);
        assert!(export_subset(&p, 0).is_empty());
        assert_eq!(export_subset(&p, 3).len(), 4);
    }

    #[test]
    fn two_run_hand_enumeration() {
        let m = manifest(&[0, 1], 2);
        let runs = vec![run("A", &[0, 0], 2), run("B", &[1, 1], 2)];
        let p = overlap_labels(&m, &runs, &all(&m)).unwrap();
        assert_eq!(p.label("img0"), Some(1));
        assert_eq!(p.label("img1"), Some(1));
        assert_eq!(export_subset(&p, 1), vec!["img0", "img1"]);
        assert_eq!(p.group_sizes().iter().sum::<u64>(), 2);
    }

    #[test]
    fn missing_coverage_names_run_and_image() {
        let m = manifest(&[0, 1, 1], 2);
        let short = run("short", &[0, 1], 2);
        let err = overlap_labels(&m, &[short], &all(&m)).unwrap_err();
        assert!(matches!(err, Error::MissingImageCoverage { run, image } if run == "short" && image == "img2"));
        assert!(matches!(overlap_labels(&m, &[], &all(&m)), Err(Error::NoRuns)));
    }

    #[test]
    fn correct_set_cases() {
        let m = manifest(&[0, 1, 2, 1], 3);
        let perfect = run("p", &[0, 1, 2, 1], 3);
        assert_eq!(correct_set(&perfect, &m, &all(&m)).unwrap(), all(&m));
        let constant = run("c", &[1, 1, 1, 1], 3);
        let got: Vec<_> = correct_set(&constant, &m, &all(&m)).unwrap().into_iter().collect();
        assert_eq!(got, ["img1", "img3"]);
    }

    #[test]
    fn subset_table_cases() {
        let universe: ImageSet = (0..10).map(|i| format!("i{i}")).collect();
        let ids = |r: std::ops::Range<usize>| -> ImageSet { r.map(|i| format!("i{i}")).collect() };

        let single = subset_correctness(&[("m".into(), ids(0..4))], &universe).unwrap();
        assert_eq!(single.counts(), &[6, 4]);

        let pair = subset_correctness(&[("A".into(), ids(0..3)), ("B".into(), ids(3..7))], &universe).unwrap();
        assert_eq!(pair.counts(), &[3, 3, 4, 0]);
        assert_eq!(pair.empty_count(), 3);

        let too_many: Vec<_> = (0..17).map(|j| (format!("m{j}"), ImageSet::new())).collect();
        assert!(matches!(subset_correctness(&too_many, &universe), Err(Error::TooManyMethods(17))));

        let dup = [("A".to_string(), ids(0..1)), ("A".to_string(), ids(1..2))];
        assert!(matches!(subset_correctness(&dup, &universe), Err(Error::DuplicateMethod(_))));
        assert!(matches!(
            subset_correctness(&[("A".into(), ids(9..11))], &universe),
            Err(Error::UnknownImageId(id)) if id == "i10"
        ));
    }

    #[test]
    fn accuracy_cases() {
        let m = manifest(&[0, 1, 0, 1, 0, 1, 0, 1], 2);
        let perfect = run("p", &[0, 1, 0, 1, 0, 1, 0, 1], 2);
        assert_eq!(accuracy(&perfect, &m, &all(&m)).unwrap().ratio(), 1.into());
        let wrong = run("w", &[1, 0, 1, 0, 1, 0, 1, 0], 2);
        assert_eq!(accuracy(&wrong, &m, &all(&m)).unwrap().correct, 0);
        let seven = run("s", &[0, 1, 0, 1, 0, 1, 0, 0], 2);
        let acc = accuracy(&seven, &m, &all(&m)).unwrap();
        assert_eq!((acc.correct, acc.total), (7, 8));
        assert_eq!(acc.percent_string(), "87.500");
        assert!(matches!(accuracy(&seven, &m, &ImageSet::new()), Err(Error::EmptyImageSet)));
    }

    #[test]
    fn per_class_cases() {
        let m = manifest(&[0, 0, 1, 1], 3);
        let r = run("r", &[0, 1, 1, 1], 3);
        let pc = per_class_accuracy(&r, &m, &all(&m)).unwrap();
        assert_eq!(pc.len(), 2, "class 2 has no images");
        assert_eq!((pc[&0].correct, pc[&0].total), (1, 2));
        assert_eq!((pc[&1].correct, pc[&1].total), (2, 2));
    }

    #[test]
    fn grouping_keeps_first_appearance_order() {
        let mut a0 = run("a0", &[0], 2);
        let mut b0 = run("b0", &[0], 2);
        let mut a1 = run("a1", &[0], 2);
        for (ps, method) in [(&mut a0, "A"), (&mut b0, "B"), (&mut a1, "A")] {
            let mut info = ps.info().clone();
            info.method_id = method.into();
            *ps = PredictionSet::new(info, ps.image_ids().to_vec(), ps.scores().clone()).unwrap();
        }
        let runs = vec![a0, b0, a1];
        let groups = group_by_method(&runs);
        assert_eq!(groups.len(), 2);
        assert_eq!(groups[0].0, "A");
        assert_eq!(
            groups[0].1.iter().map(|r| r.model_id()).collect::<Vec<_>>(),
            ["a0", "a1"]
        );
    }
}
