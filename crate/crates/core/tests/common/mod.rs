#![allow(dead_code)]

use std::path::Path;

use overlap_lab::model::{ClassVocabulary, DatasetManifest, ImageRecord, ImageSet, PredictionSet, RunInfo, Split};
use overlap_lab::store;

pub fn info(model: &str, method: &str, replicate: u32, dataset: &str) -> RunInfo {
    RunInfo {
        model_id: model.into(),
        method_id: method.into(),
        replicate_index: replicate,
        dataset_id: dataset.into(),
    }
}

/// Test-split manifest with images `img_000..` labelled `truth`.
pub fn manifest(dataset: &str, truth: &[usize], classes: usize) -> DatasetManifest {
    let vocab = ClassVocabulary::new((0..classes).map(|c| format!("class_{c}")).collect()).unwrap();
    let records = truth
        .iter()
        .enumerate()
        .map(|(i, &t)| ImageRecord {
            image_id: format!("img_{i:03}"),
            label_index: t,
            split: Split::Test,
            image_path: Some(format!("img_{i:03}.png")),
        })
        .collect();
    DatasetManifest::new(dataset, vocab, records).unwrap()
}

pub fn ids(m: &DatasetManifest) -> Vec<String> {
    m.records().iter().map(|r| r.image_id.clone()).collect()
}

pub fn all(m: &DatasetManifest) -> ImageSet {
    ids(m).into_iter().collect()
}

/// Run whose rows are the given logits, in manifest order.
pub fn run(m: &DatasetManifest, model: &str, method: &str, replicate: u32, rows: &[Vec<f32>]) -> PredictionSet {
    let c = m.num_classes();
    let flat: Vec<f32> = rows.iter().flatten().copied().collect();
    PredictionSet::from_rows(info(model, method, replicate, m.dataset_id()), ids(m), c, flat).unwrap()
}

/// Logits whose softmax is exactly proportional to `probs`.
pub fn ln(probs: &[f64]) -> Vec<f32> {
    probs.iter().map(|p| p.ln() as f32).collect()
}

/// One-hot-ish logits: `hi` on `class`, 0 elsewhere.
pub fn peak(classes: usize, class: usize, hi: f32) -> Vec<f32> {
    let mut v = vec![0.0; classes];
    v[class] = hi;
    v
}

pub fn write_runs(dir: &Path, runs: &[PredictionSet]) -> Vec<std::path::PathBuf> {
    runs.iter()
        .map(|r| {
            let d = dir.join(r.model_id());
            store::write_prediction_set(r, &d).unwrap();
            d
        })
        .collect()
}
