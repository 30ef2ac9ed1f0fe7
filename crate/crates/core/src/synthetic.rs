//! Seeded synthetic datasets and model runs for demos and tests.
//!
//! Each image gets a difficulty, and each (method, image) pair gets an
//! affinity shared by all replicates of that method. Replicates of one
//! method therefore agree more with each other than with other methods.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{ClassVocabulary, DatasetManifest, ImageRecord, ImageSet, PredictionSet, RunInfo, Split};

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf29ce484222325u64, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x100000001b3)
    })
}

/// Manifest with classes `class_000..` and images `img_00000..` assigned
/// round-robin to the given splits with uniformly random labels.
pub fn manifest(dataset_id: &str, num_classes: usize, splits: &[(Split, usize)], seed: u64) -> DatasetManifest {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vocab = ClassVocabulary::new((0..num_classes).map(|c| format!("class_{c:03}")).collect())
        .expect("num_classes >= 2");
    let mut records = Vec::new();
    for &(split, count) in splits {
        for _ in 0..count {
            let k = records.len();
            records.push(ImageRecord {
                image_id: format!("img_{k:05}"),
                label_index: rng.random_range(0..num_classes),
                split,
                image_path: Some(format!("images/img_{k:05}.jpg")),
            });
        }
    }
    DatasetManifest::new(dataset_id, vocab, records).expect("generated ids are unique")
}

/// A method's overall strength: higher skill means more images correct.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodProfile {
    pub method_id: String,
    pub skill: f64,
}

impl MethodProfile {
    pub fn new(method_id: impl Into<String>, skill: f64) -> Self {
        MethodProfile {
            method_id: method_id.into(),
            skill,
        }
    }
}

/// Latent structure shared by every simulated run over one manifest.
pub struct Simulation<'a> {
    manifest: &'a DatasetManifest,
    seed: u64,
}

impl<'a> Simulation<'a> {
    pub fn new(manifest: &'a DatasetManifest, seed: u64) -> Self {
        Simulation { manifest, seed }
    }

    fn image_rng(&self, image_id: &str, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ fnv1a(image_id.as_bytes()) ^ salt.rotate_left(17))
    }

    /// In [0, 1], skewed towards easy; about 3% of images are near-impossible.
    fn difficulty(&self, image_id: &str) -> f64 {
        let mut rng = self.image_rng(image_id, 0);
        let u: f64 = rng.random();
        if rng.random::<f64>() < 0.03 {
            0.95 + 0.05 * u
        } else {
            u.powi(3)
        }
    }

    /// The class that wrong predictions on this image gravitate to.
    fn confuser(&self, image_id: &str, truth: usize) -> usize {
        let c = self.manifest.num_classes();
        let mut rng = self.image_rng(image_id, 1);
        (truth + 1 + rng.random_range(0..c - 1)) % c
    }

    fn affinity(&self, method_id: &str, image_id: &str) -> f64 {
        let mut rng = self.image_rng(image_id, fnv1a(method_id.as_bytes()));
        rng.random::<f64>() - 0.5
    }

    /// One replicate of `method`, scored on `images`.
    pub fn run(&self, images: &ImageSet, method: &MethodProfile, replicate: u32) -> PredictionSet {
        let c = self.manifest.num_classes();
        let salt = fnv1a(method.method_id.as_bytes()) ^ (replicate as u64 + 1).wrapping_mul(0x9e3779b97f4a7c15);
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ salt);
        let mut values = Vec::with_capacity(images.len() * c);
        for id in images {
            let truth = self.manifest.label_of(id).expect("image from this manifest");
            let p = (method.skill - self.difficulty(id) + 0.35 * self.affinity(&method.method_id, id)).clamp(0.0, 1.0);
            let target = if rng.random::<f64>() < p {
                truth
            } else if rng.random::<f64>() < 0.7 {
                self.confuser(id, truth)
            } else {
                let other = rng.random_range(0..c - 1);
                if other >= truth { other + 1 } else { other }
            };
            let start = values.len();
            values.extend((0..c).map(|_| rng.random_range(-1.0f32..1.0)));
            values[start + target] += rng.random_range(2.5f32..5.0);
        }
        let info = RunInfo {
            model_id: format!("{}-r{replicate}", method.method_id),
            method_id: method.method_id.clone(),
            replicate_index: replicate,
            dataset_id: self.manifest.dataset_id().to_string(),
        };
        PredictionSet::from_rows(info, images.iter().cloned().collect(), c, values).expect("finite scores")
    }

    /// `replicates` runs of each method, grouped by method.
    pub fn runs(&self, images: &ImageSet, methods: &[MethodProfile], replicates: u32) -> Vec<(String, Vec<PredictionSet>)> {
        methods
            .iter()
            .map(|m| (m.method_id.clone(), (0..replicates).map(|r| self.run(images, m, r)).collect()))
            .collect()
    }
}

/// A run that is correct exactly on `correct`. Correct rows put `hit_logit`
/// on the truth; wrong rows put `miss_logit` on `(truth + 1 + offset) % C`.
/// Every other class scores 0.
pub fn run_with_correct_set(
    manifest: &DatasetManifest,
    images: &ImageSet,
    correct: &ImageSet,
    info: RunInfo,
    hit_logit: f32,
    miss_logit: f32,
    offset: usize,
) -> PredictionSet {
    let c = manifest.num_classes();
    let mut values = vec![0.0f32; images.len() * c];
    for (i, id) in images.iter().enumerate() {
        let truth = manifest.label_of(id).expect("image from this manifest");
        if correct.contains(id) {
            values[i * c + truth] = hit_logit;
        } else {
            values[i * c + (truth + 1 + offset % (c - 1)) % c] = miss_logit;
        }
    }
    PredictionSet::from_rows(info, images.iter().cloned().collect(), c, values).expect("finite scores")
}
