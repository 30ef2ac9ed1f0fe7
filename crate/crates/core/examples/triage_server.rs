//! The triage API over a synthetic dataset.
//!
//! Writes placeholder images, computes the overlap partition and serves the
//! hard images on 127.0.0.1 until ctrl-c. Open the printed URL for the
//! built-in page, or point a UI bundle at the API.
//!
//! ```text
//! cargo run --example triage_server [port]
//! curl localhost:8710/api/queue
//! curl -XPOST localhost:8710/api/annotation \
//!      -d '{"image_id":"img_00042","error_class":"PoorQuality","annotator":"me"}'
//! ```

use overlap_lab::model::Split;
use overlap_lab::overlap::overlap_labels;
use overlap_lab::server::{serve, TriageConfig, DEFAULT_PORT};
use overlap_lab::synthetic::{manifest, MethodProfile, Simulation};

// 1x1 grey PNG
const PIXEL: &[u8] = &[
    0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a, 0x00, 0x00, 0x00, 0x0d, 0x49, 0x48, 0x44, 0x52, 0x00, 0x00, 0x00,
    0x01, 0x00, 0x00, 0x00, 0x01, 0x08, 0x00, 0x00, 0x00, 0x00, 0x3a, 0x7e, 0x9b, 0x55, 0x00, 0x00, 0x00, 0x0a, 0x49,
    0x44, 0x41, 0x54, 0x78, 0x9c, 0x63, 0x68, 0x00, 0x00, 0x00, 0x82, 0x00, 0x81, 0x77, 0xcd, 0x72, 0xb6, 0x00, 0x00,
    0x00, 0x00, 0x49, 0x45, 0x4e, 0x44, 0xae, 0x42, 0x60, 0x82,
];

#[tokio::main]
async fn main() -> overlap_lab::Result<()> {
    env_logger::init();
    let port = std::env::args().nth(1).and_then(|p| p.parse().ok()).unwrap_or(DEFAULT_PORT);
    let workdir = tempfile::tempdir().expect("temp dir");

    let m = manifest("birds-demo", 20, &[(Split::Test, 400)], 31);
    let test = m.split_ids(Split::Test);
    let sim = Simulation::new(&m, 32);
    let runs: Vec<_> = [MethodProfile::new("wsdan", 0.85), MethodProfile::new("mpncov", 0.8)]
        .iter()
        .map(|p| sim.run(&test, p, 0))
        .collect();
    let partition = overlap_labels(&m, &runs, &test)?;

    let images_root = workdir.path().join("root");
    std::fs::create_dir_all(images_root.join("images")).expect("images dir");
    for rec in m.records() {
        let path = rec.image_path.as_deref().expect("synthetic images have paths").replace(".jpg", ".png");
        std::fs::write(images_root.join(path), PIXEL).expect("write image");
    }
    let records: Vec<_> = m
        .records()
        .iter()
        .cloned()
        .map(|mut r| {
            r.image_path = r.image_path.map(|p| p.replace(".jpg", ".png"));
            r
        })
        .collect();
    let m = m.with_records(m.dataset_id().to_string(), records)?;

    println!("{} hard images; journal at {}", partition.group_sizes()[0], workdir.path().join("annotations.jsonl").display());
    serve(
        TriageConfig {
            manifest: m,
            partition,
            runs,
            images_root,
            annotations_path: workdir.path().join("annotations.jsonl"),
            assets_dir: None,
        },
        port,
    )
    .await
}
