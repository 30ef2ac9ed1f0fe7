//! Writing and loading prediction-set directories.
//!
//! A directory holds `meta.json`, `ids.txt` (row order) and `scores.bin`
//! (raw little-endian f32, row-major). Loading checks every file against the
//! manifest and names what is wrong.
//!
//! ```text
//! cargo run --example prediction_store [out-dir]
//! ```

use std::fs;
use std::path::PathBuf;

use overlap_lab::model::Split;
use overlap_lab::store;
use overlap_lab::synthetic::{manifest, MethodProfile, Simulation};

fn main() -> overlap_lab::Result<()> {
    let _scratch;
    let root = match std::env::args_os().nth(1) {
        Some(dir) => PathBuf::from(dir),
        None => {
            _scratch = tempfile::tempdir().expect("temp dir");
            _scratch.path().to_path_buf()
        }
    };

    fs::create_dir_all(&root).map_err(|e| overlap_lab::Error::Invalid(e.to_string()))?;
    let m = manifest("birds-demo", 10, &[(Split::Test, 6)], 1);
    store::write_manifest(&m, &root.join("manifest.json"))?;
    let run = Simulation::new(&m, 2).run(&m.split_ids(Split::Test), &MethodProfile::new("wsdan", 0.9), 0);
    let dir = root.join("wsdan-r0");
    store::write_prediction_set(&run, &dir)?;

    for name in [store::META_FILE, store::IDS_FILE, store::SCORES_FILE] {
        let len = fs::metadata(dir.join(name)).map(|md| md.len()).unwrap_or(0);
        println!("{:<11} {len:>5} bytes", name);
    }
    println!("\n{}", fs::read_to_string(dir.join(store::META_FILE)).unwrap_or_default());

    let loaded = store::load_prediction_set(&dir, &m)?;
    println!("reloaded bit-identical: {}", loaded.bit_identical(&run));

    // damage a copy
    let broken = root.join("wsdan-r0-truncated");
    fs::create_dir_all(&broken).expect("copy dir");
    for name in [store::META_FILE, store::IDS_FILE] {
        fs::copy(dir.join(name), broken.join(name)).expect("copy");
    }
    let bytes = fs::read(dir.join(store::SCORES_FILE)).expect("scores");
    fs::write(broken.join(store::SCORES_FILE), &bytes[..bytes.len() - 3]).expect("truncate");
    match store::load_prediction_set(&broken, &m) {
        Err(e) => println!("after truncating scores.bin: error[{}] {e}", e.code()),
        Ok(_) => println!("truncated file was accepted?"),
    }
    Ok(())
}
