//! Relabeling a dataset from a correction table.
//!
//! Corrections name classes. A name in the vocabulary relabels the image; any
//! other name removes it. Predictions made against the original dataset are
//! then restricted to the surviving images.
//!
//! ```text
//! cargo run --example label_correction
//! ```

use std::collections::BTreeMap;

use overlap_lab::correction::{apply_corrections, retarget_predictions};
use overlap_lab::model::{LabelCorrectionTable, Split};
use overlap_lab::overlap::accuracy;
use overlap_lab::synthetic::{manifest, MethodProfile, Simulation};

fn main() -> overlap_lab::Result<()> {
    let original = manifest("birds", 20, &[(Split::Train, 200), (Split::Test, 200)], 9);
    let test = original.split_ids(Split::Test);
    let run = Simulation::new(&original, 1).run(&test, &MethodProfile::new("wsdan", 0.9), 0);

    let table = LabelCorrectionTable {
        source: "expert review".into(),
        corrections: BTreeMap::from([
            ("img_00003".into(), "class_007".into()),
            ("img_00120".into(), "Common Tern (juvenile)".into()),
            ("img_00250".into(), "class_001".into()),
            ("img_00301".into(), "Unidentifiable".into()),
        ]),
    };
    let outcome = apply_corrections(&original, &table)?;
    println!("{} -> {}", original.dataset_id(), outcome.manifest.dataset_id());
    println!("relabeled: {:?}", outcome.relabeled);
    println!("dropped:   {:?}", outcome.dropped);

    let corrected_test = outcome.manifest.split_ids(Split::Test);
    let moved = retarget_predictions(&run, &outcome.manifest)?;
    println!("\naccuracy on {}: {}", original.dataset_id(), accuracy(&run, &original, &test)?);
    println!(
        "accuracy on {}: {}",
        outcome.manifest.dataset_id(),
        accuracy(&moved, &outcome.manifest, &corrected_test)?
    );
    Ok(())
}
