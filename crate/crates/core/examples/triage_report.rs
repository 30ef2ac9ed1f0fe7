//! Error-class prevalence and a full report directory.
//!
//! Annotations of hard images are appended to a JSONL journal; the report
//! summarizes overlap, method subsets, ensembles and error classes as
//! `report.json`, `tables.csv` and SVG charts.
//!
//! ```text
//! cargo run --example triage_report [out-dir]
//! ```

use std::collections::BTreeMap;
use std::path::PathBuf;

use chrono::{Duration, Utc};
use overlap_lab::model::{ErrorAnnotation, ErrorClass, Split};
use overlap_lab::overlap::overlap_labels;
use overlap_lab::report::{emit_report, standard_report, ChartOptions, ReportInputs};
use overlap_lab::store;
use overlap_lab::synthetic::{manifest, MethodProfile, Simulation};
use overlap_lab::taxonomy::{prevalence, resolve_annotations};

fn main() -> overlap_lab::Result<()> {
    let out_dir = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("target/triage-report"));

    let m = manifest("birds-demo", 30, &[(Split::Test, 1200)], 13);
    let test = m.split_ids(Split::Test);
    let sim = Simulation::new(&m, 14);
    let methods = [MethodProfile::new("wsdan", 0.9), MethodProfile::new("mpncov", 0.88), MethodProfile::new("cal", 0.85)];
    let runs: Vec<_> = sim.runs(&test, &methods, 2).into_iter().flat_map(|(_, r)| r).collect();
    let hard: std::collections::BTreeSet<String> = overlap_labels(&m, &runs, &test)?.hard().into_iter().collect();

    // pretend two people went through the hard images
    std::fs::create_dir_all(&out_dir).map_err(|e| overlap_lab::Error::Invalid(e.to_string()))?;
    let journal = out_dir.join("annotations.jsonl");
    let _ = std::fs::remove_file(&journal);
    let t0 = Utc::now();
    for (i, id) in hard.iter().enumerate() {
        let class = ErrorClass::ALL[(i * 7 + i / 3) % 5];
        store::append_annotation(&journal, &ErrorAnnotation::new(id.clone(), class, "ana", t0, None))?;
        if i % 4 == 0 {
            let second = ErrorClass::ALL[(i + 1) % 5];
            let later = t0 + Duration::milliseconds(1 + i as i64);
            store::append_annotation(&journal, &ErrorAnnotation::new(id.clone(), second, "ben", later, None))?;
        }
    }

    let entries = store::read_annotations(&journal)?;
    let p = prevalence(&resolve_annotations(&entries), &hard);
    println!("{} hard images, {} annotated", p.hard_images, p.annotated);
    for class in ErrorClass::ALL {
        println!("  {} {:<26} {:>6}%", class.shortcut(), class.label(), p.percent_text(class));
    }

    let report = standard_report(&ReportInputs {
        manifest: &m,
        runs: &runs,
        images: &test,
        annotations: Some(&entries),
        metadata: BTreeMap::from([("dataset_id".into(), m.dataset_id().into())]),
    })?;
    for path in emit_report(&report, &out_dir, &ChartOptions::default())?.paths {
        println!("wrote {}", path.display());
    }
    Ok(())
}
