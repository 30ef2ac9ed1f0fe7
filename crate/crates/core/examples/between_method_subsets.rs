//! Which images each combination of methods gets right.
//!
//! One run per method; every image lands in exactly one cell, keyed by the
//! set of methods that classify it correctly.
//!
//! ```text
//! cargo run --example between_method_subsets
//! ```

use overlap_lab::model::Split;
use overlap_lab::overlap::{method_correct_sets, subset_correctness};
use overlap_lab::synthetic::{manifest, MethodProfile, Simulation};

fn main() -> overlap_lab::Result<()> {
    let m = manifest("birds-demo", 50, &[(Split::Test, 2000)], 3);
    let test = m.split_ids(Split::Test);
    let sim = Simulation::new(&m, 4);
    let runs: Vec<_> = [
        MethodProfile::new("wsdan", 0.92),
        MethodProfile::new("mpncov", 0.90),
        MethodProfile::new("cal", 0.88),
        MethodProfile::new("baseline", 0.75),
    ]
    .iter()
    .map(|p| sim.run(&test, p, 0))
    .collect();

    let sets = method_correct_sets(&runs, &m, &test)?;
    let table = subset_correctness(&sets, &test)?;

    let mut rows: Vec<(u32, u64)> = (0..table.counts().len() as u32).map(|k| (k, table.count(k))).collect();
    rows.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    for (mask, count) in rows {
        let names = table.subset_names(mask);
        let label = if names.is_empty() { "(none)".to_string() } else { names.join(" + ") };
        println!("{count:>6}  {label}");
    }
    println!("\n{} images no method gets right", table.empty_count());
    Ok(())
}
