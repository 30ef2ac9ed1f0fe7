//! Mean ensemble accuracy for every subset of methods.
//!
//! With R replicates per method, each subset is ensembled R times from
//! disjoint models (replicate r of every member) and the R accuracies are
//! averaged exactly.
//!
//! ```text
//! cargo run --example replicate_sweep [vote|avg]
//! ```

use overlap_lab::ensemble::sweep_subsets;
use overlap_lab::model::{EnsembleRule, Split};
use overlap_lab::rational::percent_3dp;
use overlap_lab::synthetic::{manifest, MethodProfile, Simulation};

fn main() -> overlap_lab::Result<()> {
    let rule = match std::env::args().nth(1).as_deref() {
        Some("vote") => EnsembleRule::Vote,
        _ => EnsembleRule::CpAvg,
    };
    let m = manifest("birds-demo", 40, &[(Split::Test, 1500)], 5);
    let test = m.split_ids(Split::Test);
    let sim = Simulation::new(&m, 6);
    let methods = [
        MethodProfile::new("wsdan", 0.92),
        MethodProfile::new("mpncov", 0.90),
        MethodProfile::new("cal", 0.88),
        MethodProfile::new("baseline", 0.75),
    ];
    let runs = sim.runs(&test, &methods, 5);
    let table = sweep_subsets(&runs, &m, &test, rule)?;

    let mut entries: Vec<_> = table.entries.iter().collect();
    entries.sort_by_key(|e| (e.subset.len(), e.mask));
    println!("{} ensembles, {} replicates each", rule.as_str(), table.replicates);
    for e in entries {
        println!("{:>8}%  {}", percent_3dp(&e.mean_accuracy), e.subset.join(" + "));
    }
    Ok(())
}
