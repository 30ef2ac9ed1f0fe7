//! Overlap between replicates of the same method.
//!
//! Trains nothing: five replicates of three simulated methods score a
//! synthetic test split, and each method's replicates are compared image by
//! image.
//!
//! ```text
//! cargo run --example within_method_overlap
//! ```

use overlap_lab::ensemble::oracle_upper_bound;
use overlap_lab::model::Split;
use overlap_lab::overlap::{accuracy, overlap_labels};
use overlap_lab::rational::{mean, percent_3dp, Rational};
use overlap_lab::synthetic::{manifest, MethodProfile, Simulation};

fn main() -> overlap_lab::Result<()> {
    let m = manifest("birds-demo", 50, &[(Split::Train, 500), (Split::Test, 2000)], 7);
    let test = m.split_ids(Split::Test);
    let sim = Simulation::new(&m, 11);
    let methods = [
        MethodProfile::new("wsdan", 0.92),
        MethodProfile::new("mpncov", 0.90),
        MethodProfile::new("baseline", 0.75),
    ];

    println!("{:<10} {:>9}  group sizes o=0..N  {:>8}", "method", "mean acc", "bound");
    for (method, runs) in sim.runs(&test, &methods, 5) {
        let p = overlap_labels(&m, &runs, &test)?;
        let accs = runs
            .iter()
            .map(|r| accuracy(r, &m, &test).map(|a| a.ratio()))
            .collect::<overlap_lab::Result<Vec<Rational>>>()?;
        println!(
            "{method:<10} {:>8}%  {:?}  {:>7}%",
            percent_3dp(&mean(&accs)),
            p.group_sizes(),
            percent_3dp(&oracle_upper_bound(&p)),
        );
    }
    println!("\nhard = o=0 (no replicate right), easy = o=N (every replicate right)");
    Ok(())
}
