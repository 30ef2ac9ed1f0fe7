//! Vote and probability-average ensembles against the oracle bound.
//!
//! A vote ensemble can never fix an image that no member gets right, so its
//! accuracy is capped by the oracle bound. Averaging probabilities is not
//! capped that way.
//!
//! ```text
//! cargo run --example ensembles
//! ```

use overlap_lab::ensemble::{cp_avg_ensemble, oracle_upper_bound, vote_ensemble};
use overlap_lab::model::Split;
use overlap_lab::overlap::{accuracy, overlap_labels};
use overlap_lab::rational::percent_3dp;
use overlap_lab::synthetic::{manifest, MethodProfile, Simulation};

fn main() -> overlap_lab::Result<()> {
    let m = manifest("birds-demo", 50, &[(Split::Test, 3000)], 21);
    let test = m.split_ids(Split::Test);
    let sim = Simulation::new(&m, 22);
    let members: Vec<_> = [("wsdan", 0.92), ("mpncov", 0.90), ("cal", 0.88)]
        .iter()
        .map(|&(name, skill)| sim.run(&test, &MethodProfile::new(name, skill), 0))
        .collect();

    for run in &members {
        println!("{:<12} {}", run.model_id(), accuracy(run, &m, &test)?);
    }
    let vote = vote_ensemble(&members, &m, &test)?;
    let avg = cp_avg_ensemble(&members, &m, &test)?;
    let partition = overlap_labels(&m, &members, &test)?;
    println!("{:<12} {}", "vote", vote.accuracy);
    println!("{:<12} {}", "cp-avg", avg.accuracy);
    println!("{:<12} {}%", "oracle bound", percent_3dp(&oracle_upper_bound(&partition)));

    let rescued: Vec<_> = partition
        .hard()
        .into_iter()
        .filter(|id| Some(avg.predictions[id]) == m.label_of(id))
        .collect();
    println!("\ncp-avg is right on {} of {} images no member gets right", rescued.len(), partition.group_sizes()[0]);
    Ok(())
}
