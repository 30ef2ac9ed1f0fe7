//! Prediction-overlap analysis for image classifiers.
//!
//! Given several trained models' scores on one dataset, this crate labels
//! each image with how many models classify it correctly, breaks
//! correctness down by subsets of methods, builds vote and probability-average
//! ensembles, applies label corrections, and supports human triage of the
//! images no model gets right.
//!
//! ```
//! use overlap_lab::synthetic::{manifest, MethodProfile, Simulation};
//! use overlap_lab::model::Split;
//! use overlap_lab::overlap::overlap_labels;
//! use overlap_lab::ensemble::oracle_upper_bound;
//!
//! let m = manifest("demo", 10, &[(Split::Test, 100)], 1);
//! let images = m.split_ids(Split::Test);
//! let sim = Simulation::new(&m, 2);
//! let runs: Vec<_> = (0..3).map(|r| sim.run(&images, &MethodProfile::new("A", 0.8), r)).collect();
//! let partition = overlap_labels(&m, &runs, &images).unwrap();
//! assert_eq!(partition.group_sizes().iter().sum::<u64>(), 100);
//! assert!(oracle_upper_bound(&partition) <= 1.into());
//! ```

pub mod cli;
pub mod correction;
pub mod ensemble;
pub mod error;
pub mod model;
pub mod overlap;
pub mod rational;
pub mod report;
pub mod server;
pub mod store;
pub mod synthetic;
pub mod taxonomy;

pub use error::{Error, Result};
