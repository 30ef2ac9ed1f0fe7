use std::collections::BTreeMap;

use super::{AccuracyGrid, OverlapSection, PrevalenceSection, Report, SubsetSection, SweepSection};
use crate::ensemble::{ensemble, sweep_subsets_ref};
use crate::error::{Error, Result};
use crate::model::{DatasetManifest, EnsembleRule, ErrorAnnotation, ImageSet, PredictionSet};
use crate::overlap::{accuracy, correct_set, group_by_method, overlap_labels, subset_correctness, MAX_METHODS};
use crate::rational::mean;
use crate::taxonomy::{disagreements, prevalence, resolve_annotations};

/// Inputs for [`standard_report`].
pub struct ReportInputs<'a> {
    pub manifest: &'a DatasetManifest,
    pub runs: &'a [PredictionSet],
    pub images: &'a ImageSet,
    /// Journal entries; adds a prevalence section over the hard subset of all runs.
    pub annotations: Option<&'a [ErrorAnnotation]>,
    pub metadata: BTreeMap<String, String>,
}

/// The usual analysis of a set of runs:
///
/// - one within-method overlap bar per method with two or more runs,
/// - a between-method bar and subset table over each method's first run,
/// - a grid of mean single-run, vote and cp-avg accuracy per method,
/// - a cp-avg sweep over method subsets when every method has the same
///   number of runs,
/// - prevalence when annotations are given.
pub fn standard_report(inputs: &ReportInputs<'_>) -> Result<Report> {
    let ReportInputs {
        manifest,
        runs,
        images,
        annotations,
        ..
    } = *inputs;
    let mut report = Report {
        metadata: inputs.metadata.clone(),
        ..Report::default()
    };
    if runs.is_empty() {
        return Err(Error::NoRuns);
    }
    let groups = group_by_method(runs);

    for (method, members) in &groups {
        if members.len() >= 2 {
            let owned: Vec<PredictionSet> = members.iter().map(|r| (*r).clone()).collect();
            let partition = overlap_labels(manifest, &owned, images)?;
            report.overlaps.push(OverlapSection::new(format!("{method} (within)"), partition));
        }
    }
    let firsts: Vec<PredictionSet> = groups.iter().map(|(_, m)| m[0].clone()).collect();
    if firsts.len() >= 2 {
        let partition = overlap_labels(manifest, &firsts, images)?;
        report.overlaps.push(OverlapSection::new("between methods", partition));
        if firsts.len() <= MAX_METHODS {
            let sets = firsts
                .iter()
                .map(|r| Ok((r.method_id().to_string(), correct_set(r, manifest, images)?)))
                .collect::<Result<Vec<_>>>()?;
            report.subsets.push(SubsetSection {
                title: "between methods".into(),
                table: subset_correctness(&sets, images)?,
            });
        }
    }

    let mut grid = AccuracyGrid::new(
        "accuracy by method",
        vec!["single (mean)".into(), "vote".into(), "cp-avg".into()],
        groups.iter().map(|(m, _)| m.clone()).collect(),
    );
    for (col, (_, members)) in groups.iter().enumerate() {
        let singles = members
            .iter()
            .map(|r| accuracy(r, manifest, images).map(|a| a.ratio()))
            .collect::<Result<Vec<_>>>()?;
        grid.set(0, col, mean(&singles));
        grid.set(1, col, ensemble(EnsembleRule::Vote, members, manifest, images)?.accuracy.ratio());
        grid.set(2, col, ensemble(EnsembleRule::CpAvg, members, manifest, images)?.accuracy.ratio());
    }
    report.grids.push(grid);

    let replicates = groups[0].1.len();
    if groups.len() >= 2 && groups.len() <= MAX_METHODS && groups.iter().all(|(_, m)| m.len() == replicates) {
        report.sweeps.push(SweepSection {
            title: format!("cp-avg over method subsets, {replicates} replicate(s)"),
            table: sweep_subsets_ref(&groups, manifest, images, EnsembleRule::CpAvg)?,
        });
    }

    if let Some(entries) = annotations {
        let hard: ImageSet = overlap_labels(manifest, runs, images)?.hard().into_iter().collect();
        report.prevalence = Some(PrevalenceSection {
            title: "error classes of hard images".into(),
            prevalence: prevalence(&resolve_annotations(entries), &hard),
            disagreements: disagreements(entries),
        });
    }
    Ok(report)
}
