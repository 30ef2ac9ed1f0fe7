mod common;

use std::collections::BTreeMap;

use chrono::{TimeZone, Utc};
use overlap_lab::ensemble::{ensemble, oracle_upper_bound, softmax_row, sweep_subsets};
use overlap_lab::model::{DatasetManifest, EnsembleRule, ErrorAnnotation, ErrorClass, ImageSet, PredictionSet};
use overlap_lab::overlap::{accuracy, argmax, correct_set, overlap_labels, subset_correctness};
use overlap_lab::rational::{mean, percent_3dp, Rational};
use overlap_lab::taxonomy::{prevalence, resolve_annotations};
use proptest::prelude::*;

use common::{all, manifest, run};

/// (truth labels, N runs of M rows of C scores); scores are small integers so
/// ties are common.
fn instance(max_m: usize, max_c: usize, max_n: usize) -> impl Strategy<Value = (DatasetManifest, Vec<PredictionSet>)> {
    (1..=max_m, 2..=max_c, 1..=max_n).prop_flat_map(|(m, c, n)| {
        (
            prop::collection::vec(0..c, m),
            prop::collection::vec(prop::collection::vec(prop::collection::vec(-3i8..=3, c), m), n),
        )
            .prop_map(move |(truth, runs)| {
                let man = manifest("p", &truth, c);
                let runs = runs
                    .iter()
                    .enumerate()
                    .map(|(k, rows)| {
                        let rows: Vec<Vec<f32>> = rows.iter().map(|r| r.iter().map(|&v| v as f32).collect()).collect();
                        run(&man, &format!("r{k}"), &format!("m{k}"), 0, &rows)
                    })
                    .collect();
                (man, runs)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn partition_identities((m, runs) in instance(30, 6, 5)) {
        let images = all(&m);
        let p = overlap_labels(&m, &runs, &images).unwrap();
        prop_assert_eq!(p.group_sizes().iter().sum::<u64>(), images.len() as u64);
        // (1/N) sum_k acc_k == sum_i o_i / (N M)
        let accs: Vec<Rational> = runs.iter().map(|r| accuracy(r, &m, &images).unwrap().ratio()).collect();
        let total_o: u64 = p.labels().values().map(|&o| o as u64).sum();
        prop_assert_eq!(mean(&accs), Rational::new(total_o, (runs.len() * images.len()) as u64));
        // brute force
        for id in &images {
            let truth = m.label_of(id).unwrap();
            let o = runs.iter().filter(|r| {
                let row = r.row(id).unwrap();
                (0..row.len()).all(|j| row[j] < row[truth] || (row[j] == row[truth] && j >= truth))
            }).count();
            prop_assert_eq!(p.label(id), Some(o));
        }
    }

    #[test]
    fn subset_table_marginals((m, runs) in instance(30, 5, 5)) {
        let images = all(&m);
        let sets: Vec<(String, ImageSet)> = runs.iter()
            .map(|r| (r.method_id().to_string(), correct_set(r, &m, &images).unwrap()))
            .collect();
        let t = subset_correctness(&sets, &images).unwrap();
        prop_assert_eq!(t.total(), images.len() as u64);
        for (j, (_, set)) in sets.iter().enumerate() {
            let marginal: u64 = (0..t.counts().len() as u32).filter(|mask| mask & (1 << j) != 0).map(|mask| t.count(mask)).sum();
            prop_assert_eq!(marginal, set.len() as u64);
        }
        let p = overlap_labels(&m, &runs, &images).unwrap();
        prop_assert_eq!(t.empty_count(), p.group_sizes()[0]);
    }

    #[test]
    fn vote_never_fixes_a_hard_image((m, runs) in instance(30, 5, 5)) {
        let images = all(&m);
        let refs: Vec<&PredictionSet> = runs.iter().collect();
        let vote = ensemble(EnsembleRule::Vote, &refs, &m, &images).unwrap();
        let p = overlap_labels(&m, &runs, &images).unwrap();
        for id in p.hard() {
            prop_assert_ne!(vote.predictions[&id], m.label_of(&id).unwrap());
        }
        prop_assert!(vote.accuracy.ratio() <= oracle_upper_bound(&p));
    }

    #[test]
    fn ensembles_ignore_member_order((m, runs) in instance(20, 5, 5), seed in any::<u64>()) {
        let images = all(&m);
        let refs: Vec<&PredictionSet> = runs.iter().collect();
        let mut shuffled = refs.clone();
        let mut s = seed;
        for i in (1..shuffled.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (s >> 33) as usize % (i + 1));
        }
        for rule in [EnsembleRule::Vote, EnsembleRule::CpAvg] {
            let a = ensemble(rule, &refs, &m, &images).unwrap();
            let b = ensemble(rule, &shuffled, &m, &images).unwrap();
            prop_assert_eq!(a.predictions, b.predictions);
        }
    }

    #[test]
    fn identical_members_reduce_to_argmax((m, runs) in instance(20, 6, 1), copies in 1usize..6) {
        let images = all(&m);
        let refs: Vec<&PredictionSet> = std::iter::repeat_n(&runs[0], copies).collect();
        for rule in [EnsembleRule::Vote, EnsembleRule::CpAvg] {
            let e = ensemble(rule, &refs, &m, &images).unwrap();
            for id in &images {
                prop_assert_eq!(e.predictions[id], argmax(runs[0].row(id).unwrap()));
            }
        }
    }

    #[test]
    fn softmax_is_a_distribution(row in prop::collection::vec(-80.0f32..80.0, 2..50)) {
        let p = softmax_row(&row);
        let sum: f64 = p.iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-12);
        prop_assert!(p.iter().all(|&x| x >= 0.0));
        let best = p.iter().cloned().fold(f64::MIN, f64::max);
        prop_assert_eq!(p[argmax(&row)], best);
    }

    #[test]
    fn singleton_sweep_is_mean_single_accuracy((m, runs) in instance(20, 5, 4)) {
        let images = all(&m);
        let grouped = vec![("only".to_string(), runs.clone())];
        let t = sweep_subsets(&grouped, &m, &images, EnsembleRule::CpAvg).unwrap();
        let accs: Vec<Rational> = runs.iter().map(|r| accuracy(r, &m, &images).unwrap().ratio()).collect();
        prop_assert_eq!(t.mean(1), Some(mean(&accs)));
    }

    #[test]
    fn percent_rendering_tracks_float(num in 0u64..1_000_000, extra in 1u64..1_000_000) {
        let r = Rational::new(num, num + extra);
        let shown: f64 = percent_3dp(&r).parse().unwrap();
        prop_assert!((shown - 100.0 * num as f64 / (num + extra) as f64).abs() <= 0.0005 + 1e-9);
    }

    #[test]
    fn latest_annotation_wins(entries in prop::collection::vec((0usize..8, 0usize..5, 0i64..20), 0..50)) {
        let log: Vec<ErrorAnnotation> = entries.iter().map(|&(img, class, t)| ErrorAnnotation::new(
            format!("img_{img:03}"), ErrorClass::ALL[class], "a",
            Utc.timestamp_millis_opt(t).unwrap(), None)).collect();
        let resolved = resolve_annotations(&log);
        let mut brute: BTreeMap<String, (i64, usize)> = BTreeMap::new();
        for (pos, a) in log.iter().enumerate() {
            let key = (a.timestamp.timestamp_millis(), pos);
            let e = brute.entry(a.image_id.clone()).or_insert(key);
            if key > *e { *e = key; }
        }
        prop_assert_eq!(resolved.len(), brute.len());
        for (id, (_, pos)) in brute {
            prop_assert_eq!(&resolved[&id], &log[pos]);
        }
        let hard: ImageSet = (0..8).map(|i| format!("img_{i:03}")).collect();
        let prev = prevalence(&resolved, &hard);
        if prev.annotated > 0 {
            let total: f64 = prev.rows.iter().map(|r| r.percent).sum();
            prop_assert!((total - 100.0).abs() <= 0.01);
        }
        prop_assert_eq!(prev.annotated + prev.remainder, 8);
    }
}
