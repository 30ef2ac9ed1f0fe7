//! Report emission: `report.json`, `tables.csv` and SVG charts.
//!
//! Output depends only on the [`Report`] value, so identical inputs give
//! byte-identical files.

mod assemble;
mod svg;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ensemble::{oracle_upper_bound, SweepTable};
use crate::error::{Error, Result};
use crate::model::{EnsembleResult, OverlapPartition, SubsetCorrectnessTable};
use crate::rational::{percent_3dp, Exact, Rational};
use crate::store::write_json;
use crate::taxonomy::{Disagreement, Prevalence};

pub use assemble::{standard_report, ReportInputs};
pub use svg::{overlap_bar_segments, BarSegment, ChartOptions};

pub const REPORT_JSON: &str = "report.json";
pub const TABLES_CSV: &str = "tables.csv";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverlapSection {
    pub title: String,
    pub partition: OverlapPartition,
    pub oracle_upper_bound: Exact,
}

impl OverlapSection {
    pub fn new(title: impl Into<String>, partition: OverlapPartition) -> Self {
        let bound = oracle_upper_bound(&partition).into();
        OverlapSection {
            title: title.into(),
            partition,
            oracle_upper_bound: bound,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetSection {
    pub title: String,
    pub table: SubsetCorrectnessTable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleSection {
    pub title: String,
    pub result: EnsembleResult,
}

/// A rows × columns accuracy table, e.g. single / vote / cp-avg by method.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccuracyGrid {
    pub title: String,
    pub rows: Vec<String>,
    pub columns: Vec<String>,
    pub cells: Vec<Vec<Option<Exact>>>,
}

impl AccuracyGrid {
    pub fn new(title: impl Into<String>, rows: Vec<String>, columns: Vec<String>) -> Self {
        let cells = vec![vec![None; columns.len()]; rows.len()];
        AccuracyGrid {
            title: title.into(),
            rows,
            columns,
            cells,
        }
    }

    pub fn set(&mut self, row: usize, column: usize, value: Rational) {
        self.cells[row][column] = Some(Exact(value));
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepSection {
    pub title: String,
    pub table: SweepTable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrevalenceSection {
    pub title: String,
    pub prevalence: Prevalence,
    #[serde(default)]
    pub disagreements: Vec<Disagreement>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
    #[serde(default)]
    pub overlaps: Vec<OverlapSection>,
    #[serde(default)]
    pub subsets: Vec<SubsetSection>,
    #[serde(default)]
    pub ensembles: Vec<EnsembleSection>,
    #[serde(default)]
    pub grids: Vec<AccuracyGrid>,
    #[serde(default)]
    pub sweeps: Vec<SweepSection>,
    #[serde(default)]
    pub prevalence: Option<PrevalenceSection>,
}

impl Report {
    pub fn is_empty(&self) -> bool {
        self.overlaps.is_empty()
            && self.subsets.is_empty()
            && self.ensembles.is_empty()
            && self.grids.is_empty()
            && self.sweeps.is_empty()
            && self.prevalence.is_none()
    }
}

/// Files written by [`emit_report`], in write order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportFiles {
    pub paths: Vec<PathBuf>,
}

pub fn emit_report(report: &Report, out_dir: &Path, options: &ChartOptions) -> Result<ReportFiles> {
    if report.is_empty() {
        return Err(Error::Invalid("report has no sections".into()));
    }
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut paths = Vec::new();

    let json_path = out_dir.join(REPORT_JSON);
    write_json(&json_path, report)?;
    paths.push(json_path);

    let csv_path = out_dir.join(TABLES_CSV);
    let csv = tables_csv(report)?;
    fs::write(&csv_path, csv).map_err(|e| Error::io(&csv_path, e))?;
    paths.push(csv_path);

    for (name, body) in svg::charts(report, options) {
        let path = out_dir.join(name);
        fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        paths.push(path);
    }
    Ok(ReportFiles { paths })
}

pub const CSV_HEADER: [&str; 7] = ["section", "title", "row", "column", "numerator", "denominator", "percent"];

fn subset_label(names: &[&str]) -> String {
    if names.is_empty() {
        "(none)".to_string()
    } else {
        names.join("+")
    }
}

struct CsvRow {
    section: &'static str,
    title: String,
    row: String,
    column: String,
    numerator: u64,
    denominator: u64,
}

impl CsvRow {
    fn percent(&self) -> String {
        if self.denominator == 0 {
            String::new()
        } else {
            percent_3dp(&Rational::new(self.numerator, self.denominator))
        }
    }
}

fn exact_row(section: &'static str, title: &str, row: String, column: String, r: &Rational) -> CsvRow {
    CsvRow {
        section,
        title: title.to_string(),
        row,
        column,
        numerator: *r.numer(),
        denominator: *r.denom(),
    }
}

/// Flattens every section into long-format rows.
fn csv_rows(report: &Report) -> Vec<CsvRow> {
    let mut rows = Vec::new();
    for s in &report.overlaps {
        let total = s.partition.num_images();
        for (o, &count) in s.partition.group_sizes().iter().enumerate().rev() {
            rows.push(CsvRow {
                section: "overlap",
                title: s.title.clone(),
                row: format!("o={o}"),
                column: "images".into(),
                numerator: count,
                denominator: total,
            });
        }
        rows.push(exact_row(
            "overlap",
            &s.title,
            "oracle_upper_bound".into(),
            "accuracy".into(),
            &s.oracle_upper_bound.0,
        ));
    }
    for s in &report.subsets {
        let total = s.table.total();
        for mask in 0..s.table.counts().len() as u32 {
            rows.push(CsvRow {
                section: "subsets",
                title: s.title.clone(),
                row: subset_label(&s.table.subset_names(mask)),
                column: "images".into(),
                numerator: s.table.count(mask),
                denominator: total,
            });
        }
    }
    for s in &report.ensembles {
        rows.push(CsvRow {
            section: "ensemble",
            title: s.title.clone(),
            row: s.result.rule.to_string(),
            column: "accuracy".into(),
            numerator: s.result.accuracy.correct,
            denominator: s.result.accuracy.total,
        });
    }
    for g in &report.grids {
        for (r, label) in g.rows.iter().enumerate() {
            for (c, column) in g.columns.iter().enumerate() {
                if let Some(Exact(v)) = &g.cells[r][c] {
                    rows.push(exact_row("grid", &g.title, label.clone(), column.clone(), v));
                }
            }
        }
    }
    for s in &report.sweeps {
        for e in &s.table.entries {
            let names: Vec<&str> = e.subset.iter().map(String::as_str).collect();
            rows.push(exact_row(
                "sweep",
                &s.title,
                subset_label(&names),
                s.table.rule.to_string(),
                &e.mean_accuracy,
            ));
        }
    }
    if let Some(p) = &report.prevalence {
        for r in &p.prevalence.rows {
            rows.push(CsvRow {
                section: "prevalence",
                title: p.title.clone(),
                row: r.error_class.to_string(),
                column: "share".into(),
                numerator: r.count,
                denominator: p.prevalence.annotated,
            });
        }
        rows.push(CsvRow {
            section: "prevalence",
            title: p.title.clone(),
            row: "unannotated".into(),
            column: "images".into(),
            numerator: p.prevalence.remainder,
            denominator: p.prevalence.hard_images,
        });
    }
    rows
}

fn tables_csv(report: &Report) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Invalid(format!("csv: {e}"));
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in csv_rows(report) {
        w.write_record([
            r.section.to_string(),
            r.title.clone(),
            r.row.clone(),
            r.column.clone(),
            r.numerator.to_string(),
            r.denominator.to_string(),
            r.percent(),
        ])
        .map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::Invalid(format!("csv: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn partition(group: &[(usize, usize)], n: usize) -> OverlapPartition {
        let mut labels = BTreeMap::new();
        let mut k = 0;
        for &(o, count) in group {
            for _ in 0..count {
                labels.insert(format!("img{k:04}"), o);
                k += 1;
            }
        }
        OverlapPartition::from_labels(n, vec![], labels).unwrap()
    }

    #[test]
    fn empty_report_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        assert!(emit_report(&Report::default(), dir.path(), &ChartOptions::default()).is_err());
    }

    #[test]
    fn single_partition_report() {
        let dir = tempfile::tempdir().unwrap();
        let report = Report {
            overlaps: vec![OverlapSection::new("wsdan/cub", partition(&[(0, 2), (3, 5), (5, 13)], 5))],
            ..Report::default()
        };
        let files = emit_report(&report, dir.path(), &ChartOptions::default()).unwrap();
        let names: Vec<_> = files
            .paths
            .iter()
            .map(|p| p.file_name().unwrap().to_str().unwrap().to_string())
            .collect();
        assert_eq!(names, ["report.json", "tables.csv", "chart-overlap.svg"]);

        let json: Report = serde_json::from_slice(&fs::read(dir.path().join(REPORT_JSON)).unwrap()).unwrap();
        assert_eq!(json, report);
        assert_eq!(json.overlaps.len(), 1);

        let svg = fs::read_to_string(dir.path().join("chart-overlap.svg")).unwrap();
        assert_eq!(svg.matches("class=\"segment\"").count(), 6);
    }

    #[test]
    fn grid_cells_use_three_decimals() {
        let methods: Vec<String> = ["WS-DAN", "S3N", "MPN-COV", "DCL", "MaxEnt"].map(String::from).to_vec();
        let rows: Vec<String> = ["Single", "Vote", "cp-Avg"].map(String::from).to_vec();
        let mut grid = AccuracyGrid::new("CUB", rows, methods);
        for r in 0..3 {
            for c in 0..5 {
                grid.set(r, c, Rational::new(25838 + (r * 5 + c) as u64, 28970));
            }
        }
        let report = Report {
            grids: vec![grid],
            ..Report::default()
        };
        let csv = String::from_utf8(tables_csv(&report).unwrap()).unwrap();
        let lines: Vec<&str> = csv.split("\r\n").filter(|l| !l.is_empty()).collect();
        assert_eq!(lines[0], "section,title,row,column,numerator,denominator,percent");
        assert_eq!(lines.len(), 16);
        assert!(lines[1].ends_with(",89.189"), "{}", lines[1]);
        for l in &lines[1..] {
            let pct = l.rsplit(',').next().unwrap();
            let (_, frac) = pct.split_once('.').unwrap();
            assert_eq!(frac.len(), 3);
        }
    }

    #[test]
    fn csv_quotes_awkward_titles() {
        let report = Report {
            overlaps: vec![OverlapSection::new("a, \"b\"", partition(&[(1, 1)], 1))],
            ..Report::default()
        };
        let csv = String::from_utf8(tables_csv(&report).unwrap()).unwrap();
        assert!(csv.contains("\"a, \"\"b\"\"\""));
    }
}
