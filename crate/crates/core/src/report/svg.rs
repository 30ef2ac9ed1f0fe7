use std::fmt::Write;

use super::Report;
use crate::model::{ErrorClass, OverlapPartition};

#[derive(Debug, Clone, PartialEq)]
pub struct ChartOptions {
    /// Full length of one bar, in px.
    pub bar_width: f64,
    pub bar_height: f64,
    pub label_width: f64,
}

impl Default for ChartOptions {
    fn default() -> Self {
        ChartOptions {
            bar_width: 600.0,
            bar_height: 24.0,
            label_width: 200.0,
        }
    }
}

const MARGIN: f64 = 16.0;
const GAP: f64 = 14.0;
const TITLE_HEIGHT: f64 = 28.0;
const GREEN: (u8, u8, u8) = (0x2e, 0x7d, 0x32);
const RED: (u8, u8, u8) = (0xc6, 0x28, 0x28);
const NEUTRAL: &str = "#4a6fa5";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarSegment {
    pub overlap: usize,
    pub count: u64,
    /// Offset from the start of the bar.
    pub x: f64,
    pub width: f64,
}

/// Segments of one stacked overlap bar, ordered `o = N, N-1, ..., 0`.
/// Edges come from cumulative counts, so widths sum to `bar_width` up to
/// one rounding step.
pub fn overlap_bar_segments(partition: &OverlapPartition, bar_width: f64) -> Vec<BarSegment> {
    let total = partition.num_images();
    let edge = |cum: u64| {
        if total == 0 {
            0.0
        } else {
            bar_width * cum as f64 / total as f64
        }
    };
    let mut cum = 0u64;
    partition
        .group_sizes()
        .iter()
        .enumerate()
        .rev()
        .map(|(o, &count)| {
            let x = edge(cum);
            cum += count;
            BarSegment {
                overlap: o,
                count,
                x,
                width: edge(cum) - x,
            }
        })
        .collect()
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Green for `o = n`, red for `o = 0`, linear in between.
fn overlap_color(o: usize, n: usize) -> String {
    let t = if n == 0 { 1.0 } else { o as f64 / n as f64 };
    let mix = |a: u8, b: u8| (b as f64 + (a as f64 - b as f64) * t).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(GREEN.0, RED.0), mix(GREEN.1, RED.1), mix(GREEN.2, RED.2))
}

fn open_svg(out: &mut String, width: f64, height: f64, title: &str) {
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{width:.0}" height="{height:.0}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{MARGIN}" y="20" font-size="14" font-weight="bold">{}</text>"#,
        escape(title)
    );
}

fn overlap_chart(report: &Report, opt: &ChartOptions) -> String {
    let bars = &report.overlaps;
    let width = MARGIN * 2.0 + opt.label_width + opt.bar_width;
    let height = TITLE_HEIGHT + MARGIN * 2.0 + bars.len() as f64 * (opt.bar_height + GAP) + 20.0;
    let mut out = String::new();
    open_svg(&mut out, width, height, "Prediction overlap");
    let x0 = MARGIN + opt.label_width;
    for (b, section) in bars.iter().enumerate() {
        let y = TITLE_HEIGHT + MARGIN + b as f64 * (opt.bar_height + GAP);
        let p = &section.partition;
        let _ = writeln!(
            out,
            r#"<g class="bar" data-title="{}" data-n="{}">"#,
            escape(&section.title),
            p.n()
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.3}" y="{:.3}" text-anchor="end">{}</text>"#,
            x0 - 6.0,
            y + opt.bar_height * 0.7,
            escape(&section.title)
        );
        for seg in overlap_bar_segments(p, opt.bar_width) {
            let _ = writeln!(
                out,
                r#"<rect class="segment" data-overlap="{}" data-count="{}" x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="{}"><title>o={}: {} images</title></rect>"#,
                seg.overlap,
                seg.count,
                x0 + seg.x,
                y,
                seg.width,
                opt.bar_height,
                overlap_color(seg.overlap, p.n()),
                seg.overlap,
                seg.count
            );
        }
        let _ = writeln!(out, "</g>");
    }
    let legend_y = height - MARGIN;
    let _ = writeln!(
        out,
        r#"<text x="{x0:.3}" y="{legend_y:.3}">segments left to right: o = N (all runs correct) down to o = 0 (no run correct)</text>"#
    );
    out.push_str("</svg>\n");
    out
}

fn hbar_chart(title: &str, rows: &[(String, f64, String)], opt: &ChartOptions) -> String {
    let width = MARGIN * 2.0 + opt.label_width + opt.bar_width + 80.0;
    let height = TITLE_HEIGHT + MARGIN * 2.0 + rows.len() as f64 * (opt.bar_height + GAP);
    let mut out = String::new();
    open_svg(&mut out, width, height, title);
    let x0 = MARGIN + opt.label_width;
    for (i, (label, fraction, text)) in rows.iter().enumerate() {
        let y = TITLE_HEIGHT + MARGIN + i as f64 * (opt.bar_height + GAP);
        let w = opt.bar_width * fraction.clamp(0.0, 1.0);
        let _ = writeln!(
            out,
            r#"<text x="{:.3}" y="{:.3}" text-anchor="end">{}</text>"#,
            x0 - 6.0,
            y + opt.bar_height * 0.7,
            escape(label)
        );
        let _ = writeln!(
            out,
            r#"<rect class="bar" x="{x0:.3}" y="{y:.3}" width="{w:.3}" height="{:.3}" fill="{NEUTRAL}"/>"#,
            opt.bar_height
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.3}" y="{:.3}">{}</text>"#,
            x0 + w + 6.0,
            y + opt.bar_height * 0.7,
            escape(text)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn subsets_chart(report: &Report, opt: &ChartOptions) -> String {
    let mut rows = Vec::new();
    for s in &report.subsets {
        let max = s.table.counts().iter().copied().max().unwrap_or(0).max(1);
        for mask in 0..s.table.counts().len() as u32 {
            let names = s.table.subset_names(mask);
            let label = if names.is_empty() {
                format!("{}: none", s.title)
            } else {
                format!("{}: {}", s.title, names.join("+"))
            };
            let count = s.table.count(mask);
            rows.push((label, count as f64 / max as f64, count.to_string()));
        }
    }
    hbar_chart("Images correct by exactly each subset of methods", &rows, opt)
}

fn prevalence_chart(report: &Report, opt: &ChartOptions) -> Option<String> {
    let section = report.prevalence.as_ref()?;
    let p = &section.prevalence;
    let rows: Vec<_> = ErrorClass::ALL
        .iter()
        .map(|&c| {
            let row = p.row(c);
            (
                c.label().to_string(),
                row.percent / 100.0,
                format!("{}% ({})", p.percent_text(c), row.count),
            )
        })
        .collect();
    let title = format!(
        "{}: {} of {} hard images annotated",
        section.title, p.annotated, p.hard_images
    );
    Some(hbar_chart(&title, &rows, opt))
}

/// `(file name, contents)` for each chart the report has data for.
pub(super) fn charts(report: &Report, opt: &ChartOptions) -> Vec<(&'static str, String)> {
    let mut out = Vec::new();
    if !report.overlaps.is_empty() {
        out.push(("chart-overlap.svg", overlap_chart(report, opt)));
    }
    if !report.subsets.is_empty() {
        out.push(("chart-subsets.svg", subsets_chart(report, opt)));
    }
    if let Some(svg) = prevalence_chart(report, opt) {
        out.push(("chart-prevalence.svg", svg));
    }
    out
}
