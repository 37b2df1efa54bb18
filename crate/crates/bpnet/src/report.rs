//! Evaluation report files: metrics JSON, tabular CSVs and SVG figures.
//! Every number is written in shortest round-trip form, so identical
//! predictions give byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use bpnet_core::dataset::RECORD_RATE_HZ;
use bpnet_core::metrics::{bland_altman, EvalReport, Pair, SubjectPrediction};

use crate::error::{CoreContext, Error, Result};
use crate::records::write_atomic;
use crate::svg::{render, Panel, Series};

pub const HISTOGRAM_BIN_WIDTH_MMHG: f64 = 1.0;

pub const METRICS_FILE: &str = "metrics.json";
pub const BHS_FILE: &str = "bhs.csv";
pub const BLAND_ALTMAN_FILE: &str = "bland_altman.csv";
pub const HISTOGRAM_FILE: &str = "histogram.csv";
pub const TRACKING_FILE: &str = "tracking.csv";
pub const CSV_FILES: [&str; 4] = [BHS_FILE, BLAND_ALTMAN_FILE, HISTOGRAM_FILE, TRACKING_FILE];
pub const SVG_FILES: [&str; 4] = ["tracking.svg", "histogram.svg", "bland_altman.svg", "regression.svg"];

const SBP_COLOUR: &str = "#c0392b";
const DBP_COLOUR: &str = "#2c6fbb";
const REF_COLOUR: &str = "#222222";

/// Predictions behind a report. `tracking_start` is the record index of the
/// first subject's first test sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportInputs {
    pub subjects: Vec<SubjectPrediction>,
    pub tracking_start: usize,
}

const QUANTITIES: [(&str, &str); 2] = [("sbp", SBP_COLOUR), ("dbp", DBP_COLOUR)];

fn pick<'a, T>(pair: &'a Pair<T>, quantity: &str) -> &'a T {
    if quantity == "sbp" {
        &pair.sbp
    } else {
        &pair.dbp
    }
}

fn stacked(subjects: &[SubjectPrediction], quantity: &str) -> (Vec<f64>, Vec<f64>) {
    let mut reference = Vec::new();
    let mut estimate = Vec::new();
    for s in subjects {
        let (r, e) = if quantity == "sbp" {
            (&s.sbp_ref, &s.sbp_est)
        } else {
            (&s.dbp_ref, &s.dbp_est)
        };
        reference.extend_from_slice(r);
        estimate.extend_from_slice(e);
    }
    (reference, estimate)
}

pub fn metrics_json(report: &EvalReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

pub fn bhs_csv(report: &EvalReport) -> String {
    let mut out = String::from("quantity,pct_within_5,pct_within_10,pct_within_15,grade\n");
    for (q, _) in QUANTITIES {
        let b = pick(&report.bhs, q);
        let _ = writeln!(
            out,
            "{q},{},{},{},{:?}",
            b.pct_within_5, b.pct_within_10, b.pct_within_15, b.grade
        );
    }
    out
}

/// One `point` row per sample (`x` = mean of pair, `y` = estimate minus
/// reference), then the bias and limits of agreement with an empty `x`.
pub fn bland_altman_csv(inputs: &ReportInputs) -> Result<String> {
    let mut out = String::from("quantity,kind,x,y\n");
    for q in ["sbp", "dbp"] {
        let (r, e) = stacked(&inputs.subjects, q);
        let (ba, points) = bland_altman(&r, &e).context(|| format!("{q} Bland-Altman"))?;
        for (m, d) in points {
            let _ = writeln!(out, "{q},point,{m},{d}");
        }
        let _ = writeln!(out, "{q},mean_diff,,{}", ba.mean_diff);
        let _ = writeln!(out, "{q},loa_low,,{}", ba.loa_low);
        let _ = writeln!(out, "{q},loa_high,,{}", ba.loa_high);
    }
    Ok(out)
}

pub fn histogram_csv(report: &EvalReport) -> String {
    let mut out = String::from("quantity,bin_low,bin_high,count\n");
    for (q, _) in QUANTITIES {
        let h = pick(&report.histogram, q);
        for (k, count) in h.counts.iter().enumerate() {
            let _ = writeln!(out, "{q},{},{},{count}", h.edges[k], h.edges[k + 1]);
        }
    }
    out
}

fn time_s(index: usize) -> f64 {
    index as f64 / RECORD_RATE_HZ
}

/// Reference and estimate over the first subject's test segment.
pub fn tracking_csv(inputs: &ReportInputs) -> String {
    let mut out = String::from("t,sbp_ref,sbp_est,dbp_ref,dbp_est\n");
    if let Some(s) = inputs.subjects.first() {
        for i in 0..s.sbp_ref.len() {
            let _ = writeln!(
                out,
                "{:.3},{},{},{},{}",
                time_s(inputs.tracking_start + i),
                s.sbp_ref[i],
                s.sbp_est[i],
                s.dbp_ref[i],
                s.dbp_est[i]
            );
        }
    }
    out
}

fn tracking_svg(inputs: &ReportInputs) -> String {
    let mut panel = Panel::new("Continuous tracking (first test subject)", "time (s)", "pressure (mmHg)");
    if let Some(s) = inputs.subjects.first() {
        let t = |i: usize| time_s(inputs.tracking_start + i);
        let series = |v: &[f64]| v.iter().enumerate().map(|(i, &y)| (t(i), y)).collect::<Vec<_>>();
        panel = panel
            .with(Series::Line { label: "SBP reference".into(), colour: REF_COLOUR, points: series(&s.sbp_ref) })
            .with(Series::Line { label: "SBP estimate".into(), colour: SBP_COLOUR, points: series(&s.sbp_est) })
            .with(Series::Line { label: "DBP reference".into(), colour: REF_COLOUR, points: series(&s.dbp_ref) })
            .with(Series::Line { label: "DBP estimate".into(), colour: DBP_COLOUR, points: series(&s.dbp_est) });
    }
    render(&[panel])
}

fn histogram_svg(report: &EvalReport) -> String {
    let panels: Vec<Panel> = QUANTITIES
        .into_iter()
        .map(|(q, colour)| {
            let h = pick(&report.histogram, q);
            let total = h.total().max(1) as f64;
            let bars = h
                .counts
                .iter()
                .enumerate()
                .map(|(k, &c)| (h.edges[k], h.edges[k + 1], 100.0 * c as f64 / total))
                .collect();
            Panel::new(format!("{} error", q.to_uppercase()), "estimate - reference (mmHg)", "samples (%)")
                .with(Series::Bars { label: String::new(), colour, bars })
        })
        .collect();
    render(&panels)
}

fn bland_altman_svg(inputs: &ReportInputs) -> Result<String> {
    let mut panels = Vec::new();
    for (q, colour) in QUANTITIES {
        let (r, e) = stacked(&inputs.subjects, q);
        let (ba, points) = bland_altman(&r, &e).context(|| format!("{q} Bland-Altman"))?;
        panels.push(
            Panel::new(format!("{} Bland-Altman", q.to_uppercase()), "mean of pair (mmHg)", "difference (mmHg)")
                .with(Series::Scatter { label: String::new(), colour, points })
                .with(Series::HorizontalRule {
                    label: format!("bias {:.2}", ba.mean_diff),
                    colour: REF_COLOUR,
                    y: ba.mean_diff,
                })
                .with(Series::HorizontalRule {
                    label: format!("LOA [{:.2}, {:.2}]", ba.loa_low, ba.loa_high),
                    colour: "#7f7f7f",
                    y: ba.loa_low,
                })
                .with(Series::HorizontalRule { label: String::new(), colour: "#7f7f7f", y: ba.loa_high }),
        );
    }
    Ok(render(&panels))
}

fn regression_svg(inputs: &ReportInputs, report: &EvalReport) -> String {
    let panels: Vec<Panel> = QUANTITIES
        .into_iter()
        .map(|(q, colour)| {
            let (r, e) = stacked(&inputs.subjects, q);
            let lo = r.iter().chain(&e).copied().fold(f64::INFINITY, f64::min);
            let hi = r.iter().chain(&e).copied().fold(f64::NEG_INFINITY, f64::max);
            let title = match pick(&report.pearson_r, q) {
                Some(v) => format!("{} regression, r = {v:.3}", q.to_uppercase()),
                None => format!("{} regression, r undefined", q.to_uppercase()),
            };
            Panel::new(title, "reference (mmHg)", "estimate (mmHg)")
                .with(Series::Scatter { label: String::new(), colour, points: r.into_iter().zip(e).collect() })
                .with(Series::Line { label: "identity".into(), colour: REF_COLOUR, points: vec![(lo, lo), (hi, hi)] })
        })
        .collect();
    render(&panels)
}

/// Writes the five data files and four figures into `dir`, creating it if
/// needed. Returns the written paths in a fixed order.
pub fn write_report(dir: &Path, report: &EvalReport, inputs: &ReportInputs) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let files: Vec<(&str, String)> = vec![
        (METRICS_FILE, metrics_json(report)),
        (BHS_FILE, bhs_csv(report)),
        (BLAND_ALTMAN_FILE, bland_altman_csv(inputs)?),
        (HISTOGRAM_FILE, histogram_csv(report)),
        (TRACKING_FILE, tracking_csv(inputs)),
        (SVG_FILES[0], tracking_svg(inputs)),
        (SVG_FILES[1], histogram_svg(report)),
        (SVG_FILES[2], bland_altman_svg(inputs)?),
        (SVG_FILES[3], regression_svg(inputs, report)),
    ];
    let mut written = Vec::with_capacity(files.len());
    for (name, contents) in files {
        let path = dir.join(name);
        write_atomic(&path, contents.as_bytes())?;
        written.push(path);
    }
    Ok(written)
}
