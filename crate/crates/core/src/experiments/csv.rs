//! CSV emission for plotting. Values carry six fractional digits; absent
//! metrics are empty fields.

use std::fmt::Write as _;
use std::path::Path;

use super::metrics::MetricSummary;
use super::sweep::{Comparison, SweepResult};
use crate::error::Result;
use crate::util::write_atomic;

pub const METRIC_COLUMNS: [&str; 8] = [
    "accuracy_mean",
    "accuracy_std",
    "loss_mean",
    "loss_std",
    "p_detection",
    "p_false_alarm",
    "p_miss",
    "train_seconds",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CsvOptions {
    /// Write wall-clock training time. Off makes files byte-reproducible.
    pub timing: bool,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions { timing: true }
    }
}

fn num(out: &mut String, v: Option<f64>) {
    out.push(',');
    if let Some(v) = v {
        let _ = write!(out, "{v:.6}");
    }
}

fn metric_fields(out: &mut String, s: &MetricSummary, opts: CsvOptions) {
    num(out, Some(s.accuracy.mean));
    num(out, Some(s.accuracy.std));
    num(out, s.loss.map(|m| m.mean));
    num(out, s.loss.map(|m| m.std));
    num(out, s.p_detection);
    num(out, s.p_false_alarm);
    num(out, s.p_miss);
    num(out, opts.timing.then_some(s.train_seconds));
}

/// Columns: `param` then the metric columns.
pub fn sweep_csv(result: &SweepResult, opts: CsvOptions) -> String {
    let mut out = format!("param,{}\n", METRIC_COLUMNS.join(","));
    for row in &result.rows {
        out.push_str(&row.value);
        metric_fields(&mut out, &row.summary, opts);
        out.push('\n');
    }
    out
}

/// Columns: `algorithm`, the metric columns, `paper_reference_accuracy`.
pub fn comparison_csv(result: &Comparison, opts: CsvOptions) -> String {
    let mut out = format!("algorithm,{},paper_reference_accuracy\n", METRIC_COLUMNS.join(","));
    for row in &result.rows {
        out.push_str(&row.algorithm);
        metric_fields(&mut out, &row.summary, opts);
        num(&mut out, Some(row.paper_reference_accuracy));
        out.push('\n');
    }
    out
}

/// Write already-rendered CSV text atomically.
pub fn emit_csv(text: &str, destination: &Path) -> Result<()> {
    write_atomic(destination, text.as_bytes())?;
    Ok(())
}
