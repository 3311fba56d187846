//! Online classification of a record stream, acting as a host or network
//! sensor.
//!
//! Every line is encoded and standardized with the tables stored in the model
//! document and classified on arrival. Records predicted as attacks with
//! confidence at or above the threshold become [`Alert`]s, written as
//!
//! ```text
//! seq,timestamp,role,confidence,record_excerpt
//! ```

use std::fmt;
use std::io::BufRead;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::classifier::{Classifier, Prediction};
use crate::dataset::{binarize_label, split_line};
use crate::error::{Error, Result};
use crate::experiments::{ConfusionMatrix, EvalReport};
use crate::mlp::cross_entropy;
use crate::model_doc::ModelDocument;

/// Number of leading raw fields echoed in an alert.
pub const EXCERPT_FIELDS: usize = 5;
pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SensorRole {
    #[serde(rename = "host")]
    HostSensor,
    #[serde(rename = "network")]
    NetworkSensor,
}

impl fmt::Display for SensorRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SensorRole::HostSensor => "host",
            SensorRole::NetworkSensor => "network",
        })
    }
}

impl FromStr for SensorRole {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "host" | "hids" => Ok(SensorRole::HostSensor),
            "network" | "nids" => Ok(SensorRole::NetworkSensor),
            other => Err(Error::Config(format!(
                "unknown sensor role `{other}` (expected host or network)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alert {
    /// 1-based position of the record among non-blank input lines.
    pub seq: u64,
    /// Seconds since the stream started.
    pub timestamp: f64,
    pub role: SensorRole,
    /// Support for the attack class, in `[threshold, 1]`.
    pub confidence: f64,
    pub excerpt: String,
}

impl Alert {
    pub fn to_line(&self) -> String {
        format!(
            "{},{:.6},{},{:.6},\"{}\"",
            self.seq, self.timestamp, self.role, self.confidence, self.excerpt
        )
    }
}

/// Time source for alert timestamps.
pub trait Clock {
    fn seconds(&mut self) -> f64;
}

/// Monotonic wall clock starting at zero.
pub struct MonotonicClock(Instant);

impl MonotonicClock {
    pub fn start() -> Self {
        MonotonicClock(Instant::now())
    }
}

impl Clock for MonotonicClock {
    fn seconds(&mut self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

/// Always reports zero; for reproducible alert logs.
pub struct FrozenClock;

impl Clock for FrozenClock {
    fn seconds(&mut self) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StreamOptions {
    pub role: SensorRole,
    pub threshold: f64,
}

impl Default for StreamOptions {
    fn default() -> Self {
        StreamOptions {
            role: SensorRole::NetworkSensor,
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamSummary {
    pub records_seen: u64,
    pub classified: u64,
    /// Records with a nominal symbol the model has never seen.
    pub skipped_unknown: u64,
    /// Lines with the wrong field count or unparsable numbers.
    pub skipped_malformed: u64,
    pub predicted_attacks: u64,
    pub alerts: u64,
    /// Present when every classified record carried a label.
    pub report: Option<EvalReport>,
}

impl fmt::Display for StreamSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "records_seen: {}", self.records_seen)?;
        writeln!(f, "classified: {}", self.classified)?;
        writeln!(f, "skipped_unknown_symbol: {}", self.skipped_unknown)?;
        writeln!(f, "skipped_malformed: {}", self.skipped_malformed)?;
        writeln!(f, "predicted_attacks: {}", self.predicted_attacks)?;
        write!(f, "alerts: {}", self.alerts)?;
        if let Some(r) = &self.report {
            write!(f, "\naccuracy: {:.6}", r.accuracy)?;
            let opt = |v: Option<f64>| v.map_or("n/a".to_string(), |v| format!("{v:.6}"));
            write!(f, "\np_detection: {}", opt(r.p_detection))?;
            write!(f, "\np_false_alarm: {}", opt(r.p_false_alarm))?;
            write!(f, "\np_miss: {}", opt(r.p_miss))?;
            write!(f, "\nloss: {}", opt(r.loss))?;
        }
        Ok(())
    }
}

/// A classified line: prediction and the binary label when present.
#[derive(Debug, Clone, PartialEq)]
pub struct Classified {
    pub prediction: Prediction,
    pub truth: Option<u8>,
    pub excerpt: String,
}

/// Check that a document can drive a sensor: it must carry its
/// preprocessing tables and produce a confidence.
pub fn check_document(doc: &ModelDocument) -> Result<()> {
    if doc.encoding.is_none() || doc.standardization.is_none() {
        return Err(Error::Format(
            "model document lacks the encoding or standardization tables needed for raw records".into(),
        ));
    }
    if let Classifier::Svm(_) = doc.classifier {
        return Err(Error::Contract(
            "svm models output margins, not confidences, and cannot drive a sensor".into(),
        ));
    }
    Ok(())
}

/// Encode, standardize and classify one raw line.
pub fn classify_line(doc: &ModelDocument, line: &str, line_no: usize) -> Result<Classified> {
    let split = split_line(line, line_no, true)?;
    let x = doc.prepare(&split.features)?;
    let prediction = doc.classifier.predict(&x)?;
    Ok(Classified {
        prediction,
        truth: split.label.as_deref().map(binarize_label),
        excerpt: split.features[..EXCERPT_FIELDS].join(","),
    })
}

/// Run the sensor over `source`, passing each alert to `sink` in input order.
pub fn classify_stream<R: BufRead>(
    doc: &ModelDocument,
    source: R,
    options: StreamOptions,
    clock: &mut dyn Clock,
    sink: &mut dyn FnMut(&Alert) -> Result<()>,
) -> Result<StreamSummary> {
    check_document(doc)?;
    if !(DEFAULT_THRESHOLD..=1.0).contains(&options.threshold) {
        return Err(Error::Config(format!(
            "alert threshold must lie in [0.5, 1], got {}",
            options.threshold
        )));
    }
    let mut summary = StreamSummary {
        records_seen: 0,
        classified: 0,
        skipped_unknown: 0,
        skipped_malformed: 0,
        predicted_attacks: 0,
        alerts: 0,
        report: None,
    };
    let mut confusion = ConfusionMatrix::default();
    let mut loss_sum = 0.0;
    let mut has_loss = true;
    let mut all_labeled = true;

    for (idx, line) in source.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        summary.records_seen += 1;
        let seq = summary.records_seen;
        let classified = match classify_line(doc, &line, idx + 1) {
            Ok(c) => c,
            Err(Error::UnknownSymbol { field, symbol }) => {
                log::warn!("record {seq}: unknown {field} `{symbol}`, skipped");
                summary.skipped_unknown += 1;
                continue;
            }
            Err(e @ (Error::Parse { .. } | Error::InvalidValue { .. })) => {
                log::warn!("record {seq}: {e}, skipped");
                summary.skipped_malformed += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        summary.classified += 1;
        let p = classified.prediction;
        match classified.truth {
            Some(y) => {
                confusion.record(p.class, y);
                match p.attack_probability {
                    Some(q) if has_loss => loss_sum += cross_entropy(y, q),
                    _ => has_loss = false,
                }
            }
            None => all_labeled = false,
        }
        if p.class == 1 {
            summary.predicted_attacks += 1;
            let confidence = p.confidence.unwrap_or(0.0);
            if confidence >= options.threshold {
                summary.alerts += 1;
                let alert = Alert {
                    seq,
                    timestamp: clock.seconds(),
                    role: options.role,
                    confidence,
                    excerpt: classified.excerpt,
                };
                sink(&alert)?;
            }
        }
    }
    if all_labeled && summary.classified > 0 {
        let loss = has_loss.then(|| loss_sum / summary.classified as f64);
        summary.report = Some(EvalReport::from_confusion(confusion, loss));
    }
    Ok(summary)
}
