//! NSL-KDD ingestion: parsing, label collapse, nominal encoding,
//! standardization, stratified folds and subsampling.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of features carried by every NSL-KDD record.
pub const FEATURE_COUNT: usize = 41;

pub const PROTOCOL_FIELD: usize = 1;
pub const SERVICE_FIELD: usize = 2;
pub const FLAG_FIELD: usize = 3;

/// First integer code handed out to service names.
pub const SERVICE_CODE_BASE: u32 = 15;

const PROTOCOL_CODES: [(&str, u32); 3] = [("tcp", 2), ("udp", 3), ("icmp", 4)];

const FLAG_CODES: [(&str, u32); 10] = [
    ("OTH", 5),
    ("REJ", 6),
    ("RSTO", 7),
    ("RSTR", 8),
    ("S0", 9),
    ("S1", 10),
    ("S2", 11),
    ("S3", 12),
    ("SF", 13),
    ("SH", 14),
];

/// `RSTOS0` occurs in the NSL-KDD files but has no code in the published
/// mapping. It gets the first free code after `SH`.
const EXTRA_FLAG_CODES: [(&str, u32); 1] = [("RSTOS0", 15)];

/// Column names of the 41 NSL-KDD features, in file order.
pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "duration",
    "protocol_type",
    "service",
    "flag",
    "src_bytes",
    "dst_bytes",
    "land",
    "wrong_fragment",
    "urgent",
    "hot",
    "num_failed_logins",
    "logged_in",
    "num_compromised",
    "root_shell",
    "su_attempted",
    "num_root",
    "num_file_creations",
    "num_shells",
    "num_access_files",
    "num_outbound_cmds",
    "is_host_login",
    "is_guest_login",
    "count",
    "srv_count",
    "serror_rate",
    "srv_serror_rate",
    "rerror_rate",
    "srv_rerror_rate",
    "same_srv_rate",
    "diff_srv_rate",
    "srv_diff_host_rate",
    "dst_host_count",
    "dst_host_srv_count",
    "dst_host_same_srv_rate",
    "dst_host_diff_srv_rate",
    "dst_host_same_src_port_rate",
    "dst_host_srv_diff_host_rate",
    "dst_host_serror_rate",
    "dst_host_srv_serror_rate",
    "dst_host_rerror_rate",
    "dst_host_srv_rerror_rate",
];

/// One line of an NSL-KDD file before any numeric conversion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawRecord {
    pub features: Vec<String>,
    pub label: String,
    pub difficulty: Option<u32>,
}

impl RawRecord {
    pub fn protocol(&self) -> &str {
        &self.features[PROTOCOL_FIELD]
    }

    pub fn service(&self) -> &str {
        &self.features[SERVICE_FIELD]
    }

    pub fn flag(&self) -> &str {
        &self.features[FLAG_FIELD]
    }
}

/// Fields of a single line, label optional (unlabeled sensor input).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitLine {
    pub features: Vec<String>,
    pub label: Option<String>,
    pub difficulty: Option<u32>,
}

/// Split one comma-separated line into features, label and difficulty.
///
/// Accepts 42 or 43 fields, and 41 as well when `allow_unlabeled` is set.
pub fn split_line(line: &str, line_no: usize, allow_unlabeled: bool) -> Result<SplitLine> {
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    let n = fields.len();
    let labeled = match n {
        42 | 43 => true,
        41 if allow_unlabeled => false,
        _ => {
            let accepted = if allow_unlabeled { "41, 42 or 43" } else { "42 or 43" };
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected {accepted} comma-separated fields, found {n}"),
            });
        }
    };
    let features = fields[..FEATURE_COUNT].iter().map(|f| f.to_string()).collect();
    let label = if labeled {
        let label = fields[FEATURE_COUNT].trim_end_matches('.');
        if label.is_empty() {
            return Err(Error::Parse {
                line: line_no,
                message: "empty label".into(),
            });
        }
        Some(label.to_string())
    } else {
        None
    };
    let difficulty = if n == 43 {
        let raw = fields[42];
        Some(raw.parse::<u32>().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("difficulty `{raw}` is not a non-negative integer"),
        })?)
    } else {
        None
    };
    Ok(SplitLine {
        features,
        label,
        difficulty,
    })
}

/// Parse an NSL-KDD text stream. Blank lines are skipped; line numbers in
/// errors are 1-based positions in the stream.
pub fn parse_nslkdd<R: BufRead>(source: R) -> Result<Vec<RawRecord>> {
    let mut records = Vec::new();
    for (idx, line) in source.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let split = split_line(&line, idx + 1, false)?;
        records.push(RawRecord {
            features: split.features,
            label: split.label.expect("labeled line"),
            difficulty: split.difficulty,
        });
    }
    if records.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(records)
}

pub fn parse_nslkdd_str(text: &str) -> Result<Vec<RawRecord>> {
    parse_nslkdd(text.as_bytes())
}

/// Collapse an attack taxonomy label to the binary class: `normal` is 0,
/// everything else is an attack (1).
pub fn binarize_label(label: &str) -> u8 {
    if label.trim_end_matches('.').eq_ignore_ascii_case("normal") {
        0
    } else {
        1
    }
}

/// NSL-KDD attack family of a raw label, for dataset summaries.
pub fn attack_category(label: &str) -> &'static str {
    match label.trim_end_matches('.').to_ascii_lowercase().as_str() {
        "normal" => "normal",
        "back" | "land" | "neptune" | "pod" | "smurf" | "teardrop" | "apache2" | "mailbomb" | "processtable"
        | "udpstorm" => "dos",
        "ipsweep" | "nmap" | "portsweep" | "satan" | "mscan" | "saint" => "probe",
        "ftp_write" | "guess_passwd" | "imap" | "multihop" | "phf" | "spy" | "warezclient" | "warezmaster"
        | "named" | "sendmail" | "snmpgetattack" | "snmpguess" | "worm" | "xlock" | "xsnoop" | "httptunnel" => "r2l",
        "buffer_overflow" | "loadmodule" | "perl" | "rootkit" | "ps" | "sqlattack" | "xterm" => "u2r",
        _ => "unknown",
    }
}

/// Symbol-to-integer mapping for the nominal features.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodingTable {
    pub protocol_map: BTreeMap<String, u32>,
    pub flag_map: BTreeMap<String, u32>,
    pub service_map: BTreeMap<String, u32>,
    pub label_map: BTreeMap<String, u32>,
}

impl EncodingTable {
    /// Table with the fixed protocol, flag and label codes and the given
    /// services numbered in ascending lexicographic order from 15.
    pub fn with_services<I, S>(services: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let services: BTreeSet<String> = services.into_iter().map(Into::into).collect();
        let service_map = services
            .into_iter()
            .zip(SERVICE_CODE_BASE..)
            .collect::<BTreeMap<_, _>>();
        EncodingTable {
            protocol_map: PROTOCOL_CODES.iter().map(|&(s, c)| (s.to_string(), c)).collect(),
            flag_map: FLAG_CODES
                .iter()
                .chain(EXTRA_FLAG_CODES.iter())
                .map(|&(s, c)| (s.to_string(), c))
                .collect(),
            service_map,
            label_map: [("normal".to_string(), 0), ("attack".to_string(), 1)]
                .into_iter()
                .collect(),
        }
    }

    pub fn protocol_code(&self, symbol: &str) -> Result<u32> {
        self.protocol_map
            .get(&symbol.to_ascii_lowercase())
            .copied()
            .ok_or_else(|| Error::UnknownSymbol {
                field: "protocol",
                symbol: symbol.to_string(),
            })
    }

    pub fn flag_code(&self, symbol: &str) -> Result<u32> {
        self.flag_map
            .get(&symbol.to_ascii_uppercase())
            .copied()
            .ok_or_else(|| Error::UnknownSymbol {
                field: "flag",
                symbol: symbol.to_string(),
            })
    }

    pub fn service_code(&self, symbol: &str) -> Result<u32> {
        self.service_map
            .get(symbol)
            .copied()
            .ok_or_else(|| Error::UnknownSymbol {
                field: "service",
                symbol: symbol.to_string(),
            })
    }
}

/// Build the encoding table for a record set. Protocols and flags must come
/// from the fixed enumerations; services are collected from the data.
pub fn build_encoding(records: &[RawRecord]) -> Result<EncodingTable> {
    if records.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let services: BTreeSet<&str> = records.iter().map(RawRecord::service).collect();
    let table = EncodingTable::with_services(services);
    for record in records {
        table.protocol_code(record.protocol())?;
        table.flag_code(record.flag())?;
    }
    Ok(table)
}

/// A numeric feature vector with its binary class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodedRecord {
    pub x: Vec<f64>,
    pub y: u8,
}

impl EncodedRecord {
    pub fn new(x: Vec<f64>, y: u8) -> Self {
        EncodedRecord { x, y }
    }
}

/// Encode the 41 raw feature strings into numbers.
pub fn encode_features(features: &[String], table: &EncodingTable) -> Result<Vec<f64>> {
    if features.len() != FEATURE_COUNT {
        return Err(Error::shape("record features", FEATURE_COUNT, features.len()));
    }
    features
        .iter()
        .enumerate()
        .map(|(i, raw)| match i {
            PROTOCOL_FIELD => table.protocol_code(raw).map(f64::from),
            SERVICE_FIELD => table.service_code(raw).map(f64::from),
            FLAG_FIELD => table.flag_code(raw).map(f64::from),
            _ => match raw.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::InvalidValue {
                    feature: i + 1,
                    value: raw.clone(),
                }),
            },
        })
        .collect()
}

pub fn encode(record: &RawRecord, table: &EncodingTable) -> Result<EncodedRecord> {
    Ok(EncodedRecord {
        x: encode_features(&record.features, table)?,
        y: binarize_label(&record.label),
    })
}

pub fn encode_all(records: &[RawRecord], table: &EncodingTable) -> Result<Vec<EncodedRecord>> {
    records.iter().map(|r| encode(r, table)).collect()
}

/// Per-feature mean and population standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizationParams {
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
    pub constant_mask: Vec<bool>,
}

impl StandardizationParams {
    pub fn width(&self) -> usize {
        self.mu.len()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(i, &v)| {
                if self.constant_mask[i] {
                    0.0
                } else {
                    (v - self.mu[i]) / self.sigma[i]
                }
            })
            .collect()
    }
}

pub fn fit_standardization(records: &[EncodedRecord]) -> Result<StandardizationParams> {
    if records.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: records.len(),
        });
    }
    let width = records[0].x.len();
    if let Some(bad) = records.iter().find(|r| r.x.len() != width) {
        return Err(Error::shape("standardization fit", width, bad.x.len()));
    }
    let n = records.len() as f64;
    let mut mu = vec![0.0; width];
    let mut sigma = vec![0.0; width];
    let mut constant_mask = vec![false; width];
    for i in 0..width {
        let first = records[0].x[i];
        if records.iter().all(|r| r.x[i] == first) {
            mu[i] = first;
            constant_mask[i] = true;
            continue;
        }
        let mean = records.iter().map(|r| r.x[i]).sum::<f64>() / n;
        let var = records
            .iter()
            .map(|r| {
                let d = r.x[i] - mean;
                d * d
            })
            .sum::<f64>()
            / n;
        mu[i] = mean;
        sigma[i] = var.sqrt();
        // variance can underflow to zero for columns with tiny spread
        if sigma[i] == 0.0 {
            constant_mask[i] = true;
        }
    }
    Ok(StandardizationParams {
        mu,
        sigma,
        constant_mask,
    })
}

pub fn standardize(record: &EncodedRecord, params: &StandardizationParams) -> EncodedRecord {
    EncodedRecord {
        x: params.apply(&record.x),
        y: record.y,
    }
}

pub fn standardize_all(records: &[EncodedRecord], params: &StandardizationParams) -> Vec<EncodedRecord> {
    records.iter().map(|r| standardize(r, params)).collect()
}

/// Record-to-fold mapping produced by [`stratified_kfold`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    pub k: usize,
    pub assignment: Vec<usize>,
}

impl FoldAssignment {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&i| self.assignment[i] == fold)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&i| self.assignment[i] != fold)
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.assignment {
            sizes[f] += 1;
        }
        sizes
    }
}

fn class_indices(records: &[EncodedRecord]) -> [Vec<usize>; 2] {
    let mut by_class = [Vec::new(), Vec::new()];
    for (i, r) in records.iter().enumerate() {
        by_class[usize::from(r.y.min(1))].push(i);
    }
    by_class
}

/// Class-stratified k-fold assignment. Each class is shuffled and dealt
/// round-robin across folds, so per-fold class counts differ by at most one.
pub fn stratified_kfold(records: &[EncodedRecord], k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(Error::Config(format!("fold count must be at least 2, got {k}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![usize::MAX; records.len()];
    let mut next = 0usize;
    for (class, mut members) in class_indices(records).into_iter().enumerate() {
        if members.len() < k {
            return Err(Error::Stratification {
                class: class as u8,
                count: members.len(),
                folds: k,
            });
        }
        members.shuffle(&mut rng);
        for idx in members {
            assignment[idx] = next % k;
            next += 1;
        }
    }
    Ok(FoldAssignment { k, assignment })
}

/// Indices of a class-stratified uniform sample without replacement, in
/// shuffled order.
pub fn subsample_indices(records: &[EncodedRecord], n: usize, seed: u64) -> Result<Vec<usize>> {
    let total = records.len();
    if n > total {
        return Err(Error::Bounds {
            requested: n,
            available: total,
        });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let by_class = class_indices(records);
    // largest-remainder allocation of n across the classes
    let mut quota = [0usize; 2];
    let mut remainders = [(0usize, 0usize); 2];
    for c in 0..2 {
        let exact = n * by_class[c].len();
        quota[c] = exact / total;
        remainders[c] = (exact % total, c);
    }
    let mut short = n - quota.iter().sum::<usize>();
    remainders.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, c) in &remainders {
        if short == 0 {
            break;
        }
        if quota[c] < by_class[c].len() {
            quota[c] += 1;
            short -= 1;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = Vec::with_capacity(n);
    for (c, mut members) in by_class.into_iter().enumerate() {
        members.shuffle(&mut rng);
        picked.extend_from_slice(&members[..quota[c]]);
    }
    picked.shuffle(&mut rng);
    Ok(picked)
}

pub fn subsample(records: &[EncodedRecord], n: usize, seed: u64) -> Result<Vec<EncodedRecord>> {
    Ok(subsample_indices(records, n, seed)?
        .into_iter()
        .map(|i| records[i].clone())
        .collect())
}

/// Write records as CSV with header `f1..fN,label`.
pub fn write_encoded_csv<W: Write>(records: &[EncodedRecord], mut out: W) -> Result<()> {
    let width = records.first().map_or(FEATURE_COUNT, |r| r.x.len());
    let header: Vec<String> = (1..=width).map(|i| format!("f{i}")).collect();
    writeln!(out, "{},label", header.join(","))?;
    let mut line = String::new();
    for r in records {
        line.clear();
        for v in &r.x {
            line.push_str(&v.to_string());
            line.push(',');
        }
        line.push_str(&r.y.to_string());
        writeln!(out, "{line}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const KDD_LINE: &str = "0,tcp,http,SF,181,5450,0,0,0,0,0,1,0,0,0,0,0,0,0,0,0,0,8,8,0.00,0.00,0.00,0.00,1.00,0.00,0.00,9,9,1.00,0.00,0.11,0.00,0.00,0.00,0.00,0.00,normal,21";

    fn raw(protocol: &str, service: &str, flag: &str, label: &str) -> RawRecord {
        let mut features = vec!["0".to_string(); FEATURE_COUNT];
        features[PROTOCOL_FIELD] = protocol.into();
        features[SERVICE_FIELD] = service.into();
        features[FLAG_FIELD] = flag.into();
        RawRecord {
            features,
            label: label.into(),
            difficulty: None,
        }
    }

    fn column(values: &[f64]) -> Vec<EncodedRecord> {
        values.iter().map(|&v| EncodedRecord::new(vec![v], 0)).collect()
    }

    #[test]
    fn parses_labeled_line_with_difficulty() {
        let records = parse_nslkdd_str(KDD_LINE).unwrap();
        assert_eq!(records.len(), 1);
        let r = &records[0];
        assert_eq!(r.protocol(), "tcp");
        assert_eq!(r.service(), "http");
        assert_eq!(r.flag(), "SF");
        assert_eq!(r.label, "normal");
        assert_eq!(r.difficulty, Some(21));
        assert_eq!(r.features[4], "181");
        assert_eq!(r.features[5], "5450");
    }

    #[test]
    fn difficulty_is_optional() {
        let line = KDD_LINE.rsplit_once(',').unwrap().0;
        let records = parse_nslkdd_str(line).unwrap();
        assert_eq!(records[0].difficulty, None);
    }

    #[test]
    fn empty_stream_is_an_error() {
        assert!(matches!(parse_nslkdd_str(""), Err(Error::EmptyDataset)));
        assert!(matches!(parse_nslkdd_str("\n\n"), Err(Error::EmptyDataset)));
    }

    #[test]
    fn short_line_reports_its_line_number() {
        let short = vec!["0"; 40].join(",");
        let text = format!("{KDD_LINE}\n{short}\n");
        match parse_nslkdd_str(&text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn unlabeled_lines_only_when_allowed() {
        let line = KDD_LINE.rsplitn(3, ',').nth(2).unwrap();
        assert!(split_line(line, 1, false).is_err());
        let split = split_line(line, 1, true).unwrap();
        assert_eq!(split.label, None);
        assert_eq!(split.features.len(), FEATURE_COUNT);
    }

    #[test]
    fn binary_labels() {
        assert_eq!(binarize_label("normal"), 0);
        assert_eq!(binarize_label("teardrop"), 1);
        assert_eq!(binarize_label("buffer_overflow"), 1);
        assert_eq!(binarize_label("mscan"), 1);
    }

    #[test]
    fn fixed_codes() {
        let table = build_encoding(&[raw("tcp", "http", "SF", "normal")]).unwrap();
        assert_eq!(table.protocol_map["tcp"], 2);
        assert_eq!(table.protocol_map["udp"], 3);
        assert_eq!(table.protocol_map["icmp"], 4);
        assert_eq!(table.flag_map["SF"], 13);
        assert_eq!(table.flag_map["S0"], 9);
        assert_eq!(table.flag_map["OTH"], 5);
        assert_eq!(table.flag_map["SH"], 14);
        assert_eq!(table.protocol_code("TCP").unwrap(), 2);
        assert_eq!(table.label_map["normal"], 0);
        assert_eq!(table.label_map["attack"], 1);
    }

    #[test]
    fn services_numbered_lexicographically_from_fifteen() {
        let records = [raw("tcp", "http", "SF", "normal"), raw("tcp", "ftp", "SF", "normal")];
        let table = build_encoding(&records).unwrap();
        assert_eq!(table.service_map["ftp"], 15);
        assert_eq!(table.service_map["http"], 16);
        assert_eq!(table.service_map.len(), 2);
    }

    #[test]
    fn unknown_protocol_or_flag_rejected() {
        let err = build_encoding(&[raw("sctp", "http", "SF", "normal")]).unwrap_err();
        assert!(matches!(err, Error::UnknownSymbol { field: "protocol", .. }));
        let err = build_encoding(&[raw("tcp", "http", "XYZ", "normal")]).unwrap_err();
        assert!(matches!(err, Error::UnknownSymbol { field: "flag", ref symbol } if symbol == "XYZ"));
    }

    #[test]
    fn encodes_nominal_fields() {
        let records = [raw("udp", "domain_u", "S0", "neptune")];
        let table = build_encoding(&records).unwrap();
        let enc = encode(&records[0], &table).unwrap();
        assert_eq!(enc.x.len(), FEATURE_COUNT);
        assert_eq!(enc.x[PROTOCOL_FIELD], 3.0);
        assert_eq!(enc.x[FLAG_FIELD], 9.0);
        assert_eq!(enc.x[SERVICE_FIELD], 15.0);
        assert_eq!(enc.y, 1);
    }

    #[test]
    fn encode_rejects_unmapped_service_and_bad_numbers() {
        let table = build_encoding(&[raw("tcp", "http", "SF", "normal")]).unwrap();
        let err = encode(&raw("tcp", "gopher", "SF", "normal"), &table).unwrap_err();
        assert!(matches!(err, Error::UnknownSymbol { field: "service", .. }));

        let mut bad = raw("tcp", "http", "SF", "normal");
        bad.features[4] = "lots".into();
        let err = encode(&bad, &table).unwrap_err();
        assert!(matches!(err, Error::InvalidValue { feature: 5, .. }));
    }

    #[test]
    fn standardization_hand_values() {
        let params = fit_standardization(&column(&[2.0, 4.0, 6.0])).unwrap();
        assert_eq!(params.mu[0], 4.0);
        assert!((params.sigma[0] - (8.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((params.sigma[0] - 1.63299).abs() < 1e-5);
        assert!(!params.constant_mask[0]);

        let params = fit_standardization(&column(&[5.0, 5.0, 5.0])).unwrap();
        assert_eq!(params.mu[0], 5.0);
        assert_eq!(params.sigma[0], 0.0);
        assert!(params.constant_mask[0]);
    }

    #[test]
    fn constant_columns_of_inexact_values_are_detected() {
        let params = fit_standardization(&column(&[0.1; 7])).unwrap();
        assert!(params.constant_mask[0]);
        assert_eq!(standardize(&EncodedRecord::new(vec![0.1], 0), &params).x[0], 0.0);
    }

    #[test]
    fn standardization_needs_two_records() {
        assert!(matches!(
            fit_standardization(&column(&[1.0])),
            Err(Error::InsufficientData { needed: 2, got: 1 })
        ));
    }

    #[test]
    fn standardize_identities() {
        let params = fit_standardization(&column(&[2.0, 4.0, 6.0])).unwrap();
        let at_mean = standardize(&EncodedRecord::new(vec![4.0], 1), &params);
        assert_eq!(at_mean.x[0], 0.0);
        assert_eq!(at_mean.y, 1);
        let one_sigma = standardize(&EncodedRecord::new(vec![4.0 + params.sigma[0]], 0), &params);
        assert!((one_sigma.x[0] - 1.0).abs() < 1e-15);

        let constant = fit_standardization(&column(&[5.0, 5.0])).unwrap();
        assert_eq!(standardize(&EncodedRecord::new(vec![123.0], 0), &constant).x[0], 0.0);
    }

    fn balanced(n_per_class: usize) -> Vec<EncodedRecord> {
        (0..2 * n_per_class)
            .map(|i| EncodedRecord::new(vec![i as f64], (i % 2) as u8))
            .collect()
    }

    #[test]
    fn kfold_exact_divisibility() {
        let records = balanced(50);
        let folds = stratified_kfold(&records, 10, 3).unwrap();
        for f in 0..10 {
            let test = folds.test_indices(f);
            let attacks = test.iter().filter(|&&i| records[i].y == 1).count();
            assert_eq!(test.len(), 10);
            assert_eq!(attacks, 5);
        }
        assert_eq!(folds, stratified_kfold(&records, 10, 3).unwrap());
    }

    #[test]
    fn kfold_rejects_small_class() {
        let mut records = balanced(20);
        records.retain(|r| r.y == 0 || r.x[0] < 8.0);
        match stratified_kfold(&records, 10, 0) {
            Err(Error::Stratification {
                class: 1,
                count: 4,
                folds: 10,
            }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(stratified_kfold(&balanced(5), 1, 0), Err(Error::Config(_))));
    }

    #[test]
    fn subsample_sizes() {
        let records = balanced(30);
        let all = subsample_indices(&records, 60, 9).unwrap();
        let mut sorted = all.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..60).collect::<Vec<_>>());

        assert!(subsample(&records, 0, 9).unwrap().is_empty());
        assert!(matches!(
            subsample(&records, 61, 9),
            Err(Error::Bounds {
                requested: 61,
                available: 60
            })
        ));

        let part = subsample(&records, 21, 9).unwrap();
        let attacks = part.iter().filter(|r| r.y == 1).count();
        assert_eq!(part.len(), 21);
        assert!(attacks == 10 || attacks == 11);
        assert_eq!(part, subsample(&records, 21, 9).unwrap());
    }

    #[test]
    fn csv_header_and_rows() {
        let mut buf = Vec::new();
        write_encoded_csv(&[EncodedRecord::new(vec![1.5, -2.0], 1)], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "f1,f2,label\n1.5,-2,1\n");
    }

    #[test]
    fn attack_families() {
        assert_eq!(attack_category("neptune"), "dos");
        assert_eq!(attack_category("satan"), "probe");
        assert_eq!(attack_category("guess_passwd"), "r2l");
        assert_eq!(attack_category("rootkit"), "u2r");
        assert_eq!(attack_category("normal"), "normal");
    }
}
