//! Record, manifest and target CSV files.
//!
//! A record file has the header `t,ecg,ppg,abp` and one row per 125 Hz
//! sample, `t` in seconds stepping by 0.008. A dataset directory holds one
//! `<subject_id>.csv` per subject plus `manifest.csv` (`subject_id,ecg_lead`).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use bpnet_core::dataset::{SubjectRecord, TargetSeries, RECORD_RATE_HZ};
use bpnet_core::SignalVector;

use crate::error::{CoreContext, Error, Result};

pub const RECORD_COLUMNS: [&str; 4] = ["t", "ecg", "ppg", "abp"];
pub const MANIFEST_FILE: &str = "manifest.csv";
pub const TARGETS_DIR: &str = "targets";
const T_STEP_S: f64 = 1.0 / RECORD_RATE_HZ;
const T_TOLERANCE_S: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub subject_id: String,
    pub ecg_lead: String,
}

/// Writes through a temporary sibling and renames, so readers never see a
/// partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn open_csv(path: &Path) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new().has_headers(true).from_reader(file))
}

fn csv_error(path: &Path, err: csv::Error) -> Error {
    let line = err.position().map_or(0, |p| p.line());
    let message = match err.kind() {
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => {
            format!("expected {expected_len} fields, found {len}")
        }
        _ => err.to_string(),
    };
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    }
}

/// Checks the header names `expected` in order, naming the first absent one.
fn check_header(path: &Path, reader: &mut csv::Reader<fs::File>, expected: &[&str]) -> Result<()> {
    let header = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let names: Vec<&str> = header.iter().map(str::trim).collect();
    if let Some(missing) = expected.iter().find(|c| !names.contains(c)) {
        return Err(Error::MissingColumn {
            path: path.to_path_buf(),
            column: (*missing).to_string(),
        });
    }
    if names != expected {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: format!("header must be exactly '{}', found '{}'", expected.join(","), names.join(",")),
        });
    }
    Ok(())
}

/// Reads every row as finite floats.
fn read_numeric_rows(path: &Path, expected: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut reader = open_csv(path)?;
    check_header(path, &mut reader, expected)?;
    let mut columns = vec![Vec::new(); expected.len()];
    for row in reader.records() {
        let row = row.map_err(|e| csv_error(path, e))?;
        let line = row.position().map_or(0, |p| p.line());
        for ((field, name), col) in row.iter().zip(expected).zip(columns.iter_mut()) {
            let value: f64 = field.trim().parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("column '{name}': '{field}' is not a number"),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line,
                    message: format!("column '{name}': non-finite value '{field}'"),
                });
            }
            col.push(value);
        }
    }
    if columns[0].is_empty() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: "no samples".into(),
        });
    }
    Ok(columns)
}

pub fn read_record(path: &Path, subject_id: &str, ecg_lead: &str) -> Result<SubjectRecord> {
    let mut cols = read_numeric_rows(path, &RECORD_COLUMNS)?.into_iter();
    let t = cols.next().unwrap_or_default();
    for (k, pair) in t.windows(2).enumerate() {
        if ((pair[1] - pair[0]) - T_STEP_S).abs() > T_TOLERANCE_S {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                // Header is line 1 and sample k is line k + 2.
                line: k as u64 + 3,
                message: format!("t must step by {T_STEP_S} s, got {} -> {}", pair[0], pair[1]),
            });
        }
    }
    let mut signal = |name: &str| {
        let samples = cols.next().unwrap_or_default();
        SignalVector::new(RECORD_RATE_HZ, samples).context(|| format!("{}: {name}", path.display()))
    };
    let (ecg, ppg, abp) = (signal("ecg")?, signal("ppg")?, signal("abp")?);
    SubjectRecord::new(subject_id, ecg_lead, ecg, ppg, abp).context(|| path.display().to_string())
}

fn time_label(index: usize) -> String {
    format!("{:.3}", index as f64 * T_STEP_S)
}

pub fn record_csv(record: &SubjectRecord) -> String {
    let mut out = String::with_capacity(record.len() * 48);
    out.push_str("t,ecg,ppg,abp\n");
    let (e, p, a) = (record.ecg().samples(), record.ppg().samples(), record.abp().samples());
    for i in 0..record.len() {
        let _ = writeln!(out, "{},{},{},{}", time_label(i), e[i], p[i], a[i]);
    }
    out
}

pub fn write_record(path: &Path, record: &SubjectRecord) -> Result<()> {
    write_atomic(path, record_csv(record).as_bytes())
}

pub fn read_manifest(dir: &Path) -> Result<Vec<ManifestEntry>> {
    let path = dir.join(MANIFEST_FILE);
    let mut reader = open_csv(&path)?;
    check_header(&path, &mut reader, &["subject_id", "ecg_lead"])?;
    let mut entries = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| csv_error(&path, e))?;
        let id = row.get(0).unwrap_or("").trim();
        if id.is_empty() {
            return Err(Error::Parse {
                path: path.clone(),
                line: row.position().map_or(0, |p| p.line()),
                message: "empty subject_id".into(),
            });
        }
        entries.push(ManifestEntry {
            subject_id: id.to_string(),
            ecg_lead: row.get(1).unwrap_or("").trim().to_string(),
        });
    }
    Ok(entries)
}

pub fn write_manifest(dir: &Path, entries: &[ManifestEntry]) -> Result<()> {
    let mut out = String::from("subject_id,ecg_lead\n");
    for e in entries {
        let _ = writeln!(out, "{},{}", e.subject_id, e.ecg_lead);
    }
    write_atomic(&dir.join(MANIFEST_FILE), out.as_bytes())
}

pub fn record_path(dir: &Path, subject_id: &str) -> PathBuf {
    dir.join(format!("{subject_id}.csv"))
}

/// Every subject listed in the manifest, in manifest order.
pub fn load_dataset(dir: &Path) -> Result<Vec<SubjectRecord>> {
    read_manifest(dir)?
        .iter()
        .map(|e| read_record(&record_path(dir, &e.subject_id), &e.subject_id, &e.ecg_lead))
        .collect()
}

pub fn targets_csv(targets: &TargetSeries) -> String {
    let mut out = String::from("t,sbp,dbp\n");
    for (i, (s, d)) in targets.sbp().iter().zip(targets.dbp()).enumerate() {
        let _ = writeln!(out, "{},{s},{d}", time_label(i));
    }
    out
}

pub fn read_targets(path: &Path) -> Result<TargetSeries> {
    let mut cols = read_numeric_rows(path, &["t", "sbp", "dbp"])?.into_iter().skip(1);
    let sbp = cols.next().unwrap_or_default();
    let dbp = cols.next().unwrap_or_default();
    TargetSeries::new(sbp, dbp).context(|| path.display().to_string())
}
