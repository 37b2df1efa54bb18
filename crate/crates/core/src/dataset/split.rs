use alloc::string::String;
use alloc::vec::Vec;
use core::ops::Range;

use crate::dataset::{SubjectRecord, TargetSeries};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub valid_fraction: f64,
    pub test_fraction: f64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train_fraction: 0.70,
            valid_fraction: 0.10,
            test_fraction: 0.20,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        let parts = [self.train_fraction, self.valid_fraction, self.test_fraction];
        if parts.iter().any(|f| !(0.0..=1.0).contains(f)) {
            return Err(Error::InvalidConfig(alloc::format!("split fractions {parts:?} must lie in [0, 1]")));
        }
        let sum: f64 = parts.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(alloc::format!("split fractions sum to {sum}, not 1")));
        }
        Ok(())
    }

    /// Segment lengths for `n` samples: rounded train and valid, test takes
    /// the remainder.
    pub fn lengths(&self, n: usize) -> [usize; 3] {
        let train = (libm::round(n as f64 * self.train_fraction) as usize).min(n);
        let valid = (libm::round(n as f64 * self.valid_fraction) as usize).min(n - train);
        [train, valid, n - train - valid]
    }
}

/// One contiguous stretch of a subject's inputs and targets.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Segment {
    pub subject_id: String,
    /// Index of the first sample within the record.
    pub start: usize,
    pub ecg: Vec<f64>,
    pub ppg: Vec<f64>,
    pub sbp: Vec<f64>,
    pub dbp: Vec<f64>,
}

impl Segment {
    pub fn from_record(record: &SubjectRecord, targets: &TargetSeries, range: Range<usize>) -> Result<Self> {
        if targets.len() != record.len() {
            return Err(Error::ShapeMismatch(alloc::format!(
                "{} targets for a record of {} samples",
                targets.len(),
                record.len()
            )));
        }
        if range.end > record.len() || range.start > range.end {
            return Err(Error::InvalidArgument(alloc::format!(
                "segment {range:?} outside a record of {} samples",
                record.len()
            )));
        }
        Ok(Self {
            subject_id: record.subject_id().into(),
            start: range.start,
            ecg: record.ecg().samples()[range.clone()].to_vec(),
            ppg: record.ppg().samples()[range.clone()].to_vec(),
            sbp: targets.sbp()[range.clone()].to_vec(),
            dbp: targets.dbp()[range].to_vec(),
        })
    }

    pub fn len(&self) -> usize {
        self.ecg.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ecg.is_empty()
    }

    pub fn range(&self) -> Range<usize> {
        self.start..self.start + self.len()
    }
}

/// Chronological train/valid/test split. Every segment must hold at least
/// `min_len` samples.
pub fn split_record(
    record: &SubjectRecord,
    targets: &TargetSeries,
    spec: &SplitSpec,
    min_len: usize,
) -> Result<[Segment; 3]> {
    spec.validate()?;
    let n = record.len();
    let [a, b, _] = spec.lengths(n);
    let ranges = [0..a, a..a + b, a + b..n];
    for r in &ranges {
        if r.len() < min_len.max(1) {
            let shortest = [spec.train_fraction, spec.valid_fraction, spec.test_fraction]
                .into_iter()
                .fold(f64::INFINITY, f64::min);
            let needed = libm::ceil(min_len.max(1) as f64 / shortest) as usize;
            return Err(Error::RecordTooShort { len: n, needed });
        }
    }
    let segments: Vec<Segment> = ranges
        .into_iter()
        .map(|r| Segment::from_record(record, targets, r))
        .collect::<Result<_>>()?;
    let [train, valid, test]: [Segment; 3] = segments.try_into().map_err(|_| Error::EmptyInput)?;
    Ok([train, valid, test])
}
