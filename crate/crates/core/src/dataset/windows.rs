use alloc::string::String;
use alloc::vec::Vec;

use crate::dataset::Segment;
use crate::error::{Error, Result};
use crate::signal::compand_window;

/// Fixed min-max scaling of targets to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetScaling {
    pub sbp_min: f64,
    pub sbp_max: f64,
    pub dbp_min: f64,
    pub dbp_max: f64,
}

impl Default for TargetScaling {
    fn default() -> Self {
        Self {
            sbp_min: 50.0,
            sbp_max: 220.0,
            dbp_min: 30.0,
            dbp_max: 150.0,
        }
    }
}

impl TargetScaling {
    pub fn normalize_sbp(&self, mmhg: f64) -> f64 {
        (mmhg - self.sbp_min) / (self.sbp_max - self.sbp_min)
    }

    pub fn normalize_dbp(&self, mmhg: f64) -> f64 {
        (mmhg - self.dbp_min) / (self.dbp_max - self.dbp_min)
    }

    pub fn denormalize_sbp(&self, unit: f64) -> f64 {
        self.sbp_min + unit * (self.sbp_max - self.sbp_min)
    }

    pub fn denormalize_dbp(&self, unit: f64) -> f64 {
        self.dbp_min + unit * (self.dbp_max - self.dbp_min)
    }
}

/// One aligned training pair: companded inputs and normalized targets.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct WindowedExample {
    pub ecg: Vec<f64>,
    pub ppg: Vec<f64>,
    pub sbp: Vec<f64>,
    pub dbp: Vec<f64>,
    pub subject_id: String,
    /// Index of the first sample within the record.
    pub start_index: usize,
}

impl WindowedExample {
    pub fn len(&self) -> usize {
        self.ecg.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ecg.is_empty()
    }
}

/// Windows at offsets `0, stride, 2 stride, ...` that fit inside the segment.
pub fn make_windows(
    segment: &Segment,
    window_len: usize,
    stride: usize,
    scaling: &TargetScaling,
) -> Result<Vec<WindowedExample>> {
    if window_len == 0 || stride == 0 {
        return Err(Error::InvalidArgument(alloc::format!(
            "window length {window_len} and stride {stride} must be >= 1"
        )));
    }
    if segment.len() < window_len {
        return Ok(Vec::new());
    }
    let count = (segment.len() - window_len) / stride + 1;
    Ok((0..count)
        .map(|k| {
            let r = k * stride..k * stride + window_len;
            WindowedExample {
                ecg: compand_window(&segment.ecg[r.clone()]),
                ppg: compand_window(&segment.ppg[r.clone()]),
                sbp: segment.sbp[r.clone()].iter().map(|&v| scaling.normalize_sbp(v)).collect(),
                dbp: segment.dbp[r.clone()].iter().map(|&v| scaling.normalize_dbp(v)).collect(),
                subject_id: segment.subject_id.clone(),
                start_index: segment.start + r.start,
            }
        })
        .collect())
}
