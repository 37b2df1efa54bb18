//! Per-sample SBP/DBP series from an ABP waveform.
//!
//! Beats are ABP peaks with prominence of at least 10 mmHg, thinned to a
//! minimum spacing of 0.33 s by keeping the taller peak. Each beat's SBP is
//! its peak value and its DBP the lowest sample since the previous peak.
//! Values are held from one peak to the next and back-filled before the
//! first.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::signal::SignalVector;

pub const MIN_PROMINENCE_MMHG: f64 = 10.0;
pub const MIN_PEAK_DISTANCE_S: f64 = 0.33;
pub const MIN_RECORD_S: f64 = 3.0;
pub const SANITY_BAND_MMHG: (f64, f64) = (20.0, 260.0);

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Beat {
    pub peak_index: usize,
    pub sbp: f64,
    pub dbp: f64,
}

/// Per-sample targets in mmHg.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TargetSeries {
    sbp: Vec<f64>,
    dbp: Vec<f64>,
}

impl TargetSeries {
    pub fn new(sbp: Vec<f64>, dbp: Vec<f64>) -> Result<Self> {
        if sbp.len() != dbp.len() {
            return Err(Error::ShapeMismatch(alloc::format!(
                "{} SBP values vs {} DBP values",
                sbp.len(),
                dbp.len()
            )));
        }
        let (lo, hi) = SANITY_BAND_MMHG;
        for (t, (&s, &d)) in sbp.iter().zip(&dbp).enumerate() {
            if !(s.is_finite() && d.is_finite()) {
                return Err(Error::NonFinite);
            }
            if s < d {
                return Err(Error::InvalidArgument(alloc::format!(
                    "SBP {s} below DBP {d} at sample {t}"
                )));
            }
            if d < lo || s > hi {
                return Err(Error::InvalidArgument(alloc::format!(
                    "target ({s}, {d}) mmHg at sample {t} outside [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self { sbp, dbp })
    }

    pub fn sbp(&self) -> &[f64] {
        &self.sbp
    }

    pub fn dbp(&self) -> &[f64] {
        &self.dbp
    }

    pub fn len(&self) -> usize {
        self.sbp.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sbp.is_empty()
    }
}

/// Local maxima; a flat top reports its middle sample.
fn local_maxima(x: &[f64]) -> Vec<usize> {
    let mut peaks = Vec::new();
    let n = x.len();
    let mut i = 1;
    while i + 1 < n {
        if x[i] > x[i - 1] {
            let mut j = i;
            while j + 1 < n && x[j + 1] == x[i] {
                j += 1;
            }
            if j + 1 < n && x[j + 1] < x[i] {
                peaks.push((i + j) / 2);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    peaks
}

/// Height above the higher of the two lowest points reachable before
/// meeting a taller sample on either side.
fn prominence(x: &[f64], peak: usize) -> f64 {
    let h = x[peak];
    let mut left_min = h;
    for &v in x[..peak].iter().rev() {
        if v > h {
            break;
        }
        left_min = left_min.min(v);
    }
    let mut right_min = h;
    for &v in &x[peak + 1..] {
        if v > h {
            break;
        }
        right_min = right_min.min(v);
    }
    h - left_min.max(right_min)
}

/// Peaks closer than `distance` to a taller kept peak are dropped.
fn enforce_distance(x: &[f64], peaks: &[usize], distance: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..peaks.len()).collect();
    // Taller first; ties keep the earlier peak.
    order.sort_by(|&a, &b| x[peaks[b]].total_cmp(&x[peaks[a]]).then(a.cmp(&b)));
    let mut keep = vec![true; peaks.len()];
    for &k in &order {
        if !keep[k] {
            continue;
        }
        for j in (0..k).rev() {
            if peaks[k] - peaks[j] >= distance {
                break;
            }
            keep[j] = false;
        }
        for j in k + 1..peaks.len() {
            if peaks[j] - peaks[k] >= distance {
                break;
            }
            keep[j] = false;
        }
    }
    peaks.iter().zip(&keep).filter(|(_, &k)| k).map(|(&p, _)| p).collect()
}

fn min_in(x: &[f64]) -> f64 {
    x.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Detects beats in an ABP waveform.
///
/// The first beat's DBP is the trough before its peak when the record
/// contains one, otherwise the trough after it.
pub fn detect_beats(abp: &SignalVector) -> Result<Vec<Beat>> {
    let fs = abp.sample_rate_hz();
    let x = abp.samples();
    let needed = libm::ceil(MIN_RECORD_S * fs) as usize;
    if x.len() < needed {
        return Err(Error::RecordTooShort {
            len: x.len(),
            needed,
        });
    }
    let candidates: Vec<usize> = local_maxima(x)
        .into_iter()
        .filter(|&p| prominence(x, p) >= MIN_PROMINENCE_MMHG)
        .collect();
    let distance = (libm::round(MIN_PEAK_DISTANCE_S * fs) as usize).max(1);
    let peaks = enforce_distance(x, &candidates, distance);
    if peaks.is_empty() {
        return Err(Error::NoPulsatileAbp);
    }
    let mut beats = Vec::with_capacity(peaks.len());
    for (k, &p) in peaks.iter().enumerate() {
        let dbp = if k > 0 {
            min_in(&x[peaks[k - 1]..=p])
        } else {
            let before = &x[..=p];
            // Last of equal minima, so a flat lead-in counts as a trough.
            let lowest = before
                .iter()
                .enumerate()
                .rev()
                .min_by(|a, b| a.1.total_cmp(b.1))
                .map(|(i, _)| i)
                .unwrap_or(0);
            if lowest > 0 {
                before[lowest]
            } else {
                let end = peaks.get(1).copied().unwrap_or(x.len() - 1);
                min_in(&x[p..=end])
            }
        };
        beats.push(Beat {
            peak_index: p,
            sbp: x[p],
            dbp,
        });
    }
    Ok(beats)
}

/// Zero-order hold of per-beat values over `len` samples.
pub fn targets_from_beats(beats: &[Beat], len: usize) -> Result<TargetSeries> {
    let first = beats.first().ok_or(Error::NoPulsatileAbp)?;
    let mut sbp = Vec::with_capacity(len);
    let mut dbp = Vec::with_capacity(len);
    let mut current = first;
    let mut next = 1;
    for t in 0..len {
        while next < beats.len() && beats[next].peak_index <= t {
            current = &beats[next];
            next += 1;
        }
        sbp.push(current.sbp);
        dbp.push(current.dbp);
    }
    TargetSeries::new(sbp, dbp)
}

pub fn extract_bp_targets(abp: &SignalVector) -> Result<TargetSeries> {
    let beats = detect_beats(abp)?;
    targets_from_beats(&beats, abp.len())
}
