//! Agreement statistics against reference pressures.
//!
//! Errors are always `estimate - reference`. Standard deviations use the
//! `n - 1` denominator and are 0 for a single sample.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const AAMI_MAX_ABS_ME: f64 = 5.0;
pub const AAMI_MAX_SDE: f64 = 8.0;
pub const AAMI_MIN_SUBJECTS: usize = 85;
pub const BHS_THRESHOLDS_MMHG: [f64; 3] = [5.0, 10.0, 15.0];
/// Minimum cumulative percentages within 5/10/15 mmHg for grades A, B, C.
pub const BHS_GRADE_TABLE: [(BhsGrade, [f64; 3]); 3] = [
    (BhsGrade::A, [60.0, 85.0, 95.0]),
    (BhsGrade::B, [50.0, 75.0, 90.0]),
    (BhsGrade::C, [40.0, 65.0, 85.0]),
];
pub const LOA_Z: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorStats {
    pub me: f64,
    pub sde: f64,
    pub rmse: f64,
    pub mae: f64,
    pub n: usize,
}

fn check_pair(reference: &[f64], estimate: &[f64]) -> Result<()> {
    if reference.len() != estimate.len() {
        return Err(Error::ShapeMismatch(alloc::format!(
            "{} reference values vs {} estimates",
            reference.len(),
            estimate.len()
        )));
    }
    if reference.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(())
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn sample_sd(x: &[f64], mu: f64) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    libm::sqrt(x.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / (x.len() - 1) as f64)
}

pub fn errors(reference: &[f64], estimate: &[f64]) -> Result<Vec<f64>> {
    check_pair(reference, estimate)?;
    Ok(estimate.iter().zip(reference).map(|(e, r)| e - r).collect())
}

pub fn error_stats(reference: &[f64], estimate: &[f64]) -> Result<ErrorStats> {
    let e = errors(reference, estimate)?;
    let n = e.len();
    let me = mean(&e);
    Ok(ErrorStats {
        me,
        sde: sample_sd(&e, me),
        rmse: libm::sqrt(e.iter().map(|v| v * v).sum::<f64>() / n as f64),
        mae: e.iter().map(|v| v.abs()).sum::<f64>() / n as f64,
        n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "clause", rename_all = "snake_case")]
pub enum AamiFailure {
    MeanError { me: f64 },
    ErrorSpread { sde: f64 },
    Population { n_subjects: usize },
}

impl fmt::Display for AamiFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AamiFailure::MeanError { me } => write!(f, "ME |{me:.3}| exceeds {AAMI_MAX_ABS_ME} mmHg"),
            AamiFailure::ErrorSpread { sde } => write!(f, "SDE {sde:.3} exceeds {AAMI_MAX_SDE} mmHg"),
            AamiFailure::Population { n_subjects } => {
                write!(f, "population of {n_subjects} subjects is below {AAMI_MIN_SUBJECTS}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AamiVerdict {
    pub pass: bool,
    pub failures: Vec<AamiFailure>,
}

pub fn aami_check(stats: &ErrorStats, n_subjects: usize) -> AamiVerdict {
    let mut failures = Vec::new();
    if !(stats.me.abs() <= AAMI_MAX_ABS_ME) {
        failures.push(AamiFailure::MeanError { me: stats.me });
    }
    if !(stats.sde <= AAMI_MAX_SDE) {
        failures.push(AamiFailure::ErrorSpread { sde: stats.sde });
    }
    if n_subjects < AAMI_MIN_SUBJECTS {
        failures.push(AamiFailure::Population { n_subjects });
    }
    AamiVerdict {
        pass: failures.is_empty(),
        failures,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BhsGrade {
    A,
    B,
    C,
    D,
}

impl fmt::Display for BhsGrade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BhsGrade::A => "A",
            BhsGrade::B => "B",
            BhsGrade::C => "C",
            BhsGrade::D => "D",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BhsResult {
    pub pct_within_5: f64,
    pub pct_within_10: f64,
    pub pct_within_15: f64,
    pub grade: BhsGrade,
}

pub fn bhs_grade(errors: &[f64]) -> Result<BhsResult> {
    if errors.is_empty() {
        return Err(Error::EmptyInput);
    }
    let pct = |limit: f64| {
        100.0 * errors.iter().filter(|e| e.abs() <= limit).count() as f64 / errors.len() as f64
    };
    let p = BHS_THRESHOLDS_MMHG.map(pct);
    let grade = BHS_GRADE_TABLE
        .iter()
        .find(|(_, need)| p.iter().zip(need).all(|(got, need)| got >= need))
        .map_or(BhsGrade::D, |(g, _)| *g);
    Ok(BhsResult {
        pct_within_5: p[0],
        pct_within_10: p[1],
        pct_within_15: p[2],
        grade,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlandAltmanResult {
    pub mean_diff: f64,
    pub sd_diff: f64,
    pub loa_low: f64,
    pub loa_high: f64,
}

/// Limits of agreement plus the `(mean, difference)` cloud for plotting.
pub fn bland_altman(reference: &[f64], estimate: &[f64]) -> Result<(BlandAltmanResult, Vec<(f64, f64)>)> {
    let d = errors(reference, estimate)?;
    let mu = mean(&d);
    let sd = sample_sd(&d, mu);
    let points = reference
        .iter()
        .zip(estimate)
        .zip(&d)
        .map(|((r, e), diff)| (0.5 * (r + e), *diff))
        .collect();
    Ok((
        BlandAltmanResult {
            mean_diff: mu,
            sd_diff: sd,
            loa_low: mu - LOA_Z * sd,
            loa_high: mu + LOA_Z * sd,
        },
        points,
    ))
}

pub fn pearson_r(reference: &[f64], estimate: &[f64]) -> Result<f64> {
    check_pair(reference, estimate)?;
    let (mr, me) = (mean(reference), mean(estimate));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (r, e) in reference.iter().zip(estimate) {
        let (a, b) = (r - mr, e - me);
        sxy += a * b;
        sxx += a * a;
        syy += b * b;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation);
    }
    Ok((sxy / libm::sqrt(sxx * syy)).clamp(-1.0, 1.0))
}

/// Bins of width `bin_width` centred on multiples of it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_width: f64,
    /// `counts.len() + 1` ascending edges.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Histogram {
    pub fn centres(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

pub fn error_histogram(errors: &[f64], bin_width: f64) -> Result<Histogram> {
    if errors.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(Error::InvalidArgument(alloc::format!("bin width must be positive, got {bin_width}")));
    }
    if errors.iter().any(|e| !e.is_finite()) {
        return Err(Error::NonFinite);
    }
    let bin = |e: f64| libm::round(e / bin_width) as i64;
    let lo = errors.iter().map(|&e| bin(e)).min().unwrap_or(0);
    let hi = errors.iter().map(|&e| bin(e)).max().unwrap_or(0);
    let mut counts = alloc::vec![0usize; (hi - lo + 1) as usize];
    for &e in errors {
        counts[(bin(e) - lo) as usize] += 1;
    }
    let edges = (lo..=hi + 1).map(|k| (k as f64 - 0.5) * bin_width).collect();
    Ok(Histogram {
        bin_width,
        edges,
        counts,
    })
}

/// Reference and estimated pressures for one subject's test segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectPrediction {
    pub subject_id: String,
    pub sbp_ref: Vec<f64>,
    pub sbp_est: Vec<f64>,
    pub dbp_ref: Vec<f64>,
    pub dbp_est: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectStats {
    pub subject_id: String,
    pub sbp: ErrorStats,
    pub dbp: ErrorStats,
}

/// Mean of the per-subject RMSE and MAE values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AveragedStats {
    pub rmse: f64,
    pub mae: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pair<T> {
    pub sbp: T,
    pub dbp: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n_subjects: usize,
    pub per_subject: Vec<SubjectStats>,
    pub averaged: Pair<AveragedStats>,
    pub combined: Pair<ErrorStats>,
    pub aami: Pair<AamiVerdict>,
    pub bhs: Pair<BhsResult>,
    pub bland_altman: Pair<BlandAltmanResult>,
    /// `None` when either stacked series is constant.
    pub pearson_r: Pair<Option<f64>>,
    pub histogram: Pair<Histogram>,
}

fn averaged(stats: &[&ErrorStats]) -> AveragedStats {
    let n = stats.len() as f64;
    AveragedStats {
        rmse: stats.iter().map(|s| s.rmse).sum::<f64>() / n,
        mae: stats.iter().map(|s| s.mae).sum::<f64>() / n,
    }
}

fn correlation(reference: &[f64], estimate: &[f64]) -> Result<Option<f64>> {
    match pearson_r(reference, estimate) {
        Ok(r) => Ok(Some(r)),
        Err(Error::UndefinedCorrelation) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Per-subject statistics, their average, and every combined statistic over
/// the stacked samples of all subjects.
pub fn build_report(subjects: &[SubjectPrediction], histogram_bin_width: f64) -> Result<EvalReport> {
    if subjects.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut per_subject = Vec::with_capacity(subjects.len());
    let mut stacked: [Vec<f64>; 4] = Default::default();
    for s in subjects {
        per_subject.push(SubjectStats {
            subject_id: s.subject_id.clone(),
            sbp: error_stats(&s.sbp_ref, &s.sbp_est)?,
            dbp: error_stats(&s.dbp_ref, &s.dbp_est)?,
        });
        for (dst, src) in stacked.iter_mut().zip([&s.sbp_ref, &s.sbp_est, &s.dbp_ref, &s.dbp_est]) {
            dst.extend_from_slice(src);
        }
    }
    let [sbp_ref, sbp_est, dbp_ref, dbp_est] = &stacked;
    let combined = Pair {
        sbp: error_stats(sbp_ref, sbp_est)?,
        dbp: error_stats(dbp_ref, dbp_est)?,
    };
    let sbp_err = errors(sbp_ref, sbp_est)?;
    let dbp_err = errors(dbp_ref, dbp_est)?;
    let n_subjects = subjects.len();
    Ok(EvalReport {
        n_subjects,
        averaged: Pair {
            sbp: averaged(&per_subject.iter().map(|s| &s.sbp).collect::<Vec<_>>()),
            dbp: averaged(&per_subject.iter().map(|s| &s.dbp).collect::<Vec<_>>()),
        },
        aami: Pair {
            sbp: aami_check(&combined.sbp, n_subjects),
            dbp: aami_check(&combined.dbp, n_subjects),
        },
        bhs: Pair {
            sbp: bhs_grade(&sbp_err)?,
            dbp: bhs_grade(&dbp_err)?,
        },
        bland_altman: Pair {
            sbp: bland_altman(sbp_ref, sbp_est)?.0,
            dbp: bland_altman(dbp_ref, dbp_est)?.0,
        },
        pearson_r: Pair {
            sbp: correlation(sbp_ref, sbp_est)?,
            dbp: correlation(dbp_ref, dbp_est)?,
        },
        histogram: Pair {
            sbp: error_histogram(&sbp_err, histogram_bin_width)?,
            dbp: error_histogram(&dbp_err, histogram_bin_width)?,
        },
        combined,
        per_subject,
    })
}
