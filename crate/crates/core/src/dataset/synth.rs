//! Synthetic subjects whose blood pressure is a function of pulse arrival
//! lag, so ECG and PPG timing carries the targets.
//!
//! Beat `k` has an R peak at `r_k` and lag `τ_k = τ(r_k)`, with
//! `τ(t) = τ0 + A sin(2π t / P + φ)`. The PPG pulse starts at `r_k + τ_k`,
//! the ABP upstroke at `r_k + τ_k / 2`, and the beat pressures are
//! `SBP = 70 + 13 / τ_k`, `DBP = 45 + 7 / τ_k`, each plus up to ±1 mmHg of
//! uniform noise.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::{targets_from_beats, Beat, SubjectRecord, TargetSeries, RECORD_RATE_HZ};
use crate::error::{Error, Result};
use crate::signal::SignalVector;

pub const MIN_SYNTH_DURATION_S: f64 = 30.0;

const LEADS: [&str; 4] = ["I", "II", "III", "IV"];
const ABP_RISE_S: f64 = 0.08;
const PPG_RISE_S: f64 = 0.15;
const FIRST_BEAT_S: f64 = 0.3;
const BEAT_NOISE_MMHG: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SynthOptions {
    /// Holds `τ` constant instead of letting it drift.
    pub fixed_tau_s: Option<f64>,
    pub mains_hz: f64,
    pub mains_amplitude: f64,
    pub drift_hz: f64,
    pub drift_amplitude: f64,
    /// Standard deviation of white noise added to ECG and PPG.
    pub sensor_noise: f64,
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self {
            fixed_tau_s: None,
            mains_hz: 60.0,
            mains_amplitude: 0.0,
            drift_hz: 0.2,
            drift_amplitude: 0.0,
            sensor_noise: 0.01,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SynthBeat {
    pub r_peak_s: f64,
    pub tau_s: f64,
    pub sbp: f64,
    pub dbp: f64,
    /// Sample index of the ABP systolic peak.
    pub abp_peak_index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSubject {
    pub record: SubjectRecord,
    pub targets: TargetSeries,
    pub beats: Vec<SynthBeat>,
}

pub fn synth_subject(seed: u64, duration_s: f64, heart_rate_hz: f64) -> Result<SyntheticSubject> {
    synth_subject_with(seed, duration_s, heart_rate_hz, &SynthOptions::default())
}

/// `(u / tp)^2 exp(2 (1 - u / tp))`: zero at onset, one at `u = tp`.
fn pulse(u: f64, tp: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    let x = u / tp;
    x * x * libm::exp(2.0 * (1.0 - x))
}

fn gauss(t: f64, centre: f64, sigma: f64) -> f64 {
    let z = (t - centre) / sigma;
    libm::exp(-0.5 * z * z)
}

/// Box-Muller; consumes two uniforms.
fn normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(2.0 * PI * u2)
}

pub fn synth_subject_with(
    seed: u64,
    duration_s: f64,
    heart_rate_hz: f64,
    options: &SynthOptions,
) -> Result<SyntheticSubject> {
    if !(duration_s >= MIN_SYNTH_DURATION_S) {
        return Err(Error::InvalidArgument(alloc::format!(
            "synthetic duration {duration_s} s is below {MIN_SYNTH_DURATION_S} s"
        )));
    }
    if !(0.5..=3.0).contains(&heart_rate_hz) {
        return Err(Error::InvalidArgument(alloc::format!(
            "heart rate {heart_rate_hz} Hz outside [0.5, 3]"
        )));
    }
    if let Some(tau) = options.fixed_tau_s {
        if !(0.1..=0.5).contains(&tau) {
            return Err(Error::InvalidArgument(alloc::format!("fixed lag {tau} s outside [0.1, 0.5]")));
        }
    }
    let fs = RECORD_RATE_HZ;
    let n = libm::round(duration_s * fs) as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let tau0 = rng.random_range(0.20..0.30);
    let swing = rng.random_range(0.03..0.05);
    let period = rng.random_range(20.0..40.0);
    let phase = rng.random_range(0.0..2.0 * PI);
    let tau_at = |t: f64| match options.fixed_tau_s {
        Some(tau) => tau,
        None => tau0 + swing * libm::sin(2.0 * PI * t / period + phase),
    };

    // Beats until the last ABP peak leaves the record.
    let rr = 1.0 / heart_rate_hz;
    let mut beats = Vec::new();
    let mut r = FIRST_BEAT_S;
    while r < duration_s + 1.0 {
        let tau = tau_at(r);
        let sbp = 70.0 + 13.0 / tau + rng.random_range(-BEAT_NOISE_MMHG..BEAT_NOISE_MMHG);
        let dbp = 45.0 + 7.0 / tau + rng.random_range(-BEAT_NOISE_MMHG..BEAT_NOISE_MMHG);
        let peak_t = r + 0.5 * tau + ABP_RISE_S;
        beats.push(SynthBeat {
            r_peak_s: r,
            tau_s: tau,
            sbp,
            dbp,
            abp_peak_index: libm::round(peak_t * fs) as usize,
        });
        r += rr * rng.random_range(0.97..1.03);
    }

    let mut ecg = vec![0.0; n];
    let mut ppg = vec![0.0; n];
    let mut abp = vec![0.0; n];
    let mut beat = 0;
    for i in 0..n {
        let t = i as f64 / fs;
        let mut e = 0.0;
        let mut p = 0.0;
        for b in &beats {
            let dt = t - b.r_peak_s;
            if dt < -0.4 {
                break;
            }
            if dt > 1.5 {
                continue;
            }
            e += 0.12 * gauss(dt, -0.16, 0.025) - 0.15 * gauss(dt, -0.025, 0.008)
                + gauss(dt, 0.0, 0.012)
                - 0.2 * gauss(dt, 0.025, 0.008)
                + 0.3 * gauss(dt, 0.25, 0.05);
            p += pulse(dt - b.tau_s, PPG_RISE_S);
        }
        ecg[i] = e;
        ppg[i] = p;

        // ABP: beat `k` rises from D_k to S_k, then relaxes towards D_{k+1}.
        let onset = |b: &SynthBeat| b.r_peak_s + 0.5 * b.tau_s;
        while beat + 1 < beats.len() && onset(&beats[beat + 1]) <= t {
            beat += 1;
        }
        abp[i] = if t < onset(&beats[0]) {
            beats[0].dbp
        } else {
            let b = &beats[beat];
            let u = t - onset(b);
            let next_dbp = beats.get(beat + 1).map_or(b.dbp, |nb| nb.dbp);
            if u <= ABP_RISE_S {
                b.dbp + (b.sbp - b.dbp) * pulse(u, ABP_RISE_S)
            } else {
                next_dbp + (b.sbp - next_dbp) * pulse(u, ABP_RISE_S)
            }
        };
    }
    for i in 0..n {
        let t = i as f64 / fs;
        let wander = options.drift_amplitude * libm::sin(2.0 * PI * options.drift_hz * t)
            + options.mains_amplitude * libm::sin(2.0 * PI * options.mains_hz * t);
        ecg[i] += wander + options.sensor_noise * normal(&mut rng);
        ppg[i] += options.sensor_noise * normal(&mut rng);
    }

    let in_record: Vec<SynthBeat> = beats.into_iter().filter(|b| b.abp_peak_index < n).collect();
    let held: Vec<Beat> = in_record
        .iter()
        .map(|b| Beat {
            peak_index: b.abp_peak_index,
            sbp: b.sbp,
            dbp: b.dbp,
        })
        .collect();
    let targets = targets_from_beats(&held, n)?;
    let record = SubjectRecord::new(
        alloc::format!("synth{seed:03}"),
        String::from(LEADS[(seed % 4) as usize]),
        SignalVector::new(fs, ecg)?,
        SignalVector::new(fs, ppg)?,
        SignalVector::new(fs, abp)?,
    )?;
    Ok(SyntheticSubject {
        record,
        targets,
        beats: in_record,
    })
}
