//! Butterworth band-stop design and forward-backward (zero-phase) filtering.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::signal::SignalVector;

/// Prototype order of the mains notch. Order 4 yields 8 poles (4 biquads).
pub const BANDSTOP_ORDER: usize = 4;

/// One second-order section, normalized so `a0 == 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 3],
}

impl Biquad {
    /// Transposed direct form II state reached after an infinitely long
    /// constant input `x0`.
    fn steady_state(&self, x0: f64) -> [f64; 2] {
        let gain = (self.b[0] + self.b[1] + self.b[2]) / (1.0 + self.a[1] + self.a[2]);
        let y0 = gain * x0;
        let z2 = self.b[2] * x0 - self.a[2] * y0;
        let z1 = y0 - self.b[0] * x0;
        [z1, z2]
    }

    fn run(&self, data: &mut [f64], mut z: [f64; 2]) {
        let [b0, b1, b2] = self.b;
        let [_, a1, a2] = self.a;
        for v in data.iter_mut() {
            let x = *v;
            let y = b0 * x + z[0];
            z[0] = b1 * x - a1 * y + z[1];
            z[1] = b2 * x - a2 * y;
            *v = y;
        }
    }

    pub fn response(&self, freq_hz: f64, sample_rate_hz: f64) -> Complex64 {
        let z1 = Complex64::from_polar(1.0, -2.0 * PI * freq_hz / sample_rate_hz);
        let z2 = z1 * z1;
        (self.b[0] + z1 * self.b[1] + z2 * self.b[2]) / (1.0 + z1 * self.a[1] + z2 * self.a[2])
    }
}

/// A cascade of biquads realizing a Butterworth band-stop filter.
#[derive(Debug, Clone, PartialEq)]
pub struct BandStop {
    sections: Vec<Biquad>,
}

impl BandStop {
    /// Bilinear-transform design with prewarped band edges.
    pub fn butterworth(order: usize, low_hz: f64, high_hz: f64, sample_rate_hz: f64) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidArgument("band-stop order must be >= 1".into()));
        }
        if !(low_hz > 0.0 && low_hz < high_hz) {
            return Err(Error::InvalidArgument(alloc::format!(
                "stop band [{low_hz}, {high_hz}] Hz is not an increasing positive interval"
            )));
        }
        if !(sample_rate_hz > 2.0 * high_hz) {
            return Err(Error::NyquistViolation {
                sample_rate_hz,
                high_hz,
            });
        }
        let fs2 = 2.0 * sample_rate_hz;
        let warp = |f: f64| fs2 * libm::tan(PI * f / sample_rate_hz);
        let (w_low, w_high) = (warp(low_hz), warp(high_hz));
        let bandwidth = w_high - w_low;
        let centre_sq = w_low * w_high;
        let centre = libm::sqrt(centre_sq);

        // Notch zeros at +/- j*centre map onto the unit circle at this angle.
        let zero_angle = 2.0 * libm::atan(centre / fs2);
        let zero_b1 = -2.0 * libm::cos(zero_angle);

        let bilinear = |s: Complex64| (fs2 + s) / (fs2 - s);
        let section = |pole: Complex64| {
            let a1 = -2.0 * pole.re;
            let a2 = pole.norm_sqr();
            // unit gain at DC
            let k = (1.0 + a1 + a2) / (2.0 + zero_b1);
            Biquad {
                b: [k, k * zero_b1, k],
                a: [1.0, a1, a2],
            }
        };

        let mut sections = Vec::with_capacity(order);
        for m in 0..order {
            let theta = PI * (2 * m + order + 1) as f64 / (2 * order) as f64;
            let proto = Complex64::from_polar(1.0, theta);
            if proto.im < -1e-12 {
                continue; // conjugate of a pole already handled
            }
            // s^2 - (B/p) s + w0^2 = 0
            let half = bandwidth / (2.0 * proto);
            let disc = (half * half - centre_sq).sqrt();
            let (s1, s2) = (half + disc, half - disc);
            if proto.im.abs() <= 1e-12 {
                // real prototype pole: s1, s2 are conjugates
                sections.push(section(bilinear(s1)));
            } else {
                sections.push(section(bilinear(s1)));
                sections.push(section(bilinear(s2)));
            }
        }
        Ok(Self { sections })
    }

    pub fn sections(&self) -> &[Biquad] {
        &self.sections
    }

    pub fn response(&self, freq_hz: f64, sample_rate_hz: f64) -> Complex64 {
        self.sections
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, s| acc * s.response(freq_hz, sample_rate_hz))
    }

    fn run_cascade(&self, data: &mut [f64]) {
        let Some(&x0) = data.first() else { return };
        for s in &self.sections {
            // each section has unit DC gain, so every stage starts at level x0
            s.run(data, s.steady_state(x0));
        }
    }

    /// Forward then time-reversed pass over an odd-extended copy of `x`.
    pub fn filtfilt(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        if n == 0 {
            return Vec::new();
        }
        let pad = (3 * (2 * self.sections.len() + 1)).min(n - 1);
        let mut ext = Vec::with_capacity(n + 2 * pad);
        ext.extend((1..=pad).rev().map(|k| 2.0 * x[0] - x[k]));
        ext.extend_from_slice(x);
        ext.extend((1..=pad).map(|k| 2.0 * x[n - 1] - x[n - 1 - k]));

        self.run_cascade(&mut ext);
        ext.reverse();
        self.run_cascade(&mut ext);
        ext.reverse();
        ext[pad..pad + n].to_vec()
    }
}

/// Zero-phase Butterworth band-stop between `low_hz` and `high_hz`.
pub fn bandstop_bidirectional(signal: &SignalVector, low_hz: f64, high_hz: f64) -> Result<SignalVector> {
    let filter = BandStop::butterworth(BANDSTOP_ORDER, low_hz, high_hz, signal.sample_rate_hz())?;
    Ok(signal.with_samples(filter.filtfilt(signal.samples())))
}
