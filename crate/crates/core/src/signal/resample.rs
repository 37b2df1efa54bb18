use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::signal::SignalVector;

/// Sinc zero crossings on each side of the kernel centre. The transition
/// band must separate 60 Hz from its 65 Hz image at a 125 Hz input rate.
const ZERO_CROSSINGS: f64 = 64.0;
const KAISER_BETA: f64 = 8.6;
const PHASE_CACHE_LIMIT: usize = 64;

/// Zeroth-order modified Bessel function of the first kind (power series).
fn bessel_i0(x: f64) -> f64 {
    let half_sq = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    while term > 1e-17 * sum {
        term *= half_sq / (k * k);
        sum += term;
        k += 1.0;
    }
    sum
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = core::f64::consts::PI * x;
        libm::sin(px) / px
    }
}

/// Point-symmetric extension: x[-k] = 2 x[0] - x[k], x[n-1+k] = 2 x[n-1] - x[n-1-k].
/// Constants and straight lines continue exactly.
fn extended(x: &[f64], i: isize) -> f64 {
    let n = x.len() as isize;
    if (0..n).contains(&i) {
        return x[i as usize];
    }
    if i < 0 {
        let mirror = (-i).min(n - 1);
        2.0 * x[0] - x[mirror as usize]
    } else {
        let mirror = (2 * (n - 1) - i).max(0);
        2.0 * x[(n - 1) as usize] - x[mirror as usize]
    }
}

/// Band-limited resampling by Kaiser-windowed sinc interpolation.
///
/// The kernel cutoff is the lower of the two Nyquist frequencies, so
/// upsampling interpolates and downsampling low-passes before decimating.
/// Samples are treated as cell centres: output sample `k` sits at input
/// position `(k + 0.5) * r - 0.5` with `r = input_hz / target_hz`, so an
/// integer-factor up/down round trip lands exactly on the original grid.
/// Output length is `round(n * target_hz / input_hz)`.
pub fn resample(signal: &SignalVector, target_hz: f64) -> Result<SignalVector> {
    if signal.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !(target_hz > 0.0) || !target_hz.is_finite() {
        return Err(Error::InvalidArgument(alloc::format!(
            "target rate must be positive, got {target_hz}"
        )));
    }
    let input_hz = signal.sample_rate_hz();
    let x = signal.samples();
    let out_len = libm::round(x.len() as f64 * target_hz / input_hz) as usize;
    let step = input_hz / target_hz;
    let cutoff = (target_hz / input_hz).min(1.0);
    let half_width = ZERO_CROSSINGS / cutoff;
    let norm = bessel_i0(KAISER_BETA);

    // Rational rate ratios revisit a few fractional phases; their kernels
    // are cached so the Bessel window is not re-evaluated per tap.
    let mut cache: Vec<(u64, isize, Vec<f64>)> = Vec::new();
    let kernel = |centre: f64| -> (isize, Vec<f64>) {
        let first = libm::ceil(centre - half_width) as isize;
        let last = libm::floor(centre + half_width) as isize;
        let weights = (first..=last)
            .map(|i| {
                let offset = centre - i as f64;
                let r = offset / half_width;
                if r.abs() > 1.0 {
                    return 0.0;
                }
                let window = bessel_i0(KAISER_BETA * libm::sqrt(1.0 - r * r)) / norm;
                cutoff * sinc(cutoff * offset) * window
            })
            .collect();
        (first, weights)
    };

    let out: Vec<f64> = (0..out_len)
        .map(|k| {
            let centre = (k as f64 + 0.5) * step - 0.5;
            let base = libm::floor(centre);
            let phase = (centre - base).to_bits();
            let slot = match cache.iter().position(|(p, _, _)| *p == phase) {
                Some(slot) => slot,
                None => {
                    let (first, weights) = kernel(centre - base);
                    if cache.len() == PHASE_CACHE_LIMIT {
                        cache.remove(0);
                    }
                    cache.push((phase, first, weights));
                    cache.len() - 1
                }
            };
            let (_, first, weights) = &cache[slot];
            let origin = base as isize + first;
            let (mut acc, mut weight_sum) = (0.0, 0.0);
            for (j, &w) in weights.iter().enumerate() {
                acc += w * extended(x, origin + j as isize);
                weight_sum += w;
            }
            acc / weight_sum
        })
        .collect();
    SignalVector::new(target_hz, out)
}
