//! Ten-level discrete wavelet transform with the biorthogonal 6.8 filter bank.
//!
//! Boundary handling is half-point symmetric extension at every level. With
//! a filter of length `F`, a level on `n` samples produces
//! `floor((n + F - 1) / 2)` coefficients per band, and synthesis keeps the
//! central `2m - F + 2` samples of the upsampled convolution, which is then
//! trimmed to the length recorded for that level.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::signal::SignalVector;

/// Number of decomposition levels.
pub const LEVELS: usize = 10;

const BIOR68_DEC_LO: [f64; 18] = [
    0.0,
    0.0019088317364812906,
    -0.0019142861290887667,
    -0.016990639867602342,
    0.01193456527972926,
    0.04973290349094079,
    -0.07726317316720414,
    -0.09405920349573646,
    0.4207962846098268,
    0.8259229974584023,
    0.4207962846098268,
    -0.09405920349573646,
    -0.07726317316720414,
    0.04973290349094079,
    0.01193456527972926,
    -0.016990639867602342,
    -0.0019142861290887667,
    0.0019088317364812906,
];

const BIOR68_REC_LO: [f64; 18] = [
    0.0,
    0.0,
    0.0,
    0.014426282505624435,
    0.014467504896790148,
    -0.07872200106262882,
    -0.04036797903033992,
    0.41784910915027457,
    0.7589077294536541,
    0.41784910915027457,
    -0.04036797903033992,
    -0.07872200106262882,
    0.014467504896790148,
    0.014426282505624435,
    0.0,
    0.0,
    0.0,
    0.0,
];

/// Analysis and synthesis filters of a two-channel biorthogonal bank.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletFilterBank {
    pub decompose_lowpass: Vec<f64>,
    pub decompose_highpass: Vec<f64>,
    pub reconstruct_lowpass: Vec<f64>,
    pub reconstruct_highpass: Vec<f64>,
}

impl WaveletFilterBank {
    /// The biorthogonal 6.8 bank. Highpass filters are the alternating-sign
    /// quadrature mirrors of the opposite lowpass filters.
    pub fn bior6_8() -> Self {
        let dec_lo = BIOR68_DEC_LO.to_vec();
        let rec_lo = BIOR68_REC_LO.to_vec();
        let f = dec_lo.len();
        // dec_hi[k] = (-1)^(k+1) rec_lo[k], rec_hi[k] = (-1)^k dec_lo[k]
        let dec_hi = (0..f)
            .map(|k| if k % 2 == 0 { -rec_lo[k] } else { rec_lo[k] })
            .collect();
        let rec_hi = (0..f)
            .map(|k| if k % 2 == 0 { dec_lo[k] } else { -dec_lo[k] })
            .collect();
        Self {
            decompose_lowpass: dec_lo,
            decompose_highpass: dec_hi,
            reconstruct_lowpass: rec_lo,
            reconstruct_highpass: rec_hi,
        }
    }

    pub fn filter_len(&self) -> usize {
        self.decompose_lowpass.len()
    }

    fn validate(&self) -> Result<()> {
        let f = self.decompose_lowpass.len();
        if f < 2
            || self.decompose_highpass.len() != f
            || self.reconstruct_lowpass.len() != f
            || self.reconstruct_highpass.len() != f
        {
            return Err(Error::InvalidArgument(
                "filter bank needs four filters of equal length >= 2".into(),
            ));
        }
        Ok(())
    }

    /// Coefficient length of one analysis step on `n` samples.
    pub fn coeff_len(&self, n: usize) -> usize {
        (n + self.filter_len() - 1) / 2
    }
}

/// Detail bands D1 (finest) .. D10 and the final approximation A10.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletPyramid {
    pub details: Vec<Vec<f64>>,
    pub approximation: Vec<f64>,
    pub original_length: usize,
    pub sample_rate_hz: f64,
}

impl WaveletPyramid {
    pub fn energy(&self) -> f64 {
        self.details
            .iter()
            .chain(core::iter::once(&self.approximation))
            .flat_map(|band| band.iter())
            .map(|c| c * c)
            .sum()
    }
}

/// Half-point symmetric index: ... x1 x0 | x0 x1 ... x(n-1) | x(n-1) x(n-2) ...
#[inline]
fn symmetric_index(i: isize, n: usize) -> usize {
    let period = 2 * n as isize;
    let m = i.rem_euclid(period) as usize;
    if m < n {
        m
    } else {
        2 * n - 1 - m
    }
}

fn analysis_step(x: &[f64], lo: &[f64], hi: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = x.len();
    let f = lo.len();
    let out_len = (n + f - 1) / 2;
    let mut approx = vec![0.0; out_len];
    let mut detail = vec![0.0; out_len];
    for k in 0..out_len {
        let centre = 2 * k as isize + 1;
        let (mut a, mut d) = (0.0, 0.0);
        for j in 0..f {
            let idx = centre - j as isize;
            let v = if idx >= 0 && (idx as usize) < n {
                x[idx as usize]
            } else {
                x[symmetric_index(idx, n)]
            };
            a += lo[j] * v;
            d += hi[j] * v;
        }
        approx[k] = a;
        detail[k] = d;
    }
    (approx, detail)
}

fn synthesis_step(approx: &[f64], detail: &[f64], lo: &[f64], hi: &[f64]) -> Vec<f64> {
    let m = approx.len();
    let f = lo.len();
    let out_len = (2 * m + 2).saturating_sub(f);
    let mut out = vec![0.0; out_len];
    for (n, slot) in out.iter_mut().enumerate() {
        // x[n] = sum_k a[k] g[n + F - 2 - 2k], with 0 <= n + F - 2 - 2k < F
        let shifted = n + f - 2;
        let k_lo = n / 2;
        let k_hi = (shifted / 2).min(m - 1);
        let mut acc = 0.0;
        for k in k_lo..=k_hi {
            let tap = shifted - 2 * k;
            acc += approx[k] * lo[tap] + detail[k] * hi[tap];
        }
        *slot = acc;
    }
    out
}

/// Lengths of the signal at each level: `lens[0]` is the input, `lens[k]` the
/// band length after `k` analysis steps.
fn level_lengths(bank: &WaveletFilterBank, original_length: usize) -> [usize; LEVELS + 1] {
    let mut lens = [0usize; LEVELS + 1];
    lens[0] = original_length;
    for k in 1..=LEVELS {
        lens[k] = bank.coeff_len(lens[k - 1]);
    }
    lens
}

pub fn dwt_decompose(signal: &SignalVector, bank: &WaveletFilterBank) -> Result<WaveletPyramid> {
    bank.validate()?;
    let f = bank.filter_len();
    let mut current = signal.samples().to_vec();
    let mut details = Vec::with_capacity(LEVELS);
    for _ in 0..LEVELS {
        if current.len() < f {
            return Err(Error::SignalTooShort);
        }
        let (a, d) = analysis_step(&current, &bank.decompose_lowpass, &bank.decompose_highpass);
        details.push(d);
        current = a;
    }
    Ok(WaveletPyramid {
        details,
        approximation: current,
        original_length: signal.len(),
        sample_rate_hz: signal.sample_rate_hz(),
    })
}

/// Zeroes D1, D2, D3 (high-frequency noise) and A10 (baseline wander).
pub fn threshold_coefficients(pyramid: &WaveletPyramid) -> WaveletPyramid {
    let mut out = pyramid.clone();
    for band in out.details.iter_mut().take(3) {
        band.iter_mut().for_each(|c| *c = 0.0);
    }
    out.approximation.iter_mut().for_each(|c| *c = 0.0);
    out
}

pub fn idwt_reconstruct(pyramid: &WaveletPyramid, bank: &WaveletFilterBank) -> Result<SignalVector> {
    bank.validate()?;
    if pyramid.details.len() != LEVELS {
        return Err(Error::CorruptPyramid);
    }
    let lens = level_lengths(bank, pyramid.original_length);
    if pyramid.approximation.len() != lens[LEVELS]
        || pyramid
            .details
            .iter()
            .enumerate()
            .any(|(k, d)| d.len() != lens[k + 1])
    {
        return Err(Error::CorruptPyramid);
    }
    let mut current = pyramid.approximation.clone();
    for level in (0..LEVELS).rev() {
        let mut up = synthesis_step(
            &current,
            &pyramid.details[level],
            &bank.reconstruct_lowpass,
            &bank.reconstruct_highpass,
        );
        if up.len() < lens[level] {
            return Err(Error::CorruptPyramid);
        }
        up.truncate(lens[level]);
        current = up;
    }
    SignalVector::new(pyramid.sample_rate_hz, current)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sv(x: Vec<f64>) -> SignalVector {
        SignalVector::new(1000.0, x).unwrap()
    }

    fn random_signal(seed: u64, n: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    // Zero-padded full convolution followed by odd-index downsampling.
    fn conv_down(x: &[f64], h: &[f64]) -> Vec<f64> {
        let full: Vec<f64> = (0..x.len() + h.len() - 1)
            .map(|i| {
                (0..h.len())
                    .filter(|&j| i >= j && i - j < x.len())
                    .map(|j| h[j] * x[i - j])
                    .sum()
            })
            .collect();
        full.iter().skip(1).step_by(2).copied().collect()
    }

    #[test]
    fn constant_signal_has_no_detail_energy() {
        let bank = WaveletFilterBank::bior6_8();
        let p = dwt_decompose(&sv(vec![2.5; 4096]), &bank).unwrap();
        for band in &p.details {
            assert!(band.iter().all(|c| c.abs() < 1e-9), "{:?}", band);
        }
        assert!(p.approximation.iter().all(|c| c.abs() > 1.0));
    }

    #[test]
    fn impulse_matches_cascaded_filter_responses() {
        let bank = WaveletFilterBank::bior6_8();
        let n = 8192;
        let mut x = vec![0.0; n];
        x[n / 2] = 1.0;
        let p = dwt_decompose(&sv(x.clone()), &bank).unwrap();
        // Level 1 and level 2 through the zero-padded oracle; the impulse is
        // far enough from both edges that extension does not matter.
        let d1 = conv_down(&x, &bank.decompose_highpass);
        let a1 = conv_down(&x, &bank.decompose_lowpass);
        let d2 = conv_down(&a1, &bank.decompose_highpass);
        assert_eq!(p.details[0].len(), d1.len());
        for (got, want) in p.details[0].iter().zip(&d1) {
            assert!((got - want).abs() < 1e-15);
        }
        for (got, want) in p.details[1].iter().zip(&d2) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn matches_reference_coefficients() {
        // x[i] = sin(0.3 i) + 0.1 i for i in 0..64, PyWavelets bior6.8 symmetric, level 1.
        let x: Vec<f64> = (0..64).map(|i| libm::sin(0.3 * i as f64) + 0.1 * i as f64).collect();
        let bank = WaveletFilterBank::bior6_8();
        let (a, d) = analysis_step(&x, &bank.decompose_lowpass, &bank.decompose_highpass);
        assert_eq!(a.len(), 40);
        let want_a = [2.219206892188468, 2.1213082618894457, 1.5419749863483876];
        let want_d = [-0.0002075295135415059, 0.005507266236269955, -0.021381799811596068];
        for i in 0..3 {
            assert!((a[i] - want_a[i]).abs() < 1e-12, "a[{i}] = {}", a[i]);
            assert!((d[i] - want_d[i]).abs() < 1e-12, "d[{i}] = {}", d[i]);
        }
    }

    #[test]
    fn round_trip_odd_and_even_lengths() {
        let bank = WaveletFilterBank::bior6_8();
        for (seed, n) in [(1, 1024), (2, 1025), (3, 3001), (4, 8192)] {
            let x = random_signal(seed, n);
            let p = dwt_decompose(&sv(x.clone()), &bank).unwrap();
            let y = idwt_reconstruct(&p, &bank).unwrap();
            assert_eq!(y.len(), n);
            let err = x
                .iter()
                .zip(y.samples())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(err < 1e-8, "n={n} err={err}");
        }
    }

    #[test]
    fn too_short_signal_is_rejected() {
        let bank = WaveletFilterBank::bior6_8();
        let err = dwt_decompose(&sv(vec![1.0; 200]), &bank).unwrap_err();
        assert_eq!(err, Error::SignalTooShort);
        assert_eq!(err.to_string(), "signal too short for 10 levels");
    }

    #[test]
    fn threshold_zeroes_exactly_the_noise_bands() {
        let bank = WaveletFilterBank::bior6_8();
        let mut p = dwt_decompose(&sv(random_signal(5, 2048)), &bank).unwrap();
        for band in p.details.iter_mut() {
            band.iter_mut().for_each(|c| *c = 1.0);
        }
        p.approximation.iter_mut().for_each(|c| *c = 1.0);
        let t = threshold_coefficients(&p);
        for (k, band) in t.details.iter().enumerate() {
            assert_eq!(band.len(), p.details[k].len());
            let want = if k < 3 { 0.0 } else { 1.0 };
            assert!(band.iter().all(|&c| c == want));
        }
        assert!(t.approximation.iter().all(|&c| c == 0.0));
        assert_eq!(threshold_coefficients(&t), t);
    }

    #[test]
    fn threshold_energy_is_kept_band_energy() {
        let bank = WaveletFilterBank::bior6_8();
        let p = dwt_decompose(&sv(random_signal(6, 4000)), &bank).unwrap();
        let kept: f64 = p.details[3..].iter().flatten().map(|c| c * c).sum();
        let t = threshold_coefficients(&p);
        assert!((t.energy() - kept).abs() <= 1e-12 * kept);
    }

    #[test]
    fn zero_pyramid_reconstructs_zero() {
        let bank = WaveletFilterBank::bior6_8();
        let p = dwt_decompose(&sv(vec![0.0; 1500]), &bank).unwrap();
        let y = idwt_reconstruct(&p, &bank).unwrap();
        assert!(y.samples().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn dc_lives_only_in_the_approximation() {
        let bank = WaveletFilterBank::bior6_8();
        let amp = 7.0;
        let p = dwt_decompose(&sv(vec![amp; 5000]), &bank).unwrap();
        let mut p = p;
        p.approximation.iter_mut().for_each(|c| *c = 0.0);
        let y = idwt_reconstruct(&p, &bank).unwrap();
        assert!(y.samples().iter().all(|v| v.abs() < 1e-6 * amp));
    }

    #[test]
    fn corrupt_pyramid_is_rejected() {
        let bank = WaveletFilterBank::bior6_8();
        let mut p = dwt_decompose(&sv(random_signal(7, 2048)), &bank).unwrap();
        p.details[4].pop();
        assert_eq!(idwt_reconstruct(&p, &bank).unwrap_err(), Error::CorruptPyramid);
        let mut p = dwt_decompose(&sv(random_signal(7, 2048)), &bank).unwrap();
        p.details.pop();
        assert_eq!(idwt_reconstruct(&p, &bank).unwrap_err(), Error::CorruptPyramid);
    }
}
