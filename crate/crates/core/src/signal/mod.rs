//! Waveform conditioning: resampling, wavelet denoising, mains notch and
//! μ-law companding.

mod bandstop;
mod denoise;
mod mulaw;
mod resample;
pub mod wavelet;

use alloc::vec::Vec;

use crate::error::{Error, Result};

pub use bandstop::{bandstop_bidirectional, BandStop, Biquad};
pub use denoise::{denoise_ecg, denoise_ppg, denoise_waveform, INPUT_RATE_HZ, PROCESSING_RATE_HZ};
pub use mulaw::{mu_law, mu_law_inverse, normalize_amplitude, compand_window, MU};
pub use resample::resample;
pub use wavelet::{
    dwt_decompose, idwt_reconstruct, threshold_coefficients, WaveletFilterBank, WaveletPyramid,
    LEVELS,
};

/// A uniformly sampled 1-D waveform.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SignalVector {
    sample_rate_hz: f64,
    samples: Vec<f64>,
}

impl SignalVector {
    pub fn new(sample_rate_hz: f64, samples: Vec<f64>) -> Result<Self> {
        if !(sample_rate_hz > 0.0) || !sample_rate_hz.is_finite() {
            return Err(Error::InvalidArgument(alloc::format!(
                "sample rate must be positive, got {sample_rate_hz}"
            )));
        }
        if samples.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self {
            sample_rate_hz,
            samples,
        })
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz
    }

    /// Same rate, new samples. Used internally where finiteness already holds.
    pub(crate) fn with_samples(&self, samples: Vec<f64>) -> Self {
        Self {
            sample_rate_hz: self.sample_rate_hz,
            samples,
        }
    }
}
