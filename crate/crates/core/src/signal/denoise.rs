//! Raw-waveform denoising chain shared by ECG and PPG:
//! 125 Hz -> 1000 Hz, bior6.8 ten-level DWT, drop D1-D3 and A10, inverse
//! DWT, 59.5-61.5 Hz zero-phase notch, back to 125 Hz.

use crate::error::{Error, Result};
use crate::signal::{
    bandstop_bidirectional, dwt_decompose, idwt_reconstruct, resample, threshold_coefficients,
    SignalVector, WaveletFilterBank,
};

pub const INPUT_RATE_HZ: f64 = 125.0;
pub const PROCESSING_RATE_HZ: f64 = 1000.0;
pub const MAINS_STOP_LOW_HZ: f64 = 59.5;
pub const MAINS_STOP_HIGH_HZ: f64 = 61.5;

pub fn denoise_waveform(signal: &SignalVector) -> Result<SignalVector> {
    if signal.is_empty() {
        return Err(Error::EmptyInput);
    }
    if (signal.sample_rate_hz() - INPUT_RATE_HZ).abs() > 1e-9 {
        return Err(Error::InvalidArgument(alloc::format!(
            "expected {INPUT_RATE_HZ} Hz input, got {} Hz",
            signal.sample_rate_hz()
        )));
    }
    let bank = WaveletFilterBank::bior6_8();
    let upsampled = resample(signal, PROCESSING_RATE_HZ)?;
    let pyramid = threshold_coefficients(&dwt_decompose(&upsampled, &bank)?);
    let reconstructed = idwt_reconstruct(&pyramid, &bank)?;
    let notched = bandstop_bidirectional(&reconstructed, MAINS_STOP_LOW_HZ, MAINS_STOP_HIGH_HZ)?;
    resample(&notched, INPUT_RATE_HZ)
}

pub fn denoise_ecg(signal: &SignalVector) -> Result<SignalVector> {
    denoise_waveform(signal)
}

pub fn denoise_ppg(signal: &SignalVector) -> Result<SignalVector> {
    denoise_waveform(signal)
}
