use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Companding constant used for network inputs.
pub const MU: f64 = 255.0;

fn check_mu(mu: f64) -> Result<()> {
    if mu > 0.0 && mu.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(alloc::format!("mu must be positive, got {mu}")))
    }
}

/// `sign(x) ln(1 + mu |x|) / ln(1 + mu)` on `[-1, 1]`.
pub fn mu_law(x: f64, mu: f64) -> Result<f64> {
    check_mu(mu)?;
    if !(x.abs() <= 1.0) {
        return Err(Error::NotNormalized(x));
    }
    Ok(libm::copysign(libm::log1p(mu * x.abs()) / libm::log1p(mu), x))
}

pub fn mu_law_inverse(y: f64, mu: f64) -> Result<f64> {
    check_mu(mu)?;
    if !(y.abs() <= 1.0) {
        return Err(Error::NotNormalized(y));
    }
    Ok(libm::copysign(libm::expm1(y.abs() * libm::log1p(mu)) / mu, y))
}

/// Divides by the largest magnitude; an all-zero window is left as is.
pub fn normalize_amplitude(window: &[f64]) -> Vec<f64> {
    let peak = window.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let divisor = if peak > 0.0 { peak } else { 1.0 };
    window.iter().map(|v| (v / divisor).clamp(-1.0, 1.0)).collect()
}

/// Amplitude normalization followed by μ-law companding with [`MU`].
pub fn compand_window(window: &[f64]) -> Vec<f64> {
    normalize_amplitude(window)
        .into_iter()
        .map(|v| mu_law(v, MU).expect("normalized sample"))
        .collect()
}
