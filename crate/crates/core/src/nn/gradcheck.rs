use alloc::string::String;

use crate::error::Result;
use crate::nn::{Gradients, ParamStore};

/// Worst disagreement between analytic and central-difference gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct GradCheck {
    pub max_relative_error: f64,
    pub worst_param: String,
    pub worst_index: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub checked: usize,
}

/// Compares `grads` against `(f(θ + h) - f(θ - h)) / 2h` for every scalar
/// parameter.
///
/// Relative error is `|a - n| / max(|a|, |n|, floor)`; the floor keeps
/// gradients that are zero up to rounding from dominating the maximum.
pub fn finite_difference_check(
    params: &ParamStore,
    grads: &Gradients,
    step: f64,
    floor: f64,
    mut loss: impl FnMut(&ParamStore) -> Result<f64>,
) -> Result<GradCheck> {
    let mut probe = params.clone();
    let mut report = GradCheck {
        max_relative_error: 0.0,
        worst_param: String::new(),
        worst_index: 0,
        analytic: 0.0,
        numeric: 0.0,
        checked: 0,
    };
    for (pi, param) in params.iter().enumerate() {
        let id = crate::nn::ParamId(pi);
        for k in 0..param.value.len() {
            let original = param.value.data()[k];
            probe.get_mut(id).data_mut()[k] = original + step;
            let up = loss(&probe)?;
            probe.get_mut(id).data_mut()[k] = original - step;
            let down = loss(&probe)?;
            probe.get_mut(id).data_mut()[k] = original;
            let numeric = (up - down) / (2.0 * step);
            let analytic = grads.get(id)[k];
            let scale = analytic.abs().max(numeric.abs()).max(floor);
            let rel = (analytic - numeric).abs() / scale;
            report.checked += 1;
            if rel > report.max_relative_error || report.worst_param.is_empty() {
                report.max_relative_error = rel;
                report.worst_param = param.name.clone();
                report.worst_index = k;
                report.analytic = analytic;
                report.numeric = numeric;
            }
        }
    }
    Ok(report)
}
