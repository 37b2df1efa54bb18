use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::nn::{Gradients, ParamStore};

pub const DEFAULT_BETA1: f64 = 0.9;
pub const DEFAULT_BETA2: f64 = 0.999;
pub const DEFAULT_EPSILON: f64 = 1e-8;

/// First and second moment estimates for every parameter scalar.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AdamState {
    pub first_moment: Vec<Vec<f64>>,
    pub second_moment: Vec<Vec<f64>>,
    pub step_count: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    pub fn new(params: &ParamStore) -> Self {
        let zeros: Vec<Vec<f64>> = params.iter().map(|p| alloc::vec![0.0; p.value.len()]).collect();
        Self {
            first_moment: zeros.clone(),
            second_moment: zeros,
            step_count: 0,
            beta1: DEFAULT_BETA1,
            beta2: DEFAULT_BETA2,
            epsilon: DEFAULT_EPSILON,
        }
    }
}

/// One bias-corrected Adam update of every parameter in place.
pub fn adam_step(params: &mut ParamStore, grads: &Gradients, state: &mut AdamState, lr: f64) -> Result<()> {
    if grads.len() != params.len() || state.first_moment.len() != params.len() {
        return Err(Error::ShapeMismatch(alloc::format!(
            "{} parameters, {} gradients, {} moment buffers",
            params.len(),
            grads.len(),
            state.first_moment.len()
        )));
    }
    for ((p, g), m) in params.iter().zip(grads.iter()).zip(&state.first_moment) {
        if p.value.len() != g.len() || p.value.len() != m.len() {
            return Err(Error::ShapeMismatch(alloc::format!(
                "parameter {} has {} values, gradient {}, moments {}",
                p.name,
                p.value.len(),
                g.len(),
                m.len()
            )));
        }
    }
    state.step_count += 1;
    let t = state.step_count as f64;
    let (b1, b2, eps) = (state.beta1, state.beta2, state.epsilon);
    let c1 = 1.0 - libm::pow(b1, t);
    let c2 = 1.0 - libm::pow(b2, t);
    for (((p, g), m), v) in params
        .iter_mut()
        .zip(grads.iter())
        .zip(state.first_moment.iter_mut())
        .zip(state.second_moment.iter_mut())
    {
        for (((w, &gi), mi), vi) in p.value.data_mut().iter_mut().zip(g).zip(m.iter_mut()).zip(v.iter_mut()) {
            *mi = b1 * *mi + (1.0 - b1) * gi;
            *vi = b2 * *vi + (1.0 - b2) * gi * gi;
            let m_hat = *mi / c1;
            let v_hat = *vi / c2;
            *w -= lr * m_hat / (libm::sqrt(v_hat) + eps);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{ParamId, Tensor};

    fn scalar_store(value: f64) -> ParamStore {
        let mut p = ParamStore::new();
        p.push("w", Tensor::scalar(value));
        p
    }

    fn grads_of(params: &ParamStore, value: f64) -> Gradients {
        let mut g = Gradients::zeros_like(params);
        g.get_mut(ParamId(0))[0] = value;
        g
    }

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut p = scalar_store(0.25);
        let mut s = AdamState::new(&p);
        let g = grads_of(&p, 0.0);
        adam_step(&mut p, &g, &mut s, 0.001).unwrap();
        assert_eq!(p.get(ParamId(0)).data()[0], 0.25);
    }

    #[test]
    fn first_step_is_lr_over_one_plus_eps() {
        let mut p = scalar_store(0.0);
        let mut s = AdamState::new(&p);
        let g = grads_of(&p, 1.0);
        adam_step(&mut p, &g, &mut s, 0.001).unwrap();
        let want = -0.001 / (1.0 + 1e-8);
        assert!((p.get(ParamId(0)).data()[0] - want).abs() < 1e-18);
        assert!((want + 0.000999999).abs() < 1e-9);
    }

    #[test]
    fn two_steps_match_reference() {
        // independent scalar Adam
        let (lr, b1, b2, eps) = (0.001f64, 0.9f64, 0.999f64, 1e-8f64);
        let (mut w, mut m, mut v) = (0.5f64, 0.0f64, 0.0f64);
        for t in 1..=2 {
            let g = 1.0;
            m = b1 * m + (1.0 - b1) * g;
            v = b2 * v + (1.0 - b2) * g * g;
            let mh = m / (1.0 - b1.powi(t));
            let vh = v / (1.0 - b2.powi(t));
            w -= lr * mh / (vh.sqrt() + eps);
        }
        let mut p = scalar_store(0.5);
        let mut s = AdamState::new(&p);
        for _ in 0..2 {
            let g = grads_of(&p, 1.0);
            adam_step(&mut p, &g, &mut s, lr).unwrap();
        }
        assert!((p.get(ParamId(0)).data()[0] - w).abs() < 1e-12);
        assert_eq!(s.step_count, 2);
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let mut p = scalar_store(0.0);
        let mut s = AdamState::new(&p);
        let mut other = ParamStore::new();
        other.push("w", Tensor::vector(alloc::vec![0.0, 0.0]));
        let g = Gradients::zeros_like(&other);
        assert!(matches!(adam_step(&mut p, &g, &mut s, 0.1), Err(Error::ShapeMismatch(_))));
    }
}
