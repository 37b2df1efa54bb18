//! Forward and backward kernels shared by the compute graph and the
//! standalone functional API.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::nn::Tensor;

/// Dilated causal convolution.
///
/// `out[b,o,p] = bias[o] + sum_{c,i} w[o,c,i] * x[b,c,p - dilation*i]`, with
/// inputs before time 0 read as zero. Tap 0 reads the current sample, so the
/// output keeps the input length and never looks ahead.
pub fn conv_forward(x: &Tensor, w: &Tensor, bias: &[f64], dilation: usize) -> Result<Tensor> {
    let [batch, in_ch, time] = x.shape();
    let [out_ch, w_in, taps] = w.shape();
    if w_in != in_ch {
        return Err(Error::ShapeMismatch(alloc::format!(
            "input has {in_ch} channels, kernel expects {w_in}"
        )));
    }
    if bias.len() != out_ch {
        return Err(Error::ShapeMismatch(alloc::format!(
            "{} biases for {out_ch} output channels",
            bias.len()
        )));
    }
    if dilation == 0 || taps == 0 {
        return Err(Error::InvalidArgument(
            "kernel size and dilation must be >= 1".into(),
        ));
    }
    let mut out = Tensor::zeros([batch, out_ch, time]);
    for b in 0..batch {
        for o in 0..out_ch {
            let row = out.row_mut(b, o);
            row.fill(bias[o]);
            for c in 0..in_ch {
                let src = x.row(b, c);
                for i in 0..taps {
                    let shift = dilation * i;
                    if shift >= time {
                        break;
                    }
                    let k = w.at(o, c, i);
                    for (dst, s) in row[shift..].iter_mut().zip(&src[..time - shift]) {
                        *dst += k * s;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Dot product over four independent partial sums, which lets the
/// reduction vectorize; the summation order is fixed, so results are
/// reproducible.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Gradients of [`conv_forward`] with respect to input, kernel and bias.
pub fn conv_backward(x: &Tensor, w: &Tensor, dilation: usize, dy: &Tensor) -> (Tensor, Tensor, Vec<f64>) {
    let [batch, in_ch, time] = x.shape();
    let [out_ch, _, taps] = w.shape();
    let mut dx = Tensor::zeros(x.shape());
    let mut dw = Tensor::zeros(w.shape());
    let mut db = vec![0.0; out_ch];
    for b in 0..batch {
        for o in 0..out_ch {
            let g = dy.row(b, o);
            db[o] += g.iter().sum::<f64>();
            for c in 0..in_ch {
                let src = x.row(b, c);
                for i in 0..taps {
                    let shift = dilation * i;
                    if shift >= time {
                        break;
                    }
                    let dot = dot(&g[shift..], &src[..time - shift]);
                    let idx = (o * in_ch + c) * taps + i;
                    dw.data_mut()[idx] += dot;
                    let k = w.at(o, c, i);
                    let dst = dx.row_mut(b, c);
                    for (d, gv) in dst[..time - shift].iter_mut().zip(&g[shift..]) {
                        *d += k * gv;
                    }
                }
            }
        }
    }
    (dx, dw, db)
}

/// `w[o] = g[o] * v[o] / |v[o]|` for each output channel's kernel `v[o]`.
/// Returns the materialized kernel and the per-channel norms.
pub fn weight_norm_forward(v: &Tensor, g: &[f64]) -> Result<(Tensor, Vec<f64>)> {
    let [out_ch, in_ch, taps] = v.shape();
    if g.len() != out_ch {
        return Err(Error::ShapeMismatch(alloc::format!(
            "{} gains for {out_ch} output channels",
            g.len()
        )));
    }
    let per = in_ch * taps;
    let mut w = Tensor::zeros(v.shape());
    let mut norms = Vec::with_capacity(out_ch);
    for o in 0..out_ch {
        let dir = &v.data()[o * per..(o + 1) * per];
        let norm = libm::sqrt(dir.iter().map(|a| a * a).sum::<f64>());
        if !(norm > 0.0) {
            return Err(Error::DegenerateDirection);
        }
        let scale = g[o] / norm;
        for (dst, a) in w.data_mut()[o * per..(o + 1) * per].iter_mut().zip(dir) {
            *dst = scale * a;
        }
        norms.push(norm);
    }
    Ok((w, norms))
}

/// Chain rule through the weight-norm reparameterization:
/// `dg = <dw, v> / |v|`, `dv = (g / |v|) (dw - (<dw, v> / |v|^2) v)`.
pub fn weight_norm_backward(v: &Tensor, g: &[f64], norms: &[f64], dw: &Tensor) -> (Tensor, Vec<f64>) {
    let [out_ch, in_ch, taps] = v.shape();
    let per = in_ch * taps;
    let mut dv = Tensor::zeros(v.shape());
    let mut dg = vec![0.0; out_ch];
    for o in 0..out_ch {
        let dir = &v.data()[o * per..(o + 1) * per];
        let grad = &dw.data()[o * per..(o + 1) * per];
        let norm = norms[o];
        let dot: f64 = grad.iter().zip(dir).map(|(a, b)| a * b).sum();
        dg[o] = dot / norm;
        let scale = g[o] / norm;
        let proj = dot / (norm * norm);
        for ((d, gr), a) in dv.data_mut()[o * per..(o + 1) * per].iter_mut().zip(grad).zip(dir) {
            *d = scale * (gr - proj * a);
        }
    }
    (dv, dg)
}

/// Materializes one weight-normalized kernel row.
pub fn weight_norm_materialize(v: &[f64], g: f64) -> Result<Vec<f64>> {
    let norm = libm::sqrt(v.iter().map(|a| a * a).sum::<f64>());
    if !(norm > 0.0) {
        return Err(Error::DegenerateDirection);
    }
    Ok(v.iter().map(|a| g * a / norm).collect())
}

#[inline]
pub fn elu_scalar(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        libm::expm1(x)
    }
}

/// ELU with `alpha = 1`.
pub fn elu(x: &Tensor) -> Tensor {
    x.map(elu_scalar)
}

/// Inverted-dropout mask: entries are `0` with probability `rate`, otherwise
/// `1 / (1 - rate)`.
pub(crate) fn dropout_mask(len: usize, rate: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let keep_scale = 1.0 / (1.0 - rate);
    (0..len)
        .map(|_| if rng.random::<f64>() < rate { 0.0 } else { keep_scale })
        .collect()
}

pub(crate) fn check_dropout_rate(rate: f64) -> Result<()> {
    if (0.0..1.0).contains(&rate) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(alloc::format!(
            "dropout rate must be in [0, 1), got {rate}"
        )))
    }
}

/// Standalone dropout. Identity when not training or when `rate == 0`.
pub fn dropout(x: &Tensor, rate: f64, training: bool, rng_seed: u64) -> Result<Tensor> {
    check_dropout_rate(rate)?;
    if !training || rate == 0.0 {
        return Ok(x.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mask = dropout_mask(x.len(), rate, &mut rng);
    let data = x.data().iter().zip(&mask).map(|(a, m)| a * m).collect();
    Tensor::from_vec(x.shape(), data)
}

/// Receptive field of one dilated convolution: `R + (R - 1)(L - 1)`.
pub fn receptive_field_single(kernel_size: usize, dilation: usize) -> usize {
    kernel_size + (kernel_size - 1) * (dilation - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_tensor(shape: [usize; 3], seed: u64) -> Tensor {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = shape.iter().product();
        Tensor::from_vec(shape, (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
    }

    /// Direct evaluation of the dilated-convolution sum, one output at a time.
    fn conv_oracle(x: &Tensor, w: &Tensor, bias: &[f64], dilation: usize) -> Tensor {
        let [batch, in_ch, time] = x.shape();
        let [out_ch, _, taps] = w.shape();
        let mut out = Tensor::zeros([batch, out_ch, time]);
        for b in 0..batch {
            for o in 0..out_ch {
                for p in 0..time {
                    let mut acc = bias[o];
                    for c in 0..in_ch {
                        for i in 0..taps {
                            let src = p as isize - (dilation * i) as isize;
                            if src >= 0 {
                                acc += w.at(o, c, i) * x.at(b, c, src as usize);
                            }
                        }
                    }
                    out.set(b, o, p, acc);
                }
            }
        }
        out
    }

    #[test]
    fn unit_kernel_is_identity() {
        let x = random_tensor([2, 1, 17], 1);
        let w = Tensor::filled([1, 1, 1], 1.0);
        for dilation in [1, 3, 40] {
            assert_eq!(conv_forward(&x, &w, &[0.0], dilation).unwrap(), x);
        }
    }

    #[test]
    fn dilated_pair_sum() {
        let x = Tensor::vector(alloc::vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        let w = Tensor::from_vec([1, 1, 2], alloc::vec![1.0, 1.0]).unwrap();
        let y = conv_forward(&x, &w, &[0.0], 2).unwrap();
        assert_eq!(y.data(), &[1.0, 2.0, 4.0, 6.0, 8.0]);
        assert_eq!(y, conv_oracle(&x, &w, &[0.0], 2));
    }

    #[test]
    fn matches_direct_sum_oracle() {
        for (seed, dilation, taps) in [(2, 1, 3), (3, 2, 5), (4, 7, 2), (5, 16, 5)] {
            let x = random_tensor([2, 3, 40], seed);
            let w = random_tensor([4, 3, taps], seed + 100);
            let bias = [0.1, -0.2, 0.3, 0.0];
            let got = conv_forward(&x, &w, &bias, dilation).unwrap();
            let want = conv_oracle(&x, &w, &bias, dilation);
            for (a, b) in got.data().iter().zip(want.data()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn shape_and_argument_errors() {
        let x = random_tensor([1, 2, 8], 6);
        let w = random_tensor([1, 3, 2], 7);
        assert!(matches!(conv_forward(&x, &w, &[0.0], 1), Err(Error::ShapeMismatch(_))));
        let w = random_tensor([1, 2, 2], 7);
        assert!(conv_forward(&x, &w, &[0.0], 0).is_err());
        let w0 = Tensor::zeros([1, 2, 0]);
        assert!(conv_forward(&x, &w0, &[0.0], 1).is_err());
    }

    #[test]
    fn receptive_field_formula() {
        assert_eq!(receptive_field_single(5, 1), 5);
        assert_eq!(receptive_field_single(5, 32), 129);
        assert_eq!(receptive_field_single(1, 9), 1);
    }

    #[test]
    fn elu_values() {
        assert_eq!(elu_scalar(0.0), 0.0);
        assert_eq!(elu_scalar(1.0), 1.0);
        assert!((elu_scalar(-1.0) - (libm::exp(-1.0) - 1.0)).abs() < 1e-15);
        assert!((elu_scalar(-1.0) + 0.63212).abs() < 1e-5);
    }

    #[test]
    fn weight_norm_examples() {
        let v = [0.6, 0.8];
        assert_eq!(weight_norm_materialize(&v, 1.0).unwrap(), alloc::vec![0.6, 0.8]);
        let w = weight_norm_materialize(&[3.0, 4.0], 2.0).unwrap();
        assert!((w[0] - 1.2).abs() < 1e-15 && (w[1] - 1.6).abs() < 1e-15);
        assert_eq!(weight_norm_materialize(&[0.0, 0.0], 1.0).unwrap_err(), Error::DegenerateDirection);
        // direction invariance under positive scaling
        let scaled = weight_norm_materialize(&[30.0, 40.0], 2.0).unwrap();
        assert!((scaled[0] - 1.2).abs() < 1e-15 && (scaled[1] - 1.6).abs() < 1e-15);
    }

    #[test]
    fn dropout_behaviour() {
        let x = Tensor::filled([1, 1, 100_000], 1.0);
        assert_eq!(dropout(&x, 0.0, true, 1).unwrap(), x);
        assert_eq!(dropout(&x, 0.7, false, 1).unwrap(), x);
        assert!(dropout(&x, 1.0, true, 1).is_err());
        let y = dropout(&x, 0.5, true, 42).unwrap();
        let zeros = y.data().iter().filter(|&&v| v == 0.0).count() as f64 / 1e5;
        let mean = y.sum() / 1e5;
        assert!((zeros - 0.5).abs() < 0.01 * 0.5, "{zeros}");
        assert!((mean - 1.0).abs() < 0.01, "{mean}");
        assert_eq!(y, dropout(&x, 0.5, true, 42).unwrap());
    }
}
