use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::nn::{ops, ParamId, ParamStore, Tensor};

/// Weight-normalized dilated causal convolution.
///
/// The effective kernel is `w[o] = g[o] * v[o] / |v[o]|`; `v`, `g` and the
/// bias are the trainable tensors. Causality comes from left zero-padding by
/// `(kernel_size - 1) * dilation`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Conv1dLayer {
    pub direction: ParamId,
    pub gain: ParamId,
    pub bias: ParamId,
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel_size: usize,
    pub dilation: usize,
}

impl Conv1dLayer {
    /// Registers a layer with He-uniform directions, `g = |v|` (so the
    /// initial effective kernel equals `v`) and zero bias.
    pub fn new(
        params: &mut ParamStore,
        name: &str,
        in_channels: usize,
        out_channels: usize,
        kernel_size: usize,
        dilation: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self> {
        if in_channels == 0 || out_channels == 0 || kernel_size == 0 || dilation == 0 {
            return Err(Error::InvalidConfig(alloc::format!(
                "layer {name}: channels, kernel size and dilation must be >= 1"
            )));
        }
        let fan_in = (in_channels * kernel_size) as f64;
        let bound = libm::sqrt(6.0 / fan_in);
        let per = in_channels * kernel_size;
        let v: Vec<f64> = (0..out_channels * per)
            .map(|_| rng.random_range(-bound..bound))
            .collect();
        let g: Vec<f64> = v
            .chunks(per)
            .map(|row| libm::sqrt(row.iter().map(|a| a * a).sum::<f64>()))
            .collect();
        let direction = params.push(
            alloc::format!("{name}.v"),
            Tensor::from_vec([out_channels, in_channels, kernel_size], v)?,
        );
        let gain = params.push(alloc::format!("{name}.g"), Tensor::vector(g));
        let bias = params.push(
            alloc::format!("{name}.bias"),
            Tensor::zeros([1, 1, out_channels]),
        );
        Ok(Self {
            direction,
            gain,
            bias,
            in_channels,
            out_channels,
            kernel_size,
            dilation,
        })
    }

    pub fn receptive_field(&self) -> usize {
        ops::receptive_field_single(self.kernel_size, self.dilation)
    }

    /// Left zero-padding applied before the convolution.
    pub fn left_padding(&self) -> usize {
        (self.kernel_size - 1) * self.dilation
    }

    /// The effective kernel `[out, in, taps]`.
    pub fn materialize(&self, params: &ParamStore) -> Result<Tensor> {
        let (w, _) = ops::weight_norm_forward(params.get(self.direction), params.get(self.gain).data())?;
        Ok(w)
    }

    pub fn scalar_count(&self) -> usize {
        self.out_channels * self.in_channels * self.kernel_size + 2 * self.out_channels
    }
}

/// Applies one layer outside a compute graph.
pub fn causal_dilated_conv(input: &Tensor, layer: &Conv1dLayer, params: &ParamStore) -> Result<Tensor> {
    let w = layer.materialize(params)?;
    ops::conv_forward(input, &w, params.get(layer.bias).data(), layer.dilation)
}
