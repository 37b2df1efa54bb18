//! The BP-Net architecture.
//!
//! ECG and PPG each pass through their own 1×1 convolution, the results are
//! concatenated channel-wise and run through a stack of residual blocks with
//! doubling dilation, then a 1×1 head maps to two channels per sample:
//! row 0 is normalized SBP, row 1 normalized DBP.
//!
//! Residual block: `out = ELU(skip(x) + F(x))` with
//! `F = dropout(ELU(conv2(dropout(ELU(conv1(x))))))`, where `skip` is the
//! identity or a 1×1 projection when the channel count changes.

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{ComputeGraph, Conv1dLayer, Mode, NodeId, ParamStore, Tensor};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub kernel_size: usize,
    pub dilations: Vec<usize>,
    pub block_channels: Vec<usize>,
    pub input_stem_channels: usize,
    pub head_channels: usize,
    pub output_channels: usize,
    pub dropout_rate: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            kernel_size: 5,
            dilations: alloc::vec![1, 2, 4, 8, 16, 32],
            block_channels: alloc::vec![32, 32, 64, 64, 128, 256],
            input_stem_channels: 32,
            head_channels: 256,
            output_channels: 2,
            dropout_rate: 0.2,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dilations.len() != self.block_channels.len() {
            return Err(Error::InvalidConfig(alloc::format!(
                "{} dilations for {} blocks",
                self.dilations.len(),
                self.block_channels.len()
            )));
        }
        if self.block_channels.is_empty() {
            return Err(Error::InvalidConfig("at least one residual block is required".into()));
        }
        let positive = self.kernel_size > 0
            && self.input_stem_channels > 0
            && self.head_channels > 0
            && self.dilations.iter().all(|&d| d > 0)
            && self.block_channels.iter().all(|&c| c > 0);
        if !positive {
            return Err(Error::InvalidConfig(
                "kernel size, dilations and channel counts must be positive".into(),
            ));
        }
        if self.output_channels != 2 {
            return Err(Error::InvalidConfig(alloc::format!(
                "the output head produces (SBP, DBP); output_channels must be 2, got {}",
                self.output_channels
            )));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::InvalidConfig(alloc::format!(
                "dropout_rate must be in [0, 1), got {}",
                self.dropout_rate
            )));
        }
        Ok(())
    }

    /// Samples of history visible to one output: `1 + sum 2 (R - 1) L`.
    pub fn receptive_field(&self) -> usize {
        receptive_field_total(self)
    }
}

/// Two dilated convolutions per block; 1×1 layers add nothing.
pub fn receptive_field_total(config: &ModelConfig) -> usize {
    1 + config
        .dilations
        .iter()
        .map(|&l| 2 * (config.kernel_size - 1) * l)
        .sum::<usize>()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualBlock {
    pub conv1: Conv1dLayer,
    pub conv2: Conv1dLayer,
    pub projection: Option<Conv1dLayer>,
    pub dropout_rate: f64,
}

impl ResidualBlock {
    fn forward(&self, graph: &mut ComputeGraph<'_>, x: NodeId) -> Result<NodeId> {
        let h = graph.conv_layer(x, &self.conv1)?;
        let h = graph.elu(h)?;
        let h = graph.dropout(h, self.dropout_rate)?;
        let h = graph.conv_layer(h, &self.conv2)?;
        let h = graph.elu(h)?;
        let h = graph.dropout(h, self.dropout_rate)?;
        let skip = match &self.projection {
            Some(p) => graph.conv_layer(x, p)?,
            None => x,
        };
        let sum = graph.add(skip, h)?;
        graph.elu(sum)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BPNetModel {
    pub config: ModelConfig,
    pub params: ParamStore,
    pub ecg_stem: Conv1dLayer,
    pub ppg_stem: Conv1dLayer,
    pub blocks: Vec<ResidualBlock>,
    pub head_conv1: Conv1dLayer,
    pub head_conv2: Conv1dLayer,
}

/// Builds a freshly initialized model; identical seeds give identical weights.
pub fn build_bpnet(config: &ModelConfig, rng_seed: u64) -> Result<BPNetModel> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut params = ParamStore::new();
    let stem = config.input_stem_channels;
    let ecg_stem = Conv1dLayer::new(&mut params, "ecg_stem", 1, stem, 1, 1, &mut rng)?;
    let ppg_stem = Conv1dLayer::new(&mut params, "ppg_stem", 1, stem, 1, 1, &mut rng)?;
    let mut in_ch = 2 * stem;
    let mut blocks = Vec::with_capacity(config.block_channels.len());
    for (k, (&out_ch, &dilation)) in config.block_channels.iter().zip(&config.dilations).enumerate() {
        let name = alloc::format!("blocks.{k}");
        let r = config.kernel_size;
        let conv1 = Conv1dLayer::new(&mut params, &alloc::format!("{name}.conv1"), in_ch, out_ch, r, dilation, &mut rng)?;
        let conv2 = Conv1dLayer::new(&mut params, &alloc::format!("{name}.conv2"), out_ch, out_ch, r, dilation, &mut rng)?;
        let projection = if in_ch != out_ch {
            Some(Conv1dLayer::new(&mut params, &alloc::format!("{name}.projection"), in_ch, out_ch, 1, 1, &mut rng)?)
        } else {
            None
        };
        blocks.push(ResidualBlock {
            conv1,
            conv2,
            projection,
            dropout_rate: config.dropout_rate,
        });
        in_ch = out_ch;
    }
    let head_conv1 = Conv1dLayer::new(&mut params, "head.conv1", in_ch, config.head_channels, 1, 1, &mut rng)?;
    let head_conv2 = Conv1dLayer::new(
        &mut params,
        "head.conv2",
        config.head_channels,
        config.output_channels,
        1,
        1,
        &mut rng,
    )?;
    Ok(BPNetModel {
        config: config.clone(),
        params,
        ecg_stem,
        ppg_stem,
        blocks,
        head_conv1,
        head_conv2,
    })
}

impl BPNetModel {
    /// Rebuilds the layer layout for `config` and installs `params`, which
    /// must match it name for name and shape for shape.
    pub fn from_parts(config: &ModelConfig, params: ParamStore) -> Result<Self> {
        let mut model = build_bpnet(config, 0)?;
        model.params.check_layout(&params)?;
        model.params = params;
        Ok(model)
    }

    pub fn parameter_count(&self) -> usize {
        self.params.scalar_count()
    }

    pub fn receptive_field(&self) -> usize {
        receptive_field_total(&self.config)
    }

    /// Records the forward pass on `graph`; inputs are `[B, 1, T]`, the
    /// result `[B, 2, T]`.
    pub fn forward(&self, graph: &mut ComputeGraph<'_>, ecg: NodeId, ppg: NodeId) -> Result<NodeId> {
        let (es, ps) = (graph.value(ecg).shape(), graph.value(ppg).shape());
        if es != ps {
            return Err(Error::ShapeMismatch(alloc::format!(
                "ECG input {es:?} vs PPG input {ps:?}"
            )));
        }
        if es[1] != 1 {
            return Err(Error::ShapeMismatch(alloc::format!(
                "inputs must have one channel, got {}",
                es[1]
            )));
        }
        let e = graph.conv_layer(ecg, &self.ecg_stem)?;
        let p = graph.conv_layer(ppg, &self.ppg_stem)?;
        let mut h = graph.concat(e, p)?;
        for block in &self.blocks {
            h = block.forward(graph, h)?;
        }
        let h = graph.conv_layer(h, &self.head_conv1)?;
        let h = graph.elu(h)?;
        let h = graph.conv_layer(h, &self.head_conv2)?;
        graph.elu(h)
    }

    /// Inference without dropout.
    pub fn infer(&self, ecg: &Tensor, ppg: &Tensor) -> Result<Tensor> {
        let mut graph = ComputeGraph::new(&self.params, Mode::Eval);
        let e = graph.input(ecg.clone())?;
        let p = graph.input(ppg.clone())?;
        let out = self.forward(&mut graph, e, p)?;
        Ok(graph.value(out).clone())
    }
}
