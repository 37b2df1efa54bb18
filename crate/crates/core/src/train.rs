//! Training loop, learning-rate schedule and loss.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{TargetScaling, WindowedExample};
use crate::error::{Error, Result};
use crate::model::BPNetModel;
use crate::nn::{adam_step, AdamState, ComputeGraph, Mode, ParamStore, Tensor};
use crate::signal::compand_window;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    Mse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub base_lr: f64,
    pub cycle_len_epochs: usize,
    pub halving_period_epochs: usize,
    pub cycle_boundary_multiplier: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub loss: LossKind,
    pub rng_seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            base_lr: 0.001,
            cycle_len_epochs: 100,
            halving_period_epochs: 20,
            cycle_boundary_multiplier: 14.4,
            batch_size: 64,
            epochs: 100,
            loss: LossKind::Mse,
            rng_seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.base_lr > 0.0 && self.base_lr.is_finite()) {
            return Err(Error::InvalidConfig(alloc::format!("base_lr must be positive, got {}", self.base_lr)));
        }
        if !(self.cycle_boundary_multiplier > 0.0 && self.cycle_boundary_multiplier.is_finite()) {
            return Err(Error::InvalidConfig("cycle_boundary_multiplier must be positive".into()));
        }
        if self.batch_size == 0 || self.cycle_len_epochs == 0 || self.halving_period_epochs == 0 {
            return Err(Error::InvalidConfig(
                "batch_size, cycle_len_epochs and halving_period_epochs must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Cyclic schedule: the rate halves every `halving_period_epochs` within a
/// cycle; at a cycle boundary the last halving is replaced by
/// `cycle_boundary_multiplier`, so with the defaults each cycle starts at
/// `(1/16) * 14.4 = 0.9` of the previous start.
pub fn lr_at_epoch(epoch: usize, config: &TrainConfig) -> f64 {
    let halvings_per_cycle = (config.cycle_len_epochs - 1) / config.halving_period_epochs;
    let decay = libm::ldexp(1.0, -(halvings_per_cycle as i32));
    let mut start = config.base_lr;
    for _ in 0..epoch / config.cycle_len_epochs {
        start = start * decay * config.cycle_boundary_multiplier;
    }
    let within = (epoch % config.cycle_len_epochs) / config.halving_period_epochs;
    start * libm::ldexp(1.0, -(within as i32))
}

fn check_same_shape(pred: &Tensor, target: &Tensor) -> Result<()> {
    if pred.shape() != target.shape() {
        return Err(Error::ShapeMismatch(alloc::format!(
            "prediction {:?} vs target {:?}",
            pred.shape(),
            target.shape()
        )));
    }
    if pred.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(())
}

/// Mean squared error over every element.
pub fn mse_value(pred: &Tensor, target: &Tensor) -> Result<f64> {
    check_same_shape(pred, target)?;
    let sum: f64 = pred.data().iter().zip(target.data()).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(sum / pred.len() as f64)
}

/// MSE and its gradient `2 (pred - target) / N` with respect to `pred`.
pub fn mse_loss(pred: &Tensor, target: &Tensor) -> Result<(f64, Tensor)> {
    let loss = mse_value(pred, target)?;
    let scale = 2.0 / pred.len() as f64;
    let grad = pred.data().iter().zip(target.data()).map(|(a, b)| scale * (a - b)).collect();
    Ok((loss, Tensor::from_vec(pred.shape(), grad)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub lr: f64,
    pub train_loss: f64,
    pub valid_loss: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub history: TrainHistory,
    /// Parameters after the epoch with the lowest validation loss.
    pub best_params: ParamStore,
    pub best_epoch: usize,
}

/// Stacks windows into `[B, 1, T]` inputs and a `[B, 2, T]` target.
fn stack(windows: &[&WindowedExample]) -> Result<(Tensor, Tensor, Tensor)> {
    let t = windows[0].len();
    if t == 0 {
        return Err(Error::EmptyInput);
    }
    let b = windows.len();
    let mut ecg = Tensor::zeros([b, 1, t]);
    let mut ppg = Tensor::zeros([b, 1, t]);
    let mut target = Tensor::zeros([b, 2, t]);
    for (i, w) in windows.iter().enumerate() {
        if w.len() != t || w.ppg.len() != t || w.sbp.len() != t || w.dbp.len() != t {
            return Err(Error::ShapeMismatch(alloc::format!(
                "window of {} samples in a batch of {t}-sample windows",
                w.len()
            )));
        }
        ecg.row_mut(i, 0).copy_from_slice(&w.ecg);
        ppg.row_mut(i, 0).copy_from_slice(&w.ppg);
        target.row_mut(i, 0).copy_from_slice(&w.sbp);
        target.row_mut(i, 1).copy_from_slice(&w.dbp);
    }
    Ok((ecg, ppg, target))
}

/// Mean loss over windows in eval mode.
pub fn evaluate_loss(model: &BPNetModel, windows: &[WindowedExample], batch_size: usize) -> Result<f64> {
    if windows.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut total = 0.0;
    for chunk in windows.chunks(batch_size.max(1)) {
        let refs: Vec<&WindowedExample> = chunk.iter().collect();
        let (ecg, ppg, target) = stack(&refs)?;
        let pred = model.infer(&ecg, &ppg)?;
        total += mse_value(&pred, &target)? * chunk.len() as f64;
    }
    Ok(total / windows.len() as f64)
}

fn guard(value: f64, what: &str, epoch: usize) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NumericFailure(alloc::format!("{what} is {value} at epoch {epoch}")))
    }
}

/// Mini-batch Adam over shuffled windows.
///
/// Epoch `e` shuffles with seed `rng_seed + e`; the same generator then
/// draws one dropout seed per batch. `observer` sees every finished epoch.
pub fn train(
    model: &mut BPNetModel,
    train_windows: &[WindowedExample],
    valid_windows: &[WindowedExample],
    config: &TrainConfig,
    mut observer: impl FnMut(&EpochRecord),
) -> Result<TrainOutcome> {
    config.validate()?;
    if train_windows.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    if valid_windows.is_empty() {
        return Err(Error::InvalidArgument("empty validation set".into()));
    }
    let mut adam = AdamState::new(&model.params);
    let mut history = TrainHistory::default();
    let mut best_params = model.params.clone();
    let mut best_epoch = 0;
    let mut best_valid = f64::INFINITY;
    let mut order: Vec<usize> = (0..train_windows.len()).collect();

    for epoch in 0..config.epochs {
        let lr = lr_at_epoch(epoch, config);
        let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed.wrapping_add(epoch as u64));
        order.sort_unstable();
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for batch in order.chunks(config.batch_size) {
            let refs: Vec<&WindowedExample> = batch.iter().map(|&i| &train_windows[i]).collect();
            let (ecg, ppg, target) = stack(&refs)?;
            let dropout_seed: u64 = rng.random();
            let grads = {
                let mut graph = ComputeGraph::new(&model.params, Mode::Train { seed: dropout_seed });
                let e = graph.input(ecg)?;
                let p = graph.input(ppg)?;
                let t = graph.input(target)?;
                let y = model.forward(&mut graph, e, p)?;
                let loss = graph.mse(y, t)?;
                loss_sum += guard(graph.value(loss).data()[0], "training loss", epoch)? * batch.len() as f64;
                graph.backward(loss)?
            };
            adam_step(&mut model.params, &grads, &mut adam, lr)?;
        }
        let train_loss = guard(loss_sum / train_windows.len() as f64, "training loss", epoch)?;
        let valid_loss = guard(
            evaluate_loss(model, valid_windows, config.batch_size)?,
            "validation loss",
            epoch,
        )?;
        if valid_loss < best_valid {
            best_valid = valid_loss;
            best_epoch = epoch;
            best_params = model.params.clone();
        }
        let record = EpochRecord {
            epoch,
            lr,
            train_loss,
            valid_loss,
        };
        observer(&record);
        history.epochs.push(record);
    }
    Ok(TrainOutcome {
        history,
        best_params,
        best_epoch,
    })
}

/// Per-sample SBP and DBP in mmHg for one preprocessed segment.
///
/// The segment is cut into consecutive windows of `window_len` samples (the
/// last may be shorter); each is companded on its own, as in training.
pub fn predict(
    model: &BPNetModel,
    ecg: &[f64],
    ppg: &[f64],
    window_len: usize,
    scaling: &TargetScaling,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if ecg.len() != ppg.len() {
        return Err(Error::ShapeMismatch(alloc::format!(
            "ECG has {} samples, PPG {}",
            ecg.len(),
            ppg.len()
        )));
    }
    if window_len == 0 {
        return Err(Error::InvalidArgument("window length must be >= 1".into()));
    }
    let mut sbp = Vec::with_capacity(ecg.len());
    let mut dbp = Vec::with_capacity(ecg.len());
    for (e, p) in ecg.chunks(window_len).zip(ppg.chunks(window_len)) {
        let t = e.len();
        let et = Tensor::from_vec([1, 1, t], compand_window(e))?;
        let pt = Tensor::from_vec([1, 1, t], compand_window(p))?;
        let y = model.infer(&et, &pt)?;
        sbp.extend(y.row(0, 0).iter().map(|&v| scaling.denormalize_sbp(v)));
        dbp.extend(y.row(0, 1).iter().map(|&v| scaling.denormalize_dbp(v)));
    }
    Ok((sbp, dbp))
}
