//! Tape-based reverse-mode differentiation over [`Tensor`] values.
//!
//! Nodes are appended in evaluation order, so the tape is already a
//! topological order and backward is a single reverse sweep.

use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::nn::ops;
use crate::nn::{Conv1dLayer, Gradients, ParamId, ParamStore, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeId(usize);

/// Whether dropout is active. Training mode carries the mask seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train { seed: u64 },
    Eval,
}

#[derive(Debug)]
enum Op {
    Input,
    Param(ParamId),
    WeightNorm { v: NodeId, g: NodeId, norms: Vec<f64> },
    Conv { x: NodeId, w: NodeId, bias: NodeId, dilation: usize },
    Elu(NodeId),
    Dropout { x: NodeId, mask: Vec<f64> },
    Add(NodeId, NodeId),
    Concat(NodeId, NodeId),
    Mse { pred: NodeId, target: NodeId },
}

#[derive(Debug)]
struct Node {
    op: Op,
    value: Tensor,
}

/// A recorded forward computation over the parameters of one model.
pub struct ComputeGraph<'p> {
    params: &'p ParamStore,
    nodes: Vec<Node>,
    rng: Option<ChaCha8Rng>,
}

impl<'p> ComputeGraph<'p> {
    pub fn new(params: &'p ParamStore, mode: Mode) -> Self {
        let rng = match mode {
            Mode::Train { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
            Mode::Eval => None,
        };
        Self {
            params,
            nodes: Vec::new(),
            rng,
        }
    }

    pub fn is_training(&self) -> bool {
        self.rng.is_some()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, op: Op, value: Tensor) -> Result<NodeId> {
        if !value.all_finite() {
            return Err(Error::NumericFailure("non-finite activation in forward pass".into()));
        }
        self.nodes.push(Node { op, value });
        Ok(NodeId(self.nodes.len() - 1))
    }

    pub fn value(&self, id: NodeId) -> &Tensor {
        &self.nodes[id.0].value
    }

    pub fn input(&mut self, value: Tensor) -> Result<NodeId> {
        self.push(Op::Input, value)
    }

    pub fn param(&mut self, id: ParamId) -> Result<NodeId> {
        let value = self.params.get(id).clone();
        self.push(Op::Param(id), value)
    }

    pub fn weight_norm(&mut self, v: NodeId, g: NodeId) -> Result<NodeId> {
        let (w, norms) = ops::weight_norm_forward(self.value(v), self.value(g).data())?;
        self.push(Op::WeightNorm { v, g, norms }, w)
    }

    pub fn conv(&mut self, x: NodeId, w: NodeId, bias: NodeId, dilation: usize) -> Result<NodeId> {
        let y = ops::conv_forward(self.value(x), self.value(w), self.value(bias).data(), dilation)?;
        self.push(Op::Conv { x, w, bias, dilation }, y)
    }

    /// Weight-normalized causal convolution with the layer's parameters.
    pub fn conv_layer(&mut self, x: NodeId, layer: &Conv1dLayer) -> Result<NodeId> {
        let v = self.param(layer.direction)?;
        let g = self.param(layer.gain)?;
        let b = self.param(layer.bias)?;
        let w = self.weight_norm(v, g)?;
        self.conv(x, w, b, layer.dilation)
    }

    pub fn elu(&mut self, x: NodeId) -> Result<NodeId> {
        let y = ops::elu(self.value(x));
        self.push(Op::Elu(x), y)
    }

    /// Inverted dropout; a no-op outside training or at rate 0.
    pub fn dropout(&mut self, x: NodeId, rate: f64) -> Result<NodeId> {
        ops::check_dropout_rate(rate)?;
        let Some(rng) = self.rng.as_mut() else {
            return Ok(x);
        };
        if rate == 0.0 {
            return Ok(x);
        }
        let mask = ops::dropout_mask(self.nodes[x.0].value.len(), rate, rng);
        let src = &self.nodes[x.0].value;
        let data = src.data().iter().zip(&mask).map(|(a, m)| a * m).collect();
        let y = Tensor::from_vec(src.shape(), data)?;
        self.push(Op::Dropout { x, mask }, y)
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (va, vb) = (self.value(a), self.value(b));
        if va.shape() != vb.shape() {
            return Err(Error::ShapeMismatch(alloc::format!(
                "add of {:?} and {:?}",
                va.shape(),
                vb.shape()
            )));
        }
        let data = va.data().iter().zip(vb.data()).map(|(x, y)| x + y).collect();
        let y = Tensor::from_vec(va.shape(), data)?;
        self.push(Op::Add(a, b), y)
    }

    /// Channel-wise concatenation `[B, Ca, T] ++ [B, Cb, T] -> [B, Ca + Cb, T]`.
    pub fn concat(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (va, vb) = (self.value(a), self.value(b));
        let [ba, ca, ta] = va.shape();
        let [bb, cb, tb] = vb.shape();
        if ba != bb || ta != tb {
            return Err(Error::ShapeMismatch(alloc::format!(
                "concat of {:?} and {:?}",
                va.shape(),
                vb.shape()
            )));
        }
        let mut y = Tensor::zeros([ba, ca + cb, ta]);
        for bi in 0..ba {
            for c in 0..ca {
                y.row_mut(bi, c).copy_from_slice(va.row(bi, c));
            }
            for c in 0..cb {
                y.row_mut(bi, ca + c).copy_from_slice(vb.row(bi, c));
            }
        }
        self.push(Op::Concat(a, b), y)
    }

    /// Mean squared error as a `[1, 1, 1]` node.
    pub fn mse(&mut self, pred: NodeId, target: NodeId) -> Result<NodeId> {
        let loss = crate::train::mse_value(self.value(pred), self.value(target))?;
        self.push(Op::Mse { pred, target }, Tensor::scalar(loss))
    }

    /// Backpropagates from a scalar node with seed gradient 1.
    pub fn backward(&self, loss: NodeId) -> Result<Gradients> {
        let node = self.nodes.get(loss.0).ok_or(Error::BackwardBeforeForward)?;
        if node.value.len() != 1 {
            return Err(Error::ShapeMismatch(alloc::format!(
                "backward needs a scalar loss, got {:?}",
                node.value.shape()
            )));
        }
        self.backward_seeded(loss, &Tensor::from_vec(node.value.shape(), vec![1.0])?)
    }

    /// Backpropagates an arbitrary upstream gradient `seed` from `output`.
    pub fn backward_seeded(&self, output: NodeId, seed: &Tensor) -> Result<Gradients> {
        let node = self.nodes.get(output.0).ok_or(Error::BackwardBeforeForward)?;
        if node.value.shape() != seed.shape() {
            return Err(Error::ShapeMismatch(alloc::format!(
                "seed {:?} for node {:?}",
                seed.shape(),
                node.value.shape()
            )));
        }
        let mut grads: Vec<Option<Tensor>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[output.0] = Some(seed.clone());
        let mut out = Gradients::zeros_like(self.params);

        for idx in (0..=output.0).rev() {
            let Some(dy) = grads[idx].take() else { continue };
            let node = &self.nodes[idx];
            match &node.op {
                Op::Input => {}
                Op::Param(id) => {
                    for (acc, g) in out.get_mut(*id).iter_mut().zip(dy.data()) {
                        *acc += g;
                    }
                }
                Op::WeightNorm { v, g, norms } => {
                    let (dv, dg) = ops::weight_norm_backward(
                        self.value(*v),
                        self.value(*g).data(),
                        norms,
                        &dy,
                    );
                    accumulate(&mut grads, *v, dv);
                    accumulate(&mut grads, *g, Tensor::vector(dg));
                }
                Op::Conv { x, w, bias, dilation } => {
                    let (dx, dw, db) = ops::conv_backward(self.value(*x), self.value(*w), *dilation, &dy);
                    accumulate(&mut grads, *x, dx);
                    accumulate(&mut grads, *w, dw);
                    accumulate(&mut grads, *bias, Tensor::vector(db));
                }
                Op::Elu(x) => {
                    let xv = self.value(*x);
                    let data = dy
                        .data()
                        .iter()
                        .zip(xv.data())
                        .zip(node.value.data())
                        .map(|((g, &xi), &yi)| if xi > 0.0 { *g } else { g * (yi + 1.0) })
                        .collect();
                    accumulate(&mut grads, *x, Tensor::from_vec(dy.shape(), data)?);
                }
                Op::Dropout { x, mask } => {
                    let data = dy.data().iter().zip(mask).map(|(g, m)| g * m).collect();
                    accumulate(&mut grads, *x, Tensor::from_vec(dy.shape(), data)?);
                }
                Op::Add(a, b) => {
                    accumulate(&mut grads, *a, dy.clone());
                    accumulate(&mut grads, *b, dy);
                }
                Op::Concat(a, b) => {
                    let ca = self.value(*a).channels();
                    let cb = self.value(*b).channels();
                    let [batch, _, time] = dy.shape();
                    let mut da = Tensor::zeros([batch, ca, time]);
                    let mut dbt = Tensor::zeros([batch, cb, time]);
                    for bi in 0..batch {
                        for c in 0..ca {
                            da.row_mut(bi, c).copy_from_slice(dy.row(bi, c));
                        }
                        for c in 0..cb {
                            dbt.row_mut(bi, c).copy_from_slice(dy.row(bi, ca + c));
                        }
                    }
                    accumulate(&mut grads, *a, da);
                    accumulate(&mut grads, *b, dbt);
                }
                Op::Mse { pred, target } => {
                    let upstream = dy.data()[0];
                    let (p, t) = (self.value(*pred), self.value(*target));
                    let scale = 2.0 * upstream / p.len() as f64;
                    let dp: Vec<f64> = p.data().iter().zip(t.data()).map(|(a, b)| scale * (a - b)).collect();
                    let dt: Vec<f64> = dp.iter().map(|g| -g).collect();
                    accumulate(&mut grads, *pred, Tensor::from_vec(p.shape(), dp)?);
                    accumulate(&mut grads, *target, Tensor::from_vec(t.shape(), dt)?);
                }
            }
        }
        if !out.all_finite() {
            return Err(Error::NumericFailure("non-finite gradient".into()));
        }
        Ok(out)
    }
}

fn accumulate(grads: &mut [Option<Tensor>], id: NodeId, g: Tensor) {
    match &mut grads[id.0] {
        Some(existing) => {
            for (a, b) in existing.data_mut().iter_mut().zip(g.data()) {
                *a += b;
            }
        }
        slot @ None => *slot = Some(g),
    }
}
