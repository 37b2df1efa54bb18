//! Minimal dense tensor engine: weight-normalized dilated causal
//! convolution, ELU, dropout, add/concat, reverse-mode gradients and Adam.

mod adam;
mod gradcheck;
mod graph;
mod layers;
pub mod ops;
mod params;
mod tensor;

pub use adam::{adam_step, AdamState};
pub use gradcheck::{finite_difference_check, GradCheck};
pub use graph::{ComputeGraph, Mode, NodeId};
pub use layers::{causal_dilated_conv, Conv1dLayer};
pub use ops::{dropout, elu, receptive_field_single, weight_norm_materialize};
pub use params::{Gradients, Param, ParamId, ParamStore};
pub use tensor::Tensor;
