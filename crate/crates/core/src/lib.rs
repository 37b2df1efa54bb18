//! Numerical core of the bpnet toolkit.
//!
//! Everything here is pure computation over owned buffers: waveform
//! conditioning (resampling, bior6.8 wavelet denoising, zero-phase mains
//! notch, μ-law companding), a small reverse-mode tensor engine with
//! weight-normalized dilated causal convolutions, the BP-Net model, dataset
//! transforms (target extraction, splitting, windowing, synthetic subjects),
//! the training loop and the clinical agreement metrics.
//!
//! The crate is `no_std` with `alloc`; file formats, reports and the command
//! line live in the companion `bpnet` crate.

#![cfg_attr(not(feature = "std"), no_std)]
// `!(x <= limit)` is deliberate: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Kernels index several parallel buffers by channel.
#![allow(clippy::needless_range_loop)]

extern crate alloc;

pub mod dataset;
pub mod error;
pub mod metrics;
pub mod model;
pub mod nn;
pub mod signal;
pub mod train;

pub use error::{Error, Result};
pub use signal::SignalVector;
