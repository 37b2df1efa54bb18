use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Dense row-major `[batch, channels, time]` array of `f64`.
///
/// Parameter tensors reuse the same layout: a kernel is `[out, in, taps]`
/// and a per-channel vector is `[1, 1, n]`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Tensor {
    shape: [usize; 3],
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(shape: [usize; 3]) -> Self {
        Self {
            shape,
            data: vec![0.0; shape.iter().product()],
        }
    }

    pub fn filled(shape: [usize; 3], value: f64) -> Self {
        Self {
            shape,
            data: vec![value; shape.iter().product()],
        }
    }

    pub fn from_vec(shape: [usize; 3], data: Vec<f64>) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if data.len() != expected {
            return Err(Error::ShapeMismatch(alloc::format!(
                "shape {shape:?} needs {expected} values, got {}",
                data.len()
            )));
        }
        Ok(Self { shape, data })
    }

    /// A `[1, 1, n]` tensor.
    pub fn vector(data: Vec<f64>) -> Self {
        Self {
            shape: [1, 1, data.len()],
            data,
        }
    }

    pub fn scalar(value: f64) -> Self {
        Self::vector(vec![value])
    }

    pub fn shape(&self) -> [usize; 3] {
        self.shape
    }

    pub fn batch(&self) -> usize {
        self.shape[0]
    }

    pub fn channels(&self) -> usize {
        self.shape[1]
    }

    pub fn time(&self) -> usize {
        self.shape[2]
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn at(&self, b: usize, c: usize, t: usize) -> f64 {
        self.data[self.offset(b, c, t)]
    }

    pub fn set(&mut self, b: usize, c: usize, t: usize, value: f64) {
        let i = self.offset(b, c, t);
        self.data[i] = value;
    }

    #[inline]
    fn offset(&self, b: usize, c: usize, t: usize) -> usize {
        (b * self.shape[1] + c) * self.shape[2] + t
    }

    /// The time series of one `(batch, channel)` row.
    pub fn row(&self, b: usize, c: usize) -> &[f64] {
        let start = self.offset(b, c, 0);
        &self.data[start..start + self.shape[2]]
    }

    pub fn row_mut(&mut self, b: usize, c: usize) -> &mut [f64] {
        let start = self.offset(b, c, 0);
        let t = self.shape[2];
        &mut self.data[start..start + t]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            shape: self.shape,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }
}
