//! Dense 3-axis tensors laid out as (time, frequency, channel), row-major.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
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

    pub fn from_vec(shape: [usize; 3], data: Vec<f64>) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if data.len() != expected {
            return Err(Error::Shape(format!(
                "shape {shape:?} needs {expected} values, got {}",
                data.len()
            )));
        }
        Ok(Self { shape, data })
    }

    pub fn filled(shape: [usize; 3], value: f64) -> Self {
        Self {
            shape,
            data: vec![value; shape.iter().product()],
        }
    }

    #[inline]
    pub fn shape(&self) -> [usize; 3] {
        self.shape
    }

    #[inline]
    pub fn time(&self) -> usize {
        self.shape[0]
    }

    #[inline]
    pub fn freq(&self) -> usize {
        self.shape[1]
    }

    #[inline]
    pub fn channels(&self) -> usize {
        self.shape[2]
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn index(&self, t: usize, f: usize, c: usize) -> usize {
        (t * self.shape[1] + f) * self.shape[2] + c
    }

    #[inline]
    pub fn get(&self, t: usize, f: usize, c: usize) -> f64 {
        self.data[self.index(t, f, c)]
    }

    #[inline]
    pub fn set(&mut self, t: usize, f: usize, c: usize, v: f64) {
        let i = self.index(t, f, c);
        self.data[i] = v;
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

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            shape: self.shape,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Reinterprets the data with a new shape of equal size.
    pub fn reshape(self, shape: [usize; 3]) -> Result<Self> {
        Self::from_vec(shape, self.data)
    }
}
