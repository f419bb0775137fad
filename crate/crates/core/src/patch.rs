use crate::{Error, Result};

/// A single-channel image patch, vectorized row-major into a graph signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    height: usize,
    width: usize,
    values: Vec<f64>,
}

impl Patch {
    pub fn new(height: usize, width: usize, values: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::invalid("patch dimensions must be positive"));
        }
        if values.len() != height * width {
            return Err(Error::DimensionMismatch {
                expected: height * width,
                actual: values.len(),
            });
        }
        Ok(Self {
            height,
            width,
            values,
        })
    }

    pub fn filled(height: usize, width: usize, value: f64) -> Result<Self> {
        Self::new(height, width, vec![value; height * width])
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    /// Same shape, new samples.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.height, self.width, values)
    }
}
