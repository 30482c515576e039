//! Per-bin real spectral gains.

use std::ops::Index;

use crate::error::{check_len, Error, Result};

/// One real gain per one-sided frequency bin, each in `[0, 1]`.
///
/// Every gain stage of the engine (super-Gaussian gain, both coherence
/// filters, their product, the weighted blend and the post filter) produces
/// this shape.
#[derive(Debug, Clone, PartialEq)]
pub struct GainVector(Vec<f64>);

impl GainVector {
    /// Wraps `values`, rejecting anything outside `[0, 1]` or non-finite.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((k, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && (0.0..=1.0).contains(*v)))
        {
            return Err(Error::Parameter(format!("gain[{k}] = {v} is outside [0,1]")));
        }
        Ok(Self(values))
    }

    /// Constant gain `value` (clamped into `[0, 1]`) over `len` bins.
    pub fn filled(len: usize, value: f64) -> Self {
        Self(vec![value.clamp(0.0, 1.0); len])
    }

    pub fn ones(len: usize) -> Self {
        Self(vec![1.0; len])
    }

    /// Builds from values already known to lie in `[0, 1]`.
    pub(crate) fn from_unit(values: Vec<f64>) -> Self {
        debug_assert!(values.iter().all(|v| (0.0..=1.0).contains(v)));
        Self(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn mean(&self) -> f64 {
        if self.0.is_empty() {
            return 0.0;
        }
        self.0.iter().sum::<f64>() / self.0.len() as f64
    }

    pub(crate) fn check_same_len(&self, other: &GainVector) -> Result<()> {
        check_len("gain vector length", self.len(), other.len())
    }
}

impl Index<usize> for GainVector {
    type Output = f64;

    fn index(&self, k: usize) -> &f64 {
        &self.0[k]
    }
}

impl AsRef<[f64]> for GainVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}
