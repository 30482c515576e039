//! Weighted union of the super-Gaussian and coherence gains, and the
//! musical-noise post filter.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gain::GainVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CombinerParams {
    /// Weighting factor ϖ given to the super-Gaussian gain.
    pub weight: f64,
    /// Spectral gain floor.
    pub g_min: f64,
    /// Temporal smoothing constant of the post filter.
    pub smooth_t: f64,
}

impl Default for CombinerParams {
    fn default() -> Self {
        Self {
            weight: 0.7,
            g_min: 0.1,
            smooth_t: 0.6,
        }
    }
}

impl CombinerParams {
    pub fn validate(&self) -> Result<()> {
        check_weight(self.weight)?;
        if !(0.0..1.0).contains(&self.g_min) {
            return Err(Error::Parameter(format!(
                "g_min must be in [0,1), got {}",
                self.g_min
            )));
        }
        if !(0.0..1.0).contains(&self.smooth_t) {
            return Err(Error::Parameter(format!(
                "smooth_t must be in [0,1), got {}",
                self.smooth_t
            )));
        }
        Ok(())
    }
}

pub fn check_weight(weight: f64) -> Result<()> {
    if (0.0..=1.0).contains(&weight) {
        Ok(())
    } else {
        Err(Error::Parameter("weight must be in [0,1]".into()))
    }
}

/// `ϖ·G_k + (1 − ϖ)·G_coh` per bin.
pub fn combine(gk: &GainVector, gcoh: &GainVector, weight: f64) -> Result<GainVector> {
    check_weight(weight)?;
    gk.check_same_len(gcoh)?;
    let rest = 1.0 - weight;
    Ok(GainVector::from_unit(
        gk.iter()
            .zip(gcoh.iter())
            .map(|(a, b)| (weight * a + rest * b).clamp(0.0, 1.0))
            .collect(),
    ))
}

/// First-order temporal smoothing of the gains followed by the gain floor.
pub fn post_filter(g: &GainVector, prev_g: &GainVector, p: &CombinerParams) -> Result<GainVector> {
    g.check_same_len(prev_g)?;
    let s = p.smooth_t;
    Ok(GainVector::from_unit(
        g.iter()
            .zip(prev_g.iter())
            .map(|(cur, prev)| (s * prev + (1.0 - s) * cur).clamp(p.g_min, 1.0))
            .collect(),
    ))
}

/// Shared, live-adjustable weighting factor.
///
/// Writers replace the value atomically; the engine reads it once at each
/// frame boundary, so the last write before a boundary wins.
#[derive(Debug, Clone)]
pub struct WeightHandle(Arc<AtomicU64>);

impl WeightHandle {
    pub fn new(weight: f64) -> Result<Self> {
        check_weight(weight)?;
        Ok(Self(Arc::new(AtomicU64::new(weight.to_bits()))))
    }

    /// Stores a new weight; out-of-range values are rejected and the
    /// previous value stays in force.
    pub fn set(&self, weight: f64) -> Result<()> {
        check_weight(weight)?;
        self.0.store(weight.to_bits(), Ordering::Release);
        Ok(())
    }

    pub fn get(&self) -> f64 {
        f64::from_bits(self.0.load(Ordering::Acquire))
    }
}
