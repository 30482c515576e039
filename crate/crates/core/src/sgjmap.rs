//! Super-Gaussian joint MAP spectral amplitude gain.
//!
//! With a priori SNR `ξ` and a posteriori SNR `γ` the amplitude estimate is
//! `Â = G·R` where
//!
//! ```text
//! u = 1/2 − μ / (4·sqrt(γ·ξ))
//! G = u + sqrt(u² + ν / (2γ))
//! ```
//!
//! The a priori SNR is tracked with the decision-directed rule.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::gain::GainVector;
use crate::stft::FrameSpectrum;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SgjmapParams {
    pub nu: f64,
    pub mu: f64,
    /// Decision-directed smoothing constant.
    pub alpha_dd: f64,
    /// Floor on the a priori SNR (linear).
    pub xi_min: f64,
}

impl Default for SgjmapParams {
    fn default() -> Self {
        Self {
            nu: 0.1,
            mu: 1.5,
            alpha_dd: 0.98,
            xi_min: 10f64.powf(-25.0 / 10.0),
        }
    }
}

impl SgjmapParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.nu >= 0.0 && self.nu.is_finite()) {
            return Err(Error::Parameter(format!("nu must be >= 0, got {}", self.nu)));
        }
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return Err(Error::Parameter(format!("mu must be >= 0, got {}", self.mu)));
        }
        if !(self.alpha_dd > 0.0 && self.alpha_dd < 1.0) {
            return Err(Error::Parameter(format!(
                "alpha_dd must be in (0,1), got {}",
                self.alpha_dd
            )));
        }
        if !(self.xi_min > 0.0 && self.xi_min.is_finite()) {
            return Err(Error::Parameter(format!(
                "xi_min must be positive, got {}",
                self.xi_min
            )));
        }
        Ok(())
    }
}

/// Per-bin SNR estimates carried from frame to frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SnrEstimates {
    pub xi: Vec<f64>,
    pub gamma: Vec<f64>,
    /// Enhanced amplitude `Â_k` of the previous frame.
    pub prev_amp: Vec<f64>,
}

impl SnrEstimates {
    /// State before the first frame: zero previous amplitude.
    pub fn new(num_bins: usize, p: &SgjmapParams) -> Self {
        Self {
            xi: vec![p.xi_min; num_bins],
            gamma: vec![0.0; num_bins],
            prev_amp: vec![0.0; num_bins],
        }
    }

    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }

    /// Records the enhanced amplitude `gain·R` actually produced this frame.
    pub fn set_enhanced_amplitude(&mut self, frame: &FrameSpectrum, gain: &GainVector) -> Result<()> {
        check_len("enhanced amplitude bins", self.len(), frame.len())?;
        check_len("enhanced amplitude gains", self.len(), gain.len())?;
        for ((a, b), g) in self.prev_amp.iter_mut().zip(&frame.bins).zip(gain.iter()) {
            *a = g * b.norm();
        }
        Ok(())
    }
}

/// A posteriori SNR `R²/σ²_W` and decision-directed a priori SNR.
pub fn estimate_snr(
    frame: &FrameSpectrum,
    noise_psd: &[f64],
    prev: &SnrEstimates,
    p: &SgjmapParams,
) -> Result<SnrEstimates> {
    check_len("noise PSD bins", frame.len(), noise_psd.len())?;
    check_len("previous SNR bins", frame.len(), prev.len())?;
    let mut xi = Vec::with_capacity(frame.len());
    let mut gamma = Vec::with_capacity(frame.len());
    for ((b, &noise), &amp) in frame.bins.iter().zip(noise_psd).zip(&prev.prev_amp) {
        let g = b.norm_sqr() / noise;
        let dd = p.alpha_dd * amp * amp / noise + (1.0 - p.alpha_dd) * (g - 1.0).max(0.0);
        gamma.push(g);
        xi.push(dd.max(p.xi_min));
    }
    Ok(SnrEstimates {
        xi,
        gamma,
        prev_amp: prev.prev_amp.clone(),
    })
}

/// Gain of one bin, clamped to `[0, 1]`; `floor` where `γ·ξ = 0`.
pub fn bin_gain(xi: f64, gamma: f64, nu: f64, mu: f64, floor: f64) -> f64 {
    let prod = gamma * xi;
    if !(gamma > 0.0 && prod > 0.0) || !prod.is_finite() {
        return if prod.is_infinite() { 1.0 } else { floor };
    }
    let u = 0.5 - mu / (4.0 * prod.sqrt());
    let c = nu / (2.0 * gamma);
    let root = (u * u + c).sqrt();
    // u + root cancels badly for large negative u; use c/(root − u) there.
    let g = if u >= 0.0 { u + root } else { c / (root - u) };
    if g.is_nan() {
        floor
    } else {
        g.clamp(0.0, 1.0)
    }
}

pub fn sgjmap_gain(snr: &SnrEstimates, p: &SgjmapParams, floor: f64) -> GainVector {
    GainVector::from_unit(
        snr.xi
            .iter()
            .zip(&snr.gamma)
            .map(|(&xi, &gamma)| bin_gain(xi, gamma, p.nu, p.mu, floor))
            .collect(),
    )
}
