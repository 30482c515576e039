//! Two-microphone complex coherence and the coherence suppression filters.
//!
//! Auto and cross spectral densities are smoothed recursively per bin and
//! normalized into the complex coherence `Γ = Φ12 / sqrt(Φ11·Φ22)`. Two
//! filters act on it: `G1 = 1 − |Re Γ|^P(ω)` and the imaginary-part gate
//! `G2`, combined as `G_coh = G1·G2`.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::gain::GainVector;
use crate::stft::FrameSpectrum;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoherenceParams {
    /// Exponent of `G1` in the low band.
    pub alpha_low: f64,
    /// Exponent of `G1` in the high band.
    pub alpha_high: f64,
    /// Threshold on `Im Γ` for `G2` in the low band.
    pub beta_low: f64,
    /// Threshold on `Im Γ` for `G2` in the high band.
    pub beta_high: f64,
    /// Gain applied by `G2` when the threshold is crossed.
    pub g2_floor: f64,
    /// Band split as normalized angular frequency; bins at or below are low band.
    pub band_split: f64,
    /// Recursive smoothing constant of the spectral densities.
    pub lambda_s: f64,
    /// Lower bound on the auto-PSDs.
    pub psd_floor: f64,
}

impl Default for CoherenceParams {
    fn default() -> Self {
        Self {
            alpha_low: 16.0,
            alpha_high: 2.0,
            beta_low: -0.1,
            beta_high: -0.3,
            g2_floor: 0.1,
            band_split: PI / 8.0,
            lambda_s: 0.8,
            psd_floor: 1e-10,
        }
    }
}

impl CoherenceParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_low > self.alpha_high && self.alpha_high > 1.0) || !self.alpha_low.is_finite()
        {
            return Err(Error::Parameter(format!(
                "need alpha_low > alpha_high > 1, got {} and {}",
                self.alpha_low, self.alpha_high
            )));
        }
        if !(0.0 > self.beta_low && self.beta_low > self.beta_high && self.beta_high > -1.0) {
            return Err(Error::Parameter(format!(
                "need 0 > beta_low > beta_high > -1, got {} and {}",
                self.beta_low, self.beta_high
            )));
        }
        if !(self.g2_floor > 0.0 && self.g2_floor <= 1.0) {
            return Err(Error::Parameter(format!(
                "g2_floor must be in (0,1], got {}",
                self.g2_floor
            )));
        }
        if !(self.band_split > 0.0 && self.band_split <= PI) {
            return Err(Error::Parameter("band_split must be in (0, pi]".into()));
        }
        if !(self.lambda_s > 0.0 && self.lambda_s < 1.0) {
            return Err(Error::Parameter(format!(
                "lambda_s must be in (0,1), got {}",
                self.lambda_s
            )));
        }
        if !(self.psd_floor > 0.0 && self.psd_floor.is_finite()) {
            return Err(Error::Parameter("psd_floor must be positive".into()));
        }
        Ok(())
    }
}

/// Low-band membership of every bin for a given FFT length.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMap {
    low: Vec<bool>,
}

impl BandMap {
    /// Bin `k` sits at `ω = 2πk/fft_len` and is low band when `|ω| ≤ split`.
    pub fn new(fft_len: usize, split: f64) -> Self {
        let bins = fft_len / 2 + 1;
        // Compare in bin units so the boundary bin lands exactly.
        let edge = split * fft_len as f64 / (2.0 * PI);
        let low = (0..bins)
            .map(|k| k as f64 <= edge + 1e-9)
            .collect();
        Self { low }
    }

    pub fn len(&self) -> usize {
        self.low.len()
    }

    pub fn is_empty(&self) -> bool {
        self.low.is_empty()
    }

    pub fn is_low(&self, k: usize) -> bool {
        self.low[k]
    }
}

/// Smoothed auto/cross spectral densities of the microphone pair.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceState {
    phi_11: Vec<f64>,
    phi_22: Vec<f64>,
    phi_12: Vec<Complex64>,
    lambda_s: f64,
    psd_floor: f64,
}

impl CoherenceState {
    pub fn new(num_bins: usize, p: &CoherenceParams) -> Self {
        Self {
            phi_11: vec![p.psd_floor; num_bins],
            phi_22: vec![p.psd_floor; num_bins],
            phi_12: vec![Complex64::new(0.0, 0.0); num_bins],
            lambda_s: p.lambda_s,
            psd_floor: p.psd_floor,
        }
    }

    pub fn phi_11(&self) -> &[f64] {
        &self.phi_11
    }

    pub fn phi_22(&self) -> &[f64] {
        &self.phi_22
    }

    pub fn phi_12(&self) -> &[Complex64] {
        &self.phi_12
    }

    /// Folds one frame pair into the densities and returns the coherence.
    pub fn update(&mut self, f1: &FrameSpectrum, f2: &FrameSpectrum) -> Result<Vec<Complex64>> {
        check_len("coherence bins (mic 1)", self.phi_11.len(), f1.len())?;
        check_len("coherence bins (mic 2)", self.phi_11.len(), f2.len())?;
        let l = self.lambda_s;
        let floor = self.psd_floor;
        let mut gamma = Vec::with_capacity(f1.len());
        for k in 0..f1.len() {
            let (y1, y2) = (f1.bins[k], f2.bins[k]);
            self.phi_11[k] = (l * self.phi_11[k] + (1.0 - l) * y1.norm_sqr()).max(floor);
            self.phi_22[k] = (l * self.phi_22[k] + (1.0 - l) * y2.norm_sqr()).max(floor);
            self.phi_12[k] = self.phi_12[k] * l + y1 * y2.conj() * (1.0 - l);
            gamma.push(self.phi_12[k] / (self.phi_11[k] * self.phi_22[k]).sqrt());
        }
        Ok(gamma)
    }
}

/// Closed-form coherence of a speech source at 0° and a noise source at
/// `theta_deg` with inter-microphone delay `tau` samples:
/// `e^{jωτ}·S/(1+S) + e^{jωτ·cosθ}/(1+S)`.
pub fn model_coherence(omega: f64, snr: f64, theta_deg: f64, tau: f64) -> Complex64 {
    let speech = Complex64::from_polar(1.0, omega * tau);
    let noise = Complex64::from_polar(1.0, omega * tau * theta_deg.to_radians().cos());
    if snr.is_infinite() {
        return speech;
    }
    let w = snr / (1.0 + snr);
    speech * w + noise * (1.0 / (1.0 + snr))
}

/// `G1 = 1 − |Re Γ|^P` with the band-dependent exponent.
pub fn g1_filter(coherence: &[Complex64], bands: &BandMap, p: &CoherenceParams) -> Result<GainVector> {
    check_len("coherence bins", bands.len(), coherence.len())?;
    Ok(GainVector::from_unit(
        coherence
            .iter()
            .enumerate()
            .map(|(k, g)| {
                let exp = if bands.is_low(k) { p.alpha_low } else { p.alpha_high };
                let re = g.re.clamp(-1.0, 1.0).abs();
                (1.0 - re.powf(exp)).clamp(0.0, 1.0)
            })
            .collect(),
    ))
}

/// `G2 = g2_floor` where `Im Γ` falls below the band threshold, else 1.
pub fn g2_filter(coherence: &[Complex64], bands: &BandMap, p: &CoherenceParams) -> Result<GainVector> {
    check_len("coherence bins", bands.len(), coherence.len())?;
    Ok(GainVector::from_unit(
        coherence
            .iter()
            .enumerate()
            .map(|(k, g)| {
                let q = if bands.is_low(k) { p.beta_low } else { p.beta_high };
                if g.im < q {
                    p.g2_floor
                } else {
                    1.0
                }
            })
            .collect(),
    ))
}

pub fn coherence_gain(g1: &GainVector, g2: &GainVector) -> Result<GainVector> {
    g1.check_same_len(g2)?;
    Ok(GainVector::from_unit(
        g1.iter().zip(g2.iter()).map(|(a, b)| a * b).collect(),
    ))
}
