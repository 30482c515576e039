//! Voice activity detection and per-bin noise PSD tracking.
//!
//! The noise PSD is bootstrapped from the first frames of a stream (assumed to
//! be noise only) and afterwards follows a first-order recursion that is
//! frozen while the detector reports speech.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::stft::FrameSpectrum;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseParams {
    /// Recursive smoothing constant of the noise PSD.
    pub alpha_n: f64,
    /// Lower bound on every noise PSD bin.
    pub psd_floor: f64,
    /// Frames averaged to bootstrap the noise PSD.
    pub init_frames: usize,
    /// Decision threshold on the mean log-likelihood ratio.
    pub vad_threshold: f64,
    /// Fixed per-bin a priori SNR assumed by the detector, in dB.
    pub vad_xi_db: f64,
    /// Frames a speech decision is held after the ratio drops.
    pub hangover: u32,
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self {
            alpha_n: 0.95,
            psd_floor: 1e-10,
            init_frames: 10,
            vad_threshold: 0.15,
            vad_xi_db: 10.0,
            hangover: 8,
        }
    }
}

impl NoiseParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_n > 0.0 && self.alpha_n < 1.0) {
            return Err(Error::Parameter(format!(
                "alpha_n must be in (0,1), got {}",
                self.alpha_n
            )));
        }
        if !(self.psd_floor > 0.0 && self.psd_floor.is_finite()) {
            return Err(Error::Parameter("psd_floor must be positive".into()));
        }
        if self.init_frames == 0 {
            return Err(Error::Parameter("init_frames must be at least 1".into()));
        }
        if !self.vad_threshold.is_finite() || !self.vad_xi_db.is_finite() {
            return Err(Error::Parameter("VAD constants must be finite".into()));
        }
        Ok(())
    }

    fn xi_fixed(&self) -> f64 {
        10f64.powf(self.vad_xi_db / 10.0)
    }
}

/// Running mean of `|Y_k|²` over the bootstrap frames.
#[derive(Debug, Clone)]
pub struct NoiseBootstrap {
    sum: Vec<f64>,
    count: usize,
    params: NoiseParams,
}

impl NoiseBootstrap {
    pub fn new(num_bins: usize, params: NoiseParams) -> Self {
        Self {
            sum: vec![0.0; num_bins],
            count: 0,
            params,
        }
    }

    pub fn push(&mut self, frame: &FrameSpectrum) -> Result<()> {
        check_len("noise bins", self.sum.len(), frame.len())?;
        for (s, b) in self.sum.iter_mut().zip(&frame.bins) {
            *s += b.norm_sqr();
        }
        self.count += 1;
        Ok(())
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Mean power seen so far, floored. All floor values before any push.
    pub fn current_psd(&self) -> Vec<f64> {
        let floor = self.params.psd_floor;
        if self.count == 0 {
            return vec![floor; self.sum.len()];
        }
        let n = self.count as f64;
        self.sum.iter().map(|s| (s / n).max(floor)).collect()
    }

    pub fn finish(&self) -> Result<NoiseState> {
        if self.count == 0 {
            return Err(Error::Init("noise PSD needs at least one frame".into()));
        }
        Ok(NoiseState {
            noise_psd: self.current_psd(),
            vad_speech: false,
            frames_seen: self.count as u64,
            hangover_left: 0,
            params: self.params.clone(),
        })
    }
}

/// Per-stream noise estimate and detector state.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseState {
    noise_psd: Vec<f64>,
    vad_speech: bool,
    frames_seen: u64,
    hangover_left: u32,
    params: NoiseParams,
}

impl NoiseState {
    /// Initializes from frames assumed to contain noise only.
    pub fn init(frames: &[FrameSpectrum], params: NoiseParams) -> Result<Self> {
        let first = frames
            .first()
            .ok_or_else(|| Error::Init("noise PSD needs at least one frame".into()))?;
        let mut boot = NoiseBootstrap::new(first.len(), params);
        for f in frames {
            boot.push(f)?;
        }
        boot.finish()
    }

    pub fn noise_psd(&self) -> &[f64] {
        &self.noise_psd
    }

    pub fn vad_speech(&self) -> bool {
        self.vad_speech
    }

    pub fn frames_seen(&self) -> u64 {
        self.frames_seen
    }

    pub fn params(&self) -> &NoiseParams {
        &self.params
    }

    /// Mean over bins of `γ_k ξ/(1+ξ) − ln(1+ξ)` with `ξ` fixed.
    pub fn log_likelihood_ratio(&self, frame: &FrameSpectrum) -> f64 {
        let xi = self.params.xi_fixed();
        let slope = xi / (1.0 + xi);
        let offset = xi.ln_1p();
        let total: f64 = frame
            .bins
            .iter()
            .zip(&self.noise_psd)
            .map(|(b, n)| b.norm_sqr() / n * slope - offset)
            .sum();
        total / frame.len().max(1) as f64
    }

    /// Speech/noise decision for `frame`, including hangover.
    pub fn vad_decide(&mut self, frame: &FrameSpectrum) -> bool {
        let active = self.log_likelihood_ratio(frame) > self.params.vad_threshold;
        if active {
            self.hangover_left = self.params.hangover;
            self.vad_speech = true;
        } else if self.hangover_left > 0 {
            self.hangover_left -= 1;
            self.vad_speech = true;
        } else {
            self.vad_speech = false;
        }
        self.vad_speech
    }

    /// Recursive noise update, skipped when the last decision was speech.
    pub fn update_noise(&mut self, frame: &FrameSpectrum) {
        self.frames_seen += 1;
        if self.vad_speech {
            return;
        }
        let a = self.params.alpha_n;
        let floor = self.params.psd_floor;
        for (n, b) in self.noise_psd.iter_mut().zip(&frame.bins) {
            *n = (a * *n + (1.0 - a) * b.norm_sqr()).max(floor);
        }
    }

    /// Runs the detector and then the noise update for one frame.
    pub fn observe(&mut self, frame: &FrameSpectrum) -> bool {
        let speech = self.vad_decide(frame);
        self.update_noise(frame);
        speech
    }
}
