//! Framing, Hann windowing, one-sided DFT and weighted overlap-add synthesis.
//!
//! Frame `λ` covers samples `[λ·hop, λ·hop + frame_len)`. The same Hann window
//! is used for analysis and synthesis; the overlap-added squared window is
//! divided out, so an untouched spectrum reconstructs the input exactly away
//! from the first and last frame.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::gain::GainVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    Hann,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StftConfig {
    pub sample_rate: u32,
    pub frame_len: usize,
    pub hop: usize,
    pub fft_len: usize,
    pub window: WindowKind,
}

impl Default for StftConfig {
    fn default() -> Self {
        Self {
            sample_rate: 16_000,
            frame_len: 320,
            hop: 160,
            fft_len: 320,
            window: WindowKind::Hann,
        }
    }
}

impl StftConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sample_rate == 0 {
            return Err(Error::Parameter("sample_rate must be positive".into()));
        }
        if self.frame_len < 2 || !self.frame_len.is_multiple_of(2) {
            return Err(Error::Parameter(format!(
                "frame_len must be even and at least 2, got {}",
                self.frame_len
            )));
        }
        if self.hop * 2 != self.frame_len {
            return Err(Error::Parameter(format!(
                "hop must be frame_len/2 ({}), got {}",
                self.frame_len / 2,
                self.hop
            )));
        }
        if self.fft_len < self.frame_len {
            return Err(Error::Parameter(format!(
                "fft_len ({}) must be at least frame_len ({})",
                self.fft_len, self.frame_len
            )));
        }
        Ok(())
    }

    /// One-sided bin count, `fft_len/2 + 1`.
    pub fn num_bins(&self) -> usize {
        self.fft_len / 2 + 1
    }

    /// Normalized angular frequency of bin `k`, `2πk/fft_len`.
    pub fn bin_omega(&self, k: usize) -> f64 {
        2.0 * PI * k as f64 / self.fft_len as f64
    }

    /// Number of whole frames that fit in `len` samples.
    pub fn frame_count(&self, len: usize) -> usize {
        if len < self.frame_len {
            0
        } else {
            (len - self.frame_len) / self.hop + 1
        }
    }
}

/// One-sided spectrum of one analysis frame of one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSpectrum {
    pub bins: Vec<Complex64>,
    pub frame_index: u64,
}

impl FrameSpectrum {
    pub fn zeros(num_bins: usize, frame_index: u64) -> Self {
        Self {
            bins: vec![Complex64::new(0.0, 0.0); num_bins],
            frame_index,
        }
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    /// `|Y_k|²` per bin.
    pub fn power(&self) -> Vec<f64> {
        self.bins.iter().map(|b| b.norm_sqr()).collect()
    }
}

/// Periodic Hann window, `0.5 − 0.5·cos(2πn/N)`.
pub fn hann(len: usize) -> Vec<f64> {
    (0..len)
        .map(|n| 0.5 - 0.5 * (2.0 * PI * n as f64 / len as f64).cos())
        .collect()
}

/// Multiplies each bin by its gain. The phase of every bin is kept.
pub fn apply_gain(frame: &FrameSpectrum, gain: &GainVector) -> Result<FrameSpectrum> {
    check_len("gain bins", frame.len(), gain.len())?;
    Ok(FrameSpectrum {
        bins: frame
            .bins
            .iter()
            .zip(gain.iter())
            .map(|(b, g)| b * *g)
            .collect(),
        frame_index: frame.frame_index,
    })
}

/// Analysis/synthesis transform for one [`StftConfig`].
#[derive(Clone)]
pub struct Stft {
    cfg: StftConfig,
    window: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    ola_norm: Vec<f64>,
}

impl std::fmt::Debug for Stft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Stft").field("cfg", &self.cfg).finish()
    }
}

impl Stft {
    pub fn new(cfg: StftConfig) -> Result<Self> {
        cfg.validate()?;
        let window = match cfg.window {
            WindowKind::Hann => hann(cfg.frame_len),
        };
        // Steady-state sum of squared windows, periodic with the hop.
        let ola_norm: Vec<f64> = (0..cfg.hop)
            .map(|i| {
                (0..cfg.frame_len / cfg.hop)
                    .map(|m| window[i + m * cfg.hop].powi(2))
                    .sum()
            })
            .collect();
        if let Some(min) = ola_norm.iter().copied().reduce(f64::min) {
            if min <= 1e-12 {
                return Err(Error::Parameter(
                    "window does not overlap-add at the configured hop".into(),
                ));
            }
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            forward: planner.plan_fft_forward(cfg.fft_len),
            inverse: planner.plan_fft_inverse(cfg.fft_len),
            cfg,
            window,
            ola_norm,
        })
    }

    pub fn config(&self) -> &StftConfig {
        &self.cfg
    }

    pub fn window(&self) -> &[f64] {
        &self.window
    }

    /// Windows and transforms exactly one frame of `frame_len` samples.
    pub fn analyze_frame(&self, samples: &[f64], frame_index: u64) -> Result<FrameSpectrum> {
        check_len("frame samples", self.cfg.frame_len, samples.len())?;
        if let Some(n) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::Input(format!("non-finite sample at offset {n}")));
        }
        let mut buf = vec![Complex64::new(0.0, 0.0); self.cfg.fft_len];
        for ((b, &x), &w) in buf.iter_mut().zip(samples).zip(&self.window) {
            b.re = x * w;
        }
        self.forward.process(&mut buf);
        buf.truncate(self.cfg.num_bins());
        Ok(FrameSpectrum {
            bins: buf,
            frame_index,
        })
    }

    /// Splits `signal` into overlapping frames and transforms each one.
    /// A signal shorter than one frame yields no frames.
    pub fn analyze(&self, signal: &[f64]) -> Result<Vec<FrameSpectrum>> {
        if let Some(n) = signal.iter().position(|s| !s.is_finite()) {
            return Err(Error::Input(format!("non-finite sample at index {n}")));
        }
        (0..self.cfg.frame_count(signal.len()))
            .map(|l| {
                let start = l * self.cfg.hop;
                self.analyze_frame(&signal[start..start + self.cfg.frame_len], l as u64)
            })
            .collect()
    }

    /// Inverse transform of one frame with the synthesis window applied,
    /// `frame_len` samples, not yet normalized.
    pub fn synthesis_frame(&self, frame: &FrameSpectrum) -> Result<Vec<f64>> {
        let n = self.cfg.fft_len;
        check_len("spectrum bins", self.cfg.num_bins(), frame.len())?;
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        buf[..frame.len()].copy_from_slice(&frame.bins);
        for k in 1..frame.len() {
            if n - k >= frame.len() {
                buf[n - k] = frame.bins[k].conj();
            }
        }
        self.inverse.process(&mut buf);
        let scale = 1.0 / n as f64;
        Ok(buf[..self.cfg.frame_len]
            .iter()
            .zip(&self.window)
            .map(|(c, w)| c.re * scale * w)
            .collect())
    }

    /// Overlap-adds contiguous frames back to a signal of
    /// `(frames − 1)·hop + frame_len` samples.
    pub fn synthesize(&self, frames: &[FrameSpectrum]) -> Result<Vec<f64>> {
        if frames.is_empty() {
            return Ok(Vec::new());
        }
        for pair in frames.windows(2) {
            if pair[1].frame_index != pair[0].frame_index + 1 {
                return Err(Error::Input(format!(
                    "frame indices not contiguous: {} then {}",
                    pair[0].frame_index, pair[1].frame_index
                )));
            }
        }
        let hop = self.cfg.hop;
        let mut out = vec![0.0; (frames.len() - 1) * hop + self.cfg.frame_len];
        for (l, frame) in frames.iter().enumerate() {
            let part = self.synthesis_frame(frame)?;
            for (o, p) in out[l * hop..].iter_mut().zip(&part) {
                *o += p;
            }
        }
        for (n, o) in out.iter_mut().enumerate() {
            *o /= self.ola_norm[n % hop];
        }
        Ok(out)
    }

    /// Streaming overlap-add accumulator matching this transform.
    pub fn overlap_add(&self) -> OverlapAdd {
        OverlapAdd {
            accum: vec![0.0; self.cfg.frame_len],
            norm: self.ola_norm.clone(),
        }
    }

    /// Energy of the windowed frame recovered from its one-sided spectrum.
    pub fn spectral_energy(&self, frame: &FrameSpectrum) -> f64 {
        let n = self.cfg.fft_len;
        let k_max = frame.len() - 1;
        let total: f64 = frame
            .bins
            .iter()
            .enumerate()
            .map(|(k, b)| {
                let edge = k == 0 || (k == k_max && n.is_multiple_of(2));
                if edge {
                    b.norm_sqr()
                } else {
                    2.0 * b.norm_sqr()
                }
            })
            .sum();
        total / n as f64
    }
}

/// Overlap-add state for one output stream.
#[derive(Debug, Clone)]
pub struct OverlapAdd {
    accum: Vec<f64>,
    norm: Vec<f64>,
}

impl OverlapAdd {
    /// Adds one synthesis-windowed frame and returns the `hop` samples that
    /// no later frame will touch.
    pub fn push(&mut self, windowed: &[f64]) -> Result<Vec<f64>> {
        check_len("synthesis frame", self.accum.len(), windowed.len())?;
        let hop = self.norm.len();
        for (a, w) in self.accum.iter_mut().zip(windowed) {
            *a += w;
        }
        let out = self.accum[..hop]
            .iter()
            .zip(&self.norm)
            .map(|(a, n)| a / n)
            .collect();
        self.accum.copy_within(hop.., 0);
        let len = self.accum.len();
        self.accum[len - hop..].fill(0.0);
        Ok(out)
    }
}
