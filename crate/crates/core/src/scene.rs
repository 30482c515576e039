//! Two-microphone mixtures with a speech source at 0° and a noise source at
//! azimuth `θ`.
//!
//! Microphone 1 is the zero-delay reference. Speech reaches microphone 2
//! after `τ = fs·d/c` samples and noise after `τ·cos θ`, so the coherence of
//! the mixture follows the closed-form model in
//! [`model_coherence`](crate::coherence::model_coherence).

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shortest speech input accepted, one 20 ms frame at 16 kHz.
pub const MIN_SCENE_SAMPLES: usize = 320;

/// Scene geometry and mixing level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneConfig {
    /// Noise azimuth in degrees, `[0, 360)`.
    pub theta: f64,
    /// Microphone spacing in meters.
    pub d: f64,
    /// Speed of sound in m/s.
    pub c: f64,
    /// Target microphone-1 SNR in dB; `+inf` mixes no noise.
    pub snr_db: f64,
    pub fs: u32,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            theta: 90.0,
            d: 0.13,
            c: 343.0,
            snr_db: 0.0,
            fs: 16_000,
        }
    }
}

impl SceneConfig {
    /// Inter-microphone delay of the 0° source, in samples.
    pub fn tau(&self) -> f64 {
        self.fs as f64 * self.d / self.c
    }

    /// Inter-microphone delay of the noise source, in samples.
    pub fn noise_delay(&self) -> f64 {
        self.tau() * self.theta.to_radians().cos()
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..360.0).contains(&self.theta) {
            return Err(Error::Parameter(format!(
                "theta must be in [0, 360), got {}",
                self.theta
            )));
        }
        if !(self.d > 0.0 && self.c > 0.0 && self.fs > 0) {
            return Err(Error::Parameter(
                "spacing, speed of sound and sample rate must be positive".into(),
            ));
        }
        if self.snr_db.is_nan() || self.snr_db == f64::NEG_INFINITY {
            return Err(Error::Parameter("snr_db must be a number or +inf".into()));
        }
        Ok(())
    }
}

/// Mixtures at both microphones plus the components that formed them.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub ch1: Vec<f64>,
    pub ch2: Vec<f64>,
    /// Speech as received at microphone 1.
    pub clean_ref: Vec<f64>,
    /// Scaled noise as received at microphone 1.
    pub noise_ref: Vec<f64>,
    pub clean_ref2: Vec<f64>,
    pub noise_ref2: Vec<f64>,
    /// Linear gain applied to the raw noise input.
    pub noise_gain: f64,
}

/// Side information written next to a simulated scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSidecar {
    pub scene: SceneConfig,
    pub tau: f64,
    pub speech_delay: f64,
    pub noise_delay: f64,
    pub noise_gain: f64,
    pub measured_snr1_db: f64,
    pub measured_snr2_db: f64,
}

impl Scene {
    pub fn sidecar(&self, cfg: &SceneConfig) -> SceneSidecar {
        SceneSidecar {
            scene: cfg.clone(),
            tau: cfg.tau(),
            speech_delay: cfg.tau(),
            noise_delay: cfg.noise_delay(),
            noise_gain: self.noise_gain,
            measured_snr1_db: measured_snr(&self.clean_ref, &self.noise_ref).unwrap_or(f64::NAN),
            measured_snr2_db: measured_snr(&self.clean_ref2, &self.noise_ref2).unwrap_or(f64::NAN),
        }
    }
}

/// Builds the two-microphone mixture. `noise` must be at least as long as
/// `speech`; only its first `speech.len()` samples are used.
pub fn make_scene(speech: &[f64], noise: &[f64], cfg: &SceneConfig) -> Result<Scene> {
    cfg.validate()?;
    if speech.len() < MIN_SCENE_SAMPLES {
        return Err(Error::Input(format!(
            "speech has {} samples, need at least one {MIN_SCENE_SAMPLES}-sample frame",
            speech.len()
        )));
    }
    if noise.len() < speech.len() {
        return Err(Error::Input(format!(
            "noise has {} samples, shorter than speech ({})",
            noise.len(),
            speech.len()
        )));
    }
    let noise = &noise[..speech.len()];
    let p_speech = power(speech);
    let p_noise = power(noise);
    let noise_gain = if cfg.snr_db == f64::INFINITY || p_noise == 0.0 {
        0.0
    } else {
        (p_speech / (p_noise * 10f64.powf(cfg.snr_db / 10.0))).sqrt()
    };
    let clean_ref = speech.to_vec();
    let noise_ref: Vec<f64> = noise.iter().map(|n| n * noise_gain).collect();
    let clean_ref2 = fractional_delay(&clean_ref, cfg.tau());
    let noise_ref2 = fractional_delay(&noise_ref, cfg.noise_delay());
    let add = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x + y).collect::<Vec<_>>();
    Ok(Scene {
        ch1: add(&clean_ref, &noise_ref),
        ch2: add(&clean_ref2, &noise_ref2),
        clean_ref,
        noise_ref,
        clean_ref2,
        noise_ref2,
        noise_gain,
    })
}

/// Builds a scene whose microphone-1 segmental SNR is `target_db` (within
/// `0.01` dB) by bisecting on `snr_db`. Returns the scene and the mixing SNR found.
pub fn make_scene_at_seg_snr(
    speech: &[f64],
    noise: &[f64],
    cfg: &SceneConfig,
    target_db: f64,
    frame_len: usize,
) -> Result<(Scene, f64)> {
    if !target_db.is_finite() {
        return Err(Error::Parameter("target segmental SNR must be finite".into()));
    }
    let (mut lo, mut hi) = (target_db - 30.0, target_db + 30.0);
    let mut best = None;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let scene = make_scene(speech, noise, &SceneConfig { snr_db: mid, ..cfg.clone() })?;
        let seg = crate::metrics::segmental_snr(&scene.clean_ref, &scene.ch1, frame_len)?.mean_db;
        if (seg - target_db).abs() < 0.01 {
            return Ok((scene, mid));
        }
        if seg < target_db {
            lo = mid;
        } else {
            hi = mid;
        }
        best = Some(seg);
    }
    Err(Error::Input(format!(
        "segmental SNR {target_db} dB not reachable, closest {:.3} dB",
        best.unwrap_or(f64::NAN)
    )))
}

/// Circular delay by `tau` samples (fractional allowed) through a linear
/// phase ramp `e^{−jωτ}` over the whole-signal DFT.
///
/// The Nyquist bin of an even-length signal must stay real; it is multiplied
/// by the sign of `cos(πτ)`, which keeps energy unchanged and is exact for
/// integer delays.
pub fn fractional_delay(x: &[f64], tau: f64) -> Vec<f64> {
    let n = x.len();
    if n == 0 || tau == 0.0 {
        return x.to_vec();
    }
    let mut planner = FftPlanner::new();
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    for (k, b) in buf.iter_mut().enumerate() {
        if n.is_multiple_of(2) && k == n / 2 {
            if (PI * tau).cos() < 0.0 {
                *b = -*b;
            }
            continue;
        }
        let signed_k = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
        let omega = 2.0 * PI * signed_k / n as f64;
        *b *= Complex64::from_polar(1.0, -omega * tau);
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter().map(|c| c.re * scale).collect()
}

/// `10·log10(Σclean² / Σnoise²)`; `+inf` when the noise is silent.
pub fn measured_snr(clean: &[f64], noise: &[f64]) -> Result<f64> {
    if clean.len() != noise.len() {
        return Err(Error::Input(format!(
            "clean ({}) and noise ({}) lengths differ",
            clean.len(),
            noise.len()
        )));
    }
    let pn: f64 = noise.iter().map(|v| v * v).sum();
    if pn == 0.0 {
        return Ok(f64::INFINITY);
    }
    let pc: f64 = clean.iter().map(|v| v * v).sum();
    Ok(10.0 * (pc / pn).log10())
}

fn power(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>() / x.len().max(1) as f64
}
