//! Segmental SNR and improvement scores.

use std::fmt::Write as _;

use std::ops::Range;

use rustfft::num_complex::Complex64;
use serde::Serialize;

use crate::coherence::{model_coherence, CoherenceParams, CoherenceState};
use crate::error::{Error, Result};
use crate::stft::{Stft, StftConfig};

pub const SEG_SNR_MIN_DB: f64 = -10.0;
pub const SEG_SNR_MAX_DB: f64 = 35.0;
/// Frames whose clean mean-square energy is below this level (dBFS) are skipped.
pub const SILENCE_DBFS: f64 = -60.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegSnrReport {
    /// `(frame index, clamped SNR dB)` for every scored frame.
    pub per_frame_db: Vec<(usize, f64)>,
    pub mean_db: f64,
    pub clamp: (f64, f64),
}

impl SegSnrReport {
    /// Header row, one row per scored frame, then a `mean` summary row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("frame,seg_snr_db\n");
        for (idx, db) in &self.per_frame_db {
            let _ = writeln!(out, "{idx},{db:.6}");
        }
        let _ = writeln!(out, "mean,{:.6}", self.mean_db);
        out
    }
}

/// Mean of per-frame SNRs over non-overlapping `frame_len` frames, each
/// clamped to `[-10, 35]` dB. Frames of near-silent clean signal are not scored.
pub fn segmental_snr(clean: &[f64], test: &[f64], frame_len: usize) -> Result<SegSnrReport> {
    if clean.len() != test.len() {
        return Err(Error::Input(format!(
            "clean ({}) and test ({}) lengths differ",
            clean.len(),
            test.len()
        )));
    }
    if frame_len == 0 {
        return Err(Error::Parameter("frame_len must be positive".into()));
    }
    let silence = 10f64.powf(SILENCE_DBFS / 10.0);
    let per_frame_db: Vec<(usize, f64)> = clean
        .chunks_exact(frame_len)
        .zip(test.chunks_exact(frame_len))
        .enumerate()
        .filter_map(|(i, (c, t))| {
            let sig: f64 = c.iter().map(|v| v * v).sum();
            if sig / (frame_len as f64) < silence {
                return None;
            }
            let err: f64 = c.iter().zip(t).map(|(a, b)| (a - b).powi(2)).sum();
            let db = if err == 0.0 {
                SEG_SNR_MAX_DB
            } else {
                10.0 * (sig / err).log10()
            };
            Some((i, db.clamp(SEG_SNR_MIN_DB, SEG_SNR_MAX_DB)))
        })
        .collect();
    if per_frame_db.is_empty() {
        return Err(Error::Input("no frame of the clean signal is above the silence threshold".into()));
    }
    let mean_db = per_frame_db.iter().map(|(_, d)| d).sum::<f64>() / per_frame_db.len() as f64;
    Ok(SegSnrReport {
        per_frame_db,
        mean_db,
        clamp: (SEG_SNR_MIN_DB, SEG_SNR_MAX_DB),
    })
}

/// `segSNR(enhanced) − segSNR(noisy)` in dB.
pub fn improvement(clean: &[f64], noisy: &[f64], enhanced: &[f64], frame_len: usize) -> Result<f64> {
    let before = segmental_snr(clean, noisy, frame_len)?;
    let after = segmental_snr(clean, enhanced, frame_len)?;
    Ok(after.mean_db - before.mean_db)
}

/// Frame average of the recursively estimated coherence `Γ_k` of a
/// two-channel signal, skipping the first `skip_frames` frames.
pub fn average_coherence(
    ch1: &[f64],
    ch2: &[f64],
    stft_cfg: &StftConfig,
    p: &CoherenceParams,
    skip_frames: usize,
) -> Result<Vec<Complex64>> {
    if ch1.len() != ch2.len() {
        return Err(Error::Input(format!(
            "channel lengths differ: {} vs {}",
            ch1.len(),
            ch2.len()
        )));
    }
    let stft = Stft::new(stft_cfg.clone())?;
    let f1 = stft.analyze(ch1)?;
    let f2 = stft.analyze(ch2)?;
    if f1.len() <= skip_frames {
        return Err(Error::Input(format!(
            "{} frames available, {skip_frames} skipped",
            f1.len()
        )));
    }
    let mut state = CoherenceState::new(stft_cfg.num_bins(), p);
    let mut sum = vec![Complex64::new(0.0, 0.0); stft_cfg.num_bins()];
    for (i, (a, b)) in f1.iter().zip(&f2).enumerate() {
        let gamma = state.update(a, b)?;
        if i >= skip_frames {
            sum.iter_mut().zip(&gamma).for_each(|(s, g)| *s += g);
        }
    }
    let n = (f1.len() - skip_frames) as f64;
    Ok(sum.into_iter().map(|s| s / n).collect())
}

/// Largest `|Γ_k − model_k|` over `bins`, with the model evaluated at the
/// bin frequencies for a broadband SNR of `snr_db`.
pub fn coherence_model_deviation(
    measured: &[Complex64],
    stft_cfg: &StftConfig,
    snr_db: f64,
    theta_deg: f64,
    tau: f64,
    bins: Range<usize>,
) -> f64 {
    let snr = 10f64.powf(snr_db / 10.0);
    bins.map(|k| (measured[k] - model_coherence(stft_cfg.bin_omega(k), snr, theta_deg, tau)).norm())
        .fold(0.0, f64::max)
}
