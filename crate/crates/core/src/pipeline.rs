//! The frame loop: two-channel analysis, noise tracking, both gain paths,
//! the weighted blend, post filtering, and overlap-add synthesis of the
//! enhanced microphone-1 signal.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::coherence::{self, BandMap, CoherenceParams, CoherenceState};
use crate::combiner::{self, CombinerParams, WeightHandle};
use crate::error::{check_len, Error, Result};
use crate::gain::GainVector;
use crate::noise::{NoiseBootstrap, NoiseParams, NoiseState};
use crate::sgjmap::{self, SgjmapParams, SnrEstimates};
use crate::stft::{apply_gain, OverlapAdd, Stft, StftConfig};

/// Every tunable of the engine. Serialized as JSON with these field names;
/// unknown keys are rejected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnhanceConfig {
    pub stft: StftConfig,
    pub sgjmap: SgjmapParams,
    pub coherence: CoherenceParams,
    pub combiner: CombinerParams,
    pub noise: NoiseParams,
}

impl EnhanceConfig {
    pub fn validate(&self) -> Result<()> {
        self.stft.validate()?;
        self.sgjmap.validate()?;
        self.coherence.validate()?;
        self.combiner.validate()?;
        self.noise.validate()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

#[derive(Debug, Clone)]
enum NoisePhase {
    Bootstrap(NoiseBootstrap),
    Tracking(NoiseState),
}

/// Per-frame diagnostics of the gain stages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrameTelemetry {
    pub frame: u64,
    pub weight: f64,
    pub vad: bool,
    pub mean_gk: f64,
    pub mean_gcoh: f64,
    pub mean_gfinal: f64,
    pub mean_applied: f64,
}

/// Gain vectors of the most recent frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameGains {
    pub gk: GainVector,
    pub gcoh: GainVector,
    /// Blend before the post filter.
    pub gfinal: GainVector,
    /// Gain actually applied to the spectrum.
    pub applied: GainVector,
}

/// One enhancement engine for one stream.
#[derive(Debug, Clone)]
pub struct Enhancer {
    cfg: EnhanceConfig,
    stft: Stft,
    bands: BandMap,
    noise: NoisePhase,
    coh: CoherenceState,
    snr: SnrEstimates,
    prev_gain: GainVector,
    ola: OverlapAdd,
    frame_index: u64,
    weight: WeightHandle,
    last: Option<(FrameTelemetry, FrameGains)>,
}

impl Enhancer {
    pub fn new(cfg: EnhanceConfig) -> Result<Self> {
        cfg.validate()?;
        let stft = Stft::new(cfg.stft.clone())?;
        let bins = cfg.stft.num_bins();
        Ok(Self {
            bands: BandMap::new(cfg.stft.fft_len, cfg.coherence.band_split),
            noise: NoisePhase::Bootstrap(NoiseBootstrap::new(bins, cfg.noise.clone())),
            coh: CoherenceState::new(bins, &cfg.coherence),
            snr: SnrEstimates::new(bins, &cfg.sgjmap),
            prev_gain: GainVector::ones(bins),
            ola: stft.overlap_add(),
            frame_index: 0,
            weight: WeightHandle::new(cfg.combiner.weight)?,
            last: None,
            stft,
            cfg,
        })
    }

    pub fn config(&self) -> &EnhanceConfig {
        &self.cfg
    }

    /// Index of the next frame to be processed.
    pub fn frame_index(&self) -> u64 {
        self.frame_index
    }

    /// Handle through which the weighting factor can be changed while the
    /// engine runs. The new value applies from the next frame boundary.
    pub fn weight_handle(&self) -> WeightHandle {
        self.weight.clone()
    }

    pub fn noise_state(&self) -> Option<&NoiseState> {
        match &self.noise {
            NoisePhase::Tracking(st) => Some(st),
            NoisePhase::Bootstrap(_) => None,
        }
    }

    pub fn last_telemetry(&self) -> Option<&FrameTelemetry> {
        self.last.as_ref().map(|(t, _)| t)
    }

    pub fn last_gains(&self) -> Option<&FrameGains> {
        self.last.as_ref().map(|(_, g)| g)
    }

    /// Processes one time-aligned frame of `frame_len` samples per channel
    /// and returns the next `hop` enhanced output samples.
    pub fn process_frame(&mut self, ch1: &[f64], ch2: &[f64]) -> Result<Vec<f64>> {
        if ch1.len() != ch2.len() {
            return Err(Error::Input(format!(
                "channel lengths differ: {} vs {}",
                ch1.len(),
                ch2.len()
            )));
        }
        check_len("frame samples", self.cfg.stft.frame_len, ch1.len())?;
        let weight = self.weight.get();
        let lambda = self.frame_index;
        let y1 = self.stft.analyze_frame(ch1, lambda)?;
        let y2 = self.stft.analyze_frame(ch2, lambda)?;

        let init_frames = self.cfg.noise.init_frames;
        let mut finished = None;
        let (vad, noise_psd) = match &mut self.noise {
            NoisePhase::Bootstrap(boot) => {
                boot.push(&y1)?;
                if boot.count() >= init_frames {
                    finished = Some(boot.finish()?);
                }
                (false, boot.current_psd())
            }
            NoisePhase::Tracking(st) => {
                let vad = st.observe(&y1);
                (vad, st.noise_psd().to_vec())
            }
        };
        if let Some(st) = finished {
            self.noise = NoisePhase::Tracking(st);
        }

        let snr = sgjmap::estimate_snr(&y1, &noise_psd, &self.snr, &self.cfg.sgjmap)?;
        let gk = sgjmap::sgjmap_gain(&snr, &self.cfg.sgjmap, self.cfg.combiner.g_min);

        let gamma = self.coh.update(&y1, &y2)?;
        let g1 = coherence::g1_filter(&gamma, &self.bands, &self.cfg.coherence)?;
        let g2 = coherence::g2_filter(&gamma, &self.bands, &self.cfg.coherence)?;
        let gcoh = coherence::coherence_gain(&g1, &g2)?;

        let gfinal = combiner::combine(&gk, &gcoh, weight)?;
        let applied = combiner::post_filter(&gfinal, &self.prev_gain, &self.cfg.combiner)?;

        self.snr = snr;
        self.snr.set_enhanced_amplitude(&y1, &applied)?;

        let out_frame = apply_gain(&y1, &applied)?;
        let out = self.ola.push(&self.stft.synthesis_frame(&out_frame)?)?;

        let telemetry = FrameTelemetry {
            frame: lambda,
            weight,
            vad,
            mean_gk: gk.mean(),
            mean_gcoh: gcoh.mean(),
            mean_gfinal: gfinal.mean(),
            mean_applied: applied.mean(),
        };
        self.prev_gain = applied.clone();
        self.last = Some((
            telemetry,
            FrameGains {
                gk,
                gcoh,
                gfinal,
                applied,
            },
        ));
        self.frame_index += 1;
        Ok(out)
    }
}

/// Multi-channel audio at a known sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    pub sample_rate: u32,
    pub channels: Vec<Vec<f64>>,
}

impl AudioBuffer {
    pub fn stereo(sample_rate: u32, ch1: Vec<f64>, ch2: Vec<f64>) -> Self {
        Self {
            sample_rate,
            channels: vec![ch1, ch2],
        }
    }

    pub fn mono(sample_rate: u32, samples: Vec<f64>) -> Self {
        Self {
            sample_rate,
            channels: vec![samples],
        }
    }

    pub fn len(&self) -> usize {
        self.channels.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Checks for exactly two equal-length channels at `sample_rate`.
    pub fn check_stereo(&self, sample_rate: u32) -> Result<()> {
        if self.sample_rate != sample_rate || self.channels.len() != 2 {
            return Err(Error::Format(format!(
                "expected 2-channel {sample_rate} Hz audio, got {}-channel {} Hz",
                self.channels.len(),
                self.sample_rate
            )));
        }
        if self.channels[0].len() != self.channels[1].len() {
            return Err(Error::Input("stereo channels differ in length".into()));
        }
        Ok(())
    }
}

/// Enhances a whole stereo recording.
///
/// The input is zero-padded by one frame at the end so every sample is
/// covered, streamed through [`Enhancer::process_frame`], and the
/// concatenated output is cut back to the input length. Output sample `n`
/// is the enhanced version of input sample `n`; only the first `hop`
/// samples lack a second overlapping frame.
pub fn process_file(input: &AudioBuffer, cfg: &EnhanceConfig) -> Result<Vec<f64>> {
    let mut engine = Enhancer::new(cfg.clone())?;
    process_with(&mut engine, input, |_| {})
}

/// As [`process_file`] with an existing engine, calling `per_frame` after
/// each frame (used for per-frame timing and instrumentation).
pub fn process_with<F>(engine: &mut Enhancer, input: &AudioBuffer, mut per_frame: F) -> Result<Vec<f64>>
where
    F: FnMut(&Enhancer),
{
    let stft_cfg = engine.config().stft.clone();
    input.check_stereo(stft_cfg.sample_rate)?;
    let len = input.len();
    let (frame_len, hop) = (stft_cfg.frame_len, stft_cfg.hop);
    let padded = len + frame_len;
    let frames = stft_cfg.frame_count(padded);
    let pad = |ch: &[f64]| {
        let mut v = ch.to_vec();
        v.resize(padded, 0.0);
        v
    };
    let ch1 = pad(&input.channels[0]);
    let ch2 = pad(&input.channels[1]);
    let mut out = Vec::with_capacity(frames * hop);
    for l in 0..frames {
        let s = l * hop;
        out.extend(engine.process_frame(&ch1[s..s + frame_len], &ch2[s..s + frame_len])?);
        per_frame(engine);
    }
    out.truncate(len);
    Ok(out)
}

/// Hop-at-a-time wrapper for live streams.
///
/// Each push of `hop` samples per channel returns `hop` output samples. The
/// first push only primes the frame buffer and returns silence; afterwards
/// the output lags the input by one hop.
#[derive(Debug, Clone)]
pub struct StreamEnhancer {
    engine: Enhancer,
    buf1: Vec<f64>,
    buf2: Vec<f64>,
    primed: bool,
}

impl StreamEnhancer {
    pub fn new(cfg: EnhanceConfig) -> Result<Self> {
        let engine = Enhancer::new(cfg)?;
        let frame_len = engine.config().stft.frame_len;
        Ok(Self {
            engine,
            buf1: vec![0.0; frame_len],
            buf2: vec![0.0; frame_len],
            primed: false,
        })
    }

    pub fn engine(&self) -> &Enhancer {
        &self.engine
    }

    pub fn hop(&self) -> usize {
        self.engine.config().stft.hop
    }

    pub fn push(&mut self, ch1: &[f64], ch2: &[f64]) -> Result<Vec<f64>> {
        let hop = self.hop();
        check_len("hop samples (mic 1)", hop, ch1.len())?;
        check_len("hop samples (mic 2)", hop, ch2.len())?;
        self.buf1.copy_within(hop.., 0);
        self.buf2.copy_within(hop.., 0);
        let tail = self.buf1.len() - hop;
        self.buf1[tail..].copy_from_slice(ch1);
        self.buf2[tail..].copy_from_slice(ch2);
        if !self.primed {
            self.primed = true;
            return Ok(vec![0.0; hop]);
        }
        self.engine.process_frame(&self.buf1, &self.buf2)
    }
}
