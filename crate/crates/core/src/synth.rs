//! Deterministic synthetic sources for demos and tests: a speech-like
//! harmonic signal with syllable structure and pauses, and three noise types.

use std::f64::consts::PI;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Normal};

/// Vowel formant frequencies (Hz) and bandwidths used by [`speech`].
const VOWELS: [[(f64, f64); 3]; 5] = [
    [(730.0, 90.0), (1090.0, 110.0), (2440.0, 170.0)],
    [(270.0, 60.0), (2290.0, 100.0), (3010.0, 120.0)],
    [(530.0, 60.0), (1840.0, 100.0), (2480.0, 140.0)],
    [(570.0, 70.0), (840.0, 80.0), (2410.0, 160.0)],
    [(300.0, 60.0), (870.0, 90.0), (2240.0, 130.0)],
];

fn formant_envelope(f: f64, vowel: &[(f64, f64); 3]) -> f64 {
    let tilt = 1.0 / (1.0 + f / 500.0);
    let peaks: f64 = vowel
        .iter()
        .enumerate()
        .map(|(i, &(fc, bw))| {
            let x = (f - fc) / bw;
            (1.0 / (1.0 + x * x)) / (1.0 + i as f64)
        })
        .sum();
    tilt * (0.05 + peaks)
}

/// Speech-like signal of `seconds` at `fs`, starting with `lead_silence`
/// seconds of silence. Voiced syllables alternate with fricative bursts and
/// pauses; peak level is about 0.5.
pub fn speech(seconds: f64, fs: u32, lead_silence: f64, seed: u64) -> Vec<f64> {
    let fsf = fs as f64;
    let n = (seconds * fsf) as usize;
    let mut rng = StdRng::seed_from_u64(seed);
    let white = Normal::new(0.0, 1.0).expect("unit normal");
    let mut out = vec![0.0; n];
    let mut pos = (lead_silence * fsf) as usize;
    let mut f0_base: f64 = rng.random_range(100.0..210.0);
    let mut syllable = 0usize;
    while pos < n {
        let dur = (rng.random_range(0.14..0.32) * fsf) as usize;
        let end = (pos + dur).min(n);
        let fricative = rng.random_bool(0.2);
        let vowel = &VOWELS[rng.random_range(0..VOWELS.len())];
        let amp: f64 = rng.random_range(0.5..1.0);
        let len = (end - pos).max(1) as f64;
        if fricative {
            // High-passed noise burst.
            let mut prev = 0.0;
            for (i, o) in out[pos..end].iter_mut().enumerate() {
                let w: f64 = white.sample(&mut rng);
                let hp = w - prev;
                prev = w;
                let env = (PI * i as f64 / len).sin().powi(2);
                *o = 0.08 * amp * env * hp;
            }
        } else {
            let mut phase = 0.0;
            f0_base = (f0_base * rng.random_range(0.9..1.1)).clamp(90.0, 240.0);
            let glide: f64 = rng.random_range(-0.2..0.2);
            for (i, o) in out[pos..end].iter_mut().enumerate() {
                let t = i as f64 / len;
                let f0 = f0_base * (1.0 + glide * (t - 0.5)) * (1.0 + 0.01 * (2.0 * PI * 5.0 * i as f64 / fsf).sin());
                phase += 2.0 * PI * f0 / fsf;
                let mut s = 0.0;
                let mut h = 1.0;
                while h * f0 < 0.45 * fsf.min(10_000.0) {
                    s += formant_envelope(h * f0, vowel) * (h * phase).sin();
                    h += 1.0;
                }
                let env = (PI * t).sin().powf(0.7);
                *o = 0.25 * amp * env * s;
            }
        }
        syllable += 1;
        let gap = if syllable.is_multiple_of(5) {
            rng.random_range(0.3..0.6)
        } else {
            rng.random_range(0.03..0.12)
        };
        pos = end + (gap * fsf) as usize;
    }
    let peak = out.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > 0.0 {
        out.iter_mut().for_each(|v| *v *= 0.5 / peak);
    }
    out
}

/// Zero-mean Gaussian white noise with standard deviation `std`.
pub fn white_noise(n: usize, std: f64, seed: u64) -> Vec<f64> {
    let mut rng = StdRng::seed_from_u64(seed);
    let dist = Normal::new(0.0, std).expect("valid std");
    (0..n).map(|_| dist.sample(&mut rng)).collect()
}

/// Several overlapping talkers without long pauses.
pub fn babble(seconds: f64, fs: u32, seed: u64) -> Vec<f64> {
    let n = (seconds * fs as f64) as usize;
    let mut out = vec![0.0; n];
    for t in 0..6u64 {
        let talker = speech(seconds, fs, 0.0, seed.wrapping_mul(31).wrapping_add(t));
        for (o, v) in out.iter_mut().zip(&talker) {
            *o += v;
        }
    }
    normalize_rms(&mut out, 0.1);
    out
}

/// Stationary machinery-like noise: a hum with harmonics over a low-passed
/// noise bed.
pub fn machinery(seconds: f64, fs: u32, seed: u64) -> Vec<f64> {
    let fsf = fs as f64;
    let n = (seconds * fsf) as usize;
    let white = white_noise(n, 1.0, seed);
    let mut lp = 0.0;
    let mut out: Vec<f64> = (0..n)
        .map(|i| {
            lp = 0.95 * lp + 0.05 * white[i];
            let t = i as f64 / fsf;
            let hum: f64 = (1..=8)
                .map(|h| (2.0 * PI * 90.0 * h as f64 * t).sin() / h as f64)
                .sum();
            0.3 * hum + 4.0 * lp + 0.15 * white[i]
        })
        .collect();
    normalize_rms(&mut out, 0.1);
    out
}

fn normalize_rms(x: &mut [f64], target: f64) {
    let rms = (x.iter().map(|v| v * v).sum::<f64>() / x.len().max(1) as f64).sqrt();
    if rms > 0.0 {
        x.iter_mut().for_each(|v| *v *= target / rms);
    }
}
