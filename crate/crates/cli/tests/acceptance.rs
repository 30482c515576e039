//! Acceptance checks. Prints one PASS/FAIL line per criterion and fails if
//! any criterion fails.

use std::process::Command;
use std::time::Instant;

use dualmic_core::coherence::{model_coherence, CoherenceParams};
use dualmic_core::combiner::combine;
use dualmic_core::metrics::{average_coherence, coherence_model_deviation, improvement};
use dualmic_core::scene::{make_scene, make_scene_at_seg_snr, SceneConfig};
use dualmic_core::sgjmap::bin_gain;
use dualmic_core::synth::{speech, white_noise};
use dualmic_core::wav::{write_wav, WavEncoding};
use dualmic_core::{process_file, AudioBuffer, Complex64, EnhanceConfig, GainVector, StftConfig};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const COLA_TOL: f64 = 1e-6;
const COLA_RUNTIME_S: f64 = 1.0;
const SGJMAP_PAIRS: usize = 100_000;
const SGJMAP_TOL: f64 = 1e-12;
const SPOT_TOL: f64 = 1e-5;
const LIMIT_TOL: f64 = 1e-10;
const COHERENCE_TOL: f64 = 0.1;
const COHERENCE_RUNTIME_S: f64 = 30.0;
const COHERENCE_SECONDS: usize = 16;
const E2E_FLOOR_0DB: f64 = 3.0;
const E2E_FLOOR_5DB: f64 = 1.0;
const AFFINE_TOL: f64 = 1e-15;
const FRAME_BUDGET_US: f64 = 10_000.0;

struct Outcome {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn rel_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

fn cola() -> Outcome {
    let start = Instant::now();
    let mut cfg = EnhanceConfig::default();
    cfg.combiner.weight = 1.0;
    cfg.combiner.smooth_t = 0.0;
    cfg.combiner.g_min = 0.0;
    cfg.sgjmap.nu = 0.0;
    cfg.sgjmap.mu = 0.0;
    let x = white_noise(32_000, 0.2, 1);
    let y = white_noise(32_000, 0.2, 2);
    let out = process_file(&AudioBuffer::stereo(16_000, x.clone(), y), &cfg).unwrap();
    let (lo, hi) = (320, x.len() - 320);
    let err = rel_l2(&out[lo..hi], &x[lo..hi]);
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        name: "COLA reconstruction",
        pass: err < COLA_TOL && secs < COLA_RUNTIME_S,
        detail: format!("rel L2 {err:.2e} (< {COLA_TOL:e}), {secs:.2} s (< {COLA_RUNTIME_S} s)"),
    }
}

fn sgjmap_oracle() -> Outcome {
    let (nu, mu) = (0.1, 1.5);
    let direct = |xi: f64, gamma: f64| {
        let u = 0.5 - mu / (4.0 * (gamma * xi).sqrt());
        (u + (u * u + nu / (2.0 * gamma)).sqrt()).clamp(0.0, 1.0)
    };
    let mut rng = StdRng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..SGJMAP_PAIRS {
        let xi = 10f64.powf(rng.random_range(-3.0..3.0));
        let gamma = 10f64.powf(rng.random_range(-3.0..3.0));
        worst = worst.max((bin_gain(xi, gamma, nu, mu, 0.1) - direct(xi, gamma)).abs());
    }
    let g1 = bin_gain(1.0, 1.0, nu, mu, 0.1);
    let g100 = bin_gain(100.0, 100.0, nu, mu, 0.1);
    let pass = worst < SGJMAP_TOL && (g1 - 0.38117).abs() < SPOT_TOL && (g100 - 0.99300).abs() < SPOT_TOL;
    Outcome {
        name: "SGJMAP oracle",
        pass,
        detail: format!("{SGJMAP_PAIRS} pairs max dev {worst:.1e}; G(1,1)={g1:.6} G(100,100)={g100:.6}"),
    }
}

fn model_limits() -> Outcome {
    let stft = StftConfig::default();
    let tau = SceneConfig::default().tau();
    let mut worst = 0.0f64;
    for k in 0..stft.num_bins() {
        let w = stft.bin_omega(k);
        for theta in [0.0, 30.0, 45.0, 90.0, 135.0, 180.0, 270.0] {
            let speech = Complex64::from_polar(1.0, w * tau);
            let noise = Complex64::from_polar(1.0, w * tau * f64::cos(f64::to_radians(theta)));
            worst = worst.max((model_coherence(w, 1e12, theta, tau) - speech).norm());
            worst = worst.max((model_coherence(w, 0.0, theta, tau) - noise).norm());
        }
        for snr in [0.0, 0.3, 1.0, 10.0, 1e6] {
            let at_zero = model_coherence(w, snr, 0.0, tau);
            worst = worst.max((at_zero - Complex64::from_polar(1.0, w * tau)).norm());
        }
    }
    Outcome {
        name: "Coherence model limits",
        pass: worst < LIMIT_TOL,
        detail: format!("max dev {worst:.1e} (< {LIMIT_TOL:e})"),
    }
}

fn coherence_oracle() -> Outcome {
    let start = Instant::now();
    let stft = StftConfig::default();
    let n = COHERENCE_SECONDS * 16_000;
    let mut worst = (0.0f64, 0.0, 0.0);
    let mut seed = 500;
    for theta in [0.0, 45.0, 90.0, 135.0] {
        for snr_db in [-5.0, 0.0, 5.0] {
            seed += 2;
            let cfg = SceneConfig {
                theta,
                snr_db,
                ..Default::default()
            };
            let s = make_scene(&white_noise(n, 0.1, seed), &white_noise(n, 0.1, seed + 1), &cfg).unwrap();
            let mean = average_coherence(&s.ch1, &s.ch2, &stft, &CoherenceParams::default(), 20).unwrap();
            let dev = coherence_model_deviation(&mean, &stft, snr_db, theta, cfg.tau(), 1..stft.num_bins() - 1);
            if dev > worst.0 {
                worst = (dev, theta, snr_db);
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        name: "Coherence oracle",
        pass: worst.0 < COHERENCE_TOL && secs < COHERENCE_RUNTIME_S,
        detail: format!(
            "12 scenes, worst |dev| {:.3} at theta={} snr={} dB (< {COHERENCE_TOL}), {secs:.1} s (< {COHERENCE_RUNTIME_S} s)",
            worst.0, worst.1, worst.2
        ),
    }
}

fn end_to_end() -> Vec<Outcome> {
    let s = speech(8.0, 16_000, 0.5, 7);
    let noise = white_noise(s.len(), 0.1, 107);
    [(0.0, E2E_FLOOR_0DB), (-5.0, E2E_FLOOR_5DB), (5.0, E2E_FLOOR_5DB)]
        .into_iter()
        .map(|(target, floor)| {
            let (scene, mix_db) = make_scene_at_seg_snr(&s, &noise, &SceneConfig::default(), target, 320).unwrap();
            let audio = AudioBuffer::stereo(16_000, scene.ch1.clone(), scene.ch2.clone());
            let out = process_file(&audio, &EnhanceConfig::default()).unwrap();
            let imp = improvement(&scene.clean_ref, &scene.ch1, &out, 320).unwrap();
            Outcome {
                name: "End-to-end improvement",
                pass: imp >= floor,
                detail: format!("input segSNR {target:+} dB (mix {mix_db:.2} dB): {imp:+.2} dB (>= +{floor})"),
            }
        })
        .collect()
}

fn combiner_exactness() -> Outcome {
    let mut rng = StdRng::seed_from_u64(77);
    let mut worst = 0.0f64;
    let mut endpoints = true;
    for _ in 0..2000 {
        let gk = GainVector::new((0..161).map(|_| rng.random_range(0.0..=1.0)).collect()).unwrap();
        let gc = GainVector::new((0..161).map(|_| rng.random_range(0.0..=1.0)).collect()).unwrap();
        let (w1, w2, a): (f64, f64, f64) = (rng.random(), rng.random(), rng.random());
        let mixed = combine(&gk, &gc, a * w1 + (1.0 - a) * w2).unwrap();
        let (g1, g2) = (combine(&gk, &gc, w1).unwrap(), combine(&gk, &gc, w2).unwrap());
        for k in 0..161 {
            worst = worst.max((mixed[k] - (a * g1[k] + (1.0 - a) * g2[k])).abs());
        }
        let bits = |g: &GainVector| g.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        endpoints &= bits(&combine(&gk, &gc, 1.0).unwrap()) == bits(&gk);
        endpoints &= bits(&combine(&gk, &gc, 0.0).unwrap()) == bits(&gc);
    }
    Outcome {
        name: "Combiner exactness",
        pass: worst <= AFFINE_TOL && endpoints,
        detail: format!("affine dev {worst:.1e} (<= {AFFINE_TOL:e}), endpoints bit-exact: {endpoints}"),
    }
}

fn scene_file(dir: &std::path::Path) -> std::path::PathBuf {
    let s = speech(10.0, 16_000, 0.5, 3);
    let cfg = SceneConfig::default();
    let scene = make_scene(&s, &white_noise(s.len(), 0.1, 4), &cfg).unwrap();
    let path = dir.join("scene.wav");
    write_wav(&path, &AudioBuffer::stereo(16_000, scene.ch1, scene.ch2), WavEncoding::Pcm16).unwrap();
    path
}

fn real_time_budget(input: &std::path::Path, dir: &std::path::Path) -> Outcome {
    let out = dir.join("bench.wav");
    let o = Command::new(env!("CARGO_BIN_EXE_dualmic"))
        .args(["enhance", "--bench", "--in", input.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .output()
        .unwrap();
    let text = String::from_utf8_lossy(&o.stdout);
    let mean = text
        .lines()
        .find_map(|l| l.strip_prefix("mean_frame_us").map(|v| v.trim().parse::<f64>().unwrap()));
    match (o.status.success(), mean) {
        (true, Some(mean)) => Outcome {
            name: "Real-time budget",
            pass: mean < FRAME_BUDGET_US,
            detail: format!("enhance --bench on 10 s: mean {mean:.1} us/frame (< {FRAME_BUDGET_US} us)"),
        },
        _ => Outcome {
            name: "Real-time budget",
            pass: false,
            detail: format!("enhance --bench failed: {}", String::from_utf8_lossy(&o.stderr)),
        },
    }
}

fn determinism(input: &std::path::Path, dir: &std::path::Path) -> Outcome {
    let run = |name: &str| {
        let out = dir.join(name);
        let ok = Command::new(env!("CARGO_BIN_EXE_dualmic"))
            .args(["enhance", "--in", input.to_str().unwrap(), "--out", out.to_str().unwrap()])
            .status()
            .unwrap()
            .success();
        (ok, std::fs::read(out).unwrap_or_default())
    };
    let (a, b) = (run("a.wav"), run("b.wav"));
    let same = a.0 && b.0 && !a.1.is_empty() && a.1 == b.1;
    Outcome {
        name: "Determinism",
        pass: same,
        detail: format!("two enhance runs, {} bytes, identical: {same}", a.1.len()),
    }
}

#[test]
fn acceptance() {
    let dir = tempfile::tempdir().unwrap();
    let input = scene_file(dir.path());
    let mut outcomes = vec![cola(), sgjmap_oracle(), model_limits(), coherence_oracle()];
    outcomes.extend(end_to_end());
    outcomes.push(combiner_exactness());
    outcomes.push(real_time_budget(&input, dir.path()));
    outcomes.push(determinism(&input, dir.path()));

    for o in &outcomes {
        println!("{} {}: {}", if o.pass { "PASS" } else { "FAIL" }, o.name, o.detail);
    }
    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.pass).map(|o| o.name).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
