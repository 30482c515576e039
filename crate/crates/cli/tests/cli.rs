use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dualmic_core::synth::{speech, white_noise};
use dualmic_core::wav::{read_wav, write_wav, WavEncoding};
use dualmic_core::AudioBuffer;

fn dualmic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dualmic")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stereo_file(dir: &Path, name: &str, rate: u32) -> PathBuf {
    let s = speech(1.0, 16_000, 0.2, 1);
    let n = white_noise(s.len(), 0.05, 2);
    let ch1: Vec<f64> = s.iter().zip(&n).map(|(a, b)| a + b).collect();
    let p = dir.join(name);
    write_wav(&p, &AudioBuffer::stereo(rate, ch1, s), WavEncoding::Pcm16).unwrap();
    p
}

fn value(out: &str, key: &str) -> f64 {
    out.lines()
        .find_map(|l| l.strip_prefix(key).map(|v| v.trim().parse().unwrap()))
        .unwrap_or_else(|| panic!("{key} missing in {out}"))
}

#[test]
fn enhance_writes_mono_output() {
    let dir = tempfile::tempdir().unwrap();
    let input = stereo_file(dir.path(), "in.wav", 16_000);
    let out = dir.path().join("out.wav");
    let o = dualmic(&["enhance", "--in", input.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let audio = read_wav(&out).unwrap();
    assert_eq!(audio.channels.len(), 1);
    assert_eq!(audio.sample_rate, 16_000);
    assert_eq!(audio.len(), 16_000);

    let fout = dir.path().join("out_f.wav");
    let o = dualmic(&["enhance", "--in", input.to_str().unwrap(), "--out", fout.to_str().unwrap(), "--float", "--weight", "0.3"]);
    assert_eq!(code(&o), 0);
    // 4 bytes per sample plus header.
    assert!(std::fs::metadata(&fout).unwrap().len() >= 16_000 * 4);
    assert!(std::fs::metadata(&out).unwrap().len() < 16_000 * 4);
}

#[test]
fn enhance_usage_errors_exit_64() {
    let dir = tempfile::tempdir().unwrap();
    let input = stereo_file(dir.path(), "in.wav", 16_000);
    let out = dir.path().join("out.wav");
    let o = dualmic(&["enhance", "--in", input.to_str().unwrap(), "--out", out.to_str().unwrap(), "--weight", "1.5"]);
    assert_eq!(code(&o), 64);
    assert!(String::from_utf8_lossy(&o.stderr).contains("weight must be in [0,1]"));
    assert!(!out.exists());
    assert_eq!(code(&dualmic(&["enhance", "--in", "x.wav"])), 64);
    assert_eq!(code(&dualmic(&["enhance", "--bogus"])), 64);
    assert_eq!(code(&dualmic(&["--help"])), 0);
}

#[test]
fn enhance_input_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.wav");
    let rate = stereo_file(dir.path(), "r.wav", 44_100);
    let o = dualmic(&["enhance", "--in", rate.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("16000"));

    let junk = dir.path().join("junk.wav");
    std::fs::write(&junk, b"not a wav").unwrap();
    assert_eq!(code(&dualmic(&["enhance", "--in", junk.to_str().unwrap(), "--out", out.to_str().unwrap()])), 2);
    assert_eq!(code(&dualmic(&["enhance", "--in", "/nonexistent.wav", "--out", out.to_str().unwrap()])), 2);

    let input = stereo_file(dir.path(), "in.wav", 16_000);
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"combiner":{"wieght":0.5}}"#).unwrap();
    let o = dualmic(&["enhance", "--in", input.to_str().unwrap(), "--out", out.to_str().unwrap(), "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn config_file_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let input = stereo_file(dir.path(), "in.wav", 16_000);
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"combiner":{"weight":1.0}}"#).unwrap();
    let (a, b) = (dir.path().join("a.wav"), dir.path().join("b.wav"));
    assert_eq!(code(&dualmic(&["enhance", "--in", input.to_str().unwrap(), "--out", a.to_str().unwrap(), "--config", cfg.to_str().unwrap()])), 0);
    assert_eq!(code(&dualmic(&["enhance", "--in", input.to_str().unwrap(), "--out", b.to_str().unwrap(), "--weight", "1"])), 0);
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn simulate_writes_scene_references_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("scene.wav");
    let o = dualmic(&[
        "simulate", "--speech", "builtin:speech", "--noise", "builtin:white", "--theta", "90", "--snr", "0",
        "--seconds", "2", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read_wav(&out).unwrap().channels.len(), 2);
    assert_eq!(read_wav(dir.path().join("scene.clean.wav")).unwrap().channels.len(), 1);
    assert_eq!(read_wav(dir.path().join("scene.noise.wav")).unwrap().len(), 32_000);
    let side: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("scene.json")).unwrap()).unwrap();
    assert!((side["tau"].as_f64().unwrap() - 6.06).abs() < 0.005);
    assert!(side["noise_delay"].as_f64().unwrap().abs() < 1e-9);
    assert_eq!(side["scene"]["theta"].as_f64().unwrap(), 90.0);
    assert!((side["measured_snr1_db"].as_f64().unwrap()).abs() < 0.1);
}

#[test]
fn simulate_collinear_and_file_sources() {
    let dir = tempfile::tempdir().unwrap();
    let sp = dir.path().join("s.wav");
    let nz = dir.path().join("n.wav");
    write_wav(&sp, &AudioBuffer::mono(16_000, speech(1.0, 16_000, 0.1, 3)), WavEncoding::Float32).unwrap();
    write_wav(&nz, &AudioBuffer::mono(16_000, white_noise(16_000, 0.1, 4)), WavEncoding::Float32).unwrap();
    let out = dir.path().join("c.wav");
    let o = dualmic(&["simulate", "--speech", sp.to_str().unwrap(), "--noise", nz.to_str().unwrap(), "--theta", "0", "--snr", "5", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let side: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("c.json")).unwrap()).unwrap();
    assert_eq!(side["noise_delay"], side["speech_delay"]);

    let missing = dualmic(&["simulate", "--speech", sp.to_str().unwrap(), "--noise", "/nonexistent.wav", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&missing), 2);
    let bad_theta = dualmic(&["simulate", "--speech", sp.to_str().unwrap(), "--noise", nz.to_str().unwrap(), "--theta", "400", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&bad_theta), 64);
    let unknown = dualmic(&["simulate", "--speech", "builtin:speech", "--noise", "builtin:rain", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&unknown), 64);
}

#[test]
fn score_reports_improvement_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let clean = white_noise(16_000, 0.2, 5);
    let noise = white_noise(16_000, 1.0, 6);
    // Each frame scaled to exactly 10 dB.
    let mut tenth = clean.clone();
    for (i, chunk) in tenth.chunks_mut(320).enumerate() {
        let r = i * 320..i * 320 + chunk.len();
        let pc: f64 = clean[r.clone()].iter().map(|v| v * v).sum();
        let pn: f64 = noise[r.clone()].iter().map(|v| v * v).sum();
        let g = (pc / (10.0 * pn)).sqrt();
        chunk.iter_mut().zip(&noise[r]).for_each(|(c, n)| *c += g * n);
    }
    let zero = vec![0.0; clean.len()];
    let write = |name: &str, x: &[f64]| {
        let p = dir.path().join(name);
        write_wav(&p, &AudioBuffer::mono(16_000, x.to_vec()), WavEncoding::Float32).unwrap();
        p
    };
    let (c, y, e) = (write("c.wav", &clean), write("y.wav", &zero), write("e.wav", &tenth));

    let same = dualmic(&["score", "--clean", c.to_str().unwrap(), "--noisy", e.to_str().unwrap(), "--enhanced", e.to_str().unwrap()]);
    assert_eq!(code(&same), 0);
    assert_eq!(value(&stdout(&same), "improvement_db"), 0.0);

    // Zero test signal scores 0 dB per frame, so the improvement is the fixture level.
    let csv = dir.path().join("frames.csv");
    let o = dualmic(&["score", "--clean", c.to_str().unwrap(), "--noisy", y.to_str().unwrap(), "--enhanced", e.to_str().unwrap(), "--csv", csv.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!((value(&stdout(&o), "improvement_db") - 10.0).abs() < 0.5);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("frame,seg_snr_db\n"));
    assert_eq!(text.lines().count(), 50 + 2);

    let nocsv = dir.path().join("none.csv");
    let o = dualmic(&["score", "--clean", c.to_str().unwrap(), "--noisy", y.to_str().unwrap(), "--enhanced", e.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(!nocsv.exists());
    assert!(stdout(&o).contains("improvement_db"));

    let short = write("short.wav", &clean[..8000]);
    let o = dualmic(&["score", "--clean", c.to_str().unwrap(), "--noisy", y.to_str().unwrap(), "--enhanced", short.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn bench_reports_frame_times() {
    let dir = tempfile::tempdir().unwrap();
    let input = stereo_file(dir.path(), "in.wav", 16_000);
    let out = dir.path().join("out.wav");
    let o = dualmic(&["enhance", "--in", input.to_str().unwrap(), "--out", out.to_str().unwrap(), "--bench"]);
    assert_eq!(code(&o), 0);
    let s = stdout(&o);
    assert_eq!(value(&s, "frames"), 101.0);
    assert!(value(&s, "mean_frame_us") > 0.0);
    assert!(value(&s, "max_frame_us") >= value(&s, "mean_frame_us"));
}
