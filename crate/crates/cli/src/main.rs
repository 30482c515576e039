//! `dualmic` command-line tool: enhance, simulate and score two-microphone
//! recordings.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use dualmic_core::combiner::check_weight;
use dualmic_core::metrics::segmental_snr;
use dualmic_core::pipeline::process_with;
use dualmic_core::scene::{make_scene, SceneConfig};
use dualmic_core::synth;
use dualmic_core::wav::{read_wav, write_wav, WavEncoding};
use dualmic_core::{AudioBuffer, EnhanceConfig, Enhancer, Error};

const EXIT_INPUT: u8 = 2;
const EXIT_USAGE: u8 = 64;
const FS: u32 = 16_000;

#[derive(Debug, Parser)]
#[command(name = "dualmic", version, about = "Dual-microphone speech enhancement")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Enhance a 16 kHz stereo recording to a mono file.
    Enhance(EnhanceArgs),
    /// Mix speech and noise into a two-microphone scene.
    Simulate(SimulateArgs),
    /// Segmental SNR improvement of an enhanced file.
    Score(ScoreArgs),
}

#[derive(Debug, Args)]
struct EnhanceArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Combiner weight in [0,1]; overrides the config file.
    #[arg(long)]
    weight: Option<f64>,
    /// JSON config mirroring the engine parameters.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Print per-frame processing time.
    #[arg(long)]
    bench: bool,
    /// Write 32-bit float samples instead of 16-bit PCM.
    #[arg(long)]
    float: bool,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Mono 16 kHz WAV, or `builtin:speech`.
    #[arg(long)]
    speech: String,
    /// Mono 16 kHz WAV, or `builtin:white`, `builtin:babble`, `builtin:machinery`.
    #[arg(long)]
    noise: String,
    /// Noise azimuth in degrees.
    #[arg(long, default_value_t = 90.0, allow_negative_numbers = true)]
    theta: f64,
    /// Microphone-1 SNR in dB.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    snr: f64,
    #[arg(long)]
    out: PathBuf,
    /// Length of built-in speech in seconds.
    #[arg(long, default_value_t = 10.0)]
    seconds: f64,
    /// Seed for built-in sources.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    float: bool,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    #[arg(long)]
    clean: PathBuf,
    /// Noisy input; channel 1 is used for multi-channel files.
    #[arg(long)]
    noisy: PathBuf,
    #[arg(long)]
    enhanced: PathBuf,
    /// Per-frame segmental SNR of the enhanced file.
    #[arg(long)]
    csv: Option<PathBuf>,
}

/// Failure with the exit code it maps to.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Input(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.into())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    let result = match cli.command {
        Command::Enhance(a) => enhance(a),
        Command::Simulate(a) => simulate(a),
        Command::Score(a) => score(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

fn encoding(float: bool) -> WavEncoding {
    if float {
        WavEncoding::Float32
    } else {
        WavEncoding::Pcm16
    }
}

fn read(path: &Path) -> Result<AudioBuffer, Failure> {
    Ok(read_wav(path).with_context(|| format!("reading {}", path.display()))?)
}

fn enhance(a: EnhanceArgs) -> Result<(), Failure> {
    if let Some(w) = a.weight {
        check_weight(w).map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let mut cfg = match &a.config {
        Some(path) => EnhanceConfig::load(path).with_context(|| format!("config {}", path.display()))?,
        None => EnhanceConfig::default(),
    };
    if let Some(w) = a.weight {
        cfg.combiner.weight = w;
    }
    let input = read(&a.input)?;
    input.check_stereo(cfg.stft.sample_rate)?;

    let mut engine = Enhancer::new(cfg)?;
    let mut times = Vec::new();
    let mut last = Instant::now();
    let out = process_with(&mut engine, &input, |_| {
        if a.bench {
            let now = Instant::now();
            times.push(now.duration_since(last).as_secs_f64() * 1e6);
            last = now;
        }
    })?;
    write_wav(&a.out, &AudioBuffer::mono(input.sample_rate, out), encoding(a.float))
        .with_context(|| format!("writing {}", a.out.display()))?;

    if a.bench && !times.is_empty() {
        let mean = times.iter().sum::<f64>() / times.len() as f64;
        let max = times.iter().cloned().fold(0.0, f64::max);
        println!("frames {}", times.len());
        println!("mean_frame_us {mean:.2}");
        println!("max_frame_us {max:.2}");
    }
    Ok(())
}

fn load_mono(spec: &str, what: &str) -> Result<Vec<f64>, Failure> {
    let audio = read(Path::new(spec))?;
    if audio.sample_rate != FS || audio.channels.len() != 1 {
        return Err(Error::Format(format!(
            "{what} {spec}: expected 1-channel {FS} Hz audio, got {}-channel {} Hz",
            audio.channels.len(),
            audio.sample_rate
        ))
        .into());
    }
    Ok(audio.channels.into_iter().next().unwrap_or_default())
}

fn speech_source(a: &SimulateArgs) -> Result<Vec<f64>, Failure> {
    match a.speech.strip_prefix("builtin:") {
        Some("speech") => {
            if !(a.seconds > 0.0 && a.seconds.is_finite()) {
                return Err(Failure::Usage(format!("--seconds must be positive, got {}", a.seconds)));
            }
            Ok(synth::speech(a.seconds, FS, 0.5, a.seed))
        }
        Some(other) => Err(Failure::Usage(format!("unknown built-in speech source `{other}`"))),
        None => load_mono(&a.speech, "speech"),
    }
}

fn noise_source(a: &SimulateArgs, len: usize) -> Result<Vec<f64>, Failure> {
    let seconds = len as f64 / FS as f64 + 0.01;
    let seed = a.seed.wrapping_add(1000);
    let mut n = match a.noise.strip_prefix("builtin:") {
        Some("white") => synth::white_noise(len, 0.1, seed),
        Some("babble") => synth::babble(seconds, FS, seed),
        Some("machinery") => synth::machinery(seconds, FS, seed),
        Some(other) => return Err(Failure::Usage(format!("unknown built-in noise source `{other}`"))),
        None => return load_mono(&a.noise, "noise"),
    };
    n.truncate(len);
    Ok(n)
}

fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}{suffix}"))
}

fn simulate(a: SimulateArgs) -> Result<(), Failure> {
    let cfg = SceneConfig {
        theta: a.theta,
        snr_db: a.snr,
        ..Default::default()
    };
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let speech = speech_source(&a)?;
    let noise = noise_source(&a, speech.len())?;
    let scene = make_scene(&speech, &noise, &cfg)?;
    let enc = encoding(a.float);
    let paths = [
        (a.out.clone(), AudioBuffer::stereo(FS, scene.ch1.clone(), scene.ch2.clone())),
        (sibling(&a.out, ".clean.wav"), AudioBuffer::mono(FS, scene.clean_ref.clone())),
        (sibling(&a.out, ".noise.wav"), AudioBuffer::mono(FS, scene.noise_ref.clone())),
    ];
    for (path, audio) in &paths {
        write_wav(path, audio, enc).with_context(|| format!("writing {}", path.display()))?;
    }
    let side_path = sibling(&a.out, ".json");
    let side = serde_json::to_string_pretty(&scene.sidecar(&cfg)).context("encoding sidecar")?;
    std::fs::write(&side_path, side + "\n").with_context(|| format!("writing {}", side_path.display()))?;
    println!("tau {:.4}", cfg.tau());
    println!("noise_delay {:.4}", cfg.noise_delay());
    Ok(())
}

fn first_channel(audio: AudioBuffer, path: &Path) -> Result<Vec<f64>, Failure> {
    if audio.sample_rate != FS {
        return Err(Error::Format(format!(
            "{}: expected {FS} Hz audio, got {} Hz",
            path.display(),
            audio.sample_rate
        ))
        .into());
    }
    Ok(audio.channels.into_iter().next().unwrap_or_default())
}

fn score(a: ScoreArgs) -> Result<(), Failure> {
    let clean = first_channel(read(&a.clean)?, &a.clean)?;
    let noisy = first_channel(read(&a.noisy)?, &a.noisy)?;
    let enhanced = first_channel(read(&a.enhanced)?, &a.enhanced)?;
    let before = segmental_snr(&clean, &noisy, 320)?;
    let after = segmental_snr(&clean, &enhanced, 320)?;
    if let Some(csv) = &a.csv {
        std::fs::write(csv, after.to_csv()).with_context(|| format!("writing {}", csv.display()))?;
    }
    println!("segsnr_noisy_db {:.3}", before.mean_db);
    println!("segsnr_enhanced_db {:.3}", after.mean_db);
    println!("improvement_db {:.3}", after.mean_db - before.mean_db);
    Ok(())
}
