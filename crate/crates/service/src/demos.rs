//! Built-in demo scenes, synthesized once at startup.

use std::sync::Arc;

use dualmic_core::scene::{make_scene, SceneConfig};
use dualmic_core::{synth, AudioBuffer};

use crate::protocol::DemoInfo;

const FS: u32 = 16_000;
const SECONDS: f64 = 8.0;

pub struct Demo {
    pub info: DemoInfo,
    pub audio: Arc<AudioBuffer>,
}

impl Demo {
    fn new(name: &str, noise: &str, theta: f64, snr_db: f64, seed: u64) -> Self {
        let info = DemoInfo {
            name: name.into(),
            noise: noise.into(),
            theta,
            snr_db,
            seconds: SECONDS,
        };
        let audio = Arc::new(build(&info, seed));
        Self { info, audio }
    }
}

fn build(info: &DemoInfo, seed: u64) -> AudioBuffer {
    let speech = synth::speech(SECONDS, FS, 0.5, seed);
    let mut noise = match info.noise.as_str() {
        "babble" => synth::babble(SECONDS + 0.01, FS, seed + 1),
        "machinery" => synth::machinery(SECONDS + 0.01, FS, seed + 1),
        _ => synth::white_noise(speech.len(), 0.1, seed + 1),
    };
    noise.truncate(speech.len());
    let cfg = SceneConfig {
        theta: info.theta,
        snr_db: info.snr_db,
        ..Default::default()
    };
    let scene = make_scene(&speech, &noise, &cfg).expect("demo scene parameters are valid");
    AudioBuffer::stereo(FS, scene.ch1, scene.ch2)
}

pub fn builtin() -> Vec<Demo> {
    vec![
        Demo::new("white-90-0db", "white", 90.0, 0.0, 11),
        Demo::new("white-45-5db", "white", 45.0, 5.0, 12),
        Demo::new("babble-90-0db", "babble", 90.0, 0.0, 13),
        Demo::new("machinery-135-5db", "machinery", 135.0, 5.0, 14),
    ]
}
