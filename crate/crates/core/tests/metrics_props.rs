use dualmic_core::metrics::{improvement, segmental_snr};
use dualmic_core::synth::white_noise;
use proptest::prelude::*;

#[test]
fn ten_db_fixture() {
    let clean = white_noise(16_000 * 4, 0.2, 11);
    let raw = white_noise(clean.len(), 1.0, 12);
    // Scale the noise frame by frame to exactly 10 dB below the clean frame.
    let mut test = clean.clone();
    for (i, chunk) in test.chunks_mut(320).enumerate() {
        let c = &clean[i * 320..i * 320 + chunk.len()];
        let n = &raw[i * 320..i * 320 + chunk.len()];
        let pc: f64 = c.iter().map(|v| v * v).sum();
        let pn: f64 = n.iter().map(|v| v * v).sum();
        let g = (pc / (10.0 * pn)).sqrt();
        chunk.iter_mut().zip(n).for_each(|(t, v)| *t += g * v);
    }
    let r = segmental_snr(&clean, &test, 320).unwrap();
    assert!((r.mean_db - 10.0).abs() < 0.5, "{}", r.mean_db);
    assert_eq!(improvement(&clean, &test, &test, 320).unwrap(), 0.0);
}

proptest! {
    #[test]
    fn scale_invariant(seed in 0u64..1000, scale in 0.05f64..20.0) {
        let clean = white_noise(3200, 0.3, seed);
        let test: Vec<f64> = clean.iter().zip(white_noise(3200, 0.1, seed + 1)).map(|(c, n)| c + n).collect();
        let a = segmental_snr(&clean, &test, 320).unwrap();
        let cs: Vec<f64> = clean.iter().map(|v| v * scale).collect();
        let ts: Vec<f64> = test.iter().map(|v| v * scale).collect();
        let b = segmental_snr(&cs, &ts, 320).unwrap();
        prop_assert_eq!(a.per_frame_db.len(), b.per_frame_db.len());
        prop_assert!((a.mean_db - b.mean_db).abs() < 1e-9);
    }

    #[test]
    fn frames_within_clamp(seed in 0u64..1000, level in 0.001f64..3.0) {
        let clean = white_noise(1600, 0.2, seed);
        let test: Vec<f64> = clean.iter().zip(white_noise(1600, level, seed + 7)).map(|(c, n)| c + n).collect();
        let r = segmental_snr(&clean, &test, 320).unwrap();
        prop_assert!(r.per_frame_db.iter().all(|(_, d)| (-10.0..=35.0).contains(d)));
        let mean = r.per_frame_db.iter().map(|(_, d)| d).sum::<f64>() / r.per_frame_db.len() as f64;
        prop_assert!((mean - r.mean_db).abs() < 1e-12);
    }
}
