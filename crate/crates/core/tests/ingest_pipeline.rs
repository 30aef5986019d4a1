use std::f64::consts::TAU;

use iirnet::dsp::{make_grid, section_response_db, MagnitudeResponse, Section};
use iirnet::ingest::{
    cascade_impulse_response, ir_to_magnitude, ir_to_target, read_wav, resample, savgol_smooth,
    write_wav, ImpulseResponse, SampleFormat, SavgolFilter, SmoothingConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn tone(freq: f64, fs: f64, n: usize, phase: f64) -> Vec<f64> {
    (0..n).map(|i| (TAU * freq * i as f64 / fs + phase).sin()).collect()
}

/// Frequency from linearly interpolated upward zero crossings.
fn zero_crossing_frequency(x: &[f64], fs: f64) -> f64 {
    let ups: Vec<f64> = x
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0] < 0.0 && w[1] >= 0.0)
        .map(|(i, w)| i as f64 + w[0] / (w[0] - w[1]))
        .collect();
    let periods = (ups.len() - 1) as f64;
    fs * periods / (ups[ups.len() - 1] - ups[0])
}

#[test]
fn resampler_preserves_sinusoid() {
    let x = tone(1000.0, 48000.0, 48000, 0.3);
    let y = resample(&ImpulseResponse::new(x, 48000.0, 0).unwrap(), 44100.0).unwrap();
    // Skip the filter's start-up and tail transients.
    let mid = &y.samples[2000..y.samples.len() - 2000];
    let rms = (mid.iter().map(|v| v * v).sum::<f64>() / mid.len() as f64).sqrt();
    let amp_db = 20.0 * (rms * 2f64.sqrt()).log10();
    assert!(amp_db.abs() < 0.1, "{amp_db}");
    let f = zero_crossing_frequency(mid, 44100.0);
    assert!((f - 1000.0).abs() / 1000.0 < 1e-4, "{f}");
}

#[test]
fn resampler_upsampling_preserves_sinusoid() {
    let x = tone(3000.0, 22050.0, 22050, 1.1);
    let y = resample(&ImpulseResponse::new(x, 22050.0, 0).unwrap(), 44100.0).unwrap();
    let mid = &y.samples[2000..y.samples.len() - 2000];
    let rms = (mid.iter().map(|v| v * v).sum::<f64>() / mid.len() as f64).sqrt();
    assert!((20.0 * (rms * 2f64.sqrt()).log10()).abs() < 0.1);
    assert!((zero_crossing_frequency(mid, 44100.0) - 3000.0).abs() / 3000.0 < 1e-4);
}

#[test]
fn resampler_rejects_content_above_new_nyquist() {
    // Noise confined to 22.3–23.9 kHz at 48 kHz: entirely above 22.05 kHz.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 24000;
    let mut x = vec![0.0; n];
    for _ in 0..200 {
        let f = rng.random_range(22300.0..23900.0);
        let p = rng.random_range(0.0..TAU);
        for (v, t) in x.iter_mut().zip(tone(f, 48000.0, n, p)) {
            *v += t;
        }
    }
    let e_in = x.iter().map(|v| v * v).sum::<f64>() / n as f64;
    let y = resample(&ImpulseResponse::new(x, 48000.0, 0).unwrap(), 44100.0).unwrap();
    let mid = &y.samples[1000..y.samples.len() - 1000];
    let e_out = mid.iter().map(|v| v * v).sum::<f64>() / mid.len() as f64;
    let atten = 10.0 * (e_in / e_out).log10();
    assert!(atten >= 60.0, "{atten}");
}

#[test]
fn truncated_biquad_ir_matches_analytic_response() {
    let grid = make_grid(512, 44100.0).unwrap();
    let s = Section {
        b: [0.7, -0.3, 0.2],
        a: [1.0, -1.2, 0.81],
    };
    let h = cascade_impulse_response(&[s], 10_000);
    let measured = ir_to_magnitude(&ImpulseResponse::new(h, 44100.0, 0).unwrap(), &grid).unwrap();
    let exact = section_response_db(&s, &grid).unwrap();
    for (a, b) in measured.values_db.iter().zip(&exact.values_db) {
        assert!((a - b).abs() < 0.05, "{a} {b}");
    }
}

#[test]
fn delta_through_full_pipeline_is_flat() {
    let grid = make_grid(512, 44100.0).unwrap();
    let mut s = vec![0.0; 256];
    s[0] = 1.0;
    let ir = ImpulseResponse::new(s, 44100.0, 0).unwrap();
    let t = ir_to_target(&ir, &grid, &SmoothingConfig::default()).unwrap();
    assert!(t.values_db.iter().all(|v| v.abs() < 1e-6));
}

#[test]
fn resampled_delta_is_flat_in_passband() {
    let grid = make_grid(512, 44100.0).unwrap();
    let mut s = vec![0.0; 512];
    s[200] = 1.0;
    let ir = ImpulseResponse::new(s, 48000.0, 0).unwrap();
    let t = ir_to_target(&ir, &grid, &SmoothingConfig::default()).unwrap();
    // Passband edge is 0.9 of 22.05 kHz; stay below it including the
    // smoothing half-window.
    let edge = (0.9 * 511.0) as usize - 32;
    let worst = t.values_db[..edge].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(worst < 0.01, "{worst} {:?}", &t.values_db[..5]);
}

#[test]
fn smoother_reduces_white_noise_variance() {
    let grid = make_grid(512, 44100.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let cfg = SmoothingConfig::default();
    let f = SavgolFilter::new(cfg).unwrap();
    let norm2: f64 = f.center_weights().iter().map(|w| w * w).sum();
    let (mut vin, mut vout, mut vmid) = (0.0, 0.0, 0.0);
    for _ in 0..200 {
        let x: Vec<f64> = (0..512).map(|_| rng.sample(StandardNormal)).collect();
        let y = savgol_smooth(&MagnitudeResponse::new(grid.clone(), x.clone()).unwrap(), &cfg).unwrap();
        vin += x.iter().map(|v| v * v).sum::<f64>();
        vout += y.values_db.iter().map(|v| v * v).sum::<f64>();
        vmid += y.values_db[31..481].iter().map(|v| v * v).sum::<f64>() / 450.0;
    }
    assert!(vout / vin < 0.15, "{}", vout / vin);
    // Interior variance equals the squared weight norm for unit-variance noise.
    assert!((vmid / 200.0 - norm2).abs() < 0.1 * norm2, "{} {norm2}", vmid / 200.0);
}

#[test]
fn smoother_reproduces_low_degree_polynomials() {
    let grid = make_grid(512, 44100.0).unwrap();
    for deg in 0..=3 {
        let x: Vec<f64> = (0..512).map(|i| (i as f64 / 50.0 - 5.0).powi(deg) - 1.5).collect();
        let y = savgol_smooth(&MagnitudeResponse::new(grid.clone(), x.clone()).unwrap(), &SmoothingConfig::default())
            .unwrap();
        for (a, b) in y.values_db.iter().zip(&x) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}

#[test]
fn wav_files_on_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ir.wav");
    let h = cascade_impulse_response(&[Section { b: [0.5, 0.1, 0.0], a: [1.0, -0.5, 0.0] }], 64);
    write_wav(&path, &[h.clone(), h.clone()], 48000, SampleFormat::Float32).unwrap();
    let irs = read_wav(&path).unwrap();
    assert_eq!(irs.len(), 2);
    assert!(irs[0].samples.iter().zip(&h).all(|(a, b)| (a - b).abs() < 1e-7));
    assert!(read_wav(&dir.path().join("missing.wav")).is_err());
}
