//! Deterministic synthetic source material: siren patterns, horns, other
//! traffic events and stereo traffic noise.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{scene_rng, SirenKind, TargetClass};
use crate::audio::AudioBuffer;
use crate::SAMPLE_RATE;

const SOURCE_STREAM: u64 = 7;
const NOISE_STREAM: u64 = 11;

fn n_samples(duration: f64) -> usize {
    (duration * SAMPLE_RATE as f64).round() as usize
}

/// Harmonic waveform driven by an instantaneous-frequency track.
fn harmonic_from_track(freqs: impl Iterator<Item = f64>, amps: &[f64], phase0: f64) -> Vec<f64> {
    let dt = 1.0 / SAMPLE_RATE as f64;
    let nyquist = SAMPLE_RATE as f64 / 2.0;
    let mut phase = phase0;
    freqs
        .map(|f| {
            let v = amps
                .iter()
                .enumerate()
                .filter(|(h, _)| f * (*h as f64 + 1.0) < nyquist)
                .map(|(h, a)| a * ((h as f64 + 1.0) * phase).sin())
                .sum();
            phase = (phase + 2.0 * PI * f * dt) % (2.0 * PI * 64.0);
            v
        })
        .collect()
}

fn normalize_peak(mut x: Vec<f64>, peak: f64) -> Vec<f64> {
    let m = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if m > 0.0 {
        x.iter_mut().for_each(|v| *v *= peak / m);
    }
    x
}

/// Electronic siren: yelp (fast up-sweeps), wail (slow sinusoidal sweep) or
/// hi-low (two alternating tones).
pub fn siren(kind: SirenKind, duration: f64, seed: u64) -> AudioBuffer {
    let mut rng = scene_rng(seed, SOURCE_STREAM);
    let lo = 650.0 * rng.random_range(0.92..1.08);
    let hi = 1500.0 * rng.random_range(0.92..1.08);
    let offset: f64 = rng.random_range(0.0..1.0);
    let phase0 = rng.random_range(0.0..2.0 * PI);
    let n = n_samples(duration);
    let fs = SAMPLE_RATE as f64;
    let amps = [1.0, 0.45, 0.25, 0.12];
    let track: Box<dyn Fn(f64) -> f64> = match kind {
        SirenKind::Yelp => {
            let rate = rng.random_range(3.0..4.5);
            Box::new(move |t: f64| {
                let u = (t * rate + offset).fract();
                lo + (hi - lo) * u
            })
        }
        SirenKind::Wail => {
            let period = rng.random_range(3.0..5.0);
            Box::new(move |t: f64| {
                let u = 0.5 - 0.5 * (2.0 * PI * (t / period + offset)).cos();
                lo + (hi - lo) * u
            })
        }
        SirenKind::HiLow => {
            let half = rng.random_range(0.45..0.65);
            let (f_hi, f_lo) = (960.0 * hi / 1500.0, 770.0 * hi / 1500.0);
            Box::new(move |t: f64| {
                if ((t / half + offset * 2.0) as u64).is_multiple_of(2) {
                    f_hi
                } else {
                    f_lo
                }
            })
        }
    };
    let x = harmonic_from_track((0..n).map(|i| track(i as f64 / fs)), &amps, phase0);
    AudioBuffer::mono(SAMPLE_RATE, normalize_peak(x, 0.5))
}

/// Vehicle horn: one or two harmonic-rich tones with slight vibrato.
pub fn horn(duration: f64, seed: u64) -> AudioBuffer {
    let mut rng = scene_rng(seed, SOURCE_STREAM);
    let f0 = rng.random_range(350.0..500.0);
    let dual = rng.random_bool(0.5);
    let vib_rate = rng.random_range(4.0..7.0);
    let phase0 = rng.random_range(0.0..2.0 * PI);
    let n = n_samples(duration);
    let fs = SAMPLE_RATE as f64;
    let amps: Vec<f64> = (1..=10).map(|h| 1.0 / h as f64).collect();
    let track = |f: f64| (0..n).map(move |i| f * (1.0 + 0.003 * (2.0 * PI * vib_rate * i as f64 / fs).sin()));
    let mut x = harmonic_from_track(track(f0), &amps, phase0);
    if dual {
        let second = harmonic_from_track(track(f0 * 1.26), &amps, phase0 * 0.5);
        x.iter_mut().zip(second).for_each(|(a, b)| *a += 0.8 * b);
    }
    AudioBuffer::mono(SAMPLE_RATE, normalize_peak(x, 0.5))
}

/// A non-alerting traffic event: engine harmonics with a tyre-noise band.
pub fn other_event(duration: f64, seed: u64) -> AudioBuffer {
    let mut rng = scene_rng(seed, SOURCE_STREAM);
    let f0 = rng.random_range(25.0..70.0);
    let am_rate = rng.random_range(0.3..1.5);
    let band = rng.random_range(500.0..2000.0);
    let n = n_samples(duration);
    let fs = SAMPLE_RATE as f64;
    let amps: Vec<f64> = (1..=24).map(|h| 1.0 / (h as f64).sqrt()).collect();
    let engine = harmonic_from_track((0..n).map(|_| f0), &amps, 0.0);
    // two-pole resonator over white noise
    let r: f64 = 0.995;
    let w = 2.0 * PI * band / fs;
    let (a1, a2) = (2.0 * r * w.cos(), -r * r);
    let (mut y1, mut y2) = (0.0, 0.0);
    let mut tyre = Vec::with_capacity(n);
    for _ in 0..n {
        let e: f64 = StandardNormal.sample(&mut rng);
        let y = e + a1 * y1 + a2 * y2;
        y2 = y1;
        y1 = y;
        tyre.push(y);
    }
    let tyre = normalize_peak(tyre, 1.0);
    let engine = normalize_peak(engine, 1.0);
    let x = (0..n)
        .map(|i| {
            let am = 0.75 + 0.25 * (2.0 * PI * am_rate * i as f64 / fs).sin();
            am * (0.7 * engine[i] + 0.5 * tyre[i])
        })
        .collect();
    AudioBuffer::mono(SAMPLE_RATE, normalize_peak(x, 0.5))
}

/// Target clip of the given class.
pub fn target(class: TargetClass, duration: f64, seed: u64) -> AudioBuffer {
    match class {
        TargetClass::Siren(kind) => siren(kind, duration, seed),
        TargetClass::Horn => horn(duration, seed),
        TargetClass::Other => other_event(duration, seed),
    }
}

/// Stereo traffic background. A low-frequency rumble is shared by both
/// channels; everything above it is independent per channel, as in a
/// diffuse field over a half-metre baseline.
pub fn traffic_noise(duration: f64, seed: u64) -> AudioBuffer {
    let mut rng = scene_rng(seed, NOISE_STREAM);
    let n = n_samples(duration);
    let brown = |rng: &mut rand_chacha::ChaCha8Rng, leak: f64| {
        let mut acc = 0.0;
        (0..n)
            .map(|_| {
                let e: f64 = StandardNormal.sample(rng);
                acc = leak * acc + e;
                acc
            })
            .collect::<Vec<f64>>()
    };
    let rumble = normalize_peak(brown(&mut rng, 0.999), 1.0);
    let channels = (0..2)
        .map(|_| {
            let body = normalize_peak(brown(&mut rng, 0.98), 1.0);
            let hiss = normalize_peak(brown(&mut rng, 0.3), 1.0);
            let x = (0..n)
                .map(|i| 0.6 * rumble[i] + 0.6 * body[i] + 0.25 * hiss[i])
                .collect();
            normalize_peak(x, 0.5)
        })
        .collect();
    AudioBuffer::new(SAMPLE_RATE, channels).expect("equal-length channels")
}
