//! Shared signal-processing primitives: transform-based convolution, window
//! functions and band-limited fractional-position interpolation.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Forward and inverse plans of one transform size.
#[derive(Clone)]
pub struct FftPair {
    pub forward: Arc<dyn Fft<f64>>,
    pub inverse: Arc<dyn Fft<f64>>,
    pub len: usize,
}

impl FftPair {
    pub fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
            len,
        }
    }

    /// Zero-padded forward transform of a real signal.
    pub fn forward_real(&self, x: &[f64]) -> Vec<Complex64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.len];
        for (b, &v) in buf.iter_mut().zip(x) {
            b.re = v;
        }
        self.forward.process(&mut buf);
        buf
    }

    /// Inverse transform, scaled by `1/len`, keeping the real part.
    pub fn inverse_real(&self, mut spectrum: Vec<Complex64>) -> Vec<f64> {
        self.inverse.process(&mut spectrum);
        let scale = 1.0 / self.len as f64;
        spectrum.into_iter().map(|c| c.re * scale).collect()
    }
}

/// Linear convolution `x * h`, truncated to `x.len()` samples (causal alignment).
pub fn convolve_same(x: &[f64], h: &[f64]) -> Vec<f64> {
    if x.is_empty() || h.is_empty() {
        return vec![0.0; x.len()];
    }
    let n = (x.len() + h.len() - 1).next_power_of_two();
    let fft = FftPair::new(n);
    let xs = fft.forward_real(x);
    let hs = fft.forward_real(h);
    let prod = xs.iter().zip(&hs).map(|(a, b)| a * b).collect();
    let mut y = fft.inverse_real(prod);
    y.truncate(x.len());
    y
}

/// Symmetric Hamming window of `n` points.
pub fn hamming(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![1.0],
        _ => (0..n)
            .map(|k| 0.54 - 0.46 * (2.0 * PI * k as f64 / (n - 1) as f64).cos())
            .collect(),
    }
}

/// Mean square of a signal; zero for an empty slice.
pub fn mean_square(x: &[f64]) -> f64 {
    if x.is_empty() {
        0.0
    } else {
        x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64
    }
}

/// Windowed-sinc interpolator evaluated through an oversampled kernel table.
///
/// The kernel is `cutoff * sinc(cutoff * t)` under a Blackman window of
/// `half_width` samples either side; `cutoff` is relative to Nyquist.
#[derive(Debug, Clone)]
pub struct SincInterpolator {
    half_width: usize,
    oversample: usize,
    table: Vec<f64>,
}

impl SincInterpolator {
    pub const DEFAULT_HALF_WIDTH: usize = 32;
    const OVERSAMPLE: usize = 512;

    pub fn new(half_width: usize, cutoff: f64) -> Self {
        let half_width = half_width.max(2);
        let cutoff = cutoff.clamp(1e-3, 1.0);
        let oversample = Self::OVERSAMPLE;
        let n = half_width * oversample + 2;
        let table = (0..n)
            .map(|i| {
                let t = i as f64 / oversample as f64;
                if t >= half_width as f64 {
                    return 0.0;
                }
                let u = t / half_width as f64;
                let window = 0.42 + 0.5 * (PI * u).cos() + 0.08 * (2.0 * PI * u).cos();
                cutoff * sinc(cutoff * t) * window
            })
            .collect();
        Self {
            half_width,
            oversample,
            table,
        }
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    fn kernel(&self, t: f64) -> f64 {
        let pos = t.abs() * self.oversample as f64;
        let i = pos as usize;
        if i + 1 >= self.table.len() {
            return 0.0;
        }
        let frac = pos - i as f64;
        self.table[i] + (self.table[i + 1] - self.table[i]) * frac
    }

    /// Taps for fractional offset `frac` in `[0, 1)`: weights for samples
    /// `base - half_width + 1 ..= base + half_width`, normalized to unit DC gain.
    pub fn taps(&self, frac: f64) -> Vec<f64> {
        let hw = self.half_width as isize;
        let mut taps: Vec<f64> = (-hw + 1..=hw)
            .map(|k| self.kernel(frac - k as f64))
            .collect();
        let sum: f64 = taps.iter().sum();
        if sum.abs() > 1e-12 {
            taps.iter_mut().for_each(|t| *t /= sum);
        }
        taps
    }

    /// Value of the band-limited reconstruction of `x` at fractional index `pos`.
    /// Samples outside `x` count as zero.
    pub fn sample_at(&self, x: &[f64], pos: f64) -> f64 {
        let base = pos.floor();
        let taps = self.taps(pos - base);
        apply_taps(x, base as isize, self.half_width as isize, &taps)
    }

    /// `y[n] = x(n - delay)` for a constant delay in samples.
    pub fn delay(&self, x: &[f64], delay: f64) -> Vec<f64> {
        let shift = delay.floor();
        let frac = delay - shift;
        let hw = self.half_width as isize;
        if frac == 0.0 {
            let s = shift as isize;
            return (0..x.len() as isize)
                .map(|n| {
                    let k = n - s;
                    if k >= 0 && (k as usize) < x.len() {
                        x[k as usize]
                    } else {
                        0.0
                    }
                })
                .collect();
        }
        // position n - delay = (n - shift - 1) + (1 - frac)
        let taps = self.taps(1.0 - frac);
        (0..x.len() as isize)
            .map(|n| apply_taps(x, n - shift as isize - 1, hw, &taps))
            .collect()
    }
}

fn apply_taps(x: &[f64], base: isize, hw: isize, taps: &[f64]) -> f64 {
    let start = base - hw + 1;
    let mut acc = 0.0;
    for (j, &t) in taps.iter().enumerate() {
        let k = start + j as isize;
        if k >= 0 && (k as usize) < x.len() {
            acc += t * x[k as usize];
        }
    }
    acc
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = PI * x;
        px.sin() / px
    }
}

/// Resample `x` from `from_rate` to `to_rate` with the windowed-sinc kernel.
pub fn resample(x: &[f64], from_rate: f64, to_rate: f64) -> Vec<f64> {
    if from_rate == to_rate {
        return x.to_vec();
    }
    let ratio = to_rate / from_rate;
    let interp = SincInterpolator::new(SincInterpolator::DEFAULT_HALF_WIDTH, 0.95 * ratio.min(1.0));
    let n_out = (x.len() as f64 * ratio).round() as usize;
    (0..n_out)
        .map(|n| interp.sample_at(x, n as f64 / ratio))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct_convolve_same(x: &[f64], h: &[f64]) -> Vec<f64> {
        (0..x.len())
            .map(|n| {
                (0..h.len())
                    .filter(|&k| k <= n)
                    .map(|k| h[k] * x[n - k])
                    .sum()
            })
            .collect()
    }

    #[test]
    fn transform_convolution_matches_direct_sum() {
        let x: Vec<f64> = (0..300).map(|i| ((i * 37 % 101) as f64 - 50.0) / 50.0).collect();
        let h: Vec<f64> = (0..41).map(|i| ((i * 13 % 17) as f64 - 8.0) / 8.0).collect();
        let fast = convolve_same(&x, &h);
        let slow = direct_convolve_same(&x, &h);
        let scale = slow.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).abs() <= 1e-6 * scale);
        }
    }

    #[test]
    fn hamming_endpoints_and_peak() {
        let w = hamming(11);
        assert!((w[0] - 0.08).abs() < 1e-12);
        assert!((w[10] - 0.08).abs() < 1e-12);
        assert!((w[5] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn integer_delay_is_a_shift() {
        let interp = SincInterpolator::new(16, 0.95);
        let x: Vec<f64> = (0..50).map(|i| i as f64).collect();
        let y = interp.delay(&x, 3.0);
        assert_eq!(&y[..3], &[0.0, 0.0, 0.0]);
        assert_eq!(&y[3..], &x[..47]);
    }

    #[test]
    fn fractional_delay_of_low_tone_matches_analytic_shift() {
        let interp = SincInterpolator::new(32, 0.95);
        let f = 0.01;
        let x: Vec<f64> = (0..2000).map(|n| (2.0 * PI * f * n as f64).sin()).collect();
        let d = 7.3;
        let y = interp.delay(&x, d);
        for n in 200..1800 {
            let expect = (2.0 * PI * f * (n as f64 - d)).sin();
            assert!((y[n] - expect).abs() < 1e-4, "n={n}");
        }
    }

    #[test]
    fn resample_preserves_tone_frequency() {
        let x: Vec<f64> = (0..48000).map(|n| (2.0 * PI * 1000.0 * n as f64 / 48000.0).sin()).collect();
        let y = resample(&x, 48000.0, 44100.0);
        assert_eq!(y.len(), 44100);
        for n in 1000..2000 {
            let expect = (2.0 * PI * 1000.0 * n as f64 / 44100.0).sin();
            assert!((y[n] - expect).abs() < 1e-3);
        }
    }
}
