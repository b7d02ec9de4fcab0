//! Gammatone filterbank on the ERB-rate scale and gammatonegram computation.
//!
//! Each channel is the causal FIR `t^(a-1) exp(-2 pi b t) cos(2 pi fc t)`,
//! truncated after `ir_duration` and scaled to unit magnitude response at its
//! centre frequency. Band outputs are integrated over Hamming-windowed
//! analysis windows into a dB-valued channels x time-bins matrix.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use ndarray::Array2;
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::audio::AudioBuffer;
use crate::dsp::{self, FftPair};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterbankConfig {
    pub n_channels: usize,
    /// Lowest centre frequency, Hz.
    pub f_low: f64,
    /// Highest centre frequency, Hz.
    pub f_high: f64,
    pub sample_rate: f64,
    pub filter_order: u32,
    /// Impulse-response truncation length, seconds.
    pub ir_duration: f64,
}

impl Default for FilterbankConfig {
    fn default() -> Self {
        Self {
            n_channels: 64,
            f_low: 50.0,
            f_high: 22050.0,
            sample_rate: 44100.0,
            filter_order: 4,
            ir_duration: 0.075,
        }
    }
}

impl FilterbankConfig {
    pub fn validate(&self) -> Result<()> {
        let ok_range = self.f_low > 0.0
            && self.f_low < self.f_high
            && self.f_high <= self.sample_rate / 2.0
            && self.f_low.is_finite()
            && self.sample_rate.is_finite();
        if !ok_range {
            return Err(Error::Config(format!(
                "need 0 < f_low < f_high <= sample_rate/2, got f_low={} f_high={} sample_rate={}",
                self.f_low, self.f_high, self.sample_rate
            )));
        }
        if self.n_channels < 2 {
            return Err(Error::Config(format!(
                "n_channels must be at least 2, got {}",
                self.n_channels
            )));
        }
        if self.filter_order < 1 {
            return Err(Error::Config("filter_order must be at least 1".into()));
        }
        if !(self.ir_duration > 0.0 && self.ir_duration.is_finite()) {
            return Err(Error::Config(format!(
                "ir_duration must be positive, got {}",
                self.ir_duration
            )));
        }
        if self.ir_len() < 2 {
            return Err(Error::Config("impulse response shorter than two samples".into()));
        }
        Ok(())
    }

    /// Number of impulse-response taps.
    pub fn ir_len(&self) -> usize {
        (self.ir_duration * self.sample_rate).round() as usize
    }
}

/// ERB-rate (number of ERBs below `f`), Glasberg and Moore.
pub fn erb_rate(f: f64) -> f64 {
    21.4 * (0.00437 * f + 1.0).log10()
}

pub fn inverse_erb_rate(e: f64) -> f64 {
    (10f64.powf(e / 21.4) - 1.0) / 0.00437
}

/// Centre frequencies equally spaced in ERB-rate, ascending, with the
/// endpoints pinned to `f_low` and `f_high`.
pub fn erb_center_frequencies(cfg: &FilterbankConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let lo = erb_rate(cfg.f_low);
    let hi = erb_rate(cfg.f_high);
    let n = cfg.n_channels;
    let step = (hi - lo) / (n - 1) as f64;
    let mut freqs: Vec<f64> = (0..n)
        .map(|i| inverse_erb_rate(lo + step * i as f64))
        .collect();
    freqs[0] = cfg.f_low;
    freqs[n - 1] = cfg.f_high;
    Ok(freqs)
}

/// Filter bandwidth `b` for a centre frequency, `1.09 (fc / 9.26449 + 24.7)`.
pub fn gammatone_bandwidth(fc: f64) -> Result<f64> {
    if !(fc >= 0.0) || !fc.is_finite() {
        return Err(Error::Domain(format!(
            "centre frequency must be finite and non-negative, got {fc}"
        )));
    }
    Ok(1.09 * (fc / 9.26449 + 24.7))
}

fn check_in_band(fc: f64, cfg: &FilterbankConfig) -> Result<()> {
    if !(fc >= cfg.f_low && fc <= cfg.f_high) {
        return Err(Error::Domain(format!(
            "centre frequency {fc} Hz outside [{}, {}] Hz",
            cfg.f_low, cfg.f_high
        )));
    }
    Ok(())
}

fn impulse_response(fc: f64, cfg: &FilterbankConfig) -> Result<Vec<f64>> {
    let b = gammatone_bandwidth(fc)?;
    let fs = cfg.sample_rate;
    let power = (cfg.filter_order - 1) as i32;
    let mut ir: Vec<f64> = (0..cfg.ir_len())
        .map(|n| {
            let t = n as f64 / fs;
            t.powi(power) * (-2.0 * PI * b * t).exp() * (2.0 * PI * fc * t).cos()
        })
        .collect();
    let w = 2.0 * PI * fc / fs;
    let response = ir
        .iter()
        .enumerate()
        .fold(Complex64::new(0.0, 0.0), |acc, (n, &g)| {
            acc + Complex64::from_polar(g, -w * n as f64)
        });
    let gain = 1.0 / response.norm();
    ir.iter_mut().for_each(|g| *g *= gain);
    Ok(ir)
}

/// Sampled impulse response of the channel centred at `fc`, scaled to unit
/// magnitude response at `fc`.
pub fn gammatone_impulse_response(fc: f64, cfg: &FilterbankConfig) -> Result<AudioBuffer> {
    cfg.validate()?;
    check_in_band(fc, cfg)?;
    Ok(AudioBuffer::mono(
        cfg.sample_rate as u32,
        impulse_response(fc, cfg)?,
    ))
}

/// Output of one gammatone channel, same length as the input.
pub fn filter_channel(x: &AudioBuffer, fc: f64, cfg: &FilterbankConfig) -> Result<AudioBuffer> {
    if x.is_empty() {
        return Err(Error::Argument("cannot filter an empty signal".into()));
    }
    if !x.is_mono() {
        return Err(Error::Argument("filter_channel expects mono audio".into()));
    }
    cfg.validate()?;
    check_in_band(fc, cfg)?;
    let ir = impulse_response(fc, cfg)?;
    Ok(AudioBuffer::mono(x.sample_rate(), dsp::convolve_same(x.channel(0), &ir)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    #[default]
    Hamming,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GammatonegramConfig {
    /// Span of one analysed sample, seconds.
    pub frame_length: f64,
    /// Time-bin hop, seconds.
    pub hop: f64,
    /// Inner analysis window, seconds.
    pub window_span: f64,
    pub window: Window,
    /// Lower clamp for bin energies, dB.
    pub floor_db: f64,
}

impl Default for GammatonegramConfig {
    fn default() -> Self {
        Self {
            frame_length: 0.5,
            hop: 0.010,
            window_span: 0.025,
            window: Window::Hamming,
            floor_db: -80.0,
        }
    }
}

impl GammatonegramConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.hop > 0.0 && self.hop <= self.frame_length) {
            return Err(Error::Config(format!(
                "need 0 < hop <= frame_length, got hop={} frame_length={}",
                self.hop, self.frame_length
            )));
        }
        if !(self.window_span > 0.0 && self.window_span <= self.frame_length) {
            return Err(Error::Config(format!(
                "need 0 < window_span <= frame_length, got {}",
                self.window_span
            )));
        }
        if !self.floor_db.is_finite() {
            return Err(Error::Config("floor_db must be finite".into()));
        }
        Ok(())
    }

    /// Sample counts of the analysis grid for `n_samples` of audio.
    pub fn layout(&self, sample_rate: f64, n_samples: usize) -> Result<BinLayout> {
        self.validate()?;
        let frame = self.frame_samples(sample_rate);
        if n_samples < frame || n_samples == 0 {
            return Err(Error::Argument(format!(
                "audio of {n_samples} samples is shorter than one {frame}-sample frame"
            )));
        }
        let window = ((self.window_span * sample_rate).round() as usize).max(1);
        let hop = ((self.hop * sample_rate).round() as usize).max(1);
        let n_bins = (n_samples - window) / hop + 1;
        Ok(BinLayout {
            window,
            hop,
            n_bins,
            n_samples,
        })
    }

    pub fn frame_samples(&self, sample_rate: f64) -> usize {
        (self.frame_length * sample_rate).round() as usize
    }
}

/// Placement of time bins over a signal, in samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinLayout {
    pub window: usize,
    pub hop: usize,
    pub n_bins: usize,
    pub n_samples: usize,
}

impl BinLayout {
    pub fn bin_start(&self, n: usize) -> usize {
        n * self.hop
    }

    /// Centre sample of bin `n` (may be fractional).
    pub fn bin_center(&self, n: usize) -> f64 {
        (n * self.hop) as f64 + (self.window as f64 - 1.0) / 2.0
    }
}

/// Band energies in dB, channels (ascending frequency) x time bins.
#[derive(Debug, Clone, PartialEq)]
pub struct Gammatonegram {
    pub energies: Array2<f64>,
    pub center_freqs: Vec<f64>,
    /// Time between bins, seconds.
    pub bin_hop: f64,
    pub floor_db: f64,
}

impl Gammatonegram {
    pub fn n_channels(&self) -> usize {
        self.energies.nrows()
    }

    pub fn n_bins(&self) -> usize {
        self.energies.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.energies.dim()
    }
}

struct Plan {
    fft: FftPair,
    spectra: Vec<Vec<Complex64>>,
}

/// A configured bank of gammatone channels. Transform plans and channel
/// spectra are cached per transform size, so repeated analysis of equally
/// long frames costs one forward and `n_channels` inverse transforms.
pub struct Filterbank {
    cfg: FilterbankConfig,
    center_freqs: Vec<f64>,
    irs: Vec<Vec<f64>>,
    plans: Mutex<HashMap<usize, Arc<Plan>>>,
}

impl std::fmt::Debug for Filterbank {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Filterbank")
            .field("cfg", &self.cfg)
            .field("center_freqs", &self.center_freqs)
            .finish_non_exhaustive()
    }
}

impl Filterbank {
    pub fn new(cfg: FilterbankConfig) -> Result<Self> {
        let center_freqs = erb_center_frequencies(&cfg)?;
        let irs = center_freqs
            .iter()
            .map(|&fc| impulse_response(fc, &cfg))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            cfg,
            center_freqs,
            irs,
            plans: Mutex::new(HashMap::new()),
        })
    }

    pub fn config(&self) -> &FilterbankConfig {
        &self.cfg
    }

    pub fn center_freqs(&self) -> &[f64] {
        &self.center_freqs
    }

    pub fn impulse_responses(&self) -> &[Vec<f64>] {
        &self.irs
    }

    fn plan(&self, len: usize) -> Arc<Plan> {
        let mut plans = self.plans.lock().expect("plan cache poisoned");
        plans
            .entry(len)
            .or_insert_with(|| {
                let fft = FftPair::new(len);
                let spectra = self.irs.iter().map(|ir| fft.forward_real(ir)).collect();
                Arc::new(Plan { fft, spectra })
            })
            .clone()
    }

    /// Per-channel filtered signals, each as long as `x`.
    pub fn analyze(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        if x.is_empty() {
            return Err(Error::Argument("cannot analyse an empty signal".into()));
        }
        let size = (x.len() + self.cfg.ir_len() - 1).next_power_of_two();
        let plan = self.plan(size);
        let xs = plan.fft.forward_real(x);
        Ok(plan
            .spectra
            .par_iter()
            .map(|h| {
                let prod = xs.iter().zip(h).map(|(a, b)| a * b).collect();
                let mut y = plan.fft.inverse_real(prod);
                y.truncate(x.len());
                y
            })
            .collect())
    }

    /// Gammatonegram of a mono signal.
    pub fn gammatonegram(&self, x: &[f64], gg: &GammatonegramConfig) -> Result<Gammatonegram> {
        let layout = gg.layout(self.cfg.sample_rate, x.len())?;
        let bands = self.analyze(x)?;
        self.gammatonegram_from_bands(&bands, gg, &layout)
    }

    /// Gammatonegram from precomputed band outputs.
    pub fn gammatonegram_from_bands(
        &self,
        bands: &[Vec<f64>],
        gg: &GammatonegramConfig,
        layout: &BinLayout,
    ) -> Result<Gammatonegram> {
        if bands.len() != self.center_freqs.len() {
            return Err(Error::Argument(format!(
                "{} band signals for {} channels",
                bands.len(),
                self.center_freqs.len()
            )));
        }
        if bands.iter().any(|b| b.len() != layout.n_samples) {
            return Err(Error::Argument("band signal length does not match layout".into()));
        }
        let window = match gg.window {
            Window::Hamming => dsp::hamming(layout.window),
        };
        let mut energies = Array2::zeros((bands.len(), layout.n_bins));
        for (m, band) in bands.iter().enumerate() {
            for n in 0..layout.n_bins {
                let start = layout.bin_start(n);
                let seg = &band[start..start + layout.window];
                let e = seg
                    .iter()
                    .zip(&window)
                    .map(|(y, w)| (y * w) * (y * w))
                    .sum::<f64>()
                    / layout.window as f64;
                energies[[m, n]] = to_db(e, gg.floor_db);
            }
        }
        Ok(Gammatonegram {
            energies,
            center_freqs: self.center_freqs.clone(),
            bin_hop: layout.hop as f64 / self.cfg.sample_rate,
            floor_db: gg.floor_db,
        })
    }
}

fn to_db(power: f64, floor_db: f64) -> f64 {
    let db = 10.0 * power.log10();
    if db.is_finite() && db > floor_db {
        db
    } else {
        floor_db
    }
}

/// Gammatonegram of a mono buffer under the given configurations.
pub fn gammatonegram(
    x: &AudioBuffer,
    fb: &FilterbankConfig,
    gg: &GammatonegramConfig,
) -> Result<Gammatonegram> {
    if !x.is_mono() {
        return Err(Error::Argument("gammatonegram expects mono audio".into()));
    }
    Filterbank::new(*fb)?.gammatonegram(x.channel(0), gg)
}
