//! Sampled waveforms and 16-bit PCM WAV I/O.

use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use crate::dsp;
use crate::{Error, Result, SAMPLE_RATE};

/// One or more equally long channels sampled at a common rate.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    sample_rate: u32,
    channels: Vec<Vec<f64>>,
}

impl AudioBuffer {
    pub fn new(sample_rate: u32, channels: Vec<Vec<f64>>) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::Argument("sample rate must be positive".into()));
        }
        let Some(first) = channels.first() else {
            return Err(Error::Argument("audio needs at least one channel".into()));
        };
        if channels.iter().any(|c| c.len() != first.len()) {
            return Err(Error::Argument("channels differ in length".into()));
        }
        Ok(Self {
            sample_rate,
            channels,
        })
    }

    pub fn mono(sample_rate: u32, samples: Vec<f64>) -> Self {
        Self {
            sample_rate,
            channels: vec![samples],
        }
    }

    pub fn stereo(sample_rate: u32, left: Vec<f64>, right: Vec<f64>) -> Result<Self> {
        Self::new(sample_rate, vec![left, right])
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    /// Samples per channel.
    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn duration(&self) -> f64 {
        self.len() as f64 / self.sample_rate as f64
    }

    pub fn channel(&self, i: usize) -> &[f64] {
        &self.channels[i]
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    pub fn into_channels(self) -> Vec<Vec<f64>> {
        self.channels
    }

    pub fn is_mono(&self) -> bool {
        self.channels.len() == 1
    }

    pub fn is_stereo(&self) -> bool {
        self.channels.len() == 2
    }

    /// Mean square over the clip, summed across channels.
    pub fn power(&self) -> f64 {
        self.channels.iter().map(|c| dsp::mean_square(c)).sum()
    }

    pub fn peak(&self) -> f64 {
        self.channels
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, gain: f64) -> Self {
        Self {
            sample_rate: self.sample_rate,
            channels: self
                .channels
                .iter()
                .map(|c| c.iter().map(|v| v * gain).collect())
                .collect(),
        }
    }

    /// `len` samples starting at `start`, per channel.
    pub fn slice(&self, start: usize, len: usize) -> Result<Self> {
        if start + len > self.len() {
            return Err(Error::Argument(format!(
                "slice {}..{} past end of {} samples",
                start,
                start + len,
                self.len()
            )));
        }
        Ok(Self {
            sample_rate: self.sample_rate,
            channels: self
                .channels
                .iter()
                .map(|c| c[start..start + len].to_vec())
                .collect(),
        })
    }

    /// Element-wise sum; shapes and rates must agree.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(Self {
            sample_rate: self.sample_rate,
            channels: self
                .channels
                .iter()
                .zip(&other.channels)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
                .collect(),
        })
    }

    pub fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.sample_rate != other.sample_rate {
            return Err(Error::Argument(format!(
                "sample rates differ: {} vs {}",
                self.sample_rate, other.sample_rate
            )));
        }
        if self.n_channels() != other.n_channels() || self.len() != other.len() {
            return Err(Error::Argument(format!(
                "shapes differ: {}x{} vs {}x{}",
                self.n_channels(),
                self.len(),
                other.n_channels(),
                other.len()
            )));
        }
        Ok(())
    }
}

/// 16-bit full-scale divisor; reading and writing use the same constant so
/// a read/write cycle reproduces the file bit for bit.
const PCM16_SCALE: f64 = 32768.0;

fn quantize(v: f64) -> i16 {
    (v * PCM16_SCALE).round().clamp(i16::MIN as f64, i16::MAX as f64) as i16
}

/// Write as 16-bit PCM, interleaved.
pub fn write_wav(path: &Path, audio: &AudioBuffer) -> Result<()> {
    let spec = WavSpec {
        channels: audio.n_channels() as u16,
        sample_rate: audio.sample_rate,
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let wav_err = |source| Error::Wav {
        path: path.to_path_buf(),
        source,
    };
    let mut writer = WavWriter::create(path, spec).map_err(wav_err)?;
    for n in 0..audio.len() {
        for c in &audio.channels {
            writer.write_sample(quantize(c[n])).map_err(wav_err)?;
        }
    }
    writer.finalize().map_err(wav_err)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ReadOptions {
    /// Convert other sample rates to 44.1 kHz instead of rejecting them.
    pub resample: bool,
}

/// Read a 16-bit PCM WAV file (mono or stereo) at 44.1 kHz.
pub fn read_wav(path: &Path, opts: ReadOptions) -> Result<AudioBuffer> {
    let wav_err = |source| Error::Wav {
        path: path.to_path_buf(),
        source,
    };
    let mut reader = WavReader::open(path).map_err(wav_err)?;
    let spec = reader.spec();
    if spec.sample_format != SampleFormat::Int || spec.bits_per_sample != 16 {
        return Err(Error::Format(format!(
            "{}: expected 16-bit integer PCM, found {}-bit {:?}",
            path.display(),
            spec.bits_per_sample,
            spec.sample_format
        )));
    }
    let n_ch = spec.channels as usize;
    if !(1..=2).contains(&n_ch) {
        return Err(Error::Format(format!(
            "{}: {} channels, expected mono or stereo",
            path.display(),
            n_ch
        )));
    }
    let mut channels = vec![Vec::with_capacity(reader.len() as usize / n_ch); n_ch];
    for (i, s) in reader.samples::<i16>().enumerate() {
        channels[i % n_ch].push(s.map_err(wav_err)? as f64 / PCM16_SCALE);
    }
    let min_len = channels.iter().map(Vec::len).min().unwrap_or(0);
    channels.iter_mut().for_each(|c| c.truncate(min_len));

    if spec.sample_rate != SAMPLE_RATE {
        if !opts.resample {
            return Err(Error::Format(format!(
                "{}: sample rate {} Hz, expected {} Hz (enable resampling to convert)",
                path.display(),
                spec.sample_rate,
                SAMPLE_RATE
            )));
        }
        channels = channels
            .iter()
            .map(|c| dsp::resample(c, spec.sample_rate as f64, SAMPLE_RATE as f64))
            .collect();
    }
    AudioBuffer::new(SAMPLE_RATE, channels)
}
