use rand::Rng;

use crate::audio::AudioBuffer;
use crate::{Error, Result};

/// `10 log10(P_target / P_noise)` with powers as mean squares summed over
/// channels.
pub fn snr_db(target: &AudioBuffer, noise: &AudioBuffer) -> f64 {
    10.0 * (target.power() / noise.power()).log10()
}

/// Scale `noise` so the target-to-noise ratio equals `snr_db`, and add.
/// Returns the mixture and the noise scale factor.
pub fn mix_at_snr(target: &AudioBuffer, noise: &AudioBuffer, snr_db: f64) -> Result<(AudioBuffer, f64)> {
    target.check_compatible(noise)?;
    if !snr_db.is_finite() {
        return Err(Error::Argument(format!("SNR must be finite, got {snr_db}")));
    }
    let pt = target.power();
    let pn = noise.power();
    if !(pt > 0.0) || !(pn > 0.0) {
        return Err(Error::Domain("target and noise must both carry power".into()));
    }
    let scale = (pt / (pn * 10f64.powf(snr_db / 10.0))).sqrt();
    let mixed = target.add(&noise.scaled(scale))?;
    Ok((mixed, scale))
}

/// Crop (at a random offset) or loop a noise clip to `len` samples.
pub fn fit_noise(noise: &AudioBuffer, len: usize, rng: &mut impl Rng) -> Result<AudioBuffer> {
    if noise.is_empty() {
        return Err(Error::Argument("noise clip is empty".into()));
    }
    if noise.len() >= len {
        let start = rng.random_range(0..=noise.len() - len);
        return noise.slice(start, len);
    }
    let channels = noise
        .channels()
        .iter()
        .map(|c| c.iter().copied().cycle().take(len).collect())
        .collect();
    AudioBuffer::new(noise.sample_rate(), channels)
}
