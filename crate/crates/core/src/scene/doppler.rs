use super::{MicGeometry, Trajectory};
use crate::audio::AudioBuffer;
use crate::dsp::SincInterpolator;
use crate::{Error, Result};

/// Emission time of the wavefront reaching the array midpoint at `t`,
/// relative to the propagation delay at the clip start: the root of
/// `tau + (r(tau) - r(0)) / c = t`.
pub fn emission_time(traj: &Trajectory, geom: &MicGeometry, t: f64) -> f64 {
    let r0 = traj.distance_at(0.0);
    let c = geom.speed_of_sound;
    let mut tau = t;
    // contraction with factor |v_r| / c < 1
    for _ in 0..100 {
        let next = t - (traj.distance_at(tau) - r0) / c;
        if (next - tau).abs() < 1e-13 {
            return next;
        }
        tau = next;
    }
    tau
}

/// Re-time a mono signal for a moving source. The local playback rate is
/// `c / (c - v_r)` with `v_r` the speed toward the array midpoint; the
/// output keeps the input length and is zero where no emitted signal has
/// arrived yet or the source has fallen silent.
pub fn apply_doppler(x: &AudioBuffer, traj: &Trajectory, geom: &MicGeometry) -> Result<AudioBuffer> {
    if !x.is_mono() {
        return Err(Error::Argument("Doppler expects mono audio".into()));
    }
    geom.validate()?;
    traj.check_covers(x.duration())?;
    let vmax = traj.max_radial_speed();
    if vmax >= geom.speed_of_sound {
        return Err(Error::Domain(format!(
            "radial speed {vmax} m/s reaches the speed of sound {} m/s",
            geom.speed_of_sound
        )));
    }
    if traj.is_range_constant() {
        return Ok(x.clone());
    }
    let fs = x.sample_rate() as f64;
    let interp = SincInterpolator::new(SincInterpolator::DEFAULT_HALF_WIDTH, 0.95);
    let src = x.channel(0);
    let y = (0..x.len())
        .map(|n| {
            let tau = emission_time(traj, geom, n as f64 / fs);
            interp.sample_at(src, tau * fs)
        })
        .collect();
    Ok(AudioBuffer::mono(x.sample_rate(), y))
}
