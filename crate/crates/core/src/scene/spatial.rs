use rand::Rng;

use super::{scene_rng, Echo, MicGeometry, Trajectory};
use crate::audio::AudioBuffer;
use crate::dsp::SincInterpolator;
use crate::{Error, Result};

const JITTER_STREAM: u64 = 2;

/// Direction each channel's level pattern points to, degrees.
const MIC_AXES: [f64; 2] = [0.0, 180.0];

/// Channel gains in dB at direction `alpha_deg`: half the budget follows a
/// cardioid pattern around each microphone axis, half is fixed jitter.
fn channel_gain_db(alpha_deg: f64, ild_db: f64, jitter: [f64; 2]) -> [f64; 2] {
    let mut g = [0.0; 2];
    for ch in 0..2 {
        // 0.5 (1 + cos) mapped from [0, 1] onto [-1, 1]
        let pattern = (alpha_deg - MIC_AXES[ch]).to_radians().cos();
        g[ch] = 0.5 * ild_db * pattern + 0.5 * ild_db * jitter[ch];
    }
    g
}

fn db_to_gain(db: f64) -> f64 {
    10f64.powf(db / 20.0)
}

/// Render a mono source to the two microphones. Channel 2 lags channel 1 by
/// `(spacing / c) cos(alpha)` (a negative value delays channel 1 instead)
/// through band-limited fractional delay; each channel also receives a
/// smooth direction-dependent gain plus a seeded constant perturbation, the
/// two together bounded by `ild_perturbation` dB.
pub fn spatialize(
    x: &AudioBuffer,
    traj: &Trajectory,
    geom: &MicGeometry,
    ild_perturbation: f64,
    seed: u64,
) -> Result<AudioBuffer> {
    if !x.is_mono() {
        return Err(Error::Argument("spatialize expects mono audio".into()));
    }
    geom.validate()?;
    traj.check_covers(x.duration())?;
    if !(ild_perturbation >= 0.0 && ild_perturbation.is_finite()) {
        return Err(Error::Argument("ild_perturbation must be non-negative".into()));
    }
    let mut rng = scene_rng(seed, JITTER_STREAM);
    let jitter = [rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)];

    let fs = x.sample_rate() as f64;
    let src = x.channel(0);
    let interp = SincInterpolator::new(SincInterpolator::DEFAULT_HALF_WIDTH, 0.95);
    let delays = |alpha: f64| {
        let mut itd = geom.itd(alpha) * fs;
        if itd.abs() < 1e-9 {
            itd = 0.0;
        }
        [(-itd).max(0.0), itd.max(0.0)]
    };

    let channels: Vec<Vec<f64>> = if traj.is_direction_constant() {
        let alpha = traj.alpha_at(0.0);
        let d = delays(alpha);
        let g = channel_gain_db(alpha, ild_perturbation, jitter);
        (0..2)
            .map(|ch| {
                let gain = db_to_gain(g[ch]);
                interp.delay(src, d[ch]).into_iter().map(|v| v * gain).collect()
            })
            .collect()
    } else {
        let mut out = [Vec::with_capacity(x.len()), Vec::with_capacity(x.len())];
        for n in 0..x.len() {
            let alpha = traj.alpha_at(n as f64 / fs);
            let d = delays(alpha);
            let g = channel_gain_db(alpha, ild_perturbation, jitter);
            for ch in 0..2 {
                out[ch].push(db_to_gain(g[ch]) * interp.sample_at(src, n as f64 - d[ch]));
            }
        }
        out.into()
    };
    AudioBuffer::new(x.sample_rate(), channels)
}

/// Scale by `r(0) / r(t)`: level follows the inverse distance, normalised to
/// the starting range.
pub fn apply_distance_attenuation(x: &AudioBuffer, traj: &Trajectory) -> Result<AudioBuffer> {
    traj.check_covers(x.duration())?;
    if traj.is_range_constant() {
        return Ok(x.clone());
    }
    let fs = x.sample_rate() as f64;
    let r0 = traj.distance_at(0.0);
    let channels = x
        .channels()
        .iter()
        .map(|c| {
            c.iter()
                .enumerate()
                .map(|(n, v)| v * r0 / traj.distance_at(n as f64 / fs))
                .collect()
        })
        .collect();
    AudioBuffer::new(x.sample_rate(), channels)
}

pub(crate) fn validate_echoes(echoes: &[Echo], duration: f64) -> Result<()> {
    for e in echoes {
        if !(e.gain > 0.0 && e.gain < 1.0) {
            return Err(Error::Validation(format!("echo gain {} outside (0, 1)", e.gain)));
        }
        if !(e.delay > 0.0 && e.delay < duration) {
            return Err(Error::Validation(format!(
                "echo delay {} s outside (0, {duration}) s",
                e.delay
            )));
        }
    }
    Ok(())
}

/// `x + sum_k gain_k * x(t - delay_k)`, delays rounded to whole samples,
/// tails cut at the input length.
pub fn add_echoes(x: &AudioBuffer, echoes: &[Echo]) -> Result<AudioBuffer> {
    validate_echoes(echoes, x.duration())?;
    let fs = x.sample_rate() as f64;
    let channels = x
        .channels()
        .iter()
        .map(|c| {
            let mut out = c.clone();
            for e in echoes {
                let shift = (e.delay * fs).round() as usize;
                for n in shift..c.len() {
                    out[n] += e.gain * c[n - shift];
                }
            }
            out
        })
        .collect();
    AudioBuffer::new(x.sample_rate(), channels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::mean_square;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn noise(n: usize, seed: u64) -> AudioBuffer {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        AudioBuffer::mono(44100, (0..n).map(|_| StandardNormal.sample(&mut rng)).collect())
    }

    /// Lag of the time-domain cross-correlation peak, brute force.
    fn xcorr_lag(a: &[f64], b: &[f64], max_lag: isize) -> isize {
        (-max_lag..=max_lag)
            .max_by(|&l1, &l2| {
                let c = |l: isize| -> f64 {
                    (0..a.len() as isize)
                        .filter(|&n| n + l >= 0 && ((n + l) as usize) < b.len())
                        .map(|n| a[n as usize] * b[(n + l) as usize])
                        .sum()
                };
                c(l1).partial_cmp(&c(l2)).unwrap()
            })
            .unwrap()
    }

    #[test]
    fn broadside_source_has_no_delay() {
        let x = noise(4000, 1);
        let y = spatialize(&x, &Trajectory::stationary(90.0, 10.0), &MicGeometry::default(), 2.0, 5).unwrap();
        let ratio = y.channel(1)[100] / y.channel(0)[100];
        for n in 0..4000 {
            assert!((y.channel(1)[n] - ratio * y.channel(0)[n]).abs() < 1e-12);
        }
    }

    #[test]
    fn endfire_delays_match_geometry() {
        let geom = MicGeometry::default();
        let x = noise(8000, 2);
        for (alpha, expect) in [(0.0, 64isize), (180.0, -64)] {
            let y = spatialize(&x, &Trajectory::stationary(alpha, 10.0), &geom, 0.0, 1).unwrap();
            assert_eq!(xcorr_lag(y.channel(0), y.channel(1), 80), expect);
            assert_eq!((geom.itd(alpha) * 44100.0).round() as isize, expect);
        }
    }

    #[test]
    fn level_differences_stay_within_budget() {
        let x = noise(4000, 3);
        for seed in 0..20 {
            for alpha in [0.0, 45.0, 90.0, 170.0] {
                let traj = Trajectory::stationary(alpha, 10.0);
                let y = spatialize(&x, &traj, &MicGeometry::default(), 3.0, seed).unwrap();
                let flat = spatialize(&x, &traj, &MicGeometry::default(), 0.0, seed).unwrap();
                for ch in 0..2 {
                    let db = 10.0 * (mean_square(y.channel(ch)) / mean_square(flat.channel(ch))).log10();
                    assert!(db.abs() <= 3.0 + 1e-9, "alpha {alpha} ch {ch}: {db}");
                }
            }
        }
    }

    #[test]
    fn moving_source_sweeps_delay() {
        let geom = MicGeometry::default();
        let x = noise(44100, 4);
        let traj = Trajectory::new(
            vec![
                super::super::Waypoint { time: 0.0, alpha_deg: 0.0, distance: 10.0 },
                super::super::Waypoint { time: 1.0, alpha_deg: 180.0, distance: 10.0 },
            ],
            30.0,
        )
        .unwrap();
        let y = spatialize(&x, &traj, &geom, 0.0, 0).unwrap();
        let head = xcorr_lag(&y.channel(0)[..2000], &y.channel(1)[..2000], 80);
        let tail = xcorr_lag(&y.channel(0)[42000..], &y.channel(1)[42000..], 80);
        assert!(head > 55, "{head}");
        assert!(tail < -55, "{tail}");
    }

    #[test]
    fn echo_of_an_impulse() {
        let mut x = vec![0.0; 1000];
        x[10] = 1.0;
        let a = AudioBuffer::stereo(44100, x.clone(), x).unwrap();
        let d = 100.0 / 44100.0;
        let y = add_echoes(&a, &[Echo { delay: d, gain: 0.4 }]).unwrap();
        for ch in 0..2 {
            let nz: Vec<(usize, f64)> = y.channel(ch).iter().copied().enumerate().filter(|(_, v)| *v != 0.0).collect();
            assert_eq!(nz, vec![(10, 1.0), (110, 0.4)]);
        }
        assert_eq!(add_echoes(&a, &[]).unwrap(), a);
    }

    #[test]
    fn echo_energy_bound_and_validation() {
        let x = noise(5000, 5);
        let a = AudioBuffer::stereo(44100, x.channel(0).to_vec(), x.channel(0).iter().map(|v| -v).collect()).unwrap();
        let echoes = [Echo { delay: 0.01, gain: 0.5 }, Echo { delay: 0.03, gain: 0.25 }];
        let y = add_echoes(&a, &echoes).unwrap();
        assert!(y.power() <= (1.0 + 0.75f64).powi(2) * a.power());
        assert!(matches!(add_echoes(&a, &[Echo { delay: 0.01, gain: 1.0 }]), Err(Error::Validation(_))));
        assert!(matches!(add_echoes(&a, &[Echo { delay: 1.0, gain: 0.5 }]), Err(Error::Validation(_))));
    }

    #[test]
    fn attenuation_follows_inverse_distance() {
        let x = AudioBuffer::mono(44100, vec![1.0; 44100]);
        let traj = Trajectory::radial(90.0, 40.0, 20.0, 1.0).unwrap();
        let y = apply_distance_attenuation(&x, &traj).unwrap();
        assert!((y.channel(0)[22050] - 40.0 / 30.0).abs() < 1e-9);
    }
}
