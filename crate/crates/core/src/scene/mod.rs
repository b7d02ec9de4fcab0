//! Labelled stereo scene synthesis.
//!
//! A mono target clip is pushed through motion-induced Doppler, distance
//! attenuation, two-microphone spatialisation (time and level differences)
//! and discrete echoes, then mixed with stereo traffic noise at a requested
//! SNR. Every random choice is drawn from the scene's seed.

mod dataset;
mod doppler;
mod mix;
pub mod sources;
mod spatial;

pub use dataset::{generate_dataset, synthesize_scene, DatasetPaths};
pub use doppler::{apply_doppler, emission_time};
pub use mix::{fit_noise, mix_at_snr, snr_db};
pub use spatial::{add_echoes, apply_distance_attenuation, spatialize};

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::audio::AudioBuffer;
use crate::{Error, Result};

/// Two omnidirectional microphones on a horizontal axis. Channel 1 sits on
/// the 0 degree side, channel 2 on the 180 degree side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MicGeometry {
    /// Microphone separation, metres.
    pub spacing: f64,
    /// m/s
    pub speed_of_sound: f64,
}

impl Default for MicGeometry {
    fn default() -> Self {
        Self {
            spacing: 0.5,
            speed_of_sound: 343.0,
        }
    }
}

impl MicGeometry {
    pub fn validate(&self) -> Result<()> {
        if !(self.spacing > 0.0 && self.spacing.is_finite()) {
            return Err(Error::Config(format!("mic spacing must be positive, got {}", self.spacing)));
        }
        if !(self.speed_of_sound > 0.0 && self.speed_of_sound.is_finite()) {
            return Err(Error::Config(format!(
                "speed of sound must be positive, got {}",
                self.speed_of_sound
            )));
        }
        Ok(())
    }

    /// Largest possible inter-channel delay, `spacing / c`, seconds.
    pub fn max_itd(&self) -> f64 {
        self.spacing / self.speed_of_sound
    }

    /// Delay of channel 2 behind channel 1 for a far-field source at `alpha_deg`.
    pub fn itd(&self, alpha_deg: f64) -> f64 {
        self.max_itd() * alpha_deg.to_radians().cos()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Waypoint {
    /// Seconds from the clip start.
    pub time: f64,
    /// Direction of arrival, degrees in [0, 180].
    pub alpha_deg: f64,
    /// Distance to the array midpoint, metres.
    pub distance: f64,
}

/// Source motion: direction and distance interpolated linearly between
/// waypoints and held constant outside them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Trajectory {
    pub waypoints: Vec<Waypoint>,
    /// Nominal source speed along the path, m/s.
    pub velocity: f64,
}

impl Trajectory {
    pub fn new(waypoints: Vec<Waypoint>, velocity: f64) -> Result<Self> {
        let t = Self { waypoints, velocity };
        t.validate()?;
        Ok(t)
    }

    pub fn stationary(alpha_deg: f64, distance: f64) -> Self {
        Self {
            waypoints: vec![Waypoint {
                time: 0.0,
                alpha_deg,
                distance,
            }],
            velocity: 0.0,
        }
    }

    /// Straight-line motion along the line of sight at fixed direction.
    /// Positive `approach_speed` moves the source toward the array.
    pub fn radial(alpha_deg: f64, start_distance: f64, approach_speed: f64, duration: f64) -> Result<Self> {
        Self::new(
            vec![
                Waypoint {
                    time: 0.0,
                    alpha_deg,
                    distance: start_distance,
                },
                Waypoint {
                    time: duration,
                    alpha_deg,
                    distance: start_distance - approach_speed * duration,
                },
            ],
            approach_speed.abs(),
        )
    }

    /// Sweep in direction at constant range; the angular rate follows from
    /// the tangential speed, `v / r` rad/s.
    pub fn pass_by(alpha_start: f64, alpha_end: f64, distance: f64, velocity: f64, duration: f64) -> Result<Self> {
        let max_sweep = (velocity / distance * duration).to_degrees();
        let sweep = (alpha_end - alpha_start).clamp(-max_sweep, max_sweep);
        Self::new(
            vec![
                Waypoint {
                    time: 0.0,
                    alpha_deg: alpha_start,
                    distance,
                },
                Waypoint {
                    time: duration,
                    alpha_deg: alpha_start + sweep,
                    distance,
                },
            ],
            velocity,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.waypoints.is_empty() {
            return Err(Error::Validation("trajectory has no waypoints".into()));
        }
        for w in &self.waypoints {
            if !(0.0..=180.0).contains(&w.alpha_deg) {
                return Err(Error::Validation(format!(
                    "waypoint direction {} outside [0, 180] degrees",
                    w.alpha_deg
                )));
            }
            if !(w.distance > 0.0 && w.distance.is_finite()) || !w.time.is_finite() {
                return Err(Error::Validation(format!(
                    "waypoint distance must be positive, got {}",
                    w.distance
                )));
            }
        }
        if self.waypoints.windows(2).any(|p| p[1].time <= p[0].time) {
            return Err(Error::Validation("waypoint times must increase strictly".into()));
        }
        if !(self.velocity >= 0.0 && self.velocity.is_finite()) {
            return Err(Error::Validation(format!("velocity must be non-negative, got {}", self.velocity)));
        }
        Ok(())
    }

    /// A single waypoint covers any duration; otherwise the waypoints must
    /// span `[0, duration]`.
    pub fn covers(&self, duration: f64) -> bool {
        match (self.waypoints.first(), self.waypoints.last()) {
            (Some(_), Some(_)) if self.waypoints.len() == 1 => true,
            (Some(first), Some(last)) => first.time <= 0.0 && last.time >= duration - 1e-9,
            _ => false,
        }
    }

    pub(crate) fn check_covers(&self, duration: f64) -> Result<()> {
        self.validate()?;
        if !self.covers(duration) {
            return Err(Error::Validation(format!(
                "trajectory does not cover the {duration:.3} s clip"
            )));
        }
        Ok(())
    }

    fn segment(&self, t: f64) -> Option<(&Waypoint, &Waypoint)> {
        self.waypoints
            .windows(2)
            .find(|p| t >= p[0].time && t <= p[1].time)
            .map(|p| (&p[0], &p[1]))
    }

    fn interpolate(&self, t: f64, field: impl Fn(&Waypoint) -> f64) -> f64 {
        let first = &self.waypoints[0];
        let last = &self.waypoints[self.waypoints.len() - 1];
        if t <= first.time {
            return field(first);
        }
        if t >= last.time {
            return field(last);
        }
        let (a, b) = self.segment(t).expect("t inside waypoint span");
        let u = (t - a.time) / (b.time - a.time);
        field(a) + (field(b) - field(a)) * u
    }

    pub fn alpha_at(&self, t: f64) -> f64 {
        self.interpolate(t, |w| w.alpha_deg)
    }

    pub fn distance_at(&self, t: f64) -> f64 {
        self.interpolate(t, |w| w.distance)
    }

    /// Speed toward the array midpoint (positive when approaching), m/s.
    pub fn radial_velocity_at(&self, t: f64) -> f64 {
        match self.segment(t) {
            Some((a, b)) => -(b.distance - a.distance) / (b.time - a.time),
            None => 0.0,
        }
    }

    pub fn max_radial_speed(&self) -> f64 {
        self.waypoints
            .windows(2)
            .map(|p| ((p[1].distance - p[0].distance) / (p[1].time - p[0].time)).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_range_constant(&self) -> bool {
        self.waypoints.iter().all(|w| w.distance == self.waypoints[0].distance)
    }

    pub fn is_direction_constant(&self) -> bool {
        self.waypoints.iter().all(|w| w.alpha_deg == self.waypoints[0].alpha_deg)
    }
}

/// Three-way event label shared by masks, classifiers and metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventClass {
    Siren,
    Horn,
    Other,
}

impl EventClass {
    pub const ALL: [EventClass; 3] = [EventClass::Siren, EventClass::Horn, EventClass::Other];

    pub fn index(self) -> usize {
        match self {
            EventClass::Siren => 0,
            EventClass::Horn => 1,
            EventClass::Other => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EventClass::Siren => "siren",
            EventClass::Horn => "horn",
            EventClass::Other => "other",
        }
    }

    /// Classes whose sources are localised.
    pub fn is_alerting(self) -> bool {
        self != EventClass::Other
    }
}

impl fmt::Display for EventClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EventClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "siren" => Ok(EventClass::Siren),
            "horn" => Ok(EventClass::Horn),
            "other" => Ok(EventClass::Other),
            _ => Err(Error::Validation(format!("unknown class {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SirenKind {
    Yelp,
    Wail,
    HiLow,
}

impl SirenKind {
    pub const ALL: [SirenKind; 3] = [SirenKind::Yelp, SirenKind::Wail, SirenKind::HiLow];

    pub fn as_str(self) -> &'static str {
        match self {
            SirenKind::Yelp => "yelp",
            SirenKind::Wail => "wail",
            SirenKind::HiLow => "hi_low",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TargetClass {
    Siren(SirenKind),
    Horn,
    Other,
}

impl TargetClass {
    pub fn event_class(self) -> EventClass {
        match self {
            TargetClass::Siren(_) => EventClass::Siren,
            TargetClass::Horn => EventClass::Horn,
            TargetClass::Other => EventClass::Other,
        }
    }

    pub fn subclass(self) -> Option<&'static str> {
        match self {
            TargetClass::Siren(k) => Some(k.as_str()),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Echo {
    /// seconds
    pub delay: f64,
    /// linear, in (0, 1)
    pub gain: f64,
}

/// Allowed SNR interval for scene specs, dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnrRange {
    pub min_db: f64,
    pub max_db: f64,
}

impl Default for SnrRange {
    fn default() -> Self {
        Self {
            min_db: -40.0,
            max_db: 10.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SceneSpec {
    pub target_class: TargetClass,
    /// Mono source signal.
    pub target_clip: AudioBuffer,
    /// Stereo background; looped or cropped to the target length.
    pub noise_clip: AudioBuffer,
    pub snr_db: f64,
    pub trajectory: Trajectory,
    pub echoes: Vec<Echo>,
    /// Bound on direction-dependent and random channel gain variation, dB.
    pub ild_perturbation: f64,
    pub seed: u64,
}

impl SceneSpec {
    pub fn validate(&self, snr_range: SnrRange) -> Result<()> {
        if !(snr_range.min_db..=snr_range.max_db).contains(&self.snr_db) {
            return Err(Error::Validation(format!(
                "SNR {} dB outside [{}, {}] dB",
                self.snr_db, snr_range.min_db, snr_range.max_db
            )));
        }
        if !self.target_clip.is_mono() {
            return Err(Error::Validation("target clip must be mono".into()));
        }
        if !self.noise_clip.is_stereo() {
            return Err(Error::Validation("noise clip must be stereo".into()));
        }
        if self.target_clip.sample_rate() != self.noise_clip.sample_rate() {
            return Err(Error::Validation("target and noise sample rates differ".into()));
        }
        if self.target_clip.is_empty() || self.noise_clip.is_empty() {
            return Err(Error::Validation("empty target or noise clip".into()));
        }
        if !(self.ild_perturbation >= 0.0 && self.ild_perturbation.is_finite()) {
            return Err(Error::Validation("ild_perturbation must be non-negative".into()));
        }
        spatial::validate_echoes(&self.echoes, self.target_clip.duration())?;
        self.trajectory.check_covers(self.target_clip.duration())
    }
}

/// One synthesised example with its components and per-frame ground truth.
#[derive(Debug, Clone)]
pub struct SceneRecord {
    pub mixed: AudioBuffer,
    /// Spatialised target before mixing.
    pub clean_target_stereo: AudioBuffer,
    /// Noise after SNR scaling.
    pub noise_used: AudioBuffer,
    /// Direction at each frame midpoint, degrees.
    pub alpha_per_frame: Vec<f64>,
    pub class_label: TargetClass,
    pub snr_db: f64,
    pub seed: u64,
    pub noise_scale: f64,
}

/// Independent random stream `stream` of a scene seed.
pub(crate) fn scene_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
