//! Scene specification files (JSON).
//!
//! ```json
//! {
//!   "scenes": [
//!     { "class": "siren", "subclass": "wail", "duration": 2.0, "snr_db": -5,
//!       "target": { "kind": "synth" },
//!       "noise": { "kind": "wav", "path": "noise/street.wav" },
//!       "trajectory": { "type": "static", "alpha_deg": 40, "distance": 20 },
//!       "echoes": [{ "delay": 0.02, "gain": 0.3 }], "seed": 3 }
//!   ],
//!   "random": { "count": 30, "duration": 5.0, "snr_db": [-20, 10] }
//! }
//! ```
//!
//! Relative WAV paths resolve against the spec file's directory. The
//! `random` block expands into class-balanced scenes drawn from the run
//! seed.

use std::path::{Path, PathBuf};

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::audio::{read_wav, AudioBuffer, ReadOptions};
use crate::config::SceneDefaults;
use crate::scene::sources::{target, traffic_noise};
use crate::scene::{scene_rng, Echo, EventClass, SceneSpec, SirenKind, TargetClass, Trajectory, Waypoint};
use crate::{Error, Result};

const RANDOM_STREAM: u64 = 101;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SourceSpec {
    #[default]
    Synth,
    Wav {
        path: PathBuf,
        #[serde(default)]
        resample: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum TrajectorySpec {
    Static {
        alpha_deg: f64,
        distance: f64,
    },
    Radial {
        alpha_deg: f64,
        start_distance: f64,
        /// Positive toward the array, m/s.
        approach_speed: f64,
    },
    PassBy {
        alpha_start: f64,
        alpha_end: f64,
        distance: f64,
        velocity: f64,
    },
    Waypoints {
        waypoints: Vec<Waypoint>,
        #[serde(default)]
        velocity: f64,
    },
}

impl TrajectorySpec {
    pub fn build(&self, duration: f64) -> Result<Trajectory> {
        match self {
            TrajectorySpec::Static { alpha_deg, distance } => {
                let t = Trajectory::stationary(*alpha_deg, *distance);
                t.validate()?;
                Ok(t)
            }
            TrajectorySpec::Radial {
                alpha_deg,
                start_distance,
                approach_speed,
            } => Trajectory::radial(*alpha_deg, *start_distance, *approach_speed, duration),
            TrajectorySpec::PassBy {
                alpha_start,
                alpha_end,
                distance,
                velocity,
            } => Trajectory::pass_by(*alpha_start, *alpha_end, *distance, *velocity, duration),
            TrajectorySpec::Waypoints { waypoints, velocity } => Trajectory::new(waypoints.clone(), *velocity),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitScene {
    pub class: EventClass,
    /// Siren pattern; defaults to yelp.
    #[serde(default)]
    pub subclass: Option<SirenKind>,
    /// Seconds; defaults to the configured clip duration. WAV targets are
    /// cut to this length.
    #[serde(default)]
    pub duration: Option<f64>,
    pub snr_db: f64,
    #[serde(default)]
    pub target: SourceSpec,
    #[serde(default)]
    pub noise: SourceSpec,
    pub trajectory: TrajectorySpec,
    #[serde(default)]
    pub echoes: Vec<Echo>,
    /// Channel level variation budget, dB; defaults to the configured value.
    #[serde(default)]
    pub ild_db: Option<f64>,
    /// Defaults to a value derived from the run seed and the scene index.
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RandomBlock {
    pub count: usize,
    pub duration: f64,
    pub snr_db: [f64; 2],
    /// Share of scenes with a moving source.
    pub moving_fraction: f64,
    /// Probability of each of up to two echoes.
    pub echo_probability: f64,
    pub distance: [f64; 2],
    pub speed: [f64; 2],
}

impl Default for RandomBlock {
    fn default() -> Self {
        Self {
            count: 0,
            duration: 5.0,
            snr_db: [-20.0, 10.0],
            moving_fraction: 0.0,
            echo_probability: 0.3,
            distance: [10.0, 60.0],
            speed: [5.0, 20.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpecFile {
    pub scenes: Vec<ExplicitScene>,
    pub random: Option<RandomBlock>,
}

impl SpecFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path, e))
    }

    /// Explicit scenes first, then the expanded random block.
    pub fn scenes(&self, run_seed: u64) -> Vec<ExplicitScene> {
        let mut out = self.scenes.clone();
        if let Some(r) = &self.random {
            out.extend(expand_random(r, run_seed));
        }
        out
    }

    /// Resolve every scene into an in-memory spec. Failures name the scene.
    pub fn resolve(&self, base_dir: &Path, defaults: &SceneDefaults, run_seed: u64) -> Result<Vec<SceneSpec>> {
        self.scenes(run_seed)
            .iter()
            .enumerate()
            .map(|(i, s)| {
                resolve_scene(s, i, base_dir, defaults, run_seed)
                    .map_err(|e| Error::Validation(format!("spec {i}: {e}")))
            })
            .collect()
    }
}

fn derived_seed(run_seed: u64, index: usize) -> u64 {
    let mut rng = scene_rng(run_seed, 1000 + index as u64);
    rng.next_u64()
}

fn resolve_scene(
    s: &ExplicitScene,
    index: usize,
    base_dir: &Path,
    defaults: &SceneDefaults,
    run_seed: u64,
) -> Result<SceneSpec> {
    let seed = s.seed.unwrap_or_else(|| derived_seed(run_seed, index));
    let class = match s.class {
        EventClass::Siren => TargetClass::Siren(s.subclass.unwrap_or(SirenKind::Yelp)),
        EventClass::Horn => TargetClass::Horn,
        EventClass::Other => TargetClass::Other,
    };
    if s.subclass.is_some() && s.class != EventClass::Siren {
        return Err(Error::Validation("subclass is only meaningful for sirens".into()));
    }
    let duration = s.duration.unwrap_or(defaults.clip_duration);
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(Error::Validation(format!("duration must be positive, got {duration}")));
    }
    let load = |path: &Path, resample: bool| -> Result<AudioBuffer> {
        let p = if path.is_absolute() { path.to_path_buf() } else { base_dir.join(path) };
        if !p.exists() {
            return Err(Error::Validation(format!("file not found: {}", p.display())));
        }
        read_wav(&p, ReadOptions { resample })
    };
    let target_clip = match &s.target {
        SourceSpec::Synth => target(class, duration, seed),
        SourceSpec::Wav { path, resample } => {
            let a = load(path, *resample)?;
            let mono = if a.is_mono() {
                a
            } else {
                let l = a.channel(0).iter().zip(a.channel(1)).map(|(x, y)| 0.5 * (x + y)).collect();
                AudioBuffer::mono(a.sample_rate(), l)
            };
            let n = ((duration * mono.sample_rate() as f64).round() as usize).min(mono.len());
            mono.slice(0, n)?
        }
    };
    let noise_clip = match &s.noise {
        SourceSpec::Synth => traffic_noise(duration, seed),
        SourceSpec::Wav { path, resample } => {
            let a = load(path, *resample)?;
            if a.is_mono() {
                AudioBuffer::stereo(a.sample_rate(), a.channel(0).to_vec(), a.channel(0).to_vec())?
            } else {
                a
            }
        }
    };
    Ok(SceneSpec {
        target_class: class,
        trajectory: s.trajectory.build(target_clip.duration())?,
        target_clip,
        noise_clip,
        snr_db: s.snr_db,
        echoes: s.echoes.clone(),
        ild_perturbation: s.ild_db.unwrap_or(defaults.ild_perturbation_db),
        seed,
    })
}

/// Class-balanced scenes: classes rotate siren, horn, other and siren
/// patterns rotate within the siren share.
pub fn expand_random(r: &RandomBlock, run_seed: u64) -> Vec<ExplicitScene> {
    let mut rng = scene_rng(run_seed, RANDOM_STREAM);
    let span = |rng: &mut rand_chacha::ChaCha8Rng, [lo, hi]: [f64; 2]| {
        if hi > lo { rng.random_range(lo..=hi) } else { lo }
    };
    (0..r.count)
        .map(|i| {
            let class = EventClass::ALL[i % 3];
            let subclass = (class == EventClass::Siren).then(|| SirenKind::ALL[(i / 3) % 3]);
            let snr_db = span(&mut rng, r.snr_db);
            let distance = span(&mut rng, r.distance);
            let alpha = rng.random_range(0.0..=180.0);
            let trajectory = if rng.random_bool(r.moving_fraction.clamp(0.0, 1.0)) {
                let speed = span(&mut rng, r.speed);
                if rng.random_bool(0.5) {
                    let end = rng.random_range(0.0..=180.0);
                    TrajectorySpec::PassBy {
                        alpha_start: alpha,
                        alpha_end: end,
                        distance,
                        velocity: speed,
                    }
                } else {
                    // stay at least a few metres out
                    let max_speed = ((distance - 3.0) / r.duration).max(0.0);
                    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                    TrajectorySpec::Radial {
                        alpha_deg: alpha,
                        start_distance: distance,
                        approach_speed: if sign > 0.0 { speed.min(max_speed) } else { -speed },
                    }
                }
            } else {
                TrajectorySpec::Static {
                    alpha_deg: alpha,
                    distance,
                }
            };
            let mut echoes = Vec::new();
            for _ in 0..2 {
                if rng.random_bool(r.echo_probability.clamp(0.0, 1.0)) {
                    echoes.push(Echo {
                        delay: rng.random_range(0.005..0.08),
                        gain: rng.random_range(0.1..0.5),
                    });
                }
            }
            ExplicitScene {
                class,
                subclass,
                duration: Some(r.duration),
                snr_db,
                target: SourceSpec::Synth,
                noise: SourceSpec::Synth,
                trajectory,
                echoes,
                ild_db: None,
                seed: Some(rng.next_u64()),
            }
        })
        .collect()
}
