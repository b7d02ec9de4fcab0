use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::{
    add_echoes, apply_distance_attenuation, apply_doppler, fit_noise, mix_at_snr, scene_rng,
    spatialize, MicGeometry, SceneRecord, SceneSpec, SnrRange,
};
use crate::audio::{write_wav, AudioBuffer};
use crate::manifest::{
    frame_id, ClipFiles, ClipRecord, FrameRecord, Manifest, StorageGains, SCHEMA_VERSION,
};
use crate::{Error, Result};

const NOISE_OFFSET_STREAM: u64 = 3;

/// Peak level files are written at.
const STORAGE_PEAK: f64 = 0.9;

/// Run one spec through Doppler, attenuation, spatialisation, echoes and
/// mixing. `frame_length` sets the per-frame ground-truth grid.
pub fn synthesize_scene(spec: &SceneSpec, geom: &MicGeometry, frame_length: f64) -> Result<SceneRecord> {
    if !(frame_length > 0.0) {
        return Err(Error::Argument("frame_length must be positive".into()));
    }
    let len = spec.target_clip.len();
    let mut rng = scene_rng(spec.seed, NOISE_OFFSET_STREAM);
    let noise = fit_noise(&spec.noise_clip, len, &mut rng)?;

    let moved = apply_doppler(&spec.target_clip, &spec.trajectory, geom)?;
    let moved = apply_distance_attenuation(&moved, &spec.trajectory)?;
    let stereo = spatialize(&moved, &spec.trajectory, geom, spec.ild_perturbation, spec.seed)?;
    let clean = add_echoes(&stereo, &spec.echoes)?;
    let (mixed, noise_scale) = mix_at_snr(&clean, &noise, spec.snr_db)?;
    let noise_used = noise.scaled(noise_scale);

    let n_frames = (clean.duration() / frame_length + 1e-9).floor() as usize;
    let alpha_per_frame = (0..n_frames)
        .map(|k| spec.trajectory.alpha_at((k as f64 + 0.5) * frame_length))
        .collect();
    Ok(SceneRecord {
        mixed,
        clean_target_stereo: clean,
        noise_used,
        alpha_per_frame,
        class_label: spec.target_class,
        snr_db: spec.snr_db,
        seed: spec.seed,
        noise_scale,
    })
}

/// Layout of a dataset directory.
#[derive(Debug, Clone)]
pub struct DatasetPaths {
    pub root: PathBuf,
}

impl DatasetPaths {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn manifest(&self) -> PathBuf {
        self.root.join("manifest.json")
    }

    pub fn clips_dir(&self) -> PathBuf {
        self.root.join("clips")
    }

    /// Manifest-relative file names of clip `index`.
    pub fn clip_files(index: usize) -> ClipFiles {
        ClipFiles {
            mixed: format!("clips/{index:06}_mixed.wav"),
            target: format!("clips/{index:06}_target.wav"),
            noise: format!("clips/{index:06}_noise.wav"),
        }
    }
}

fn storage_gain(a: &AudioBuffer) -> f64 {
    let peak = a.peak();
    if peak > 0.0 {
        STORAGE_PEAK / peak
    } else {
        1.0
    }
}

/// Synthesise every spec and write clips plus `manifest.json` under `out`.
/// Each clip is cut into whole frames of `frame_length` seconds. Output is
/// a pure function of the specs: parallel synthesis never changes a byte.
pub fn generate_dataset(
    specs: &[SceneSpec],
    geom: &MicGeometry,
    snr_range: SnrRange,
    frame_length: f64,
    config_hash: &str,
    out: &Path,
) -> Result<Manifest> {
    geom.validate()?;
    for (i, s) in specs.iter().enumerate() {
        s.validate(snr_range)
            .map_err(|e| Error::Validation(format!("spec {i}: {e}")))?;
    }
    let paths = DatasetPaths::new(out);
    let clips_dir = paths.clips_dir();
    std::fs::create_dir_all(&clips_dir).map_err(|e| Error::io(&clips_dir, e))?;

    let clips: Vec<(ClipRecord, Vec<FrameRecord>)> = specs
        .par_iter()
        .enumerate()
        .map(|(i, spec)| {
            write_clip(i, spec, geom, frame_length, out).map_err(|e| match e {
                Error::Io { path, source } => Error::Io {
                    path: PathBuf::from(format!("spec {i}: {}", path.display())),
                    source,
                },
                other => Error::Validation(format!("spec {i}: {other}")),
            })
        })
        .collect::<Result<_>>()?;

    let mut manifest = Manifest {
        schema_version: SCHEMA_VERSION.into(),
        sample_rate: crate::SAMPLE_RATE,
        frame_length,
        config_hash: config_hash.into(),
        geometry: *geom,
        clips: Vec::with_capacity(clips.len()),
        frames: Vec::new(),
        split: None,
    };
    for (clip, frames) in clips {
        manifest.clips.push(clip);
        manifest.frames.extend(frames);
    }
    manifest.save(&paths.manifest())?;
    Ok(manifest)
}

fn write_clip(
    index: usize,
    spec: &SceneSpec,
    geom: &MicGeometry,
    frame_length: f64,
    out: &Path,
) -> Result<(ClipRecord, Vec<FrameRecord>)> {
    let rec = synthesize_scene(spec, geom, frame_length)?;
    let files = DatasetPaths::clip_files(index);
    let gains = StorageGains {
        mixed: storage_gain(&rec.mixed),
        target: storage_gain(&rec.clean_target_stereo),
        noise: storage_gain(&rec.noise_used),
    };
    write_wav(&out.join(&files.mixed), &rec.mixed.scaled(gains.mixed))?;
    write_wav(&out.join(&files.target), &rec.clean_target_stereo.scaled(gains.target))?;
    write_wav(&out.join(&files.noise), &rec.noise_used.scaled(gains.noise))?;

    let class = rec.class_label.event_class();
    let frame_samples = (frame_length * rec.mixed.sample_rate() as f64).round() as usize;
    let frames = rec
        .alpha_per_frame
        .iter()
        .enumerate()
        .map(|(k, &alpha)| FrameRecord {
            id: frame_id(index, k),
            clip: index,
            frame_index: k,
            start_sample: k * frame_samples,
            n_samples: frame_samples,
            class,
            snr_db: rec.snr_db,
            alpha_deg: alpha,
            seed: rec.seed,
            files: files.clone(),
            split: None,
        })
        .collect();
    let clip = ClipRecord {
        index,
        class,
        subclass: rec.class_label.subclass().map(String::from),
        snr_db: rec.snr_db,
        seed: rec.seed,
        n_samples: rec.mixed.len(),
        noise_scale: rec.noise_scale,
        files,
        storage_gains: gains,
    };
    Ok((clip, frames))
}
