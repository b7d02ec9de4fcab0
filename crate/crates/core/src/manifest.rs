//! Dataset manifest: one JSON document describing clips, their audio files
//! and the per-frame ground truth. All paths are relative to the manifest.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::audio::{read_wav, AudioBuffer, ReadOptions};
use crate::scene::{EventClass, MicGeometry};
use crate::{Error, Result};

/// `major.minor`; readers reject a newer major version.
pub const SCHEMA_VERSION: &str = "1.0";
const SUPPORTED_MAJOR: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub schema_version: String,
    pub sample_rate: u32,
    /// Seconds of audio per frame record.
    pub frame_length: f64,
    /// Hash of the filterbank and gammatonegram configuration.
    pub config_hash: String,
    pub geometry: MicGeometry,
    pub clips: Vec<ClipRecord>,
    pub frames: Vec<FrameRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<SplitInfo>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClipFiles {
    pub mixed: String,
    pub target: String,
    pub noise: String,
}

/// Gain each stored file was written with (`stored = signal * gain`), so
/// the quantised files keep full resolution regardless of SNR.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StorageGains {
    pub mixed: f64,
    pub target: f64,
    pub noise: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClipRecord {
    pub index: usize,
    pub class: EventClass,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subclass: Option<String>,
    pub snr_db: f64,
    pub seed: u64,
    pub n_samples: usize,
    pub noise_scale: f64,
    pub files: ClipFiles,
    pub storage_gains: StorageGains,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameRecord {
    pub id: String,
    pub clip: usize,
    pub frame_index: usize,
    pub start_sample: usize,
    pub n_samples: usize,
    pub class: EventClass,
    pub snr_db: f64,
    pub alpha_deg: f64,
    pub seed: u64,
    pub files: ClipFiles,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<Split>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitInfo {
    pub seed: u64,
    pub train_fraction: f64,
    pub by_clip: bool,
}

pub fn frame_id(clip: usize, frame: usize) -> String {
    format!("c{clip:06}_f{frame:04}")
}

/// Clip audio with storage gains undone.
#[derive(Debug, Clone)]
pub struct ClipAudio {
    pub mixed: AudioBuffer,
    pub target: AudioBuffer,
    pub noise: AudioBuffer,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
        let version = value
            .get("schema_version")
            .and_then(|v| v.as_str())
            .ok_or_else(|| Error::Format(format!("{}: missing schema_version", path.display())))?;
        check_version(version).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        serde_json::from_value(value).map_err(|e| Error::json(path, e))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self).map_err(|e| Error::json(path, e))?;
        text.push('\n');
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn frame(&self, id: &str) -> Option<&FrameRecord> {
        self.frames.iter().find(|f| f.id == id)
    }

    pub fn load_clip(&self, base: &Path, clip: usize) -> Result<ClipAudio> {
        let rec = self
            .clips
            .get(clip)
            .ok_or_else(|| Error::Validation(format!("manifest has no clip {clip}")))?;
        let load = |rel: &str, gain: f64| -> Result<AudioBuffer> {
            let a = read_wav(&base.join(rel), ReadOptions::default())?;
            Ok(a.scaled(1.0 / gain))
        };
        Ok(ClipAudio {
            mixed: load(&rec.files.mixed, rec.storage_gains.mixed)?,
            target: load(&rec.files.target, rec.storage_gains.target)?,
            noise: load(&rec.files.noise, rec.storage_gains.noise)?,
        })
    }

    /// Directory manifest-relative paths resolve against.
    pub fn base_dir(path: &Path) -> PathBuf {
        path.parent().map(Path::to_path_buf).unwrap_or_default()
    }
}

fn check_version(version: &str) -> std::result::Result<(), String> {
    let major: u32 = version
        .split('.')
        .next()
        .and_then(|m| m.parse().ok())
        .ok_or_else(|| format!("malformed schema_version {version:?}"))?;
    if major > SUPPORTED_MAJOR {
        return Err(format!(
            "schema version {version} is newer than supported major {SUPPORTED_MAJOR}"
        ));
    }
    Ok(())
}
