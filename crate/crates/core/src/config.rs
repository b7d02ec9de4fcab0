//! Run configuration (TOML) and the configuration hash stamped on every
//! derived artefact.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::gammatone::{FilterbankConfig, GammatonegramConfig};
use crate::scene::{MicGeometry, SnrRange};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneDefaults {
    pub snr_min_db: f64,
    pub snr_max_db: f64,
    /// Channel level variation budget, dB.
    pub ild_perturbation_db: f64,
    /// Clip length used when a spec gives none, seconds.
    pub clip_duration: f64,
}

impl Default for SceneDefaults {
    fn default() -> Self {
        Self {
            snr_min_db: -40.0,
            snr_max_db: 10.0,
            ild_perturbation_db: 2.0,
            clip_duration: 5.0,
        }
    }
}

impl SceneDefaults {
    pub fn snr_range(&self) -> SnrRange {
        SnrRange {
            min_db: self.snr_min_db,
            max_db: self.snr_max_db,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaskingConfig {
    /// Local SNR a pixel needs to count as target, dB.
    pub threshold_db: f64,
}

impl Default for MaskingConfig {
    fn default() -> Self {
        Self { threshold_db: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DoaConfig {
    /// Peak-to-mean ratio below which a GCC-PHAT peak is low confidence.
    pub confidence_ratio: f64,
    pub median_order: usize,
}

impl Default for DoaConfig {
    fn default() -> Self {
        Self {
            confidence_ratio: crate::doa::DEFAULT_CONFIDENCE_RATIO,
            median_order: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsConfig {
    pub data_dir: PathBuf,
    pub features_dir: PathBuf,
}

impl Default for PathsConfig {
    fn default() -> Self {
        Self {
            data_dir: "data".into(),
            features_dir: "features".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub filterbank: FilterbankConfig,
    pub gammatonegram: GammatonegramConfig,
    pub geometry: MicGeometry,
    pub scene: SceneDefaults,
    pub masking: MaskingConfig,
    pub doa: DoaConfig,
    pub paths: PathsConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<()> {
        self.filterbank.validate()?;
        self.gammatonegram.validate()?;
        self.geometry.validate()?;
        let s = &self.scene;
        if !(s.snr_min_db <= s.snr_max_db) {
            return Err(Error::Config("scene.snr_min_db exceeds scene.snr_max_db".into()));
        }
        if !(s.ild_perturbation_db >= 0.0) {
            return Err(Error::Config("scene.ild_perturbation_db must be non-negative".into()));
        }
        if !(s.clip_duration >= self.gammatonegram.frame_length) {
            return Err(Error::Config("scene.clip_duration is shorter than one frame".into()));
        }
        if !self.masking.threshold_db.is_finite() {
            return Err(Error::Config("masking.threshold_db must be finite".into()));
        }
        if self.doa.median_order.is_multiple_of(2) {
            return Err(Error::Config("doa.median_order must be odd".into()));
        }
        if !(self.doa.confidence_ratio > 0.0) {
            return Err(Error::Config("doa.confidence_ratio must be positive".into()));
        }
        Ok(())
    }

    pub fn config_hash(&self) -> String {
        config_hash(&self.filterbank, &self.gammatonegram)
    }
}

/// SHA-256 over the canonical JSON of the feature configuration, hex.
pub fn config_hash(fb: &FilterbankConfig, gg: &GammatonegramConfig) -> String {
    let canonical = serde_json::json!({ "filterbank": fb, "gammatonegram": gg });
    hex::encode(Sha256::digest(canonical.to_string().as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let cfg = RunConfig::from_toml("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.filterbank.n_channels, 64);
        assert_eq!(cfg.filterbank.f_low, 50.0);
        assert_eq!(cfg.filterbank.f_high, 22050.0);
        assert_eq!(cfg.gammatonegram.frame_length, 0.5);
        assert_eq!(cfg.scene.snr_range(), SnrRange::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_toml("sed = 1").is_err());
        assert!(RunConfig::from_toml("[filterbank]\nchannels = 32").is_err());
    }

    #[test]
    fn toml_round_trip() {
        let mut cfg = RunConfig::default();
        cfg.seed = 17;
        cfg.filterbank.n_channels = 32;
        assert_eq!(RunConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn hash_tracks_feature_config_only() {
        let a = RunConfig::default();
        let mut b = a.clone();
        b.seed = 99;
        assert_eq!(a.config_hash(), b.config_hash());
        b.gammatonegram.hop = 0.02;
        assert_ne!(a.config_hash(), b.config_hash());
        assert_eq!(a.config_hash().len(), 64);
    }

    #[test]
    fn invalid_values_are_config_errors() {
        assert!(matches!(RunConfig::from_toml("[doa]\nmedian_order = 4"), Err(Error::Config(_))));
        assert!(matches!(
            RunConfig::from_toml("[filterbank]\nf_low = 30000.0"),
            Err(Error::Config(_))
        ));
    }
}
