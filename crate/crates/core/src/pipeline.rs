//! Frame-level processing shared by the command-line tool and the test
//! suites: stereo gammatonegrams, oracle masks, masked cross-gammatonegrams
//! and the mask-then-GCC-PHAT localiser.

use crate::audio::AudioBuffer;
use crate::config::RunConfig;
use crate::doa::{gcc_phat_itd_with, itd_to_angle, DEFAULT_CONFIDENCE_RATIO};
use crate::gammatone::{Filterbank, FilterbankConfig, Gammatonegram, GammatonegramConfig};
use crate::masking::{
    apply_mask, cross_gammatonegram, ideal_mask, reconstruct_denoised_waveform, CrossGammatonegram,
    MaskedGammatonegram, SegmentationMask,
};
use crate::scene::{EventClass, MicGeometry};
use crate::{Error, Result};

/// Band outputs and gammatonegram of each microphone channel.
#[derive(Debug, Clone)]
pub struct StereoAnalysis {
    pub bands: [Vec<Vec<f64>>; 2],
    pub grams: [Gammatonegram; 2],
}

/// Why a frame produced no direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoEstimate {
    EmptyMask,
    NoSignal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Localisation {
    pub alpha_deg: f64,
    pub itd: f64,
    pub low_confidence: bool,
    /// The raw time difference exceeded the array limit slightly.
    pub clamped: bool,
}

pub struct FrameProcessor {
    fb: Filterbank,
    gg: GammatonegramConfig,
    geom: MicGeometry,
    threshold_db: f64,
    confidence_ratio: f64,
}

impl FrameProcessor {
    pub fn new(fb: FilterbankConfig, gg: GammatonegramConfig, geom: MicGeometry, threshold_db: f64) -> Result<Self> {
        gg.validate()?;
        geom.validate()?;
        Ok(Self {
            fb: Filterbank::new(fb)?,
            gg,
            geom,
            threshold_db,
            confidence_ratio: DEFAULT_CONFIDENCE_RATIO,
        })
    }

    pub fn from_config(cfg: &RunConfig) -> Result<Self> {
        let mut p = Self::new(cfg.filterbank, cfg.gammatonegram, cfg.geometry, cfg.masking.threshold_db)?;
        p.confidence_ratio = cfg.doa.confidence_ratio;
        Ok(p)
    }

    pub fn filterbank(&self) -> &Filterbank {
        &self.fb
    }

    pub fn gammatonegram_config(&self) -> &GammatonegramConfig {
        &self.gg
    }

    pub fn geometry(&self) -> &MicGeometry {
        &self.geom
    }

    fn check_stereo(x: &AudioBuffer) -> Result<()> {
        if !x.is_stereo() {
            return Err(Error::Argument("expected a stereo frame".into()));
        }
        Ok(())
    }

    pub fn analyze_stereo(&self, x: &AudioBuffer) -> Result<StereoAnalysis> {
        Self::check_stereo(x)?;
        let layout = self.gg.layout(x.sample_rate() as f64, x.len())?;
        let b0 = self.fb.analyze(x.channel(0))?;
        let b1 = self.fb.analyze(x.channel(1))?;
        let g0 = self.fb.gammatonegram_from_bands(&b0, &self.gg, &layout)?;
        let g1 = self.fb.gammatonegram_from_bands(&b1, &self.gg, &layout)?;
        Ok(StereoAnalysis {
            bands: [b0, b1],
            grams: [g0, g1],
        })
    }

    /// Per-channel gammatonegrams only.
    pub fn stereo_gammatonegrams(&self, x: &AudioBuffer) -> Result<[Gammatonegram; 2]> {
        Self::check_stereo(x)?;
        Ok([
            self.fb.gammatonegram(x.channel(0), &self.gg)?,
            self.fb.gammatonegram(x.channel(1), &self.gg)?,
        ])
    }

    /// Ideal masks of each channel from the separated components.
    pub fn oracle_masks(
        &self,
        clean: &AudioBuffer,
        noise: &AudioBuffer,
        target: EventClass,
    ) -> Result<[SegmentationMask; 2]> {
        clean.check_compatible(noise)?;
        let c = self.stereo_gammatonegrams(clean)?;
        let n = self.stereo_gammatonegrams(noise)?;
        Ok([
            ideal_mask(&c[0], &n[0], self.threshold_db, target)?,
            ideal_mask(&c[1], &n[1], self.threshold_db, target)?,
        ])
    }

    /// Masked, normalised gammatonegrams of both channels and their
    /// cross-gammatonegram.
    pub fn crossgram(
        &self,
        noisy: &[Gammatonegram; 2],
        masks: &[SegmentationMask; 2],
    ) -> Result<([MaskedGammatonegram; 2], CrossGammatonegram)> {
        let m0 = apply_mask(&noisy[0], &masks[0])?;
        let m1 = apply_mask(&noisy[1], &masks[1])?;
        let c = cross_gammatonegram(m0.values.view(), m1.values.view())?;
        Ok(([m0, m1], c))
    }

    /// Gate each channel's noisy bands by its mask, resynthesise, and
    /// estimate the direction from the two denoised signals.
    pub fn localize(
        &self,
        noisy_bands: &[Vec<Vec<f64>>; 2],
        masks: &[SegmentationMask; 2],
        sample_rate: u32,
    ) -> Result<std::result::Result<Localisation, NoEstimate>> {
        if masks.iter().any(SegmentationMask::is_empty) {
            return Ok(Err(NoEstimate::EmptyMask));
        }
        let y0 = reconstruct_denoised_waveform(&noisy_bands[0], &masks[0], &self.gg, sample_rate)?;
        let y1 = reconstruct_denoised_waveform(&noisy_bands[1], &masks[1], &self.gg, sample_rate)?;
        let est = match gcc_phat_itd_with(&y0, &y1, self.geom.max_itd(), self.confidence_ratio) {
            Ok(e) => e,
            Err(Error::NoSignal) => return Ok(Err(NoEstimate::NoSignal)),
            Err(e) => return Err(e),
        };
        let angle = itd_to_angle(est.itd, &self.geom)?;
        Ok(Ok(Localisation {
            alpha_deg: angle.alpha_deg,
            itd: est.itd,
            low_confidence: est.low_confidence,
            clamped: angle.clamped,
        }))
    }

    /// Oracle-mask localisation of one stereo frame from its separated
    /// target and noise; the mixture is their sum.
    pub fn localize_oracle(
        &self,
        clean: &AudioBuffer,
        noise: &AudioBuffer,
        target: EventClass,
    ) -> Result<std::result::Result<Localisation, NoEstimate>> {
        Self::check_stereo(clean)?;
        clean.check_compatible(noise)?;
        let layout = self.gg.layout(clean.sample_rate() as f64, clean.len())?;
        let mut noisy_bands: [Vec<Vec<f64>>; 2] = Default::default();
        let mut masks = Vec::with_capacity(2);
        for ch in 0..2 {
            let cb = self.fb.analyze(clean.channel(ch))?;
            let nb = self.fb.analyze(noise.channel(ch))?;
            let cg = self.fb.gammatonegram_from_bands(&cb, &self.gg, &layout)?;
            let ng = self.fb.gammatonegram_from_bands(&nb, &self.gg, &layout)?;
            masks.push(ideal_mask(&cg, &ng, self.threshold_db, target)?);
            // the filterbank is linear, so the mixture's bands are the sum
            noisy_bands[ch] = cb
                .into_iter()
                .zip(nb)
                .map(|(c, n)| c.into_iter().zip(n).map(|(a, b)| a + b).collect())
                .collect();
        }
        let masks: [SegmentationMask; 2] = masks.try_into().expect("two channels");
        self.localize(&noisy_bands, &masks, clean.sample_rate())
    }
}
