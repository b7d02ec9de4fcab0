//! Direction-of-arrival estimation: GCC-PHAT time differences, conversion to
//! angles, median smoothing of streaming estimates, and evaluation metrics.

mod eval;

pub use eval::{
    evaluate, read_predictions, write_predictions, EvalReport, MedianErrors, OrderPoint, Prediction,
    SnrBucket, HISTOGRAM_BIN_DEG, MEDIAN_ORDERS, SNR_BUCKET_DB,
};

use serde::{Deserialize, Serialize};

use crate::audio::AudioBuffer;
use crate::dsp::FftPair;
use crate::scene::MicGeometry;
use crate::{Error, Result};

/// Peak-to-mean ratio of the weighted correlation below which an estimate
/// is flagged low confidence.
pub const DEFAULT_CONFIDENCE_RATIO: f64 = 4.0;

/// Time differences this far past the physical limit are clamped instead of
/// rejected.
/// Phase-transform regularisation relative to the cross-spectrum peak.
pub const PHAT_FLOOR: f64 = 1e-2;

pub const CLAMP_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ItdEstimate {
    /// Delay of channel 2 behind channel 1, seconds.
    pub itd: f64,
    /// Peak magnitude over the mean magnitude inside the search window.
    pub peak_to_mean: f64,
    pub low_confidence: bool,
}

/// Phase-transform weighted cross-correlation delay of `x2` behind `x1`,
/// searched over `|lag| <= max_itd` and refined by a parabola through the
/// peak and its neighbours.
pub fn gcc_phat_itd(x1: &AudioBuffer, x2: &AudioBuffer, max_itd: f64) -> Result<ItdEstimate> {
    gcc_phat_itd_with(x1, x2, max_itd, DEFAULT_CONFIDENCE_RATIO)
}

pub fn gcc_phat_itd_with(
    x1: &AudioBuffer,
    x2: &AudioBuffer,
    max_itd: f64,
    confidence_ratio: f64,
) -> Result<ItdEstimate> {
    if !x1.is_mono() || !x2.is_mono() {
        return Err(Error::Argument("GCC-PHAT expects two mono signals".into()));
    }
    x1.check_compatible(x2)?;
    if !(max_itd > 0.0 && max_itd.is_finite()) {
        return Err(Error::Argument(format!("max_itd must be positive, got {max_itd}")));
    }
    let (a, b) = (x1.channel(0), x2.channel(0));
    let fs = x1.sample_rate() as f64;
    let n = a.len();
    let is_silent = |x: &[f64]| x.iter().all(|&v| v == 0.0);
    if n == 0 || is_silent(a) || is_silent(b) {
        return Err(Error::NoSignal);
    }
    let max_lag = ((max_itd * fs).ceil() as usize).min(n - 1);
    let size = (2 * n).next_power_of_two();
    let fft = FftPair::new(size);
    let s1 = fft.forward_real(a);
    let s2 = fft.forward_real(b);
    let cross: Vec<_> = s2.iter().zip(&s1).map(|(p, q)| p * q.conj()).collect();
    let peak_mag = cross.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    if !(peak_mag > 0.0) {
        return Err(Error::NoSignal);
    }
    // bins far below the peak carry gating artefacts and filter skirts,
    // not the source; the floor keeps them from voting with full weight
    let eps = PHAT_FLOOR * peak_mag;
    let weighted = cross.iter().map(|c| c / (c.norm() + eps)).collect();
    let cc = fft.inverse_real(weighted);
    let at = |lag: isize| cc[lag.rem_euclid(size as isize) as usize];

    let lags = -(max_lag as isize)..=max_lag as isize;
    let (best, peak) = lags
        .clone()
        .map(|l| (l, at(l)))
        .fold((0, f64::NEG_INFINITY), |acc, (l, v)| if v > acc.1 { (l, v) } else { acc });
    let mean = lags.clone().map(|l| at(l).abs()).sum::<f64>() / (2 * max_lag + 1) as f64;
    let peak_to_mean = if mean > 0.0 { peak.abs() / mean } else { 0.0 };

    let mut offset = 0.0;
    if best.unsigned_abs() < max_lag {
        let (ym, y0, yp) = (at(best - 1), peak, at(best + 1));
        let denom = ym - 2.0 * y0 + yp;
        if denom < 0.0 {
            offset = (0.5 * (ym - yp) / denom).clamp(-0.5, 0.5);
        }
    }
    Ok(ItdEstimate {
        itd: (best as f64 + offset) / fs,
        peak_to_mean,
        low_confidence: peak_to_mean < confidence_ratio,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleEstimate {
    pub alpha_deg: f64,
    /// The time difference lay slightly past the physical limit and was
    /// clamped.
    pub clamped: bool,
}

/// `alpha = acos(itd c / spacing)` in degrees.
pub fn itd_to_angle(itd: f64, geom: &MicGeometry) -> Result<AngleEstimate> {
    geom.validate()?;
    let limit = geom.max_itd();
    if !itd.is_finite() || itd.abs() > (1.0 + CLAMP_TOLERANCE) * limit {
        return Err(Error::Geometry { itd, limit });
    }
    let clamped = itd.abs() > limit;
    let ratio = (itd / limit).clamp(-1.0, 1.0);
    Ok(AngleEstimate {
        alpha_deg: ratio.acos().to_degrees(),
        clamped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoAEstimate {
    pub alpha_deg: f64,
    pub frame_index: usize,
    /// False when no estimate exists, e.g. for an empty mask.
    pub valid: bool,
}

impl DoAEstimate {
    pub fn valid(alpha_deg: f64, frame_index: usize) -> Self {
        Self {
            alpha_deg,
            frame_index,
            valid: true,
        }
    }

    pub fn invalid(frame_index: usize) -> Self {
        Self {
            alpha_deg: f64::NAN,
            frame_index,
            valid: false,
        }
    }
}

/// Median of a non-empty slice; the mean of the two middle values for even
/// lengths.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[k] } else { 0.5 * (v[k - 1] + v[k]) })
}

/// Centred sliding median over the valid estimates of a sequence. Invalid
/// entries stay invalid and are skipped inside windows; windows shrink at
/// the edges.
pub fn median_filter_estimates(estimates: &[DoAEstimate], order: usize) -> Result<Vec<DoAEstimate>> {
    if order == 0 || order.is_multiple_of(2) {
        return Err(Error::Argument(format!("median order must be odd and positive, got {order}")));
    }
    let half = order / 2;
    Ok(estimates
        .iter()
        .enumerate()
        .map(|(i, e)| {
            if !e.valid {
                return *e;
            }
            let lo = i.saturating_sub(half);
            let hi = (i + half).min(estimates.len() - 1);
            let window: Vec<f64> = estimates[lo..=hi]
                .iter()
                .filter(|w| w.valid)
                .map(|w| w.alpha_deg)
                .collect();
            DoAEstimate {
                alpha_deg: median(&window).expect("window holds the centre"),
                ..*e
            }
        })
        .collect())
}
