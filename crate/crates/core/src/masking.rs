//! Segmentation masks over gammatonegram grids, masked normalisation, the
//! two-dimensional cross-gammatonegram and mask-gated waveform
//! reconstruction.

use ndarray::{Array2, ArrayView2, Zip};
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::audio::AudioBuffer;
use crate::gammatone::{Gammatonegram, GammatonegramConfig};
use crate::scene::EventClass;
use crate::{Error, Result};

/// Length of the linear ramps at mask transitions, seconds.
pub const CROSSFADE: f64 = 0.005;

/// Per-pixel class labels plus the class whose pixels form the binary view.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationMask {
    pub labels: Array2<EventClass>,
    pub target: EventClass,
}

impl SegmentationMask {
    pub fn new(labels: Array2<EventClass>, target: EventClass) -> Self {
        Self { labels, target }
    }

    /// Every pixel set to `target`.
    pub fn full(shape: (usize, usize), target: EventClass) -> Self {
        Self::new(Array2::from_elem(shape, target), target)
    }

    /// 1 where the label equals the target class.
    pub fn binary(&self) -> Array2<bool> {
        self.labels.mapv(|c| c == self.target)
    }

    pub fn shape(&self) -> (usize, usize) {
        self.labels.dim()
    }

    pub fn count(&self) -> usize {
        self.labels.iter().filter(|&&c| c == self.target).count()
    }

    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }

    /// Labels as class indices (siren 0, horn 1, other 2).
    pub fn to_indices(&self) -> Array2<f64> {
        self.labels.mapv(|c| c.index() as f64)
    }

    pub fn from_indices(values: &Array2<f64>, target: EventClass) -> Result<Self> {
        let mut labels = Array2::from_elem(values.dim(), EventClass::Other);
        for (l, &v) in labels.iter_mut().zip(values) {
            *l = (v >= 0.0 && v.fract() == 0.0)
                .then(|| EventClass::from_index(v as usize))
                .flatten()
                .ok_or_else(|| Error::Format(format!("invalid mask label {v}")))?;
        }
        Ok(Self::new(labels, target))
    }

    /// The same labels viewed through a different target class.
    pub fn retarget(&self, target: EventClass) -> Self {
        Self::new(self.labels.clone(), target)
    }
}

fn check_shapes(a: (usize, usize), b: (usize, usize), what: &str) -> Result<()> {
    if a != b {
        return Err(Error::Argument(format!("{what}: shapes {a:?} and {b:?} differ")));
    }
    Ok(())
}

/// Label a pixel `target` where the clean energy is above the floor and at
/// least `threshold_db` over the noise energy; `Other` elsewhere.
pub fn ideal_mask(
    clean: &Gammatonegram,
    noise: &Gammatonegram,
    threshold_db: f64,
    target: EventClass,
) -> Result<SegmentationMask> {
    check_shapes(clean.shape(), noise.shape(), "ideal_mask")?;
    let floor = clean.floor_db;
    let labels = Zip::from(&clean.energies)
        .and(&noise.energies)
        .map_collect(|&c, &n| {
            if c > floor && c >= n + threshold_db {
                target
            } else {
                EventClass::Other
            }
        });
    Ok(SegmentationMask::new(labels, target))
}

/// Masked gammatonegram in linear amplitude units, scaled to a maximum of 1.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskedGammatonegram {
    pub values: Array2<f64>,
}

/// dB energies to linear amplitude, zero outside the mask, divided by the
/// largest surviving value.
pub fn apply_mask(noisy: &Gammatonegram, mask: &SegmentationMask) -> Result<MaskedGammatonegram> {
    check_shapes(noisy.shape(), mask.shape(), "apply_mask")?;
    apply_mask_linear(&noisy.energies.mapv(|db| 10f64.powf(db / 20.0)), mask)
}

/// Mask and normalise values that are already linear.
pub fn apply_mask_linear(linear: &Array2<f64>, mask: &SegmentationMask) -> Result<MaskedGammatonegram> {
    check_shapes(linear.dim(), mask.shape(), "apply_mask")?;
    let binary = mask.binary();
    let mut values = Zip::from(linear)
        .and(&binary)
        .map_collect(|&v, &keep| if keep { v } else { 0.0 });
    let max = values.iter().copied().fold(0.0f64, f64::max);
    if !(max > 0.0) {
        return Err(Error::EmptyMask);
    }
    values.mapv_inplace(|v| v / max);
    Ok(MaskedGammatonegram { values })
}

/// Full 2-D cross-correlation. Row `p + M - 1`, column `l + N - 1` holds
/// lag `(p, l)`, frequency lag first.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossGammatonegram {
    pub values: Array2<f64>,
    /// Shape of the correlated inputs.
    pub input_shape: (usize, usize),
}

impl CrossGammatonegram {
    pub fn at(&self, p: isize, l: isize) -> f64 {
        let (m, n) = self.input_shape;
        self.values[[(p + m as isize - 1) as usize, (l + n as isize - 1) as usize]]
    }

    pub fn lag_of(&self, row: usize, col: usize) -> (isize, isize) {
        let (m, n) = self.input_shape;
        (row as isize - m as isize + 1, col as isize - n as isize + 1)
    }

    /// Lag of the largest value; the first one in row-major order on ties.
    pub fn argmax_lag(&self) -> (isize, isize) {
        let mut best = (0, 0);
        let mut max = f64::NEG_INFINITY;
        for ((r, c), &v) in self.values.indexed_iter() {
            if v > max {
                max = v;
                best = (r, c);
            }
        }
        self.lag_of(best.0, best.1)
    }
}

fn fft2(data: &mut Array2<Complex64>, planner: &mut FftPlanner<f64>, inverse: bool) {
    let (rows, cols) = data.dim();
    let row_fft = if inverse { planner.plan_fft_inverse(cols) } else { planner.plan_fft_forward(cols) };
    let col_fft = if inverse { planner.plan_fft_inverse(rows) } else { planner.plan_fft_forward(rows) };
    for mut row in data.rows_mut() {
        let mut buf = row.to_vec();
        row_fft.process(&mut buf);
        row.iter_mut().zip(buf).for_each(|(d, s)| *d = s);
    }
    for mut col in data.columns_mut() {
        let mut buf = col.to_vec();
        col_fft.process(&mut buf);
        col.iter_mut().zip(buf).for_each(|(d, s)| *d = s);
    }
}

/// `c(p, l) = sum_{m,n} g1(m, n) g2(m - p, n - l)` over all lags, through
/// zero-padded 2-D transforms. If `g2` is `g1` moved by `(dm, dn)`, the
/// peak sits at lag `(-dm, -dn)`.
pub fn cross_gammatonegram(g1: ArrayView2<f64>, g2: ArrayView2<f64>) -> Result<CrossGammatonegram> {
    check_shapes(g1.dim(), g2.dim(), "cross_gammatonegram")?;
    let (m, n) = g1.dim();
    if m == 0 || n == 0 {
        return Err(Error::Argument("cross_gammatonegram of an empty matrix".into()));
    }
    let (rows, cols) = (2 * m - 1, 2 * n - 1);
    let pad = |g: ArrayView2<f64>| {
        let mut a = Array2::<Complex64>::zeros((rows, cols));
        for ((i, j), &v) in g.indexed_iter() {
            a[[i, j]] = Complex64::new(v, 0.0);
        }
        a
    };
    let mut planner = FftPlanner::new();
    let mut a = pad(g1);
    let mut b = pad(g2);
    fft2(&mut a, &mut planner, false);
    fft2(&mut b, &mut planner, false);
    Zip::from(&mut a).and(&b).for_each(|x, y| *x *= y.conj());
    fft2(&mut a, &mut planner, true);
    let scale = 1.0 / (rows * cols) as f64;
    // circular index p mod rows lands at output row p + m - 1
    let values = Array2::from_shape_fn((rows, cols), |(r, c)| {
        let pr = (r + rows - (m - 1)) % rows;
        let pc = (c + cols - (n - 1)) % cols;
        a[[pr, pc]].re * scale
    });
    Ok(CrossGammatonegram {
        values,
        input_shape: (m, n),
    })
}

/// Gate each band by its mask row and sum the bands. Every sample follows
/// the bin whose centre is nearest; gate edges are smoothed into linear
/// ramps of [`CROSSFADE`] seconds.
pub fn reconstruct_denoised_waveform(
    band_outputs: &[Vec<f64>],
    mask: &SegmentationMask,
    gg: &GammatonegramConfig,
    sample_rate: u32,
) -> Result<AudioBuffer> {
    let Some(first) = band_outputs.first() else {
        return Err(Error::Argument("no band outputs".into()));
    };
    if band_outputs.iter().any(|b| b.len() != first.len()) {
        return Err(Error::Argument("band outputs differ in length".into()));
    }
    let len = first.len();
    let layout = gg.layout(sample_rate as f64, len)?;
    if mask.shape() != (band_outputs.len(), layout.n_bins) {
        return Err(Error::Argument(format!(
            "mask grid {:?} does not match {} bands x {} bins",
            mask.shape(),
            band_outputs.len(),
            layout.n_bins
        )));
    }
    let binary = mask.binary();
    let nearest: Vec<usize> = (0..len)
        .map(|t| {
            let k = (t as f64 - layout.bin_center(0)) / layout.hop as f64;
            (k.round().max(0.0) as usize).min(layout.n_bins - 1)
        })
        .collect();
    let ramp = ((CROSSFADE * sample_rate as f64).round() as usize).max(1);
    let mut out = vec![0.0; len];
    for (m, band) in band_outputs.iter().enumerate() {
        let row = binary.row(m);
        if !row.iter().any(|&b| b) {
            continue;
        }
        let step: Vec<f64> = nearest.iter().map(|&k| if row[k] { 1.0 } else { 0.0 }).collect();
        let gate = moving_average(&step, ramp);
        for ((o, b), g) in out.iter_mut().zip(band).zip(&gate) {
            *o += b * g;
        }
    }
    Ok(AudioBuffer::mono(sample_rate, out))
}

/// Centred moving average of width `w` with the edges held; a unit step
/// becomes a linear ramp `w` samples long.
fn moving_average(x: &[f64], w: usize) -> Vec<f64> {
    if w <= 1 || x.is_empty() {
        return x.to_vec();
    }
    let n = x.len();
    let half = w / 2;
    let at = |i: isize| x[i.clamp(0, n as isize - 1) as usize];
    let mut acc: f64 = (0..w as isize).map(|j| at(j - half as isize)).sum();
    let mut out = Vec::with_capacity(n);
    for i in 0..n as isize {
        out.push(acc / w as f64);
        acc += at(i + w as isize - half as isize) - at(i - half as isize);
    }
    out
}
