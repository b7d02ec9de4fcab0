//! C interface to the sdsp signal-processing core.
//!
//! Every function returns an [`SdspStatus`]. On failure a message for the
//! calling thread is available from [`sdsp_last_error`]. Arrays are passed
//! as pointer plus length; 2-D arrays are row-major (channels x time bins).

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use ndarray::Array2;
use sdsp_core::audio::AudioBuffer;
use sdsp_core::container::{read_tensor, Tensor};
use sdsp_core::doa::{gcc_phat_itd_with, itd_to_angle};
use sdsp_core::gammatone::{gammatone_bandwidth, Filterbank, FilterbankConfig, Gammatonegram, GammatonegramConfig};
use sdsp_core::masking::{apply_mask, cross_gammatonegram, SegmentationMask};
use sdsp_core::scene::{EventClass, MicGeometry};
use sdsp_core::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdspStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    EmptyMask = 4,
    NoSignal = 5,
    Geometry = 6,
    Format = 7,
    Io = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SdspStatus {
    match e {
        Error::Config(_) | Error::Argument(_) | Error::Validation(_) => SdspStatus::InvalidArgument,
        Error::Domain(_) => SdspStatus::Domain,
        Error::EmptyMask => SdspStatus::EmptyMask,
        Error::NoSignal => SdspStatus::NoSignal,
        Error::Geometry { .. } => SdspStatus::Geometry,
        Error::Format(_) | Error::Json { .. } | Error::Wav { .. } => SdspStatus::Format,
        Error::Io { .. } => SdspStatus::Io,
    }
}

struct Fail(SdspStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SdspStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            SdspStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            SdspStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(SdspStatus::NullPointer, format!("{what} is null"))
}

unsafe fn input<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn output<'a, T>(p: *mut T, len: usize, need: usize, what: &str) -> Result<&'a mut [T], Fail> {
    if len < need {
        return Err(Fail(
            SdspStatus::BufferTooSmall,
            format!("{what} holds {len} values, {need} needed"),
        ));
    }
    if need == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn put<T>(p: *mut T, v: T) {
    if !p.is_null() {
        *p = v;
    }
}

/// Message describing the last failure on this thread, or null. The pointer
/// stays valid until the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn sdsp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn sdsp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Gammatone filterbank with precomputed impulse responses.
pub struct SdspFilterbank {
    inner: Filterbank,
}

/// Gammatonegram time grid.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SdspGridConfig {
    /// Bin hop, seconds.
    pub hop: f64,
    /// Analysis window length, seconds.
    pub window: f64,
    /// Lower clamp for energies, dB.
    pub floor_db: f64,
}

impl SdspGridConfig {
    fn to_core(self, n_samples: usize, sample_rate: f64) -> GammatonegramConfig {
        GammatonegramConfig {
            frame_length: n_samples as f64 / sample_rate,
            hop: self.hop,
            window_span: self.window,
            floor_db: self.floor_db,
            ..GammatonegramConfig::default()
        }
    }
}

/// Default grid: 10 ms hop, 25 ms Hamming window, -80 dB floor.
#[no_mangle]
pub extern "C" fn sdsp_grid_config_default() -> SdspGridConfig {
    let d = GammatonegramConfig::default();
    SdspGridConfig {
        hop: d.hop,
        window: d.window_span,
        floor_db: d.floor_db,
    }
}

/// Create a filterbank of `n_channels` ERB-spaced fourth-order channels
/// between `f_low` and `f_high`.
///
/// # Safety
/// `out` must be a valid pointer; the handle is released with
/// [`sdsp_filterbank_free`].
#[no_mangle]
pub unsafe extern "C" fn sdsp_filterbank_new(
    n_channels: usize,
    f_low: f64,
    f_high: f64,
    sample_rate: f64,
    out: *mut *mut SdspFilterbank,
) -> SdspStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = FilterbankConfig {
            n_channels,
            f_low,
            f_high,
            sample_rate,
            ..FilterbankConfig::default()
        };
        let fb = Filterbank::new(cfg)?;
        *out = Box::into_raw(Box::new(SdspFilterbank { inner: fb }));
        Ok(())
    })
}

/// # Safety
/// `fb` must come from [`sdsp_filterbank_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sdsp_filterbank_free(fb: *mut SdspFilterbank) {
    if !fb.is_null() {
        drop(Box::from_raw(fb));
    }
}

unsafe fn filterbank<'a>(fb: *const SdspFilterbank) -> Result<&'a Filterbank, Fail> {
    fb.as_ref().map(|f| &f.inner).ok_or_else(|| null("filterbank"))
}

/// Copy the centre frequencies (ascending, Hz) into `out`.
///
/// # Safety
/// `out` must hold `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn sdsp_filterbank_center_freqs(
    fb: *const SdspFilterbank,
    out: *mut f64,
    out_len: usize,
) -> SdspStatus {
    guard(|| {
        let fc = filterbank(fb)?.center_freqs();
        output(out, out_len, fc.len(), "out")?[..fc.len()].copy_from_slice(fc);
        Ok(())
    })
}

/// Equivalent rectangular bandwidth scaled for a fourth-order filter, Hz.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sdsp_gammatone_bandwidth(fc: f64, out: *mut f64) -> SdspStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = gammatone_bandwidth(fc)?;
        Ok(())
    })
}

/// Gammatonegram of `n` samples in dB, written row-major into `out`.
/// `rows` and `cols` receive the grid shape even when `out` is too small,
/// so a call with `out_len = 0` queries the size.
///
/// # Safety
/// `x` must hold `n` doubles and `out` `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn sdsp_gammatonegram(
    fb: *const SdspFilterbank,
    x: *const f64,
    n: usize,
    grid: SdspGridConfig,
    out: *mut f64,
    out_len: usize,
    rows: *mut usize,
    cols: *mut usize,
) -> SdspStatus {
    guard(|| {
        let fb = filterbank(fb)?;
        let x = input(x, n, "x")?;
        let sr = fb.config().sample_rate;
        let gg = grid.to_core(n, sr);
        let layout = gg.layout(sr, n)?;
        let shape = (fb.center_freqs().len(), layout.n_bins);
        put(rows, shape.0);
        put(cols, shape.1);
        let dst = output(out, out_len, shape.0 * shape.1, "out")?;
        let g = fb.gammatonegram(x, &gg)?;
        for (d, s) in dst.iter_mut().zip(g.energies.iter()) {
            *d = *s;
        }
        Ok(())
    })
}

unsafe fn matrix(p: *const f64, rows: usize, cols: usize, what: &str) -> Result<Array2<f64>, Fail> {
    let v = input(p, rows * cols, what)?;
    Array2::from_shape_vec((rows, cols), v.to_vec()).map_err(|e| Fail(SdspStatus::InvalidArgument, e.to_string()))
}

/// Full 2-D cross-correlation of two `rows x cols` matrices into a
/// `(2 rows - 1) x (2 cols - 1)` output; lag `(p, l)` sits at row
/// `p + rows - 1`, column `l + cols - 1`.
///
/// # Safety
/// `g1` and `g2` must hold `rows * cols` doubles, `out` `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn sdsp_cross_gammatonegram(
    g1: *const f64,
    g2: *const f64,
    rows: usize,
    cols: usize,
    out: *mut f64,
    out_len: usize,
) -> SdspStatus {
    guard(|| {
        if rows == 0 || cols == 0 {
            return Err(Fail(SdspStatus::InvalidArgument, "empty matrix".into()));
        }
        let a = matrix(g1, rows, cols, "g1")?;
        let b = matrix(g2, rows, cols, "g2")?;
        let need = (2 * rows - 1) * (2 * cols - 1);
        let dst = output(out, out_len, need, "out")?;
        let c = cross_gammatonegram(a.view(), b.view())?;
        for (d, s) in dst.iter_mut().zip(c.values.iter()) {
            *d = *s;
        }
        Ok(())
    })
}

/// Keep the pixels where `mask` is non-zero, convert the dB energies to
/// linear amplitude and scale to a maximum of 1.
///
/// # Safety
/// `energies_db` and `out` must hold `rows * cols` doubles, `mask` as many bytes.
#[no_mangle]
pub unsafe extern "C" fn sdsp_apply_mask(
    energies_db: *const f64,
    mask: *const u8,
    rows: usize,
    cols: usize,
    out: *mut f64,
) -> SdspStatus {
    guard(|| {
        let energies = matrix(energies_db, rows, cols, "energies_db")?;
        let m = input(mask, rows * cols, "mask")?;
        let labels = Array2::from_shape_fn((rows, cols), |(r, c)| {
            if m[r * cols + c] != 0 {
                EventClass::Siren
            } else {
                EventClass::Other
            }
        });
        let dst = output(out, rows * cols, rows * cols, "out")?;
        let g = Gammatonegram {
            energies,
            center_freqs: Vec::new(),
            bin_hop: 0.0,
            floor_db: f64::NEG_INFINITY,
        };
        let masked = apply_mask(&g, &SegmentationMask::new(labels, EventClass::Siren))?;
        for (d, s) in dst.iter_mut().zip(masked.values.iter()) {
            *d = *s;
        }
        Ok(())
    })
}

/// Delay of `x2` behind `x1` in seconds by phase-transform weighted
/// cross-correlation, searched within `max_itd`.
///
/// # Safety
/// `x1` and `x2` must hold `n` doubles; the output pointers may be null.
#[no_mangle]
pub unsafe extern "C" fn sdsp_gcc_phat_itd(
    x1: *const f64,
    x2: *const f64,
    n: usize,
    sample_rate: u32,
    max_itd: f64,
    confidence_ratio: f64,
    itd: *mut f64,
    peak_to_mean: *mut f64,
    low_confidence: *mut bool,
) -> SdspStatus {
    guard(|| {
        let a = AudioBuffer::mono(sample_rate, input(x1, n, "x1")?.to_vec());
        let b = AudioBuffer::mono(sample_rate, input(x2, n, "x2")?.to_vec());
        let e = gcc_phat_itd_with(&a, &b, max_itd, confidence_ratio)?;
        put(itd, e.itd);
        put(peak_to_mean, e.peak_to_mean);
        put(low_confidence, e.low_confidence);
        Ok(())
    })
}

/// Direction of arrival in degrees for a delay of channel 2 behind channel
/// 1, for microphones `spacing` metres apart.
///
/// # Safety
/// `alpha_deg` must be valid; `clamped` may be null.
#[no_mangle]
pub unsafe extern "C" fn sdsp_itd_to_angle(
    itd: f64,
    spacing: f64,
    speed_of_sound: f64,
    alpha_deg: *mut f64,
    clamped: *mut bool,
) -> SdspStatus {
    guard(|| {
        if alpha_deg.is_null() {
            return Err(null("alpha_deg"));
        }
        let a = itd_to_angle(itd, &MicGeometry { spacing, speed_of_sound })?;
        *alpha_deg = a.alpha_deg;
        put(clamped, a.clamped);
        Ok(())
    })
}

/// A tensor read from a container file.
pub struct SdspTensor {
    inner: Tensor,
    kind: CString,
    record_id: CString,
}

/// Read a tensor container and its sidecar.
///
/// # Safety
/// `path` must be a nul-terminated UTF-8 string, `out` a valid pointer; the
/// tensor is released with [`sdsp_tensor_free`].
#[no_mangle]
pub unsafe extern "C" fn sdsp_tensor_read(path: *const c_char, out: *mut *mut SdspTensor) -> SdspStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let p = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| Fail(SdspStatus::InvalidArgument, "path is not UTF-8".into()))?;
        let (t, side) = read_tensor(Path::new(p))?;
        let cstr = |s: &str| CString::new(s).map_err(|_| Fail(SdspStatus::Format, "nul in sidecar".into()));
        *out = Box::into_raw(Box::new(SdspTensor {
            kind: cstr(side.kind.as_str())?,
            record_id: cstr(&side.record_id)?,
            inner: t,
        }));
        Ok(())
    })
}

/// # Safety
/// `t` must come from [`sdsp_tensor_read`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sdsp_tensor_free(t: *mut SdspTensor) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Number of dimensions, 0 for a null handle.
///
/// # Safety
/// `t` must be null or a live tensor.
#[no_mangle]
pub unsafe extern "C" fn sdsp_tensor_ndim(t: *const SdspTensor) -> usize {
    t.as_ref().map_or(0, |t| t.inner.dims.len())
}

/// Size of dimension `axis`, 0 when out of range.
///
/// # Safety
/// `t` must be null or a live tensor.
#[no_mangle]
pub unsafe extern "C" fn sdsp_tensor_dim(t: *const SdspTensor, axis: usize) -> usize {
    t.as_ref().and_then(|t| t.inner.dims.get(axis).copied()).unwrap_or(0)
}

/// Number of elements.
///
/// # Safety
/// `t` must be null or a live tensor.
#[no_mangle]
pub unsafe extern "C" fn sdsp_tensor_len(t: *const SdspTensor) -> usize {
    t.as_ref().map_or(0, |t| t.inner.data.len())
}

/// Row-major element data, valid while the tensor lives.
///
/// # Safety
/// `t` must be null or a live tensor.
#[no_mangle]
pub unsafe extern "C" fn sdsp_tensor_data(t: *const SdspTensor) -> *const f32 {
    t.as_ref().map_or(ptr::null(), |t| t.inner.data.as_ptr())
}

/// Tensor kind from the sidecar ("gammatonegram", "mask" or "crossgram").
///
/// # Safety
/// `t` must be null or a live tensor.
#[no_mangle]
pub unsafe extern "C" fn sdsp_tensor_kind(t: *const SdspTensor) -> *const c_char {
    t.as_ref().map_or(ptr::null(), |t| t.kind.as_ptr())
}

/// Record id from the sidecar.
///
/// # Safety
/// `t` must be null or a live tensor.
#[no_mangle]
pub unsafe extern "C" fn sdsp_tensor_record_id(t: *const SdspTensor) -> *const c_char {
    t.as_ref().map_or(ptr::null(), |t| t.record_id.as_ptr())
}
