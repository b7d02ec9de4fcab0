use std::ffi::{CStr, CString};
use std::ptr;

use sdsp_core::container::{write_tensor, Sidecar, Tensor, TensorKind};
use sdsp_ffi::*;

fn last_error() -> String {
    let p = sdsp_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn default_filterbank() -> *mut SdspFilterbank {
    let mut fb = ptr::null_mut();
    let s = unsafe { sdsp_filterbank_new(64, 50.0, 22050.0, 44100.0, &mut fb) };
    assert_eq!(s, SdspStatus::Ok);
    fb
}

#[test]
fn gammatonegram_size_query_then_fill() {
    let fb = default_filterbank();
    let x: Vec<f64> = (0..22050).map(|n| (n as f64 * 0.07).sin()).collect();
    let grid = sdsp_grid_config_default();
    let (mut rows, mut cols) = (0usize, 0usize);
    let s = unsafe { sdsp_gammatonegram(fb, x.as_ptr(), x.len(), grid, ptr::null_mut(), 0, &mut rows, &mut cols) };
    assert_eq!(s, SdspStatus::BufferTooSmall);
    assert_eq!((rows, cols), (64, 48));
    assert!(last_error().contains("3072"));
    let mut out = vec![0.0; rows * cols];
    let s = unsafe { sdsp_gammatonegram(fb, x.as_ptr(), x.len(), grid, out.as_mut_ptr(), out.len(), &mut rows, &mut cols) };
    assert_eq!(s, SdspStatus::Ok);
    assert!(sdsp_last_error().is_null());
    assert!(out.iter().all(|v| v.is_finite() && *v >= -80.0));

    let mut fc = vec![0.0; 64];
    assert_eq!(unsafe { sdsp_filterbank_center_freqs(fb, fc.as_mut_ptr(), 64) }, SdspStatus::Ok);
    assert!(fc.windows(2).all(|w| w[0] < w[1]));
    assert!((fc[0] - 50.0).abs() < 1e-9);
    unsafe { sdsp_filterbank_free(fb) };
}

#[test]
fn invalid_inputs_map_to_status_codes() {
    let mut fb = ptr::null_mut();
    let s = unsafe { sdsp_filterbank_new(0, 50.0, 22050.0, 44100.0, &mut fb) };
    assert_eq!(s, SdspStatus::InvalidArgument);
    assert!(fb.is_null());
    assert!(!last_error().is_empty());

    let mut bw = 0.0;
    assert_eq!(unsafe { sdsp_gammatone_bandwidth(-1.0, &mut bw) }, SdspStatus::Domain);
    assert_eq!(unsafe { sdsp_gammatone_bandwidth(1000.0, ptr::null_mut()) }, SdspStatus::NullPointer);
    assert_eq!(unsafe { sdsp_gammatone_bandwidth(1000.0, &mut bw) }, SdspStatus::Ok);
    assert!((bw - 1.09 * (1000.0 / 9.26449 + 24.7)).abs() < 1e-9);

    let mut alpha = 0.0;
    let s = unsafe { sdsp_itd_to_angle(2e-3, 0.5, 343.0, &mut alpha, ptr::null_mut()) };
    assert_eq!(s, SdspStatus::Geometry);
    let mut clamped = true;
    let s = unsafe { sdsp_itd_to_angle(0.0, 0.5, 343.0, &mut alpha, &mut clamped) };
    assert_eq!(s, SdspStatus::Ok);
    assert!((alpha - 90.0).abs() < 1e-9 && !clamped);

    unsafe { sdsp_filterbank_free(ptr::null_mut()) };
    unsafe { sdsp_tensor_free(ptr::null_mut()) };
}

#[test]
fn crossgram_and_mask() {
    let g: Vec<f64> = (0..12).map(|i| i as f64).collect();
    let mut shifted = vec![0.0; 12];
    // g2 = g1 moved down one row
    for r in 1..3 {
        for c in 0..4 {
            shifted[r * 4 + c] = g[(r - 1) * 4 + c];
        }
    }
    let mut out = vec![0.0; 5 * 7];
    let s = unsafe { sdsp_cross_gammatonegram(g.as_ptr(), g.as_ptr(), 3, 4, out.as_mut_ptr(), out.len()) };
    assert_eq!(s, SdspStatus::Ok);
    let self_energy: f64 = g.iter().map(|v| v * v).sum();
    assert!((out[2 * 7 + 3] - self_energy).abs() < 1e-9);
    let mut small = vec![0.0; 10];
    let s = unsafe { sdsp_cross_gammatonegram(g.as_ptr(), shifted.as_ptr(), 3, 4, small.as_mut_ptr(), small.len()) };
    assert_eq!(s, SdspStatus::BufferTooSmall);

    let db = vec![-20.0, 0.0, -6.0, -80.0];
    let mut masked = vec![9.0; 4];
    let s = unsafe { sdsp_apply_mask(db.as_ptr(), [1u8, 0, 1, 0].as_ptr(), 2, 2, masked.as_mut_ptr()) };
    assert_eq!(s, SdspStatus::Ok);
    assert!((masked[2] - 1.0).abs() < 1e-12);
    assert!((masked[0] - 10f64.powf(-14.0 / 20.0)).abs() < 1e-12);
    assert_eq!((masked[1], masked[3]), (0.0, 0.0));
    let s = unsafe { sdsp_apply_mask(db.as_ptr(), [0u8; 4].as_ptr(), 2, 2, masked.as_mut_ptr()) };
    assert_eq!(s, SdspStatus::EmptyMask);
}

#[test]
fn gcc_phat_recovers_shift() {
    let mut state = 1u64;
    let x: Vec<f64> = (0..8192)
        .map(|_| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
        .collect();
    let d = 20;
    let x1 = x[d..].to_vec();
    let x2 = x[..x.len() - d].to_vec();
    let (mut itd, mut ratio, mut low) = (0.0, 0.0, true);
    let s = unsafe {
        sdsp_gcc_phat_itd(x1.as_ptr(), x2.as_ptr(), x1.len(), 44100, 0.5 / 343.0, 4.0, &mut itd, &mut ratio, &mut low)
    };
    assert_eq!(s, SdspStatus::Ok);
    assert!((itd * 44100.0 - d as f64).abs() < 0.2, "{}", itd * 44100.0);
    assert!(!low && ratio > 4.0);
    let zeros = vec![0.0; 1024];
    let s = unsafe {
        sdsp_gcc_phat_itd(zeros.as_ptr(), zeros.as_ptr(), 1024, 44100, 1e-3, 4.0, &mut itd, ptr::null_mut(), ptr::null_mut())
    };
    assert_eq!(s, SdspStatus::NoSignal);
}

#[test]
fn tensor_read() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c000001_f0002_ch0.gtg.sdsp");
    let t = Tensor::new(vec![2, 3], vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.5]).unwrap();
    let side = Sidecar {
        record_id: "c000001_f0002".into(),
        kind: TensorKind::Gammatonegram,
        shape: vec![2, 3],
        config_hash: "abc".into(),
        channel: Some(0),
        units: None,
        target_class: None,
    };
    write_tensor(&path, &t, &side).unwrap();
    let c = CString::new(path.to_str().unwrap()).unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { sdsp_tensor_read(c.as_ptr(), &mut h) }, SdspStatus::Ok);
    unsafe {
        assert_eq!(sdsp_tensor_ndim(h), 2);
        assert_eq!((sdsp_tensor_dim(h, 0), sdsp_tensor_dim(h, 1), sdsp_tensor_dim(h, 2)), (2, 3, 0));
        let data = std::slice::from_raw_parts(sdsp_tensor_data(h), sdsp_tensor_len(h));
        assert_eq!(data, &t.data[..]);
        assert_eq!(CStr::from_ptr(sdsp_tensor_kind(h)).to_str().unwrap(), "gammatonegram");
        assert_eq!(CStr::from_ptr(sdsp_tensor_record_id(h)).to_str().unwrap(), "c000001_f0002");
        sdsp_tensor_free(h);
    }
    let missing = CString::new(dir.path().join("nope.sdsp").to_str().unwrap()).unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { sdsp_tensor_read(missing.as_ptr(), &mut h) }, SdspStatus::Io);
    std::fs::write(&path, b"SDSPjunk").unwrap();
    assert_eq!(unsafe { sdsp_tensor_read(c.as_ptr(), &mut h) }, SdspStatus::Format);
}

#[test]
fn header_compiles_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/sdsp.h");
    let text = std::fs::read_to_string(header).unwrap();
    for f in ["sdsp_gammatonegram", "sdsp_cross_gammatonegram", "sdsp_gcc_phat_itd", "sdsp_tensor_read", "SDSP_STATUS_EMPTY_MASK"] {
        assert!(text.contains(f), "{f} missing from header");
    }
    let Ok(cc) = which_cc() else { return };
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("probe.c");
    std::fs::write(&src, "#include \"sdsp.h\"\nint main(void) { return sdsp_last_error() != 0; }\n").unwrap();
    let out = std::process::Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I", concat!(env!("CARGO_MANIFEST_DIR"), "/include")])
        .arg(&src)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

fn which_cc() -> Result<&'static str, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if std::process::Command::new(cc).arg("--version").output().is_ok_and(|o| o.status.success()) {
            return Ok(cc);
        }
    }
    Err(())
}
