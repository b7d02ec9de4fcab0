//! Acceptance suite. Every criterion prints one PASS/FAIL line; the process
//! fails if any criterion fails. Pass a substring to run matching criteria
//! only, e.g. `cargo test -p sdsp-core --test acceptance -- oracle`.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use sdsp_core::audio::{read_wav, write_wav, AudioBuffer, ReadOptions};
use sdsp_core::config::SceneDefaults;
use sdsp_core::container::{read_tensor, write_tensor, Sidecar, Tensor, TensorKind};
use sdsp_core::doa::{itd_to_angle, median, median_filter_estimates, DoAEstimate};
use sdsp_core::gammatone::{erb_rate, gammatone_bandwidth, Filterbank, FilterbankConfig, GammatonegramConfig};
use sdsp_core::manifest::Manifest;
use sdsp_core::masking::cross_gammatonegram;
use sdsp_core::pipeline::FrameProcessor;
use sdsp_core::scene::{
    apply_doppler, generate_dataset, mix_at_snr, spatialize, synthesize_scene, MicGeometry, SceneSpec, SnrRange,
    Trajectory,
};
use sdsp_core::specs::{RandomBlock, SpecFile};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within(elapsed: Duration, limit: Duration, o: Outcome) -> Outcome {
    let timed = format!("{}; {:.1} s (limit {} s)", o.detail, elapsed.as_secs_f64(), limit.as_secs());
    outcome(o.pass && elapsed <= limit, timed)
}

fn gaussian(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

// ---------------------------------------------------------------- filterbank

/// Magnitude response of `h` at `f`.
fn response_at(h: &[f64], f: f64, fs: f64) -> f64 {
    let w = 2.0 * PI * f / fs;
    let (mut re, mut im) = (0.0, 0.0);
    for (n, &v) in h.iter().enumerate() {
        re += v * (w * n as f64).cos();
        im -= v * (w * n as f64).sin();
    }
    re.hypot(im)
}

/// Frequency of the largest response, golden-section refined after a coarse scan.
fn peak_frequency(h: &[f64], fc: f64, fs: f64) -> f64 {
    let (lo, hi) = (0.8 * fc, 1.2 * fc);
    let steps = 400;
    let grid: Vec<f64> = (0..=steps).map(|i| lo + (hi - lo) * i as f64 / steps as f64).collect();
    let best = grid
        .iter()
        .copied()
        .max_by(|a, b| response_at(h, *a, fs).total_cmp(&response_at(h, *b, fs)))
        .unwrap();
    let step = (hi - lo) / steps as f64;
    let (mut a, mut b) = (best - step, best + step);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..60 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if response_at(h, c, fs) > response_at(h, d, fs) {
            b = d;
        } else {
            a = c;
        }
    }
    0.5 * (a + b)
}

fn filterbank_correctness() -> Outcome {
    let start = Instant::now();
    let cfg = FilterbankConfig::default();
    let fb = Filterbank::new(cfg).unwrap();
    let fs = cfg.sample_rate;

    let mut worst_peak: f64 = 0.0;
    let mut checked = 0;
    for (fc, h) in fb.center_freqs().iter().zip(fb.impulse_responses()) {
        if !(200.0..=8000.0).contains(fc) {
            continue;
        }
        let f = peak_frequency(h, *fc, fs);
        worst_peak = worst_peak.max((f - fc).abs() / fc);
        checked += 1;
    }

    let mut worst_bw: f64 = 0.0;
    for fc in fb.center_freqs().iter().copied().chain([0.0, 1.0, 1000.0, 22050.0]) {
        let expect = 1.09 * (fc / 9.26449 + 24.7);
        worst_bw = worst_bw.max((gammatone_bandwidth(fc).unwrap() - expect).abs() / expect);
    }

    // independent ERB-rate scale: 21.4 log10(4.37 f / 1000 + 1)
    let rate = |f: f64| 21.4 * (4.37 * f / 1000.0 + 1.0).log10();
    let fc = fb.center_freqs();
    let steps: Vec<f64> = fc.windows(2).map(|w| rate(w[1]) - rate(w[0])).collect();
    let mean = steps.iter().sum::<f64>() / steps.len() as f64;
    let worst_erb = steps.iter().map(|s| (s - mean).abs()).fold(0.0, f64::max);
    let consistent = fc.iter().all(|&f| (erb_rate(f) - rate(f)).abs() < 1e-12);

    let pass = checked > 0 && worst_peak <= 0.02 && worst_bw <= 4.0 * f64::EPSILON && worst_erb <= 1e-9 && consistent;
    within(
        start.elapsed(),
        Duration::from_secs(10),
        outcome(
            pass,
            format!(
                "{checked} channels, worst peak offset {:.3}%, bandwidth rel err {worst_bw:.1e}, ERB step spread {worst_erb:.1e}",
                100.0 * worst_peak
            ),
        ),
    )
}

// ------------------------------------------------------------------ geometry

fn xcorr_lag(a: &[f64], b: &[f64], max_lag: isize) -> isize {
    let c = |l: isize| -> f64 {
        (0..a.len() as isize)
            .filter(|&n| n + l >= 0 && ((n + l) as usize) < b.len())
            .map(|n| a[n as usize] * b[(n + l) as usize])
            .sum()
    };
    (-max_lag..=max_lag).max_by(|&x, &y| c(x).total_cmp(&c(y))).unwrap()
}

fn geometry_round_trip() -> Outcome {
    let start = Instant::now();
    let geom = MicGeometry::default();
    let mut worst: f64 = 0.0;
    let n = 180_000;
    for i in 0..=n {
        let alpha = 180.0 * i as f64 / n as f64;
        let back = itd_to_angle(geom.itd(alpha), &geom).unwrap().alpha_deg;
        worst = worst.max((back - alpha).abs());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let x = AudioBuffer::mono(44100, gaussian(6000, &mut rng));
    let mut lag_err = 0;
    let mut lags = Vec::new();
    for alpha in [0.0, 30.0, 60.0, 90.0, 120.0, 150.0, 180.0] {
        let y = spatialize(&x, &Trajectory::stationary(alpha, 10.0), &geom, 2.0, 1).unwrap();
        let got = xcorr_lag(y.channel(0), y.channel(1), 80);
        let expect = (geom.itd(alpha) * 44100.0).round() as isize;
        lag_err = lag_err.max((got - expect).abs());
        lags.push(format!("{alpha}:{got}/{expect}"));
    }
    let pass = worst <= 1e-9 && lag_err <= 1;
    within(
        start.elapsed(),
        Duration::from_secs(30),
        outcome(
            pass,
            format!("worst angle error {worst:.1e} deg over {} angles; lags {}", n + 1, lags.join(" ")),
        ),
    )
}

// ----------------------------------------------------------------------- SNR

fn snr_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    let ms = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
    for _ in 0..100 {
        let n = rng.random_range(1000..20000);
        let (ga, gb, gn) = (rng.random_range(0.01..5.0), rng.random_range(0.01..5.0), rng.random_range(0.001..10.0));
        let t = AudioBuffer::stereo(
            44100,
            gaussian(n, &mut rng).iter().map(|v| v * ga).collect(),
            gaussian(n, &mut rng).iter().map(|v| v * gb).collect(),
        )
        .unwrap();
        let z = AudioBuffer::stereo(
            44100,
            gaussian(n, &mut rng).iter().map(|v| v * gn).collect(),
            gaussian(n, &mut rng).iter().map(|v| v * gn * 0.5).collect(),
        )
        .unwrap();
        let snr = rng.random_range(-40.0..=10.0);
        let (mixed, s) = mix_at_snr(&t, &z, snr).unwrap();
        let scaled: Vec<Vec<f64>> = (0..2).map(|c| z.channel(c).iter().map(|v| v * s).collect()).collect();
        let p_t = ms(t.channel(0)) + ms(t.channel(1));
        let p_n = ms(&scaled[0]) + ms(&scaled[1]);
        let measured = 10.0 * (p_t / p_n).log10();
        worst = worst.max((measured - snr).abs());
        // the mixture must be exactly target plus scaled noise
        for c in 0..2 {
            for i in 0..n {
                let d = mixed.channel(c)[i] - t.channel(c)[i] - scaled[c][i];
                worst = worst.max(d.abs() * 1e-3);
            }
        }
    }
    outcome(worst <= 1e-6, format!("100 mixes in [-40, 10] dB, worst deviation {worst:.2e} dB"))
}

// ------------------------------------------------------------------- Doppler

fn spectral_peak(x: &[f64], fs: f64) -> f64 {
    let n = 1 << 21;
    let mut buf: Vec<Complex64> = x
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let w = 0.5 - 0.5 * (2.0 * PI * i as f64 / (x.len() - 1) as f64).cos();
            Complex64::new(v * w, 0.0)
        })
        .collect();
    buf.resize(n, Complex64::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let mags: Vec<f64> = buf[..n / 2].iter().map(|c| c.norm()).collect();
    let k = (1..mags.len() - 1).max_by(|&a, &b| mags[a].total_cmp(&mags[b])).unwrap();
    let (a, b, c) = (mags[k - 1], mags[k], mags[k + 1]);
    let delta = 0.5 * (a - c) / (a - 2.0 * b + c);
    (k as f64 + delta) * fs / n as f64
}

fn doppler() -> Outcome {
    let geom = MicGeometry::default();
    let fs = 44100.0;
    let x = AudioBuffer::mono(44100, (0..44100).map(|n| (2.0 * PI * 1000.0 * n as f64 / fs).sin()).collect());
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for v in [20.0, -20.0] {
        let traj = Trajectory::radial(90.0, 200.0, v, 1.0).unwrap();
        let y = apply_doppler(&x, &traj, &geom).unwrap();
        // the approaching case has no arrived signal in the last few hundredths of a second
        let f = spectral_peak(&y.channel(0)[..39690], fs);
        let expect = 1000.0 * geom.speed_of_sound / (geom.speed_of_sound - v);
        let rel = (f - expect).abs() / expect;
        worst = worst.max(rel);
        parts.push(format!("v {v:+} m/s: {f:.2} Hz vs {expect:.2} Hz"));
    }
    outcome(worst <= 0.005, format!("{}; worst {:.4}%", parts.join(", "), 100.0 * worst))
}

// ------------------------------------------------------------ cross-gammatonegram

fn brute_cross(g1: &ndarray::Array2<f64>, g2: &ndarray::Array2<f64>, p: isize, l: isize) -> f64 {
    let (m, n) = g1.dim();
    let mut s = 0.0;
    for i in 0..m as isize {
        for j in 0..n as isize {
            let (a, b) = (i - p, j - l);
            if a >= 0 && b >= 0 && a < m as isize && b < n as isize {
                s += g1[[i as usize, j as usize]] * g2[[a as usize, b as usize]];
            }
        }
    }
    s
}

fn cross_gammatonegram_criterion() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let g1 = ndarray::Array2::from_shape_fn((8, 8), |_| rng.random_range(-1.0..1.0));
        let g2 = ndarray::Array2::from_shape_fn((8, 8), |_| rng.random_range(-1.0..1.0));
        let c = cross_gammatonegram(g1.view(), g2.view()).unwrap();
        let scale = c.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for p in -7..=7 {
            for l in -7..=7 {
                worst = worst.max((c.at(p, l) - brute_cross(&g1, &g2, p, l)).abs() / scale);
            }
        }
    }
    let mut misses = 0;
    let shifts = 50;
    for _ in 0..shifts {
        // support in the centre so that shifts up to 2 stay inside the grid
        let mut g1 = ndarray::Array2::zeros((8, 8));
        for i in 2..6 {
            for j in 2..6 {
                g1[[i, j]] = rng.random_range(0.1..1.0);
            }
        }
        let (dm, dn) = (rng.random_range(-2..=2i64) as isize, rng.random_range(-2..=2i64) as isize);
        let g2 = ndarray::Array2::from_shape_fn((8, 8), |(i, j)| {
            let (a, b) = (i as isize - dm, j as isize - dn);
            if (0..8).contains(&a) && (0..8).contains(&b) { g1[[a as usize, b as usize]] } else { 0.0 }
        });
        if cross_gammatonegram(g1.view(), g2.view()).unwrap().argmax_lag() != (-dm, -dn) {
            misses += 1;
        }
    }
    outcome(
        worst <= 1e-6 && misses == 0,
        format!("50 random 8x8 cases, worst relative error {worst:.1e}; shifted argmax {}/{shifts} correct", shifts - misses),
    )
}

// ------------------------------------------------------------ oracle end to end

struct FrameResult {
    clip: usize,
    moving: bool,
    truth: f64,
    estimate: Option<f64>,
}

fn scene_set(count: usize, duration: f64, moving_fraction: f64, seed: u64) -> Vec<SceneSpec> {
    let file = SpecFile {
        scenes: Vec::new(),
        random: Some(RandomBlock {
            count,
            duration,
            snr_db: [-20.0, 10.0],
            moving_fraction,
            ..RandomBlock::default()
        }),
    };
    file.resolve(Path::new("."), &SceneDefaults::default(), seed)
        .unwrap()
        .into_iter()
        .filter(|s| s.target_class.event_class().is_alerting())
        .collect()
}

fn localise_all(specs: &[SceneSpec], proc: &FrameProcessor) -> Vec<FrameResult> {
    let frame = 22050;
    specs
        .par_iter()
        .enumerate()
        .flat_map_iter(|(clip, spec)| {
            let rec = synthesize_scene(spec, proc.geometry(), 0.5).unwrap();
            let class = spec.target_class.event_class();
            let moving = !(spec.trajectory.is_direction_constant() && spec.trajectory.is_range_constant());
            rec.alpha_per_frame
                .iter()
                .enumerate()
                .map(|(k, &truth)| {
                    let clean = rec.clean_target_stereo.slice(k * frame, frame).unwrap();
                    let noise = rec.noise_used.slice(k * frame, frame).unwrap();
                    let estimate = proc.localize_oracle(&clean, &noise, class).unwrap().ok().map(|l| l.alpha_deg);
                    FrameResult { clip, moving, truth, estimate }
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Median absolute error over the frames selected by `keep` that have an
/// estimate, and the number of selected frames without one.
fn median_error(frames: &[FrameResult], est: &[Option<f64>], keep: impl Fn(&FrameResult) -> bool) -> (f64, usize) {
    let mut missing = 0;
    let mut errs = Vec::new();
    for (f, e) in frames.iter().zip(est).filter(|(f, _)| keep(f)) {
        match e {
            Some(a) => errs.push((a - f.truth).abs()),
            None => missing += 1,
        }
    }
    (median(&errs).unwrap_or(f64::NAN), missing)
}

fn oracle_end_to_end() -> Outcome {
    let start = Instant::now();
    let proc = FrameProcessor::new(
        FilterbankConfig::default(),
        GammatonegramConfig::default(),
        MicGeometry::default(),
        0.0,
    )
    .unwrap();

    // 100 static alerting clips of 2.5 s
    let static_specs = scene_set(150, 2.5, 0.0, 31);
    let static_frames = localise_all(&static_specs, &proc);
    let static_est: Vec<Option<f64>> = static_frames.iter().map(|f| f.estimate).collect();
    let (static_median, static_missing) = median_error(&static_frames, &static_est, |_| true);

    // 60 streaming clips of 5 s, half of them moving
    let stream_specs = scene_set(90, 5.0, 0.5, 47);
    let frames = localise_all(&stream_specs, &proc);
    let raw: Vec<Option<f64>> = frames.iter().map(|f| f.estimate).collect();
    let (raw_median, raw_missing) = median_error(&frames, &raw, |_| true);
    let mut filtered = vec![None; frames.len()];
    let mut i = 0;
    while i < frames.len() {
        let clip = frames[i].clip;
        let end = frames[i..].iter().position(|f| f.clip != clip).map_or(frames.len(), |p| i + p);
        let est: Vec<DoAEstimate> = (i..end)
            .map(|j| match frames[j].estimate {
                Some(a) => DoAEstimate::valid(a, j - i),
                None => DoAEstimate::invalid(j - i),
            })
            .collect();
        for (k, e) in median_filter_estimates(&est, 5).unwrap().into_iter().enumerate() {
            filtered[i + k] = e.valid.then_some(e.alpha_deg);
        }
        i = end;
    }
    let (filtered_median, filtered_missing) = median_error(&frames, &filtered, |_| true);
    let ratio = filtered_median / raw_median;
    let sub_ratio = |moving: bool| {
        median_error(&frames, &filtered, |f| f.moving == moving).0 / median_error(&frames, &raw, |f| f.moving == moving).0
    };
    let n_moving = frames.iter().filter(|f| f.moving).count();

    let pass = static_frames.len() == 500 && frames.len() == 600 && static_median <= 10.0 && ratio <= 0.6;
    within(
        start.elapsed(),
        Duration::from_secs(600),
        outcome(
            pass,
            format!(
                "static {} frames: median {static_median:.2} deg ({static_missing} without estimate); \
                 streaming {} frames: unfiltered {raw_median:.2} deg ({raw_missing} missing), \
                 order 5 {filtered_median:.2} deg ({filtered_missing} missing), ratio {ratio:.2} \
                 (static clips {:.2}, {n_moving} moving frames {:.2})",
                static_frames.len(),
                frames.len(),
                sub_ratio(false),
                sub_ratio(true)
            ),
        ),
    )
}

// ------------------------------------------------------------------- formats

fn format_round_trips() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut notes = Vec::new();
    let mut pass = true;

    // WAV: every PCM16 code survives a write/read cycle
    let codes: Vec<f64> = (i16::MIN..=i16::MAX).map(|c| c as f64 / 32768.0).collect();
    let rev: Vec<f64> = codes.iter().rev().copied().collect();
    let a = AudioBuffer::stereo(44100, codes, rev).unwrap();
    let wav = dir.path().join("all_codes.wav");
    write_wav(&wav, &a).unwrap();
    let b = read_wav(&wav, ReadOptions::default()).unwrap();
    let wav_ok = a == b;
    write_wav(&dir.path().join("again.wav"), &b).unwrap();
    let wav_bytes_ok = std::fs::read(&wav).unwrap() == std::fs::read(dir.path().join("again.wav")).unwrap();
    pass &= wav_ok && wav_bytes_ok;
    notes.push(format!("wav {}", if wav_ok && wav_bytes_ok { "exact" } else { "MISMATCH" }));

    // tensor container over arbitrary bit patterns, NaN payloads included
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let data: Vec<f32> = (0..64 * 48).map(|_| f32::from_bits(rng.random())).collect();
    let t = Tensor::new(vec![64, 48], data).unwrap();
    let side = Sidecar {
        record_id: "c000000_f0000".into(),
        kind: TensorKind::Gammatonegram,
        shape: vec![64, 48],
        config_hash: "h".into(),
        channel: Some(1),
        units: Some("dB".into()),
        target_class: None,
    };
    let tp = dir.path().join("t.gtg.sdsp");
    write_tensor(&tp, &t, &side).unwrap();
    let (t2, s2) = read_tensor(&tp).unwrap();
    let bits = |t: &Tensor| t.data.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    let tensor_ok = bits(&t) == bits(&t2) && t.dims == t2.dims && s2 == side;
    pass &= tensor_ok;
    notes.push(format!("tensor {}", if tensor_ok { "exact" } else { "MISMATCH" }));

    // manifest save/load/save
    let specs = scene_set(3, 1.0, 0.0, 3);
    let cfg = sdsp_core::config::RunConfig::default();
    let data_dir = dir.path().join("data");
    generate_dataset(&specs, &cfg.geometry, SnrRange::default(), 0.5, &cfg.config_hash(), &data_dir).unwrap();
    let mp = data_dir.join("manifest.json");
    let m = Manifest::load(&mp).unwrap();
    let mp2 = dir.path().join("m2.json");
    m.save(&mp2).unwrap();
    let manifest_ok = std::fs::read(&mp).unwrap() == std::fs::read(&mp2).unwrap() && Manifest::load(&mp2).unwrap() == m;
    pass &= manifest_ok;
    notes.push(format!("manifest {}", if manifest_ok { "exact" } else { "MISMATCH" }));

    // the command-line pipeline twice from the same seed
    let spec_file = dir.path().join("scenes.json");
    std::fs::write(
        &spec_file,
        r#"{"random": {"count": 6, "duration": 1.0, "snr_db": [-20, 10], "moving_fraction": 0.5}}"#,
    )
    .unwrap();
    let run = |name: &str| -> std::path::PathBuf {
        let root = dir.path().join(name);
        let sdsp = env!("CARGO_BIN_EXE_sdsp");
        let data = root.join("data");
        let go = |args: &[&str]| {
            let out = Command::new(sdsp).args(args).output().unwrap();
            assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        };
        let s = |p: &Path| p.to_str().unwrap().to_string();
        go(&["synth", "--seed", "9", "--specs", &s(&spec_file), "--out", &s(&data)]);
        let m = s(&data.join("manifest.json"));
        go(&["features", "--seed", "9", "--manifest", &m, "--out", &s(&root.join("features")), "--oracle-masks"]);
        go(&["doa-baseline", "--manifest", &m, "--masks", &s(&root.join("features")), "--out", &s(&root.join("p.jsonl"))]);
        root
    };
    let (r1, r2) = (run("run1"), run("run2"));
    let mut files = Vec::new();
    collect_files(&r1, &mut files);
    let mut differing = 0;
    for f in &files {
        let rel = f.strip_prefix(&r1).unwrap();
        if std::fs::read(f).ok() != std::fs::read(r2.join(rel)).ok() {
            differing += 1;
        }
    }
    let mut other = Vec::new();
    collect_files(&r2, &mut other);
    let cli_ok = differing == 0 && other.len() == files.len() && !files.is_empty();
    pass &= cli_ok;
    notes.push(format!("CLI rerun {} files, {differing} differ", files.len()));
    outcome(pass, notes.join("; "))
}

fn collect_files(dir: &Path, out: &mut Vec<std::path::PathBuf>) {
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            collect_files(&p, out);
        } else {
            out.push(p);
        }
    }
}

fn main() {
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("filterbank correctness", filterbank_correctness),
        ("geometry round trip", geometry_round_trip),
        ("SNR exactness", snr_exactness),
        ("Doppler shift", doppler),
        ("cross-gammatonegram", cross_gammatonegram_criterion),
        ("oracle end-to-end DoA", oracle_end_to_end),
        ("format round trips and CLI reproducibility", format_round_trips),
    ];
    let mut failed = 0;
    let mut ran = 0;
    for (name, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|s| name.to_lowercase().contains(&s.to_lowercase())) {
            continue;
        }
        ran += 1;
        let o = f();
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    println!("{} of {ran} criteria passed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
