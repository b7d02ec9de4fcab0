//! The `sdsp` command-line tool.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use crate::audio::AudioBuffer;
use crate::config::RunConfig;
use crate::container::{read_tensor_checked, tensor_file_name, write_tensor, Sidecar, Tensor, TensorKind};
use crate::doa::{
    evaluate, median_filter_estimates, read_predictions, write_predictions, DoAEstimate, Prediction,
};
use crate::manifest::{FrameRecord, Manifest, Split, SplitInfo};
use crate::masking::SegmentationMask;
use crate::pipeline::FrameProcessor;
use crate::scene::{generate_dataset, scene_rng, EventClass};
use crate::specs::SpecFile;
use crate::{Error, Result};

/// Share of frames (or clips) assigned to training.
pub const TRAIN_FRACTION: f64 = 0.9;
const SPLIT_STREAM: u64 = 17;

#[derive(Debug, Parser)]
#[command(name = "sdsp", version, about = "Alerting urban sound detection and localisation toolkit")]
pub struct Cli {
    /// Run configuration (TOML); defaults apply when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the configuration seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SplitFilter {
    All,
    Train,
    Test,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesise a labelled dataset from a scene specification file.
    Synth {
        #[arg(long)]
        specs: PathBuf,
        /// Dataset directory; defaults to `paths.data_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute gammatonegram containers (and oracle masks) for every frame
    /// and record a train/test split in the manifest.
    Features {
        #[arg(long)]
        manifest: PathBuf,
        /// Feature directory; defaults to `paths.features_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write ideal masks, masked gammatonegrams and cross-gammatonegrams.
        #[arg(long)]
        oracle_masks: bool,
        /// Split whole clips instead of single frames.
        #[arg(long)]
        split_by_clip: bool,
    },
    /// Mask-gated GCC-PHAT localisation of every frame.
    DoaBaseline {
        #[arg(long)]
        manifest: PathBuf,
        /// Directory holding `<id>_ch{0,1}.mask.sdsp`; defaults to `paths.features_dir`.
        #[arg(long)]
        masks: Option<PathBuf>,
        /// Predictions file whose classes replace the ground-truth labels.
        #[arg(long)]
        classes: Option<PathBuf>,
        #[arg(long)]
        median_order: Option<usize>,
        #[arg(long, value_enum, default_value_t = SplitFilter::All)]
        split: SplitFilter,
        /// Output predictions (JSON lines).
        #[arg(long)]
        out: PathBuf,
    },
    /// Score predictions; writes report.json and plot CSVs.
    Eval {
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the recorded train/test split as id lists.
    ExportSplit {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Exit status for an error: 2 for invalid input, 1 for everything else.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_)
        | Error::Domain(_)
        | Error::Argument(_)
        | Error::Validation(_)
        | Error::Format(_)
        | Error::Json { .. }
        | Error::Geometry { .. } => 2,
        _ => 1,
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

/// Run a parsed command line; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<i32> {
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::Synth { specs, out } => cmd_synth(&cfg, specs, out.as_deref().unwrap_or(&cfg.paths.data_dir)),
        Command::Features {
            manifest,
            out,
            oracle_masks,
            split_by_clip,
        } => cmd_features(
            &cfg,
            manifest,
            out.as_deref().unwrap_or(&cfg.paths.features_dir),
            *oracle_masks,
            *split_by_clip,
        ),
        Command::DoaBaseline {
            manifest,
            masks,
            classes,
            median_order,
            split,
            out,
        } => cmd_doa_baseline(
            &cfg,
            manifest,
            masks.as_deref().unwrap_or(&cfg.paths.features_dir),
            classes.as_deref(),
            median_order.unwrap_or(cfg.doa.median_order),
            *split,
            out,
        ),
        Command::Eval {
            predictions,
            manifest,
            out,
        } => cmd_eval(predictions, manifest, out),
        Command::ExportSplit { manifest, out } => cmd_export_split(manifest, out),
    }
}

pub fn cmd_synth(cfg: &RunConfig, specs: &Path, out: &Path) -> Result<i32> {
    let file = SpecFile::load(specs)?;
    let base = specs.parent().unwrap_or(Path::new("."));
    let scenes = file.resolve(base, &cfg.scene, cfg.seed)?;
    if scenes.is_empty() {
        return Err(Error::Validation(format!("{}: no scenes", specs.display())));
    }
    let m = generate_dataset(
        &scenes,
        &cfg.geometry,
        cfg.scene.snr_range(),
        cfg.gammatonegram.frame_length,
        &cfg.config_hash(),
        out,
    )?;
    let mut per_class = BTreeMap::new();
    for f in &m.frames {
        *per_class.entry(f.class.as_str()).or_insert(0usize) += 1;
    }
    println!("{} clips, {} frames -> {}", m.clips.len(), m.frames.len(), out.join("manifest.json").display());
    for (c, n) in per_class {
        println!("  {c}: {n} frames");
    }
    Ok(0)
}

/// Deterministic train/test assignment of the manifest's frames.
pub fn assign_split(m: &mut Manifest, seed: u64, by_clip: bool) {
    let mut rng = scene_rng(seed, SPLIT_STREAM);
    let units = if by_clip { m.clips.len() } else { m.frames.len() };
    let mut order: Vec<usize> = (0..units).collect();
    order.shuffle(&mut rng);
    let n_train = (TRAIN_FRACTION * units as f64).round() as usize;
    let mut is_train = vec![false; units];
    for &i in &order[..n_train] {
        is_train[i] = true;
    }
    for (i, f) in m.frames.iter_mut().enumerate() {
        let unit = if by_clip { f.clip } else { i };
        f.split = Some(if is_train[unit] { Split::Train } else { Split::Test });
    }
    m.split = Some(SplitInfo {
        seed,
        train_fraction: TRAIN_FRACTION,
        by_clip,
    });
}

fn frame_slice(a: &AudioBuffer, f: &FrameRecord) -> Result<AudioBuffer> {
    a.slice(f.start_sample, f.n_samples)
}

#[derive(Debug, Default, Serialize)]
struct FeatureSummary {
    config_hash: String,
    frames: usize,
    gammatonegrams: usize,
    masks: usize,
    crossgrams: usize,
    empty_masks: Vec<String>,
    failures: Vec<(String, String)>,
}

#[derive(Default)]
struct FrameOutput {
    gammatonegrams: usize,
    masks: usize,
    crossgrams: usize,
    empty_mask: bool,
}

pub fn cmd_features(cfg: &RunConfig, manifest_path: &Path, out: &Path, oracle: bool, by_clip: bool) -> Result<i32> {
    let mut manifest = Manifest::load(manifest_path)?;
    let base = Manifest::base_dir(manifest_path);
    let proc = FrameProcessor::from_config(cfg)?;
    let hash = cfg.config_hash();
    if hash != manifest.config_hash {
        eprintln!("warning: features use configuration {hash}, dataset was made under {}", manifest.config_hash);
    }
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;

    let mut by_clip_frames: BTreeMap<usize, Vec<&FrameRecord>> = BTreeMap::new();
    for f in &manifest.frames {
        by_clip_frames.entry(f.clip).or_default().push(f);
    }
    let results: Vec<(String, Result<FrameOutput>)> = by_clip_frames
        .par_iter()
        .flat_map_iter(|(&clip, frames)| {
            let audio = manifest.load_clip(&base, clip);
            frames
                .iter()
                .map(|f| {
                    let r = match &audio {
                        Ok(a) => frame_features(&proc, &hash, a, f, out, oracle),
                        Err(e) => Err(Error::Format(e.to_string())),
                    };
                    (f.id.clone(), r)
                })
                .collect::<Vec<_>>()
        })
        .collect();

    let mut summary = FeatureSummary {
        config_hash: hash,
        frames: manifest.frames.len(),
        ..Default::default()
    };
    for (id, r) in results {
        match r {
            Ok(o) => {
                summary.gammatonegrams += o.gammatonegrams;
                summary.masks += o.masks;
                summary.crossgrams += o.crossgrams;
                if o.empty_mask {
                    summary.empty_masks.push(id);
                }
            }
            Err(e) => summary.failures.push((id, e.to_string())),
        }
    }
    assign_split(&mut manifest, cfg.seed, by_clip);
    manifest.save(manifest_path)?;
    let summary_path = out.join("features.json");
    let text = serde_json::to_string_pretty(&summary).map_err(|e| Error::json(&summary_path, e))?;
    std::fs::write(&summary_path, text + "\n").map_err(|e| Error::io(&summary_path, e))?;

    let n_train = manifest.frames.iter().filter(|f| f.split == Some(Split::Train)).count();
    println!(
        "{} frames: {} gammatonegrams, {} masks, {} crossgrams; split {} train / {} test",
        summary.frames,
        summary.gammatonegrams,
        summary.masks,
        summary.crossgrams,
        n_train,
        summary.frames - n_train
    );
    if !summary.empty_masks.is_empty() {
        println!("{} frames have empty oracle masks", summary.empty_masks.len());
    }
    if summary.failures.is_empty() {
        Ok(0)
    } else {
        for (id, e) in &summary.failures {
            eprintln!("failed {id}: {e}");
        }
        eprintln!("{} of {} frames failed", summary.failures.len(), summary.frames);
        Ok(1)
    }
}

fn write_2d(out: &Path, file: String, values: &ndarray::Array2<f64>, side: Sidecar) -> Result<()> {
    let t = Tensor::from_array2(values);
    write_tensor(&out.join(file), &t, &side)
}

fn frame_features(
    proc: &FrameProcessor,
    hash: &str,
    audio: &crate::manifest::ClipAudio,
    f: &FrameRecord,
    out: &Path,
    oracle: bool,
) -> Result<FrameOutput> {
    let mixed = frame_slice(&audio.mixed, f)?;
    let grams = proc.stereo_gammatonegrams(&mixed)?;
    let side = |kind, shape: (usize, usize), channel, units: &str, target| Sidecar {
        record_id: f.id.clone(),
        kind,
        shape: vec![shape.0, shape.1],
        config_hash: hash.to_string(),
        channel,
        units: Some(units.to_string()),
        target_class: target,
    };
    let mut o = FrameOutput::default();
    for (ch, g) in grams.iter().enumerate() {
        let name = tensor_file_name(&f.id, Some(ch), "gtg");
        write_2d(out, name, &g.energies, side(TensorKind::Gammatonegram, g.shape(), Some(ch), "dB", None))?;
        o.gammatonegrams += 1;
    }
    if !oracle {
        return Ok(o);
    }
    let masks = proc.oracle_masks(&frame_slice(&audio.target, f)?, &frame_slice(&audio.noise, f)?, f.class)?;
    for (ch, m) in masks.iter().enumerate() {
        let name = tensor_file_name(&f.id, Some(ch), "mask");
        write_2d(out, name, &m.to_indices(), side(TensorKind::Mask, m.shape(), Some(ch), "label", Some(f.class)))?;
        o.masks += 1;
    }
    if !f.class.is_alerting() {
        return Ok(o);
    }
    if masks.iter().any(SegmentationMask::is_empty) {
        o.empty_mask = true;
        return Ok(o);
    }
    let (masked, cross) = proc.crossgram(&grams, &masks)?;
    for (ch, m) in masked.iter().enumerate() {
        let name = tensor_file_name(&f.id, Some(ch), "masked");
        let s = side(TensorKind::Gammatonegram, m.values.dim(), Some(ch), "linear", Some(f.class));
        write_2d(out, name, &m.values, s)?;
    }
    let s = side(TensorKind::Crossgram, cross.values.dim(), None, "linear", Some(f.class));
    write_2d(out, tensor_file_name(&f.id, None, "xgram"), &cross.values, s)?;
    o.crossgrams += 1;
    Ok(o)
}

fn load_masks(dir: &Path, id: &str, hash: &str, class: EventClass) -> Result<[SegmentationMask; 2]> {
    let mut out = Vec::with_capacity(2);
    for ch in 0..2 {
        let p = dir.join(tensor_file_name(id, Some(ch), "mask"));
        if !p.exists() {
            return Err(Error::Validation(format!(
                "mask {} not found; run `sdsp features --oracle-masks` or the neural inference step first",
                p.display()
            )));
        }
        let (t, _) = read_tensor_checked(&p, TensorKind::Mask, hash)?;
        out.push(SegmentationMask::from_indices(&t.to_array2()?, class)?);
    }
    Ok(out.try_into().expect("two channels"))
}

pub fn cmd_doa_baseline(
    cfg: &RunConfig,
    manifest_path: &Path,
    masks_dir: &Path,
    classes: Option<&Path>,
    median_order: usize,
    split: SplitFilter,
    out: &Path,
) -> Result<i32> {
    let manifest = Manifest::load(manifest_path)?;
    let base = Manifest::base_dir(manifest_path);
    let proc = FrameProcessor::from_config(cfg)?;
    let hash = cfg.config_hash();
    if median_order.is_multiple_of(2) {
        return Err(Error::Argument(format!("median order must be odd, got {median_order}")));
    }
    let predicted: Option<HashMap<String, EventClass>> = match classes {
        Some(p) => Some(read_predictions(p)?.into_iter().map(|p| (p.id, p.class)).collect()),
        None => None,
    };
    let wanted = |f: &FrameRecord| match split {
        SplitFilter::All => true,
        SplitFilter::Train => f.split == Some(Split::Train),
        SplitFilter::Test => f.split == Some(Split::Test),
    };
    if split != SplitFilter::All && manifest.split.is_none() {
        return Err(Error::Validation("manifest has no split; run `sdsp features` first".into()));
    }
    let mut clips: BTreeMap<usize, Vec<&FrameRecord>> = BTreeMap::new();
    for f in manifest.frames.iter().filter(|f| wanted(f)) {
        clips.entry(f.clip).or_default().push(f);
    }
    let class_of = |f: &FrameRecord| -> Result<EventClass> {
        match &predicted {
            Some(map) => map
                .get(&f.id)
                .copied()
                .ok_or_else(|| Error::Validation(format!("no class prediction for {}", f.id))),
            None => Ok(f.class),
        }
    };

    let per_clip: Vec<Vec<Prediction>> = clips
        .par_iter()
        .map(|(&clip, frames)| -> Result<Vec<Prediction>> {
            let mut frames = frames.clone();
            frames.sort_by_key(|f| f.frame_index);
            let mut audio: Option<AudioBuffer> = None;
            let mut est = Vec::with_capacity(frames.len());
            let mut cls = Vec::with_capacity(frames.len());
            for f in &frames {
                let class = class_of(f)?;
                cls.push(class);
                if !class.is_alerting() {
                    est.push(DoAEstimate::invalid(f.frame_index));
                    continue;
                }
                let masks = load_masks(masks_dir, &f.id, &hash, class)?;
                if audio.is_none() {
                    audio = Some(manifest.load_clip(&base, clip)?.mixed);
                }
                let mixed = frame_slice(audio.as_ref().expect("loaded"), f)?;
                let analysis = proc.analyze_stereo(&mixed)?;
                est.push(match proc.localize(&analysis.bands, &masks, mixed.sample_rate())? {
                    Ok(l) => DoAEstimate::valid(l.alpha_deg, f.frame_index),
                    Err(_) => DoAEstimate::invalid(f.frame_index),
                });
            }
            let est = median_filter_estimates(&est, median_order)?;
            Ok(frames
                .iter()
                .zip(est)
                .zip(cls)
                .map(|((f, e), class)| Prediction {
                    id: f.id.clone(),
                    class,
                    alpha_deg: e.valid.then_some(e.alpha_deg),
                    valid: e.valid,
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let preds: Vec<Prediction> = per_clip.into_iter().flatten().collect();
    write_predictions(out, &preds)?;
    let invalid = preds.iter().filter(|p| p.class.is_alerting() && !p.valid).count();
    println!(
        "{} predictions (median order {median_order}), {invalid} alerting frames without a direction -> {}",
        preds.len(),
        out.display()
    );
    Ok(0)
}

pub fn cmd_eval(predictions: &Path, manifest_path: &Path, out: &Path) -> Result<i32> {
    let manifest = Manifest::load(manifest_path)?;
    let preds = read_predictions(predictions)?;
    let report = evaluate(&preds, &manifest.frames)?;
    report.write_all(out)?;
    let show = |v: Option<f64>| v.map(|x| format!("{x:.2}")).unwrap_or_else(|| "-".into());
    let m = &report.median_abs_error_deg;
    println!(
        "accuracy {:.3}; median abs error siren {} horn {} all {} deg; {} invalid -> {}",
        report.accuracy,
        show(m.siren),
        show(m.horn),
        show(m.all),
        report.invalid_count,
        out.display()
    );
    Ok(0)
}

#[derive(Debug, Serialize)]
struct SplitExport<'a> {
    seed: u64,
    train_fraction: f64,
    by_clip: bool,
    train: Vec<&'a str>,
    test: Vec<&'a str>,
}

pub fn cmd_export_split(manifest_path: &Path, out: &Path) -> Result<i32> {
    let manifest = Manifest::load(manifest_path)?;
    let info = manifest
        .split
        .as_ref()
        .ok_or_else(|| Error::Validation("manifest has no split; run `sdsp features` first".into()))?;
    let ids = |s: Split| manifest.frames.iter().filter(|f| f.split == Some(s)).map(|f| f.id.as_str()).collect();
    let export = SplitExport {
        seed: info.seed,
        train_fraction: info.train_fraction,
        by_clip: info.by_clip,
        train: ids(Split::Train),
        test: ids(Split::Test),
    };
    let text = serde_json::to_string_pretty(&export).map_err(|e| Error::json(out, e))?;
    std::fs::write(out, text + "\n").map_err(|e| Error::io(out, e))?;
    println!("{} train / {} test -> {}", export.train.len(), export.test.len(), out.display());
    Ok(0)
}
