use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{median, median_filter_estimates, DoAEstimate};
use crate::manifest::FrameRecord;
use crate::scene::EventClass;
use crate::{Error, Result};

pub const HISTOGRAM_BIN_DEG: f64 = 2.5;
pub const SNR_BUCKET_DB: f64 = 5.0;
pub const MEDIAN_ORDERS: [usize; 5] = [1, 3, 5, 7, 9];

/// One line of a predictions file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Prediction {
    pub id: String,
    pub class: EventClass,
    /// `null` when no direction was estimated.
    pub alpha_deg: Option<f64>,
    pub valid: bool,
}

impl Prediction {
    fn alpha(&self) -> Option<f64> {
        self.alpha_deg.filter(|a| self.valid && a.is_finite())
    }
}

/// Read JSON-lines predictions; blank lines are ignored.
pub fn read_predictions(path: &Path) -> Result<Vec<Prediction>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l)
                .map_err(|e| Error::Format(format!("{}:{}: {e}", path.display(), i + 1)))
        })
        .collect()
}

pub fn write_predictions(path: &Path, preds: &[Prediction]) -> Result<()> {
    let mut out = String::new();
    for p in preds {
        out.push_str(&serde_json::to_string(p).map_err(|e| Error::json(path, e))?);
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MedianErrors {
    pub siren: Option<f64>,
    pub horn: Option<f64>,
    pub all: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnrBucket {
    pub snr_lo_db: f64,
    pub snr_hi_db: f64,
    pub count: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderPoint {
    pub order: usize,
    pub median_abs_error_deg: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n_predictions: usize,
    /// Alerting frames with a usable direction estimate.
    pub n_localised: usize,
    /// Alerting frames without one.
    pub invalid_count: usize,
    /// Row and column order of the confusion matrices.
    pub classes: [EventClass; 3],
    /// Rows are true classes, columns predictions.
    pub confusion_counts: [[usize; 3]; 3],
    /// Row-normalised; rows without frames stay zero.
    pub confusion: [[f64; 3]; 3],
    pub accuracy: f64,
    pub median_abs_error_deg: MedianErrors,
    pub mean_abs_error_deg: Option<f64>,
    pub histogram_bin_deg: f64,
    /// Fraction of localisation errors per bin, starting at 0 degrees.
    pub error_histogram: Vec<f64>,
    pub accuracy_vs_snr: Vec<SnrBucket>,
    /// Pooled median error after per-clip median filtering of each order.
    pub median_order_curve: Vec<OrderPoint>,
}

/// Score predictions against the frames they name. Every prediction must
/// match exactly one frame.
pub fn evaluate(predictions: &[Prediction], frames: &[FrameRecord]) -> Result<EvalReport> {
    if predictions.is_empty() {
        return Err(Error::Validation("no predictions to evaluate".into()));
    }
    let by_id: HashMap<&str, &FrameRecord> = frames.iter().map(|f| (f.id.as_str(), f)).collect();
    let mut seen = HashSet::new();
    let mut pairs = Vec::with_capacity(predictions.len());
    for p in predictions {
        let truth = by_id
            .get(p.id.as_str())
            .ok_or_else(|| Error::Validation(format!("prediction {:?} matches no frame", p.id)))?;
        if !seen.insert(p.id.as_str()) {
            return Err(Error::Validation(format!("duplicate prediction {:?}", p.id)));
        }
        pairs.push((p, *truth));
    }

    let mut counts = [[0usize; 3]; 3];
    for (p, t) in &pairs {
        counts[t.class.index()][p.class.index()] += 1;
    }
    let mut confusion = [[0.0; 3]; 3];
    for (row, c) in confusion.iter_mut().zip(&counts) {
        let n: usize = c.iter().sum();
        if n > 0 {
            for (v, &k) in row.iter_mut().zip(c) {
                *v = k as f64 / n as f64;
            }
        }
    }
    let correct = pairs.iter().filter(|(p, t)| p.class == t.class).count();

    let alerting: Vec<_> = pairs.iter().filter(|(_, t)| t.class.is_alerting()).collect();
    let errors: Vec<(EventClass, f64)> = alerting
        .iter()
        .filter_map(|(p, t)| p.alpha().map(|a| (t.class, (a - t.alpha_deg).abs())))
        .collect();
    let of = |c: Option<EventClass>| -> Vec<f64> {
        errors.iter().filter(|(k, _)| c.is_none_or(|c| *k == c)).map(|(_, e)| *e).collect()
    };
    let all = of(None);

    let n_bins = (180.0 / HISTOGRAM_BIN_DEG).ceil() as usize;
    let mut histogram = vec![0.0; n_bins];
    for e in &all {
        histogram[((e / HISTOGRAM_BIN_DEG) as usize).min(n_bins - 1)] += 1.0;
    }
    if !all.is_empty() {
        histogram.iter_mut().for_each(|h| *h /= all.len() as f64);
    }

    let mut buckets: BTreeMap<i64, (usize, usize)> = BTreeMap::new();
    for (p, t) in &pairs {
        let b = buckets.entry((t.snr_db / SNR_BUCKET_DB).floor() as i64).or_default();
        b.0 += 1;
        b.1 += usize::from(p.class == t.class);
    }
    let accuracy_vs_snr = buckets
        .into_iter()
        .map(|(k, (n, ok))| SnrBucket {
            snr_lo_db: k as f64 * SNR_BUCKET_DB,
            snr_hi_db: (k + 1) as f64 * SNR_BUCKET_DB,
            count: n,
            accuracy: ok as f64 / n as f64,
        })
        .collect();

    Ok(EvalReport {
        n_predictions: pairs.len(),
        n_localised: all.len(),
        invalid_count: alerting.len() - all.len(),
        classes: EventClass::ALL,
        confusion_counts: counts,
        confusion,
        accuracy: correct as f64 / pairs.len() as f64,
        median_abs_error_deg: MedianErrors {
            siren: median(&of(Some(EventClass::Siren))),
            horn: median(&of(Some(EventClass::Horn))),
            all: median(&all),
        },
        mean_abs_error_deg: (!all.is_empty()).then(|| all.iter().sum::<f64>() / all.len() as f64),
        histogram_bin_deg: HISTOGRAM_BIN_DEG,
        error_histogram: histogram,
        accuracy_vs_snr,
        median_order_curve: MEDIAN_ORDERS
            .iter()
            .map(|&order| OrderPoint {
                order,
                median_abs_error_deg: filtered_median_error(&alerting, order),
            })
            .collect(),
    })
}

/// Median error after filtering each clip's estimates in frame order.
fn filtered_median_error(alerting: &[&(&Prediction, &FrameRecord)], order: usize) -> Option<f64> {
    let mut clips: BTreeMap<usize, Vec<(&Prediction, &FrameRecord)>> = BTreeMap::new();
    for (p, t) in alerting {
        clips.entry(t.clip).or_default().push((p, t));
    }
    let mut errors = Vec::new();
    for mut seq in clips.into_values() {
        seq.sort_by_key(|(_, t)| t.frame_index);
        let est: Vec<DoAEstimate> = seq
            .iter()
            .map(|(p, t)| match p.alpha() {
                Some(a) => DoAEstimate::valid(a, t.frame_index),
                None => DoAEstimate::invalid(t.frame_index),
            })
            .collect();
        let filtered = median_filter_estimates(&est, order).expect("orders are odd");
        errors.extend(
            filtered
                .iter()
                .zip(&seq)
                .filter(|(e, _)| e.valid)
                .map(|(e, (_, t))| (e.alpha_deg - t.alpha_deg).abs()),
        );
    }
    median(&errors)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl EvalReport {
    pub fn save_json(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self).map_err(|e| Error::json(path, e))?;
        text.push('\n');
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn accuracy_vs_snr_csv(&self) -> String {
        let mut s = String::from("snr_lo_db,snr_hi_db,count,accuracy\n");
        for b in &self.accuracy_vs_snr {
            let _ = writeln!(s, "{},{},{},{}", b.snr_lo_db, b.snr_hi_db, b.count, b.accuracy);
        }
        s
    }

    pub fn error_histogram_csv(&self) -> String {
        let mut s = String::from("error_lo_deg,error_hi_deg,fraction\n");
        for (i, f) in self.error_histogram.iter().enumerate() {
            let lo = i as f64 * self.histogram_bin_deg;
            let _ = writeln!(s, "{},{},{}", lo, lo + self.histogram_bin_deg, f);
        }
        s
    }

    pub fn median_order_csv(&self) -> String {
        let mut s = String::from("order,median_abs_error_deg\n");
        for p in &self.median_order_curve {
            let _ = writeln!(s, "{},{}", p.order, opt(p.median_abs_error_deg));
        }
        s
    }

    /// `report.json` plus the three plot CSVs.
    pub fn write_all(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        self.save_json(&dir.join("report.json"))?;
        for (name, body) in [
            ("accuracy_vs_snr.csv", self.accuracy_vs_snr_csv()),
            ("error_histogram.csv", self.error_histogram_csv()),
            ("median_order.csv", self.median_order_csv()),
        ] {
            let p = dir.join(name);
            std::fs::write(&p, body).map_err(|e| Error::io(&p, e))?;
        }
        Ok(())
    }
}
