use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};

use super::{rng_for, Task, STREAM_DATASET};
use crate::error::{Error, Result};

pub const DEFAULT_KEEP_FRACTION: f64 = 0.5;

/// Static dataset of low-scoring designs with normalization metadata.
///
/// Designs are stored standardized per coordinate (zero mean, unit sample
/// deviation over the kept rows); this is the space the optimizer works in.
/// [`OfflineDataset::to_task_space`] maps a design back for the oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct OfflineDataset {
    /// `N × D` standardized designs, one per row.
    pub designs: DMatrix<f64>,
    /// The same designs in task coordinates, exactly as sampled.
    pub task_designs: DMatrix<f64>,
    pub design_mean: DVector<f64>,
    /// Per-coordinate scale; coordinates with zero spread use 1.
    pub design_std: DVector<f64>,
    pub raw: DVector<f64>,
    /// `(raw − norm_mean) / norm_std`
    pub scores: DVector<f64>,
    pub norm_mean: f64,
    pub norm_std: f64,
    /// Lowest score of the full (unobserved) landscape sample.
    pub y_min: f64,
    /// Highest attainable score.
    pub y_max: f64,
}

impl OfflineDataset {
    pub fn len(&self) -> usize {
        self.designs.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.designs.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.designs.ncols()
    }

    pub fn to_task_space(&self, z: &[f64]) -> Vec<f64> {
        z.iter()
            .enumerate()
            .map(|(j, v)| v * self.design_std[j] + self.design_mean[j])
            .collect()
    }

    pub fn to_model_space(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(j, v)| (v - self.design_mean[j]) / self.design_std[j])
            .collect()
    }

    pub fn normalized_ground_truth(&self, y_raw: f64) -> Result<f64> {
        normalized_ground_truth(y_raw, self.y_min, self.y_max)
    }

    /// Normalized ground-truth score of the best design in the dataset.
    pub fn best_normalized(&self) -> Result<f64> {
        let best = self.raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        self.normalized_ground_truth(best)
    }

    /// Rows whose raw score is among the top `fraction` (at least one row).
    pub fn top_fraction(&self, fraction: f64) -> DMatrix<f64> {
        let k = ((fraction * self.len() as f64).ceil() as usize).clamp(1, self.len());
        let ranked = crate::bidirectional::rank_by_score(&self.raw);
        DMatrix::from_fn(k, self.dim(), |i, j| self.designs[(ranked[i], j)])
    }
}

/// `(y − y_min) / (y_max − y_min)`.
pub fn normalized_ground_truth(y_raw: f64, y_min: f64, y_max: f64) -> Result<f64> {
    if !(y_max > y_min) || !y_min.is_finite() || !y_max.is_finite() {
        return Err(Error::DegenerateRange { y_min, y_max });
    }
    Ok((y_raw - y_min) / (y_max - y_min))
}

/// Samples `n` designs uniformly, keeps the lowest-scoring `keep_fraction`
/// (in sampling order) and standardizes their scores and design coordinates
/// to zero mean and unit sample standard deviation.
pub fn generate_offline(task: &Task, n: usize, keep_fraction: f64) -> Result<OfflineDataset> {
    if n < 10 {
        return Err(Error::InvalidConfig(format!(
            "need at least 10 samples, got {n}"
        )));
    }
    if !(keep_fraction > 0.0 && keep_fraction <= 1.0) {
        return Err(Error::DegenerateKeepFraction(keep_fraction));
    }
    let keep = (keep_fraction * n as f64).round() as usize;
    if keep < 2 {
        return Err(Error::DegenerateKeepFraction(keep_fraction));
    }

    let mut rng = rng_for(task.spec().seed, STREAM_DATASET);
    let samples: Vec<Vec<f64>> = (0..n).map(|_| task.sample(&mut rng)).collect();
    let raw_all = samples
        .iter()
        .map(|x| task.oracle(x))
        .collect::<Result<Vec<f64>>>()?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| raw_all[a].total_cmp(&raw_all[b]).then(a.cmp(&b)));
    let mut kept: Vec<usize> = order[..keep].to_vec();
    kept.sort_unstable();

    let raw = DVector::from_iterator(keep, kept.iter().map(|&i| raw_all[i]));
    let mean = raw.mean();
    let var = raw.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / (keep as f64 - 1.0);
    let std = var.sqrt();
    if !(std > 0.0) {
        return Err(Error::DegenerateRange {
            y_min: mean,
            y_max: mean,
        });
    }
    let scores = raw.map(|r| (r - mean) / std);

    let sample_min = raw_all.iter().copied().fold(f64::INFINITY, f64::min);
    let (y_min, y_max) = match task.discrete() {
        Some(d) => (d.min_score(), d.max_score()),
        None => (sample_min, task.global_max()),
    };

    let dim = task.dim();
    let x = DMatrix::from_fn(keep, dim, |i, j| samples[kept[i]][j]);
    let design_mean = DVector::from_fn(dim, |j, _| x.column(j).mean());
    let design_std = DVector::from_fn(dim, |j, _| {
        let m = design_mean[j];
        let v = x.column(j).iter().map(|a| (a - m) * (a - m)).sum::<f64>() / (keep as f64 - 1.0);
        if v > 0.0 {
            v.sqrt()
        } else {
            1.0
        }
    });
    Ok(OfflineDataset {
        designs: DMatrix::from_fn(keep, dim, |i, j| {
            (x[(i, j)] - design_mean[j]) / design_std[j]
        }),
        task_designs: x,
        design_mean,
        design_std,
        raw,
        scores,
        norm_mean: mean,
        norm_std: std,
        y_min,
        y_max,
    })
}

/// Rows of a dataset CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetRecords {
    pub designs: DMatrix<f64>,
    pub raw: DVector<f64>,
    pub normalized: DVector<f64>,
}

impl From<&OfflineDataset> for DatasetRecords {
    fn from(d: &OfflineDataset) -> Self {
        DatasetRecords {
            designs: d.task_designs.clone(),
            raw: d.raw.clone(),
            normalized: d.scores.clone(),
        }
    }
}

fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `x0,…,x{D-1},score_raw,score_norm` with 17 significant digits.
pub fn write_csv<W: Write>(records: &DatasetRecords, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let d = records.designs.ncols();
    let mut header: Vec<String> = (0..d).map(|j| format!("x{j}")).collect();
    header.push("score_raw".into());
    header.push("score_norm".into());
    w.write_record(&header)?;
    for i in 0..records.designs.nrows() {
        let mut row: Vec<String> = records
            .designs
            .row(i)
            .iter()
            .map(|v| fmt_float(*v))
            .collect();
        row.push(fmt_float(records.raw[i]));
        row.push(fmt_float(records.normalized[i]));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<DatasetRecords> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    let header = r.headers()?.clone();
    let cols = header.len();
    if cols < 3 {
        return Err(Error::SchemaMismatch(format!(
            "expected at least 3 columns, got {cols}"
        )));
    }
    let d = cols - 2;
    for (j, name) in header.iter().take(d).enumerate() {
        if name != format!("x{j}") {
            return Err(Error::SchemaMismatch(format!(
                "column {j} is `{name}`, expected `x{j}`"
            )));
        }
    }
    if &header[d] != "score_raw" || &header[d + 1] != "score_norm" {
        return Err(Error::SchemaMismatch(
            "missing score_raw/score_norm columns".into(),
        ));
    }
    let mut values = Vec::new();
    let mut raw = Vec::new();
    let mut norm = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let parsed = rec
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("`{f}`: {e}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        values.extend_from_slice(&parsed[..d]);
        raw.push(parsed[d]);
        norm.push(parsed[d + 1]);
    }
    Ok(DatasetRecords {
        designs: DMatrix::from_row_slice(raw.len(), d, &values),
        raw: DVector::from_vec(raw),
        normalized: DVector::from_vec(norm),
    })
}
