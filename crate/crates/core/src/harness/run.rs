use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::stats::median;
use crate::bidirectional::{
    initial_designs, optimize, rank_rows_by_prediction, select_design, similarity, LossBreakdown,
    Objective,
};
use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::tasks::{decode_discrete, generate_offline, Task, TaskSpec, ALPHABET};

pub const SCHEMA_VERSION: u32 = 1;

/// Fraction of the offline set used as the similarity reference.
pub const SIMILARITY_FRACTION: f64 = 0.1;

pub const PROVENANCE: &str =
    "synthetic desk-scale analog: exact synthetic oracles stand in for benchmark datasets";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskInfo {
    pub name: String,
    pub dim: usize,
    pub seed: u64,
    pub y_min: f64,
    pub y_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub rows: usize,
    pub norm_mean: f64,
    pub norm_std: f64,
    /// Normalized ground-truth score of the best offline design.
    pub best_normalized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityStats {
    /// Rows in the reference set (top-scoring decile of the offline data).
    pub reference_rows: usize,
    pub initial: f64,
    #[serde(rename = "final")]
    pub final_: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluated {
    pub row: usize,
    /// In task coordinates (clipped to the box for continuous tasks).
    pub design: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tokens: Option<Vec<usize>>,
    pub prediction: f64,
    pub score_raw: f64,
    pub score_normalized: f64,
}

/// Outcome of one seeded run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: u32,
    pub provenance: String,
    pub seed: u64,
    pub config: RunConfig,
    pub task: TaskInfo,
    pub kernel: KernelSpec,
    pub regularization_used: f64,
    pub dataset: DatasetInfo,
    /// The reported design.
    pub result: Evaluated,
    /// The `top_k` rows with the highest proxy prediction, best first.
    pub top_k: Vec<Evaluated>,
    pub percentile_100: f64,
    pub percentile_50: f64,
    pub similarity: SimilarityStats,
    pub trace: Vec<LossBreakdown>,
    pub wall_clock_seconds: f64,
}

impl RunReport {
    /// Serialized form with the wall-clock field zeroed.
    pub fn canonical_json(&self) -> Result<String> {
        let mut r = self.clone();
        r.wall_clock_seconds = 0.0;
        Ok(serde_json::to_string_pretty(&r)?)
    }
}

/// Builds the task and dataset, optimizes and scores the result for one seed.
pub fn run_once(cfg: &RunConfig, seed: u64) -> Result<RunReport> {
    let started = Instant::now();
    cfg.validate()?;
    let task = Task::new(TaskSpec::new(cfg.task, cfg.dim, seed))?;
    let data = generate_offline(&task, cfg.n, cfg.keep_fraction)?;
    let spec = cfg.kernel_spec(&data.designs)?;
    let bdi = cfg.bdi_config(seed);
    let objective = Objective::new(&data.designs, &data.scores, spec, &bdi)?;

    let init = initial_designs(&objective, &data.designs, &data.scores)?;
    let optimized = optimize(&objective, init.clone())?;
    let chosen = select_design(&objective, &optimized.designs)?;

    let evaluate = |row: usize| -> Result<Evaluated> {
        let model = optimized.designs.row(row);
        let prediction = objective.predict(&model)?;
        let mut design = data.to_task_space(&model);
        let tokens = if task.is_discrete() {
            Some(decode_discrete(&design, ALPHABET)?)
        } else {
            task.clip(&mut design);
            None
        };
        let score_raw = task.oracle(&design)?;
        Ok(Evaluated {
            row,
            score_normalized: data.normalized_ground_truth(score_raw)?,
            design,
            tokens,
            prediction,
            score_raw,
        })
    };

    let result = evaluate(chosen)?;
    let ranked = rank_rows_by_prediction(&objective, &optimized.designs)?;
    let top_k = ranked
        .iter()
        .take(cfg.top_k)
        .map(|&r| evaluate(r))
        .collect::<Result<Vec<_>>>()?;
    let normalized: Vec<f64> = top_k.iter().map(|e| e.score_normalized).collect();
    let percentile_100 = normalized.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let percentile_50 = median(&normalized).ok_or(Error::Empty("top-k designs"))?;

    let reference = data.top_fraction(SIMILARITY_FRACTION);
    let simi = SimilarityStats {
        reference_rows: reference.nrows(),
        initial: similarity(&spec, &init.row(chosen), &reference)?,
        final_: similarity(&spec, &optimized.designs.row(chosen), &reference)?,
    };

    Ok(RunReport {
        schema: SCHEMA_VERSION,
        provenance: PROVENANCE.into(),
        seed,
        config: cfg.with_seed(seed),
        task: TaskInfo {
            name: cfg.task.to_string(),
            dim: task.dim(),
            seed,
            y_min: data.y_min,
            y_max: data.y_max,
        },
        kernel: spec,
        regularization_used: objective.forward_solution().regularization,
        dataset: DatasetInfo {
            rows: data.len(),
            norm_mean: data.norm_mean,
            norm_std: data.norm_std,
            best_normalized: data.best_normalized()?,
        },
        result,
        top_k,
        percentile_100,
        percentile_50,
        similarity: simi,
        trace: optimized.trace,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    })
}

/// Runs every seed of `cfg` (in parallel) and returns reports in seed order.
pub fn run_all(cfg: &RunConfig) -> Result<Vec<RunReport>> {
    use rayon::prelude::*;
    cfg.validate()?;
    cfg.seed.0.par_iter().map(|&s| run_once(cfg, s)).collect()
}
