use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::run::{run_once, PROVENANCE, SCHEMA_VERSION};
use super::stats::{mean, stderr};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParam {
    Yh,
    Alpha,
    Lambda,
    Steps,
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepParam::Yh => "yh",
            SweepParam::Alpha => "alpha",
            SweepParam::Lambda => "lambda",
            SweepParam::Steps => "steps",
        })
    }
}

impl FromStr for SweepParam {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "yh" | "y_h" => Ok(SweepParam::Yh),
            "alpha" => Ok(SweepParam::Alpha),
            "lambda" => Ok(SweepParam::Lambda),
            "steps" | "t" => Ok(SweepParam::Steps),
            other => Err(Error::InvalidConfig(format!(
                "unknown sweep parameter `{other}`"
            ))),
        }
    }
}

impl SweepParam {
    /// Value of this parameter in `cfg` after defaults are resolved.
    pub fn current(self, cfg: &RunConfig) -> f64 {
        let bdi = cfg.bdi_config(0);
        match self {
            SweepParam::Yh => bdi.target_score,
            SweepParam::Alpha => bdi.weight_param,
            SweepParam::Lambda => bdi.backward_weight,
            SweepParam::Steps => bdi.steps as f64,
        }
    }

    pub fn set(self, cfg: &RunConfig, value: f64) -> Result<RunConfig> {
        let mut out = cfg.clone();
        match self {
            SweepParam::Yh => out.yh = value,
            SweepParam::Alpha => out.alpha = Some(value),
            SweepParam::Lambda => out.lambda = value,
            SweepParam::Steps => {
                if !(value >= 0.0 && value.fract() == 0.0 && value.is_finite()) {
                    return Err(Error::InvalidConfig(format!(
                        "steps must be a nonnegative integer, got {value}"
                    )));
                }
                out.steps = value as usize;
            }
        }
        out.validate()?;
        Ok(out)
    }
}

/// Parses `5,10,15`.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let grid = text
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidConfig(format!("bad grid value `{t}`")))
        })
        .collect::<Result<Vec<f64>>>()?;
    if grid.is_empty() {
        return Err(Error::Empty("sweep grid"));
    }
    Ok(grid)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    /// Normalized score per seed.
    pub scores: Vec<f64>,
    pub mean: f64,
    pub stderr: f64,
    /// `mean / reference mean`
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub schema: u32,
    pub kind: String,
    pub provenance: String,
    pub parameter: SweepParam,
    pub reference_value: f64,
    pub reference_mean: f64,
    pub base: RunConfig,
    pub points: Vec<SweepPoint>,
}

impl SweepTable {
    pub fn render(&self) -> String {
        let mut out = format!(
            "{} sweep, reference {} = {} (mean {:.4})\n{:>10} {:>10} {:>10} {:>8}\n",
            self.parameter,
            self.parameter,
            self.reference_value,
            self.reference_mean,
            "value",
            "mean",
            "stderr",
            "ratio"
        );
        for p in &self.points {
            out.push_str(&format!(
                "{:>10} {:>10.4} {:>10.4} {:>8.4}\n",
                p.value, p.mean, p.stderr, p.ratio
            ));
        }
        out
    }
}

/// Runs each grid value over the seeds of `base`. Ratios are taken against
/// the base configuration's own value of the parameter, which is run as well
/// when it is not on the grid.
pub fn sweep(base: &RunConfig, param: SweepParam, grid: &[f64]) -> Result<SweepTable> {
    if grid.is_empty() {
        return Err(Error::Empty("sweep grid"));
    }
    base.validate()?;
    let reference = param.current(base);
    let mut values = grid.to_vec();
    if !values.contains(&reference) {
        values.push(reference);
    }
    let configs = values
        .iter()
        .map(|v| param.set(base, *v))
        .collect::<Result<Vec<_>>>()?;
    let seeds = &base.seed.0;
    let cells: Vec<(usize, u64)> = (0..values.len())
        .flat_map(|i| seeds.iter().map(move |s| (i, *s)))
        .collect();
    let scores = cells
        .par_iter()
        .map(|(i, s)| run_once(&configs[*i], *s).map(|r| r.result.score_normalized))
        .collect::<Result<Vec<f64>>>()?;

    let per_value: Vec<Vec<f64>> = scores.chunks(seeds.len()).map(<[f64]>::to_vec).collect();
    let ref_idx = values
        .iter()
        .position(|v| *v == reference)
        .expect("reference was added");
    let reference_mean = mean(&per_value[ref_idx]).ok_or(Error::Empty("seeds"))?;
    let points = grid
        .iter()
        .zip(&per_value)
        .map(|(v, s)| {
            let m = mean(s).ok_or(Error::Empty("seeds"))?;
            Ok(SweepPoint {
                value: *v,
                mean: m,
                stderr: stderr(s).ok_or(Error::Empty("seeds"))?,
                ratio: m / reference_mean,
                scores: s.clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable {
        schema: SCHEMA_VERSION,
        kind: "sweep".into(),
        provenance: PROVENANCE.into(),
        parameter: param,
        reference_value: reference,
        reference_mean,
        base: base.clone(),
        points,
    })
}
