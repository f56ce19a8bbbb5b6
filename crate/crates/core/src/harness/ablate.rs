use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{KernelKind, RunConfig};
use super::run::{run_once, RunReport, PROVENANCE, SCHEMA_VERSION};
use super::stats::{mean, median, stderr};
use crate::bidirectional::LossMode;
use crate::error::{Error, Result};

/// Rows of the ablation table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Full,
    /// Forward branch only.
    WithoutH2l,
    /// Backward branch only.
    WithoutL2h,
    /// Full loss with the RBF kernel everywhere.
    Ntk2Rbf,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::Full,
        Variant::WithoutH2l,
        Variant::WithoutL2h,
        Variant::Ntk2Rbf,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Variant::Full => "full",
            Variant::WithoutH2l => "w/o h2l (forward only)",
            Variant::WithoutL2h => "w/o l2h (backward only)",
            Variant::Ntk2Rbf => "ntk2rbf",
        }
    }

    /// `base` adjusted for this variant.
    pub fn apply(self, base: &RunConfig) -> RunConfig {
        let mut cfg = base.clone();
        match self {
            Variant::Full => cfg.mode = LossMode::Full,
            Variant::WithoutH2l => cfg.mode = LossMode::Forward,
            Variant::WithoutL2h => cfg.mode = LossMode::Backward,
            Variant::Ntk2Rbf => {
                cfg.mode = LossMode::Full;
                cfg.kernel = KernelKind::Rbf;
            }
        }
        cfg
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantSummary {
    pub variant: Variant,
    pub label: String,
    /// Normalized score per seed, in seed order.
    pub scores: Vec<f64>,
    pub mean: f64,
    pub stderr: f64,
    pub median: f64,
    pub mean_similarity: f64,
    pub reports: Vec<RunReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationTable {
    pub schema: u32,
    pub kind: String,
    pub provenance: String,
    pub base: RunConfig,
    pub variants: Vec<VariantSummary>,
}

impl AblationTable {
    pub fn variant(&self, v: Variant) -> Option<&VariantSummary> {
        self.variants.iter().find(|s| s.variant == v)
    }

    /// JSON with every wall-clock field zeroed.
    pub fn canonical_json(&self) -> Result<String> {
        let mut t = self.clone();
        for v in &mut t.variants {
            for r in &mut v.reports {
                r.wall_clock_seconds = 0.0;
            }
        }
        Ok(serde_json::to_string_pretty(&t)?)
    }

    /// Plain-text comparison table.
    pub fn render(&self) -> String {
        let mut out = format!(
            "{:<26} {:>10} {:>10} {:>10}\n",
            "variant", "mean", "stderr", "simi"
        );
        for v in &self.variants {
            out.push_str(&format!(
                "{:<26} {:>10.4} {:>10.4} {:>10.4}\n",
                v.label, v.mean, v.stderr, v.mean_similarity
            ));
        }
        out
    }
}

/// Runs all four variants over the seeds of `base`, sharing datasets and
/// initial designs between variants of the same seed.
pub fn ablate(base: &RunConfig) -> Result<AblationTable> {
    base.validate()?;
    let seeds = &base.seed.0;
    let cells: Vec<(Variant, u64)> = Variant::ALL
        .iter()
        .flat_map(|v| seeds.iter().map(move |s| (*v, *s)))
        .collect();
    let reports = cells
        .par_iter()
        .map(|(v, s)| run_once(&v.apply(base), *s))
        .collect::<Result<Vec<_>>>()?;

    let mut variants = Vec::with_capacity(Variant::ALL.len());
    for (i, v) in Variant::ALL.iter().enumerate() {
        let chunk = reports[i * seeds.len()..(i + 1) * seeds.len()].to_vec();
        let scores: Vec<f64> = chunk.iter().map(|r| r.result.score_normalized).collect();
        let simi: Vec<f64> = chunk.iter().map(|r| r.similarity.final_).collect();
        variants.push(VariantSummary {
            variant: *v,
            label: v.label().into(),
            mean: mean(&scores).ok_or(Error::Empty("seeds"))?,
            stderr: stderr(&scores).ok_or(Error::Empty("seeds"))?,
            median: median(&scores).ok_or(Error::Empty("seeds"))?,
            mean_similarity: mean(&simi).ok_or(Error::Empty("seeds"))?,
            scores,
            reports: chunk,
        });
    }
    Ok(AblationTable {
        schema: SCHEMA_VERSION,
        kind: "ablation".into(),
        provenance: PROVENANCE.into(),
        base: base.clone(),
        variants,
    })
}
