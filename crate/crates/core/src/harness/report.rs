use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::ablate::AblationTable;
use super::run::{RunReport, SCHEMA_VERSION};
use super::stats::{mean, median, stderr};
use super::sweep::SweepTable;
use crate::error::{Error, Result};

/// Any result file the harness writes.
#[derive(Debug, Clone, PartialEq)]
pub enum Document {
    Run(Box<RunReport>),
    Ablation(AblationTable),
    Sweep(SweepTable),
}

impl Document {
    pub fn parse(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text)?;
        match value.get("schema").and_then(Value::as_u64) {
            Some(v) if v == u64::from(SCHEMA_VERSION) => {}
            Some(v) => {
                return Err(Error::SchemaMismatch(format!(
                    "schema version {v}, expected {SCHEMA_VERSION}"
                )))
            }
            None => return Err(Error::SchemaMismatch("missing `schema` field".into())),
        }
        let bad = |e: serde_json::Error| Error::SchemaMismatch(e.to_string());
        Ok(match value.get("kind").and_then(Value::as_str) {
            Some("ablation") => Document::Ablation(serde_json::from_value(value).map_err(bad)?),
            Some("sweep") => Document::Sweep(serde_json::from_value(value).map_err(bad)?),
            Some(other) => return Err(Error::SchemaMismatch(format!("unknown kind `{other}`"))),
            None => Document::Run(Box::new(serde_json::from_value(value).map_err(bad)?)),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Document::parse(&text).map_err(|e| match e {
            Error::SchemaMismatch(m) => Error::SchemaMismatch(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    fn reports(&self) -> Vec<&RunReport> {
        match self {
            Document::Run(r) => vec![r.as_ref()],
            Document::Ablation(t) => t.variants.iter().flat_map(|v| &v.reports).collect(),
            Document::Sweep(_) => Vec::new(),
        }
    }
}

/// Identifies runs that differ only by seed.
pub fn setting_key(r: &RunReport) -> String {
    let c = &r.config;
    let bdi = c.bdi_config(r.seed);
    format!(
        "{}/d{}/{}/{}/yh={}/alpha={}/lambda={}/T={}/m={}-{}",
        r.task.name,
        r.task.dim,
        c.mode,
        c.kernel,
        bdi.target_score,
        bdi.weight_param,
        bdi.backward_weight,
        bdi.steps,
        bdi.num_designs,
        bdi.multi_mode
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettingSummary {
    pub setting: String,
    pub runs: usize,
    pub mean: f64,
    pub stderr: f64,
    pub median: f64,
    pub dataset_best_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema: u32,
    pub kind: String,
    /// Best mean first.
    pub settings: Vec<SettingSummary>,
}

impl Summary {
    pub fn render(&self) -> String {
        let w = self
            .settings
            .iter()
            .map(|s| s.setting.len())
            .max()
            .unwrap_or(7)
            .max(7);
        let mut out = format!(
            "{:>4}  {:<w$} {:>4} {:>16} {:>8} {:>8}\n",
            "rank", "setting", "runs", "mean ± stderr", "median", "D(best)"
        );
        for (i, s) in self.settings.iter().enumerate() {
            out.push_str(&format!(
                "{:>4}  {:<w$} {:>4} {:>7.4} ± {:<6.4} {:>8.4} {:>8.4}\n",
                i + 1,
                s.setting,
                s.runs,
                s.mean,
                s.stderr,
                s.median,
                s.dataset_best_mean
            ));
        }
        out
    }
}

/// Groups runs by setting and aggregates normalized scores.
pub fn summarize(docs: &[Document]) -> Result<Summary> {
    let mut groups: BTreeMap<String, Vec<&RunReport>> = BTreeMap::new();
    for r in docs.iter().flat_map(Document::reports) {
        groups.entry(setting_key(r)).or_default().push(r);
    }
    let mut settings = groups
        .into_iter()
        .map(|(setting, runs)| {
            let scores: Vec<f64> = runs.iter().map(|r| r.result.score_normalized).collect();
            let best: Vec<f64> = runs.iter().map(|r| r.dataset.best_normalized).collect();
            Ok(SettingSummary {
                setting,
                runs: runs.len(),
                mean: mean(&scores).ok_or(Error::Empty("runs"))?,
                stderr: stderr(&scores).ok_or(Error::Empty("runs"))?,
                median: median(&scores).ok_or(Error::Empty("runs"))?,
                dataset_best_mean: mean(&best).ok_or(Error::Empty("runs"))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    settings.sort_by(|a, b| {
        b.mean
            .total_cmp(&a.mean)
            .then_with(|| a.setting.cmp(&b.setting))
    });
    Ok(Summary {
        schema: SCHEMA_VERSION,
        kind: "summary".into(),
        settings,
    })
}

/// Long format: `setting,seed,step,l2h,h2l,total`.
pub fn trace_csv(docs: &[Document]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(["setting", "seed", "step", "l2h", "h2l", "total"])?;
    for r in docs.iter().flat_map(Document::reports) {
        let key = setting_key(r);
        for t in &r.trace {
            w.write_record([
                key.clone(),
                r.seed.to_string(),
                t.step.to_string(),
                t.l2h.to_string(),
                t.h2l.to_string(),
                t.total.to_string(),
            ])?;
        }
    }
    into_string(w)
}

/// Long format: `parameter,value,mean,stderr,ratio`.
pub fn sweep_csv(docs: &[Document]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(["parameter", "value", "mean", "stderr", "ratio"])?;
    for d in docs {
        if let Document::Sweep(t) = d {
            for p in &t.points {
                w.write_record([
                    t.parameter.to_string(),
                    p.value.to_string(),
                    p.mean.to_string(),
                    p.stderr.to_string(),
                    p.ratio.to_string(),
                ])?;
            }
        }
    }
    into_string(w)
}

fn into_string(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}
