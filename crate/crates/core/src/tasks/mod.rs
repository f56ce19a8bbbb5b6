//! Synthetic design tasks with exact oracles.
//!
//! Continuous tasks are negated classical benchmarks on a box, so that larger
//! is better. The discrete task is a length-8, 4-ary sequence landscape small
//! enough to enumerate exhaustively; its designs are optimized as logits.

mod dataset;
mod discrete;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use dataset::{
    generate_offline, normalized_ground_truth, read_csv, write_csv, DatasetRecords, OfflineDataset,
    DEFAULT_KEEP_FRACTION,
};
pub use discrete::{decode_discrete, encode_discrete, DiscreteLandscape, ALPHABET, SEQ_LEN};

/// Independent random streams derived from one task seed.
pub(crate) const STREAM_TASK: u64 = 0;
pub(crate) const STREAM_DATASET: u64 = 1;

pub(crate) fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    /// `−‖x − c‖²` on `[−2, 2]^D`, centre drawn from the seed.
    QuadBowl,
    /// Negated Ackley on `[−5, 5]^D`, maximum 0 at the origin.
    NegAckley,
    /// Negated Styblinski–Tang on `[−5, 5]^D`.
    NegStyblinskiTang,
    /// Enumerable length-8, 4-ary sequence landscape.
    Discrete8,
}

impl TaskKind {
    pub fn is_discrete(self) -> bool {
        self == TaskKind::Discrete8
    }

    pub fn default_dim(self) -> usize {
        match self {
            TaskKind::QuadBowl => 10,
            TaskKind::NegAckley | TaskKind::NegStyblinskiTang => 60,
            TaskKind::Discrete8 => SEQ_LEN * ALPHABET,
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TaskKind::QuadBowl => "quadbowl",
            TaskKind::NegAckley => "negackley",
            TaskKind::NegStyblinskiTang => "negstyblinskitang",
            TaskKind::Discrete8 => "discrete8",
        })
    }
}

impl FromStr for TaskKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "quadbowl" => Ok(TaskKind::QuadBowl),
            "negackley" | "ackley" => Ok(TaskKind::NegAckley),
            "negstyblinskitang" | "styblinskitang" | "negst" => Ok(TaskKind::NegStyblinskiTang),
            "discrete8" | "discrete" | "discretelandscape" => Ok(TaskKind::Discrete8),
            other => Err(Error::InvalidConfig(format!("unknown task `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub kind: TaskKind,
    /// Design dimension. For the discrete task this is fixed at 8 × 4 logits.
    pub dim: usize,
    pub seed: u64,
}

impl TaskSpec {
    pub fn new(kind: TaskKind, dim: Option<usize>, seed: u64) -> Self {
        TaskSpec {
            kind,
            dim: dim.unwrap_or(kind.default_dim()),
            seed,
        }
    }
}

#[derive(Debug, Clone)]
enum Landscape {
    Quad { center: Vec<f64> },
    Ackley,
    Styblinski { argmax: f64 },
    Discrete(Box<DiscreteLandscape>),
}

/// A task instance: oracle, design box and known optimum.
#[derive(Debug, Clone)]
pub struct Task {
    spec: TaskSpec,
    landscape: Landscape,
}

impl Task {
    pub fn new(spec: TaskSpec) -> Result<Self> {
        if spec.dim == 0 {
            return Err(Error::InvalidConfig(
                "task dimension must be positive".into(),
            ));
        }
        let mut rng = rng_for(spec.seed, STREAM_TASK);
        let landscape = match spec.kind {
            TaskKind::QuadBowl => Landscape::Quad {
                center: (0..spec.dim).map(|_| rng.random_range(-1.0..1.0)).collect(),
            },
            TaskKind::NegAckley => Landscape::Ackley,
            TaskKind::NegStyblinskiTang => Landscape::Styblinski {
                argmax: styblinski_argmax(),
            },
            TaskKind::Discrete8 => {
                if spec.dim != SEQ_LEN * ALPHABET {
                    return Err(Error::InvalidConfig(format!(
                        "discrete task has fixed dimension {}, got {}",
                        SEQ_LEN * ALPHABET,
                        spec.dim
                    )));
                }
                Landscape::Discrete(Box::new(DiscreteLandscape::new(&mut rng)))
            }
        };
        Ok(Task { spec, landscape })
    }

    pub fn spec(&self) -> &TaskSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    pub fn is_discrete(&self) -> bool {
        self.spec.kind.is_discrete()
    }

    /// Per-coordinate box of continuous designs.
    pub fn bounds(&self) -> (f64, f64) {
        match self.landscape {
            Landscape::Quad { .. } => (-2.0, 2.0),
            Landscape::Ackley | Landscape::Styblinski { .. } => (-5.0, 5.0),
            // logits are unconstrained
            Landscape::Discrete(_) => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    pub fn discrete(&self) -> Option<&DiscreteLandscape> {
        match &self.landscape {
            Landscape::Discrete(d) => Some(d),
            _ => None,
        }
    }

    /// Exact score of a design. Discrete designs are logits and are decoded first.
    pub fn oracle(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::OutOfBounds {
                index: i,
                value: x[i],
            });
        }
        let (lo, hi) = self.bounds();
        if let Some(i) = x.iter().position(|v| *v < lo || *v > hi) {
            return Err(Error::OutOfBounds {
                index: i,
                value: x[i],
            });
        }
        Ok(match &self.landscape {
            Landscape::Quad { center } => -x
                .iter()
                .zip(center)
                .map(|(a, c)| (a - c) * (a - c))
                .sum::<f64>(),
            Landscape::Ackley => neg_ackley(x),
            Landscape::Styblinski { .. } => neg_styblinski_tang(x),
            Landscape::Discrete(d) => d.score(&decode_discrete(x, ALPHABET)?)?,
        })
    }

    /// Largest attainable score.
    pub fn global_max(&self) -> f64 {
        match &self.landscape {
            Landscape::Quad { .. } | Landscape::Ackley => 0.0,
            Landscape::Styblinski { argmax } => neg_styblinski_tang(&vec![*argmax; self.dim()]),
            Landscape::Discrete(d) => d.max_score(),
        }
    }

    /// A design attaining [`Task::global_max`].
    pub fn argmax(&self) -> Vec<f64> {
        match &self.landscape {
            Landscape::Quad { center } => center.clone(),
            Landscape::Ackley => vec![0.0; self.dim()],
            Landscape::Styblinski { argmax } => vec![*argmax; self.dim()],
            Landscape::Discrete(d) => encode_discrete(d.argmax(), 1.0, ALPHABET),
        }
    }

    /// Projects a design into the box; returns whether anything moved.
    pub fn clip(&self, x: &mut [f64]) -> bool {
        let (lo, hi) = self.bounds();
        let mut moved = false;
        for v in x.iter_mut() {
            let c = v.clamp(lo, hi);
            moved |= c != *v;
            *v = c;
        }
        moved
    }

    pub(crate) fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        match &self.landscape {
            Landscape::Discrete(_) => {
                let tokens: Vec<usize> = (0..SEQ_LEN)
                    .map(|_| rng.random_range(0..ALPHABET))
                    .collect();
                encode_discrete(&tokens, 1.0, ALPHABET)
            }
            _ => {
                let (lo, hi) = self.bounds();
                (0..self.dim()).map(|_| rng.random_range(lo..hi)).collect()
            }
        }
    }
}

fn neg_ackley(x: &[f64]) -> f64 {
    use std::f64::consts::{E, PI};
    let n = x.len() as f64;
    let sq = x.iter().map(|v| v * v).sum::<f64>() / n;
    let cos = x.iter().map(|v| (2.0 * PI * v).cos()).sum::<f64>() / n;
    -(-20.0 * (-0.2 * sq.sqrt()).exp() - cos.exp() + 20.0 + E)
}

fn neg_styblinski_tang(x: &[f64]) -> f64 {
    -0.5 * x
        .iter()
        .map(|v| v.powi(4) - 16.0 * v * v + 5.0 * v)
        .sum::<f64>()
}

/// Negative root of `4x³ − 32x + 5`, the per-coordinate maximizer.
fn styblinski_argmax() -> f64 {
    let mut x: f64 = -2.9;
    for _ in 0..50 {
        let f = 4.0 * x.powi(3) - 32.0 * x + 5.0;
        let df = 12.0 * x * x - 32.0;
        x -= f / df;
    }
    x
}
