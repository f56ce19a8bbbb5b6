use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::bidirectional::{BdiConfig, GradMethod, LossMode, MultiDesignMode};
use crate::error::{Error, Result};
use crate::kernel::{median_heuristic_bandwidth, KernelSpec};
use crate::tasks::{TaskKind, DEFAULT_KEEP_FRACTION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Ntk,
    Rbf,
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KernelKind::Ntk => "ntk",
            KernelKind::Rbf => "rbf",
        })
    }
}

impl FromStr for KernelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "ntk" => Ok(KernelKind::Ntk),
            "rbf" => Ok(KernelKind::Rbf),
            other => Err(Error::InvalidConfig(format!("unknown kernel `{other}`"))),
        }
    }
}

/// Seeds to run: `3`, `0..4` (inclusive) or `1,5,9`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SeedList(pub Vec<u64>);

impl SeedList {
    pub fn single(seed: u64) -> Self {
        SeedList(vec![seed])
    }

    pub fn range(first: u64, last: u64) -> Self {
        SeedList((first..=last).collect())
    }
}

impl FromStr for SeedList {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let num = |t: &str| {
            t.trim()
                .parse::<u64>()
                .map_err(|_| Error::InvalidConfig(format!("bad seed `{t}`")))
        };
        let seeds = if let Some((a, b)) = s.split_once("..") {
            let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
            if b < a {
                return Err(Error::InvalidConfig(format!("empty seed range `{s}`")));
            }
            (a..=b).collect()
        } else {
            s.split(',').map(num).collect::<Result<Vec<_>>>()?
        };
        Ok(SeedList(seeds))
    }
}

impl fmt::Display for SeedList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u64::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

/// Fully resolved experiment settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub task: TaskKind,
    /// `None` uses the task's default dimension.
    pub dim: Option<usize>,
    pub n: usize,
    pub keep_fraction: f64,
    pub kernel: KernelKind,
    pub depth: usize,
    pub weight_variance: f64,
    pub bias_variance: f64,
    /// RBF `γ`; `None` picks it by the median heuristic on the dataset.
    pub bandwidth: Option<f64>,
    pub mode: LossMode,
    pub yh: f64,
    /// `None` uses the continuous or discrete default.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub lambda: f64,
    pub steps: usize,
    pub lr: Option<f64>,
    pub m: usize,
    pub m_mode: MultiDesignMode,
    pub seed: SeedList,
    pub grad: GradMethod,
    pub top_k: usize,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let bdi = BdiConfig::continuous();
        let (depth, weight_variance, bias_variance) = match KernelSpec::default() {
            KernelSpec::Ntk {
                depth,
                weight_variance,
                bias_variance,
            } => (depth, weight_variance, bias_variance),
            KernelSpec::Rbf { .. } => unreachable!("default kernel is the NTK"),
        };
        RunConfig {
            task: TaskKind::QuadBowl,
            dim: None,
            n: 1000,
            keep_fraction: DEFAULT_KEEP_FRACTION,
            kernel: KernelKind::Ntk,
            depth,
            weight_variance,
            bias_variance,
            bandwidth: None,
            mode: bdi.mode,
            yh: bdi.target_score,
            alpha: None,
            beta: bdi.regularization,
            lambda: bdi.backward_weight,
            steps: bdi.steps,
            lr: None,
            m: bdi.num_designs,
            m_mode: bdi.multi_mode,
            seed: SeedList::single(0),
            grad: bdi.grad,
            top_k: 1,
            out: None,
        }
    }
}

impl RunConfig {
    /// Defaults, then the `--config` file, then explicit flags.
    pub fn resolve(flags: &ConfigOverrides) -> Result<Self> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &flags.config {
            ConfigOverrides::from_file(path)?.apply(&mut cfg);
        }
        flags.apply(&mut cfg);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.n < 10 {
            return bad(format!("n must be at least 10, got {}", self.n));
        }
        if !(self.keep_fraction > 0.0 && self.keep_fraction <= 1.0) {
            return Err(Error::DegenerateKeepFraction(self.keep_fraction));
        }
        if self.dim == Some(0) {
            return bad("dim must be positive".into());
        }
        if self.seed.0.is_empty() {
            return bad("no seeds given".into());
        }
        if self.top_k == 0 {
            return bad("top-k must be at least 1".into());
        }
        if self.top_k > self.m {
            return bad(format!(
                "top-k {} exceeds the {} optimized designs",
                self.top_k, self.m
            ));
        }
        if let Some(b) = self.bandwidth {
            if !(b.is_finite() && b > 0.0) {
                return bad(format!("bandwidth must be positive, got {b}"));
            }
        }
        KernelSpec::ntk(self.depth, self.weight_variance, self.bias_variance)?;
        self.bdi_config(0).validate()
    }

    pub fn bdi_config(&self, seed: u64) -> BdiConfig {
        let base = if self.task.is_discrete() {
            BdiConfig::discrete()
        } else {
            BdiConfig::continuous()
        };
        BdiConfig {
            target_score: self.yh,
            weight_param: self.alpha.unwrap_or(base.weight_param),
            regularization: self.beta,
            steps: self.steps,
            learning_rate: self.lr.unwrap_or(base.learning_rate),
            num_designs: self.m,
            mode: self.mode,
            backward_weight: self.lambda,
            multi_mode: self.m_mode,
            grad: self.grad,
            seed,
        }
    }

    /// Kernel for a dataset; RBF without an explicit bandwidth uses the
    /// median heuristic on `designs`.
    pub fn kernel_spec(&self, designs: &DMatrix<f64>) -> Result<KernelSpec> {
        match self.kernel {
            KernelKind::Ntk => {
                KernelSpec::ntk(self.depth, self.weight_variance, self.bias_variance)
            }
            KernelKind::Rbf => match self.bandwidth {
                Some(g) => KernelSpec::rbf(g),
                None => KernelSpec::rbf(median_heuristic_bandwidth(designs)?),
            },
        }
    }

    /// Copy restricted to one seed.
    pub fn with_seed(&self, seed: u64) -> Self {
        RunConfig {
            seed: SeedList::single(seed),
            ..self.clone()
        }
    }
}

/// Partial settings from a config file or the command line.
#[derive(Debug, Clone, Default, PartialEq, clap::Args)]
pub struct ConfigOverrides {
    /// quadbowl, negackley, negstyblinskitang or discrete8
    #[arg(long)]
    pub task: Option<TaskKind>,
    /// Design dimension (continuous tasks)
    #[arg(long)]
    pub dim: Option<usize>,
    /// Candidate designs sampled before censoring
    #[arg(long)]
    pub n: Option<usize>,
    /// Fraction of lowest-scoring candidates kept
    #[arg(long)]
    pub keep_fraction: Option<f64>,
    /// ntk or rbf
    #[arg(long)]
    pub kernel: Option<KernelKind>,
    /// NTK hidden layers
    #[arg(long)]
    pub depth: Option<usize>,
    /// NTK weight variance
    #[arg(long)]
    pub weight_variance: Option<f64>,
    /// NTK bias variance
    #[arg(long)]
    pub bias_variance: Option<f64>,
    /// RBF gamma (default: median heuristic)
    #[arg(long)]
    pub bandwidth: Option<f64>,
    /// full, forward or backward
    #[arg(long)]
    pub mode: Option<LossMode>,
    /// Target score for the high-scoring designs
    #[arg(long)]
    pub yh: Option<f64>,
    /// Softmax temperature of the low-score weights
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Ridge regularization
    #[arg(long)]
    pub beta: Option<f64>,
    /// Weight of the backward loss
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Optimization steps
    #[arg(long)]
    pub steps: Option<usize>,
    /// Adam learning rate
    #[arg(long)]
    pub lr: Option<f64>,
    /// Number of high-scoring designs
    #[arg(long)]
    pub m: Option<usize>,
    /// all (every design learnable) or one
    #[arg(long)]
    pub m_mode: Option<MultiDesignMode>,
    /// Single seed, inclusive range `a..b`, or comma list
    #[arg(long)]
    pub seed: Option<SeedList>,
    /// analytic or fd
    #[arg(long)]
    pub grad: Option<GradMethod>,
    /// Designs ranked in the report (at most m)
    #[arg(long)]
    pub top_k: Option<usize>,
    /// Output file, or a directory when several seeds run
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// `key = value` file; flags given on the command line win
    #[arg(long)]
    pub config: Option<PathBuf>,
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("bad value `{value}` for `{key}`")))
}

impl ConfigOverrides {
    /// Sets one field from its textual form. Dashes and underscores in `key`
    /// are interchangeable.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('-', "_");
        let v = value.trim();
        match key.as_str() {
            "task" => self.task = Some(parse(&key, v)?),
            "dim" => self.dim = Some(parse(&key, v)?),
            "n" => self.n = Some(parse(&key, v)?),
            "keep_fraction" => self.keep_fraction = Some(parse(&key, v)?),
            "kernel" => self.kernel = Some(parse(&key, v)?),
            "depth" => self.depth = Some(parse(&key, v)?),
            "weight_variance" => self.weight_variance = Some(parse(&key, v)?),
            "bias_variance" => self.bias_variance = Some(parse(&key, v)?),
            "bandwidth" => self.bandwidth = Some(parse(&key, v)?),
            "mode" => self.mode = Some(parse(&key, v)?),
            "yh" => self.yh = Some(parse(&key, v)?),
            "alpha" => self.alpha = Some(parse(&key, v)?),
            "beta" => self.beta = Some(parse(&key, v)?),
            "lambda" => self.lambda = Some(parse(&key, v)?),
            "steps" => self.steps = Some(parse(&key, v)?),
            "lr" => self.lr = Some(parse(&key, v)?),
            "m" => self.m = Some(parse(&key, v)?),
            "m_mode" => self.m_mode = Some(parse(&key, v)?),
            "seed" => self.seed = Some(parse(&key, v)?),
            "grad" => self.grad = Some(parse(&key, v)?),
            "top_k" => self.top_k = Some(parse(&key, v)?),
            "out" => self.out = Some(PathBuf::from(v)),
            "config" => {
                return Err(Error::InvalidConfig(
                    "config files cannot include other files".into(),
                ))
            }
            _ => return Err(Error::InvalidConfig(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Parses `key = value` lines. Blank lines and text after `#` are ignored.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut out = ConfigOverrides::default();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!("line {}: expected `key = value`", no + 1))
            })?;
            out.set(k, v)?;
        }
        Ok(out)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse_text(&text)
    }

    pub fn apply(&self, cfg: &mut RunConfig) {
        macro_rules! take {
            ($($field:ident),+) => { $( if let Some(v) = &self.$field { cfg.$field = v.clone(); } )+ };
        }
        take!(
            task,
            n,
            keep_fraction,
            kernel,
            depth,
            weight_variance,
            bias_variance
        );
        take!(mode, yh, beta, lambda, steps, m, m_mode, seed, grad, top_k);
        if self.dim.is_some() {
            cfg.dim = self.dim;
        }
        if self.bandwidth.is_some() {
            cfg.bandwidth = self.bandwidth;
        }
        if self.alpha.is_some() {
            cfg.alpha = self.alpha;
        }
        if self.lr.is_some() {
            cfg.lr = self.lr;
        }
        if self.out.is_some() {
            cfg.out = self.out.clone();
        }
    }
}
