use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which branches of the bidirectional loss are active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossMode {
    /// Forward and backward mappings.
    Full,
    /// Forward mapping only (dataset regressor predicts the target at the designs).
    Forward,
    /// Backward mapping only (design regressor predicts the dataset scores).
    Backward,
}

/// How `M > 1` high-scoring designs are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MultiDesignMode {
    /// Every row is optimized.
    All,
    /// Only the first row is optimized; the rest stay at dataset designs.
    One,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GradMethod {
    Analytic,
    /// Central differences with step [`FD_STEP`].
    Fd,
}

/// Step used by [`GradMethod::Fd`].
pub const FD_STEP: f64 = 1e-4;

macro_rules! text_enum {
    ($ty:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $($ty::$variant => $text),+ })
            }
        }

        impl FromStr for $ty {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s.trim() {
                    $($text => Ok($ty::$variant),)+
                    other => Err(Error::InvalidConfig(format!(
                        concat!("unknown ", stringify!($ty), " `{}`"), other
                    ))),
                }
            }
        }
    };
}

text_enum!(LossMode { Full => "full", Forward => "forward", Backward => "backward" });
text_enum!(MultiDesignMode { All => "all", One => "one" });
text_enum!(GradMethod { Analytic => "analytic", Fd => "fd" });

/// Optimization hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BdiConfig {
    /// Predefined target score `y_h` assigned to every high-scoring design.
    pub target_score: f64,
    /// Softmax temperature `α` of the dataset weights.
    pub weight_param: f64,
    /// Ridge regularization `β`.
    pub regularization: f64,
    pub steps: usize,
    pub learning_rate: f64,
    pub num_designs: usize,
    pub mode: LossMode,
    /// Weight `λ` of the backward branch.
    pub backward_weight: f64,
    pub multi_mode: MultiDesignMode,
    pub grad: GradMethod,
    pub seed: u64,
}

impl Default for BdiConfig {
    fn default() -> Self {
        BdiConfig::continuous()
    }
}

impl BdiConfig {
    /// Defaults for continuous design spaces.
    pub fn continuous() -> Self {
        BdiConfig {
            target_score: 10.0,
            weight_param: 1e-3,
            regularization: crate::ridge::DEFAULT_REGULARIZATION,
            steps: 200,
            learning_rate: 1e-3,
            num_designs: 1,
            mode: LossMode::Full,
            backward_weight: 1.0,
            multi_mode: MultiDesignMode::All,
            grad: GradMethod::Analytic,
            seed: 0,
        }
    }

    /// Defaults for logit-encoded discrete design spaces.
    pub fn discrete() -> Self {
        BdiConfig {
            weight_param: 0.0,
            learning_rate: 1e-1,
            ..BdiConfig::continuous()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !self.target_score.is_finite() {
            return bad(format!(
                "target score must be finite, got {}",
                self.target_score
            ));
        }
        if !(self.weight_param.is_finite() && self.weight_param >= 0.0) {
            return bad(format!(
                "alpha must be nonnegative, got {}",
                self.weight_param
            ));
        }
        if !(self.regularization.is_finite() && self.regularization > 0.0) {
            return bad(format!(
                "beta must be positive, got {}",
                self.regularization
            ));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return bad(format!(
                "learning rate must be nonnegative, got {}",
                self.learning_rate
            ));
        }
        if self.num_designs == 0 {
            return bad("number of designs must be at least 1".into());
        }
        if !(self.backward_weight.is_finite() && self.backward_weight >= 0.0) {
            return bad(format!(
                "lambda must be nonnegative, got {}",
                self.backward_weight
            ));
        }
        Ok(())
    }

    /// `(forward, backward)` multipliers inside `½(·)`.
    pub fn branch_weights(&self) -> (f64, f64) {
        match self.mode {
            LossMode::Full => (1.0, self.backward_weight),
            LossMode::Forward => (1.0, 0.0),
            LossMode::Backward => (0.0, self.backward_weight),
        }
    }
}
