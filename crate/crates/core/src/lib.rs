//! Offline model-based design optimization with bidirectional closed-form
//! kernel losses.
//!
//! Given only a static dataset of designs and scores, [`bidirectional`]
//! synthesizes new designs by minimizing neural-tangent-kernel ridge
//! regression losses in both directions between the dataset and the candidate
//! designs. [`tasks`] supplies synthetic tasks with exact oracles, and
//! [`harness`] drives runs, ablations and sweeps.
//!
//! Runnable examples live in `examples/`:
//!
//! ```bash
//! cargo run --release --example quickstart
//! ```

pub mod bidirectional;
pub mod error;
pub mod harness;
pub mod kernel;
pub mod ridge;
pub mod tasks;

pub use error::{Error, Result};
pub use kernel::{KernelMatrix, KernelSpec};
