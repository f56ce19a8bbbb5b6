//! Bidirectional learning between a static dataset and learnable designs.
//!
//! The forward mapping asks the dataset-trained kernel regressor to predict
//! the target score at the designs; the backward mapping asks the
//! design-trained regressor to reproduce the dataset scores. Both are closed
//! form under kernel ridge regression, so the designs are optimized directly
//! with Adam on
//!
//! ```text
//! L(X_h) = ½ ( ‖ω_h ⊙ (y_h − K_hl (K_ll + βI)⁻¹ y_l)‖²
//!            + λ ‖ω_l ⊙ (y_l − K_lh (K_hh + βI)⁻¹ y_h)‖² )
//! ```

mod adam;
mod baseline;
mod config;
mod loss;
mod optimize;
mod similarity;

pub use adam::Adam;
pub use baseline::{grad_ascent, AscentResult};
pub use config::{BdiConfig, GradMethod, LossMode, MultiDesignMode, FD_STEP};
pub use loss::{weights_high, weights_low, HighScoringDesigns, LossBreakdown, Objective};
pub use optimize::{
    initial_designs, optimize, rank_by_score, rank_rows_by_prediction, select_design, Optimized,
};
pub use similarity::similarity;

/// `|k(x_l, x_h) − (y_l / y_h)(k(x_h, x_h) + β)|`, the residual of the
/// stationarity condition of the single-design backward loss.
pub fn ideal_solution_residual(
    spec: &crate::kernel::KernelSpec,
    x_l: &[f64],
    y_l: f64,
    x_h: &[f64],
    y_h: f64,
    beta: f64,
) -> crate::Result<f64> {
    let cross = spec.pair(x_l, x_h)?;
    let diag = spec.pair(x_h, x_h)?;
    Ok((cross - y_l / y_h * (diag + beta)).abs())
}
