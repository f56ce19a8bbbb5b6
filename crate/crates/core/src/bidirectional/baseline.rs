use super::loss::Objective;
use crate::error::{Error, Result};

/// Outcome of gradient ascent on the kernel proxy.
#[derive(Debug, Clone, PartialEq)]
pub struct AscentResult {
    pub design: Vec<f64>,
    /// Proxy prediction before the first step and after every step.
    pub predictions: Vec<f64>,
}

/// `x ← x + η ∇ predict(x)` for `steps` iterations.
pub fn grad_ascent(
    objective: &Objective<'_>,
    init: &[f64],
    steps: usize,
    lr: f64,
) -> Result<AscentResult> {
    if !(lr.is_finite() && lr >= 0.0) {
        return Err(Error::InvalidConfig(format!(
            "learning rate must be nonnegative, got {lr}"
        )));
    }
    let mut x = init.to_vec();
    let mut predictions = Vec::with_capacity(steps + 1);
    predictions.push(objective.predict(&x)?);
    for step in 0..steps {
        let g = objective.predict_grad(&x)?;
        for (xi, gi) in x.iter_mut().zip(&g) {
            *xi += lr * gi;
        }
        let p = objective
            .predict(&x)
            .map_err(|_| Error::NonFiniteLoss { step })?;
        if !p.is_finite() {
            return Err(Error::NonFiniteLoss { step });
        }
        predictions.push(p);
    }
    Ok(AscentResult {
        design: x,
        predictions,
    })
}
