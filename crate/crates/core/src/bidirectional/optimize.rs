use nalgebra::{DMatrix, DVector};

use super::adam::Adam;
use super::config::MultiDesignMode;
use super::loss::{HighScoringDesigns, LossBreakdown, Objective};
use crate::error::{Error, Result};

/// Final designs and the per-step loss trace.
#[derive(Debug, Clone, PartialEq)]
pub struct Optimized {
    pub designs: HighScoringDesigns,
    pub trace: Vec<LossBreakdown>,
}

/// Indices of the dataset rows sorted by score, best first. Ties keep the
/// lower index first.
pub fn rank_by_score(scores: &DVector<f64>) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    idx
}

/// Starting designs.
///
/// Row 0 is the top-scoring dataset design. For `M > 1`:
/// * [`MultiDesignMode::All`]: each further row is one proxy gradient-ascent
///   step (step size = the configured learning rate) from the previous row.
/// * [`MultiDesignMode::One`]: further rows are the next-best dataset designs
///   and are frozen.
pub fn initial_designs(
    objective: &Objective<'_>,
    designs: &DMatrix<f64>,
    scores: &DVector<f64>,
) -> Result<HighScoringDesigns> {
    let cfg = objective.config();
    let m = cfg.num_designs;
    let d = designs.ncols();
    let ranked = rank_by_score(scores);
    let mut out = DMatrix::zeros(m, d);
    out.row_mut(0).copy_from(&designs.row(ranked[0]));
    let mut learnable = vec![true; m];
    match cfg.multi_mode {
        MultiDesignMode::All => {
            for r in 1..m {
                let prev: Vec<f64> = out.row(r - 1).iter().copied().collect();
                let g = objective.predict_grad(&prev)?;
                for j in 0..d {
                    out[(r, j)] = prev[j] + cfg.learning_rate * g[j];
                }
            }
        }
        MultiDesignMode::One => {
            if m > ranked.len() {
                return Err(Error::InvalidConfig(format!(
                    "{m} designs requested but the dataset has {} rows",
                    ranked.len()
                )));
            }
            for r in 1..m {
                out.row_mut(r).copy_from(&designs.row(ranked[r]));
                learnable[r] = false;
            }
        }
    }
    HighScoringDesigns::new(out, cfg.target_score).with_mask(learnable)
}

/// Runs `steps` Adam iterations on the total loss.
pub fn optimize(objective: &Objective<'_>, init: HighScoringDesigns) -> Result<Optimized> {
    let cfg = objective.config();
    if init.designs.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            what: "initial designs",
        });
    }
    let mut current = init;
    let mut adam = Adam::new(current.len(), current.designs.ncols());
    let mut trace = Vec::with_capacity(cfg.steps);
    for step in 0..cfg.steps {
        let (mut loss, grad) = objective.value_and_grad(&current).map_err(|e| match e {
            Error::NonFinite { .. } => Error::NonFiniteLoss { step },
            other => other,
        })?;
        if !loss.total.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFiniteLoss { step });
        }
        loss.step = step;
        trace.push(loss);
        adam.step(&mut current.designs, &grad, cfg.learning_rate);
        if step == cfg.steps / 2 {
            objective.verify_cache()?;
        }
    }
    if current.designs.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteLoss { step: cfg.steps });
    }
    Ok(Optimized {
        designs: current,
        trace,
    })
}

/// Row reported as the result: the learnable row in
/// [`MultiDesignMode::One`], otherwise the row with the highest proxy score.
pub fn select_design(objective: &Objective<'_>, designs: &HighScoringDesigns) -> Result<usize> {
    if objective.config().multi_mode == MultiDesignMode::One {
        return Ok(designs.learnable.iter().position(|l| *l).unwrap_or(0));
    }
    Ok(rank_rows_by_prediction(objective, designs)?[0])
}

/// Row indices sorted by proxy prediction, best first.
pub fn rank_rows_by_prediction(
    objective: &Objective<'_>,
    designs: &HighScoringDesigns,
) -> Result<Vec<usize>> {
    let preds = (0..designs.len())
        .map(|i| objective.predict(&designs.row(i)))
        .collect::<Result<Vec<_>>>()?;
    let mut idx: Vec<usize> = (0..preds.len()).collect();
    idx.sort_by(|&a, &b| preds[b].total_cmp(&preds[a]).then(a.cmp(&b)));
    Ok(idx)
}
