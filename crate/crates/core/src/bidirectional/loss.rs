//! Closed-form forward/backward losses and their exact gradient.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::config::{BdiConfig, GradMethod, FD_STEP};
use crate::error::{Error, Result};
use crate::kernel::{rows_of, KernelMatrix, KernelSpec, SetTag};
use crate::ridge::{self, RidgeSolution};

/// `√softmax(α·y)`; squared entries sum to one.
pub fn weights_low(scores: &[f64], alpha: f64) -> Result<DVector<f64>> {
    if scores.is_empty() {
        return Err(Error::Empty("scores"));
    }
    if !alpha.is_finite() || scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFinite { what: "scores" });
    }
    let max = scores
        .iter()
        .map(|s| alpha * s)
        .fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (alpha * s - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    Ok(DVector::from_iterator(
        scores.len(),
        exps.into_iter().map(|e| (e / total).sqrt()),
    ))
}

/// `1/√M` in every entry.
pub fn weights_high(m: usize) -> DVector<f64> {
    DVector::from_element(m, 1.0 / (m as f64).sqrt())
}

/// Loss components at one optimization step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub step: usize,
    pub l2h: f64,
    pub h2l: f64,
    pub total: f64,
}

/// The learnable designs `X_h` with their shared target score.
#[derive(Debug, Clone, PartialEq)]
pub struct HighScoringDesigns {
    pub designs: DMatrix<f64>,
    pub target: f64,
    pub learnable: Vec<bool>,
}

impl HighScoringDesigns {
    pub fn new(designs: DMatrix<f64>, target: f64) -> Self {
        let m = designs.nrows();
        HighScoringDesigns {
            designs,
            target,
            learnable: vec![true; m],
        }
    }

    pub fn with_mask(mut self, learnable: Vec<bool>) -> Result<Self> {
        if learnable.len() != self.designs.nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.designs.nrows(),
                found: learnable.len(),
            });
        }
        self.learnable = learnable;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.designs.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.designs.nrows() == 0
    }

    /// `y_h` as a vector: every entry equals the target.
    pub fn targets(&self) -> DVector<f64> {
        DVector::from_element(self.len(), self.target)
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.designs.row(i).iter().copied().collect()
    }
}

/// Bidirectional objective over a fixed static dataset.
///
/// The dataset-side ridge solution `(K_ll + βI)⁻¹ y_l` does not depend on the
/// designs and is computed once here.
#[derive(Debug, Clone)]
pub struct Objective<'a> {
    spec: KernelSpec,
    config: BdiConfig,
    designs: &'a DMatrix<f64>,
    scores: &'a DVector<f64>,
    rows: Vec<Vec<f64>>,
    weights_sq: DVector<f64>,
    forward: RidgeSolution,
    tag: SetTag,
}

/// Everything the losses and the gradient share at one `X_h`.
struct Evaluation {
    h_rows: Vec<Vec<f64>>,
    /// `y_h − K_hl c_l`
    forward_residual: DVector<f64>,
    /// `(K_hh + βI)⁻¹ y_h`
    backward_coeffs: DVector<f64>,
    backward_solution: RidgeSolution,
    /// `y_l − K_lh (K_hh + βI)⁻¹ y_h`
    backward_residual: DVector<f64>,
    /// `K_lh`
    cross: DMatrix<f64>,
    breakdown: LossBreakdown,
}

impl<'a> Objective<'a> {
    pub fn new(
        designs: &'a DMatrix<f64>,
        scores: &'a DVector<f64>,
        spec: KernelSpec,
        config: &BdiConfig,
    ) -> Result<Self> {
        spec.validate()?;
        config.validate()?;
        if designs.nrows() != scores.len() {
            return Err(Error::DimensionMismatch {
                expected: designs.nrows(),
                found: scores.len(),
            });
        }
        let gram = spec.gram(designs, designs)?;
        let forward = ridge::fit(&gram, scores, config.regularization)?;
        let weights = weights_low(scores.as_slice(), config.weight_param)?;
        Ok(Objective {
            spec,
            config: config.clone(),
            designs,
            scores,
            rows: rows_of(designs),
            weights_sq: weights.map(|w| w * w),
            forward,
            tag: SetTag::of(designs),
        })
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn config(&self) -> &BdiConfig {
        &self.config
    }

    pub fn dim(&self) -> usize {
        self.designs.ncols()
    }

    pub fn forward_solution(&self) -> &RidgeSolution {
        &self.forward
    }

    /// Dataset-trained regressor evaluated at `x` (the proxy score).
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        self.check_design(x)?;
        Ok(self.predict_unchecked(x))
    }

    fn predict_unchecked(&self, x: &[f64]) -> f64 {
        self.rows
            .iter()
            .zip(self.forward.coefficients.iter())
            .map(|(r, c)| c * self.spec.pair_unchecked(r, x))
            .sum()
    }

    /// Gradient of [`Objective::predict`] with respect to `x`.
    pub fn predict_grad(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_design(x)?;
        let mut out = vec![0.0; x.len()];
        let mut g = vec![0.0; x.len()];
        for (r, c) in self.rows.iter().zip(self.forward.coefficients.iter()) {
            self.spec.grad_second_into(r, x, &mut g);
            for (o, gi) in out.iter_mut().zip(&g) {
                *o += c * gi;
            }
        }
        Ok(out)
    }

    /// Forward-mapping loss `‖ω_h ⊙ (y_h − K_hl (K_ll + βI)⁻¹ y_l)‖²`.
    pub fn loss_l2h(&self, xh: &HighScoringDesigns) -> Result<f64> {
        Ok(self.evaluate(xh)?.breakdown.l2h)
    }

    /// Backward-mapping loss `‖ω_l ⊙ (y_l − K_lh (K_hh + βI)⁻¹ y_h)‖²`.
    pub fn loss_h2l(&self, xh: &HighScoringDesigns) -> Result<f64> {
        Ok(self.evaluate(xh)?.breakdown.h2l)
    }

    pub fn loss_total(&self, xh: &HighScoringDesigns) -> Result<LossBreakdown> {
        Ok(self.evaluate(xh)?.breakdown)
    }

    /// Gradient of the total loss with respect to the design rows. Rows that are
    /// not learnable get zero gradient.
    pub fn grad_total(&self, xh: &HighScoringDesigns) -> Result<DMatrix<f64>> {
        Ok(self.value_and_grad(xh)?.1)
    }

    /// Total loss and its gradient, using the configured gradient method.
    pub fn value_and_grad(&self, xh: &HighScoringDesigns) -> Result<(LossBreakdown, DMatrix<f64>)> {
        let eval = self.evaluate(xh)?;
        let grad = match self.config.grad {
            GradMethod::Analytic => self.analytic_grad(xh, &eval),
            GradMethod::Fd => self.fd_grad(xh)?,
        };
        Ok((eval.breakdown, grad))
    }

    /// Central finite-difference gradient of the total loss.
    pub fn fd_grad(&self, xh: &HighScoringDesigns) -> Result<DMatrix<f64>> {
        let mut probe = xh.clone();
        let mut grad = DMatrix::zeros(xh.len(), self.dim());
        for p in 0..xh.len() {
            if !xh.learnable[p] {
                continue;
            }
            for j in 0..self.dim() {
                let orig = xh.designs[(p, j)];
                probe.designs[(p, j)] = orig + FD_STEP;
                let up = self.evaluate(&probe)?.breakdown.total;
                probe.designs[(p, j)] = orig - FD_STEP;
                let down = self.evaluate(&probe)?.breakdown.total;
                probe.designs[(p, j)] = orig;
                grad[(p, j)] = (up - down) / (2.0 * FD_STEP);
            }
        }
        Ok(grad)
    }

    /// Recomputes the dataset-side ridge solution and compares it with the cache.
    pub fn verify_cache(&self) -> Result<()> {
        if SetTag::of(self.designs) != self.tag {
            return Err(Error::StaleCache);
        }
        let gram = self.spec.gram(self.designs, self.designs)?;
        let fresh = ridge::fit(&gram, self.scores, self.config.regularization)?;
        if fresh.coefficients != self.forward.coefficients {
            return Err(Error::StaleCache);
        }
        Ok(())
    }

    fn check_design(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "design" });
        }
        Ok(())
    }

    fn evaluate(&self, xh: &HighScoringDesigns) -> Result<Evaluation> {
        if xh.is_empty() {
            return Err(Error::Empty("high-scoring designs"));
        }
        if xh.designs.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: xh.designs.ncols(),
            });
        }
        if xh.designs.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "high-scoring designs",
            });
        }
        let m = xh.len();
        let h_rows = rows_of(&xh.designs);
        let cross = self.spec.gram_rows(&self.rows, &h_rows);
        let k_hh = self.spec.gram_rows(&h_rows, &h_rows);
        let targets = xh.targets();

        let forward_pred = cross.tr_mul(&self.forward.coefficients);
        let forward_residual = &targets - forward_pred;
        let omega_h_sq = 1.0 / m as f64;
        let l2h = omega_h_sq * forward_residual.norm_squared();

        let backward_solution = ridge::fit_matrix(&k_hh, &targets, self.config.regularization)?;
        let backward_coeffs = backward_solution.coefficients.clone();
        let backward_residual = self.scores - &cross * &backward_coeffs;
        let h2l = backward_residual
            .iter()
            .zip(self.weights_sq.iter())
            .map(|(r, w)| w * r * r)
            .sum::<f64>();

        let (wf, wb) = self.config.branch_weights();
        let total = 0.5 * (wf * l2h + wb * h2l);
        Ok(Evaluation {
            h_rows,
            forward_residual,
            backward_coeffs,
            backward_solution,
            backward_residual,
            cross,
            breakdown: LossBreakdown {
                step: 0,
                l2h,
                h2l,
                total,
            },
        })
    }

    fn analytic_grad(&self, xh: &HighScoringDesigns, eval: &Evaluation) -> DMatrix<f64> {
        let m = xh.len();
        let d = self.dim();
        let (wf, wb) = self.config.branch_weights();
        let mut grad = DMatrix::zeros(m, d);
        let mut g = vec![0.0; d];

        // Backward-branch auxiliaries:
        //   q = ω_l² ⊙ r_b,  u = K_lhᵀ q,  v = (K_hh + βI)⁻¹ u
        // dL_h2l = −2 [ qᵀ dK_lh α − vᵀ dK_hh α ]
        let alpha = &eval.backward_coeffs;
        let q = eval.backward_residual.component_mul(&self.weights_sq);
        let v = if wb != 0.0 {
            eval.backward_solution.solve(&eval.cross.tr_mul(&q))
        } else {
            DVector::zeros(m)
        };

        for p in 0..m {
            if !xh.learnable[p] {
                continue;
            }
            let xp = &eval.h_rows[p];
            let mut fwd = vec![0.0; d];
            let mut bwd = vec![0.0; d];
            for (i, row) in self.rows.iter().enumerate() {
                self.spec.grad_second_into(row, xp, &mut g);
                let cf = self.forward.coefficients[i];
                let cb = q[i];
                for j in 0..d {
                    fwd[j] += cf * g[j];
                    bwd[j] += cb * g[j];
                }
            }
            if wf != 0.0 {
                // dL_l2h/dx_p = −(2/M) r_p Σ_i c_i ∂k(X_i, x_p)
                let scale = -2.0 / m as f64 * eval.forward_residual[p];
                for j in 0..d {
                    grad[(p, j)] += 0.5 * wf * scale * fwd[j];
                }
            }
            if wb != 0.0 {
                let mut inner = vec![0.0; d];
                for j in 0..d {
                    inner[j] = alpha[p] * bwd[j];
                }
                for n in 0..m {
                    if n == p {
                        continue;
                    }
                    self.spec.grad_second_into(&eval.h_rows[n], xp, &mut g);
                    let coeff = v[p] * alpha[n] + v[n] * alpha[p];
                    for j in 0..d {
                        inner[j] -= coeff * g[j];
                    }
                }
                self.spec.grad_diag_into(xp, &mut g);
                for j in 0..d {
                    inner[j] -= v[p] * alpha[p] * g[j];
                }
                for j in 0..d {
                    grad[(p, j)] += 0.5 * wb * (-2.0) * inner[j];
                }
            }
        }
        grad
    }

    /// Gram matrix of the dataset, provided for inspection.
    pub fn dataset_gram(&self) -> KernelMatrix {
        KernelMatrix {
            entries: self.spec.gram_rows(&self.rows, &self.rows),
            left: self.tag,
            right: self.tag,
        }
    }
}
