use nalgebra::DMatrix;

/// Adam with bias correction and the conventional `β₁ = 0.9`, `β₂ = 0.999`,
/// `ε = 1e-8`.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    first: DMatrix<f64>,
    second: DMatrix<f64>,
    t: i32,
}

impl Adam {
    pub fn new(rows: usize, cols: usize) -> Self {
        Adam {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            first: DMatrix::zeros(rows, cols),
            second: DMatrix::zeros(rows, cols),
            t: 0,
        }
    }

    pub fn steps_taken(&self) -> i32 {
        self.t
    }

    /// One descent step on `params` along `grad`.
    pub fn step(&mut self, params: &mut DMatrix<f64>, grad: &DMatrix<f64>, lr: f64) {
        assert_eq!(
            params.shape(),
            grad.shape(),
            "parameter/gradient shape mismatch"
        );
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t);
        let bc2 = 1.0 - self.beta2.powi(self.t);
        for ((p, g), (m, v)) in params
            .iter_mut()
            .zip(grad.iter())
            .zip(self.first.iter_mut().zip(self.second.iter_mut()))
        {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *p -= lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}
