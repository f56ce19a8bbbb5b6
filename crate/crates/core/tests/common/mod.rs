#![allow(dead_code)]

pub mod schema;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn normal_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub fn normal_dvec(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

pub fn row(m: &DMatrix<f64>, i: usize) -> Vec<f64> {
    m.row(i).iter().copied().collect()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Empirical tangent kernel of finite fully connected ReLU networks, averaged
/// over `inits` independent initializations.
///
/// Network (standard NTK parameterization, every weight and bias N(0, 1)):
/// `h¹ = σ_w/√D · W¹x + σ_b b¹`, `hˡ⁺¹ = σ_w/√n · Wˡ⁺¹ relu(hˡ) + σ_b bˡ⁺¹`,
/// `f = σ_w/√n · v · relu(hᴸ) + σ_b b`. The kernel is `⟨∂f(x)/∂θ, ∂f(z)/∂θ⟩`
/// summed over all parameters, assembled per layer from forward activations
/// and backpropagated output sensitivities. Network arithmetic is f32; the
/// kernel sums are f64.
pub struct EmpiricalNtk {
    pub width: usize,
    pub depth: usize,
    pub weight_variance: f64,
    pub bias_variance: f64,
    pub inits: usize,
    pub seed: u64,
}

impl EmpiricalNtk {
    fn stream(&self, init: usize, layer: usize) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(((init as u64) << 8) | layer as u64);
        r
    }

    /// Kernel values for `pairs` of rows of `inputs`.
    pub fn eval(&self, inputs: &[Vec<f64>], pairs: &[(usize, usize)]) -> Vec<f64> {
        let mut total = vec![0.0; pairs.len()];
        for init in 0..self.inits {
            let k = self.single(init, inputs, pairs);
            for (t, v) in total.iter_mut().zip(k) {
                *t += v;
            }
        }
        total.iter().map(|t| t / self.inits as f64).collect()
    }

    fn single(&self, init: usize, inputs: &[Vec<f64>], pairs: &[(usize, usize)]) -> Vec<f64> {
        let b = inputs.len();
        let d = inputs[0].len();
        let n = self.width;
        let sw = self.weight_variance.sqrt() as f32;
        let sb = self.bias_variance.sqrt() as f32;
        // activations are laid out [unit][input] so inner loops run over inputs
        let x: Vec<f32> = (0..d)
            .flat_map(|j| inputs.iter().map(move |inp| inp[j] as f32))
            .collect();

        let mut weights: Vec<Vec<f32>> = Vec::with_capacity(self.depth);
        let mut pre: Vec<Vec<f32>> = Vec::with_capacity(self.depth);
        let mut acts: Vec<Vec<f32>> = vec![x];
        for layer in 0..self.depth {
            let n_in = if layer == 0 { d } else { n };
            let mut r = self.stream(init, layer);
            let w: Vec<f32> = (0..n * n_in).map(|_| r.sample(StandardNormal)).collect();
            let bias: Vec<f32> = (0..n).map(|_| r.sample(StandardNormal)).collect();
            let scale = sw / (n_in as f32).sqrt();
            let a = &acts[layer];
            let mut h = vec![0.0f32; n * b];
            for i in 0..n {
                let acc = &mut h[i * b..(i + 1) * b];
                for (j, wv) in w[i * n_in..(i + 1) * n_in].iter().enumerate() {
                    for (s, av) in acc.iter_mut().zip(&a[j * b..(j + 1) * b]) {
                        *s += wv * av;
                    }
                }
                for s in acc.iter_mut() {
                    *s = scale * *s + sb * bias[i];
                }
            }
            acts.push(h.iter().map(|v| v.max(0.0)).collect());
            pre.push(h);
            weights.push(w);
        }

        let pair_dot = |m: &[f32], units: usize, factor: f64| -> Vec<f64> {
            pairs
                .iter()
                .map(|&(u, v)| {
                    let s: f64 = (0..units)
                        .map(|j| f64::from(m[j * b + u]) * f64::from(m[j * b + v]))
                        .sum();
                    factor * s
                })
                .collect()
        };

        // readout: ∂f/∂v = σ_w/√n · relu(hᴸ), ∂f/∂b = σ_b
        let mut kernel: Vec<f64> = pair_dot(&acts[self.depth], n, self.weight_variance / n as f64)
            .into_iter()
            .map(|s| s + self.bias_variance)
            .collect();

        let mut r = self.stream(init, self.depth);
        let readout: Vec<f32> = (0..n).map(|_| r.sample(StandardNormal)).collect();
        let out_scale = sw / (n as f32).sqrt();
        // δ = ∂f/∂hᴸ
        let mut delta: Vec<f32> = (0..n * b)
            .map(|idx| {
                if pre[self.depth - 1][idx] > 0.0 {
                    out_scale * readout[idx / b]
                } else {
                    0.0
                }
            })
            .collect();

        for layer in (0..self.depth).rev() {
            let n_in = if layer == 0 { d } else { n };
            let dd = pair_dot(&delta, n, 1.0);
            let aa = pair_dot(&acts[layer], n_in, self.weight_variance / n_in as f64);
            for ((k, a), dv) in kernel.iter_mut().zip(&aa).zip(&dd) {
                *k += (a + self.bias_variance) * dv;
            }
            if layer == 0 {
                break;
            }
            // δ ← (σ_w/√n · Wᵀ δ) ⊙ relu'(h)
            let scale = sw / (n_in as f32).sqrt();
            let w = &weights[layer];
            let mut next = vec![0.0f32; n_in * b];
            for i in 0..n {
                let di = &delta[i * b..(i + 1) * b];
                for (j, wv) in w[i * n_in..(i + 1) * n_in].iter().enumerate() {
                    for (t, dv) in next[j * b..(j + 1) * b].iter_mut().zip(di) {
                        *t += wv * dv;
                    }
                }
            }
            let prev = &pre[layer - 1];
            for (t, p) in next.iter_mut().zip(prev) {
                *t = if *p > 0.0 { *t * scale } else { 0.0 };
            }
            delta = next;
        }
        kernel
    }
}
