//! Infinite-width kernels for fully-connected ReLU networks.
//!
//! The NTK of an `L`-hidden-layer ReLU MLP (standard NTK parameterization,
//! weight variance `σ_w²`, bias variance `σ_b²`) is computed by the usual
//! arc-cosine recursion:
//!
//! ```text
//! Σ⁰(x,z) = σ_b² + σ_w² (x·z) / D
//! Σʰ(x,z) = σ_b² + σ_w²/(2π) · √(ab) · (sin θ + (π − θ) cos θ)
//! Σ̇ʰ(x,z) = σ_w²/(2π) · (π − θ)
//! Θ⁰ = Σ⁰,  Θʰ = Σʰ + Σ̇ʰ Θʰ⁻¹
//! ```
//!
//! with `a = Σʰ⁻¹(x,x)`, `b = Σʰ⁻¹(z,z)` and `cos θ = Σʰ⁻¹(x,z) / √(ab)`.
//!
//! The derivative with respect to the second argument is carried through the
//! same recursion. Every intermediate derivative lies in `span{x, z}`, so it is
//! tracked as a pair of coefficients and only expanded to a `D`-vector at the
//! end.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this value of `1 − |cos θ|` the angle is treated as degenerate and its
/// derivative is taken as the symmetric limit (zero).
const ANGLE_EPS: f64 = 1e-12;

/// Parameters of the analytic kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KernelSpec {
    /// Neural tangent kernel of a ReLU MLP with `depth` hidden layers.
    Ntk {
        depth: usize,
        weight_variance: f64,
        bias_variance: f64,
    },
    /// `exp(−γ‖x − z‖²)`.
    Rbf { bandwidth: f64 },
}

impl Default for KernelSpec {
    /// Six hidden ReLU layers, `σ_w² = 2`, `σ_b² = 0.1`.
    fn default() -> Self {
        KernelSpec::Ntk {
            depth: 6,
            weight_variance: 2.0,
            bias_variance: 0.1,
        }
    }
}

impl KernelSpec {
    pub fn ntk(depth: usize, weight_variance: f64, bias_variance: f64) -> Result<Self> {
        let spec = KernelSpec::Ntk {
            depth,
            weight_variance,
            bias_variance,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn rbf(bandwidth: f64) -> Result<Self> {
        let spec = KernelSpec::Rbf { bandwidth };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Ntk {
                weight_variance,
                bias_variance,
                ..
            } => {
                if !(weight_variance.is_finite() && weight_variance > 0.0) {
                    return Err(Error::InvalidKernel(format!(
                        "weight variance must be positive, got {weight_variance}"
                    )));
                }
                if !(bias_variance.is_finite() && bias_variance >= 0.0) {
                    return Err(Error::InvalidKernel(format!(
                        "bias variance must be nonnegative, got {bias_variance}"
                    )));
                }
            }
            KernelSpec::Rbf { bandwidth } => {
                if !(bandwidth.is_finite() && bandwidth > 0.0) {
                    return Err(Error::InvalidKernel(format!(
                        "bandwidth must be positive, got {bandwidth}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn is_rbf(&self) -> bool {
        matches!(self, KernelSpec::Rbf { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            KernelSpec::Ntk { .. } => "ntk",
            KernelSpec::Rbf { .. } => "rbf",
        }
    }

    /// `k(x, z)`.
    pub fn pair(&self, x: &[f64], z: &[f64]) -> Result<f64> {
        check_pair(x, z)?;
        Ok(self.pair_unchecked(x, z))
    }

    /// `∂k(x, z)/∂z`.
    pub fn grad_second(&self, x: &[f64], z: &[f64]) -> Result<Vec<f64>> {
        check_pair(x, z)?;
        let mut out = vec![0.0; z.len()];
        self.grad_second_into(x, z, &mut out);
        Ok(out)
    }

    /// `∇_z k(z, z)`, the gradient of the diagonal entry when both arguments move.
    pub fn grad_diag(&self, z: &[f64]) -> Result<Vec<f64>> {
        check_pair(z, z)?;
        let mut out = vec![0.0; z.len()];
        self.grad_diag_into(z, &mut out);
        Ok(out)
    }

    /// Gram matrix between the rows of `a` and the rows of `b`.
    pub fn gram(&self, a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<KernelMatrix> {
        if a.nrows() == 0 || b.nrows() == 0 || a.ncols() == 0 {
            return Err(Error::Empty("design matrix"));
        }
        if a.ncols() != b.ncols() {
            return Err(Error::DimensionMismatch {
                expected: a.ncols(),
                found: b.ncols(),
            });
        }
        if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "design matrix",
            });
        }
        let left = rows_of(a);
        let right = rows_of(b);
        Ok(KernelMatrix {
            entries: self.gram_rows(&left, &right),
            left: SetTag::of(a),
            right: SetTag::of(b),
        })
    }

    /// Gram matrix over pre-extracted rows. Inputs are assumed validated.
    pub(crate) fn gram_rows(&self, left: &[Vec<f64>], right: &[Vec<f64>]) -> DMatrix<f64> {
        let rows: Vec<Vec<f64>> = left
            .par_iter()
            .map(|x| right.iter().map(|z| self.pair_unchecked(x, z)).collect())
            .collect();
        DMatrix::from_fn(left.len(), right.len(), |i, j| rows[i][j])
    }

    pub(crate) fn pair_unchecked(&self, x: &[f64], z: &[f64]) -> f64 {
        match *self {
            KernelSpec::Ntk {
                depth,
                weight_variance,
                bias_variance,
            } => ntk_with_span(depth, weight_variance, bias_variance, x, z).0,
            KernelSpec::Rbf { bandwidth } => (-bandwidth * sq_dist(x, z)).exp(),
        }
    }

    pub(crate) fn grad_second_into(&self, x: &[f64], z: &[f64], out: &mut [f64]) {
        match *self {
            KernelSpec::Ntk {
                depth,
                weight_variance,
                bias_variance,
            } => {
                let (_, d) = ntk_with_span(depth, weight_variance, bias_variance, x, z);
                for ((o, xi), zi) in out.iter_mut().zip(x).zip(z) {
                    *o = d.x * xi + d.z * zi;
                }
            }
            KernelSpec::Rbf { bandwidth } => {
                let k = (-bandwidth * sq_dist(x, z)).exp();
                for ((o, xi), zi) in out.iter_mut().zip(x).zip(z) {
                    *o = 2.0 * bandwidth * (xi - zi) * k;
                }
            }
        }
    }

    pub(crate) fn grad_diag_into(&self, z: &[f64], out: &mut [f64]) {
        match *self {
            KernelSpec::Ntk {
                depth,
                weight_variance,
                ..
            } => {
                let coeff = ntk_diag_grad_coeff(depth, weight_variance, z);
                for (o, zi) in out.iter_mut().zip(z) {
                    *o = coeff * zi;
                }
            }
            KernelSpec::Rbf { .. } => out.iter_mut().for_each(|o| *o = 0.0),
        }
    }
}

/// A dense Gram matrix plus fingerprints of the design sets that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    pub entries: DMatrix<f64>,
    pub left: SetTag,
    pub right: SetTag,
}

impl KernelMatrix {
    /// Wraps a raw matrix with no provenance.
    pub fn from_entries(entries: DMatrix<f64>) -> Self {
        KernelMatrix {
            entries,
            left: SetTag::UNKNOWN,
            right: SetTag::UNKNOWN,
        }
    }

    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn cols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }
}

/// FNV-1a fingerprint of a design matrix (shape and exact bit patterns).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SetTag(pub u64);

impl SetTag {
    pub const UNKNOWN: SetTag = SetTag(0);

    pub fn of(m: &DMatrix<f64>) -> Self {
        const PRIME: u64 = 0x0000_0100_0000_01b3;
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |word: u64| {
            for byte in word.to_le_bytes() {
                h ^= u64::from(byte);
                h = h.wrapping_mul(PRIME);
            }
        };
        eat(m.nrows() as u64);
        eat(m.ncols() as u64);
        for v in m.iter() {
            eat(v.to_bits());
        }
        SetTag(h)
    }
}

/// Copies the rows of `m` into contiguous vectors.
pub fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

/// `1 / median(‖xᵢ − xⱼ‖²)` over pairs drawn from the first 256 rows.
pub fn median_heuristic_bandwidth(designs: &DMatrix<f64>) -> Result<f64> {
    let rows = rows_of(designs);
    let rows = &rows[..rows.len().min(256)];
    let mut d: Vec<f64> = Vec::with_capacity(rows.len() * rows.len() / 2);
    for i in 0..rows.len() {
        for j in (i + 1)..rows.len() {
            d.push(sq_dist(&rows[i], &rows[j]));
        }
    }
    if d.is_empty() {
        return Err(Error::Empty(
            "need at least two designs for the median heuristic",
        ));
    }
    d.sort_by(f64::total_cmp);
    let med = d[d.len() / 2];
    if !(med > 0.0) {
        return Err(Error::InvalidKernel("all designs coincide".into()));
    }
    Ok(1.0 / med)
}

fn check_pair(x: &[f64], z: &[f64]) -> Result<()> {
    if x.is_empty() {
        return Err(Error::Empty("design vector"));
    }
    if x.len() != z.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: z.len(),
        });
    }
    if x.iter().chain(z).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            what: "design vector",
        });
    }
    Ok(())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
}

/// Coefficients `(on_x, on_z)` of a vector in `span{x, z}`.
#[derive(Debug, Clone, Copy, Default)]
struct Span {
    x: f64,
    z: f64,
}

impl Add for Span {
    type Output = Span;
    fn add(self, o: Span) -> Span {
        Span {
            x: self.x + o.x,
            z: self.z + o.z,
        }
    }
}

impl Sub for Span {
    type Output = Span;
    fn sub(self, o: Span) -> Span {
        Span {
            x: self.x - o.x,
            z: self.z - o.z,
        }
    }
}

impl Mul<f64> for Span {
    type Output = Span;
    fn mul(self, s: f64) -> Span {
        Span {
            x: self.x * s,
            z: self.z * s,
        }
    }
}

/// `Θᴸ(x, z)` and its derivative with respect to `z` as a `span{x, z}` pair.
fn ntk_with_span(depth: usize, wv: f64, bv: f64, x: &[f64], z: &[f64]) -> (f64, Span) {
    let d = x.len() as f64;
    let (xx, zz, xz) = (dot(x, x), dot(z, z), dot(x, z));
    // Identical inputs take θ = 0 exactly; c / √(ab) can round to just
    // below 1 and leave a spurious ~1e-8 angle.
    let same = x == z;

    // Σ(x,x), Σ(z,z), Σ(x,z) and the derivatives of the last two.
    let mut a = bv + wv * xx / d;
    let mut b = bv + wv * zz / d;
    let mut c = bv + wv * xz / d;
    let mut db = Span {
        x: 0.0,
        z: 2.0 * wv / d,
    };
    let mut dc = Span { x: wv / d, z: 0.0 };
    let mut theta_ntk = c;
    let mut dtheta_ntk = dc;

    let k = wv / (2.0 * PI);
    for _ in 0..depth {
        let s = (a * b).sqrt();
        let (rho, ds) = if s > 0.0 && b > 0.0 {
            let rho = if same { 1.0 } else { (c / s).clamp(-1.0, 1.0) };
            (rho, db * (s / (2.0 * b)))
        } else {
            (0.0, Span::default())
        };
        let angle = rho.acos();
        let sin = angle.sin();
        let open = PI - angle;

        let c_next = bv + k * s * (sin + open * rho);
        // d(√(ab)·J(θ)) = sin θ · d√(ab) + (π − θ) · dc
        let dc_next = (ds * sin + dc * open) * k;

        let deriv_kernel = k * open;
        let dangle = if 1.0 - rho.abs() < ANGLE_EPS || s <= 0.0 {
            Span::default()
        } else {
            let drho = dc * (1.0 / s) - ds * (c / (s * s));
            drho * (-1.0 / sin)
        };
        let dderiv_kernel = dangle * (-k);

        dtheta_ntk = dc_next + dderiv_kernel * theta_ntk + dtheta_ntk * deriv_kernel;
        theta_ntk = c_next + deriv_kernel * theta_ntk;

        a = bv + 0.5 * wv * a;
        b = bv + 0.5 * wv * b;
        db = db * (0.5 * wv);
        c = c_next;
        dc = dc_next;
    }
    (theta_ntk, dtheta_ntk)
}

/// Coefficient `g` with `∇_z Θᴸ(z, z) = g · z`.
fn ntk_diag_grad_coeff(depth: usize, wv: f64, z: &[f64]) -> f64 {
    let d = z.len() as f64;
    // Along the diagonal θ ≡ 0, so Σʰ(z,z) = σ_b² + σ_w²/2 · Σʰ⁻¹(z,z) and
    // Σ̇ʰ = σ_w²/2; only the Σ term depends on z.
    let half = 0.5 * wv;
    let mut dsigma = 2.0 * wv / d;
    let mut dtheta = dsigma;
    for _ in 0..depth {
        dsigma *= half;
        dtheta = dsigma + half * dtheta;
    }
    dtheta
}
