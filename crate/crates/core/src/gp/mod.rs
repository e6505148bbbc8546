//! Gaussian-process regression surrogate.
//!
//! Targets are standardized to zero mean and unit variance, so the prior
//! mean is zero; hyperparameters (per-dimension length-scales, signal and
//! noise variances) are fitted by maximizing the log marginal likelihood
//! with a multi-start projected gradient ascent using analytic gradients.
//! All factorizations go through one Cholesky of `K + noise * I`, with
//! jitter escalated from 1e-10 to 1e-6 if the factorization fails.

mod kernel;
mod linalg;

use ndarray::{Array1, Array2};
use rand::Rng;
use thiserror::Error;

use crate::rng::{stream_rng, Stream};
pub use kernel::{kernel_eval, KernelFamily, KernelSpec};
pub(crate) use linalg::{cholesky, chol_inverse, chol_solve, log_det, solve_lower};

#[derive(Debug, Error, PartialEq)]
pub enum GpError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("training rows and targets differ: {rows} rows vs {targets} targets")]
    LengthMismatch { rows: usize, targets: usize },
    #[error("kernel matrix is not positive definite, even with jitter up to {max_jitter}")]
    NotPositiveDefinite { max_jitter: f64 },
    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(String),
}

/// Predictive distribution at one point, in the target's original units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Posterior {
    pub mean: f64,
    /// Non-negative; clamped at zero after the numerical solve.
    pub variance: f64,
}

/// A fitted Gaussian process.
#[derive(Debug, Clone)]
pub struct GpModel {
    pub kernel: KernelSpec,
    train_x: Array2<f64>,
    /// Standardized targets.
    train_y: Array1<f64>,
    pub y_mean: f64,
    pub y_std: f64,
    chol: Array2<f64>,
    alpha: Array1<f64>,
    /// Set when the targets had (numerically) zero variance; such a model
    /// predicts the constant and its length-scales carry no information.
    pub degenerate: bool,
}

const JITTERS: [f64; 5] = [1e-10, 1e-9, 1e-8, 1e-7, 1e-6];

fn gram_matrix(kernel: &KernelSpec, x: &Array2<f64>) -> Array2<f64> {
    let n = x.nrows();
    let mut k = Array2::zeros((n, n));
    for i in 0..n {
        let xi = x.row(i);
        for j in 0..=i {
            let v = kernel.eval(xi.as_slice().unwrap(), x.row(j).as_slice().unwrap());
            k[[i, j]] = v;
            k[[j, i]] = v;
        }
    }
    k
}

/// Cholesky of `K + noise*I`, escalating jitter on failure.
fn factorize(kernel: &KernelSpec, x: &Array2<f64>) -> Result<Array2<f64>, GpError> {
    let n = x.nrows();
    let mut a = gram_matrix(kernel, x);
    for i in 0..n {
        a[[i, i]] += kernel.noise_variance;
    }
    if let Some(l) = cholesky(&a) {
        return Ok(l);
    }
    for jitter in JITTERS {
        let mut b = a.clone();
        for i in 0..n {
            b[[i, i]] += jitter;
        }
        if let Some(l) = cholesky(&b) {
            return Ok(l);
        }
    }
    Err(GpError::NotPositiveDefinite { max_jitter: *JITTERS.last().unwrap() })
}

fn check_training(x: &Array2<f64>, y: &Array1<f64>) -> Result<(), GpError> {
    if x.nrows() == 0 {
        return Err(GpError::EmptyTrainingSet);
    }
    if x.nrows() != y.len() {
        return Err(GpError::LengthMismatch { rows: x.nrows(), targets: y.len() });
    }
    Ok(())
}

/// Log marginal likelihood of `y` under `kernel`:
/// `-1/2 y^T (K+s_n^2 I)^{-1} y - 1/2 ln|K+s_n^2 I| - n/2 ln(2 pi)`.
pub fn log_marginal_likelihood(
    kernel: &KernelSpec,
    x: &Array2<f64>,
    y: &Array1<f64>,
) -> Result<f64, GpError> {
    check_training(x, y)?;
    kernel.validate()?;
    if x.ncols() != kernel.dim() {
        return Err(GpError::DimensionMismatch { expected: kernel.dim(), got: x.ncols() });
    }
    let l = factorize(kernel, x)?;
    let alpha = chol_solve(&l, y);
    let n = y.len() as f64;
    Ok(-0.5 * y.dot(&alpha) - 0.5 * log_det(&l) - 0.5 * n * (2.0 * std::f64::consts::PI).ln())
}

/// Log marginal likelihood and its gradient with respect to the log-domain
/// hyperparameters `[ln l_1, ..., ln l_D, ln signal_variance, ln
/// noise_variance]`, via `d LML/d th = 1/2 tr((aa^T - A^{-1}) dA/d th)`.
pub fn lml_and_grad(
    kernel: &KernelSpec,
    x: &Array2<f64>,
    y: &Array1<f64>,
) -> Result<(f64, Vec<f64>), GpError> {
    check_training(x, y)?;
    kernel.validate()?;
    let n = x.nrows();
    let d = kernel.dim();
    let l = factorize(kernel, x)?;
    let alpha = chol_solve(&l, y);
    let lml =
        -0.5 * y.dot(&alpha) - 0.5 * log_det(&l) - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln();

    let a_inv = chol_inverse(&l);
    // m = alpha alpha^T - A^{-1}; grad_th = 1/2 sum_ij m_ij dK_ij/d th.
    // The summand is symmetric in (i, j), so off-diagonal pairs are visited
    // once with double weight.
    let mut grad = vec![0.0; d + 2];
    let mut trace_m = 0.0;
    let mut dk = vec![0.0; d];
    for i in 0..n {
        let xi = x.row(i);
        let xi = xi.as_slice().unwrap();
        for j in 0..=i {
            let m_ij = alpha[i] * alpha[j] - a_inv[[i, j]];
            let weight = if i == j {
                trace_m += m_ij;
                0.5 * m_ij
            } else {
                m_ij
            };
            let k_ij =
                kernel.grad_log_length_scales_into(xi, x.row(j).as_slice().unwrap(), &mut dk);
            for (g, dk_d) in grad.iter_mut().zip(&dk) {
                *g += weight * dk_d;
            }
            grad[d] += weight * k_ij;
        }
    }
    grad[d + 1] = 0.5 * kernel.noise_variance * trace_m;
    Ok((lml, grad))
}

fn standardize(y: &Array1<f64>) -> (f64, f64, bool) {
    let n = y.len() as f64;
    let mean = y.sum() / n;
    let var = y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    if std < 1e-12 * mean.abs().max(1.0) {
        (mean, 1.0, true)
    } else {
        (mean, std, false)
    }
}

impl GpModel {
    /// Builds a model for a fixed kernel: standardizes `y`, factorizes the
    /// kernel matrix, and precomputes the solve against the targets.
    pub fn from_kernel(
        kernel: KernelSpec,
        train_x: Array2<f64>,
        train_y: &Array1<f64>,
    ) -> Result<Self, GpError> {
        check_training(&train_x, train_y)?;
        kernel.validate()?;
        if train_x.ncols() != kernel.dim() {
            return Err(GpError::DimensionMismatch { expected: kernel.dim(), got: train_x.ncols() });
        }
        let (y_mean, y_std, degenerate) = standardize(train_y);
        let ys = train_y.mapv(|v| (v - y_mean) / y_std);
        let chol = factorize(&kernel, &train_x)?;
        let alpha = chol_solve(&chol, &ys);
        Ok(Self { kernel, train_x, train_y: ys, y_mean, y_std, chol, alpha, degenerate })
    }

    pub fn train_len(&self) -> usize {
        self.train_x.nrows()
    }

    pub fn dim(&self) -> usize {
        self.train_x.ncols()
    }

    /// Posterior mean and variance at `x`, de-standardized.
    pub fn predict(&self, x: &[f64]) -> Result<Posterior, GpError> {
        if x.len() != self.dim() {
            return Err(GpError::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        if self.degenerate {
            // Constant targets: predict the constant with no modeled
            // uncertainty.
            return Ok(Posterior { mean: self.y_mean, variance: 0.0 });
        }
        let n = self.train_len();
        let mut k_star = Array1::zeros(n);
        for i in 0..n {
            k_star[i] = self.kernel.eval(self.train_x.row(i).as_slice().unwrap(), x);
        }
        let mean_std = k_star.dot(&self.alpha);
        let v = solve_lower(&self.chol, &k_star);
        let var_std = (self.kernel.eval(x, x) - v.dot(&v)).max(0.0);
        Ok(Posterior {
            mean: self.y_mean + self.y_std * mean_std,
            variance: var_std * self.y_std * self.y_std,
        })
    }

    /// Model log marginal likelihood on the standardized targets.
    pub fn lml(&self) -> f64 {
        let n = self.train_len() as f64;
        -0.5 * self.train_y.dot(&self.alpha)
            - 0.5 * log_det(&self.chol)
            - 0.5 * n * (2.0 * std::f64::consts::PI).ln()
    }
}

const LN_10: f64 = std::f64::consts::LN_10;

/// Log-domain box bounds: length-scales in [1e-3, 1e3] (inputs live in the
/// unit cube), signal variance in [1e-4, 1e2], noise variance in [1e-6, 1].
fn bounds(d: usize) -> (Vec<f64>, Vec<f64>) {
    let mut lo = vec![-3.0 * LN_10; d + 2];
    let mut hi = vec![3.0 * LN_10; d + 2];
    lo[d] = -4.0 * LN_10;
    hi[d] = 2.0 * LN_10;
    lo[d + 1] = -6.0 * LN_10;
    hi[d + 1] = 0.0;
    (lo, hi)
}

/// Deterministic multi-start initial points (log-domain), shared by the
/// fitter and its tests. Start 0 is a fixed moderate default; the rest are
/// log-uniform draws.
pub(crate) fn multi_start_points(d: usize, starts: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = stream_rng(seed, Stream::GpFit);
    let mut points = Vec::with_capacity(starts);
    let mut default = vec![0.5_f64.ln(); d + 2];
    default[d] = 0.0; // signal variance 1
    default[d + 1] = 1e-4_f64.ln();
    points.push(default);
    for _ in 1..starts {
        let mut theta = Vec::with_capacity(d + 2);
        for _ in 0..d {
            theta.push(rng.random_range(0.05_f64.ln()..5.0_f64.ln()));
        }
        theta.push(rng.random_range(0.1_f64.ln()..10.0_f64.ln()));
        theta.push(rng.random_range(1e-5_f64.ln()..0.1_f64.ln()));
        points.push(theta);
    }
    points
}

fn kernel_from_theta(family: KernelFamily, d: usize, theta: &[f64]) -> KernelSpec {
    KernelSpec {
        family,
        length_scales: theta[..d].iter().map(|t| t.exp()).collect(),
        signal_variance: theta[d].exp(),
        noise_variance: theta[d + 1].exp(),
    }
}

fn clamp_theta(theta: &mut [f64], lo: &[f64], hi: &[f64]) {
    for ((t, &l), &h) in theta.iter_mut().zip(lo).zip(hi) {
        *t = t.clamp(l, h);
    }
}

/// Gradient pointing outward at an active bound is zeroed.
fn project_gradient(theta: &[f64], grad: &[f64], lo: &[f64], hi: &[f64]) -> Vec<f64> {
    theta
        .iter()
        .zip(grad)
        .zip(lo.iter().zip(hi))
        .map(|((&t, &g), (&l, &h))| {
            if (t <= l && g < 0.0) || (t >= h && g > 0.0) {
                0.0
            } else {
                g
            }
        })
        .collect()
}

struct AscentResult {
    lml: f64,
    theta: Vec<f64>,
}

fn ascend(
    family: KernelFamily,
    x: &Array2<f64>,
    y: &Array1<f64>,
    start: &[f64],
    lo: &[f64],
    hi: &[f64],
    max_iters: usize,
) -> AscentResult {
    let d = x.ncols();
    let mut theta = start.to_vec();
    clamp_theta(&mut theta, lo, hi);
    let value = |t: &[f64]| -> f64 {
        log_marginal_likelihood(&kernel_from_theta(family, d, t), x, y).unwrap_or(f64::NEG_INFINITY)
    };
    let mut best = AscentResult { lml: f64::NEG_INFINITY, theta: theta.clone() };
    let mut step = 0.1;
    for _ in 0..max_iters {
        let Ok((f, grad)) = lml_and_grad(&kernel_from_theta(family, d, &theta), x, y) else {
            break;
        };
        if f > best.lml {
            best = AscentResult { lml: f, theta: theta.clone() };
        }
        let pg = project_gradient(&theta, &grad, lo, hi);
        let norm2: f64 = pg.iter().map(|g| g * g).sum();
        if norm2.sqrt() < 5e-4 {
            break;
        }
        // Backtracking line search on the projected direction.
        let mut accepted = false;
        for _ in 0..25 {
            let mut cand: Vec<f64> =
                theta.iter().zip(&pg).map(|(&t, &g)| t + step * g).collect();
            clamp_theta(&mut cand, lo, hi);
            if cand == theta {
                break;
            }
            let f_new = value(&cand);
            if f_new > f + 1e-4 * step * norm2 {
                if f_new > best.lml {
                    best = AscentResult { lml: f_new, theta: cand.clone() };
                }
                theta = cand;
                step = (step * 1.5).min(10.0);
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    best
}

/// Default number of restarts for hyperparameter fitting.
pub const FIT_MULTI_STARTS: usize = 8;
const FIT_MAX_ITERS: usize = 25;

/// Fits a GP to `(x, y)`: standardizes the targets and maximizes the log
/// marginal likelihood over ARD length-scales, signal variance, and noise
/// variance by multi-start projected gradient ascent. Deterministic for a
/// given `seed`.
///
/// Degenerate targets (zero variance) yield a flagged constant model; a
/// single observation keeps the default hyperparameters.
pub fn fit_gp(
    x: &Array2<f64>,
    y: &Array1<f64>,
    family: KernelFamily,
    seed: u64,
) -> Result<GpModel, GpError> {
    check_training(x, y)?;
    let d = x.ncols();
    if d == 0 {
        return Err(GpError::DimensionMismatch { expected: 1, got: 0 });
    }
    let (y_mean, y_std, degenerate) = standardize(y);
    if degenerate {
        let kernel = KernelSpec {
            family,
            length_scales: vec![1.0; d],
            signal_variance: 1e-4,
            noise_variance: 1e-6,
        };
        return GpModel::from_kernel(kernel, x.clone(), y);
    }
    // A single observation always standardizes to zero variance, so the
    // degenerate branch above covers n = 1 with default hyperparameters.
    let ys = y.mapv(|v| (v - y_mean) / y_std);
    let (lo, hi) = bounds(d);
    let mut best: Option<AscentResult> = None;
    for start in multi_start_points(d, FIT_MULTI_STARTS, seed) {
        let result = ascend(family, x, &ys, &start, &lo, &hi, FIT_MAX_ITERS);
        let better = best.as_ref().map_or(true, |b| result.lml > b.lml);
        if better {
            best = Some(result);
        }
    }
    let best = best.expect("at least one start");
    if !best.lml.is_finite() {
        return Err(GpError::NotPositiveDefinite { max_jitter: *JITTERS.last().unwrap() });
    }
    GpModel::from_kernel(kernel_from_theta(family, d, &best.theta), x.clone(), y)
}
