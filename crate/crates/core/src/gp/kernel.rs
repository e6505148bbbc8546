//! Stationary covariance kernels with per-dimension (ARD) length-scales.

use serde::{Deserialize, Serialize};

use super::GpError;

const SQRT_3: f64 = 1.732_050_807_568_877_2;
const SQRT_5: f64 = 2.236_067_977_499_79;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelFamily {
    /// Squared-exponential; infinitely differentiable sample paths.
    Rbf,
    /// Matérn nu = 3/2; once differentiable.
    Matern32,
    /// Matérn nu = 5/2; twice differentiable.
    Matern52,
}

impl std::fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            KernelFamily::Rbf => write!(f, "rbf"),
            KernelFamily::Matern32 => write!(f, "matern32"),
            KernelFamily::Matern52 => write!(f, "matern52"),
        }
    }
}

impl std::str::FromStr for KernelFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "rbf" => Ok(KernelFamily::Rbf),
            "matern32" => Ok(KernelFamily::Matern32),
            "matern52" => Ok(KernelFamily::Matern52),
            other => Err(format!("unknown kernel family `{other}`")),
        }
    }
}

/// A fully specified kernel: family, ARD length-scales, signal and noise
/// variances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub family: KernelFamily,
    /// One positive length-scale per input dimension.
    pub length_scales: Vec<f64>,
    pub signal_variance: f64,
    pub noise_variance: f64,
}

impl KernelSpec {
    pub fn new(
        family: KernelFamily,
        length_scales: Vec<f64>,
        signal_variance: f64,
        noise_variance: f64,
    ) -> Result<Self, GpError> {
        let spec = Self { family, length_scales, signal_variance, noise_variance };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), GpError> {
        if self.length_scales.is_empty() || self.length_scales.iter().any(|&l| !(l > 0.0)) {
            return Err(GpError::InvalidHyperparameter(
                "length-scales must be positive".into(),
            ));
        }
        if !(self.signal_variance > 0.0) {
            return Err(GpError::InvalidHyperparameter(
                format!("signal variance must be positive, got {}", self.signal_variance),
            ));
        }
        if self.noise_variance < 0.0 {
            return Err(GpError::InvalidHyperparameter(
                format!("noise variance must be non-negative, got {}", self.noise_variance),
            ));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.length_scales.len()
    }

    fn scaled_sq_dist(&self, x: &[f64], y: &[f64]) -> f64 {
        self.length_scales
            .iter()
            .zip(x.iter().zip(y))
            .map(|(&l, (&a, &b))| {
                let u = (a - b) / l;
                u * u
            })
            .sum()
    }

    /// Covariance between `x` and `y` (noise not included).
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim());
        debug_assert_eq!(y.len(), self.dim());
        let r2 = self.scaled_sq_dist(x, y);
        let sf2 = self.signal_variance;
        match self.family {
            KernelFamily::Rbf => sf2 * (-0.5 * r2).exp(),
            KernelFamily::Matern32 => {
                let r = r2.sqrt();
                sf2 * (1.0 + SQRT_3 * r) * (-SQRT_3 * r).exp()
            }
            KernelFamily::Matern52 => {
                let r = r2.sqrt();
                sf2 * (1.0 + SQRT_5 * r + 5.0 * r2 / 3.0) * (-SQRT_5 * r).exp()
            }
        }
    }

    /// Returns `k(x, y)` and its partial derivatives with respect to each
    /// log length-scale. The derivative with respect to `ln
    /// signal_variance` is `k` itself.
    ///
    /// All three families share the form `dk/d ln l_d = c(r) * u_d^2` with
    /// `u_d = (x_d - y_d)/l_d`, which stays finite as `r -> 0`.
    pub fn grad_log_length_scales(&self, x: &[f64], y: &[f64]) -> (f64, Vec<f64>) {
        let mut grad = vec![0.0; self.dim()];
        let k = self.grad_log_length_scales_into(x, y, &mut grad);
        (k, grad)
    }

    /// Allocation-free form of [`Self::grad_log_length_scales`]; writes the
    /// per-dimension derivatives into `grad` and returns `k(x, y)`.
    pub fn grad_log_length_scales_into(&self, x: &[f64], y: &[f64], grad: &mut [f64]) -> f64 {
        debug_assert_eq!(grad.len(), self.dim());
        let mut r2 = 0.0;
        for (g, (&l, (&a, &b))) in
            grad.iter_mut().zip(self.length_scales.iter().zip(x.iter().zip(y)))
        {
            let u = (a - b) / l;
            let u2 = u * u;
            *g = u2;
            r2 += u2;
        }
        let r = r2.sqrt();
        let sf2 = self.signal_variance;
        let (k, factor) = match self.family {
            KernelFamily::Rbf => {
                let k = sf2 * (-0.5 * r2).exp();
                (k, k)
            }
            KernelFamily::Matern32 => {
                let e = (-SQRT_3 * r).exp();
                (sf2 * (1.0 + SQRT_3 * r) * e, 3.0 * sf2 * e)
            }
            KernelFamily::Matern52 => {
                let e = (-SQRT_5 * r).exp();
                (
                    sf2 * (1.0 + SQRT_5 * r + 5.0 * r2 / 3.0) * e,
                    5.0 / 3.0 * sf2 * (1.0 + SQRT_5 * r) * e,
                )
            }
        };
        for g in grad.iter_mut() {
            *g *= factor;
        }
        k
    }
}

/// Dimension-checked covariance evaluation.
pub fn kernel_eval(spec: &KernelSpec, x: &[f64], y: &[f64]) -> Result<f64, GpError> {
    if x.len() != spec.dim() || y.len() != spec.dim() {
        return Err(GpError::DimensionMismatch { expected: spec.dim(), got: x.len().max(y.len()) });
    }
    Ok(spec.eval(x, y))
}
