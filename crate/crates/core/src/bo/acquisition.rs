//! Acquisition functions: log expected improvement (minimization) and
//! exact 2-D expected hypervolume improvement for independent Gaussian
//! posteriors.

use statrs::function::erf::erfc;

use super::pareto::{ParetoFront, ReferencePoint};
use crate::gp::Posterior;

const LN_2PI_OVER_2: f64 = 0.918_938_533_204_672_7;
const LN_PI_OVER_2_OVER_2: f64 = 0.225_791_352_644_727_4; // ln(pi/2)/2
const INV_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Saturating floor standing in for `ln 0`.
pub const LOG_EI_FLOOR: f64 = -1e6;

pub(crate) fn norm_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

pub(crate) fn norm_cdf(z: f64) -> f64 {
    0.5 * erfc(-z * INV_SQRT_2)
}

fn log_norm_pdf(z: f64) -> f64 {
    -0.5 * z * z - LN_2PI_OVER_2
}

/// `exp(u^2) * erfc(u)`; safe for `u` up to ~26, which covers the branch
/// that uses it (`|z| < 25`).
fn erfcx(u: f64) -> f64 {
    (u * u).exp() * erfc(u)
}

/// `ln(1 - e^x)` for `x < 0` without cancellation.
fn log1mexp(x: f64) -> f64 {
    if x > -std::f64::consts::LN_2 {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

/// `ln h(z)` with `h(z) = phi(z) + z Phi(z)`, stable over the whole line.
///
/// For moderate z the direct formula holds; for `z <= -1` the cancellation
/// between the two terms is resolved through `erfcx`; far in the tail the
/// asymptotic series `h(z) ~ phi(z)/z^2 (1 - 3/z^2)` takes over.
fn log_h(z: f64) -> f64 {
    if z > -1.0 {
        (norm_pdf(z) + z * norm_cdf(z)).ln()
    } else if z > -25.0 {
        let w = (erfcx(-z * INV_SQRT_2) * z.abs()).ln() + LN_PI_OVER_2_OVER_2;
        log_norm_pdf(z) + log1mexp(w)
    } else {
        log_norm_pdf(z) - 2.0 * z.abs().ln() + (-3.0 / (z * z)).ln_1p()
    }
}

/// Log of the expected improvement below `best_loss` for a Gaussian
/// posterior, minimization convention:
/// `EI = (best - mean) Phi(z) + sigma phi(z)`, `z = (best - mean)/sigma`.
///
/// A deterministic posterior (`variance = 0`) gives `ln(max(best - mean,
/// 0))`, with `ln 0` saturating at [`LOG_EI_FLOOR`].
pub fn log_expected_improvement(mean: f64, variance: f64, best_loss: f64) -> f64 {
    let sigma = variance.max(0.0).sqrt();
    if sigma == 0.0 {
        let improvement = best_loss - mean;
        if improvement > 0.0 {
            return improvement.ln().max(LOG_EI_FLOOR);
        }
        return LOG_EI_FLOOR;
    }
    let z = (best_loss - mean) / sigma;
    let v = sigma.ln() + log_h(z);
    if v.is_nan() {
        LOG_EI_FLOOR
    } else {
        v.max(LOG_EI_FLOOR)
    }
}

/// `E[(c - X)^+]` for `X ~ N(mu, sigma^2)`.
fn expected_shortfall(c: f64, mu: f64, sigma: f64) -> f64 {
    if sigma == 0.0 {
        return (c - mu).max(0.0);
    }
    let z = (c - mu) / sigma;
    sigma * (norm_pdf(z) + z * norm_cdf(z))
}

/// `E[(e - max(s, X))^+]` for `X ~ N(mu, sigma^2)`; `s = None` means no
/// lower clamp.
fn strip_width_expectation(s: Option<f64>, e: f64, mu: f64, sigma: f64) -> f64 {
    let Some(s) = s else {
        return expected_shortfall(e, mu, sigma);
    };
    if e <= s {
        return 0.0;
    }
    if sigma == 0.0 {
        return if mu <= s { e - s } else { (e - mu).max(0.0) };
    }
    let alpha = (s - mu) / sigma;
    let beta = (e - mu) / sigma;
    (e - s) * norm_cdf(alpha)
        + (e - mu) * (norm_cdf(beta) - norm_cdf(alpha))
        + sigma * (norm_pdf(beta) - norm_pdf(alpha))
}

/// Exact 2-D expected hypervolume improvement of a candidate with
/// independent Gaussian posteriors over the two objectives, given the
/// current front and reference point (minimization).
///
/// The non-dominated part of the reference box decomposes into vertical
/// strips bounded by consecutive front members; over each strip the
/// improvement factorizes into independent one-dimensional partial
/// expectations. Degenerate posteriors (zero variance) reduce exactly to
/// the deterministic hypervolume improvement.
pub fn ehvi(
    first: &Posterior,
    second: &Posterior,
    front: &ParetoFront,
    reference: &ReferencePoint,
) -> f64 {
    let r = reference.0;
    let sigma1 = first.variance.max(0.0).sqrt();
    let sigma2 = second.variance.max(0.0).sqrt();
    let n = front.members.len();
    let mut total = 0.0;
    for i in 0..=n {
        let s = if i == 0 { None } else { Some(front.members[i - 1].objectives[0]) };
        let e = if i < n { front.members[i].objectives[0] } else { r[0] };
        let e = e.min(r[0]);
        let level = if i == 0 { r[1] } else { front.members[i - 1].objectives[1].min(r[1]) };
        let width = strip_width_expectation(s, e, first.mean, sigma1);
        if width > 0.0 {
            total += width * expected_shortfall(level, second.mean, sigma2);
        }
    }
    total.max(0.0)
}
