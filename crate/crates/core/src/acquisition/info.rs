//! Safety-indicator entropy and the closed-form mutual information between an
//! observation at `x` and the safety of `z`.

use std::f64::consts::{LN_2, PI, SQRT_2};

use crate::error::{Error, Result};
use crate::gp::{GpState, PointPosterior};

/// Constants of the Gaussian-shaped entropy surrogate.
#[derive(Debug, Clone, Copy)]
pub struct MiConstants;

impl MiConstants {
    /// `1 / (pi ln 2)`
    pub const C1: f64 = 1.0 / (PI * LN_2);
    /// `2 c1 - 1`, lies in (-1, 0).
    pub const C2: f64 = 2.0 * Self::C1 - 1.0;
}

const C1: f64 = MiConstants::C1;
const C2: f64 = MiConstants::C2;

/// Posterior mean and standard deviation of `f` at one parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiStatistics {
    pub mean: f64,
    pub std: f64,
}

impl PsiStatistics {
    pub fn new(mean: f64, std: f64) -> Self {
        Self { mean, std }
    }

    fn checked_ratio(&self) -> Result<f64> {
        if self.std > 0.0 && self.std.is_finite() {
            Ok(self.mean / self.std)
        } else {
            Err(Error::DegenerateStatistics(self.std))
        }
    }
}

/// Binary entropy (nats) of the safety indicator given `mu / sigma`.
pub fn entropy_exact_ratio(ratio: f64) -> f64 {
    // probability of the less likely outcome, computed via erfc so that the
    // tails do not cancel
    let p = 0.5 * libm::erfc(ratio.abs() / SQRT_2);
    if p <= 0.0 {
        return 0.0;
    }
    -p * p.ln() - (1.0 - p) * (-p).ln_1p()
}

/// Gaussian-shaped surrogate `ln 2 exp(-c1 (mu/sigma)^2)`.
pub fn entropy_approx_ratio(ratio: f64) -> f64 {
    LN_2 * (-C1 * ratio * ratio).exp()
}

pub fn entropy_exact(s: PsiStatistics) -> Result<f64> {
    Ok(entropy_exact_ratio(s.checked_ratio()?))
}

pub fn entropy_approx(s: PsiStatistics) -> Result<f64> {
    Ok(entropy_approx_ratio(s.checked_ratio()?))
}

/// Everything the closed forms need about a pair `(x, z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairStatistics {
    pub mean_z: f64,
    pub var_z: f64,
    pub var_x: f64,
    pub noise_x: f64,
    /// Posterior correlation of `f(x)` and `f(z)`.
    pub rho: f64,
}

impl PairStatistics {
    pub fn compute(gp: &GpState, x: &[f64], z: &[f64]) -> Self {
        let qx = gp.query(x);
        let qz = gp.query(z);
        Self::from_queries(gp, x, &qx, z, &qz)
    }

    pub fn from_queries(
        gp: &GpState,
        x: &[f64],
        qx: &PointPosterior,
        z: &[f64],
        qz: &PointPosterior,
    ) -> Self {
        Self {
            mean_z: qz.mean,
            var_z: qz.variance,
            var_x: qx.variance,
            noise_x: gp.noise_variance(x),
            rho: gp.correlation((x, qx), (z, qz)),
        }
    }

    /// `sigma_n^2(x) / (sigma_nu^2 + sigma_n^2(x))`
    pub fn rho_nu_sq(&self) -> f64 {
        rho_nu_sq(self.var_x, self.noise_x)
    }

    /// `rho_nu^2 rho_n^2`
    pub fn effective_rho_sq(&self) -> f64 {
        self.rho_nu_sq() * self.rho * self.rho
    }

    /// `(mu_z / sigma_z)^2`, `None` when `sigma_z` vanishes.
    pub fn ratio_sq(&self) -> Option<f64> {
        (self.var_z > 0.0).then(|| self.mean_z * self.mean_z / self.var_z)
    }
}

pub fn rho_nu_sq(var_x: f64, noise_x: f64) -> f64 {
    let v = var_x.max(0.0);
    v / (noise_x + v)
}

/// Expected surrogate entropy at `z` after observing at `x`.
pub fn expected_post_entropy_stats(s: &PairStatistics) -> Result<f64> {
    let ratio_sq = s.ratio_sq().ok_or(Error::DegenerateStatistics(s.var_z.max(0.0).sqrt()))?;
    let var_x = s.var_x.max(0.0);
    let rho_sq = s.rho * s.rho;
    let denom = s.noise_x + var_x * (1.0 + C2 * rho_sq);
    let shrink = ((s.noise_x + var_x * (1.0 - rho_sq)) / denom).max(0.0);
    let exponent = -C1 * ratio_sq * (s.noise_x + var_x) / denom;
    Ok(LN_2 * (0.5 * shrink.ln() + exponent).exp())
}

/// Surrogate mutual information, floored at zero; zero when `sigma_n(z) = 0`.
pub fn mutual_info_stats(s: &PairStatistics) -> f64 {
    let Some(ratio_sq) = s.ratio_sq() else {
        return 0.0;
    };
    let prior = LN_2 * (-C1 * ratio_sq).exp();
    let post = match expected_post_entropy_stats(s) {
        Ok(v) => v,
        Err(_) => return 0.0,
    };
    let mi = prior - post;
    debug_assert!(mi >= -1e-12, "negative mutual information {mi}");
    mi.max(0.0)
}

/// The same quantity written in terms of `R^2 = mu_z^2 / sigma_z^2` and
/// `rho~^2 = rho_nu^2 rho_n^2`.
pub fn mutual_info_rewritten_stats(s: &PairStatistics) -> f64 {
    let Some(ratio_sq) = s.ratio_sq() else {
        return 0.0;
    };
    mutual_info_from_ratio(ratio_sq, s.effective_rho_sq())
}

/// `ln2 [exp(-c1 R^2) - sqrt((1 - p)/(1 + c2 p)) exp(-c1 R^2 / (1 + c2 p))]`
/// with `p = rho~^2`.
pub fn mutual_info_from_ratio(ratio_sq: f64, effective_rho_sq: f64) -> f64 {
    let p = effective_rho_sq.clamp(0.0, 1.0);
    let denom = 1.0 + C2 * p;
    let root = ((1.0 - p) / denom).max(0.0).sqrt();
    let v = LN_2 * ((-C1 * ratio_sq).exp() - root * (-C1 * ratio_sq / denom).exp());
    v.max(0.0)
}

pub fn expected_post_entropy(gp: &GpState, x: &[f64], z: &[f64]) -> Result<f64> {
    expected_post_entropy_stats(&PairStatistics::compute(gp, x, z))
}

pub fn mutual_info(gp: &GpState, x: &[f64], z: &[f64]) -> f64 {
    mutual_info_stats(&PairStatistics::compute(gp, x, z))
}

pub fn mutual_info_rewritten(gp: &GpState, x: &[f64], z: &[f64]) -> f64 {
    mutual_info_rewritten_stats(&PairStatistics::compute(gp, x, z))
}

/// `ln 2 sigma_n^2(x) / sigma_nu^2(x)`, an upper bound on the mutual
/// information for any `z`.
pub fn mi_upper_bound(gp: &GpState, x: &[f64]) -> f64 {
    let (_, var) = gp.posterior(x);
    LN_2 * var / gp.noise_variance(x)
}

/// Lower bound on the information gain at the maximiser in terms of the
/// largest safe-set variance `eta`, with `|mu| <= mean_bound` on the safe set.
pub fn b_function(eta: f64, mean_bound: f64, noise: f64) -> f64 {
    if eta <= 0.0 {
        return 0.0;
    }
    let decay = (-C1 * mean_bound * mean_bound / eta).exp();
    let bracket = 1.0 - (noise / (2.0 * C1 * eta + noise)).sqrt();
    LN_2 * decay * bracket
}

/// Inverse of [`b_function`] in `eta` by bisection. `target` must lie in
/// `[0, ln 2)`.
pub fn b_inverse(target: f64, mean_bound: f64, noise: f64) -> Result<f64> {
    let sup = LN_2;
    if !(target >= 0.0 && target < sup) {
        return Err(Error::OutOfRange { target, sup });
    }
    if !(noise > 0.0) {
        return Err(Error::invalid("noise variance must be positive"));
    }
    let lo_bracket = f64::MIN_POSITIVE;
    if target == 0.0 {
        return Ok(lo_bracket);
    }
    let mut hi = 1.0;
    while b_function(hi, mean_bound, noise) < target {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::OutOfRange { target, sup });
        }
    }
    let mut lo = 0.0;
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if b_function(mid, mean_bound, noise) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi.max(lo_bracket))
}
