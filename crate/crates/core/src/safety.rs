//! Confidence intervals and the high-probability safe set
//! `S_n = {x : mu_n(x) - beta_n sigma_n(x) >= threshold} ∪ {x_0}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gp::GpState;

/// Coordinate tolerance for recognising the safe seed.
pub const SEED_TOLERANCE: f64 = 1e-12;

/// `n -> beta_n`. A table holds its last entry for larger `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BetaSchedule {
    Constant(f64),
    Table(Vec<f64>),
}

impl Default for BetaSchedule {
    fn default() -> Self {
        BetaSchedule::Constant(2.0)
    }
}

impl BetaSchedule {
    pub fn validate(&self) -> Result<()> {
        let ok = |b: &f64| b.is_finite() && *b >= 0.0;
        match self {
            BetaSchedule::Constant(b) if ok(b) => Ok(()),
            BetaSchedule::Table(t) if !t.is_empty() && t.iter().all(ok) => {
                if t.windows(2).all(|w| w[0] <= w[1]) {
                    Ok(())
                } else {
                    Err(Error::invalid("beta schedule must be non-decreasing"))
                }
            }
            _ => Err(Error::invalid("beta values must be finite and non-negative")),
        }
    }

    pub fn at(&self, n: usize) -> f64 {
        match self {
            BetaSchedule::Constant(b) => *b,
            BetaSchedule::Table(t) => t[n.min(t.len() - 1)],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SafetyModel {
    beta: BetaSchedule,
    seed: Vec<f64>,
    threshold: f64,
}

impl SafetyModel {
    /// Constant `beta = 2`, threshold 0.
    pub fn new(seed: Vec<f64>) -> Self {
        Self {
            beta: BetaSchedule::default(),
            seed,
            threshold: 0.0,
        }
    }

    pub fn with_beta(mut self, beta: BetaSchedule) -> Result<Self> {
        beta.validate()?;
        self.beta = beta;
        Ok(self)
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        self
    }

    pub fn seed(&self) -> &[f64] {
        &self.seed
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn beta(&self, n: usize) -> f64 {
        self.beta.at(n)
    }

    pub fn schedule(&self) -> &BetaSchedule {
        &self.beta
    }

    pub fn is_seed(&self, x: &[f64]) -> bool {
        x.len() == self.seed.len()
            && x
                .iter()
                .zip(&self.seed)
                .all(|(a, b)| (a - b).abs() <= SEED_TOLERANCE)
    }

    /// `[mu - beta sigma, mu + beta sigma]`
    pub fn confidence_interval(&self, gp: &GpState, n: usize, x: &[f64]) -> (f64, f64) {
        let (mean, var) = gp.posterior(x);
        self.interval_from_stats(n, mean, var.sqrt())
    }

    pub fn interval_from_stats(&self, n: usize, mean: f64, std: f64) -> (f64, f64) {
        let half = self.beta(n) * std;
        (mean - half, mean + half)
    }

    pub fn is_safe(&self, gp: &GpState, n: usize, x: &[f64]) -> bool {
        if self.is_seed(x) {
            return true;
        }
        let (mean, var) = gp.posterior(x);
        self.lower_bound_clears(n, mean, var.sqrt())
    }

    /// Safe-set test from precomputed posterior statistics.
    pub fn is_safe_with(&self, n: usize, x: &[f64], mean: f64, std: f64) -> bool {
        self.is_seed(x) || self.lower_bound_clears(n, mean, std)
    }

    #[inline]
    pub fn lower_bound_clears(&self, n: usize, mean: f64, std: f64) -> bool {
        mean - self.beta(n) * std >= self.threshold
    }

    /// Whether `|mu_n(x)| <= 2 beta_n sigma_0(x)` on every probe.
    pub fn posterior_mean_bound_check<'a>(
        &self,
        gp: &GpState,
        n: usize,
        probes: impl IntoIterator<Item = &'a [f64]>,
    ) -> bool {
        let bound = 2.0 * self.beta(n) * gp.prior_variance().sqrt();
        probes.into_iter().all(|x| gp.posterior(x).0.abs() <= bound)
    }
}
