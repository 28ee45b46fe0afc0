use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned box `[lower_i, upper_i]` in R^d.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BoxBounds", into = "BoxBounds")]
pub struct BoxDomain {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct BoxBounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl TryFrom<BoxBounds> for BoxDomain {
    type Error = Error;

    fn try_from(b: BoxBounds) -> Result<Self> {
        BoxDomain::new(b.lower, b.upper)
    }
}

impl From<BoxDomain> for BoxBounds {
    fn from(b: BoxDomain) -> Self {
        BoxBounds {
            lower: b.lower,
            upper: b.upper,
        }
    }
}

impl BoxDomain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::invalid("box bounds must be non-empty and of equal length"));
        }
        for (lo, hi) in lower.iter().zip(&upper) {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::invalid(format!("invalid box side [{lo}, {hi}]")));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The cube `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn width(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }

    pub fn max_width(&self) -> f64 {
        (0..self.dim()).map(|i| self.width(i)).fold(0.0, f64::max)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.contains_with_tolerance(x, 1e-9)
    }

    pub fn contains_with_tolerance(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| *v >= lo - tol && *v <= hi + tol)
    }

    pub fn clamp_in_place(&self, x: &mut [f64]) {
        for (v, (lo, hi)) in x.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *v = v.clamp(*lo, *hi);
        }
    }

    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| lo + (hi - lo) * rng.random::<f64>())
            .collect()
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|i| self.width(i)).product()
    }
}

pub(crate) fn check_dim(expected: usize, x: &[f64]) -> Result<()> {
    if x.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            got: x.len(),
        });
    }
    Ok(())
}
