use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Observation-noise variance as a function of the evaluated parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseModel {
    Homoskedastic {
        variance: f64,
    },
    /// Two-level noise split by the hyperplane `x[axis] = threshold`:
    /// `upper` applies where `x[axis] >= threshold`, `lower` elsewhere.
    Heteroskedastic {
        axis: usize,
        threshold: f64,
        upper: f64,
        lower: f64,
    },
}

impl NoiseModel {
    pub fn homoskedastic(variance: f64) -> Result<Self> {
        let m = NoiseModel::Homoskedastic { variance };
        m.validate()?;
        Ok(m)
    }

    /// Half-space split on the first coordinate.
    pub fn split_first_axis(non_negative: f64, negative: f64) -> Result<Self> {
        let m = NoiseModel::Heteroskedastic {
            axis: 0,
            threshold: 0.0,
            upper: non_negative,
            lower: negative,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        let valid = match *self {
            NoiseModel::Homoskedastic { variance } => ok(variance),
            NoiseModel::Heteroskedastic { upper, lower, .. } => ok(upper) && ok(lower),
        };
        if valid {
            Ok(())
        } else {
            Err(Error::invalid("noise variances must be positive and finite"))
        }
    }

    #[inline]
    pub fn variance_at(&self, x: &[f64]) -> f64 {
        match *self {
            NoiseModel::Homoskedastic { variance } => variance,
            NoiseModel::Heteroskedastic {
                axis,
                threshold,
                upper,
                lower,
            } => {
                if x[axis] >= threshold {
                    upper
                } else {
                    lower
                }
            }
        }
    }

    pub fn min_variance(&self) -> f64 {
        match *self {
            NoiseModel::Homoskedastic { variance } => variance,
            NoiseModel::Heteroskedastic { upper, lower, .. } => upper.min(lower),
        }
    }
}
