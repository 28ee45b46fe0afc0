use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Squared-exponential kernel `s * exp(-0.5 * sum_i ((x_i - x'_i) / l_i)^2)`.
///
/// A single lengthscale is applied to every input dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KernelSpec", into = "KernelSpec")]
pub struct RbfKernel {
    lengthscale: Vec<f64>,
    outputscale: f64,
}

/// Wire form of the kernel; `lengthscale` is a number or a per-dimension list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub lengthscale: Lengthscale,
    pub outputscale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Lengthscale {
    Isotropic(f64),
    PerDimension(Vec<f64>),
}

impl TryFrom<KernelSpec> for RbfKernel {
    type Error = Error;

    fn try_from(spec: KernelSpec) -> Result<Self> {
        match spec.lengthscale {
            Lengthscale::Isotropic(l) => RbfKernel::isotropic(l, spec.outputscale),
            Lengthscale::PerDimension(l) => RbfKernel::ard(l, spec.outputscale),
        }
    }
}

impl From<RbfKernel> for KernelSpec {
    fn from(k: RbfKernel) -> Self {
        let lengthscale = if k.lengthscale.len() == 1 {
            Lengthscale::Isotropic(k.lengthscale[0])
        } else {
            Lengthscale::PerDimension(k.lengthscale)
        };
        KernelSpec {
            lengthscale,
            outputscale: k.outputscale,
        }
    }
}

impl RbfKernel {
    pub fn isotropic(lengthscale: f64, outputscale: f64) -> Result<Self> {
        Self::ard(vec![lengthscale], outputscale)
    }

    pub fn ard(lengthscale: Vec<f64>, outputscale: f64) -> Result<Self> {
        if lengthscale.is_empty() || lengthscale.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(Error::invalid("lengthscales must be positive and finite"));
        }
        if !(outputscale.is_finite() && outputscale > 0.0) {
            return Err(Error::invalid("outputscale must be positive and finite"));
        }
        Ok(Self {
            lengthscale,
            outputscale,
        })
    }

    pub fn outputscale(&self) -> f64 {
        self.outputscale
    }

    pub fn lengthscale(&self, axis: usize) -> f64 {
        if self.lengthscale.len() == 1 {
            self.lengthscale[0]
        } else {
            self.lengthscale[axis]
        }
    }

    pub fn min_lengthscale(&self) -> f64 {
        self.lengthscale.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Whether the kernel can be evaluated on `dim`-dimensional inputs.
    pub fn supports_dim(&self, dim: usize) -> bool {
        self.lengthscale.len() == 1 || self.lengthscale.len() == dim
    }

    /// Scaled squared distance `sum_i ((x_i - y_i) / l_i)^2`.
    #[inline]
    pub fn scaled_sq_dist(&self, x: &[f64], y: &[f64]) -> f64 {
        if self.lengthscale.len() == 1 {
            let inv = 1.0 / self.lengthscale[0];
            x.iter()
                .zip(y)
                .map(|(a, b)| {
                    let d = (a - b) * inv;
                    d * d
                })
                .sum()
        } else {
            x.iter()
                .zip(y)
                .zip(&self.lengthscale)
                .map(|((a, b), l)| {
                    let d = (a - b) / l;
                    d * d
                })
                .sum()
        }
    }

    #[inline]
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        self.outputscale * (-0.5 * self.scaled_sq_dist(x, y)).exp()
    }

    /// Prior variance `k(x, x)`; constant for a stationary kernel.
    #[inline]
    pub fn diag(&self) -> f64 {
        self.outputscale
    }

    /// Kernel-induced metric `sqrt(k(x,x) + k(y,y) - 2 k(x,y))`.
    pub fn metric(&self, x: &[f64], y: &[f64]) -> f64 {
        self.metric_from_sq_dist(self.scaled_sq_dist(x, y))
    }

    #[inline]
    pub fn metric_from_sq_dist(&self, scaled_sq_dist: f64) -> f64 {
        // 2s(1 - e^{-r/2}) computed with expm1 to keep precision near r = 0.
        (-2.0 * self.outputscale * (-0.5 * scaled_sq_dist).exp_m1())
            .max(0.0)
            .sqrt()
    }
}
