use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::Constraint;
use crate::domain::BoxDomain;
use crate::error::{Error, Result};
use crate::gp::TriangularFactor;

const MAX_REDRAWS: usize = 100;
const JITTER_LADDER: [f64; 5] = [0.0, 1e-12, 1e-10, 1e-8, 1e-6];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GpSampleParams {
    pub dim: usize,
    pub lower: f64,
    pub upper: f64,
    pub lengthscale: f64,
    pub outputscale: f64,
    pub noise: f64,
    pub points_per_dim: usize,
    /// Defaults to the origin.
    pub seed: Option<Vec<f64>>,
}

impl Default for GpSampleParams {
    fn default() -> Self {
        Self {
            dim: 2,
            lower: -2.5,
            upper: 2.5,
            lengthscale: 0.1,
            outputscale: 150.0,
            noise: 0.05,
            points_per_dim: 61,
            seed: None,
        }
    }
}

impl GpSampleParams {
    pub fn domain(&self) -> Result<BoxDomain> {
        BoxDomain::cube(self.dim, self.lower, self.upper)
    }

    pub fn seed_point(&self) -> Vec<f64> {
        self.seed.clone().unwrap_or_else(|| vec![0.0; self.dim])
    }

    fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.points_per_dim < 2 {
            return Err(Error::invalid("GP sample needs dim >= 1 and at least two grid points"));
        }
        if !(self.lengthscale > 0.0 && self.outputscale > 0.0) {
            return Err(Error::invalid("GP sample hyperparameters must be positive"));
        }
        let total = (self.points_per_dim as f64).powi(self.dim as i32);
        if total > 5e6 {
            return Err(Error::invalid("GP sample grid too large"));
        }
        Ok(())
    }
}

/// One prior draw on a tensor grid, extended to the whole box as the
/// noiseless posterior mean given the drawn grid values.
#[derive(Debug, Clone)]
pub struct GpSample {
    axis: Vec<f64>,
    lengthscale: f64,
    outputscale: f64,
    dim: usize,
    /// Interpolation weights `K^{-1} f` over the grid, last axis fastest.
    weights: Vec<f64>,
}

impl GpSample {
    /// Draw until the seed is strictly safe.
    pub fn draw<R: Rng + ?Sized>(p: &GpSampleParams, rng: &mut R) -> Result<Self> {
        p.validate()?;
        let m = p.points_per_dim;
        let axis: Vec<f64> = (0..m)
            .map(|i| {
                if i + 1 == m {
                    p.upper
                } else {
                    p.lower + (p.upper - p.lower) * i as f64 / (m - 1) as f64
                }
            })
            .collect();
        let factor = Self::axis_factor(&axis, p.lengthscale)?;
        let total = m.pow(p.dim as u32);
        let seed = p.seed_point();
        for _ in 0..MAX_REDRAWS {
            // f = sqrt(s) (L x ... x L) e  =>  K^{-1} f = (L^-T x ... x L^-T) e / sqrt(s)
            let mut weights: Vec<f64> = (0..total).map(|_| rng.sample(StandardNormal)).collect();
            for axis_index in 0..p.dim {
                apply_along_axis(&mut weights, m, p.dim, axis_index, |fiber| {
                    back_solve(&factor, fiber)
                });
            }
            let scale = p.outputscale.sqrt();
            weights.iter_mut().for_each(|w| *w /= scale);
            let sample = Self {
                axis: axis.clone(),
                lengthscale: p.lengthscale,
                outputscale: p.outputscale,
                dim: p.dim,
                weights,
            };
            if sample.value(&seed)? > 0.0 {
                return Ok(sample);
            }
        }
        Err(Error::Environment(format!(
            "no GP sample with a safe seed after {MAX_REDRAWS} draws"
        )))
    }

    fn axis_factor(axis: &[f64], lengthscale: f64) -> Result<TriangularFactor> {
        let k = |a: f64, b: f64| (-0.5 * ((a - b) / lengthscale).powi(2)).exp();
        for jitter in JITTER_LADDER {
            let f = TriangularFactor::factor(axis.len(), |i, j| {
                k(axis[i], axis[j]) + if i == j { jitter } else { 0.0 }
            });
            if let Some(f) = f {
                return Ok(f);
            }
        }
        Err(Error::NumericalDegeneracy {
            jitter: JITTER_LADDER[JITTER_LADDER.len() - 1],
        })
    }

    pub fn grid_axis(&self) -> &[f64] {
        &self.axis
    }

    /// Grid point with multi-index `idx`.
    pub fn grid_point(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter().map(|&i| self.axis[i]).collect()
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let m = self.axis.len();
        let mut acc = self.weights.clone();
        // contract the last remaining axis each round
        for a in (0..self.dim).rev() {
            let w: Vec<f64> = self
                .axis
                .iter()
                .map(|g| (-0.5 * ((x[a] - g) / self.lengthscale).powi(2)).exp())
                .collect();
            acc = acc
                .chunks_exact(m)
                .map(|c| c.iter().zip(&w).map(|(a, b)| a * b).sum())
                .collect();
        }
        self.outputscale * acc[0]
    }
}

impl Constraint for GpSample {
    fn value(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(self.eval(x))
    }
}

/// Solve `L^T a = b` in place.
fn back_solve(l: &TriangularFactor, b: &mut [f64]) {
    let n = b.len();
    for i in (0..n).rev() {
        let mut s = b[i];
        for (j, bj) in b.iter().enumerate().skip(i + 1) {
            s -= l.row(j)[i] * bj;
        }
        b[i] = s / l.diag(i);
    }
}

/// Apply `op` to every fibre of a `m^dim` tensor along `axis`.
fn apply_along_axis(t: &mut [f64], m: usize, dim: usize, axis: usize, mut op: impl FnMut(&mut [f64])) {
    let stride = m.pow((dim - 1 - axis) as u32);
    let block = stride * m;
    let mut fiber = vec![0.0; m];
    for start in (0..t.len()).step_by(block) {
        for offset in 0..stride {
            let base = start + offset;
            for (k, v) in fiber.iter_mut().enumerate() {
                *v = t[base + k * stride];
            }
            op(&mut fiber);
            for (k, v) in fiber.iter().enumerate() {
                t[base + k * stride] = *v;
            }
        }
    }
}
