//! Exact Gaussian-process regression with a zero prior mean.
//!
//! [`GpState`] is an immutable snapshot: conditioning returns a new state and
//! leaves the original untouched, so snapshots can be shared freely between
//! readers.

mod cache;
mod cholesky;
mod kernel;
mod noise;

pub use cache::PosteriorCache;
pub use cholesky::TriangularFactor;
pub use kernel::{KernelSpec, Lengthscale, RbfKernel};
pub use noise::NoiseModel;

use crate::domain::{check_dim, BoxDomain};
use crate::error::{Error, Result};

/// Full refactorizations happen at least this often to bound drift from the
/// incremental row extension.
pub const REFACTOR_PERIOD: usize = 50;

const JITTER_START: f64 = 1e-10;
const JITTER_MAX: f64 = 1e-4;

/// Evaluated points, their observations and the noise variance each
/// observation was made with.
#[derive(Debug, Clone, Default)]
pub struct Dataset {
    dim: usize,
    points: Vec<f64>,
    observations: Vec<f64>,
    noise_variances: Vec<f64>,
}

impl Dataset {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            ..Default::default()
        }
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.dim)
    }

    pub fn observations(&self) -> &[f64] {
        &self.observations
    }

    pub fn noise_variances(&self) -> &[f64] {
        &self.noise_variances
    }

    fn push(&mut self, x: &[f64], y: f64, noise: f64) {
        self.points.extend_from_slice(x);
        self.observations.push(y);
        self.noise_variances.push(noise);
    }
}

/// Posterior quantities at one point, keeping the whitened cross-covariance
/// `v = L^{-1} k(x)` so that covariances between queried points are cheap.
#[derive(Debug, Clone)]
pub struct PointPosterior {
    pub mean: f64,
    pub variance: f64,
    whitened: Vec<f64>,
}

impl PointPosterior {
    pub fn std(&self) -> f64 {
        self.variance.sqrt()
    }

    pub fn whitened(&self) -> &[f64] {
        &self.whitened
    }
}

#[derive(Debug, Clone)]
pub struct GpState {
    kernel: RbfKernel,
    noise: NoiseModel,
    domain: BoxDomain,
    data: Dataset,
    factor: TriangularFactor,
    /// `L^{-1} y`
    whitened_targets: Vec<f64>,
    jitter: f64,
    updates_since_refactor: usize,
    generation: u64,
}

impl GpState {
    /// Prior GP over `domain`.
    pub fn new(kernel: RbfKernel, noise: NoiseModel, domain: BoxDomain) -> Result<Self> {
        if !kernel.supports_dim(domain.dim()) {
            return Err(Error::invalid("kernel lengthscales do not match the domain dimension"));
        }
        noise.validate()?;
        let jitter = JITTER_START * kernel.outputscale();
        Ok(Self {
            data: Dataset::new(domain.dim()),
            kernel,
            noise,
            domain,
            factor: TriangularFactor::default(),
            whitened_targets: Vec::new(),
            jitter,
            updates_since_refactor: 0,
            generation: 0,
        })
    }

    /// Fit from scratch on a list of `(x, y)` pairs.
    pub fn fit<'a>(
        kernel: RbfKernel,
        noise: NoiseModel,
        domain: BoxDomain,
        data: impl IntoIterator<Item = (&'a [f64], f64)>,
    ) -> Result<Self> {
        let mut gp = Self::new(kernel, noise, domain)?;
        for (x, y) in data {
            gp.validate_observation(x, y)?;
            let nv = gp.noise.variance_at(x);
            gp.data.push(x, y, nv);
        }
        gp.refactor()?;
        Ok(gp)
    }

    pub fn kernel(&self) -> &RbfKernel {
        &self.kernel
    }

    pub fn noise_model(&self) -> &NoiseModel {
        &self.noise
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn dataset(&self) -> &Dataset {
        &self.data
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn factor(&self) -> &TriangularFactor {
        &self.factor
    }

    pub fn whitened_targets(&self) -> &[f64] {
        &self.whitened_targets
    }

    /// Incremented on every full refactorization; caches keyed on the factor
    /// must rebuild when it changes.
    pub fn generation(&self) -> u64 {
        self.generation
    }

    /// Observation-noise variance `sigma_nu^2(x)`.
    pub fn noise_variance(&self, x: &[f64]) -> f64 {
        self.noise.variance_at(x)
    }

    pub fn prior_variance(&self) -> f64 {
        self.kernel.diag()
    }

    /// Posterior query keeping the whitened covariance vector.
    pub fn query(&self, x: &[f64]) -> PointPosterior {
        assert_eq!(x.len(), self.dim(), "query dimension mismatch");
        let mut v: Vec<f64> = self.data.points().map(|p| self.kernel.eval(x, p)).collect();
        self.factor.forward_solve_in_place(&mut v);
        let mean = dot(&v, &self.whitened_targets);
        let variance = (self.kernel.diag() - dot(&v, &v)).max(0.0);
        PointPosterior {
            mean,
            variance,
            whitened: v,
        }
    }

    /// Posterior mean and variance at `x`.
    pub fn posterior(&self, x: &[f64]) -> (f64, f64) {
        let q = self.query(x);
        (q.mean, q.variance)
    }

    /// Posterior covariance between two queried points.
    pub fn covariance(&self, a: (&[f64], &PointPosterior), b: (&[f64], &PointPosterior)) -> f64 {
        self.kernel.eval(a.0, b.0) - dot(&a.1.whitened, &b.1.whitened)
    }

    /// Posterior correlation between `f(x)` and `f(z)`, zero when either
    /// posterior variance vanishes.
    pub fn cross_correlation(&self, x: &[f64], z: &[f64]) -> f64 {
        let qx = self.query(x);
        let qz = self.query(z);
        self.correlation((x, &qx), (z, &qz))
    }

    pub fn correlation(&self, a: (&[f64], &PointPosterior), b: (&[f64], &PointPosterior)) -> f64 {
        let denom = (a.1.variance * b.1.variance).sqrt();
        if denom <= 0.0 {
            return 0.0;
        }
        (self.covariance(a, b) / denom).clamp(-1.0, 1.0)
    }

    /// New state with `(x, y)` appended.
    pub fn condition(&self, x: &[f64], y: f64) -> Result<GpState> {
        self.validate_observation(x, y)?;
        let mut next = self.clone();
        let noise = self.noise.variance_at(x);
        next.data.push(x, y, noise);
        if next.updates_since_refactor + 1 >= REFACTOR_PERIOD {
            next.refactor()?;
            return Ok(next);
        }
        let cross: Vec<f64> = self.data.points().map(|p| self.kernel.eval(x, p)).collect();
        let diag = self.kernel.diag() + noise + self.jitter;
        if next.factor.push_row(&cross, diag) {
            let i = next.factor.len() - 1;
            let row = next.factor.row(i);
            let w = (y - dot(&row[..i], &self.whitened_targets)) / row[i];
            next.whitened_targets.push(w);
            next.updates_since_refactor += 1;
        } else {
            next.refactor()?;
        }
        Ok(next)
    }

    fn validate_observation(&self, x: &[f64], y: f64) -> Result<()> {
        check_dim(self.dim(), x)?;
        if !self.domain.contains(x) {
            return Err(Error::OutOfDomain(x.to_vec()));
        }
        if !y.is_finite() || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("observations and points must be finite"));
        }
        Ok(())
    }

    /// Full Cholesky refactorization of `K + diag(noise) + jitter I`, doubling
    /// the jitter on failure.
    fn refactor(&mut self) -> Result<()> {
        let n = self.data.len();
        let max_jitter = JITTER_MAX * self.kernel.outputscale();
        let mut jitter = self.jitter;
        loop {
            let data = &self.data;
            let kernel = &self.kernel;
            let factor = TriangularFactor::factor(n, |i, j| {
                let k = kernel.eval(data.point(i), data.point(j));
                if i == j {
                    k + data.noise_variances[i] + jitter
                } else {
                    k
                }
            });
            if let Some(factor) = factor {
                let mut w = self.data.observations.clone();
                factor.forward_solve_in_place(&mut w);
                self.factor = factor;
                self.whitened_targets = w;
                self.jitter = jitter;
                self.updates_since_refactor = 0;
                self.generation += 1;
                return Ok(());
            }
            if jitter >= max_jitter {
                return Err(Error::NumericalDegeneracy { jitter });
            }
            jitter = (jitter * 2.0).min(max_jitter);
        }
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
