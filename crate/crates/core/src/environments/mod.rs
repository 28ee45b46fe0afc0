//! Constraint oracles with hidden ground truth.
//!
//! An [`Environment`] splits into an [`Oracle`], which only answers noisy
//! evaluations and is what an explorer gets to see, and a [`Truth`] handle
//! used for metrics.

mod analytic;
mod control;
mod gp_sample;

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::acquisition::AscentSettings;
use crate::domain::BoxDomain;
use crate::error::{Error, Result};
use crate::gp::{NoiseModel, RbfKernel};

pub use analytic::{BumpKind, BumpParams, Exponential, ExponentialParams, SumOfBumps};
pub use control::{
    CartPole, CartPoleParams, ControllerEpisode, Pendulum, PendulumParams, CARTPOLE_REFERENCE_SEED,
};
pub use gp_sample::{GpSample, GpSampleParams};

/// A noiseless constraint; safe means `value(x) >= 0`.
pub trait Constraint: Send + Sync {
    fn value(&self, x: &[f64]) -> Result<f64>;

    /// Points worth starting a search for the maximum from.
    fn landmarks(&self) -> Vec<Vec<f64>> {
        Vec::new()
    }
}

/// Noisy evaluation channel.
pub struct Oracle {
    domain: BoxDomain,
    seed: Vec<f64>,
    noise: NoiseModel,
    constraint: Arc<dyn Constraint>,
    rng: ChaCha8Rng,
}

impl Oracle {
    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn seed(&self) -> &[f64] {
        &self.seed
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    /// `f(x)` plus Gaussian noise with the variance of the noise model at `x`.
    pub fn evaluate(&mut self, x: &[f64]) -> Result<f64> {
        if !self.domain.contains(x) {
            return Err(Error::OutOfDomain(x.to_vec()));
        }
        let f = self.constraint.value(x)?;
        let eps: f64 = self.rng.sample(StandardNormal);
        Ok(f + self.noise.variance_at(x).sqrt() * eps)
    }
}

/// Metrics-only access to the noiseless constraint.
#[derive(Clone)]
pub struct Truth {
    domain: BoxDomain,
    constraint: Arc<dyn Constraint>,
}

impl Truth {
    pub fn value(&self, x: &[f64]) -> Result<f64> {
        self.constraint.value(x)
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    /// Maximum of `f` over truly safe points: Monte Carlo screening plus the
    /// constraint's landmarks, each refined by local ascent.
    pub fn safe_optimum(&self, samples: usize, seed: u64) -> Result<(Vec<f64>, f64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut starts = self.constraint.landmarks();
        let mut scored: Vec<(f64, Vec<f64>)> = Vec::new();
        for _ in 0..samples {
            let x = self.domain.sample_uniform(&mut rng);
            if let Ok(v) = self.value(&x) {
                if v >= 0.0 {
                    scored.push((v, x));
                }
            }
        }
        scored.sort_by(|a, b| b.0.total_cmp(&a.0));
        starts.extend(scored.into_iter().take(8).map(|(_, x)| x));

        let settings = AscentSettings {
            max_iterations: 200,
            max_halvings: 30,
            fd_step: 1e-7,
            initial_step: 0.01,
            tolerance: 1e-13,
        };
        let floor = -f64::MAX;
        let mut best: Option<(Vec<f64>, f64)> = None;
        for mut s in starts {
            self.domain.clamp_in_place(&mut s);
            match self.value(&s) {
                Ok(v) if v >= 0.0 => {}
                _ => continue,
            }
            let (x, v) = crate::acquisition::projected_ascent(
                s,
                &self.domain,
                0,
                settings,
                |x| self.value(x).unwrap_or(floor),
                |_| true,
            );
            if best.as_ref().is_none_or(|(_, b)| v > *b) {
                best = Some((x, v));
            }
        }
        best.ok_or_else(|| Error::Environment("no truly safe point found".into()))
    }
}

/// A constraint oracle together with its metrics channel.
pub struct Environment {
    name: String,
    oracle: Oracle,
    truth: Truth,
}

impl Environment {
    pub fn new(
        name: impl Into<String>,
        domain: BoxDomain,
        seed: Vec<f64>,
        noise: NoiseModel,
        constraint: Arc<dyn Constraint>,
        rng_seed: u64,
    ) -> Result<Self> {
        if seed.len() != domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: domain.dim(),
                got: seed.len(),
            });
        }
        if !domain.contains(&seed) {
            return Err(Error::OutOfDomain(seed));
        }
        noise.validate()?;
        let f0 = constraint.value(&seed)?;
        if !(f0 > 0.0) {
            return Err(Error::Environment(format!("seed is not strictly safe: f(x0) = {f0}")));
        }
        Ok(Self {
            name: name.into(),
            oracle: Oracle {
                domain: domain.clone(),
                seed,
                noise,
                constraint: constraint.clone(),
                rng: ChaCha8Rng::seed_from_u64(rng_seed),
            },
            truth: Truth { domain, constraint },
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.oracle.domain
    }

    pub fn seed(&self) -> &[f64] {
        &self.oracle.seed
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.oracle.noise
    }

    pub fn evaluate(&mut self, x: &[f64]) -> Result<f64> {
        self.oracle.evaluate(x)
    }

    pub fn truth(&self) -> &Truth {
        &self.truth
    }

    pub fn split(self) -> (Oracle, Truth) {
        (self.oracle, self.truth)
    }
}

/// Environment description as found in experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnvironmentSpec {
    GpSample(GpSampleParams),
    Exponential(ExponentialParams),
    Bump(BumpParams),
    Pendulum(PendulumParams),
    CartPole(CartPoleParams),
}

impl EnvironmentSpec {
    /// Instantiate with `rng_seed` driving both the random construction (GP
    /// samples) and the observation noise.
    pub fn build(&self, rng_seed: u64) -> Result<Environment> {
        // separate streams for construction and noise
        let mut build_rng = ChaCha8Rng::seed_from_u64(rng_seed);
        build_rng.set_stream(1);
        let noise_seed = rng_seed;
        match self {
            EnvironmentSpec::GpSample(p) => {
                let c = GpSample::draw(p, &mut build_rng)?;
                Environment::new(
                    "gp_sample",
                    p.domain()?,
                    p.seed_point(),
                    NoiseModel::homoskedastic(p.noise)?,
                    Arc::new(c),
                    noise_seed,
                )
            }
            EnvironmentSpec::Exponential(p) => Environment::new(
                "exponential",
                p.domain()?,
                vec![p.seed],
                NoiseModel::homoskedastic(p.noise)?,
                Arc::new(Exponential::new(p.offset)),
                noise_seed,
            ),
            EnvironmentSpec::Bump(p) => Environment::new(
                p.function.name(),
                p.domain()?,
                p.seed_point(),
                p.noise_model()?,
                Arc::new(SumOfBumps::new(p)?),
                noise_seed,
            ),
            EnvironmentSpec::Pendulum(p) => Environment::new(
                "pendulum",
                p.domain()?,
                p.seed.to_vec(),
                NoiseModel::homoskedastic(p.noise)?,
                Arc::new(Pendulum::new(p.clone())),
                noise_seed,
            ),
            EnvironmentSpec::CartPole(p) => Environment::new(
                "cart_pole",
                p.domain()?,
                p.seed.to_vec(),
                NoiseModel::homoskedastic(p.noise)?,
                Arc::new(CartPole::new(p.clone())),
                noise_seed,
            ),
        }
    }

    /// GP prior matching the environment.
    pub fn default_kernel(&self) -> Result<RbfKernel> {
        match self {
            EnvironmentSpec::GpSample(p) => RbfKernel::isotropic(p.lengthscale, p.outputscale),
            EnvironmentSpec::Exponential(_) => RbfKernel::isotropic(1.2, 100.0),
            EnvironmentSpec::Bump(_) => RbfKernel::isotropic(1.6, 1.0),
            EnvironmentSpec::Pendulum(_) => RbfKernel::isotropic(1.3, 6.6),
            EnvironmentSpec::CartPole(_) => RbfKernel::isotropic(0.8, 5.0),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            EnvironmentSpec::GpSample(p) => p.dim,
            EnvironmentSpec::Exponential(_) => 1,
            EnvironmentSpec::Bump(p) => p.dim,
            EnvironmentSpec::Pendulum(_) => 2,
            EnvironmentSpec::CartPole(_) => 3,
        }
    }
}
