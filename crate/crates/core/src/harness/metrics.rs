use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::acquisition::{projected_ascent, AscentSettings};
use crate::baselines::GridDomain;
use crate::domain::BoxDomain;
use crate::environments::Truth;
use crate::error::Result;
use crate::gp::{GpState, PosteriorCache};
use crate::safety::SafetyModel;

/// Fixed point set against which safe-set coverage is measured, with the
/// true safety of each point.
#[derive(Debug, Clone)]
pub struct CoverageReference {
    cache: PosteriorCache,
    truly_safe: Vec<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coverage {
    /// Percentage of reference points classified safe.
    pub safe_pct: f64,
    /// Percentage of truly safe reference points classified safe.
    pub true_safe_pct: f64,
}

impl CoverageReference {
    /// Points where the truth cannot be evaluated count as unsafe.
    pub fn from_points(dim: usize, points: Vec<f64>, truth: &Truth) -> Self {
        let truly_safe = points
            .chunks_exact(dim)
            .map(|x| truth.value(x).is_ok_and(|v| v >= 0.0))
            .collect();
        Self {
            cache: PosteriorCache::new(dim, points),
            truly_safe,
        }
    }

    pub fn grid(domain: &BoxDomain, per_dim: usize, truth: &Truth) -> Result<Self> {
        let grid = GridDomain::new(domain.clone(), per_dim)?;
        Ok(Self::from_points(domain.dim(), grid.points_flat().to_vec(), truth))
    }

    pub fn monte_carlo(domain: &BoxDomain, samples: usize, seed: u64, truth: &Truth) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points = (0..samples).flat_map(|_| domain.sample_uniform(&mut rng)).collect();
        Self::from_points(domain.dim(), points, truth)
    }

    pub fn len(&self) -> usize {
        self.cache.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cache.is_empty()
    }

    pub fn truly_safe(&self) -> &[bool] {
        &self.truly_safe
    }

    pub fn truly_safe_fraction(&self) -> f64 {
        self.truly_safe.iter().filter(|&&s| s).count() as f64 / self.len() as f64
    }

    pub fn cache(&self) -> &PosteriorCache {
        &self.cache
    }

    pub fn sync(&mut self, gp: &GpState) {
        self.cache.sync(gp);
    }

    /// Classification of every reference point under the synced posterior.
    pub fn classified_safe(&self, safety: &SafetyModel, n: usize) -> Vec<bool> {
        (0..self.len())
            .map(|g| safety.is_safe_with(n, self.cache.point(g), self.cache.mean()[g], self.cache.std(g)))
            .collect()
    }

    pub fn measure(&self, safety: &SafetyModel, n: usize) -> Coverage {
        let safe = self.classified_safe(safety, n);
        let classified = safe.iter().filter(|&&s| s).count();
        let truly = self.truly_safe.iter().filter(|&&s| s).count();
        let both = safe.iter().zip(&self.truly_safe).filter(|(a, b)| **a && **b).count();
        Coverage {
            safe_pct: 100.0 * classified as f64 / self.len() as f64,
            true_safe_pct: if truly == 0 {
                0.0
            } else {
                100.0 * both as f64 / truly as f64
            },
        }
    }
}

/// Coverage of `reference` under `gp`.
pub fn coverage(gp: &GpState, safety: &SafetyModel, n: usize, reference: &mut CoverageReference) -> Coverage {
    reference.sync(gp);
    reference.measure(safety, n)
}

/// Information gained by observing at `x`: `1/2 ln(1 + sigma_n^2(x) / sigma_nu^2(x))`.
pub fn information_gain(gp: &GpState, x: &[f64]) -> f64 {
    let (_, var) = gp.posterior(x);
    0.5 * (var.max(0.0) / gp.noise_variance(x)).ln_1p()
}

/// Simple regret of the upper-confidence-bound maximiser over the current
/// safe set. `reference` must be synced with `gp`.
pub fn regret_probe(
    gp: &GpState,
    safety: &SafetyModel,
    n: usize,
    truth: &Truth,
    f_star: f64,
    reference: &CoverageReference,
) -> Result<f64> {
    let beta = safety.beta(n);
    let ucb = |x: &[f64]| {
        let (m, v) = gp.posterior(x);
        m + beta * v.max(0.0).sqrt()
    };
    let cache = reference.cache();
    let mut candidates: Vec<(f64, Vec<f64>)> = reference
        .classified_safe(safety, n)
        .iter()
        .enumerate()
        .filter(|(_, &s)| s)
        .map(|(g, _)| (cache.mean()[g] + beta * cache.std(g), cache.point(g).to_vec()))
        .collect();
    candidates.extend(
        gp.dataset()
            .points()
            .chain(std::iter::once(safety.seed()))
            .filter(|x| safety.is_safe(gp, n, x))
            .map(|x| (ucb(x), x.to_vec())),
    );
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0));
    candidates.truncate(4);

    let domain = gp.domain();
    let settings = AscentSettings {
        max_iterations: 100,
        max_halvings: 20,
        fd_step: 1e-6,
        initial_step: 0.02,
        tolerance: 1e-10,
    };
    let mut best = (f64::NEG_INFINITY, safety.seed().to_vec());
    for (_, start) in candidates {
        let (x, v) = projected_ascent(start, domain, domain.dim(), settings, ucb, |x| {
            safety.is_safe(gp, n, x)
        });
        if v > best.0 {
            best = (v, x);
        }
    }
    Ok(f_star - truth.value(&best.1)?)
}
