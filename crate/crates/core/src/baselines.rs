//! Expander-based comparison methods on a discretised domain: Lipschitz
//! expanders under the kernel metric, posterior-optimistic expanders, and
//! plain uncertainty sampling over the safe set.

use serde::{Deserialize, Serialize};

use crate::domain::BoxDomain;
use crate::error::{Error, Result};
use crate::gp::{GpState, PosteriorCache};
use crate::safety::SafetyModel;

/// Uniform tensor grid over a box, flattened with the last axis fastest.
#[derive(Debug, Clone)]
pub struct GridDomain {
    domain: BoxDomain,
    counts: Vec<usize>,
    points: Vec<f64>,
}

impl GridDomain {
    pub fn new(domain: BoxDomain, points_per_dim: usize) -> Result<Self> {
        let d = domain.dim();
        Self::with_counts(domain, vec![points_per_dim; d])
    }

    pub fn with_counts(domain: BoxDomain, counts: Vec<usize>) -> Result<Self> {
        if counts.len() != domain.dim() || counts.iter().any(|&c| c < 2) {
            return Err(Error::invalid("grid needs at least two points per dimension"));
        }
        let total: usize = counts.iter().product();
        let d = domain.dim();
        let mut points = Vec::with_capacity(total * d);
        let mut idx = vec![0usize; d];
        for _ in 0..total {
            for (axis, &i) in idx.iter().enumerate() {
                points.push(Self::coord(&domain, &counts, axis, i));
            }
            for axis in (0..d).rev() {
                idx[axis] += 1;
                if idx[axis] < counts[axis] {
                    break;
                }
                idx[axis] = 0;
            }
        }
        Ok(Self {
            domain,
            counts,
            points,
        })
    }

    fn coord(domain: &BoxDomain, counts: &[usize], axis: usize, i: usize) -> f64 {
        if i + 1 == counts[axis] {
            domain.upper()[axis]
        } else {
            domain.lower()[axis] + domain.width(axis) * i as f64 / (counts[axis] - 1) as f64
        }
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.domain.width(axis) / (self.counts[axis] - 1) as f64
    }

    pub fn point(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.points[i * d..(i + 1) * d]
    }

    pub fn points_flat(&self) -> &[f64] {
        &self.points
    }

    pub fn axis_values(&self, axis: usize) -> Vec<f64> {
        (0..self.counts[axis])
            .map(|i| Self::coord(&self.domain, &self.counts, axis, i))
            .collect()
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for axis in (0..self.dim()).rev() {
            idx[axis] = flat % self.counts[axis];
            flat /= self.counts[axis];
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.counts)
            .fold(0, |acc, (&i, &c)| acc * c + i)
    }

    /// Index of the grid point closest to `x`.
    pub fn nearest_index(&self, x: &[f64]) -> usize {
        let idx: Vec<usize> = (0..self.dim())
            .map(|axis| {
                let t = (x[axis] - self.domain.lower()[axis]) / self.spacing(axis);
                (t.round().max(0.0) as usize).min(self.counts[axis] - 1)
            })
            .collect();
        self.flat_index(&idx)
    }

    /// Posterior cache over the grid points.
    pub fn posterior_cache(&self) -> PosteriorCache {
        PosteriorCache::new(self.dim(), self.points.clone())
    }
}

/// Lipschitz constant for expanders under the kernel metric
/// `d(x, x') = sqrt(k(x,x) + k(x',x') - 2 k(x,x'))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LipschitzConfig {
    pub lipschitz: f64,
}

impl LipschitzConfig {
    pub fn new(lipschitz: f64) -> Result<Self> {
        if !(lipschitz >= 0.0 && lipschitz.is_finite()) {
            return Err(Error::invalid("Lipschitz constant must be finite and non-negative"));
        }
        Ok(Self { lipschitz })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BaselineKind {
    StageOpt { lipschitz: f64 },
    Heuristic,
    Uncertainty,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineChoice {
    /// Index into the candidate point set.
    pub index: usize,
    pub x: Vec<f64>,
    /// Posterior standard deviation at `x`.
    pub score: f64,
    /// The expander set was empty and the choice fell back to the whole safe set.
    pub fallback: bool,
}

/// Safe-set membership and posterior statistics over a cached point set.
pub struct CandidateSet<'a> {
    cache: &'a PosteriorCache,
    grid: Option<&'a GridDomain>,
    safe: Vec<bool>,
    beta: f64,
    threshold: f64,
}

impl<'a> CandidateSet<'a> {
    /// `cache` must be synced with `gp`. When `grid` is given its points must
    /// be the cached points in the same order.
    pub fn new(
        cache: &'a PosteriorCache,
        grid: Option<&'a GridDomain>,
        safety: &SafetyModel,
        n: usize,
    ) -> Self {
        if let Some(g) = grid {
            debug_assert_eq!(g.len(), cache.len());
        }
        let safe = (0..cache.len())
            .map(|g| safety.is_safe_with(n, cache.point(g), cache.mean()[g], cache.std(g)))
            .collect();
        Self {
            cache,
            grid,
            safe,
            beta: safety.beta(n),
            threshold: safety.threshold(),
        }
    }

    pub fn safe_mask(&self) -> &[bool] {
        &self.safe
    }

    pub fn safe_indices(&self) -> Vec<usize> {
        (0..self.safe.len()).filter(|&g| self.safe[g]).collect()
    }

    fn has_unsafe(&self) -> bool {
        self.safe.iter().any(|s| !s)
    }

    /// Safe indices ordered by decreasing posterior std, ties by index.
    fn by_uncertainty(&self) -> Vec<usize> {
        let mut idx = self.safe_indices();
        let var = self.cache.variance();
        idx.sort_by(|&a, &b| var[b].total_cmp(&var[a]).then(a.cmp(&b)));
        idx
    }

    fn upper(&self, g: usize) -> f64 {
        self.cache.mean()[g] + self.beta * self.cache.std(g)
    }

    /// Smallest scaled squared distance from cached point `g` to an unsafe point.
    fn nearest_unsafe_sq(&self, gp: &GpState, g: usize) -> Option<f64> {
        let kernel = gp.kernel();
        let x = self.cache.point(g);
        match self.grid {
            Some(grid) => {
                let d = grid.dim();
                let center = grid.multi_index(g);
                let step: Vec<f64> = (0..d).map(|a| grid.spacing(a) / kernel.lengthscale(a)).collect();
                let min_step = step.iter().copied().fold(f64::INFINITY, f64::min);
                let max_r = *grid.counts().iter().max().unwrap();
                let mut best: Option<f64> = None;
                let mut idx = vec![0usize; d];
                for r in 1..=max_r {
                    let shell_floor = (r as f64 * min_step).powi(2);
                    if best.is_some_and(|b| b <= shell_floor) {
                        break;
                    }
                    let lo: Vec<i64> = center.iter().map(|&c| c as i64 - r as i64).collect();
                    let span = 2 * r + 1;
                    let total = span.pow(d as u32);
                    'cells: for k in 0..total {
                        let mut rem = k;
                        let mut on_shell = false;
                        for a in (0..d).rev() {
                            let off = (rem % span) as i64;
                            rem /= span;
                            let i = lo[a] + off;
                            if i < 0 || i >= grid.counts()[a] as i64 {
                                continue 'cells;
                            }
                            if off == 0 || off == 2 * r as i64 {
                                on_shell = true;
                            }
                            idx[a] = i as usize;
                        }
                        if !on_shell {
                            continue;
                        }
                        let h = grid.flat_index(&idx);
                        if !self.safe[h] {
                            let s = kernel.scaled_sq_dist(x, self.cache.point(h));
                            if best.is_none_or(|b| s < b) {
                                best = Some(s);
                            }
                        }
                    }
                }
                best
            }
            None => (0..self.cache.len())
                .filter(|&h| !self.safe[h])
                .map(|h| kernel.scaled_sq_dist(x, self.cache.point(h)))
                .min_by(f64::total_cmp),
        }
    }

    fn is_stageopt_expander(&self, gp: &GpState, g: usize, cfg: &LipschitzConfig) -> bool {
        let Some(sq) = self.nearest_unsafe_sq(gp, g) else {
            return false;
        };
        self.upper(g) - cfg.lipschitz * gp.kernel().metric_from_sq_dist(sq) >= self.threshold
    }

    fn is_heuristic_expander(&self, gp: &GpState, g: usize) -> bool {
        let cache = self.cache;
        let var_x = cache.variance()[g];
        if var_x <= 0.0 {
            return false;
        }
        let x = cache.point(g);
        let noise = gp.noise_variance(x);
        let a = var_x + noise;
        let rho_nu_sq = var_x / a;
        let sd_x = var_x.sqrt();
        let shift = self.beta * sd_x;
        let s = gp.prior_variance();
        let explained_x = (s - var_x).max(0.0).sqrt();
        let kernel = gp.kernel();
        for h in 0..cache.len() {
            if self.safe[h] {
                continue;
            }
            let var_h = cache.variance()[h];
            if var_h <= 0.0 {
                continue;
            }
            let sd_h = var_h.sqrt();
            let mean_h = cache.mean()[h];
            // |cov| <= k(h,x) + |v_h||v_x|
            let k = kernel.eval(x, cache.point(h));
            let bound = ((k + (s - var_h).max(0.0).sqrt() * explained_x) / (sd_h * sd_x)).min(1.0);
            let best_lcb =
                mean_h + self.beta * sd_h * (bound * rho_nu_sq - (1.0 - bound * bound * rho_nu_sq).sqrt());
            if best_lcb < self.threshold {
                continue;
            }
            let cov = cache.covariance(gp, h, g);
            let new_mean = mean_h + cov * shift / a;
            let new_var = (var_h - cov * cov / a).max(0.0);
            if new_mean - self.beta * new_var.sqrt() >= self.threshold {
                return true;
            }
        }
        false
    }

    pub fn stageopt_expanders(&self, gp: &GpState, cfg: &LipschitzConfig) -> Vec<usize> {
        if !self.has_unsafe() {
            return Vec::new();
        }
        self.safe_indices()
            .into_iter()
            .filter(|&g| self.is_stageopt_expander(gp, g, cfg))
            .collect()
    }

    pub fn heuristic_expanders(&self, gp: &GpState) -> Vec<usize> {
        self.safe_indices()
            .into_iter()
            .filter(|&g| self.is_heuristic_expander(gp, g))
            .collect()
    }

    /// Most uncertain candidate of `kind`, scanning safe points by decreasing
    /// std and stopping at the first expander.
    pub fn select(&self, gp: &GpState, kind: BaselineKind) -> Result<BaselineChoice> {
        let order = self.by_uncertainty();
        let Some(&most_uncertain) = order.first() else {
            return Err(Error::EmptySafeSet("no safe point in the candidate set".into()));
        };
        let found = match kind {
            BaselineKind::Uncertainty => Some(most_uncertain),
            BaselineKind::StageOpt { lipschitz } => {
                let cfg = LipschitzConfig::new(lipschitz)?;
                if self.has_unsafe() {
                    order.iter().copied().find(|&g| self.is_stageopt_expander(gp, g, &cfg))
                } else {
                    None
                }
            }
            BaselineKind::Heuristic => order.iter().copied().find(|&g| self.is_heuristic_expander(gp, g)),
        };
        let (index, fallback) = match found {
            Some(g) => (g, false),
            None => (most_uncertain, true),
        };
        Ok(BaselineChoice {
            index,
            x: self.cache.point(index).to_vec(),
            score: self.cache.std(index),
            fallback,
        })
    }
}

fn synced_cache(gp: &GpState, grid: &GridDomain) -> PosteriorCache {
    let mut cache = grid.posterior_cache();
    cache.sync(gp);
    cache
}

/// Safe grid points `x` with an unsafe grid point `x'` such that
/// `mu(x) + beta sigma(x) - L d(x, x') >= threshold`.
pub fn stageopt_expanders(
    gp: &GpState,
    safety: &SafetyModel,
    n: usize,
    grid: &GridDomain,
    cfg: &LipschitzConfig,
) -> Vec<usize> {
    let cache = synced_cache(gp, grid);
    CandidateSet::new(&cache, Some(grid), safety, n).stageopt_expanders(gp, cfg)
}

/// Safe grid points where an optimistic observation `mu + beta sigma` would
/// make some currently unsafe grid point safe.
pub fn heuristic_expanders(gp: &GpState, safety: &SafetyModel, n: usize, grid: &GridDomain) -> Vec<usize> {
    let cache = synced_cache(gp, grid);
    CandidateSet::new(&cache, Some(grid), safety, n).heuristic_expanders(gp)
}

pub fn select_next_baseline(
    kind: BaselineKind,
    gp: &GpState,
    safety: &SafetyModel,
    n: usize,
    grid: &GridDomain,
) -> Result<BaselineChoice> {
    let cache = synced_cache(gp, grid);
    CandidateSet::new(&cache, Some(grid), safety, n).select(gp, kind)
}
