use super::GpState;

/// Posterior mean and variance over a fixed point set, updated in `O(m n)`
/// per new observation by extending the whitened covariance columns.
///
/// The cache follows one sequence of conditioned states. When the state was
/// refactorized (or belongs to another sequence) it rebuilds from scratch.
#[derive(Debug, Clone)]
pub struct PosteriorCache {
    dim: usize,
    points: Vec<f64>,
    /// `columns[i][g] = (L^{-1} k(g))_i`
    columns: Vec<Vec<f64>>,
    mean: Vec<f64>,
    variance: Vec<f64>,
    generation: u64,
    prior_variance: f64,
}

impl PosteriorCache {
    /// `points` is a flat row-major list of `dim`-dimensional points.
    pub fn new(dim: usize, points: Vec<f64>) -> Self {
        assert!(dim > 0 && points.len() % dim == 0);
        let m = points.len() / dim;
        Self {
            dim,
            points,
            columns: Vec::new(),
            mean: vec![0.0; m],
            variance: vec![f64::NAN; m],
            generation: u64::MAX,
            prior_variance: f64::NAN,
        }
    }

    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, g: usize) -> &[f64] {
        &self.points[g * self.dim..(g + 1) * self.dim]
    }

    pub fn points_flat(&self) -> &[f64] {
        &self.points
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn variance(&self) -> &[f64] {
        &self.variance
    }

    pub fn std(&self, g: usize) -> f64 {
        self.variance[g].sqrt()
    }

    /// Whitened covariance entry `i` of cached point `g`.
    #[inline]
    pub fn whitened(&self, i: usize, g: usize) -> f64 {
        self.columns[i][g]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    /// Posterior covariance between cached points `a` and `b`.
    pub fn covariance(&self, gp: &GpState, a: usize, b: usize) -> f64 {
        let k = gp.kernel().eval(self.point(a), self.point(b));
        k - self.columns.iter().map(|c| c[a] * c[b]).sum::<f64>()
    }

    /// Bring the cache in line with `gp`.
    pub fn sync(&mut self, gp: &GpState) {
        assert_eq!(gp.dim(), self.dim);
        let n = gp.len();
        let stale = gp.generation() != self.generation
            || self.columns.len() > n
            || self.prior_variance != gp.prior_variance();
        if stale {
            self.columns.clear();
            self.prior_variance = gp.prior_variance();
            self.generation = gp.generation();
            self.variance.fill(self.prior_variance);
        }
        let factor = gp.factor();
        let data = gp.dataset();
        let kernel = gp.kernel();
        for i in self.columns.len()..n {
            let xi = data.point(i);
            let row = factor.row(i);
            let mut col: Vec<f64> = self
                .points
                .chunks_exact(self.dim)
                .map(|g| kernel.eval(xi, g))
                .collect();
            for (l, prev) in row[..i].iter().zip(&self.columns) {
                for (c, p) in col.iter_mut().zip(prev) {
                    *c -= l * p;
                }
            }
            let inv = 1.0 / row[i];
            for (c, var) in col.iter_mut().zip(self.variance.iter_mut()) {
                *c *= inv;
                *var -= *c * *c;
            }
            self.columns.push(col);
        }
        let w = gp.whitened_targets();
        self.mean.fill(0.0);
        for (col, wi) in self.columns.iter().zip(w) {
            for (m, c) in self.mean.iter_mut().zip(col) {
                *m += c * wi;
            }
        }
        for v in &mut self.variance {
            *v = v.max(0.0);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::BoxDomain;
    use crate::gp::{NoiseModel, RbfKernel};

    #[test]
    fn matches_direct_queries_across_refactorizations() {
        let mut gp = GpState::new(
            RbfKernel::isotropic(0.7, 3.0).unwrap(),
            NoiseModel::homoskedastic(0.05).unwrap(),
            BoxDomain::cube(2, -2.0, 2.0).unwrap(),
        )
        .unwrap();
        let grid: Vec<f64> = (0..11)
            .flat_map(|i| (0..11).flat_map(move |j| [-2.0 + 0.4 * i as f64, -2.0 + 0.4 * j as f64]))
            .collect();
        let mut cache = PosteriorCache::new(2, grid);
        for step in 0..60 {
            let t = step as f64 * 0.37;
            let x = [1.9 * t.sin(), 1.9 * (1.3 * t).cos()];
            gp = gp.condition(&x, t.cos()).unwrap();
            cache.sync(&gp);
            if step % 7 == 0 || step == 59 {
                for g in 0..cache.len() {
                    let (m, v) = gp.posterior(cache.point(g));
                    assert!((m - cache.mean()[g]).abs() < 1e-8);
                    assert!((v - cache.variance()[g]).abs() < 1e-8);
                }
            }
        }
    }
}
