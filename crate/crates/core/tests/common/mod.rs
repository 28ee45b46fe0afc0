//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use std::f64::consts::{LN_2, PI};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use safe_explore::{BoxDomain, GpState, NoiseModel, RbfKernel};

/// Largest `|exact - approx|` entropy gap for `mu/sigma` in [-6, 6], from a
/// 40-digit scan with step 1e-4 (attained near 2.0469).
pub const ENTROPY_GAP_MAX: f64 = 0.001_872_806_391_702_632;

/// Binary entropy (nats) of `Phi(-1)`, 40-digit evaluation.
pub const ENTROPY_AT_ONE: f64 = 0.437_433_240_927_119_11;

/// `ln 2 (1 - sqrt(0.05 / (2 c1 + 0.05)))`, 40-digit evaluation.
pub const MI_SELF_UNIT_PRIOR: f64 = 0.535_650_187_135_489_58;

pub fn c1() -> f64 {
    1.0 / (PI * LN_2)
}

/// Nodes and weights of `int exp(-t^2) g(t) dt` via the eigen-decomposition
/// of the Jacobi matrix.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut j = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        let b = (i as f64 / 2.0).sqrt();
        j[(i, i - 1)] = b;
        j[(i - 1, i)] = b;
    }
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let v0 = eig.eigenvectors[(0, k)];
            (eig.eigenvalues[k], PI.sqrt() * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// `E_y[ H_approx(z | y) ]` under the one-step update, by quadrature over
/// `y ~ N(mu_x, var_x + noise)`. The nodes are scaled to the narrower of the
/// predictive density and the entropy factor and centred on their product,
/// so that strongly correlated pairs stay resolved.
pub fn quadrature_post_entropy(
    nodes: &(Vec<f64>, Vec<f64>),
    mean_x: f64,
    var_x: f64,
    noise: f64,
    mean_z: f64,
    var_z: f64,
    cov: f64,
) -> f64 {
    let sy2 = var_x + noise;
    let gain = cov / sy2;
    let post_var = var_z - cov * cov / sy2;
    // entropy factor as a Gaussian in y: centre and variance
    let (mut centre, mut scale2) = (mean_x, sy2);
    if gain != 0.0 {
        let peak = mean_x - mean_z / gain;
        let width2 = post_var / (2.0 * c1() * gain * gain);
        centre = (mean_x * width2 + peak * sy2) / (sy2 + width2);
        scale2 = sy2.min(width2);
    }
    let density = |y: f64| (-(y - mean_x).powi(2) / (2.0 * sy2)).exp() / (2.0 * PI * sy2).sqrt();
    let mut acc = 0.0;
    for (t, w) in nodes.0.iter().zip(&nodes.1) {
        let y = centre + (2.0 * scale2).sqrt() * t;
        let m = mean_z + gain * (y - mean_x);
        let h = (t * t).exp() * (2.0 * scale2).sqrt() * density(y);
        acc += w * h * LN_2 * (-c1() * m * m / post_var).exp();
    }
    acc
}

/// Posterior of `(f(x), f(z))` by an explicit dense solve.
pub struct DenseJoint {
    pub mean: [f64; 2],
    pub cov: [[f64; 2]; 2],
}

pub fn dense_joint(gp: &GpState, x: &[f64], z: &[f64]) -> DenseJoint {
    let k = gp.kernel();
    let pts: Vec<Vec<f64>> = gp.dataset().points().map(|p| p.to_vec()).collect();
    let n = pts.len();
    let q = [x, z];
    if n == 0 {
        return DenseJoint {
            mean: [0.0; 2],
            cov: [
                [k.eval(x, x), k.eval(x, z)],
                [k.eval(z, x), k.eval(z, z)],
            ],
        };
    }
    let nv = gp.dataset().noise_variances();
    let gram = DMatrix::from_fn(n, n, |i, j| {
        k.eval(&pts[i], &pts[j]) + if i == j { nv[i] + gp.jitter() } else { 0.0 }
    });
    let ys = DVector::from_column_slice(gp.dataset().observations());
    let kq = DMatrix::from_fn(n, 2, |i, j| k.eval(&pts[i], q[j]));
    let lu = gram.lu();
    let alpha = lu.solve(&ys).unwrap();
    let v = lu.solve(&kq).unwrap();
    let mut out = DenseJoint {
        mean: [0.0; 2],
        cov: [[0.0; 2]; 2],
    };
    for a in 0..2 {
        out.mean[a] = kq.column(a).dot(&alpha);
        for b in 0..2 {
            out.cov[a][b] = k.eval(q[a], q[b]) - kq.column(a).dot(&v.column(b));
        }
    }
    out
}

/// Small random GP with up to `max_points` observations on `[-2, 2]^dim`.
pub fn random_gp<R: Rng>(rng: &mut R, dim: usize, max_points: usize) -> GpState {
    let domain = BoxDomain::cube(dim, -2.0, 2.0).unwrap();
    let lengthscale = rng.random_range(0.3..1.5);
    let outputscale = rng.random_range(0.5..3.0);
    let noise = rng.random_range(0.01..0.5) * outputscale;
    let kernel = RbfKernel::isotropic(lengthscale, outputscale).unwrap();
    let noise = NoiseModel::homoskedastic(noise).unwrap();
    let n = rng.random_range(0..=max_points);
    let data: Vec<(Vec<f64>, f64)> = (0..n)
        .map(|_| {
            let x = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
            (x, rng.random_range(-2.0..3.0))
        })
        .collect();
    GpState::fit(kernel, noise, domain, data.iter().map(|(x, y)| (x.as_slice(), *y))).unwrap()
}

pub fn random_point<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect()
}

/// Exhaustive joint-grid maximum of the mutual information over safe `x`.
pub fn grid_joint_max(
    gp: &GpState,
    safety: &safe_explore::SafetyModel,
    n: usize,
    per_dim: usize,
) -> f64 {
    let dom = gp.domain();
    let dim = dom.dim();
    let total = per_dim.pow(dim as u32);
    let pt = |mut i: usize| -> Vec<f64> {
        let mut p = vec![0.0; dim];
        for a in (0..dim).rev() {
            let k = i % per_dim;
            i /= per_dim;
            p[a] = dom.lower()[a] + dom.width(a) * k as f64 / (per_dim - 1) as f64;
        }
        p
    };
    let grid: Vec<Vec<f64>> = (0..total).map(pt).collect();
    let mut best = 0.0f64;
    for x in grid.iter().filter(|x| safety.is_safe(gp, n, x)) {
        for z in &grid {
            best = best.max(safe_explore::acquisition::mutual_info(gp, x, z));
        }
    }
    let seed = safety.seed();
    for z in &grid {
        best = best.max(safe_explore::acquisition::mutual_info(gp, seed, z));
    }
    best
}
