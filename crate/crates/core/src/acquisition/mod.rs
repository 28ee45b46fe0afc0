//! Information-theoretic acquisition: pick the safe `x` whose observation is
//! most informative about the safety of some `z`.

mod info;
mod search;

pub use info::{
    b_function, b_inverse, entropy_approx, entropy_approx_ratio, entropy_exact,
    entropy_exact_ratio, expected_post_entropy, expected_post_entropy_stats, mi_upper_bound,
    mutual_info, mutual_info_from_ratio, mutual_info_rewritten, mutual_info_rewritten_stats,
    mutual_info_stats, rho_nu_sq, MiConstants, PairStatistics, PsiStatistics,
};
pub use search::{FullSpace, SearchSpace};
pub(crate) use search::{projected_ascent, AscentSettings};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::domain::BoxDomain;
use crate::error::{Error, Result};
use crate::gp::{GpState, PointPosterior};
use crate::safety::SafetyModel;

/// Settings for the multi-start search over `(x, z)` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub restarts: usize,
    /// Starting `z` candidates scored per restart.
    pub z_candidates: usize,
    pub max_iterations: usize,
    /// Budget of uniform draws used to find safe `x` starts.
    pub rejection_cap: usize,
    /// Finite-difference step relative to the domain width.
    pub fd_step: f64,
    pub max_halvings: usize,
    /// Initial ascent step as a fraction of the domain width.
    pub initial_step: f64,
    pub tolerance: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 20,
            z_candidates: 8,
            max_iterations: 50,
            rejection_cap: 500,
            fd_step: 1e-6,
            max_halvings: 20,
            initial_step: 0.05,
            tolerance: 1e-9,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.z_candidates == 0 || self.max_iterations == 0 {
            return Err(Error::invalid("optimizer counts must be positive"));
        }
        if !(self.fd_step > 0.0 && self.initial_step > 0.0) {
            return Err(Error::invalid("optimizer step sizes must be positive"));
        }
        Ok(())
    }

    fn ascent(&self) -> AscentSettings {
        AscentSettings {
            max_iterations: self.max_iterations,
            max_halvings: self.max_halvings,
            fd_step: self.fd_step,
            initial_step: self.initial_step,
            tolerance: self.tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChoiceDiagnostics {
    /// `ln 2 sigma_n^2(x) / sigma_nu^2(x)`
    pub upper_bound: f64,
    /// Surrogate entropy at `z`.
    pub entropy_at_z: f64,
    pub correlation: f64,
    pub rho_nu_sq: f64,
    /// No restart produced a safe start and the seed was used.
    pub degenerate_search: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AcquisitionChoice {
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    pub value: f64,
    pub restarts_used: usize,
    pub diagnostics: ChoiceDiagnostics,
}

impl AcquisitionChoice {
    fn build(gp: &GpState, x: Vec<f64>, z: Vec<f64>, restarts_used: usize, degenerate: bool) -> Self {
        let stats = PairStatistics::compute(gp, &x, &z);
        let value = mutual_info_stats(&stats);
        let entropy_at_z = stats
            .ratio_sq()
            .map(|r| entropy_approx_ratio(r.sqrt()))
            .unwrap_or(0.0);
        let diagnostics = ChoiceDiagnostics {
            upper_bound: std::f64::consts::LN_2 * stats.var_x / stats.noise_x,
            entropy_at_z,
            correlation: stats.rho,
            rho_nu_sq: stats.rho_nu_sq(),
            degenerate_search: degenerate,
        };
        Self {
            x,
            z,
            value,
            restarts_used,
            diagnostics,
        }
    }
}

/// Maximise the mutual information jointly over safe `x` and any `z` in
/// `domain`.
pub fn select_next<R: Rng + ?Sized>(
    gp: &GpState,
    safety: &SafetyModel,
    n: usize,
    domain: &BoxDomain,
    config: &OptimizerConfig,
    rng: &mut R,
) -> Result<AcquisitionChoice> {
    select_next_in(&FullSpace::new(domain), gp, safety, n, config, rng)
}

/// [`select_next`] restricted to a parameterised subset of the domain; `x` and
/// `z` both range over `space`.
pub fn select_next_in<S: SearchSpace, R: Rng + ?Sized>(
    space: &S,
    gp: &GpState,
    safety: &SafetyModel,
    n: usize,
    config: &OptimizerConfig,
    rng: &mut R,
) -> Result<AcquisitionChoice> {
    config.validate()?;
    let pbox = space.parameter_box().clone();
    let p = pbox.dim();
    let mut pt = Vec::with_capacity(gp.dim());
    let mut is_safe = |u: &[f64], pt: &mut Vec<f64>| {
        space.point(u, pt);
        safety.is_safe(gp, n, pt)
    };

    let starts = safe_starts(space, gp, safety, config, rng, &mut is_safe, &mut pt);
    let jitter = 0.5 * gp.kernel().min_lengthscale();

    if starts.is_empty() {
        let seed_param = space
            .parameter_of(safety.seed())
            .ok_or_else(|| Error::EmptySafeSet("no safe start in the search space".into()))?;
        let mut eval = PairEvaluator::new(gp, space);
        let mut zstart = seed_param.clone();
        let mut best = eval.value(&seed_param, &zstart);
        for _ in 1..config.z_candidates {
            let cand = pbox.sample_uniform(rng);
            let v = eval.value(&seed_param, &cand);
            if v > best {
                best = v;
                zstart = cand;
            }
        }
        let (zbest, _) = projected_ascent(
            zstart,
            &pbox,
            0,
            config.ascent(),
            |v| eval.value(&seed_param, v),
            |_| true,
        );
        let mut z = Vec::new();
        space.point(&zbest, &mut z);
        return Ok(AcquisitionChoice::build(gp, safety.seed().to_vec(), z, 0, true));
    }

    let mut joint_lower = pbox.lower().to_vec();
    joint_lower.extend_from_slice(pbox.lower());
    let mut joint_upper = pbox.upper().to_vec();
    joint_upper.extend_from_slice(pbox.upper());
    let joint = BoxDomain::new(joint_lower, joint_upper)?;

    let mut eval = PairEvaluator::new(gp, space);
    let mut best: Option<(Vec<f64>, f64)> = None;
    for xstart in &starts {
        // pick the most promising z near or away from the x start
        let mut zbest = xstart.clone();
        let mut vbest = eval.value(xstart, &zbest);
        for k in 1..config.z_candidates {
            let cand: Vec<f64> = if k % 2 == 1 {
                let mut c: Vec<f64> = xstart
                    .iter()
                    .map(|u| u + jitter * rng.sample::<f64, _>(StandardNormal))
                    .collect();
                pbox.clamp_in_place(&mut c);
                c
            } else {
                pbox.sample_uniform(rng)
            };
            let v = eval.value(xstart, &cand);
            if v > vbest {
                vbest = v;
                zbest = cand;
            }
        }
        let mut start = xstart.clone();
        start.extend_from_slice(&zbest);
        let (sol, value) = projected_ascent(
            start,
            &joint,
            p,
            config.ascent(),
            |w| eval.value(&w[..p], &w[p..]),
            |u| is_safe(u, &mut pt),
        );
        if best.as_ref().is_none_or(|(_, b)| value > *b) {
            best = Some((sol, value));
        }
    }
    let (sol, _) = best.expect("at least one restart");
    let mut x = Vec::new();
    let mut z = Vec::new();
    space.point(&sol[..p], &mut x);
    space.point(&sol[p..], &mut z);
    Ok(AcquisitionChoice::build(gp, x, z, starts.len(), false))
}

/// Safe starting parameters: uniform rejection sampling first, then jittered
/// copies of evaluated safe points (and the seed).
fn safe_starts<S: SearchSpace, R: Rng + ?Sized>(
    space: &S,
    gp: &GpState,
    safety: &SafetyModel,
    config: &OptimizerConfig,
    rng: &mut R,
    is_safe: &mut impl FnMut(&[f64], &mut Vec<f64>) -> bool,
    pt: &mut Vec<f64>,
) -> Vec<Vec<f64>> {
    let pbox = space.parameter_box();
    let mut starts = Vec::with_capacity(config.restarts);
    for _ in 0..config.rejection_cap {
        if starts.len() == config.restarts {
            return starts;
        }
        let u = pbox.sample_uniform(rng);
        if is_safe(&u, pt) {
            starts.push(u);
        }
    }

    let mut anchors: Vec<Vec<f64>> = gp
        .dataset()
        .points()
        .chain(std::iter::once(safety.seed()))
        .filter_map(|x| space.parameter_of(x))
        .filter(|u| is_safe(u, pt))
        .collect();
    anchors.dedup();
    if anchors.is_empty() {
        return starts;
    }
    let scale = 0.5 * gp.kernel().min_lengthscale();
    while starts.len() < config.restarts {
        let anchor = &anchors[rng.random_range(0..anchors.len())];
        let mut chosen = anchor.clone();
        for _ in 0..5 {
            let mut c: Vec<f64> = anchor
                .iter()
                .map(|u| u + scale * rng.sample::<f64, _>(StandardNormal))
                .collect();
            pbox.clamp_in_place(&mut c);
            if is_safe(&c, pt) {
                chosen = c;
                break;
            }
        }
        starts.push(chosen);
    }
    starts
}

/// Mutual-information evaluator that reuses the posterior query of whichever
/// side of the pair did not change since the last call.
struct PairEvaluator<'a, S> {
    gp: &'a GpState,
    space: &'a S,
    x: CachedQuery,
    z: CachedQuery,
}

#[derive(Default)]
struct CachedQuery {
    param: Vec<f64>,
    point: Vec<f64>,
    query: Option<PointPosterior>,
}

impl CachedQuery {
    fn get<S: SearchSpace>(&mut self, gp: &GpState, space: &S, u: &[f64]) {
        if self.query.is_none() || self.param != u {
            self.param.clear();
            self.param.extend_from_slice(u);
            space.point(u, &mut self.point);
            self.query = Some(gp.query(&self.point));
        }
    }
}

impl<'a, S: SearchSpace> PairEvaluator<'a, S> {
    fn new(gp: &'a GpState, space: &'a S) -> Self {
        Self {
            gp,
            space,
            x: CachedQuery::default(),
            z: CachedQuery::default(),
        }
    }

    fn value(&mut self, u: &[f64], v: &[f64]) -> f64 {
        self.x.get(self.gp, self.space, u);
        self.z.get(self.gp, self.space, v);
        let stats = PairStatistics::from_queries(
            self.gp,
            &self.x.point,
            self.x.query.as_ref().unwrap(),
            &self.z.point,
            self.z.query.as_ref().unwrap(),
        );
        mutual_info_stats(&stats)
    }
}
