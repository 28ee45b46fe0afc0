use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{ExperimentConfig, MethodSpec};
use super::metrics::{information_gain, regret_probe, CoverageReference};
use crate::acquisition::select_next;
use crate::baselines::{CandidateSet, GridDomain};
use crate::environments::{Oracle, Truth};
use crate::error::{Error, Result};
use crate::gp::GpState;
use crate::safety::SafetyModel;
use crate::subspace::{sample_lines, select_next_on_lines, LineMethod};

/// One evaluation of a campaign.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRow {
    /// Number of evaluations including this one.
    pub n: usize,
    pub x: Vec<f64>,
    pub y: f64,
    pub f_true: f64,
    pub violated: bool,
    /// Mutual information for ISE, posterior std for baselines.
    pub score: f64,
    pub coverage_pct: f64,
    pub true_safe_coverage_pct: f64,
    pub info_gain_sum: f64,
    pub regret: Option<f64>,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub run_id: String,
    pub method: MethodSpec,
    pub rows: Vec<RunRow>,
    /// Iterations where the selection fell back from an empty candidate set.
    pub fallbacks: usize,
    /// Set when the run stopped early.
    pub error: Option<String>,
    /// The abort was numerical rather than a usage error.
    pub numerical_abort: bool,
}

impl RunRecord {
    pub fn is_complete(&self) -> bool {
        self.error.is_none()
    }

    pub fn violations(&self) -> usize {
        self.rows.iter().filter(|r| r.violated).count()
    }

    /// Violations as a percentage of the evaluations made.
    pub fn violation_pct(&self) -> f64 {
        if self.rows.is_empty() {
            0.0
        } else {
            100.0 * self.violations() as f64 / self.rows.len() as f64
        }
    }

    pub fn final_row(&self) -> Option<&RunRow> {
        self.rows.last()
    }
}

/// Seeds for replication `rep` of a campaign with base seed `seed`. The
/// environment seed does not depend on the method, so a sweep compares
/// methods on identical environments and noise streams.
pub fn replication_seeds(seed: u64, rep: usize) -> (u64, u64) {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(rep as u64 + 1);
    (r.next_u64(), r.next_u64())
}

pub fn run_id(method: &MethodSpec, seed: u64, rep: usize) -> String {
    format!("{}/seed{seed}/rep{rep}", method.label())
}

/// Run replication `rep` of `method` under `cfg` with base seed `seed`.
pub fn run_campaign(cfg: &ExperimentConfig, method: MethodSpec, seed: u64, rep: usize) -> Result<RunRecord> {
    cfg.validate()?;
    let (env_seed, select_seed) = replication_seeds(seed, rep);
    let env = cfg.environment.build(env_seed)?;
    let (oracle, truth) = env.split();
    let mut record = RunRecord {
        run_id: run_id(&method, seed, rep),
        method,
        rows: Vec::with_capacity(cfg.iterations),
        fallbacks: 0,
        error: None,
        numerical_abort: false,
    };
    let mut campaign = Campaign::new(cfg, method, oracle, truth, env_seed, select_seed)?;
    for _ in 0..cfg.iterations {
        match campaign.step() {
            Ok(row) => record.rows.push(row),
            Err(e) => {
                record.numerical_abort = e.is_numerical();
                record.error = Some(e.to_string());
                break;
            }
        }
    }
    record.fallbacks = campaign.fallbacks;
    Ok(record)
}

struct Campaign<'a> {
    cfg: &'a ExperimentConfig,
    method: MethodSpec,
    oracle: Oracle,
    truth: Truth,
    gp: GpState,
    safety: SafetyModel,
    /// Grid and its posterior for discretised baselines.
    grid: Option<(GridDomain, crate::gp::PosteriorCache)>,
    reference: CoverageReference,
    f_star: Option<f64>,
    rng: ChaCha8Rng,
    info_gain_sum: f64,
    fallbacks: usize,
    last_safe: Option<Vec<f64>>,
    started: Instant,
}

impl<'a> Campaign<'a> {
    fn new(
        cfg: &'a ExperimentConfig,
        method: MethodSpec,
        oracle: Oracle,
        truth: Truth,
        env_seed: u64,
        select_seed: u64,
    ) -> Result<Self> {
        let domain = oracle.domain().clone();
        let gp = GpState::new(cfg.kernel()?, oracle.noise().clone(), domain.clone())?;
        let mut seed = oracle.seed().to_vec();
        let grid = if method.uses_grid() {
            let g = GridDomain::new(domain.clone(), cfg.baseline_grid_per_dim())?;
            seed = g.point(g.nearest_index(&seed)).to_vec();
            let cache = g.posterior_cache();
            Some((g, cache))
        } else {
            None
        };
        let safety = SafetyModel::new(seed).with_beta(cfg.beta.clone())?;
        let reference = if domain.dim() <= 2 {
            CoverageReference::grid(&domain, cfg.coverage_grid_per_dim(), &truth)?
        } else {
            CoverageReference::monte_carlo(&domain, cfg.coverage.mc_samples, env_seed, &truth)
        };
        let f_star = if cfg.regret {
            Some(truth.safe_optimum(cfg.optimum_samples, env_seed)?.1)
        } else {
            None
        };
        Ok(Self {
            cfg,
            method,
            oracle,
            truth,
            gp,
            safety,
            grid,
            reference,
            f_star,
            rng: ChaCha8Rng::seed_from_u64(select_seed),
            info_gain_sum: 0.0,
            fallbacks: 0,
            last_safe: None,
            started: Instant::now(),
        })
    }

    /// Select a point and its score under the current posterior.
    fn select(&mut self) -> Result<(Vec<f64>, f64)> {
        let n = self.gp.len();
        match self.method {
            MethodSpec::Ise => {
                let c = select_next(&self.gp, &self.safety, n, self.gp.domain(), &self.cfg.optimizer, &mut self.rng)?;
                if c.diagnostics.degenerate_search {
                    self.fallbacks += 1;
                }
                Ok((c.x, c.value))
            }
            MethodSpec::StageOpt { .. } | MethodSpec::Heuristic | MethodSpec::Uncertainty => {
                let kind = self.method.baseline_kind().expect("grid method");
                let (grid, cache) = self.grid.as_mut().expect("grid built for grid methods");
                cache.sync(&self.gp);
                let c = CandidateSet::new(cache, Some(grid), &self.safety, n).select(&self.gp, kind)?;
                if c.fallback {
                    self.fallbacks += 1;
                }
                Ok((c.x, c.score))
            }
            MethodSpec::LineIse | MethodSpec::LineBaseline { .. } => {
                let anchor = match &self.last_safe {
                    Some(x) if self.safety.is_safe(&self.gp, n, x) => x.clone(),
                    _ => self.safety.seed().to_vec(),
                };
                let lines = sample_lines(&anchor, self.cfg.lines.count, self.gp.domain(), &mut self.rng)?;
                let line_method = match self.method.baseline_kind() {
                    None => LineMethod::Ise,
                    Some(kind) => LineMethod::Baseline {
                        kind,
                        resolution: self.cfg.lines.resolution,
                    },
                };
                let seed = self.rng.next_u64();
                let c = select_next_on_lines(line_method, &self.gp, &self.safety, n, &lines, &self.cfg.optimizer, seed)?;
                if c.fallback {
                    self.fallbacks += 1;
                }
                Ok((c.x, c.value))
            }
        }
    }

    fn step(&mut self) -> Result<RunRow> {
        let (x, score) = self.select()?;
        let y = self.oracle.evaluate(&x)?;
        let f_true = self
            .truth
            .value(&x)
            .map_err(|e| Error::Environment(format!("ground truth unavailable at {x:?}: {e}")))?;
        self.info_gain_sum += information_gain(&self.gp, &x);
        self.gp = self.gp.condition(&x, y)?;
        self.last_safe = Some(x.clone());

        let n = self.gp.len();
        self.reference.sync(&self.gp);
        let cov = self.reference.measure(&self.safety, n);
        let regret = match self.f_star {
            Some(f_star) if n % self.cfg.regret_period == 0 => Some(regret_probe(
                &self.gp,
                &self.safety,
                n,
                &self.truth,
                f_star,
                &self.reference,
            )?),
            _ => None,
        };
        let wall_ms = if self.cfg.record_timing {
            self.started.elapsed().as_secs_f64() * 1e3
        } else {
            0.0
        };
        Ok(RunRow {
            n,
            x,
            y,
            f_true,
            violated: f_true < 0.0,
            score,
            coverage_pct: cov.safe_pct,
            true_safe_coverage_pct: cov.true_safe_pct,
            info_gain_sum: self.info_gain_sum,
            regret,
            wall_ms,
        })
    }
}
