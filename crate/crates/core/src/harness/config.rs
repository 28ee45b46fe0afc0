use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::acquisition::OptimizerConfig;
use crate::baselines::BaselineKind;
use crate::environments::EnvironmentSpec;
use crate::error::{Error, Result};
use crate::gp::{KernelSpec, RbfKernel};
use crate::safety::BetaSchedule;

pub const SEED_ENV_VAR: &str = "SAFE_EXPLORE_SEED";

/// Exploration strategy of a campaign.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MethodSpec {
    Ise,
    StageOpt { lipschitz: f64 },
    Heuristic,
    Uncertainty,
    LineIse,
    LineBaseline { baseline: BaselineKind },
}

impl MethodSpec {
    pub fn uses_grid(&self) -> bool {
        matches!(
            self,
            MethodSpec::StageOpt { .. } | MethodSpec::Heuristic | MethodSpec::Uncertainty
        )
    }

    pub fn uses_lines(&self) -> bool {
        matches!(self, MethodSpec::LineIse | MethodSpec::LineBaseline { .. })
    }

    pub fn baseline_kind(&self) -> Option<BaselineKind> {
        match *self {
            MethodSpec::StageOpt { lipschitz } => Some(BaselineKind::StageOpt { lipschitz }),
            MethodSpec::Heuristic => Some(BaselineKind::Heuristic),
            MethodSpec::Uncertainty => Some(BaselineKind::Uncertainty),
            MethodSpec::LineBaseline { baseline } => Some(baseline),
            _ => None,
        }
    }

    /// Short name used in run ids and summaries; parses back with `FromStr`.
    pub fn label(&self) -> String {
        fn base(k: BaselineKind) -> String {
            match k {
                BaselineKind::StageOpt { lipschitz } => format!("stageopt:{lipschitz}"),
                BaselineKind::Heuristic => "heuristic".into(),
                BaselineKind::Uncertainty => "uncertainty".into(),
            }
        }
        match *self {
            MethodSpec::Ise => "ise".into(),
            MethodSpec::LineIse => "line_ise".into(),
            MethodSpec::LineBaseline { baseline } => format!("line_{}", base(baseline)),
            other => base(other.baseline_kind().expect("grid method")),
        }
    }

    fn validate(&self) -> Result<()> {
        match self.baseline_kind() {
            Some(BaselineKind::StageOpt { lipschitz }) if !(lipschitz >= 0.0 && lipschitz.is_finite()) => {
                Err(Error::Config(format!("invalid Lipschitz constant {lipschitz}")))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for MethodSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for MethodSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (line, rest) = match s.strip_prefix("line_") {
            Some(r) => (true, r),
            None => (false, s),
        };
        let baseline = match rest {
            "ise" => return Ok(if line { MethodSpec::LineIse } else { MethodSpec::Ise }),
            "heuristic" => BaselineKind::Heuristic,
            "uncertainty" => BaselineKind::Uncertainty,
            other => {
                let l = other
                    .strip_prefix("stageopt:")
                    .and_then(|v| v.parse::<f64>().ok())
                    .ok_or_else(|| Error::Config(format!("unknown method '{s}'")))?;
                BaselineKind::StageOpt { lipschitz: l }
            }
        };
        let m = if line {
            MethodSpec::LineBaseline { baseline }
        } else {
            match baseline {
                BaselineKind::StageOpt { lipschitz } => MethodSpec::StageOpt { lipschitz },
                BaselineKind::Heuristic => MethodSpec::Heuristic,
                BaselineKind::Uncertainty => MethodSpec::Uncertainty,
            }
        };
        m.validate()?;
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoverageSettings {
    /// Reference grid resolution per dimension for one- and two-dimensional
    /// domains; defaults to 500 in 1D and 200 in 2D.
    pub grid_per_dim: Option<usize>,
    /// Monte Carlo reference size for three or more dimensions.
    pub mc_samples: usize,
}

impl Default for CoverageSettings {
    fn default() -> Self {
        Self {
            grid_per_dim: None,
            mc_samples: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LineSettings {
    pub count: usize,
    /// Points per line for discretised baselines.
    pub resolution: usize,
}

impl Default for LineSettings {
    fn default() -> Self {
        Self {
            count: 4,
            resolution: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GpSettings {
    pub kernel: KernelSpec,
}

/// A complete experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub environment: EnvironmentSpec,
    pub method: MethodSpec,
    /// Methods run by `sweep`; defaults to `[method]`.
    #[serde(default)]
    pub sweep_methods: Vec<MethodSpec>,
    /// Kernel override; the environment's matching prior otherwise.
    #[serde(default)]
    pub gp: Option<GpSettings>,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    pub iterations: usize,
    #[serde(default)]
    pub beta: BetaSchedule,
    #[serde(default)]
    pub coverage: CoverageSettings,
    /// Grid points per dimension for discretised baselines; defaults to the
    /// coverage grid resolution.
    #[serde(default)]
    pub baseline_grid: Option<usize>,
    #[serde(default)]
    pub lines: LineSettings,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub replications: usize,
    #[serde(default = "ten")]
    pub regret_period: usize,
    /// Samples for locating the true safe optimum.
    #[serde(default = "optimum_samples")]
    pub optimum_samples: usize,
    /// Compute regret probes (needed for optimisation benchmarks only).
    #[serde(default)]
    pub regret: bool,
    /// Write measured wall time instead of 0; breaks byte-identical reruns.
    #[serde(default)]
    pub record_timing: bool,
}

fn one() -> usize {
    1
}

fn ten() -> usize {
    10
}

fn optimum_samples() -> usize {
    20_000
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let cfg_err = |e: Error| match e {
            Error::Config(_) => e,
            other => Error::Config(other.to_string()),
        };
        if self.replications == 0 || self.regret_period == 0 || self.lines.count == 0 {
            return Err(Error::Config("counts must be positive".into()));
        }
        if self.lines.resolution < 2 || self.coverage.mc_samples == 0 {
            return Err(Error::Config("line resolution and Monte Carlo size must be positive".into()));
        }
        self.optimizer.validate().map_err(cfg_err)?;
        self.beta.validate().map_err(cfg_err)?;
        let kernel = self.kernel().map_err(cfg_err)?;
        let dim = self.environment.dim();
        if !kernel.supports_dim(dim) {
            return Err(Error::Config(format!("kernel does not match dimension {dim}")));
        }
        for m in self.methods() {
            m.validate()?;
            if m.uses_grid() && dim > 3 {
                return Err(Error::Config(format!(
                    "method '{m}' needs a grid and the domain has {dim} dimensions; use a line method"
                )));
            }
        }
        if let Some(g) = self.baseline_grid.or(self.coverage.grid_per_dim) {
            if g < 2 {
                return Err(Error::Config("grids need at least two points per dimension".into()));
            }
        }
        Ok(())
    }

    pub fn kernel(&self) -> Result<RbfKernel> {
        match &self.gp {
            Some(g) => RbfKernel::try_from(g.kernel.clone()),
            None => self.environment.default_kernel(),
        }
    }

    /// Methods covered by `sweep`.
    pub fn methods(&self) -> Vec<MethodSpec> {
        if self.sweep_methods.is_empty() {
            vec![self.method]
        } else {
            self.sweep_methods.clone()
        }
    }

    pub fn coverage_grid_per_dim(&self) -> usize {
        self.coverage
            .grid_per_dim
            .unwrap_or(if self.environment.dim() == 1 { 500 } else { 200 })
    }

    pub fn baseline_grid_per_dim(&self) -> usize {
        self.baseline_grid.unwrap_or_else(|| match self.environment.dim() {
            1 | 2 => self.coverage_grid_per_dim(),
            _ => 40,
        })
    }

    /// Seed after applying the `SAFE_EXPLORE_SEED` override.
    pub fn effective_seed(&self) -> Result<u64> {
        match std::env::var(SEED_ENV_VAR) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("{SEED_ENV_VAR} is not an unsigned integer: '{v}'"))),
            Err(_) => Ok(self.seed),
        }
    }
}
