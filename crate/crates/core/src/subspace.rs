//! Acquisition restricted to random one-dimensional lines through an anchor,
//! for high-dimensional domains.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::acquisition::{select_next_in, OptimizerConfig, SearchSpace};
use crate::baselines::{BaselineKind, CandidateSet};
use crate::domain::BoxDomain;
use crate::error::{Error, Result};
use crate::gp::{GpState, PosteriorCache};
use crate::safety::SafetyModel;

const ON_LINE_TOLERANCE: f64 = 1e-9;
const DIRECTION_ATTEMPTS: usize = 100;

/// The segment `anchor + t * direction`, `t` in `interval`, inside a box.
#[derive(Debug, Clone, PartialEq)]
pub struct LineRestriction {
    anchor: Vec<f64>,
    direction: Vec<f64>,
    interval: BoxDomain,
    domain: BoxDomain,
}

impl LineRestriction {
    /// Line through `anchor` along `direction` (normalised here), clipped to
    /// `domain`.
    pub fn new(anchor: Vec<f64>, direction: Vec<f64>, domain: &BoxDomain) -> Result<Self> {
        if anchor.len() != domain.dim() || direction.len() != domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: domain.dim(),
                got: if anchor.len() != domain.dim() { anchor.len() } else { direction.len() },
            });
        }
        if !domain.contains(&anchor) {
            return Err(Error::OutOfDomain(anchor));
        }
        let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::invalid("line direction must be non-zero"));
        }
        let direction: Vec<f64> = direction.iter().map(|v| v / norm).collect();
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for i in 0..domain.dim() {
            let d = direction[i];
            if d == 0.0 {
                continue;
            }
            let a = (domain.lower()[i] - anchor[i]) / d;
            let b = (domain.upper()[i] - anchor[i]) / d;
            lo = lo.max(a.min(b));
            hi = hi.min(a.max(b));
        }
        let interval = BoxDomain::new(vec![lo.min(0.0)], vec![hi.max(0.0)])
            .map_err(|_| Error::invalid("line meets the domain in a single point"))?;
        Ok(Self {
            anchor,
            direction,
            interval,
            domain: domain.clone(),
        })
    }

    pub fn anchor(&self) -> &[f64] {
        &self.anchor
    }

    pub fn direction(&self) -> &[f64] {
        &self.direction
    }

    /// `(t_min, t_max)`
    pub fn interval(&self) -> (f64, f64) {
        (self.interval.lower()[0], self.interval.upper()[0])
    }

    pub fn at(&self, t: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.anchor.len());
        self.point(&[t], &mut out);
        out
    }

    /// `count` equally spaced points covering the interval, flattened.
    pub fn discretize(&self, count: usize) -> Vec<f64> {
        let (lo, hi) = self.interval();
        let count = count.max(2);
        let mut flat = Vec::with_capacity(count * self.anchor.len());
        for k in 0..count {
            let t = lo + (hi - lo) * k as f64 / (count - 1) as f64;
            flat.extend(self.at(t));
        }
        flat
    }
}

impl SearchSpace for LineRestriction {
    fn parameter_box(&self) -> &BoxDomain {
        &self.interval
    }

    fn point(&self, u: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(self.anchor.iter().zip(&self.direction).map(|(a, d)| a + u[0] * d));
        self.domain.clamp_in_place(out);
    }

    fn parameter_of(&self, x: &[f64]) -> Option<Vec<f64>> {
        if x.len() != self.anchor.len() {
            return None;
        }
        let t: f64 = x
            .iter()
            .zip(&self.anchor)
            .zip(&self.direction)
            .map(|((x, a), d)| (x - a) * d)
            .sum();
        let (lo, hi) = self.interval();
        if t < lo - ON_LINE_TOLERANCE || t > hi + ON_LINE_TOLERANCE {
            return None;
        }
        let t = t.clamp(lo, hi);
        let off = x
            .iter()
            .zip(self.at(t))
            .map(|(x, p)| (x - p).powi(2))
            .sum::<f64>()
            .sqrt();
        (off <= ON_LINE_TOLERANCE).then(|| vec![t])
    }
}

/// `count` lines through `anchor` with directions uniform on the sphere.
pub fn sample_lines<R: Rng + ?Sized>(
    anchor: &[f64],
    count: usize,
    domain: &BoxDomain,
    rng: &mut R,
) -> Result<Vec<LineRestriction>> {
    if count == 0 {
        return Err(Error::invalid("at least one line is required"));
    }
    let mut lines = Vec::with_capacity(count);
    for _ in 0..count {
        let mut attempt = 0;
        let line = loop {
            let dir: Vec<f64> = (0..domain.dim()).map(|_| rng.sample(StandardNormal)).collect();
            match LineRestriction::new(anchor.to_vec(), dir, domain) {
                Ok(line) => break line,
                Err(Error::InvalidParameter(_)) if attempt + 1 < DIRECTION_ATTEMPTS => attempt += 1,
                Err(e) => return Err(e),
            }
        };
        lines.push(line);
    }
    Ok(lines)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LineMethod {
    Ise,
    Baseline {
        kind: BaselineKind,
        /// Points per line for the discretised expander search.
        resolution: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineChoice {
    pub line: usize,
    pub x: Vec<f64>,
    /// Safety target of the information criterion (ISE only).
    pub z: Option<Vec<f64>>,
    /// Mutual information for ISE, posterior std for baselines.
    pub value: f64,
    /// No line produced a regular candidate.
    pub fallback: bool,
}

/// Best selection over all `lines`. Each line is searched with its own
/// random stream derived from `seed` and its index, so adding lines never
/// changes the candidates of existing ones.
pub fn select_next_on_lines(
    method: LineMethod,
    gp: &GpState,
    safety: &SafetyModel,
    n: usize,
    lines: &[LineRestriction],
    config: &OptimizerConfig,
    seed: u64,
) -> Result<LineChoice> {
    if lines.is_empty() {
        return Err(Error::invalid("at least one line is required"));
    }
    let mut best: Option<LineChoice> = None;
    for (i, line) in lines.iter().enumerate() {
        let candidate = match method {
            LineMethod::Ise => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                match select_next_in(line, gp, safety, n, config, &mut rng) {
                    Ok(c) => LineChoice {
                        line: i,
                        x: c.x,
                        z: Some(c.z),
                        value: c.value,
                        fallback: c.diagnostics.degenerate_search,
                    },
                    Err(Error::EmptySafeSet(_)) => continue,
                    Err(e) => return Err(e),
                }
            }
            LineMethod::Baseline { kind, resolution } => {
                let mut cache = PosteriorCache::new(gp.dim(), line.discretize(resolution));
                cache.sync(gp);
                match CandidateSet::new(&cache, None, safety, n).select(gp, kind) {
                    Ok(c) => LineChoice {
                        line: i,
                        x: c.x,
                        z: None,
                        value: c.score,
                        fallback: c.fallback,
                    },
                    Err(Error::EmptySafeSet(_)) => continue,
                    Err(e) => return Err(e),
                }
            }
        };
        // fallbacks only rank last for the discretised baselines
        let ranked = |c: &LineChoice| (method == LineMethod::Ise || !c.fallback, c.value);
        let better = match &best {
            None => true,
            Some(b) => ranked(&candidate) > ranked(b),
        };
        if better {
            best = Some(candidate);
        }
    }
    if let Some(b) = best {
        return Ok(b);
    }
    let anchor = lines[0].anchor();
    if safety.is_safe(gp, n, anchor) {
        return Ok(LineChoice {
            line: 0,
            x: anchor.to_vec(),
            z: Some(anchor.to_vec()),
            value: 0.0,
            fallback: true,
        });
    }
    Err(Error::EmptySafeSet("no safe point on any line".into()))
}
