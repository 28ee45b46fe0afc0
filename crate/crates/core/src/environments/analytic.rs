use serde::{Deserialize, Serialize};

use super::Constraint;
use crate::domain::BoxDomain;
use crate::error::{Error, Result};
use crate::gp::NoiseModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExponentialParams {
    pub lower: f64,
    pub upper: f64,
    pub seed: f64,
    pub noise: f64,
    pub offset: f64,
}

impl Default for ExponentialParams {
    fn default() -> Self {
        Self {
            lower: -5.0,
            upper: 5.0,
            seed: 0.0,
            noise: 0.05,
            offset: 0.05,
        }
    }
}

impl ExponentialParams {
    pub fn domain(&self) -> Result<BoxDomain> {
        BoxDomain::new(vec![self.lower], vec![self.upper])
    }
}

/// `f(x) = exp(-x) + offset`
#[derive(Debug, Clone, Copy)]
pub struct Exponential {
    offset: f64,
}

impl Exponential {
    pub fn new(offset: f64) -> Self {
        Self { offset }
    }
}

impl Constraint for Exponential {
    fn value(&self, x: &[f64]) -> Result<f64> {
        Ok((-x[0]).exp() + self.offset)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BumpKind {
    /// `e^{-|x|^2} + 2 e^{-|x - x1|^2} + 5 e^{-|x - x2|^2} - 0.2`
    Fived,
    /// `1/2 e^{-|x|^2} + e^{-|x +- x1|^2} + 3 e^{-|x +- x2|^2} + 0.2`, with
    /// lower noise on the half-space `x[0] >= 0`.
    Heteroskedastic,
}

impl BumpKind {
    pub fn name(&self) -> &'static str {
        match self {
            BumpKind::Fived => "fived",
            BumpKind::Heteroskedastic => "heteroskedastic",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BumpParams {
    pub function: BumpKind,
    pub dim: usize,
    /// Domain is `[-half_width, half_width]^dim`.
    #[serde(default = "BumpParams::default_half_width")]
    pub half_width: f64,
    /// First coordinates of the two outer bump centres.
    #[serde(default = "BumpParams::default_centers")]
    pub centers: [f64; 2],
    #[serde(default)]
    pub noise: Option<NoiseModel>,
    #[serde(default)]
    pub seed: Option<Vec<f64>>,
}

impl BumpParams {
    fn default_half_width() -> f64 {
        7.0
    }

    fn default_centers() -> [f64; 2] {
        [2.7, 6.0]
    }

    pub fn new(function: BumpKind, dim: usize) -> Self {
        Self {
            function,
            dim,
            half_width: Self::default_half_width(),
            centers: Self::default_centers(),
            noise: None,
            seed: None,
        }
    }

    pub fn domain(&self) -> Result<BoxDomain> {
        BoxDomain::cube(self.dim, -self.half_width, self.half_width)
    }

    pub fn seed_point(&self) -> Vec<f64> {
        self.seed.clone().unwrap_or_else(|| match self.function {
            BumpKind::Fived => vec![-0.2; self.dim],
            BumpKind::Heteroskedastic => vec![0.0; self.dim],
        })
    }

    pub fn noise_model(&self) -> Result<NoiseModel> {
        match &self.noise {
            Some(m) => {
                m.validate()?;
                Ok(m.clone())
            }
            None => match self.function {
                BumpKind::Fived => NoiseModel::homoskedastic(0.5),
                BumpKind::Heteroskedastic => NoiseModel::split_first_axis(0.05, 0.5),
            },
        }
    }
}

/// `sum_i w_i exp(-|x - c_i|^2) + offset`
#[derive(Debug, Clone)]
pub struct SumOfBumps {
    terms: Vec<(f64, Vec<f64>)>,
    offset: f64,
}

impl SumOfBumps {
    pub fn new(p: &BumpParams) -> Result<Self> {
        if p.dim == 0 {
            return Err(Error::invalid("bump function needs dim >= 1"));
        }
        let axis_point = |t: f64| {
            let mut c = vec![0.0; p.dim];
            c[0] = t;
            c
        };
        let [c1, c2] = p.centers;
        let (terms, offset) = match p.function {
            BumpKind::Fived => (
                vec![(1.0, axis_point(0.0)), (2.0, axis_point(c1)), (5.0, axis_point(c2))],
                -0.2,
            ),
            BumpKind::Heteroskedastic => (
                vec![
                    (0.5, axis_point(0.0)),
                    (1.0, axis_point(c1)),
                    (1.0, axis_point(-c1)),
                    (3.0, axis_point(c2)),
                    (3.0, axis_point(-c2)),
                ],
                0.2,
            ),
        };
        Ok(Self { terms, offset })
    }
}

impl Constraint for SumOfBumps {
    fn value(&self, x: &[f64]) -> Result<f64> {
        let mut v = self.offset;
        for (w, c) in &self.terms {
            if c.len() != x.len() {
                return Err(Error::DimensionMismatch {
                    expected: c.len(),
                    got: x.len(),
                });
            }
            let d2: f64 = x.iter().zip(c).map(|(a, b)| (a - b).powi(2)).sum();
            v += w * (-d2).exp();
        }
        Ok(v)
    }

    fn landmarks(&self) -> Vec<Vec<f64>> {
        self.terms.iter().map(|(_, c)| c.clone()).collect()
    }
}
