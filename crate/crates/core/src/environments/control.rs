//! Linear state-feedback controllers on a torque-limited pendulum and a
//! cart-pole; the constraint is a margin on the worst state reached in one
//! episode.

use serde::{Deserialize, Serialize};

use super::Constraint;
use crate::domain::BoxDomain;
use crate::error::{Error, Result};

/// Seed from the original cart-pole study. It is not safe under
/// [`CartPoleParams::default`].
pub const CARTPOLE_REFERENCE_SEED: [f64; 3] = [-0.0073, -1.39, 2.01];

/// One simulated episode.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerEpisode {
    pub dt: f64,
    /// State after each step; the initial state is not included.
    pub states: Vec<Vec<f64>>,
    /// Control applied at each step, after any saturation.
    pub controls: Vec<f64>,
}

impl ControllerEpisode {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Largest value of component `k` (or its magnitude) over the episode.
    pub fn max_component(&self, k: usize, absolute: bool) -> f64 {
        self.states
            .iter()
            .map(|s| if absolute { s[k].abs() } else { s[k] })
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Pendulum with `theta = 0` upright and
/// `theta'' = 3g/(2l) sin(theta) + 3u/(m l^2)`, `u = a1 theta + a2 theta'`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PendulumParams {
    pub gravity: f64,
    pub mass: f64,
    pub length: f64,
    pub dt: f64,
    pub steps: usize,
    pub max_torque: f64,
    pub max_speed: f64,
    pub theta0: f64,
    /// Largest admissible angular velocity.
    pub threshold: f64,
    /// Bound `|theta'|` rather than the signed velocity.
    pub absolute: bool,
    pub lower: [f64; 2],
    pub upper: [f64; 2],
    pub seed: [f64; 2],
    pub noise: f64,
}

impl Default for PendulumParams {
    fn default() -> Self {
        Self {
            gravity: 9.81,
            mass: 1.0,
            length: 1.0,
            dt: 0.05,
            steps: 400,
            max_torque: 2.0,
            max_speed: 8.0,
            theta0: 0.1,
            threshold: 0.5,
            absolute: false,
            lower: [-10.0, -5.0],
            upper: [0.0, 1.0],
            seed: [-8.0, -2.0],
            noise: 0.04,
        }
    }
}

impl PendulumParams {
    pub fn domain(&self) -> Result<BoxDomain> {
        BoxDomain::new(self.lower.to_vec(), self.upper.to_vec())
    }
}

#[derive(Debug, Clone)]
pub struct Pendulum {
    p: PendulumParams,
}

impl Pendulum {
    pub fn new(p: PendulumParams) -> Self {
        Self { p }
    }

    /// States are `(theta, theta')`.
    pub fn episode(&self, gains: &[f64]) -> Result<ControllerEpisode> {
        let p = &self.p;
        check_gains(gains, 2)?;
        let (mut th, mut thd) = (p.theta0, 0.0);
        let mut states = Vec::with_capacity(p.steps);
        let mut controls = Vec::with_capacity(p.steps);
        for _ in 0..p.steps {
            let u = (gains[0] * th + gains[1] * thd).clamp(-p.max_torque, p.max_torque);
            let acc = 3.0 * p.gravity / (2.0 * p.length) * th.sin() + 3.0 / (p.mass * p.length * p.length) * u;
            thd = (thd + acc * p.dt).clamp(-p.max_speed, p.max_speed);
            th += thd * p.dt;
            if !(th.is_finite() && thd.is_finite()) {
                return Err(Error::Environment("pendulum trajectory diverged".into()));
            }
            states.push(vec![th, thd]);
            controls.push(u);
        }
        Ok(ControllerEpisode {
            dt: p.dt,
            states,
            controls,
        })
    }
}

impl Constraint for Pendulum {
    fn value(&self, x: &[f64]) -> Result<f64> {
        let e = self.episode(x)?;
        Ok(-(e.max_component(1, self.p.absolute) - self.p.threshold))
    }
}

/// Cart-pole with force `gain * (a1 theta + a2 theta' + a3 s')`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CartPoleParams {
    pub gravity: f64,
    pub mass_cart: f64,
    pub mass_pole: f64,
    /// Half the pole length.
    pub half_length: f64,
    pub dt: f64,
    pub steps: usize,
    pub theta0: f64,
    /// Largest admissible pole angle.
    pub threshold: f64,
    pub absolute: bool,
    pub force_gain: f64,
    /// The episode stops once the angle exceeds this; the constraint
    /// saturates at `threshold - angle_cap`.
    pub angle_cap: f64,
    pub lower: [f64; 3],
    pub upper: [f64; 3],
    pub seed: [f64; 3],
    pub noise: f64,
}

impl Default for CartPoleParams {
    fn default() -> Self {
        Self {
            gravity: 9.8,
            mass_cart: 1.0,
            mass_pole: 0.1,
            half_length: 0.5,
            dt: 0.02,
            steps: 200,
            theta0: 0.05,
            threshold: 0.28,
            absolute: true,
            force_gain: -10.0,
            angle_cap: std::f64::consts::PI,
            lower: [-2.0, -2.0, -2.0],
            upper: [0.0, 1.5, 7.0],
            seed: [-0.37, -1.64, -0.06],
            noise: 0.05,
        }
    }
}

impl CartPoleParams {
    pub fn domain(&self) -> Result<BoxDomain> {
        BoxDomain::new(self.lower.to_vec(), self.upper.to_vec())
    }
}

#[derive(Debug, Clone)]
pub struct CartPole {
    p: CartPoleParams,
}

impl CartPole {
    pub fn new(p: CartPoleParams) -> Self {
        Self { p }
    }

    /// States are `(s, s', theta, theta')`. The episode ends early once
    /// `|theta|` passes the angle cap.
    pub fn episode(&self, gains: &[f64]) -> Result<ControllerEpisode> {
        let p = &self.p;
        check_gains(gains, 3)?;
        let total_mass = p.mass_cart + p.mass_pole;
        let pml = p.mass_pole * p.half_length;
        let (mut s, mut sd, mut th, mut thd) = (0.0, 0.0, p.theta0, 0.0);
        let mut states = Vec::with_capacity(p.steps);
        let mut controls = Vec::with_capacity(p.steps);
        for _ in 0..p.steps {
            let u = p.force_gain * (gains[0] * th + gains[1] * thd + gains[2] * sd);
            let (sin, cos) = th.sin_cos();
            let temp = (u + pml * thd * thd * sin) / total_mass;
            let th_acc =
                (p.gravity * sin - cos * temp) / (p.half_length * (4.0 / 3.0 - p.mass_pole * cos * cos / total_mass));
            let s_acc = temp - pml * th_acc * cos / total_mass;
            s += p.dt * sd;
            sd += p.dt * s_acc;
            th += p.dt * thd;
            thd += p.dt * th_acc;
            if ![s, sd, th, thd].iter().all(|v| v.is_finite()) {
                return Err(Error::Environment("cart-pole trajectory diverged".into()));
            }
            states.push(vec![s, sd, th, thd]);
            controls.push(u);
            if th.abs() >= p.angle_cap {
                break;
            }
        }
        Ok(ControllerEpisode {
            dt: p.dt,
            states,
            controls,
        })
    }
}

impl Constraint for CartPole {
    fn value(&self, x: &[f64]) -> Result<f64> {
        let e = self.episode(x)?;
        let worst = e.max_component(2, self.p.absolute).min(self.p.angle_cap);
        Ok(-(worst - self.p.threshold))
    }
}

fn check_gains(gains: &[f64], n: usize) -> Result<()> {
    if gains.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: gains.len(),
        });
    }
    Ok(())
}
