//! Search spaces and bound-constrained projected gradient ascent with a
//! feasibility test on part of the variables.

use crate::domain::BoxDomain;

/// Parameterisation of candidate points: a box of parameters mapped into the
/// input domain.
pub trait SearchSpace {
    /// Box of admissible parameters.
    fn parameter_box(&self) -> &BoxDomain;

    /// Input-space point for parameter `u`.
    fn point(&self, u: &[f64], out: &mut Vec<f64>);

    /// Parameter of `x` if `x` lies in this space.
    fn parameter_of(&self, x: &[f64]) -> Option<Vec<f64>>;

    fn parameter_dim(&self) -> usize {
        self.parameter_box().dim()
    }
}

/// The whole domain, parameterised by itself.
#[derive(Debug, Clone)]
pub struct FullSpace<'a> {
    domain: &'a BoxDomain,
}

impl<'a> FullSpace<'a> {
    pub fn new(domain: &'a BoxDomain) -> Self {
        Self { domain }
    }
}

impl SearchSpace for FullSpace<'_> {
    fn parameter_box(&self) -> &BoxDomain {
        self.domain
    }

    fn point(&self, u: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend_from_slice(u);
    }

    fn parameter_of(&self, x: &[f64]) -> Option<Vec<f64>> {
        self.domain.contains(x).then(|| x.to_vec())
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct AscentSettings {
    pub max_iterations: usize,
    pub max_halvings: usize,
    /// Central-difference step as a fraction of each parameter-box width.
    pub fd_step: f64,
    pub initial_step: f64,
    pub tolerance: f64,
}

/// Maximise `objective` over `bounds` from `start`.
///
/// Coordinates `[..split]` are subject to `feasible`. A step that leaves the
/// feasible set is shortened in those coordinates, or frozen there, and the
/// whole step is halved up to `max_halvings` times while it fails to ascend.
/// Returns the final point and its value.
pub(crate) fn projected_ascent(
    start: Vec<f64>,
    bounds: &BoxDomain,
    split: usize,
    settings: AscentSettings,
    mut objective: impl FnMut(&[f64]) -> f64,
    mut feasible: impl FnMut(&[f64]) -> bool,
) -> (Vec<f64>, f64) {
    let dim = bounds.dim();
    let widths: Vec<f64> = (0..dim).map(|i| bounds.width(i)).collect();
    let mut u = start;
    let mut value = objective(&u);
    let mut step = settings.initial_step;
    let mut grad = vec![0.0; dim];
    let mut probe = u.clone();
    let mut cand = vec![0.0; dim];

    for _ in 0..settings.max_iterations {
        // central differences, clamped to the box
        for i in 0..dim {
            let h = settings.fd_step * widths[i];
            let up = (u[i] + h).min(bounds.upper()[i]);
            let down = (u[i] - h).max(bounds.lower()[i]);
            probe.copy_from_slice(&u);
            probe[i] = up;
            let f_up = objective(&probe);
            probe[i] = down;
            let f_down = objective(&probe);
            grad[i] = if up > down {
                (f_up - f_down) / (up - down)
            } else {
                0.0
            };
        }
        // ascent direction in width-normalised coordinates
        let norm = grad
            .iter()
            .zip(&widths)
            .map(|(g, w)| (g * w) * (g * w))
            .sum::<f64>()
            .sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            break;
        }

        let mut accepted = false;
        for _ in 0..=settings.max_halvings {
            for i in 0..dim {
                cand[i] = u[i] + step * grad[i] * widths[i] * widths[i] / norm;
            }
            bounds.clamp_in_place(&mut cand);
            if split > 0 && !feasible(&cand[..split]) {
                // shorten the constrained part towards the boundary, freeze
                // it if nothing feasible is found
                let mut frac = 0.5;
                let mut ok = false;
                for _ in 0..settings.max_halvings {
                    for i in 0..split {
                        probe[i] = u[i] + frac * (cand[i] - u[i]);
                    }
                    if feasible(&probe[..split]) {
                        ok = true;
                        break;
                    }
                    frac *= 0.5;
                }
                if ok {
                    cand[..split].copy_from_slice(&probe[..split]);
                } else {
                    cand[..split].copy_from_slice(&u[..split]);
                }
            }
            let predicted: f64 = cand
                .iter()
                .zip(&u)
                .zip(&grad)
                .map(|((c, x), g)| (c - x) * g)
                .sum();
            if predicted > 0.0 {
                let f = objective(&cand);
                if f >= value + 1e-4 * predicted {
                    let gain = f - value;
                    u.copy_from_slice(&cand);
                    value = f;
                    accepted = gain > settings.tolerance * value.abs().max(1e-300);
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        step = (step * 2.0).min(0.5);
    }
    (u, value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings() -> AscentSettings {
        AscentSettings {
            max_iterations: 500,
            max_halvings: 20,
            fd_step: 1e-6,
            initial_step: 0.05,
            tolerance: 1e-14,
        }
    }

    #[test]
    fn finds_interior_maximum() {
        let b = BoxDomain::cube(2, -2.0, 2.0).unwrap();
        let f = |u: &[f64]| -(u[0] - 0.3).powi(2) - 2.0 * (u[1] + 0.5).powi(2);
        let (u, v) = projected_ascent(vec![1.5, 1.5], &b, 0, settings(), f, |_| true);
        assert!((u[0] - 0.3).abs() < 1e-4 && (u[1] + 0.5).abs() < 1e-4, "{u:?}");
        assert!(v > -1e-7);
    }

    #[test]
    fn respects_bounds_and_feasibility() {
        let b = BoxDomain::cube(2, -2.0, 2.0).unwrap();
        let f = |u: &[f64]| u[0] + u[1];
        // first coordinate must stay below 0.5
        let (u, _) = projected_ascent(vec![0.0, 0.0], &b, 1, settings(), f, |x| x[0] <= 0.5);
        assert!(u[0] <= 0.5 && u[0] > 0.49, "{u:?}");
        assert!((u[1] - 2.0).abs() < 1e-12);
    }
}
