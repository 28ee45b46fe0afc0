mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use safe_explore::acquisition::{mutual_info, select_next, OptimizerConfig};
use safe_explore::environments::EnvironmentSpec;
use safe_explore::{BoxDomain, GpState, NoiseModel, RbfKernel, SafetyModel};

/// Small state with a safe neighbourhood around the seed.
pub fn small_state(rng: &mut ChaCha8Rng, dim: usize) -> (GpState, SafetyModel) {
    let domain = BoxDomain::cube(dim, -2.0, 2.0).unwrap();
    let kernel = RbfKernel::isotropic(rng.random_range(0.4..1.2), 1.0).unwrap();
    let noise = NoiseModel::homoskedastic(rng.random_range(0.01..0.1)).unwrap();
    let seed: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut gp = GpState::new(kernel, noise, domain).unwrap();
    for _ in 0..rng.random_range(1..=3) {
        gp = gp.condition(&seed, rng.random_range(1.0..2.5)).unwrap();
    }
    for _ in 0..rng.random_range(0..=3) {
        let x: Vec<f64> = seed.iter().map(|s| (s + rng.random_range(-0.6..0.6)).clamp(-2.0, 2.0)).collect();
        gp = gp.condition(&x, rng.random_range(0.0..2.0)).unwrap();
    }
    (gp, SafetyModel::new(seed))
}

#[test]
fn beats_exhaustive_joint_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for k in 0..20 {
        let dim = 1 + k % 2;
        let (gp, safety) = small_state(&mut rng, dim);
        let n = gp.len();
        let choice = select_next(&gp, &safety, n, gp.domain(), &OptimizerConfig::default(), &mut rng).unwrap();
        assert!(safety.is_safe(&gp, n, &choice.x));
        assert!((choice.value - mutual_info(&gp, &choice.x, &choice.z)).abs() < 1e-12);
        let grid = common::grid_joint_max(&gp, &safety, n, 41);
        assert!(choice.value >= 0.99 * grid, "state {k}: {} < 0.99 x {grid}", choice.value);
    }
}

#[test]
fn dominates_random_safe_candidates_on_exponential() {
    let spec = EnvironmentSpec::Exponential(Default::default());
    let env = spec.build(3).unwrap();
    let kernel = spec.default_kernel().unwrap();
    let domain = env.domain().clone();
    let seed = env.seed().to_vec();
    let mut gp = GpState::new(kernel, NoiseModel::homoskedastic(0.05).unwrap(), domain.clone()).unwrap();
    let safety = SafetyModel::new(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut env = env;
    for x in [[0.0], [0.5], [-0.5], [1.0]] {
        gp = gp.condition(&x, env.evaluate(&x).unwrap()).unwrap();
    }
    let n = gp.len();
    let choice = select_next(&gp, &safety, n, &domain, &OptimizerConfig::default(), &mut rng).unwrap();
    let mut tried = 0;
    while tried < 100 {
        let x = [rng.random_range(-5.0..5.0)];
        if !safety.is_safe(&gp, n, &x) {
            continue;
        }
        let z = [rng.random_range(-5.0..5.0)];
        assert!(choice.value >= mutual_info(&gp, &x, &z));
        tried += 1;
    }
}
