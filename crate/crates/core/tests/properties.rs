mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use safe_explore::acquisition::OptimizerConfig;
use safe_explore::baselines::{
    heuristic_expanders, select_next_baseline, stageopt_expanders, BaselineKind, GridDomain, LipschitzConfig,
};
use safe_explore::environments::{
    CartPole, CartPoleParams, Constraint, EnvironmentSpec, GpSampleParams, Pendulum, PendulumParams,
};
use safe_explore::subspace::{sample_lines, select_next_on_lines, LineMethod};
use safe_explore::{BoxDomain, GpState, NoiseModel, RbfKernel, SafetyModel};

#[test]
fn gp_samples_are_partly_safe() {
    let spec = EnvironmentSpec::GpSample(GpSampleParams::default());
    let mut mixed = 0;
    for seed in 0..100 {
        let env = spec.build(seed).unwrap();
        let truth = env.truth();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let safe = (0..500)
            .filter(|_| truth.value(&env.domain().sample_uniform(&mut rng)).unwrap() >= 0.0)
            .count();
        if safe > 0 && safe < 500 {
            mixed += 1;
        }
    }
    assert!(mixed >= 95, "{mixed} of 100");
}

#[test]
fn posterior_mean_stays_bounded_on_gp_data() {
    let spec = EnvironmentSpec::GpSample(GpSampleParams::default());
    let kernel = spec.default_kernel().unwrap();
    let mut ok = 0;
    for seed in 0..100 {
        let mut env = spec.build(seed).unwrap();
        let domain = env.domain().clone();
        let safety = SafetyModel::new(env.seed().to_vec());
        let mut gp = GpState::new(kernel.clone(), env.noise().clone(), domain.clone()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        for _ in 0..30 {
            let x = domain.sample_uniform(&mut rng);
            let y = env.evaluate(&x).unwrap();
            gp = gp.condition(&x, y).unwrap();
        }
        let probes: Vec<Vec<f64>> = (0..200).map(|_| domain.sample_uniform(&mut rng)).collect();
        if safety.posterior_mean_bound_check(&gp, gp.len(), probes.iter().map(Vec::as_slice)) {
            ok += 1;
        }
    }
    assert!(ok >= 95, "{ok} of 100");
}

/// Snapshot of an exponential campaign after `steps` uncertainty-sampling
/// evaluations.
fn exponential_snapshot(steps: usize, seed: u64) -> (GpState, SafetyModel, GridDomain) {
    let spec = EnvironmentSpec::Exponential(Default::default());
    let mut env = spec.build(seed).unwrap();
    let grid = GridDomain::new(env.domain().clone(), 201).unwrap();
    let x0 = grid.point(grid.nearest_index(env.seed())).to_vec();
    let safety = SafetyModel::new(x0.clone());
    let mut gp = GpState::new(
        spec.default_kernel().unwrap(),
        env.noise().clone(),
        env.domain().clone(),
    )
    .unwrap();
    let mut x = x0;
    for n in 0..steps {
        let y = env.evaluate(&x).unwrap();
        gp = gp.condition(&x, y).unwrap();
        x = select_next_baseline(BaselineKind::Uncertainty, &gp, &safety, n + 1, &grid)
            .unwrap()
            .x;
    }
    (gp, safety, grid)
}

#[test]
fn stageopt_expanders_shrink_with_lipschitz() {
    for (steps, seed) in [(3, 1), (8, 2), (15, 3)] {
        let (gp, safety, grid) = exponential_snapshot(steps, seed);
        let n = gp.len();
        let mut prev: Option<Vec<usize>> = None;
        for l in [0.0, 1.0, 5.0, 10.0] {
            let cur = stageopt_expanders(&gp, &safety, n, &grid, &LipschitzConfig::new(l).unwrap());
            for &i in &cur {
                assert!(safety.is_safe(&gp, n, grid.point(i)));
            }
            if let Some(p) = &prev {
                assert!(cur.iter().all(|i| p.contains(i)), "L = {l} not nested");
            }
            prev = Some(cur);
        }
    }
}

#[test]
fn baseline_selections_are_safe_and_repeatable() {
    let (gp, safety, grid) = exponential_snapshot(10, 4);
    let n = gp.len();
    for kind in [
        BaselineKind::StageOpt { lipschitz: 1.0 },
        BaselineKind::Heuristic,
        BaselineKind::Uncertainty,
    ] {
        let a = select_next_baseline(kind, &gp, &safety, n, &grid).unwrap();
        let b = select_next_baseline(kind, &gp, &safety, n, &grid).unwrap();
        assert_eq!(a, b);
        assert!(safety.is_safe(&gp, n, &a.x));
    }
    let h = heuristic_expanders(&gp, &safety, n, &grid);
    assert!(h.iter().all(|&i| safety.is_safe(&gp, n, grid.point(i))));
}

/// Expanders by conditioning on the optimistic observation at every safe
/// grid point and re-testing every unsafe one.
fn brute_force_expanders(gp: &GpState, safety: &SafetyModel, n: usize, grid: &GridDomain) -> Vec<usize> {
    let beta = safety.beta(n);
    let unsafe_pts: Vec<usize> = (0..grid.len()).filter(|&i| !safety.is_safe(gp, n, grid.point(i))).collect();
    (0..grid.len())
        .filter(|&i| safety.is_safe(gp, n, grid.point(i)))
        .filter(|&i| {
            let x = grid.point(i);
            let (m, v) = gp.posterior(x);
            let next = gp.condition(x, m + beta * v.sqrt()).unwrap();
            unsafe_pts.iter().any(|&j| safety.is_safe(&next, n, grid.point(j)))
        })
        .collect()
}

#[test]
fn heuristic_expanders_match_hypothetical_updates() {
    let domain = BoxDomain::cube(1, -2.0, 2.0).unwrap();
    let grid = GridDomain::new(domain.clone(), 81).unwrap();
    let x0 = grid.point(40).to_vec();
    let gp = GpState::fit(
        RbfKernel::isotropic(0.5, 1.0).unwrap(),
        NoiseModel::homoskedastic(0.01).unwrap(),
        domain,
        [(x0.as_slice(), 1.5)],
    )
    .unwrap();
    let safety = SafetyModel::new(x0);
    let fast = heuristic_expanders(&gp, &safety, 1, &grid);
    assert_eq!(fast, brute_force_expanders(&gp, &safety, 1, &grid));
    assert!(!fast.is_empty());

    for (steps, seed) in [(4, 5), (12, 6)] {
        let (gp, safety, grid) = exponential_snapshot(steps, seed);
        let n = gp.len();
        assert_eq!(heuristic_expanders(&gp, &safety, n, &grid), brute_force_expanders(&gp, &safety, n, &grid));
    }
}

#[test]
fn more_lines_never_lower_the_value() {
    let spec: EnvironmentSpec =
        serde_json::from_str(r#"{"kind": "bump", "function": "heteroskedastic", "dim": 3}"#).unwrap();
    let mut env = spec.build(2).unwrap();
    let domain = env.domain().clone();
    let safety = SafetyModel::new(env.seed().to_vec());
    let mut gp = GpState::new(spec.default_kernel().unwrap(), env.noise().clone(), domain.clone()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let x0 = env.seed().to_vec();
    for _ in 0..4 {
        let y = env.evaluate(&x0).unwrap();
        gp = gp.condition(&x0, y).unwrap();
    }
    let lines = sample_lines(&x0, 6, &domain, &mut rng).unwrap();
    let cfg = OptimizerConfig::default();
    for method in [
        LineMethod::Ise,
        LineMethod::Baseline {
            kind: BaselineKind::StageOpt { lipschitz: 1.0 },
            resolution: 50,
        },
    ] {
        let mut last = f64::NEG_INFINITY;
        for k in 1..=lines.len() {
            let c = select_next_on_lines(method, &gp, &safety, gp.len(), &lines[..k], &cfg, 17).unwrap();
            assert!(safety.is_safe(&gp, gp.len(), &c.x));
            if !c.fallback {
                assert!(c.value >= last, "{method:?}: {} < {last}", c.value);
                last = c.value;
            }
        }
    }
}

#[test]
fn controllers_are_deterministic() {
    let p = Pendulum::new(PendulumParams::default());
    let c = CartPole::new(CartPoleParams::default());
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for _ in 0..20 {
        let a = [rng.random_range(-10.0..0.0), rng.random_range(-5.0..1.0)];
        assert_eq!(p.value(&a).unwrap(), p.value(&a).unwrap());
        let b = [
            rng.random_range(-2.0..0.0),
            rng.random_range(-2.0..1.5),
            rng.random_range(-2.0..7.0),
        ];
        assert_eq!(c.value(&b).unwrap(), c.value(&b).unwrap());
    }
}
