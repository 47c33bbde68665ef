use cutoff_core::advisor::{
    argmin_continuation_cost, best_response_iteration, classify_policy, continuation_cost, detect_t_small, mvi,
    objective, optimal_threshold, policy_curve, CurveBeliefs, MVI_STEP,
};
use cutoff_core::model::{ComplexityBelief, Primitives, Regime, Setting, Technology};
use cutoff_core::numerics::log_space;
use cutoff_core::oracle::{grid_argmax_threshold, mc_payoff, McConfig, McPolicy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const JITTER: f64 = 2e-3;

fn configs(tech: Technology) -> Vec<Setting> {
    [(1.0, 2.0, 1.0), (0.5, 2.0, 1.0), (2.0, 3.0, 0.5), (1.0, 1.5, 2.0)]
        .into_iter()
        .map(|(v, g, l)| {
            let mut s = Setting::benchmark(Primitives::new(v, g, l).unwrap());
            s.tech = tech;
            s
        })
        .collect()
}

fn monotone_everywhere(regime: Regime, tech: Technology) {
    let grid = log_space(1e-4, 10.0, 60);
    let mut failures = Vec::new();
    for s in configs(tech) {
        let c = policy_curve(&grid, &regime, &s).unwrap();
        let drop = c.max_decrease();
        if drop > JITTER {
            failures.push(format!("{:?}: max decrease {drop:.4}", s.prim));
        }
    }
    assert!(failures.is_empty(), "{regime:?} {tech:?}\n{}", failures.join("\n"));
}

#[test]
fn naive_policy_is_monotone_multiplicative() {
    monotone_everywhere(Regime::Naive, Technology::Multiplicative);
}

#[test]
fn naive_policy_is_monotone_additive() {
    monotone_everywhere(Regime::Naive, Technology::Additive);
}

#[test]
fn separating_policy_is_monotone_multiplicative() {
    monotone_everywhere(Regime::Separating, Technology::Multiplicative);
}

#[test]
fn separating_policy_is_monotone_additive() {
    monotone_everywhere(Regime::Separating, Technology::Additive);
}

#[test]
fn no_test_below_small_complexity() {
    let s = Setting::benchmark(Primitives::new(1.0, 2.0, 1.0).unwrap());
    let grid = log_space(1e-4, 10.0, 60);
    let report = detect_t_small(&grid, &Regime::Naive, &s).unwrap();
    let t_small = report.t_small.expect("a no-test corner");
    assert!(t_small > 0.0);
    let below: Vec<f64> = log_space(1e-5, t_small, 12).into_iter().filter(|&t| t < t_small).collect();
    let curve = policy_curve(&below, &Regime::Naive, &s).unwrap();
    assert!(curve.theta_values.iter().all(|&th| th == 0.0), "{:?}", curve.theta_values);
}

#[test]
fn large_complexity_minimizes_continuation_cost() {
    for l in [0.5, 1.0, 2.0] {
        let s = Setting::benchmark(Primitives::new(1.0, 2.0, l).unwrap());
        let t = 100.0 / l;
        let th = optimal_threshold(t, &Regime::Naive, &s).unwrap().theta_star;
        let argmin = argmin_continuation_cost(t, &Regime::Naive, &s).unwrap();
        let dist = argmin.iter().map(|a| (a - th).abs()).fold(f64::INFINITY, f64::min);
        assert!(dist <= 5e-2, "λ={l}: θ*={th}, argmin {argmin:?}");
        let floor = argmin
            .iter()
            .map(|&a| continuation_cost(a, t, &Regime::Naive, &s).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert!(continuation_cost(th, t, &Regime::Naive, &s).unwrap() <= floor + 1e-9);
    }
}

#[test]
fn analytic_objective_agrees_with_simulation() {
    let mut rng = ChaCha8Rng::seed_from_u64(20_251_016);
    for i in 0..10 {
        let prim = Primitives::new(rng.random_range(0.5..2.0), rng.random_range(1.5..3.0), rng.random_range(0.5..2.0)).unwrap();
        let mut s = Setting::benchmark(prim);
        if i % 2 == 1 {
            s.tech = Technology::Additive;
        }
        let t = rng.random_range(0.05..1.0);
        let th = rng.random_range(0.05..0.95);
        let analytic = objective(t, th, &Regime::Naive, &s).unwrap().total;
        let mut cfg = McConfig::new(1_000_000, 1000 + i);
        cfg.t_dist = Some(ComplexityBelief::PointMass { t });
        let est = mc_payoff(McPolicy::Constant(th), &Regime::Naive, &s, &cfg).unwrap();
        assert!(
            (est.mean - analytic).abs() <= 3.0 * est.stderr,
            "config {i}: analytic {analytic}, simulated {} ± {}",
            est.mean,
            est.stderr
        );
    }
}

#[test]
fn grid_oracle_brackets_the_threshold_optimizer() {
    let step = 1e-3;
    for tech in [Technology::Multiplicative, Technology::Additive] {
        for regime in [Regime::Naive, Regime::Separating] {
            let mut s = Setting::benchmark(Primitives::new(1.0, 2.0, 1.0).unwrap());
            s.tech = tech;
            for t in [0.05, 0.3, 0.8] {
                let prod = optimal_threshold(t, &regime, &s).unwrap();
                let grid = grid_argmax_threshold(t, &regime, &s, step).unwrap();
                let grid_value = objective(t, grid, &regime, &s).unwrap().total;
                // ties may resolve to different points; the values must then agree
                assert!(
                    (grid - prod.theta_star).abs() <= 2.0 * step || (grid_value - prod.value).abs() <= 1e-6,
                    "{tech:?} {regime:?} T={t}: grid {grid}, production {}",
                    prod.theta_star
                );
                assert!(prod.value >= grid_value - 1e-9);
            }
        }
    }
}

#[test]
fn pooled_blocks_have_zero_marginal_informativeness_after_convergence() {
    let s = Setting::benchmark(Primitives::new(1.0, 2.0, 1.0).unwrap());
    let grid = log_space(1e-3, 3.0, 24);
    let start = policy_curve(&grid, &Regime::Naive, &s).unwrap();
    let (curve, report) = best_response_iteration(&start, 12, &s, 1e-6).unwrap();
    assert!(report.converged, "best-response iteration did not converge: {report:?}");
    let beliefs = CurveBeliefs::new(&curve, 1e-6).unwrap();
    for b in classify_policy(&curve, 1e-6).blocks {
        if b.theta_bar <= 0.0 || b.theta_bar + MVI_STEP > 1.0 {
            continue;
        }
        for i in b.start + 1..b.end {
            let m = mvi(curve.t_grid[i], b.theta_bar, MVI_STEP, &beliefs, &s).unwrap();
            assert!(m.abs() <= 10.0 * MVI_STEP, "block {b:?}, T={}: mvi {m}", curve.t_grid[i]);
        }
    }
}
