use cutoff_core::numerics::{
    find_root_bracketed, integrate, lambert_w0, log_space, maximize_1d, Bracket, Tolerance,
};
use proptest::prelude::*;

#[test]
fn lambert_identity_on_log_grid() {
    for c in log_space(1e-8, 1e8, 200) {
        let w = lambert_w0(c).unwrap();
        assert!((w * w.exp() - c).abs() <= 1e-10 * c.max(1.0), "c = {c}");
    }
}

/// Integrand, lower limit, upper limit, exact value.
type Case = (Box<dyn Fn(f64) -> f64>, f64, f64, f64);

#[test]
fn calibration_integrals() {
    let tol = Tolerance::new(1e-12, 1e-12, 200).unwrap();
    let cases: Vec<Case> = vec![
        (Box::new(|x| x * x), 0.0, 1.0, 1.0 / 3.0),
        (Box::new(f64::sin), 0.0, std::f64::consts::PI, 2.0),
        (Box::new(|x| (-x).exp()), 0.0, f64::INFINITY, 1.0),
        (Box::new(|x| 1.0 / (1.0 + x * x)), -1.0, 1.0, std::f64::consts::FRAC_PI_2),
        (Box::new(|x: f64| x.sqrt()), 0.0, 4.0, 16.0 / 3.0),
        (Box::new(|x: f64| x * (-2.0 * x).exp()), 0.0, f64::INFINITY, 0.25),
    ];
    for (i, (f, a, b, exact)) in cases.into_iter().enumerate() {
        let got = integrate(f, a, b, tol).unwrap();
        assert!((got - exact).abs() < 1e-9, "case {i}: {got} vs {exact}");
    }
}

proptest! {
    #[test]
    fn root_stays_in_bracket(lo in -10.0..0.0f64, width in 0.5..20.0f64, frac in 0.01..0.99f64) {
        let hi = lo + width;
        let r = lo + frac * width;
        let f = |x: f64| (x - r) * (1.0 + 0.1 * x * x);
        let tol = Tolerance::default();
        let x = find_root_bracketed(f, Bracket::new(lo, hi).unwrap(), tol).unwrap();
        prop_assert!(x >= lo && x <= hi);
        prop_assert!((x - r).abs() < 1e-8);
    }

    #[test]
    fn concave_quadratic_vertex(vertex in -5.0..5.0f64, curv in 0.01..100.0f64, pad in 0.1..5.0f64) {
        let tol = Tolerance::new(1e-8, 1e-12, 200).unwrap();
        let m = maximize_1d(|x| -curv * (x - vertex).powi(2), vertex - pad, vertex + 2.0 * pad, tol).unwrap();
        prop_assert!((m.arg - vertex).abs() <= tol.abs.max(1e-6 / curv.sqrt()));
    }
}
