//! Model primitives: payoff and cost parameters, success technology, test
//! noise, posting costs, beliefs about complexity, and the ability posterior
//! after a pass/fail outcome.
//!
//! Ability is uniform on `[0, 1]`. Complexity is exponential with rate
//! `lambda` under the prior. Effort cost is `C(e) = e^gamma`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{integrate_pieces, Tolerance};

fn invalid(name: &'static str, value: f64, reason: &'static str) -> Error {
    Error::InvalidParameter { name, value, reason }
}

/// Success payoff `v`, cost exponent `gamma` and complexity rate `lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Primitives {
    pub v: f64,
    pub gamma: f64,
    pub lambda: f64,
}

impl Primitives {
    /// `v = 0` is accepted as the degenerate no-benefit case.
    pub fn new(v: f64, gamma: f64, lambda: f64) -> Result<Self> {
        let p = Primitives { v, gamma, lambda };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.v >= 0.0 && self.v.is_finite()) {
            return Err(invalid("V", self.v, "must be finite and nonnegative"));
        }
        if !(self.gamma > 1.0 && self.gamma.is_finite()) {
            return Err(invalid("gamma", self.gamma, "must exceed 1"));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(invalid("lambda", self.lambda, "must be positive"));
        }
        Ok(())
    }

    pub fn cost(&self, e: f64) -> f64 {
        e.powf(self.gamma)
    }

    pub fn marginal_cost(&self, e: f64) -> f64 {
        if e == 0.0 {
            0.0
        } else {
            self.gamma * e.powf(self.gamma - 1.0)
        }
    }

    /// Effort level at which marginal cost equals `r`.
    pub fn inverse_marginal_cost(&self, r: f64) -> f64 {
        (r.max(0.0) / self.gamma).powf(1.0 / (self.gamma - 1.0))
    }

    pub fn prior(&self) -> ComplexityBelief {
        ComplexityBelief::Prior {
            lambda: self.lambda,
        }
    }
}

/// How ability and effort combine to clear complexity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Technology {
    /// success iff `theta * e >= t`
    #[default]
    Multiplicative,
    /// success iff `theta + e >= t`
    Additive,
}

impl Technology {
    pub fn succeeds(self, theta: f64, e: f64, t: f64) -> bool {
        match self {
            Technology::Multiplicative => theta * e >= t,
            Technology::Additive => theta + e >= t,
        }
    }

    /// Smallest ability that succeeds at effort `e` against complexity `t`
    /// (`+inf` when no ability does).
    pub fn ability_cutoff(self, e: f64, t: f64) -> f64 {
        match self {
            Technology::Multiplicative => {
                if t <= 0.0 {
                    0.0
                } else if e <= 0.0 {
                    f64::INFINITY
                } else {
                    t / e
                }
            }
            Technology::Additive => t - e,
        }
    }
}

/// False-negative (`eta_minus`) and false-positive (`eta_plus`) rates of the test.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TestNoise {
    pub eta_minus: f64,
    pub eta_plus: f64,
}

impl TestNoise {
    pub const NOISELESS: TestNoise = TestNoise {
        eta_minus: 0.0,
        eta_plus: 0.0,
    };

    pub fn new(eta_minus: f64, eta_plus: f64) -> Result<Self> {
        let n = TestNoise {
            eta_minus,
            eta_plus,
        };
        n.validate()?;
        Ok(n)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("eta_minus", self.eta_minus), ("eta_plus", self.eta_plus)] {
            if !(0.0..1.0).contains(&v) {
                return Err(invalid(name, v, "must lie in [0, 1)"));
            }
        }
        Ok(())
    }

    pub fn is_noiseless(&self) -> bool {
        self.eta_minus == 0.0 && self.eta_plus == 0.0
    }

    /// Probability of the outcome `branch` for an agent below / above the threshold.
    pub fn outcome_rates(&self, branch: Branch) -> (f64, f64) {
        match branch {
            Branch::Pass => (self.eta_plus, 1.0 - self.eta_minus),
            Branch::Fail => (1.0 - self.eta_plus, self.eta_minus),
        }
    }
}

/// Cost `k(theta*)` of posting a threshold.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PostingCost {
    #[default]
    None,
    Linear { slope: f64 },
    Power { coef: f64, exponent: f64 },
}

impl PostingCost {
    pub fn validate(&self) -> Result<()> {
        match *self {
            PostingCost::None => Ok(()),
            PostingCost::Linear { slope } => {
                if slope >= 0.0 && slope.is_finite() {
                    Ok(())
                } else {
                    Err(invalid("slope", slope, "must be finite and nonnegative"))
                }
            }
            PostingCost::Power { coef, exponent } => {
                if !(coef >= 0.0 && coef.is_finite()) {
                    Err(invalid("coef", coef, "must be finite and nonnegative"))
                } else if !(exponent >= 1.0 && exponent.is_finite()) {
                    Err(invalid("exponent", exponent, "must be at least 1"))
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn eval(&self, theta_star: f64) -> f64 {
        let x = theta_star.max(0.0);
        match *self {
            PostingCost::None => 0.0,
            PostingCost::Linear { slope } => slope * x,
            PostingCost::Power { coef, exponent } => coef * x.powf(exponent),
        }
    }
}

/// The agent's belief about complexity at the effort stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ComplexityBelief {
    /// Exponential prior with rate `lambda` on `[0, inf)`.
    Prior { lambda: f64 },
    /// Complexity known to equal `t`.
    PointMass { t: f64 },
    /// Exponential with rate `lambda` truncated to `[a, b]`; `b` may be `+inf`.
    TruncExp { lambda: f64, a: f64, b: f64 },
}

impl ComplexityBelief {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ComplexityBelief::Prior { lambda } => {
                if lambda > 0.0 && lambda.is_finite() {
                    Ok(())
                } else {
                    Err(invalid("lambda", lambda, "must be positive"))
                }
            }
            ComplexityBelief::PointMass { t } => {
                if t >= 0.0 && t.is_finite() {
                    Ok(())
                } else {
                    Err(invalid("t", t, "must be finite and nonnegative"))
                }
            }
            ComplexityBelief::TruncExp { lambda, a, b } => {
                if !(lambda > 0.0 && lambda.is_finite()) {
                    Err(invalid("lambda", lambda, "must be positive"))
                } else if !(a >= 0.0 && a.is_finite()) {
                    Err(invalid("a", a, "must be finite and nonnegative"))
                } else if !(b > a) {
                    Err(invalid("b", b, "must exceed a"))
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn is_point_mass(&self) -> bool {
        matches!(self, ComplexityBelief::PointMass { .. })
    }

    /// Smallest and largest points of the support.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            ComplexityBelief::Prior { .. } => (0.0, f64::INFINITY),
            ComplexityBelief::PointMass { t } => (t, t),
            ComplexityBelief::TruncExp { a, b, .. } => (a, b),
        }
    }

    /// Density `g̃(x)`; zero outside the support.
    pub fn density(&self, x: f64) -> Result<f64> {
        match *self {
            ComplexityBelief::Prior { lambda } => Ok(if x < 0.0 {
                0.0
            } else {
                lambda * (-lambda * x).exp()
            }),
            ComplexityBelief::PointMass { .. } => Err(Error::PointMassHasNoDensity),
            ComplexityBelief::TruncExp { lambda, a, b } => Ok(if x < a || x > b {
                0.0
            } else {
                lambda * (-lambda * (x - a)).exp() / trunc_mass(lambda, b - a)
            }),
        }
    }

    /// CDF `G̃(x)`. A point mass at `t` is the step `1{x >= t}`.
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            ComplexityBelief::Prior { lambda } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-lambda * x).exp_m1()
                }
            }
            ComplexityBelief::PointMass { t } => {
                if x >= t {
                    1.0
                } else {
                    0.0
                }
            }
            ComplexityBelief::TruncExp { lambda, a, b } => {
                if x <= a {
                    0.0
                } else if x >= b {
                    1.0
                } else {
                    (-(-lambda * (x - a)).exp_m1() / trunc_mass(lambda, b - a)).min(1.0)
                }
            }
        }
    }

    /// Upper bound on the density, `None` for a point mass.
    pub fn density_sup(&self) -> Option<f64> {
        match *self {
            ComplexityBelief::Prior { lambda } => Some(lambda),
            ComplexityBelief::PointMass { .. } => None,
            ComplexityBelief::TruncExp { lambda, a, b } => Some(lambda / trunc_mass(lambda, b - a)),
        }
    }

    /// True when the density is nonincreasing on all of `[0, inf)`.
    pub fn has_nonincreasing_density(&self) -> bool {
        match *self {
            ComplexityBelief::Prior { .. } => true,
            ComplexityBelief::PointMass { .. } => false,
            ComplexityBelief::TruncExp { a, .. } => a == 0.0,
        }
    }

    /// Quantile function, used for inverse-CDF sampling.
    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        match *self {
            ComplexityBelief::Prior { lambda } => -(-u).ln_1p() / lambda,
            ComplexityBelief::PointMass { t } => t,
            ComplexityBelief::TruncExp { lambda, a, b } => {
                let m = trunc_mass(lambda, b - a);
                (a - (-u * m).ln_1p() / lambda).min(b)
            }
        }
    }

    /// `E[h(T)]`, by quadrature for densities.
    ///
    /// An unbounded exponential tail is cut where its remaining mass falls
    /// below `tail_mass`; `breaks` are extra panel edges for kinks of `h`.
    pub fn expect<F>(&self, h: F, breaks: &[f64], tail_mass: f64, tol: Tolerance) -> Result<f64>
    where
        F: Fn(f64) -> f64,
    {
        match *self {
            ComplexityBelief::PointMass { t } => Ok(h(t)),
            ComplexityBelief::Prior { lambda } => {
                let hi = -tail_mass.ln() / lambda;
                let pts = panel_edges(0.0, hi, breaks);
                integrate_pieces(|x| h(x) * lambda * (-lambda * x).exp(), &pts, tol)
            }
            ComplexityBelief::TruncExp { lambda, a, b } => {
                let hi = if b.is_finite() {
                    b
                } else {
                    a - tail_mass.ln() / lambda
                };
                let m = trunc_mass(lambda, b - a);
                let pts = panel_edges(a, hi, breaks);
                integrate_pieces(|x| h(x) * lambda * (-lambda * (x - a)).exp() / m, &pts, tol)
            }
        }
    }
}

/// `1 − e^{−λw}` for a truncation of width `w` (`w` may be infinite).
fn trunc_mass(lambda: f64, width: f64) -> f64 {
    if width.is_infinite() {
        1.0
    } else {
        -(-lambda * width).exp_m1()
    }
}

pub(crate) fn panel_edges(lo: f64, hi: f64, breaks: &[f64]) -> Vec<f64> {
    let mut pts = vec![lo];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|&x| x > lo && x < hi).collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    pts.extend(inner);
    pts.push(hi);
    pts
}

/// Test outcome observed by the agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Pass,
    Fail,
}

/// One outcome of a (possibly noisy) test at threshold `theta_star`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbilityBranch {
    pub branch: Branch,
    pub theta_star: f64,
    pub noise: TestNoise,
}

impl AbilityBranch {
    /// Thresholds are clamped to `[0, 1]`: under uniform ability a threshold
    /// above 1 fails everyone, exactly like `theta_star = 1`.
    pub fn new(branch: Branch, theta_star: f64, noise: TestNoise) -> Result<Self> {
        if theta_star.is_nan() {
            return Err(invalid("theta_star", theta_star, "must be a number"));
        }
        noise.validate()?;
        Ok(AbilityBranch {
            branch,
            theta_star: theta_star.clamp(0.0, 1.0),
            noise,
        })
    }

    pub fn posterior(&self) -> Result<AbilityPosterior> {
        branch_weight_and_density(self)
    }
}

/// Shape of the ability posterior on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PosteriorShape {
    /// Density `below` on `[0, cut)` and `above` on `[cut, 1]`.
    Piecewise { cut: f64, below: f64, above: f64 },
    /// All mass at one ability level (zero-width truncation limit).
    Atom { theta: f64 },
}

/// Ex-ante probability of a test outcome and the Bayes posterior of ability given it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbilityPosterior {
    pub weight: f64,
    pub shape: PosteriorShape,
}

/// Outcome probability and ability posterior for one branch of the test.
///
/// With constant error rates the posterior is piecewise uniform. The
/// noiseless pass branch at `theta_star = 1` has weight zero and is
/// represented by its limit, an atom at ability 1; the noiseless fail branch
/// at `theta_star = 0` is empty.
pub fn branch_weight_and_density(ab: &AbilityBranch) -> Result<AbilityPosterior> {
    let cut = ab.theta_star.clamp(0.0, 1.0);
    let (rate_below, rate_above) = ab.noise.outcome_rates(ab.branch);
    let weight = rate_below * cut + rate_above * (1.0 - cut);
    if weight > 0.0 {
        return Ok(AbilityPosterior {
            weight,
            shape: PosteriorShape::Piecewise {
                cut,
                below: rate_below / weight,
                above: rate_above / weight,
            },
        });
    }
    match ab.branch {
        Branch::Pass => Ok(AbilityPosterior {
            weight: 0.0,
            shape: PosteriorShape::Atom { theta: 1.0 },
        }),
        Branch::Fail => Err(Error::EmptyBranch),
    }
}

impl AbilityPosterior {
    /// Uniform pieces `(lo, hi, density)` with positive length and density.
    pub fn pieces(&self) -> Vec<(f64, f64, f64)> {
        match self.shape {
            PosteriorShape::Piecewise { cut, below, above } => [(0.0, cut, below), (cut, 1.0, above)]
                .into_iter()
                .filter(|&(lo, hi, d)| hi > lo && d > 0.0)
                .collect(),
            PosteriorShape::Atom { .. } => Vec::new(),
        }
    }

    pub fn density(&self, theta: f64) -> f64 {
        match self.shape {
            PosteriorShape::Piecewise { cut, below, above } => {
                if !(0.0..=1.0).contains(&theta) {
                    0.0
                } else if theta < cut {
                    below
                } else {
                    above
                }
            }
            PosteriorShape::Atom { .. } => 0.0,
        }
    }

    pub fn cdf(&self, theta: f64) -> f64 {
        match self.shape {
            PosteriorShape::Atom { theta: at } => {
                if theta >= at {
                    1.0
                } else {
                    0.0
                }
            }
            PosteriorShape::Piecewise { .. } => {
                let x = theta.clamp(0.0, 1.0);
                self.pieces()
                    .iter()
                    .map(|&(lo, hi, d)| d * (x.min(hi) - lo).max(0.0))
                    .sum::<f64>()
                    .min(1.0)
            }
        }
    }

    /// `P(theta >= c)`.
    pub fn tail(&self, c: f64) -> f64 {
        match self.shape {
            PosteriorShape::Atom { theta } => {
                if theta >= c {
                    1.0
                } else {
                    0.0
                }
            }
            PosteriorShape::Piecewise { .. } => {
                if c <= 0.0 {
                    1.0
                } else if c > 1.0 {
                    0.0
                } else {
                    self.pieces()
                        .iter()
                        .map(|&(lo, hi, d)| d * (hi - c.max(lo)).max(0.0))
                        .sum::<f64>()
                        .clamp(0.0, 1.0)
                }
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match self.shape {
            PosteriorShape::Atom { theta } => theta,
            PosteriorShape::Piecewise { .. } => self
                .pieces()
                .iter()
                .map(|&(lo, hi, d)| d * 0.5 * (hi * hi - lo * lo))
                .sum(),
        }
    }

    /// `E[h(theta)]`, splitting the quadrature at `breaks` as well as at the piece edges.
    pub fn expect<F>(&self, h: F, breaks: &[f64], tol: Tolerance) -> Result<f64>
    where
        F: Fn(f64) -> f64,
    {
        match self.shape {
            PosteriorShape::Atom { theta } => Ok(h(theta)),
            PosteriorShape::Piecewise { .. } => {
                let mut total = 0.0;
                for (lo, hi, d) in self.pieces() {
                    let pts = panel_edges(lo, hi, breaks);
                    total += d * integrate_pieces(&h, &pts, tol)?;
                }
                Ok(total)
            }
        }
    }
}

/// Everything but the belief rule that the advisor's problem depends on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Setting {
    pub prim: Primitives,
    #[serde(default)]
    pub tech: Technology,
    #[serde(default)]
    pub noise: TestNoise,
    #[serde(default)]
    pub posting: PostingCost,
}

impl Setting {
    /// Multiplicative technology, a noiseless test and free posting.
    pub fn benchmark(prim: Primitives) -> Self {
        Setting {
            prim,
            tech: Technology::Multiplicative,
            noise: TestNoise::NOISELESS,
            posting: PostingCost::None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.prim.validate()?;
        self.noise.validate()?;
        self.posting.validate()
    }
}

/// Which belief about complexity the agent holds after seeing a threshold.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Regime {
    /// The threshold is ignored; the agent keeps the exponential prior.
    #[default]
    Naive,
    /// Separating conjecture: the threshold reveals complexity exactly.
    Separating,
    /// Pooled conjecture: complexity is known to lie in `[a, b]`.
    Pooled { a: f64, b: f64 },
}

impl Regime {
    /// Belief held by the agent when the true complexity is `t`.
    pub fn belief(&self, prim: &Primitives, t: f64) -> ComplexityBelief {
        match *self {
            Regime::Naive => prim.prior(),
            Regime::Separating => ComplexityBelief::PointMass { t },
            Regime::Pooled { a, b } => ComplexityBelief::TruncExp {
                lambda: prim.lambda,
                a,
                b,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Regime::Pooled { a, b } => ComplexityBelief::TruncExp { lambda: 1.0, a, b }.validate(),
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::integrate;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn primitives_reject_bad_values() {
        assert!(Primitives::new(1.0, 2.0, 1.0).is_ok());
        assert!(Primitives::new(0.0, 2.0, 1.0).is_ok());
        assert!(Primitives::new(-1.0, 2.0, 1.0).is_err());
        assert!(Primitives::new(1.0, 1.0, 1.0).is_err());
        assert!(Primitives::new(1.0, 2.0, 0.0).is_err());
        assert!(Primitives::new(f64::NAN, 2.0, 1.0).is_err());
    }

    #[test]
    fn prior_density_at_zero_is_rate() {
        let g = ComplexityBelief::Prior { lambda: 2.0 };
        assert_eq!(g.density(0.0).unwrap(), 2.0);
    }

    #[test]
    fn truncated_density_normalization() {
        let g = ComplexityBelief::TruncExp {
            lambda: 1.0,
            a: 0.0,
            b: 1.0,
        };
        let d0 = g.density(0.0).unwrap();
        assert!((d0 - 1.0 / (1.0 - (-1.0f64).exp())).abs() < 1e-12);
        assert!((d0 - 1.581_976_706_869_326_4).abs() < 1e-9);
        assert_eq!(g.density(2.0).unwrap(), 0.0);
        assert_eq!(g.cdf(1.0), 1.0);
    }

    #[test]
    fn point_mass_has_no_density_but_a_step_cdf() {
        let g = ComplexityBelief::PointMass { t: 0.5 };
        assert_eq!(g.density(0.4), Err(Error::PointMassHasNoDensity));
        assert_eq!(g.cdf(0.4), 0.0);
        assert_eq!(g.cdf(0.6), 1.0);
        assert_eq!(g.cdf(0.5), 1.0);
    }

    #[test]
    fn prior_cdf() {
        let g = ComplexityBelief::Prior { lambda: 1.0 };
        assert_eq!(g.cdf(0.0), 0.0);
        assert!((g.cdf(0.7) - (1.0 - (-0.7f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn densities_integrate_to_one() {
        let beliefs = [
            ComplexityBelief::Prior { lambda: 0.3 },
            ComplexityBelief::Prior { lambda: 4.0 },
            ComplexityBelief::TruncExp {
                lambda: 1.0,
                a: 0.2,
                b: 3.0,
            },
            ComplexityBelief::TruncExp {
                lambda: 2.5,
                a: 1.0,
                b: f64::INFINITY,
            },
            ComplexityBelief::TruncExp {
                lambda: 1.0,
                a: 0.5,
                b: 0.5 + 1e-6,
            },
        ];
        for g in beliefs {
            let (lo, hi) = g.support();
            let mass = integrate(|x| g.density(x).unwrap(), lo, hi, tol()).unwrap();
            assert!((mass - 1.0).abs() < 1e-10, "{g:?}: {mass}");
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        let g = ComplexityBelief::TruncExp {
            lambda: 1.3,
            a: 0.4,
            b: 2.0,
        };
        for u in [0.0, 0.1, 0.5, 0.9, 1.0] {
            assert!((g.cdf(g.quantile(u)) - u).abs() < 1e-12);
        }
        let p = ComplexityBelief::Prior { lambda: 2.0 };
        assert!((p.cdf(p.quantile(0.3)) - 0.3).abs() < 1e-14);
    }

    #[test]
    fn shorter_truncation_has_higher_density() {
        let (lambda, a, b, b2) = (1.2, 0.3, 2.0, 1.1);
        let long = ComplexityBelief::TruncExp { lambda, a, b };
        let short = ComplexityBelief::TruncExp { lambda, a, b: b2 };
        for i in 0..=100 {
            let x = a + (b2 - a) * i as f64 / 100.0;
            assert!(long.density(x).unwrap() < short.density(x).unwrap());
        }
    }

    #[test]
    fn exact_pass_truncation() {
        let ab = AbilityBranch::new(Branch::Pass, 0.5, TestNoise::NOISELESS).unwrap();
        let post = ab.posterior().unwrap();
        assert_eq!(post.weight, 0.5);
        assert_eq!(post.density(0.25), 0.0);
        assert_eq!(post.density(0.75), 2.0);
        assert_eq!(post.density(0.5), 2.0);
    }

    #[test]
    fn symmetric_noise_is_uninformative() {
        let noise = TestNoise::new(0.5, 0.5).unwrap();
        let ab = AbilityBranch::new(Branch::Pass, 0.5, noise).unwrap();
        let post = ab.posterior().unwrap();
        assert!((post.weight - 0.5).abs() < 1e-15);
        for theta in [0.1, 0.4, 0.6, 0.9] {
            assert!((post.density(theta) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn false_negatives_only_keep_the_truncation() {
        let noise = TestNoise::new(0.1, 0.0).unwrap();
        let ab = AbilityBranch::new(Branch::Pass, 0.5, noise).unwrap();
        let post = ab.posterior().unwrap();
        assert!((post.weight - 0.45).abs() < 1e-15);
        assert_eq!(post.density(0.3), 0.0);
        assert!((post.density(0.7) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_branches() {
        let empty = AbilityBranch::new(Branch::Fail, 0.0, TestNoise::NOISELESS).unwrap();
        assert_eq!(empty.posterior(), Err(Error::EmptyBranch));
        let full = AbilityBranch::new(Branch::Pass, 0.0, TestNoise::NOISELESS).unwrap();
        let post = full.posterior().unwrap();
        assert_eq!(post.weight, 1.0);
        assert_eq!(post.density(0.3), 1.0);
        let top = AbilityBranch::new(Branch::Pass, 1.0, TestNoise::NOISELESS).unwrap();
        let post = top.posterior().unwrap();
        assert_eq!(post.weight, 0.0);
        assert_eq!(post.shape, PosteriorShape::Atom { theta: 1.0 });
        assert_eq!(post.mean(), 1.0);
    }

    #[test]
    fn thresholds_above_one_are_clamped() {
        let ab = AbilityBranch::new(Branch::Fail, 3.0, TestNoise::NOISELESS).unwrap();
        assert_eq!(ab.theta_star, 1.0);
        assert!(AbilityBranch::new(Branch::Fail, f64::NAN, TestNoise::NOISELESS).is_err());
    }

    #[test]
    fn posterior_moments() {
        let ab = AbilityBranch::new(Branch::Fail, 0.5, TestNoise::NOISELESS).unwrap();
        let post = ab.posterior().unwrap();
        assert!((post.mean() - 0.25).abs() < 1e-15);
        assert!((post.cdf(0.25) - 0.5).abs() < 1e-15);
        assert!((post.tail(0.25) - 0.5).abs() < 1e-15);
        let m = post.expect(|t| t, &[], tol()).unwrap();
        assert!((m - 0.25).abs() < 1e-14);
    }

    #[test]
    fn noise_rates_validated() {
        assert!(TestNoise::new(1.0, 0.0).is_err());
        assert!(TestNoise::new(0.0, -0.1).is_err());
    }

    #[test]
    fn posting_costs() {
        assert_eq!(PostingCost::None.eval(0.7), 0.0);
        assert_eq!(PostingCost::Linear { slope: 0.1 }.eval(0.5), 0.05);
        let p = PostingCost::Power {
            coef: 2.0,
            exponent: 2.0,
        };
        assert_eq!(p.eval(0.5), 0.5);
        assert_eq!(p.eval(0.0), 0.0);
        assert!(PostingCost::Power {
            coef: 1.0,
            exponent: 0.5
        }
        .validate()
        .is_err());
    }

    #[test]
    fn technology_cutoffs() {
        let m = Technology::Multiplicative;
        assert_eq!(m.ability_cutoff(0.5, 0.2), 0.4);
        assert_eq!(m.ability_cutoff(0.0, 0.2), f64::INFINITY);
        assert_eq!(m.ability_cutoff(0.0, 0.0), 0.0);
        assert!(m.succeeds(0.0, 0.0, 0.0));
        let a = Technology::Additive;
        assert!((a.ability_cutoff(0.3, 0.5) - 0.2).abs() < 1e-15);
        assert!(a.succeeds(0.2, 0.3, 0.5));
    }

    #[test]
    fn regime_beliefs() {
        let prim = Primitives::new(1.0, 2.0, 1.5).unwrap();
        assert_eq!(
            Regime::Naive.belief(&prim, 0.3),
            ComplexityBelief::Prior { lambda: 1.5 }
        );
        assert_eq!(
            Regime::Separating.belief(&prim, 0.3),
            ComplexityBelief::PointMass { t: 0.3 }
        );
        assert!(Regime::Pooled { a: 1.0, b: 0.5 }.validate().is_err());
    }
}
