//! The agent's continuation effort after observing a test outcome.
//!
//! For beliefs with a density the effort solves `C'(e) = R(e)`, where the
//! marginal benefit is `R(e) = V·E[θ·g̃(θe)]` (multiplicative technology) or
//! `V·E[g̃(θ+e)]` (additive), the expectation running over the branch
//! posterior of ability. A point-mass belief turns effort into a cutoff
//! problem that is solved by comparing stationary points and kinks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    AbilityBranch, AbilityPosterior, Branch, ComplexityBelief, PosteriorShape, Primitives, Technology, TestNoise,
};
use crate::numerics::{find_root_bracketed, maximize_1d_with, Bracket, Tolerance};

/// Quadrature tolerance for kernels; tight enough that closed forms and
/// quadrature agree to better than 1e-8.
pub(crate) const KERNEL_TOL: Tolerance = Tolerance {
    abs: 1e-14,
    rel: 1e-12,
    max_iter: 500,
};

const ROOT_TOL: Tolerance = Tolerance {
    abs: 1e-13,
    rel: 1e-12,
    max_iter: 200,
};

/// How a solution was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EffortMethod {
    /// Root of the first-order condition.
    FirstOrder,
    /// Zero effort because the marginal benefit vanishes at zero.
    Corner,
    /// Best of a global scan plus stationary points and kinks.
    DirectSearch,
    /// Branch that is never reached; effort is set to zero.
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffortSolution {
    pub e: f64,
    pub interior: bool,
    /// `C'(e) − R(e)`; zero when no density exists.
    pub residual: f64,
    pub objective_value: f64,
    pub degenerate: bool,
    pub method: EffortMethod,
}

impl EffortSolution {
    fn degenerate() -> Self {
        EffortSolution {
            e: 0.0,
            interior: false,
            residual: 0.0,
            objective_value: 0.0,
            degenerate: true,
            method: EffortMethod::Degenerate,
        }
    }
}

/// `h(x) = (1 − e^{−x}(1 + x)) / x²`, so that `∫₀^a θe^{−uθ}dθ = a²·h(ua)`.
fn h(x: f64) -> f64 {
    if x.abs() < 0.1 {
        // Σ_{n≥2} (−1)^n (n−1)/n! x^{n−2}
        let mut sum = 0.0;
        let mut fact = 2.0;
        let mut pow = 1.0;
        for n in 2..20 {
            if n > 2 {
                fact *= n as f64;
                pow *= -x;
            }
            let term = (n - 1) as f64 / fact * pow;
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        (1.0 - (-x).exp() * (1.0 + x)) / (x * x)
    }
}

/// `(1 − e^{−uw}) / u`, continuous at `u = 0`.
fn e1(u: f64, w: f64) -> f64 {
    if u == 0.0 {
        w
    } else {
        -(-u * w).exp_m1() / u
    }
}

/// Exponential density with rate `lambda` restricted to `[a, b]`; `mass` is
/// the prior mass of the window, so the density is `λe^{−λ(x−a)}/mass`.
#[derive(Debug, Clone, Copy)]
struct ExpWindow {
    lambda: f64,
    a: f64,
    b: f64,
    mass: f64,
}

impl ExpWindow {
    fn of(belief: &ComplexityBelief) -> Option<Self> {
        match *belief {
            ComplexityBelief::Prior { lambda } => Some(ExpWindow {
                lambda,
                a: 0.0,
                b: f64::INFINITY,
                mass: 1.0,
            }),
            ComplexityBelief::TruncExp { lambda, a, b } => Some(ExpWindow {
                lambda,
                a,
                b,
                mass: if b.is_infinite() {
                    1.0
                } else {
                    -(-lambda * (b - a)).exp_m1()
                },
            }),
            ComplexityBelief::PointMass { .. } => None,
        }
    }

    /// Range of ability on which `x(θ)` lands inside the window, for the
    /// map `θ ↦ θe` or `θ ↦ θ + e`.
    fn ability_range(&self, e: f64, tech: Technology) -> (f64, f64) {
        match tech {
            Technology::Multiplicative => (self.a / e, self.b / e),
            Technology::Additive => (self.a - e, self.b - e),
        }
    }

    /// `E[θ·g̃(θe)]` or `E[g̃(θ+e)]` in closed form over a piecewise-uniform posterior.
    fn kernel(&self, e: f64, post: &AbilityPosterior, tech: Technology, belief: &ComplexityBelief) -> f64 {
        let (lambda, a, m) = (self.lambda, self.a, self.mass);
        if let PosteriorShape::Atom { theta } = post.shape {
            let d = |x: f64| belief.density(x).unwrap_or(0.0);
            return match tech {
                Technology::Multiplicative => theta * d(theta * e),
                Technology::Additive => d(theta + e),
            };
        }
        if tech == Technology::Multiplicative && e == 0.0 {
            let g0 = if a == 0.0 { lambda / m } else { 0.0 };
            return g0 * post.mean();
        }
        let (lo_cut, hi_cut) = self.ability_range(e, tech);
        let u = lambda * e;
        let mut sum = 0.0;
        for (l, r, d) in post.pieces() {
            let (l, r) = (l.max(lo_cut), r.min(hi_cut));
            if r <= l {
                continue;
            }
            let w = r - l;
            sum += d * match tech {
                // θ = l + s: e^{−λ(le−a)} ∫₀ʷ (l + s) e^{−us} ds
                Technology::Multiplicative => {
                    lambda / m * (-lambda * (l * e - a)).exp() * (l * e1(u, w) + w * w * h(u * w))
                }
                Technology::Additive => (-lambda * (l + e - a)).exp() * -(-lambda * w).exp_m1() / m,
            };
        }
        sum
    }

    /// `P(success)` in closed form over a piecewise-uniform posterior.
    fn success(&self, e: f64, post: &AbilityPosterior, tech: Technology, belief: &ComplexityBelief) -> f64 {
        let (lambda, a, m) = (self.lambda, self.a, self.mass);
        if let PosteriorShape::Atom { theta } = post.shape {
            return match tech {
                Technology::Multiplicative => belief.cdf(theta * e),
                Technology::Additive => belief.cdf(theta + e),
            };
        }
        if tech == Technology::Multiplicative && e == 0.0 {
            return 0.0;
        }
        let (lo_cut, hi_cut) = self.ability_range(e, tech);
        let u = lambda * e;
        let mut sum = 0.0;
        for (l, r, d) in post.pieces() {
            let (wl, wr) = (l.max(lo_cut), r.min(hi_cut));
            if wr > wl {
                let w = wr - wl;
                let decayed = match tech {
                    Technology::Multiplicative => (-lambda * (wl * e - a)).exp() * e1(u, w),
                    Technology::Additive => (-lambda * (wl + e - a)).exp() * e1(lambda, w),
                };
                sum += d * (w - decayed) / m;
            }
            // beyond the window success is certain
            let sure = (r - l.max(hi_cut)).max(0.0);
            sum += d * sure;
        }
        sum.clamp(0.0, 1.0)
    }
}

/// Marginal benefit `R(e)` for one branch of the test.
pub fn marginal_benefit(
    e: f64,
    ab: &AbilityBranch,
    belief: &ComplexityBelief,
    tech: Technology,
    prim: &Primitives,
) -> Result<f64> {
    let post = ab.posterior()?;
    marginal_benefit_posterior(e, &post, belief, tech, prim)
}

/// `R(e)` by adaptive quadrature only; used to cross-check the closed forms.
pub fn marginal_benefit_quadrature(
    e: f64,
    ab: &AbilityBranch,
    belief: &ComplexityBelief,
    tech: Technology,
    prim: &Primitives,
) -> Result<f64> {
    let post = ab.posterior()?;
    kernel_quadrature(e, &post, belief, tech, prim)
}

pub(crate) fn marginal_benefit_posterior(
    e: f64,
    post: &AbilityPosterior,
    belief: &ComplexityBelief,
    tech: Technology,
    prim: &Primitives,
) -> Result<f64> {
    check_effort(e)?;
    match *belief {
        ComplexityBelief::PointMass { .. } => Err(Error::PointMassHasNoDensity),
        _ => {
            let win = ExpWindow::of(belief).ok_or(Error::PointMassHasNoDensity)?;
            Ok(prim.v * win.kernel(e, post, tech, belief))
        }
    }
}

fn check_effort(e: f64) -> Result<()> {
    if e >= 0.0 && e.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain { what: "effort", value: e })
    }
}

fn kernel_quadrature(
    e: f64,
    post: &AbilityPosterior,
    belief: &ComplexityBelief,
    tech: Technology,
    prim: &Primitives,
) -> Result<f64> {
    check_effort(e)?;
    if belief.is_point_mass() {
        return Err(Error::PointMassHasNoDensity);
    }
    let (a, b) = belief.support();
    let dens = |x: f64| belief.density(x).unwrap_or(0.0);
    let value = match tech {
        Technology::Multiplicative => {
            let breaks: Vec<f64> = if e > 0.0 { vec![a / e, b / e] } else { Vec::new() };
            post.expect(|t| t * dens(t * e), &breaks, KERNEL_TOL)?
        }
        Technology::Additive => post.expect(|t| dens(t + e), &[a - e, b - e], KERNEL_TOL)?,
    };
    Ok(prim.v * value)
}

/// Probability of success at effort `e`, averaged over the branch posterior
/// and the complexity belief.
pub(crate) fn success_probability(
    e: f64,
    post: &AbilityPosterior,
    belief: &ComplexityBelief,
    tech: Technology,
) -> Result<f64> {
    check_effort(e)?;
    match *belief {
        ComplexityBelief::PointMass { t } => Ok(post.tail(tech.ability_cutoff(e, t))),
        _ => {
            let win = ExpWindow::of(belief).ok_or(Error::PointMassHasNoDensity)?;
            Ok(win.success(e, post, tech, belief))
        }
    }
}

/// Success probability on one branch by quadrature of `G̃`; a cross-check
/// for the closed forms.
pub fn success_probability_quadrature(
    e: f64,
    ab: &AbilityBranch,
    belief: &ComplexityBelief,
    tech: Technology,
) -> Result<f64> {
    check_effort(e)?;
    let post = ab.posterior()?;
    if let ComplexityBelief::PointMass { t } = *belief {
        return Ok(post.tail(tech.ability_cutoff(e, t)));
    }
    let (a, b) = belief.support();
    match tech {
        Technology::Multiplicative => {
            let breaks: Vec<f64> = if e > 0.0 { vec![a / e, b / e] } else { Vec::new() };
            post.expect(|t| belief.cdf(t * e), &breaks, KERNEL_TOL)
        }
        Technology::Additive => post.expect(|t| belief.cdf(t + e), &[a - e, b - e], KERNEL_TOL),
    }
}

/// The agent's continuation payoff `V·P(success | e) − e^γ` on one branch.
pub fn agent_objective(
    e: f64,
    ab: &AbilityBranch,
    belief: &ComplexityBelief,
    tech: Technology,
    prim: &Primitives,
) -> Result<f64> {
    let post = ab.posterior()?;
    Ok(prim.v * success_probability(e, &post, belief, tech)? - prim.cost(e))
}

/// Optimal continuation effort on one branch.
pub fn solve_effort(
    ab: &AbilityBranch,
    belief: &ComplexityBelief,
    tech: Technology,
    prim: &Primitives,
) -> Result<EffortSolution> {
    prim.validate()?;
    belief.validate()?;
    let post = ab.posterior()?;
    solve_effort_posterior(&post, belief, tech, prim)
}

pub(crate) fn solve_effort_posterior(
    post: &AbilityPosterior,
    belief: &ComplexityBelief,
    tech: Technology,
    prim: &Primitives,
) -> Result<EffortSolution> {
    let payoff = |e: f64| -> Result<f64> { Ok(prim.v * success_probability(e, post, belief, tech)? - prim.cost(e)) };

    if prim.v == 0.0 {
        return Ok(EffortSolution {
            e: 0.0,
            interior: false,
            residual: 0.0,
            objective_value: 0.0,
            degenerate: false,
            method: EffortMethod::Corner,
        });
    }

    if let ComplexityBelief::PointMass { t } = *belief {
        let e = point_mass_effort(post, t, tech, prim)?;
        return Ok(EffortSolution {
            e,
            interior: false,
            residual: 0.0,
            objective_value: payoff(e)?,
            degenerate: false,
            method: EffortMethod::DirectSearch,
        });
    }

    let r = |e: f64| marginal_benefit_posterior(e, post, belief, tech, prim);
    if belief.has_nonincreasing_density() {
        let r0 = r(0.0)?;
        if r0 <= 0.0 {
            return Ok(EffortSolution {
                e: 0.0,
                interior: false,
                residual: -r0,
                objective_value: payoff(0.0)?,
                degenerate: false,
                method: EffortMethod::Corner,
            });
        }
        // R is nonincreasing, so C'(e) exceeds R(e) once it exceeds R(0).
        let e_hi = prim.inverse_marginal_cost(r0) + 1.0;
        let foc = |e: f64| prim.marginal_cost(e) - r(e).unwrap_or(f64::NAN);
        let e = find_root_bracketed(foc, Bracket::new(0.0, e_hi)?, ROOT_TOL)?;
        return Ok(EffortSolution {
            e,
            interior: true,
            residual: prim.marginal_cost(e) - r(e)?,
            objective_value: payoff(e)?,
            degenerate: false,
            method: EffortMethod::FirstOrder,
        });
    }

    // A truncation away from zero makes the density increase from 0 to a
    // jump at `a`, so the payoff need not be concave: search globally.
    let e_max = prim.v.powf(1.0 / prim.gamma);
    let scan_points = 1024;
    let f = |e: f64| payoff(e).unwrap_or(f64::NAN);
    let best = maximize_1d_with(f, 0.0, e_max, scan_points, ROOT_TOL)?;
    let mut e = best.arg;
    let mut value = best.value;

    // Polish an interior maximizer on the first-order condition.
    if e > 0.0 && e < e_max {
        let step = e_max / scan_points as f64;
        let (lo, hi) = ((e - 2.0 * step).max(0.0), (e + 2.0 * step).min(e_max));
        let foc = |x: f64| prim.marginal_cost(x) - r(x).unwrap_or(f64::NAN);
        if let Ok(br) = Bracket::new(lo, hi) {
            if foc(lo) < 0.0 && foc(hi) > 0.0 {
                let polished = find_root_bracketed(foc, br, ROOT_TOL)?;
                let pv = payoff(polished)?;
                if pv >= value {
                    e = polished;
                    value = pv;
                }
            }
        }
    }
    Ok(EffortSolution {
        e,
        interior: e > 0.0,
        residual: prim.marginal_cost(e) - r(e)?,
        objective_value: value,
        degenerate: false,
        method: EffortMethod::DirectSearch,
    })
}

/// Effort when complexity is known to be `t`.
///
/// Success means ability clears a cutoff that falls with effort, so the
/// payoff is smooth between the efforts at which the cutoff crosses an edge
/// of the piecewise-uniform posterior. Inside each piece the first-order
/// condition has a closed-form root; these roots, the edges and zero are
/// compared together with the best point of a global scan.
fn point_mass_effort(post: &AbilityPosterior, t: f64, tech: Technology, prim: &Primitives) -> Result<f64> {
    let (v, gamma) = (prim.v, prim.gamma);
    let e_max = v.powf(1.0 / gamma);
    let mut cands = vec![0.0, e_max];
    let edges: Vec<f64> = match post.shape {
        PosteriorShape::Atom { theta } => vec![theta],
        PosteriorShape::Piecewise { .. } => post.pieces().iter().flat_map(|&(lo, hi, _)| [lo, hi]).collect(),
    };
    match tech {
        Technology::Multiplicative => {
            cands.extend(edges.iter().filter(|&&th| th > 0.0).map(|&th| t / th));
            for (lo, hi, d) in post.pieces() {
                let e = (v * d * t / gamma).powf(1.0 / (gamma + 1.0));
                if e > 0.0 && (lo..=hi).contains(&(t / e)) {
                    cands.push(e);
                }
            }
        }
        Technology::Additive => {
            cands.extend(edges.iter().map(|&th| t - th));
            for (lo, hi, d) in post.pieces() {
                let e = (v * d / gamma).powf(1.0 / (gamma - 1.0));
                if (lo..=hi).contains(&(t - e)) {
                    cands.push(e);
                }
            }
        }
    }
    let payoff = |e: f64| v * post.tail(tech.ability_cutoff(e, t)) - prim.cost(e);
    if e_max > 0.0 {
        cands.push(maximize_1d_with(payoff, 0.0, e_max, 1024, ROOT_TOL)?.arg);
    }
    cands.retain(|&e| e >= 0.0 && e <= e_max && e.is_finite());
    cands.sort_by(f64::total_cmp);

    let mut best = (0.0, payoff(0.0));
    for e in cands {
        let p = payoff(e);
        if p > best.1 {
            best = (e, p);
        }
    }
    Ok(best.0)
}

/// Efforts after a pass and after a fail at threshold `theta_star`.
///
/// A branch that cannot occur (fail at `theta_star = 0` without noise) gets
/// zero effort and the degenerate flag. The pass branch at `theta_star = 1`
/// has probability zero but keeps its limit posterior, an atom at ability 1.
pub fn effort_pair(
    theta_star: f64,
    belief: &ComplexityBelief,
    tech: Technology,
    noise: TestNoise,
    prim: &Primitives,
) -> Result<(EffortSolution, EffortSolution)> {
    let solve = |branch: Branch| -> Result<EffortSolution> {
        let ab = AbilityBranch::new(branch, theta_star, noise)?;
        match ab.posterior() {
            Err(Error::EmptyBranch) => Ok(EffortSolution::degenerate()),
            Err(err) => Err(err),
            Ok(post) => {
                let mut sol = solve_effort_posterior(&post, belief, tech, prim)?;
                sol.degenerate = post.weight == 0.0;
                Ok(sol)
            }
        }
    };
    prim.validate()?;
    belief.validate()?;
    Ok((solve(Branch::Pass)?, solve(Branch::Fail)?))
}

/// Efforts under two nested pooled intervals `[a, b_inner] ⊂ [a, b_outer]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InformativenessProbe {
    pub a: f64,
    pub b_inner: f64,
    pub b_outer: f64,
    pub e_inner: f64,
    pub e_outer: f64,
}

impl InformativenessProbe {
    /// `e_inner − e_outer`; positive when the sharper belief induces more effort.
    pub fn difference(&self) -> f64 {
        self.e_inner - self.e_outer
    }
}

/// Compare branch efforts under the coarser and the finer of two nested
/// truncated-exponential beliefs. The sign is reported, not assumed.
pub fn informativeness_probe(
    ab: &AbilityBranch,
    tech: Technology,
    prim: &Primitives,
    a: f64,
    b_inner: f64,
    b_outer: f64,
) -> Result<InformativenessProbe> {
    if !(b_inner <= b_outer) {
        return Err(Error::InvalidRange {
            lo: b_inner,
            hi: b_outer,
        });
    }
    let lambda = prim.lambda;
    let inner = ComplexityBelief::TruncExp { lambda, a, b: b_inner };
    let outer = ComplexityBelief::TruncExp { lambda, a, b: b_outer };
    Ok(InformativenessProbe {
        a,
        b_inner,
        b_outer,
        e_inner: solve_effort(ab, &inner, tech, prim)?.e,
        e_outer: solve_effort(ab, &outer, tech, prim)?.e,
    })
}
