//! The advisor's problem: the value `U(T, θ*)` of posting threshold `θ*`
//! when complexity is `T`, its maximization over thresholds, policy curves
//! across complexity levels and their classification.

mod equilibrium;
mod policy;

pub use equilibrium::{best_response_iteration, CurveBeliefs, IterationReport};
pub(crate) use policy::check_grid;
pub use policy::{
    classify_policy, detect_t_small, policy_curve, policy_curve_with, PolicyClass, PolicyCurve, PooledBlock,
    SmallTReport, TaxonomyReport,
};

use serde::{Deserialize, Serialize};

use crate::effort::{solve_effort_posterior, EffortSolution};
use crate::error::{Error, Result};
use crate::model::{
    AbilityBranch, AbilityPosterior, Branch, ComplexityBelief, Primitives, Regime, Setting,
};
use crate::numerics::{Maximizer, Maximum};

/// Maps the true complexity and the posted threshold to the agent's belief
/// about complexity at the effort stage.
pub trait BeliefRule: Sync {
    fn belief(&self, prim: &Primitives, t: f64, theta_star: f64) -> ComplexityBelief;
}

impl BeliefRule for Regime {
    fn belief(&self, prim: &Primitives, t: f64, _theta_star: f64) -> ComplexityBelief {
        Regime::belief(self, prim, t)
    }
}

impl BeliefRule for ComplexityBelief {
    fn belief(&self, _prim: &Primitives, _t: f64, _theta_star: f64) -> ComplexityBelief {
        *self
    }
}

/// Components of the advisor's value at one `(T, θ*)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveBreakdown {
    pub theta_star: f64,
    pub success_prob: f64,
    pub effort_cost: f64,
    pub posting_cost: f64,
    pub total: f64,
    pub e_pass: f64,
    pub e_fail: f64,
}

/// A branch that occurs with positive probability or is kept as a limit.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SolvedBranch {
    pub post: AbilityPosterior,
    pub effort: EffortSolution,
}

/// Posteriors and efforts of both branches; `None` marks an empty branch.
pub(crate) fn solve_branches(
    theta_star: f64,
    belief: &ComplexityBelief,
    setting: &Setting,
) -> Result<[Option<SolvedBranch>; 2]> {
    let mut out = [None, None];
    for (slot, branch) in out.iter_mut().zip([Branch::Pass, Branch::Fail]) {
        let ab = AbilityBranch::new(branch, theta_star, setting.noise)?;
        *slot = match ab.posterior() {
            Err(Error::EmptyBranch) => None,
            Err(err) => return Err(err),
            Ok(post) => Some(SolvedBranch {
                post,
                effort: solve_effort_posterior(&post, belief, setting.tech, &setting.prim)?,
            }),
        };
    }
    Ok(out)
}

fn breakdown(t: f64, theta_star: f64, branches: &[Option<SolvedBranch>; 2], setting: &Setting) -> ObjectiveBreakdown {
    let mut success = 0.0;
    let mut cost = 0.0;
    for b in branches.iter().flatten() {
        let cutoff = setting.tech.ability_cutoff(b.effort.e, t);
        success += b.post.weight * b.post.tail(cutoff);
        cost += b.post.weight * setting.prim.cost(b.effort.e);
    }
    let success = success.clamp(0.0, 1.0);
    let posting = setting.posting.eval(theta_star);
    let effort_of = |i: usize| branches[i].map_or(0.0, |b| b.effort.e);
    ObjectiveBreakdown {
        theta_star,
        success_prob: success,
        effort_cost: cost,
        posting_cost: posting,
        total: setting.prim.v * success - cost - posting,
        e_pass: effort_of(0),
        e_fail: effort_of(1),
    }
}

fn check_complexity(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "complexity",
            value: t,
        })
    }
}

/// Advisor's value `U(T, θ*)` with efforts solved under the belief rule.
pub fn objective<R: BeliefRule + ?Sized>(
    t: f64,
    theta_star: f64,
    rule: &R,
    setting: &Setting,
) -> Result<ObjectiveBreakdown> {
    check_complexity(t)?;
    let theta_star = AbilityBranch::new(Branch::Pass, theta_star, setting.noise)?.theta_star;
    let belief = rule.belief(&setting.prim, t, theta_star);
    belief.validate()?;
    let branches = solve_branches(theta_star, &belief, setting)?;
    Ok(breakdown(t, theta_star, &branches, setting))
}

/// Advisor's value when the branch efforts are given rather than solved.
pub fn objective_with_efforts(
    t: f64,
    theta_star: f64,
    e_pass: f64,
    e_fail: f64,
    setting: &Setting,
) -> Result<ObjectiveBreakdown> {
    check_complexity(t)?;
    let mut branches = [None, None];
    for ((slot, branch), e) in branches.iter_mut().zip([Branch::Pass, Branch::Fail]).zip([e_pass, e_fail]) {
        let ab = AbilityBranch::new(branch, theta_star, setting.noise)?;
        if let Ok(post) = ab.posterior() {
            *slot = Some(SolvedBranch {
                post,
                effort: EffortSolution {
                    e,
                    interior: false,
                    residual: 0.0,
                    objective_value: f64::NAN,
                    degenerate: post.weight == 0.0,
                    method: crate::effort::EffortMethod::DirectSearch,
                },
            });
        }
    }
    let theta_star = theta_star.clamp(0.0, 1.0);
    Ok(breakdown(t, theta_star, &branches, setting))
}

/// Continuation cost `𝒞(θ*)`: branch-weighted effort cost.
pub fn continuation_cost<R: BeliefRule + ?Sized>(theta_star: f64, t: f64, rule: &R, setting: &Setting) -> Result<f64> {
    Ok(objective(t, theta_star, rule, setting)?.effort_cost)
}

/// Thresholds that minimize `𝒞` over `[0, 1]`, all within `TIE_RTOL` of the minimum.
pub fn argmin_continuation_cost<R: BeliefRule + ?Sized>(t: f64, rule: &R, setting: &Setting) -> Result<Vec<f64>> {
    let f = |th: f64| -continuation_cost(th, t, rule, setting).unwrap_or(f64::NAN);
    let cands = Maximizer::default().candidates(f, 0.0, 1.0)?;
    Ok(tied(&cands).into_iter().map(|m| m.arg).collect())
}

/// Values within this relative distance of the best count as ties.
pub const TIE_RTOL: f64 = 1e-9;

pub(crate) fn tie_tolerance(best: f64) -> f64 {
    TIE_RTOL * best.abs().max(1.0)
}

fn tied(cands: &[Maximum]) -> Vec<Maximum> {
    let best = cands.iter().map(|m| m.value).fold(f64::NEG_INFINITY, f64::max);
    let tol = tie_tolerance(best);
    cands.iter().copied().filter(|m| m.value >= best - tol).collect()
}

/// Optimal threshold at one complexity level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdChoice {
    pub theta_star: f64,
    pub value: f64,
    /// Another, distinct threshold attains the value up to `TIE_RTOL`.
    pub near_tie: bool,
}

/// Local maxima of `U(T, ·)` on `[0, 1]` (endpoints included).
pub fn threshold_candidates<R: BeliefRule + ?Sized>(
    t: f64,
    rule: &R,
    setting: &Setting,
    maximizer: &Maximizer,
) -> Result<Vec<Maximum>> {
    check_complexity(t)?;
    let f = |th: f64| objective(t, th, rule, setting).map_or(f64::NAN, |o| o.total);
    maximizer.candidates(f, 0.0, 1.0)
}

/// Distinct thresholds closer than this are the same choice.
pub(crate) const SAME_THRESHOLD: f64 = 1e-6;

/// Maximize `U(T, ·)` over `[0, 1]`; ties go to the smaller threshold.
///
/// `θ* = 1` fails everyone and so also stands for any threshold above the
/// ability support.
pub fn optimal_threshold<R: BeliefRule + ?Sized>(t: f64, rule: &R, setting: &Setting) -> Result<ThresholdChoice> {
    let cands = threshold_candidates(t, rule, setting, &Maximizer::default())?;
    Ok(choose(&cands, None))
}

/// Choose among candidate maxima. Without `prev` the smallest tied threshold
/// wins; with `prev` the smallest tied threshold not below it.
pub(crate) fn choose(cands: &[Maximum], prev: Option<f64>) -> ThresholdChoice {
    let ties = tied(cands);
    let lowest = ties[0];
    let pick = prev
        .and_then(|p| ties.iter().find(|m| m.arg >= p - SAME_THRESHOLD).copied())
        .unwrap_or(lowest);
    // θ* = 0 and θ* = 1 both leave the ability posterior at the prior, so
    // they are one and the same uninformative test.
    let as_test = |th: f64| if th >= 1.0 - SAME_THRESHOLD { 0.0 } else { th };
    let (lo, hi) = ties
        .iter()
        .map(|m| as_test(m.arg))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), x| (l.min(x), h.max(x)));
    ThresholdChoice {
        theta_star: pick.arg,
        value: pick.value,
        near_tie: hi - lo > SAME_THRESHOLD,
    }
}

/// Marginal value of informativeness: `(U(T, θ̄ + h) − U(T, θ̄)) / h`.
pub fn mvi<R: BeliefRule + ?Sized>(t: f64, theta_bar: f64, h: f64, rule: &R, setting: &Setting) -> Result<f64> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "h",
            value: h,
            reason: "must be positive",
        });
    }
    if !(theta_bar >= 0.0 && theta_bar + h <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "theta_bar",
            value: theta_bar,
            reason: "theta_bar + h must lie in [0, 1]",
        });
    }
    let hi = objective(t, theta_bar + h, rule, setting)?.total;
    let lo = objective(t, theta_bar, rule, setting)?.total;
    Ok((hi - lo) / h)
}

pub const MVI_STEP: f64 = 1e-4;
const MVI_COARSE_STEP: f64 = 1e-3;

/// MVI at the default step together with a coarser step for comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MviReport {
    pub h: f64,
    pub value: f64,
    pub coarse_h: f64,
    pub coarse_value: f64,
    /// The two steps agree within 5% (or within `10·h` absolutely).
    pub stable: bool,
}

pub fn mvi_report<R: BeliefRule + ?Sized>(t: f64, theta_bar: f64, rule: &R, setting: &Setting) -> Result<MviReport> {
    let value = mvi(t, theta_bar, MVI_STEP, rule, setting)?;
    let coarse_value = mvi(t, theta_bar, MVI_COARSE_STEP, rule, setting)?;
    let gap = (value - coarse_value).abs();
    Ok(MviReport {
        h: MVI_STEP,
        value,
        coarse_h: MVI_COARSE_STEP,
        coarse_value,
        stable: gap <= 0.05 * value.abs() || gap <= 10.0 * MVI_STEP,
    })
}

/// Expected value of a constant threshold when complexity is drawn from
/// `t_dist` and the agent holds the fixed `belief`.
///
/// Efforts do not depend on the realized complexity here, so the expectation
/// of the success indicator is the branch success probability under `t_dist`.
pub fn expected_constant_value(
    theta_star: f64,
    belief: &ComplexityBelief,
    t_dist: &ComplexityBelief,
    setting: &Setting,
) -> Result<f64> {
    let theta_star = theta_star.clamp(0.0, 1.0);
    let branches = solve_branches(theta_star, belief, setting)?;
    let mut success = 0.0;
    let mut cost = 0.0;
    for b in branches.iter().flatten() {
        success += b.post.weight * crate::effort::success_probability(b.effort.e, &b.post, t_dist, setting.tech)?;
        cost += b.post.weight * setting.prim.cost(b.effort.e);
    }
    Ok(setting.prim.v * success - cost - setting.posting.eval(theta_star))
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{PostingCost, TestNoise};
    use crate::numerics::Tolerance;

    fn bench() -> Setting {
        Setting::benchmark(Primitives::new(1.0, 2.0, 1.0).unwrap())
    }

    #[test]
    fn decomposition_at_point_two() {
        let o = objective(0.2, 0.5, &Regime::Naive, &bench()).unwrap();
        // pass branch: (1 − 0.2/e_pass) of the upper half succeeds; fail branch cannot
        let e_pass = 0.297_745_276_4;
        assert!((o.success_prob - (1.0 - 0.2 / e_pass)).abs() < 1e-9, "{o:?}");
        assert!((o.effort_cost - 0.051_538_908).abs() < 1e-8);
        assert!((o.total - 0.276_746).abs() < 1e-6);
        assert!((o.total - (o.success_prob - o.effort_cost - o.posting_cost)).abs() < 1e-12);
        let mut s = bench();
        s.posting = PostingCost::Linear { slope: 0.1 };
        let c = objective(0.2, 0.5, &Regime::Naive, &s).unwrap();
        assert!((c.total - (o.total - 0.05)).abs() < 1e-12);
    }

    #[test]
    fn three_digit_efforts_reproduce_the_rounded_decomposition() {
        let o = objective_with_efforts(0.2, 0.5, 0.298, 0.120, &bench()).unwrap();
        assert!((o.success_prob - 0.32886).abs() < 1e-5);
        assert!((o.effort_cost - 0.051602).abs() < 1e-12);
        assert!((o.total - 0.27726).abs() < 1e-5);
    }

    #[test]
    fn zero_complexity_with_zero_effort_always_succeeds() {
        let mut s = bench();
        s.posting = PostingCost::Linear { slope: 0.2 };
        for th in [0.0, 0.4, 1.0] {
            let o = objective_with_efforts(0.0, th, 0.0, 0.0, &s).unwrap();
            assert_eq!(o.success_prob, 1.0);
            assert!((o.total - (1.0 - 0.2 * th)).abs() < 1e-15);
        }
        // zero effort against positive complexity never succeeds
        let o = objective_with_efforts(0.1, 0.5, 0.0, 0.0, &s).unwrap();
        assert_eq!(o.success_prob, 0.0);
    }

    #[test]
    fn continuation_cost_fixtures() {
        let c = continuation_cost(0.5, 1.0, &Regime::Naive, &bench()).unwrap();
        assert!((c - 0.051_538_908).abs() < 1e-8);
        let c0 = continuation_cost(0.0, 1.0, &Regime::Naive, &bench()).unwrap();
        assert!((c0 - 0.046_942_207_180_818_33).abs() < 1e-10);
        let zero = Setting::benchmark(Primitives::new(0.0, 2.0, 1.0).unwrap());
        assert_eq!(continuation_cost(0.5, 1.0, &Regime::Naive, &zero).unwrap(), 0.0);
    }

    #[test]
    fn ends_of_the_threshold_range_tie_in_cost() {
        let c0 = continuation_cost(0.0, 1.0, &Regime::Naive, &bench()).unwrap();
        let c1 = continuation_cost(1.0, 1.0, &Regime::Naive, &bench()).unwrap();
        assert_eq!(c0, c1);
        let argmin = argmin_continuation_cost(100.0, &Regime::Naive, &bench()).unwrap();
        assert_eq!(argmin, vec![0.0, 1.0]);
    }

    #[test]
    fn tiny_complexity_means_no_test() {
        let c = optimal_threshold(1e-6, &Regime::Naive, &bench()).unwrap();
        assert_eq!(c.theta_star, 0.0);
        let m = mvi(1e-6, 0.0, 1e-4, &Regime::Naive, &bench()).unwrap();
        assert!(m <= 0.0);
    }

    #[test]
    fn optimum_sits_on_the_pass_kink() {
        // the best threshold passes exactly the types that will succeed:
        // θ* = T / e_pass(θ*), where U has a concave kink
        let s = bench();
        let c = optimal_threshold(0.3, &Regime::Naive, &s).unwrap();
        assert!(c.theta_star > 0.0 && c.theta_star < 1.0);
        let o = objective(0.3, c.theta_star, &Regime::Naive, &s).unwrap();
        assert!((0.3 / o.e_pass - c.theta_star).abs() < 1e-6);
        let h = 1e-4;
        let right = mvi(0.3, c.theta_star, h, &Regime::Naive, &s).unwrap();
        let left = mvi(0.3, c.theta_star - h, h, &Regime::Naive, &s).unwrap();
        assert!(right < 0.0 && left > 0.0, "{left} {right}");
    }

    #[test]
    fn mvi_is_stable_across_steps() {
        let r = mvi_report(0.3, 0.2, &Regime::Naive, &bench()).unwrap();
        assert!(r.stable, "{r:?}");
        assert!(((r.value - r.coarse_value) / r.value).abs() < 0.05);
        assert!(mvi(0.3, 0.99995, 1e-4, &Regime::Naive, &bench()).is_err());
    }

    #[test]
    fn constant_threshold_value_matches_pointwise_integral() {
        let s = bench();
        let prior = ComplexityBelief::Prior { lambda: 1.0 };
        let closed = expected_constant_value(0.4, &prior, &prior, &s).unwrap();
        let quad = prior
            .expect(
                |t| objective(t, 0.4, &Regime::Naive, &s).unwrap().total,
                &[0.1, 0.3, 0.5],
                1e-12,
                Tolerance::new(1e-11, 1e-11, 400).unwrap(),
            )
            .unwrap();
        assert!((closed - quad).abs() < 1e-7, "{closed} vs {quad}");
    }

    #[test]
    fn noisy_branches_weigh_correctly() {
        let mut s = bench();
        s.noise = TestNoise::new(0.1, 0.2).unwrap();
        let o = objective(0.0, 0.5, &Regime::Naive, &s).unwrap();
        assert!((o.success_prob - 1.0).abs() < 1e-15);
    }
}
