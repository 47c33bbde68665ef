//! Closed-form bounds that partition the parameter space into regions where
//! separation is guaranteed and where pooling cannot be ruled out.
//!
//! The pooling benchmark `Ū_pool` is the best payoff from a single effort
//! against the exponential prior. The separating bound `U̲_sep` is the value
//! of the policy family `θ*_α(T) = min{1, T/(αV^{1/γ})}` with pass effort
//! `αV^{1/γ}`. Their difference `Φ` changes sign at the boundary `λ*`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::advisor::{check_grid, expected_constant_value, optimal_threshold};
use crate::error::{Error, Result};
use crate::model::{ComplexityBelief, Setting, Technology};
use crate::numerics::{find_bracket, find_root_bracketed, lambert_w0, lin_space, log_space, maximize_1d, Bracket, Tolerance};

/// Policy knob `α ∈ (0, 1]` of the separating family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparatingKnob {
    alpha: f64,
}

impl SeparatingKnob {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha > 0.0 && alpha <= 1.0 {
            Ok(SeparatingKnob { alpha })
        } else {
            Err(Error::InvalidParameter {
                name: "alpha",
                value: alpha,
                reason: "must lie in (0, 1]",
            })
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

impl Default for SeparatingKnob {
    fn default() -> Self {
        SeparatingKnob { alpha: 0.5 }
    }
}

fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be positive and finite",
        })
    }
}

fn check_inputs(lambda: f64, v: f64, gamma: f64) -> Result<()> {
    check_positive("lambda", lambda)?;
    if !(v >= 0.0 && v.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "V",
            value: v,
            reason: "must be finite and nonnegative",
        });
    }
    if !(gamma > 1.0 && gamma.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "gamma",
            value: gamma,
            reason: "must exceed 1",
        });
    }
    Ok(())
}

const ROOT_TOL: Tolerance = Tolerance {
    abs: 1e-15,
    rel: 1e-14,
    max_iter: 200,
};

/// Pooling benchmark `max_e V(1 − e^{−λe}) − e^γ`.
///
/// With `z = λe` the first-order condition reads `z^{γ−1}e^z = (V/γ)λ^γ`,
/// solved in `s = ln z` where the left side is `(γ−1)s + e^s`, strictly
/// increasing. The value is evaluated as `V(1 − e^{−z}) − (z/λ)^γ`, which
/// equals `V − z^{γ−1}(z + γ)/λ^γ` at the root but does not cancel when the
/// value is tiny.
pub fn u_pool(lambda: f64, v: f64, gamma: f64) -> Result<f64> {
    check_inputs(lambda, v, gamma)?;
    if v == 0.0 {
        return Ok(0.0);
    }
    let rhs = (v / gamma).ln() + gamma * lambda.ln();
    let f = |s: f64| (gamma - 1.0) * s + s.exp() - rhs;
    // f(s) ≥ (γ−1)s − rhs below, ≥ e^s − |rhs| above: grow until the sign changes
    let mut lo = -1.0;
    let mut hi = 1.0;
    let mut width = 2.0;
    while f(lo) > 0.0 {
        width *= 2.0;
        lo -= width;
    }
    width = 2.0;
    while f(hi) < 0.0 {
        width *= 2.0;
        hi += width;
    }
    let s = find_root_bracketed(f, Bracket::new(lo, hi)?, ROOT_TOL)?;
    let z = s.exp();
    let value = v * -(-z).exp_m1() - (z / lambda).powf(gamma);
    Ok(value.max(0.0))
}

/// Quadratic-cost pooling benchmark via Lambert W:
/// `V − (W(c)² + 2W(c))/λ²` with `c = Vλ²/2`.
pub fn u_pool_quadratic(lambda: f64, v: f64) -> Result<f64> {
    check_inputs(lambda, v, 2.0)?;
    if v == 0.0 {
        return Ok(0.0);
    }
    let w = lambert_w0(0.5 * v * lambda * lambda)?;
    Ok((v - (w * w + 2.0 * w) / (lambda * lambda)).max(0.0))
}

/// `1 − (1 − e^{−x})/x`, by its series where the closed form cancels.
fn sep_bracket(x: f64) -> f64 {
    if x < 1e-4 {
        x / 2.0 - x * x / 6.0 + x * x * x / 24.0
    } else {
        (x + (-x).exp_m1()) / x
    }
}

/// Value of the separating family at knob `α`:
/// `(1 − α^γ)V·[1 − (1 − e^{−x})/x]`, `x = λαV^{1/γ}`.
pub fn u_sep_bound(lambda: f64, v: f64, gamma: f64, knob: SeparatingKnob) -> Result<f64> {
    check_inputs(lambda, v, gamma)?;
    let alpha = knob.alpha;
    if v == 0.0 {
        return Ok(0.0);
    }
    let x = lambda * alpha * v.powf(1.0 / gamma);
    Ok((1.0 - alpha.powf(gamma)) * v * sep_bracket(x))
}

/// Sign class of `Φ` at tolerance `PHI_TOL`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PartitionClass {
    SeparatingByBounds,
    Boundary,
    PoolingSustainableByBounds,
}

impl PartitionClass {
    pub fn label(self) -> &'static str {
        match self {
            PartitionClass::SeparatingByBounds => "separating",
            PartitionClass::Boundary => "boundary",
            PartitionClass::PoolingSustainableByBounds => "pooling",
        }
    }
}

pub const PHI_TOL: f64 = 1e-9;

fn classify(phi: f64) -> PartitionClass {
    if phi > PHI_TOL {
        PartitionClass::SeparatingByBounds
    } else if phi < -PHI_TOL {
        PartitionClass::PoolingSustainableByBounds
    } else {
        PartitionClass::Boundary
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartitionPoint {
    pub lambda: f64,
    pub v: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub u_sep: f64,
    pub u_pool: f64,
    pub phi: f64,
    pub classification: PartitionClass,
}

/// `Φ = U̲_sep − Ū_pool` with its sign class.
pub fn phi(lambda: f64, v: f64, gamma: f64, knob: SeparatingKnob) -> Result<PartitionPoint> {
    let u_sep = u_sep_bound(lambda, v, gamma, knob)?;
    let u_pool = u_pool(lambda, v, gamma)?;
    let phi = u_sep - u_pool;
    Ok(PartitionPoint {
        lambda,
        v,
        gamma,
        alpha: knob.alpha,
        u_sep,
        u_pool,
        phi,
        classification: classify(phi),
    })
}

pub const DEFAULT_LAMBDA_RANGE: (f64, f64) = (1e-3, 1e3);

/// Search grid in `λ`: 40 log-spaced points up to 1 and 40 evenly spaced
/// points from 1, restricted to `[lo, hi]`.
pub fn mixed_lambda_grid(lo: f64, hi: f64) -> Vec<f64> {
    let mut grid = Vec::with_capacity(80);
    if lo < 1.0 {
        grid.extend(log_space(lo, hi.min(1.0), 40));
    }
    if hi > 1.0 {
        grid.extend(lin_space(lo.max(1.0), hi, 40));
    }
    grid.dedup();
    grid
}

/// Zero of `Φ(·; V, γ, α)` on `range` (default `[1e-3, 1e3]`).
pub fn lambda_star(v: f64, gamma: f64, knob: SeparatingKnob, range: Option<(f64, f64)>) -> Result<f64> {
    let (lo, hi) = range.unwrap_or(DEFAULT_LAMBDA_RANGE);
    check_positive("lambda", lo)?;
    if !(hi > lo) {
        return Err(Error::InvalidRange { lo, hi });
    }
    let f = |l: f64| phi(l, v, gamma, knob).map_or(f64::NAN, |p| p.phi);
    let grid = mixed_lambda_grid(lo, hi);
    let bracket = find_bracket(f, &grid)?;
    let tol = Tolerance::new(1e-12, 1e-12, 200)?;
    find_root_bracketed(f, bracket, tol)
}

/// Number of sign changes of `Φ` along the default search grid.
pub fn phi_sign_changes(v: f64, gamma: f64, knob: SeparatingKnob) -> Result<usize> {
    let grid = mixed_lambda_grid(DEFAULT_LAMBDA_RANGE.0, DEFAULT_LAMBDA_RANGE.1);
    let signs = grid
        .iter()
        .map(|&l| Ok(phi(l, v, gamma, knob)?.phi.signum()))
        .collect::<Result<Vec<f64>>>()?;
    Ok(signs.windows(2).filter(|w| w[0] != w[1]).count())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryAxis {
    #[serde(rename = "V")]
    V,
    Gamma,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCurve {
    pub axis: BoundaryAxis,
    pub grid: Vec<f64>,
    /// `None` where `Φ` keeps one sign over the search range.
    pub lambda_star_values: Vec<Option<f64>>,
}

fn trace(axis: BoundaryAxis, grid: &[f64], solve: impl Fn(f64) -> Result<f64> + Sync) -> Result<BoundaryCurve> {
    let values = grid
        .par_iter()
        .map(|&x| match solve(x) {
            Ok(l) => Ok(Some(l)),
            Err(Error::NoCrossing { .. }) => Ok(None),
            Err(err) => Err(err),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundaryCurve {
        axis,
        grid: grid.to_vec(),
        lambda_star_values: values,
    })
}

/// `λ*` as a function of `V` at fixed `γ`.
pub fn boundary_vs_v(v_grid: &[f64], gamma: f64, knob: SeparatingKnob) -> Result<BoundaryCurve> {
    check_grid(v_grid, "V_grid")?;
    trace(BoundaryAxis::V, v_grid, |v| lambda_star(v, gamma, knob, None))
}

/// `λ*` as a function of `γ` at fixed `V`.
pub fn boundary_vs_gamma(gamma_grid: &[f64], v: f64, knob: SeparatingKnob) -> Result<BoundaryCurve> {
    check_grid(gamma_grid, "gamma_grid")?;
    trace(BoundaryAxis::Gamma, gamma_grid, |g| lambda_star(v, g, knob, None))
}

/// Measured versus predicted small- and large-`λ` behaviour of the bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticReport {
    /// `U̲_sep(λ)/λ` at `λ = 1e-4` and its limit `½(1−α^γ)αV^{1+1/γ}`.
    pub sep_slope: f64,
    pub sep_slope_target: f64,
    pub sep_slope_rel_err: f64,
    /// Log–log slope of `Ū_pool` between `λ = 1e-4` and `1e-3`, against `γ/(γ−1)`.
    pub pool_exponent: f64,
    pub pool_exponent_target: f64,
    pub pool_exponent_rel_err: f64,
    /// Values at `λ = 1e3` against `(1−α^γ)V` and `V`.
    pub sep_limit: f64,
    pub sep_limit_target: f64,
    pub pool_limit: f64,
    pub pool_limit_target: f64,
}

impl AsymptoticReport {
    pub fn sep_limit_gap(&self) -> f64 {
        (self.sep_limit - self.sep_limit_target).abs()
    }

    pub fn pool_limit_gap(&self) -> f64 {
        (self.pool_limit - self.pool_limit_target).abs()
    }
}

fn rel_err(value: f64, target: f64) -> f64 {
    if target == 0.0 {
        value.abs()
    } else {
        ((value - target) / target).abs()
    }
}

pub fn asymptotic_check(v: f64, gamma: f64, knob: SeparatingKnob) -> Result<AsymptoticReport> {
    check_inputs(1.0, v, gamma)?;
    let alpha = knob.alpha;
    let scale = 1.0 - alpha.powf(gamma);

    let small = 1e-4;
    let sep_slope = u_sep_bound(small, v, gamma, knob)? / small;
    let sep_slope_target = 0.5 * scale * alpha * v.powf(1.0 + 1.0 / gamma);

    let (l1, l2) = (1e-4, 1e-3);
    let pool_exponent = (u_pool(l2, v, gamma)?.ln() - u_pool(l1, v, gamma)?.ln()) / (l2.ln() - l1.ln());
    let pool_exponent_target = gamma / (gamma - 1.0);

    let large = 1e3;
    Ok(AsymptoticReport {
        sep_slope,
        sep_slope_target,
        sep_slope_rel_err: rel_err(sep_slope, sep_slope_target),
        pool_exponent,
        pool_exponent_target,
        pool_exponent_rel_err: rel_err(pool_exponent, pool_exponent_target),
        sep_limit: u_sep_bound(large, v, gamma, knob)?,
        sep_limit_target: scale * v,
        pool_limit: u_pool(large, v, gamma)?,
        pool_limit_target: v,
    })
}

/// Whether the bounds already rule out pooling under the Intuitive Criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IcVerdict {
    PoolingEliminated,
    PoolingSustainableByBounds,
    Boundary,
}

pub fn ic_diagnostic(lambda: f64, v: f64, gamma: f64, knob: SeparatingKnob) -> Result<IcVerdict> {
    Ok(match phi(lambda, v, gamma, knob)?.classification {
        PartitionClass::SeparatingByBounds => IcVerdict::PoolingEliminated,
        PartitionClass::PoolingSustainableByBounds => IcVerdict::PoolingSustainableByBounds,
        PartitionClass::Boundary => IcVerdict::Boundary,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VoiReport {
    /// `E_T[max_θ U(T, θ)]`
    pub informed: f64,
    /// `max_θ E_T[U(T, θ)]`
    pub uninformed: f64,
    pub best_constant_threshold: f64,
    /// `informed − uninformed`
    pub raw: f64,
    /// `raw` floored at zero.
    pub value: f64,
}

/// Remaining prior mass beyond the cut of the outer expectation.
pub const VOI_TAIL_MASS: f64 = 1e-10;

const VOI_TOL: Tolerance = Tolerance {
    abs: 1e-9,
    rel: 1e-9,
    max_iter: 400,
};

/// Gain from choosing the threshold after observing complexity rather than
/// before, with complexity drawn from `t_dist` and the agent holding
/// `t_dist` as a naive belief. `t_grid` adds panel edges to the outer
/// quadrature.
pub fn value_of_information(setting: &Setting, t_dist: &ComplexityBelief, t_grid: &[f64]) -> Result<VoiReport> {
    setting.validate()?;
    t_dist.validate()?;
    check_grid(t_grid, "T_grid")?;
    let best_at = |t: f64| optimal_threshold(t, t_dist, setting).map_or(f64::NAN, |c| c.value);
    // The integrand only moves while some agent can still succeed; beyond
    // that it is flat, and a single panel over the whole tail misses the
    // structure near zero.
    let e_max = setting.prim.v.powf(1.0 / setting.prim.gamma);
    let reach = match setting.tech {
        Technology::Multiplicative => e_max,
        Technology::Additive => 1.0 + e_max,
    };
    let mut breaks: Vec<f64> = t_grid.to_vec();
    breaks.extend(lin_space(0.0, reach, 33));
    breaks.extend((1..32).map(|k| t_dist.quantile(k as f64 / 32.0)));
    breaks.retain(|x| x.is_finite());
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let informed = t_dist.expect(best_at, &breaks, VOI_TAIL_MASS, VOI_TOL)?;

    let constant = |th: f64| expected_constant_value(th, t_dist, t_dist, setting).unwrap_or(f64::NAN);
    let best = maximize_1d(constant, 0.0, 1.0, Tolerance::default())?;
    let raw = informed - best.value;
    Ok(VoiReport {
        informed,
        uninformed: best.value,
        best_constant_threshold: best.arg,
        raw,
        value: raw.max(0.0),
    })
}
