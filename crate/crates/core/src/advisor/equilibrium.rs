use serde::{Deserialize, Serialize};

use super::policy::{check_grid, flat_blocks, policy_curve, PooledBlock};
use super::{BeliefRule, PolicyCurve};
use crate::error::Result;
use crate::model::{ComplexityBelief, Primitives, Setting};

/// Beliefs obtained by inverting a policy curve.
///
/// A threshold on a flat block of the curve reveals only that complexity lies
/// in the block, giving a truncated exponential; a block touching either end
/// of the grid is extended to `0` or `+inf`. A threshold on a strictly
/// increasing stretch reveals complexity exactly, found by linear
/// interpolation. Thresholds outside the range of the curve are treated as
/// its nearest end.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveBeliefs {
    curve: PolicyCurve,
    blocks: Vec<PooledBlock>,
    flat_tol: f64,
}

impl CurveBeliefs {
    pub fn new(curve: &PolicyCurve, flat_tol: f64) -> Result<Self> {
        check_grid(&curve.t_grid, "T_grid")?;
        Ok(CurveBeliefs {
            curve: curve.clone(),
            blocks: flat_blocks(curve, flat_tol),
            flat_tol,
        })
    }

    pub fn blocks(&self) -> &[PooledBlock] {
        &self.blocks
    }

    fn block_belief(&self, lambda: f64, b: &PooledBlock) -> ComplexityBelief {
        let n = self.curve.len();
        ComplexityBelief::TruncExp {
            lambda,
            a: if b.start == 0 { 0.0 } else { b.t1 },
            b: if b.end + 1 == n { f64::INFINITY } else { b.t2 },
        }
    }

    fn invert(&self, lambda: f64, theta: f64) -> ComplexityBelief {
        let (ts, th) = (&self.curve.t_grid, &self.curve.theta_values);
        if ts.is_empty() {
            return ComplexityBelief::Prior { lambda };
        }
        let lo = th.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = th.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let theta = theta.clamp(lo, hi);
        if let Some(b) = self.blocks.iter().find(|b| (theta - b.theta_bar).abs() <= self.flat_tol) {
            return self.block_belief(lambda, b);
        }
        for i in 0..th.len() {
            if th[i] == theta {
                return ComplexityBelief::PointMass { t: ts[i] };
            }
            if i + 1 < th.len() && th[i] < theta && theta < th[i + 1] {
                let s = (theta - th[i]) / (th[i + 1] - th[i]);
                return ComplexityBelief::PointMass {
                    t: ts[i] + s * (ts[i + 1] - ts[i]),
                };
            }
        }
        // Only reachable for non-monotone curves: take the closest point.
        let i = (0..th.len())
            .min_by(|&i, &j| (th[i] - theta).abs().total_cmp(&(th[j] - theta).abs()))
            .unwrap_or(0);
        ComplexityBelief::PointMass { t: ts[i] }
    }
}

impl BeliefRule for CurveBeliefs {
    fn belief(&self, prim: &Primitives, _t: f64, theta_star: f64) -> ComplexityBelief {
        self.invert(prim.lambda, theta_star)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationReport {
    pub rounds: usize,
    /// Sup-norm change of the last round; `None` when no round ran.
    pub last_change: Option<f64>,
    pub converged: bool,
}

/// Stop once a round moves no threshold by more than this.
pub const CONVERGENCE_TOL: f64 = 1e-4;

/// Alternate between beliefs inverted from the current curve and the
/// advisor's best response to them.
///
/// Convergence is not guaranteed; the report carries the last change.
pub fn best_response_iteration(
    initial: &PolicyCurve,
    rounds: usize,
    setting: &Setting,
    flat_tol: f64,
) -> Result<(PolicyCurve, IterationReport)> {
    let mut current = initial.clone();
    let mut report = IterationReport {
        rounds: 0,
        last_change: None,
        converged: false,
    };
    for _ in 0..rounds {
        let beliefs = CurveBeliefs::new(&current, flat_tol)?;
        let next = policy_curve(&current.t_grid, &beliefs, setting)?;
        let change = next.sup_distance(&current);
        current = next;
        report.rounds += 1;
        report.last_change = Some(change);
        if change <= CONVERGENCE_TOL {
            report.converged = true;
            break;
        }
    }
    Ok((current, report))
}
