use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{choose, objective, optimal_threshold, threshold_candidates, BeliefRule};
use crate::error::{Error, Result};
use crate::model::Setting;
use crate::numerics::{Maximizer, Maximum};

/// Sampled optimal policy `T ↦ θ*(T)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyCurve {
    pub t_grid: Vec<f64>,
    pub theta_values: Vec<f64>,
    pub values: Vec<f64>,
    /// Grid points where a distinct threshold was equally good.
    #[serde(default)]
    pub near_ties: Vec<bool>,
}

pub(crate) fn check_grid(grid: &[f64], name: &'static str) -> Result<()> {
    for (i, &x) in grid.iter().enumerate() {
        if !(x >= 0.0 && x.is_finite()) {
            return Err(Error::InvalidParameter {
                name,
                value: x,
                reason: "entries must be finite and nonnegative",
            });
        }
        if i > 0 && !(x > grid[i - 1]) {
            return Err(Error::InvalidRange { lo: grid[i - 1], hi: x });
        }
    }
    Ok(())
}

impl PolicyCurve {
    /// A curve with the given thresholds; `values` are left as NaN.
    pub fn from_thresholds(t_grid: Vec<f64>, theta_values: Vec<f64>) -> Result<Self> {
        check_grid(&t_grid, "T_grid")?;
        if t_grid.len() != theta_values.len() {
            return Err(Error::InvalidParameter {
                name: "theta_values",
                value: theta_values.len() as f64,
                reason: "must have one entry per grid point",
            });
        }
        if let Some(&bad) = theta_values.iter().find(|th| !(0.0..=1.0).contains(*th)) {
            return Err(Error::InvalidParameter {
                name: "theta_values",
                value: bad,
                reason: "entries must lie in [0, 1]",
            });
        }
        let n = t_grid.len();
        Ok(PolicyCurve {
            t_grid,
            theta_values,
            values: vec![f64::NAN; n],
            near_ties: vec![false; n],
        })
    }

    /// Constant threshold over a grid.
    pub fn constant(t_grid: Vec<f64>, theta: f64) -> Result<Self> {
        let n = t_grid.len();
        Self::from_thresholds(t_grid, vec![theta; n])
    }

    pub fn len(&self) -> usize {
        self.t_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_grid.is_empty()
    }

    /// Largest drop between consecutive thresholds (0 for a monotone curve).
    pub fn max_decrease(&self) -> f64 {
        self.theta_values
            .windows(2)
            .map(|w| w[0] - w[1])
            .fold(0.0, f64::max)
    }

    /// Threshold at `t` by linear interpolation, held constant outside the grid.
    pub fn threshold_at(&self, t: f64) -> f64 {
        let (ts, th) = (&self.t_grid, &self.theta_values);
        if ts.is_empty() {
            return 0.0;
        }
        if t <= ts[0] {
            return th[0];
        }
        if t >= ts[ts.len() - 1] {
            return th[th.len() - 1];
        }
        let i = ts.partition_point(|&x| x <= t) - 1;
        let s = (t - ts[i]) / (ts[i + 1] - ts[i]);
        th[i] + s * (th[i + 1] - th[i])
    }

    /// Sup-norm distance between the thresholds of two curves on one grid.
    pub fn sup_distance(&self, other: &PolicyCurve) -> f64 {
        self.theta_values
            .iter()
            .zip(&other.theta_values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Optimal thresholds along an ascending grid of complexity levels.
///
/// Each level is solved independently (in parallel); the selection then
/// walks the grid upward and, among thresholds tied for the optimum, keeps
/// the smallest one that does not fall below the previous choice. This makes
/// the reported selection monotone whenever a monotone selection exists.
pub fn policy_curve<R: BeliefRule + ?Sized>(t_grid: &[f64], rule: &R, setting: &Setting) -> Result<PolicyCurve> {
    policy_curve_with(t_grid, rule, setting, &Maximizer::default())
}

pub fn policy_curve_with<R: BeliefRule + ?Sized>(
    t_grid: &[f64],
    rule: &R,
    setting: &Setting,
    maximizer: &Maximizer,
) -> Result<PolicyCurve> {
    check_grid(t_grid, "T_grid")?;
    setting.validate()?;
    let candidates: Vec<Vec<Maximum>> = t_grid
        .par_iter()
        .map(|&t| threshold_candidates(t, rule, setting, maximizer))
        .collect::<Result<_>>()?;

    let n = t_grid.len();
    let mut curve = PolicyCurve {
        t_grid: t_grid.to_vec(),
        theta_values: Vec::with_capacity(n),
        values: Vec::with_capacity(n),
        near_ties: Vec::with_capacity(n),
    };
    let mut prev: Option<f64> = None;
    for (&t, mut cands) in t_grid.iter().zip(candidates) {
        if let Some(p) = prev {
            if !cands.iter().any(|m| m.arg == p) {
                let value = objective(t, p, rule, setting)?.total;
                cands.push(Maximum { arg: p, value });
                cands.sort_by(|a, b| a.arg.total_cmp(&b.arg));
            }
        }
        let choice = choose(&cands, prev);
        curve.theta_values.push(choice.theta_star);
        curve.values.push(choice.value);
        curve.near_ties.push(choice.near_tie);
        prev = Some(choice.theta_star);
    }
    Ok(curve)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyClass {
    Separating,
    Pooling,
    SemiSeparating,
}

/// A maximal run of (numerically) equal thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PooledBlock {
    pub t1: f64,
    pub t2: f64,
    pub theta_bar: f64,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaxonomyReport {
    pub class: PolicyClass,
    pub blocks: Vec<PooledBlock>,
    /// Complexity levels whose optimum was a near tie.
    pub flagged: Vec<f64>,
}

pub(crate) fn flat_blocks(curve: &PolicyCurve, flat_tol: f64) -> Vec<PooledBlock> {
    let th = &curve.theta_values;
    let mut blocks = Vec::new();
    let mut start = 0;
    while start < th.len() {
        let mut end = start;
        while end + 1 < th.len() && (th[end + 1] - th[end]).abs() <= flat_tol {
            end += 1;
        }
        if end > start {
            blocks.push(PooledBlock {
                t1: curve.t_grid[start],
                t2: curve.t_grid[end],
                theta_bar: th[start],
                start,
                end,
            });
        }
        start = end + 1;
    }
    blocks
}

/// Separating, pooling or semi-separating, by runs of consecutive thresholds
/// that differ by at most `flat_tol`.
pub fn classify_policy(curve: &PolicyCurve, flat_tol: f64) -> TaxonomyReport {
    let blocks = flat_blocks(curve, flat_tol);
    let n = curve.len();
    let class = match blocks.as_slice() {
        [] => PolicyClass::Separating,
        [only] if only.start == 0 && only.end + 1 == n => PolicyClass::Pooling,
        _ => PolicyClass::SemiSeparating,
    };
    let flagged = curve
        .t_grid
        .iter()
        .zip(&curve.near_ties)
        .filter(|(_, &tie)| tie)
        .map(|(&t, _)| t)
        .collect();
    TaxonomyReport { class, blocks, flagged }
}

/// Extent of the no-test corner at small complexity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmallTReport {
    /// Largest complexity at which the optimal threshold was verified to be 0
    /// (up to `DEPARTURE`), refined by bisection.
    pub t_small: Option<f64>,
    /// First grid level at which the threshold departs from 0.
    pub first_departure: Option<f64>,
}

const DEPARTURE: f64 = 1e-3;

/// Scan `t_grid` for the first level whose optimal threshold exceeds
/// `1e-3`, then bisect between it and the previous level.
pub fn detect_t_small<R: BeliefRule + ?Sized>(t_grid: &[f64], rule: &R, setting: &Setting) -> Result<SmallTReport> {
    check_grid(t_grid, "T_grid")?;
    let departs = |t: f64| -> Result<bool> { Ok(optimal_threshold(t, rule, setting)?.theta_star > DEPARTURE) };
    let mut last_zero: Option<f64> = None;
    for &t in t_grid {
        if departs(t)? {
            let Some(mut lo) = last_zero else {
                return Ok(SmallTReport {
                    t_small: None,
                    first_departure: Some(t),
                });
            };
            let mut hi = t;
            for _ in 0..60 {
                if hi - lo <= 1e-9 * hi {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                if departs(mid)? {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(SmallTReport {
                t_small: Some(lo),
                first_departure: Some(t),
            });
        }
        last_zero = Some(t);
    }
    Ok(SmallTReport {
        t_small: last_zero,
        first_departure: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Primitives, Regime};

    fn curve(th: &[f64]) -> PolicyCurve {
        let t = (1..=th.len()).map(|i| i as f64).collect();
        PolicyCurve::from_thresholds(t, th.to_vec()).unwrap()
    }

    #[test]
    fn taxonomy_examples() {
        assert_eq!(classify_policy(&curve(&[0.1, 0.2, 0.3]), 1e-9).class, PolicyClass::Separating);
        let pooled = classify_policy(&curve(&[0.4, 0.4, 0.4]), 1e-9);
        assert_eq!(pooled.class, PolicyClass::Pooling);
        assert_eq!(pooled.blocks.len(), 1);
        let semi = classify_policy(&curve(&[0.1, 0.3, 0.3, 0.5]), 1e-9);
        assert_eq!(semi.class, PolicyClass::SemiSeparating);
        let b = semi.blocks[0];
        assert_eq!((b.t1, b.t2, b.theta_bar), (2.0, 3.0, 0.3));
    }

    #[test]
    fn interpolation_and_distance() {
        let c = curve(&[0.0, 0.5, 1.0]);
        assert_eq!(c.threshold_at(1.5), 0.25);
        assert_eq!(c.threshold_at(0.0), 0.0);
        assert_eq!(c.threshold_at(9.0), 1.0);
        assert_eq!(c.sup_distance(&curve(&[0.0, 0.4, 1.0])), 0.09999999999999998);
        assert_eq!(curve(&[0.0, 0.5, 0.4]).max_decrease(), 0.09999999999999998);
    }

    #[test]
    fn bad_curves_are_rejected() {
        assert!(PolicyCurve::from_thresholds(vec![1.0, 0.5], vec![0.0, 0.0]).is_err());
        assert!(PolicyCurve::from_thresholds(vec![0.5, 1.0], vec![0.0]).is_err());
        assert!(PolicyCurve::from_thresholds(vec![0.5, 1.0], vec![0.0, 1.5]).is_err());
    }

    #[test]
    fn zero_payoff_policy_is_zero() {
        let s = Setting::benchmark(Primitives::new(0.0, 2.0, 1.0).unwrap());
        let c = policy_curve(&[0.01, 0.1, 1.0], &Regime::Naive, &s).unwrap();
        assert_eq!(c.theta_values, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn small_t_corner_is_detected() {
        let s = Setting::benchmark(Primitives::new(1.0, 2.0, 1.0).unwrap());
        let grid = crate::numerics::log_space(1e-4, 0.1, 7);
        let r = detect_t_small(&grid, &Regime::Naive, &s).unwrap();
        let ts = r.t_small.unwrap();
        assert!(ts > 1e-4 && ts < 0.1, "{r:?}");
        assert!(optimal_threshold(0.5 * ts, &Regime::Naive, &s).unwrap().theta_star == 0.0);
    }
}
