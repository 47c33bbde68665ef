//! Brute-force and Monte-Carlo references for the test suite.
//!
//! Nothing here is used by the production paths. The grid oracles scan
//! plainly and integrate with composite Simpson rules; the Monte-Carlo
//! payoff simulates agents one at a time.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::advisor::{objective, solve_branches, BeliefRule, PolicyCurve};
use crate::error::{Error, Result};
use crate::model::{AbilityBranch, Branch, ComplexityBelief, PosteriorShape, Primitives, Setting, Technology};

/// Simpson panels per posterior piece in the effort oracle.
const SIMPSON_PANELS: usize = 400;

fn reach(tech: Technology, theta: f64, e: f64) -> f64 {
    match tech {
        Technology::Multiplicative => theta * e,
        Technology::Additive => theta + e,
    }
}

fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let n = panels + panels % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// Exhaustive scan of `V·P(success) − e^γ` over `{0, step, …}` and `e_max`.
///
/// The success probability is the integral of `P(T ≤ reach(θ, e))` over the
/// branch posterior, by Simpson's rule. Ties keep the smaller effort.
pub fn grid_argmax_effort(
    ab: &AbilityBranch,
    belief: &ComplexityBelief,
    tech: Technology,
    prim: &Primitives,
    e_max: f64,
    step: f64,
) -> Result<f64> {
    if !(step > 0.0) {
        return Err(Error::InvalidParameter {
            name: "step",
            value: step,
            reason: "must be positive",
        });
    }
    if !(e_max > 0.0) {
        return Err(Error::InvalidParameter {
            name: "e_max",
            value: e_max,
            reason: "must be positive",
        });
    }
    let post = match ab.posterior() {
        Ok(p) => p,
        Err(Error::EmptyBranch) => return Ok(0.0),
        Err(err) => return Err(err),
    };
    let success = |e: f64| -> f64 {
        match post.shape {
            PosteriorShape::Atom { theta } => belief.cdf(reach(tech, theta, e)),
            PosteriorShape::Piecewise { .. } => post
                .pieces()
                .iter()
                .filter(|(lo, hi, d)| hi > lo && *d > 0.0)
                .map(|&(lo, hi, d)| d * simpson(|th| belief.cdf(reach(tech, th, e)), lo, hi, SIMPSON_PANELS))
                .sum::<f64>(),
        }
    };
    let value = |e: f64| prim.v * success(e) - prim.cost(e);

    let n = (e_max / step).floor() as usize;
    let mut points: Vec<f64> = (0..=n).map(|i| i as f64 * step).filter(|&e| e < e_max).collect();
    points.push(e_max);
    let values: Vec<f64> = points.par_iter().map(|&e| value(e)).collect();
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    Ok(points[best])
}

/// Exhaustive scan of the advisor objective over `θ* ∈ {0, step, …, 1}`.
/// Ties keep the smaller threshold.
pub fn grid_argmax_threshold<R: BeliefRule + ?Sized>(t: f64, rule: &R, setting: &Setting, step: f64) -> Result<f64> {
    if !(step > 0.0) {
        return Err(Error::InvalidParameter {
            name: "step",
            value: step,
            reason: "must be positive",
        });
    }
    let n = (1.0 / step).round() as usize;
    let points: Vec<f64> = (0..=n).map(|i| (i as f64 * step).min(1.0)).collect();
    let values = points
        .par_iter()
        .map(|&th| Ok(objective(t, th, rule, setting)?.total))
        .collect::<Result<Vec<f64>>>()?;
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    Ok(points[best])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(draws)`.
    pub stderr: f64,
    pub draws: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy)]
pub enum McPolicy<'a> {
    Constant(f64),
    Curve(&'a PolicyCurve),
}

impl McPolicy<'_> {
    fn threshold(&self, t: f64) -> f64 {
        match self {
            McPolicy::Constant(th) => *th,
            McPolicy::Curve(c) => c.threshold_at(t),
        }
    }
}

/// How simulated agents pick effort.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum McEfforts {
    /// Solve each branch under the belief rule.
    #[default]
    Solve,
    Fixed { pass: f64, fail: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub draws: u64,
    pub seed: u64,
    /// Complexity distribution; `None` uses the prior.
    pub t_dist: Option<ComplexityBelief>,
    pub efforts: McEfforts,
}

impl McConfig {
    pub fn new(draws: u64, seed: u64) -> Self {
        McConfig {
            draws,
            seed,
            t_dist: None,
            efforts: McEfforts::Solve,
        }
    }
}

pub const MIN_DRAWS: u64 = 10_000;

/// Draws per independently seeded stream.
const SHARD: u64 = 1 << 16;

type BeliefKey = (u8, u64, u64, u64);

fn belief_key(b: &ComplexityBelief) -> BeliefKey {
    match *b {
        ComplexityBelief::Prior { lambda } => (0, lambda.to_bits(), 0, 0),
        ComplexityBelief::PointMass { t } => (1, t.to_bits(), 0, 0),
        ComplexityBelief::TruncExp { lambda, a, b } => (2, lambda.to_bits(), a.to_bits(), b.to_bits()),
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let d = x - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, o: Moments) -> Moments {
        if self.n == 0.0 {
            return o;
        }
        if o.n == 0.0 {
            return self;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        Moments {
            n,
            mean: self.mean + d * o.n / n,
            m2: self.m2 + o.m2 + d * d * self.n * o.n / n,
        }
    }
}

/// Simulated advisor payoff `V·1{success} − C(e) − k(θ*)`.
///
/// Each draw takes complexity by inverse CDF, ability uniformly, and a test
/// outcome from the noise rates. Shard `i` uses stream `i` of a ChaCha8
/// generator seeded with `seed`; shard moments are merged in order, so the
/// estimate is bit-for-bit reproducible regardless of thread count.
pub fn mc_payoff<R: BeliefRule + ?Sized>(
    policy: McPolicy<'_>,
    rule: &R,
    setting: &Setting,
    config: &McConfig,
) -> Result<McEstimate> {
    setting.validate()?;
    if config.draws < MIN_DRAWS {
        return Err(Error::InvalidParameter {
            name: "draws",
            value: config.draws as f64,
            reason: "at least 10000 draws are required",
        });
    }
    let prim = setting.prim;
    let t_dist = config.t_dist.unwrap_or_else(|| prim.prior());
    t_dist.validate()?;
    let shards = config.draws.div_ceil(SHARD);

    let run_shard = |shard: u64| -> Result<Moments> {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(shard);
        let count = SHARD.min(config.draws - shard * SHARD);
        let mut cache: HashMap<(u64, BeliefKey), [f64; 2]> = HashMap::new();
        let mut m = Moments::default();
        for _ in 0..count {
            let t = t_dist.quantile(rng.random::<f64>());
            let theta: f64 = rng.random();
            let u: f64 = rng.random();
            let theta_star = policy.threshold(t).clamp(0.0, 1.0);
            let (pass_below, pass_above) = setting.noise.outcome_rates(Branch::Pass);
            let pass = u < if theta >= theta_star { pass_above } else { pass_below };
            let efforts = match config.efforts {
                McEfforts::Fixed { pass, fail } => [pass, fail],
                McEfforts::Solve => {
                    let belief = rule.belief(&prim, t, theta_star);
                    let key = (theta_star.to_bits(), belief_key(&belief));
                    match cache.get(&key) {
                        Some(e) => *e,
                        None => {
                            let solved = solve_branches(theta_star, &belief, setting)?;
                            let e = [0, 1].map(|i| solved[i].map_or(0.0, |b| b.effort.e));
                            cache.insert(key, e);
                            e
                        }
                    }
                }
            };
            let e = if pass { efforts[0] } else { efforts[1] };
            let win = if setting.tech.succeeds(theta, e, t) { prim.v } else { 0.0 };
            m.push(win - prim.cost(e) - setting.posting.eval(theta_star));
        }
        Ok(m)
    };

    let parts = (0..shards).into_par_iter().map(run_shard).collect::<Result<Vec<_>>>()?;
    let m = parts.into_iter().fold(Moments::default(), Moments::merge);
    let var = if m.n > 1.0 { m.m2 / (m.n - 1.0) } else { 0.0 };
    Ok(McEstimate {
        mean: m.mean,
        stderr: (var / m.n).sqrt(),
        draws: config.draws,
        seed: config.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Regime, TestNoise};

    fn prim() -> Primitives {
        Primitives::new(1.0, 2.0, 1.0).unwrap()
    }

    #[test]
    fn effort_oracle_finds_the_benchmark() {
        let ab = AbilityBranch::new(Branch::Pass, 0.5, TestNoise::NOISELESS).unwrap();
        let e = grid_argmax_effort(&ab, &prim().prior(), Technology::Multiplicative, &prim(), 2.0, 1e-3).unwrap();
        assert!((e - 0.298).abs() < 1.5e-3, "{e}");
        let zero = Primitives::new(0.0, 2.0, 1.0).unwrap();
        assert_eq!(
            grid_argmax_effort(&ab, &zero.prior(), Technology::Multiplicative, &zero, 2.0, 1e-2).unwrap(),
            0.0
        );
    }

    #[test]
    fn coarse_step_compares_the_ends() {
        let ab = AbilityBranch::new(Branch::Pass, 0.5, TestNoise::NOISELESS).unwrap();
        let e = grid_argmax_effort(&ab, &prim().prior(), Technology::Multiplicative, &prim(), 0.2, 1.0).unwrap();
        assert_eq!(e, 0.2);
    }

    #[test]
    fn threshold_oracle_corner() {
        let s = Setting::benchmark(prim());
        assert_eq!(grid_argmax_threshold(1e-6, &Regime::Naive, &s, 1e-2).unwrap(), 0.0);
    }

    #[test]
    fn degenerate_payoffs() {
        let s = Setting::benchmark(Primitives::new(0.0, 2.0, 1.0).unwrap());
        let mut cfg = McConfig::new(20_000, 7);
        cfg.efforts = McEfforts::Fixed { pass: 0.0, fail: 0.0 };
        let est = mc_payoff(McPolicy::Constant(0.5), &Regime::Naive, &s, &cfg).unwrap();
        assert_eq!((est.mean, est.stderr), (0.0, 0.0));

        let s = Setting::benchmark(prim());
        cfg.t_dist = Some(ComplexityBelief::PointMass { t: 0.0 });
        let est = mc_payoff(McPolicy::Constant(0.5), &Regime::Naive, &s, &cfg).unwrap();
        assert_eq!(est.mean, 1.0);
    }

    #[test]
    fn reproducible_for_a_seed() {
        let s = Setting::benchmark(prim());
        let cfg = McConfig::new(100_000, 42);
        let a = mc_payoff(McPolicy::Constant(0.5), &Regime::Naive, &s, &cfg).unwrap();
        let b = mc_payoff(McPolicy::Constant(0.5), &Regime::Naive, &s, &cfg).unwrap();
        assert_eq!(a, b);
        let c = mc_payoff(McPolicy::Constant(0.5), &Regime::Naive, &s, &McConfig::new(100_000, 43)).unwrap();
        assert_ne!(a.mean, c.mean);
        assert!(mc_payoff(McPolicy::Constant(0.5), &Regime::Naive, &s, &McConfig::new(10, 1)).is_err());
    }
}
