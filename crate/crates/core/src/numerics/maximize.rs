use serde::{Deserialize, Serialize};

use super::Tolerance;
use crate::error::{Error, Result};

/// A maximizer together with the attained value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Maximum {
    pub arg: f64,
    pub value: f64,
}

/// Scan-then-refine maximizer for continuous objectives with finitely many
/// kinks.
///
/// A uniform scan locates the cells holding local maxima; the best
/// `refine_cells` of them are polished with Brent's golden-section/parabolic
/// search. Both endpoints are always candidates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximizer {
    pub scan_points: usize,
    pub refine_cells: usize,
    pub tol: Tolerance,
}

impl Default for Maximizer {
    fn default() -> Self {
        Maximizer {
            scan_points: 512,
            refine_cells: 8,
            tol: Tolerance::default(),
        }
    }
}

impl Maximizer {
    pub fn with_tolerance(tol: Tolerance) -> Self {
        Maximizer {
            tol,
            ..Maximizer::default()
        }
    }

    /// All refined local maxima plus both endpoints, sorted by argument.
    pub fn candidates<F>(&self, f: F, lo: f64, hi: f64) -> Result<Vec<Maximum>>
    where
        F: Fn(f64) -> f64,
    {
        self.tol.validate()?;
        if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidRange { lo, hi });
        }
        let eval = |x: f64| -> Result<f64> {
            let v = f(x);
            if v.is_nan() {
                Err(Error::NonFinite { x, value: v })
            } else {
                Ok(v)
            }
        };
        if lo == hi {
            return Ok(vec![Maximum {
                arg: lo,
                value: eval(lo)?,
            }]);
        }

        let n = self.scan_points.max(2);
        let xs: Vec<f64> = (0..=n)
            .map(|i| {
                if i == n {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / n as f64
                }
            })
            .collect();
        let fs = xs.iter().map(|&x| eval(x)).collect::<Result<Vec<_>>>()?;

        let mut peaks: Vec<usize> = (0..=n)
            .filter(|&i| (i == 0 || fs[i] >= fs[i - 1]) && (i == n || fs[i] > fs[i + 1]))
            .collect();
        // best first; ties keep the smaller index
        peaks.sort_by(|&i, &j| fs[j].total_cmp(&fs[i]).then(i.cmp(&j)));
        peaks.truncate(self.refine_cells.max(1));

        let mut out = vec![
            Maximum {
                arg: lo,
                value: fs[0],
            },
            Maximum {
                arg: hi,
                value: fs[n],
            },
        ];
        for i in peaks {
            let a = xs[i.saturating_sub(1)];
            let b = xs[(i + 1).min(n)];
            let scanned = Maximum {
                arg: xs[i],
                value: fs[i],
            };
            let refined = golden_brent(&f, a, b, self.tol);
            out.push(match refined {
                Some(m) if m.value > scanned.value => m,
                _ => scanned,
            });
        }
        out.sort_by(|p, q| p.arg.total_cmp(&q.arg));
        out.dedup_by(|p, q| p.arg == q.arg);
        Ok(out)
    }

    /// Global maximizer; exact ties go to the smaller argument.
    pub fn maximize<F>(&self, f: F, lo: f64, hi: f64) -> Result<Maximum>
    where
        F: Fn(f64) -> f64,
    {
        let cands = self.candidates(f, lo, hi)?;
        Ok(best_of(&cands))
    }
}

pub(crate) fn best_of(cands: &[Maximum]) -> Maximum {
    let mut best = cands[0];
    for c in &cands[1..] {
        if c.value > best.value || (c.value == best.value && c.arg < best.arg) {
            best = *c;
        }
    }
    best
}

/// Maximize `f` on `[lo, hi]` with the default 512-point scan.
pub fn maximize_1d<F>(f: F, lo: f64, hi: f64, tol: Tolerance) -> Result<Maximum>
where
    F: Fn(f64) -> f64,
{
    Maximizer::with_tolerance(tol).maximize(f, lo, hi)
}

/// Maximize with an explicit scan resolution.
pub fn maximize_1d_with<F>(f: F, lo: f64, hi: f64, scan_points: usize, tol: Tolerance) -> Result<Maximum>
where
    F: Fn(f64) -> f64,
{
    Maximizer {
        scan_points,
        tol,
        ..Maximizer::default()
    }
    .maximize(f, lo, hi)
}

/// Refined local maxima of `f` on `[lo, hi]` (endpoints included), sorted by argument.
pub fn local_maxima<F>(f: F, lo: f64, hi: f64, tol: Tolerance) -> Result<Vec<Maximum>>
where
    F: Fn(f64) -> f64,
{
    Maximizer::with_tolerance(tol).candidates(f, lo, hi)
}

/// Brent's derivative-free search for a maximum of `f` on `[a, b]`.
fn golden_brent<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, tol: Tolerance) -> Option<Maximum> {
    const GOLD: f64 = 0.381_966_011_250_105_1;
    let sqrt_eps = f64::EPSILON.sqrt();
    let g = |x: f64| -f(x);

    let mut x = a + GOLD * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = g(x);
    if fx.is_nan() {
        return None;
    }
    let (mut fw, mut fv) = (fx, fx);
    let (mut d, mut e) = (0.0_f64, 0.0_f64);

    for _ in 0..tol.max_iter {
        let xm = 0.5 * (a + b);
        let tol1 = sqrt_eps * x.abs() + tol.at(x) / 3.0;
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let etemp = e;
            if p.abs() < (0.5 * q * etemp).abs() && p > q * (a - x) && p < q * (b - x) {
                e = d;
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = tol1.copysign(xm - x);
                }
                golden = false;
            }
        }
        if golden {
            e = if x < xm { b - x } else { a - x };
            d = GOLD * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = g(u);
        if fu.is_nan() {
            return None;
        }
        if fu <= fx {
            if u < x {
                b = x;
            } else {
                a = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    Some(Maximum { arg: x, value: -fx })
}
