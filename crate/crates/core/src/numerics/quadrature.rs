use super::Tolerance;
use crate::error::{Error, Result};

// Kronrod abscissae on [-1, 1] (nonnegative half) and the 15-point Kronrod
// and embedded 7-point Gauss weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Panel> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    check(center, fc)?;
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let (x1, x2) = (center - dx, center + dx);
        let (f1, f2) = (f(x1), f(x2));
        check(x1, f1)?;
        check(x2, f2)?;
        kronrod += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    Ok(Panel {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    })
}

fn check(x: f64, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite { x, value: v })
    }
}

/// Adaptive Gauss–Kronrod (7/15) estimate of `∫ₐᵇ f`.
///
/// `b = +∞` is handled by the substitution `x = a + t/(1−t)`, `t ∈ [0, 1)`.
/// The panel with the largest error estimate is bisected until the summed
/// estimate drops below `max(tol.abs, tol.rel·|I|)`; `tol.max_iter` bounds
/// the number of bisections.
pub fn integrate<F>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    integrate_pieces(f, &[a, b], tol)
}

/// Like [`integrate`], but starts from the panels delimited by `points`
/// (ascending), so that known kinks and jumps of `f` sit on panel edges.
/// Only the last point may be `+∞`.
pub fn integrate_pieces<F>(f: F, points: &[f64], tol: Tolerance) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    tol.validate()?;
    if points.len() < 2 {
        return Ok(0.0);
    }
    for w in points.windows(2) {
        if w[0].is_nan() || w[1].is_nan() || w[0] > w[1] || w[0] == f64::INFINITY {
            return Err(Error::InvalidRange { lo: w[0], hi: w[1] });
        }
    }
    if points[0] == f64::NEG_INFINITY {
        return Err(Error::InvalidRange {
            lo: points[0],
            hi: points[1],
        });
    }
    let last = points[points.len() - 1];
    if last == f64::INFINITY {
        let n = points.len();
        let a0 = points[n - 2];
        let head = &points[..n - 1];
        let finite = if head.len() >= 2 {
            integrate_finite(&f, head, tol)?
        } else {
            0.0
        };
        let g = |t: f64| {
            let s = 1.0 - t;
            f(a0 + t / s) / (s * s)
        };
        return Ok(finite + integrate_finite(&g, &[0.0, 1.0], tol)?);
    }
    integrate_finite(&f, points, tol)
}

fn integrate_finite<F: Fn(f64) -> f64>(f: &F, points: &[f64], tol: Tolerance) -> Result<f64> {
    let mut panels = Vec::with_capacity(points.len() + tol.max_iter);
    for w in points.windows(2) {
        if w[1] > w[0] {
            panels.push(gauss_kronrod(f, w[0], w[1])?);
        }
    }
    if panels.is_empty() {
        return Ok(0.0);
    }
    let mut splits = 0;
    loop {
        let value: f64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        let magnitude: f64 = panels.iter().map(|p| p.value.abs()).sum();
        if error <= tol.at(value) || error <= 50.0 * f64::EPSILON * magnitude {
            return Ok(value);
        }
        let (idx, worst) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, p)| (i, *p))
            .expect("nonempty");
        let mid = 0.5 * (worst.a + worst.b);
        if splits >= tol.max_iter || !(mid > worst.a && mid < worst.b) {
            return Err(Error::NonConvergence {
                estimate: error,
                subdivisions: splits,
            });
        }
        panels[idx] = gauss_kronrod(f, worst.a, mid)?;
        panels.push(gauss_kronrod(f, mid, worst.b)?);
        splits += 1;
    }
}
