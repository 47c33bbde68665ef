use super::{Bracket, Tolerance};
use crate::error::{Error, Result};

/// Zero of `f` inside `bracket` by Brent's method (inverse quadratic
/// interpolation with bisection fallback).
///
/// The returned point always lies in `[bracket.lo(), bracket.hi()]`.
pub fn find_root_bracketed<F>(f: F, bracket: Bracket, tol: Tolerance) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    tol.validate()?;
    let (mut a, mut b) = (bracket.lo(), bracket.hi());
    let mut fa = eval(&f, a)?;
    let mut fb = eval(&f, b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoSignChange {
            lo: a,
            hi: b,
            f_lo: fa,
            f_hi: fb,
        });
    }

    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..tol.max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol.at(b);
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b.clamp(bracket.lo(), bracket.hi()));
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = eval(&f, b)?;
    }
    Err(Error::MaxIterations {
        routine: "find_root_bracketed",
        max_iter: tol.max_iter,
    })
}

/// First adjacent pair of `grid` across which `f` changes sign (a zero at a
/// grid point counts as a change).
pub fn find_bracket<F>(f: F, grid: &[f64]) -> Result<Bracket>
where
    F: Fn(f64) -> f64,
{
    if grid.len() < 2 {
        return Err(Error::NoCrossing { points: grid.len() });
    }
    let mut prev_x = grid[0];
    let mut prev_f = eval(&f, prev_x)?;
    for &x in &grid[1..] {
        if !(x > prev_x) {
            return Err(Error::InvalidRange { lo: prev_x, hi: x });
        }
        let fx = eval(&f, x)?;
        if prev_f == 0.0 || fx == 0.0 || prev_f.signum() != fx.signum() {
            return Bracket::new(prev_x, x);
        }
        prev_x = x;
        prev_f = fx;
    }
    Err(Error::NoCrossing { points: grid.len() })
}

fn eval<F: Fn(f64) -> f64>(f: &F, x: f64) -> Result<f64> {
    let v = f(x);
    if v.is_nan() {
        Err(Error::NonFinite { x, value: v })
    } else {
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn linear_root() {
        let x = find_root_bracketed(|x| x - 1.0, Bracket::new(0.0, 2.0).unwrap(), tol()).unwrap();
        assert!((x - 1.0).abs() < 1e-12);
    }

    #[test]
    fn log_two() {
        let x = find_root_bracketed(
            |x| x.exp() - 2.0,
            Bracket::new(0.0, 1.0).unwrap(),
            tol(),
        )
        .unwrap();
        assert!((x - std::f64::consts::LN_2).abs() < 1e-10);
    }

    #[test]
    fn agrees_with_lambert() {
        let x = find_root_bracketed(
            |x| x * x.exp() - 0.5,
            Bracket::new(0.0, 1.0).unwrap(),
            tol(),
        )
        .unwrap();
        let w = super::super::lambert_w0(0.5).unwrap();
        assert!((x - w).abs() < 1e-8);
    }

    #[test]
    fn endpoint_zero_is_returned() {
        let b = Bracket::new(1.0, 3.0).unwrap();
        assert_eq!(find_root_bracketed(|x| x - 1.0, b, tol()).unwrap(), 1.0);
        assert_eq!(find_root_bracketed(|x| x - 3.0, b, tol()).unwrap(), 3.0);
    }

    #[test]
    fn same_sign_is_an_error() {
        let r = find_root_bracketed(|x| x * x + 1.0, Bracket::new(-1.0, 1.0).unwrap(), tol());
        assert!(matches!(r, Err(Error::NoSignChange { .. })));
    }

    #[test]
    fn iteration_cap_is_reported() {
        let tight = Tolerance::new(0.0, 1e-300, 3).unwrap();
        let r = find_root_bracketed(|x| x.powi(3) - 0.3, Bracket::new(0.0, 1.0).unwrap(), tight);
        assert!(matches!(r, Err(Error::MaxIterations { .. })));
    }

    #[test]
    fn first_sign_change_on_grid() {
        let b = find_bracket(|x| x - 0.5, &[0.0, 1.0]).unwrap();
        assert_eq!((b.lo(), b.hi()), (0.0, 1.0));
        let b = find_bracket(|x| (x - 0.25) * (x - 0.75), &[0.0, 0.5, 1.0]).unwrap();
        assert_eq!((b.lo(), b.hi()), (0.0, 0.5));
    }

    #[test]
    fn constant_sign_has_no_crossing() {
        assert!(matches!(
            find_bracket(|_| 1.0, &[0.0, 0.5, 1.0, 2.0]),
            Err(Error::NoCrossing { points: 4 })
        ));
        assert!(find_bracket(|x| x, &[1.0]).is_err());
    }
}
