use std::f64::consts::E;

use crate::error::{Error, Result};

const BRANCH_POINT: f64 = -1.0 / E;

/// Principal branch `W₀(c)`, the solution `w ≥ -1` of `w·eʷ = c`.
///
/// Halley iteration on `w·eʷ − c` for small arguments and on the
/// log form `w + ln w − ln c` once `c > e`, where `eʷ` would lose range.
pub fn lambert_w0(c: f64) -> Result<f64> {
    if c.is_nan() || c < BRANCH_POINT - 4.0 * f64::EPSILON {
        return Err(Error::Domain {
            what: "lambert_w0",
            value: c,
        });
    }
    if c == 0.0 {
        return Ok(0.0);
    }
    if c == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    if c <= BRANCH_POINT {
        return Ok(-1.0);
    }
    if c > E {
        Ok(halley_log_form(c))
    } else {
        Ok(halley_direct(c))
    }
}

fn initial_guess(c: f64) -> f64 {
    if c < -0.25 {
        // series about the branch point in p = sqrt(2(ec + 1))
        let p = (2.0 * (E * c + 1.0)).max(0.0).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else if c <= E {
        c.ln_1p() * (1.0 - c.ln_1p() / (2.0 + c.ln_1p()))
    } else {
        let l1 = c.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    }
}

fn halley_direct(c: f64) -> f64 {
    let mut w = initial_guess(c);
    for _ in 0..64 {
        let ew = w.exp();
        let f = w * ew - c;
        if f == 0.0 {
            break;
        }
        let wp1 = w + 1.0;
        if wp1.abs() < 1e-300 {
            break;
        }
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        let next = w - step;
        if !next.is_finite() {
            break;
        }
        let done = (next - w).abs() <= 4.0 * f64::EPSILON * (1.0 + next.abs());
        w = next.max(-1.0);
        if done {
            break;
        }
    }
    w
}

// g(w) = w + ln w − ln c, g' = 1 + 1/w, g'' = −1/w²
fn halley_log_form(c: f64) -> f64 {
    let lc = c.ln();
    let mut w = initial_guess(c);
    for _ in 0..64 {
        let g = w + w.ln() - lc;
        if g == 0.0 {
            break;
        }
        let g1 = 1.0 + 1.0 / w;
        let g2 = -1.0 / (w * w);
        let next = w - 2.0 * g * g1 / (2.0 * g1 * g1 - g * g2);
        let done = (next - w).abs() <= 4.0 * f64::EPSILON * next.abs();
        w = next;
        if done {
            break;
        }
    }
    w
}
