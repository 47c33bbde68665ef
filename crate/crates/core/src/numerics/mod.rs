//! Scalar numerical kernels shared by the model layers: the principal branch
//! of Lambert W, bracketed root finding, adaptive quadrature and a
//! kink-tolerant one-dimensional maximizer.

mod lambert;
mod maximize;
mod quadrature;
mod roots;

pub use lambert::lambert_w0;
pub use maximize::{local_maxima, maximize_1d, maximize_1d_with, Maximizer, Maximum};
pub use quadrature::{integrate, integrate_pieces};
pub use roots::{find_bracket, find_root_bracketed};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Stopping rule shared by the iterative routines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_iter: usize,
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64, max_iter: usize) -> Result<Self> {
        let tol = Tolerance { abs, rel, max_iter };
        tol.validate()?;
        Ok(tol)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "abs",
                value: self.abs,
                reason: "must be nonnegative",
            });
        }
        if !(self.rel >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "rel",
                value: self.rel,
                reason: "must be nonnegative",
            });
        }
        if !(self.abs + self.rel > 0.0) {
            return Err(Error::InvalidParameter {
                name: "abs + rel",
                value: self.abs + self.rel,
                reason: "must be positive",
            });
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter {
                name: "max_iter",
                value: 0.0,
                reason: "must be positive",
            });
        }
        Ok(())
    }

    /// Absolute tolerance scaled to the magnitude of `x`.
    pub(crate) fn at(&self, x: f64) -> f64 {
        self.abs.max(self.rel * x.abs())
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: 1e-10,
            rel: 1e-10,
            max_iter: 200,
        }
    }
}

/// A closed interval `[lo, hi]` with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    lo: f64,
    hi: f64,
}

impl Bracket {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo < hi && lo.is_finite() && hi.is_finite() {
            Ok(Bracket { lo, hi })
        } else {
            Err(Error::InvalidRange { lo, hi })
        }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// `n` points spaced evenly in log scale over `[lo, hi]`, both ends included.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n)
                .map(|i| {
                    if i == 0 {
                        lo
                    } else if i == n - 1 {
                        hi
                    } else {
                        (a + (b - a) * i as f64 / (n - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}

/// `n` evenly spaced points over `[lo, hi]`, both ends included.
pub fn lin_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_requires_positive_total() {
        assert!(Tolerance::new(0.0, 0.0, 10).is_err());
        assert!(Tolerance::new(1e-8, 0.0, 0).is_err());
        assert!(Tolerance::new(-1.0, 1.0, 10).is_err());
        assert!(Tolerance::new(0.0, 1e-8, 10).is_ok());
    }

    #[test]
    fn bracket_rejects_empty_interval() {
        assert!(Bracket::new(1.0, 1.0).is_err());
        assert!(Bracket::new(2.0, 1.0).is_err());
        assert!(Bracket::new(0.0, f64::INFINITY).is_err());
        let b = Bracket::new(-1.0, 3.0).unwrap();
        assert_eq!(b.width(), 4.0);
        assert!(b.contains(3.0));
    }

    #[test]
    fn spaced_grids_hit_endpoints() {
        let g = log_space(1e-3, 1e3, 7);
        assert_eq!(g.len(), 7);
        assert_eq!(g[0], 1e-3);
        assert_eq!(g[6], 1e3);
        assert!((g[3] - 1.0).abs() < 1e-12);
        let l = lin_space(0.0, 1.0, 5);
        assert_eq!(l, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }
}
