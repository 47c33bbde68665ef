use std::fmt;

use cutoff_core::numerics::{lin_space, log_space};
use cutoff_core::partition::mixed_lambda_grid;
use serde::Deserialize;

use crate::config::ConfigError;

/// A grid as written in a config file or flag: an explicit list, a
/// `log:lo:hi:n` / `lin:lo:hi:n` range, or `mixed[:lo:hi]` (the λ search grid).
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    List(Vec<f64>),
    Text(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub label: String,
    pub points: Vec<f64>,
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

fn number(s: &str, spec: &str) -> Result<f64, ConfigError> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| ConfigError(format!("grid `{spec}`: `{s}` is not a number")))
}

fn count(s: &str, spec: &str) -> Result<usize, ConfigError> {
    s.trim()
        .parse::<usize>()
        .map_err(|_| ConfigError(format!("grid `{spec}`: `{s}` is not a point count")))
}

pub fn parse_grid(spec: &GridSpec) -> Result<Grid, ConfigError> {
    let text = match spec {
        GridSpec::List(values) => {
            let label = values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
            return Ok(Grid {
                label,
                points: values.clone(),
            });
        }
        GridSpec::Text(t) => t.trim(),
    };
    let parts: Vec<&str> = text.split(':').collect();
    let points = match parts.as_slice() {
        ["mixed"] => mixed_lambda_grid(1e-3, 1e3),
        ["mixed", lo, hi] => mixed_lambda_grid(number(lo, text)?, number(hi, text)?),
        [kind @ ("log" | "lin"), lo, hi, n] => {
            let (lo, hi, n) = (number(lo, text)?, number(hi, text)?, count(n, text)?);
            if n == 0 {
                return Err(ConfigError(format!("grid `{text}` has no points")));
            }
            if *kind == "log" {
                if lo <= 0.0 || lo.is_nan() {
                    return Err(ConfigError(format!("grid `{text}`: log spacing needs a positive start")));
                }
                log_space(lo, hi, n)
            } else {
                lin_space(lo, hi, n)
            }
        }
        [single] => single.split(',').map(|s| number(s, text)).collect::<Result<_, _>>()?,
        _ => return Err(ConfigError(format!("cannot read grid `{text}`"))),
    };
    Ok(Grid {
        label: text.to_string(),
        points,
    })
}

/// Checks that a grid is strictly ascending and inside `[lo, hi]`
/// (`lo` excluded when `open_lo`).
pub fn check_domain(name: &str, grid: &Grid, lo: f64, hi: f64, open_lo: bool) -> Result<(), ConfigError> {
    if grid.points.is_empty() {
        return Err(ConfigError(format!("{name} is empty")));
    }
    for &x in &grid.points {
        let low_ok = if open_lo { x > lo } else { x >= lo };
        if !(low_ok && x <= hi) {
            return Err(ConfigError(format!("{name} value {x} is outside its domain")));
        }
    }
    if grid.points.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ConfigError(format!("{name} must be strictly ascending")));
    }
    Ok(())
}
