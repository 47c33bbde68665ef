use anyhow::Result;
use cutoff_core::advisor::{classify_policy, objective, policy_curve};
use cutoff_core::effort::effort_pair;
use cutoff_core::model::Regime;
use cutoff_core::oracle::{mc_payoff, McConfig, McPolicy};
use cutoff_core::partition::{asymptotic_check, boundary_vs_gamma, boundary_vs_v, phi, value_of_information};
use rayon::prelude::*;

use crate::config::{Axis, Command, ConfigError, RunConfig};
use crate::output::{fmt_num, Cell, Table};

/// Thresholds closer than this count as one pooled block in the taxonomy.
const FLAT_TOL: f64 = 1e-6;

pub fn run(cfg: &RunConfig) -> Result<Table> {
    match cfg.command {
        Command::Effort => effort(cfg),
        Command::ObjectiveSurface => surface(cfg),
        Command::Policy => policy(cfg),
        Command::Partition => partition(cfg),
        Command::Boundary => boundary(cfg),
        Command::Voi => voi(cfg),
        Command::Asymptotics => asymptotics(cfg),
    }
}

fn effort(cfg: &RunConfig) -> Result<Table> {
    let s = &cfg.setting;
    let t = match (&cfg.regime, &cfg.t_grid) {
        (Regime::Separating, Some(g)) if g.points.len() == 1 => g.points[0],
        (Regime::Separating, _) => {
            return Err(ConfigError("the separating regime needs a single complexity in --T-grid".into()).into())
        }
        _ => 0.0,
    };
    let belief = cfg.regime.belief(&s.prim, t);
    let rows = cfg
        .theta_grid
        .points
        .par_iter()
        .map(|&th| {
            let (pass, fail) = effort_pair(th, &belief, s.tech, s.noise, &s.prim)?;
            Ok(vec![Cell::Num(th), Cell::Num(pass.e), Cell::Num(fail.e)])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Table {
        columns: vec!["theta_star", "e_pass", "e_fail"],
        rows,
        summary: Vec::new(),
    })
}

fn surface(cfg: &RunConfig) -> Result<Table> {
    let ts = &cfg.t_grid.as_ref().expect("objective-surface has a default T grid").points;
    let pairs: Vec<(f64, f64)> = ts
        .iter()
        .flat_map(|&t| cfg.theta_grid.points.iter().map(move |&th| (t, th)))
        .collect();
    let rows = pairs
        .par_iter()
        .map(|&(t, th)| {
            let u = objective(t, th, &cfg.regime, &cfg.setting)?;
            Ok(vec![Cell::Num(t), Cell::Num(th), Cell::Num(u.total)])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Table {
        columns: vec!["T", "theta_star", "U"],
        rows,
        summary: Vec::new(),
    })
}

fn policy(cfg: &RunConfig) -> Result<Table> {
    let grid = &cfg.t_grid.as_ref().expect("policy has a default T grid").points;
    let curve = policy_curve(grid, &cfg.regime, &cfg.setting)?;
    let rows = (0..curve.len())
        .map(|i| {
            vec![
                Cell::Num(curve.t_grid[i]),
                Cell::Num(curve.theta_values[i]),
                Cell::Num(curve.values[i]),
            ]
        })
        .collect();
    let tax = classify_policy(&curve, FLAT_TOL);
    let class = match tax.class {
        cutoff_core::PolicyClass::Separating => "separating",
        cutoff_core::PolicyClass::Pooling => "pooling",
        cutoff_core::PolicyClass::SemiSeparating => "semi_separating",
    };
    let blocks: Vec<String> = tax
        .blocks
        .iter()
        .map(|b| format!("[{},{}]@{}", fmt_num(b.t1), fmt_num(b.t2), fmt_num(b.theta_bar)))
        .collect();
    let flagged: Vec<String> = tax.flagged.iter().map(|&t| fmt_num(t)).collect();
    let mut summary = vec![
        ("class".to_string(), class.to_string()),
        ("pooled_blocks".to_string(), blocks.join(" ")),
        ("near_ties".to_string(), flagged.join(" ")),
        ("max_decrease".to_string(), fmt_num(curve.max_decrease())),
    ];
    if let Some(draws) = cfg.draws {
        let est = mc_payoff(
            McPolicy::Curve(&curve),
            &cfg.regime,
            &cfg.setting,
            &McConfig::new(draws, cfg.seed),
        )?;
        summary.push(("mc_value".into(), fmt_num(est.mean)));
        summary.push(("mc_stderr".into(), fmt_num(est.stderr)));
    }
    Ok(Table {
        columns: vec!["T", "theta_star", "value"],
        rows,
        summary,
    })
}

fn partition(cfg: &RunConfig) -> Result<Table> {
    let v = cfg.setting.prim.v;
    let pairs: Vec<(f64, f64)> = cfg
        .gamma_grid
        .points
        .iter()
        .flat_map(|&g| cfg.lambda_grid.points.iter().map(move |&l| (g, l)))
        .collect();
    let rows = pairs
        .par_iter()
        .map(|&(g, l)| {
            let p = phi(l, v, g, cfg.knob)?;
            Ok(vec![
                Cell::Num(p.lambda),
                Cell::Num(p.v),
                Cell::Num(p.gamma),
                Cell::Num(p.alpha),
                Cell::Num(p.u_sep),
                Cell::Num(p.u_pool),
                Cell::Num(p.phi),
                Cell::from(p.classification.label()),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Table {
        columns: vec!["lambda", "V", "gamma", "alpha", "u_sep", "u_pool", "phi", "class"],
        rows,
        summary: Vec::new(),
    })
}

fn boundary(cfg: &RunConfig) -> Result<Table> {
    let curve = match cfg.axis {
        Axis::V => boundary_vs_v(&cfg.v_grid.points, cfg.setting.prim.gamma, cfg.knob)?,
        Axis::Gamma => boundary_vs_gamma(&cfg.gamma_grid.points, cfg.setting.prim.v, cfg.knob)?,
    };
    let rows = curve
        .grid
        .iter()
        .zip(&curve.lambda_star_values)
        .map(|(&x, l)| match l {
            Some(l) => vec![Cell::Num(x), Cell::Num(*l), Cell::from("ok")],
            None => vec![Cell::Num(x), Cell::Num(f64::NAN), Cell::from("no_crossing")],
        })
        .collect();
    Ok(Table {
        columns: vec!["axis_value", "lambda_star", "status"],
        rows,
        summary: Vec::new(),
    })
}

fn voi(cfg: &RunConfig) -> Result<Table> {
    let breaks = cfg.t_grid.as_ref().map_or(&[][..], |g| &g.points[..]);
    let prior = cfg.setting.prim.prior();
    let r = value_of_information(&cfg.setting, &prior, breaks)?;
    Ok(Table {
        columns: vec!["informed", "uninformed", "best_constant_threshold", "raw", "value"],
        rows: vec![vec![
            Cell::Num(r.informed),
            Cell::Num(r.uninformed),
            Cell::Num(r.best_constant_threshold),
            Cell::Num(r.raw),
            Cell::Num(r.value),
        ]],
        summary: Vec::new(),
    })
}

fn asymptotics(cfg: &RunConfig) -> Result<Table> {
    let v = cfg.setting.prim.v;
    let rows = cfg
        .gamma_grid
        .points
        .iter()
        .map(|&g| {
            let r = asymptotic_check(v, g, cfg.knob)?;
            Ok(vec![
                Cell::Num(g),
                Cell::Num(r.sep_slope),
                Cell::Num(r.sep_slope_target),
                Cell::Num(r.sep_slope_rel_err),
                Cell::Num(r.pool_exponent),
                Cell::Num(r.pool_exponent_target),
                Cell::Num(r.pool_exponent_rel_err),
                Cell::Num(r.sep_limit),
                Cell::Num(r.sep_limit_target),
                Cell::Num(r.pool_limit),
                Cell::Num(r.pool_limit_target),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Table {
        columns: vec![
            "gamma",
            "sep_slope",
            "sep_slope_target",
            "sep_slope_rel_err",
            "pool_exponent",
            "pool_exponent_target",
            "pool_exponent_rel_err",
            "sep_limit",
            "sep_limit_target",
            "pool_limit",
            "pool_limit_target",
        ],
        rows,
        summary: Vec::new(),
    })
}
