use std::fmt;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use cutoff_core::model::{PostingCost, Primitives, Regime, Setting, Technology, TestNoise};
use cutoff_core::partition::SeparatingKnob;
use serde::Deserialize;

use crate::grid::{check_domain, parse_grid, Grid, GridSpec};

/// Invalid or unreadable configuration; exits with status 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Effort,
    ObjectiveSurface,
    Policy,
    Partition,
    Boundary,
    Voi,
    Asymptotics,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Effort => "effort",
            Command::ObjectiveSurface => "objective-surface",
            Command::Policy => "policy",
            Command::Partition => "partition",
            Command::Boundary => "boundary",
            Command::Voi => "voi",
            Command::Asymptotics => "asymptotics",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
pub enum Axis {
    #[value(name = "V")]
    #[serde(rename = "V")]
    V,
    #[value(name = "gamma")]
    #[serde(rename = "gamma")]
    Gamma,
}

/// Compute model objects and write them as CSV or JSON.
///
/// Every option can also be set in a TOML file passed with `--config`;
/// flags win over file values.
#[derive(Debug, Parser)]
#[command(name = "cutoff", version)]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// TOML file with any of the options below (keys as in the flag names,
    /// with underscores).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Prize for success.
    #[arg(long = "V")]
    pub v: Option<f64>,
    /// Cost curvature, effort cost e^gamma.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Rate of the exponential complexity prior.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Separating knob in (0, 1] for `partition` and `boundary`.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// `mult` or `add`.
    #[arg(long)]
    pub technology: Option<String>,
    /// Probability that an agent below the threshold passes.
    #[arg(long)]
    pub eta_plus: Option<f64>,
    /// Probability that an agent at or above the threshold fails.
    #[arg(long)]
    pub eta_minus: Option<f64>,
    /// `none`, `linear:slope` or `power:coef,exponent`.
    #[arg(long)]
    pub posting_cost: Option<String>,
    /// `naive`, `separating` or `pooled:a,b`.
    #[arg(long)]
    pub regime: Option<String>,
    /// Grids take `a,b,c`, `log:lo:hi:n`, `lin:lo:hi:n` or `mixed[:lo:hi]`.
    #[arg(long = "T-grid")]
    pub t_grid: Option<String>,
    /// λ values for `partition`.
    #[arg(long = "lambda-grid")]
    pub lambda_grid: Option<String>,
    /// Prize values for `boundary --axis V`.
    #[arg(long = "V-grid")]
    pub v_grid: Option<String>,
    /// Curvature values for `partition`, `boundary --axis gamma` and `asymptotics`.
    #[arg(long = "gamma-grid")]
    pub gamma_grid: Option<String>,
    /// Threshold grid for `effort` and `objective-surface`.
    #[arg(long = "theta-grid")]
    pub theta_grid: Option<String>,
    /// Parameter traced by `boundary`.
    #[arg(long, value_enum)]
    pub axis: Option<Axis>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format, `csv` by default.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Seed for the Monte-Carlo payoff check of `policy`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Draws for the Monte-Carlo payoff check of `policy`; off when absent.
    #[arg(long)]
    pub draws: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum PostingSpec {
    Text(String),
    Table { kind: String, #[serde(default)] params: Vec<f64> },
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(rename = "V")]
    pub v: Option<f64>,
    pub gamma: Option<f64>,
    pub lambda: Option<f64>,
    pub alpha: Option<f64>,
    pub technology: Option<String>,
    pub eta_plus: Option<f64>,
    pub eta_minus: Option<f64>,
    pub posting_cost: Option<PostingSpec>,
    pub regime: Option<String>,
    #[serde(rename = "T_grid")]
    pub t_grid: Option<GridSpec>,
    pub lambda_grid: Option<GridSpec>,
    #[serde(rename = "V_grid")]
    pub v_grid: Option<GridSpec>,
    pub gamma_grid: Option<GridSpec>,
    pub theta_grid: Option<GridSpec>,
    pub axis: Option<Axis>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
    pub draws: Option<u64>,
}

/// Fully resolved run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub setting: Setting,
    pub knob: SeparatingKnob,
    pub regime: Regime,
    pub regime_label: String,
    pub posting_label: String,
    pub t_grid: Option<Grid>,
    pub lambda_grid: Grid,
    pub v_grid: Grid,
    pub gamma_grid: Grid,
    pub theta_grid: Grid,
    pub axis: Axis,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub seed: u64,
    pub draws: Option<u64>,
}

fn parse_technology(s: &str) -> Result<Technology, ConfigError> {
    match s.trim() {
        "mult" | "multiplicative" => Ok(Technology::Multiplicative),
        "add" | "additive" => Ok(Technology::Additive),
        other => Err(ConfigError(format!("unknown technology `{other}` (use mult or add)"))),
    }
}

fn parse_params(s: &str, what: &str) -> Result<Vec<f64>, ConfigError> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| ConfigError(format!("{what}: `{p}` is not a number"))))
        .collect()
}

fn posting_from(kind: &str, params: &[f64]) -> Result<PostingCost, ConfigError> {
    let cost = match (kind.trim(), params) {
        ("none", []) => PostingCost::None,
        ("linear", [slope]) => PostingCost::Linear { slope: *slope },
        ("power", [coef, exponent]) => PostingCost::Power {
            coef: *coef,
            exponent: *exponent,
        },
        (kind, params) => {
            return Err(ConfigError(format!(
                "posting cost `{kind}` with {} parameter(s) is not recognised",
                params.len()
            )))
        }
    };
    cost.validate().map_err(|e| ConfigError(e.to_string()))?;
    Ok(cost)
}

fn parse_posting(spec: &PostingSpec) -> Result<(PostingCost, String), ConfigError> {
    let (kind, params) = match spec {
        PostingSpec::Text(t) => match t.split_once(':') {
            Some((k, p)) => (k.to_string(), parse_params(p, "posting cost")?),
            None => (t.clone(), Vec::new()),
        },
        PostingSpec::Table { kind, params } => (kind.clone(), params.clone()),
    };
    let cost = posting_from(&kind, &params)?;
    let label = if params.is_empty() {
        kind.trim().to_string()
    } else {
        let p: Vec<String> = params.iter().map(|x| x.to_string()).collect();
        format!("{}:{}", kind.trim(), p.join(","))
    };
    Ok((cost, label))
}

fn parse_regime(s: &str) -> Result<Regime, ConfigError> {
    let s = s.trim();
    match s {
        "naive" => Ok(Regime::Naive),
        "separating" | "separating-conjecture" => Ok(Regime::Separating),
        _ => match s.strip_prefix("pooled:") {
            Some(rest) => match parse_params(rest, "pooled regime")?.as_slice() {
                [a, b] => Ok(Regime::Pooled { a: *a, b: *b }),
                _ => Err(ConfigError(format!("pooled regime needs `pooled:a,b`, got `{s}`"))),
            },
            None => Err(ConfigError(format!("unknown regime `{s}`"))),
        },
    }
}

fn grid_from(flag: &Option<String>, file: &Option<GridSpec>, default: &str) -> Result<Grid, ConfigError> {
    match (flag, file) {
        (Some(f), _) => parse_grid(&GridSpec::Text(f.clone())),
        (None, Some(spec)) => parse_grid(spec),
        (None, None) => parse_grid(&GridSpec::Text(default.to_string())),
    }
}

fn default_t_grid(command: Command) -> Option<&'static str> {
    match command {
        Command::Policy => Some("log:1e-4:10:60"),
        Command::ObjectiveSurface => Some("log:1e-3:10:25"),
        _ => None,
    }
}

impl RunConfig {
    pub fn resolve(cli: &Cli) -> Result<RunConfig, ConfigError> {
        let file: FileConfig = match &cli.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
                toml::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?
            }
            None => FileConfig::default(),
        };
        let v = cli.v.or(file.v).unwrap_or(1.0);
        let gamma = cli.gamma.or(file.gamma).unwrap_or(2.0);
        let lambda = cli.lambda.or(file.lambda).unwrap_or(1.0);
        let prim = Primitives::new(v, gamma, lambda).map_err(|e| ConfigError(e.to_string()))?;
        let knob = SeparatingKnob::new(cli.alpha.or(file.alpha).unwrap_or(0.5)).map_err(|e| ConfigError(e.to_string()))?;
        let tech = match cli.technology.as_ref().or(file.technology.as_ref()) {
            Some(s) => parse_technology(s)?,
            None => Technology::Multiplicative,
        };
        let noise = TestNoise::new(
            cli.eta_minus.or(file.eta_minus).unwrap_or(0.0),
            cli.eta_plus.or(file.eta_plus).unwrap_or(0.0),
        )
        .map_err(|e| ConfigError(e.to_string()))?;
        let posting_spec = match (&cli.posting_cost, &file.posting_cost) {
            (Some(s), _) => PostingSpec::Text(s.clone()),
            (None, Some(spec)) => spec.clone(),
            (None, None) => PostingSpec::Text("none".into()),
        };
        let (posting, posting_label) = parse_posting(&posting_spec)?;
        let regime_label = cli
            .regime
            .clone()
            .or(file.regime.clone())
            .unwrap_or_else(|| "naive".into());
        let regime = parse_regime(&regime_label)?;
        regime.validate().map_err(|e| ConfigError(e.to_string()))?;

        let t_grid = match (&cli.t_grid, &file.t_grid, default_t_grid(cli.command)) {
            (None, None, None) => None,
            (f, s, d) => Some(grid_from(f, s, d.unwrap_or(""))?),
        };
        if let Some(g) = &t_grid {
            check_domain("T_grid", g, 0.0, f64::INFINITY, false)?;
        }
        let lambda_grid = grid_from(&cli.lambda_grid, &file.lambda_grid, "mixed")?;
        check_domain("lambda_grid", &lambda_grid, 0.0, f64::INFINITY, true)?;
        let v_grid = grid_from(&cli.v_grid, &file.v_grid, "0.5,1,2")?;
        check_domain("V_grid", &v_grid, 0.0, f64::INFINITY, true)?;
        let gamma_default = match cli.command {
            Command::Boundary => "lin:1.2:4:15",
            Command::Asymptotics => "2,3",
            _ => "2",
        };
        let gamma_grid = grid_from(&cli.gamma_grid, &file.gamma_grid, gamma_default)?;
        check_domain("gamma_grid", &gamma_grid, 1.0, f64::INFINITY, true)?;
        let theta_default = match cli.command {
            Command::ObjectiveSurface => "lin:0:1:101",
            _ => "lin:0:1:21",
        };
        let theta_grid = grid_from(&cli.theta_grid, &file.theta_grid, theta_default)?;
        check_domain("theta_grid", &theta_grid, 0.0, 1.0, false)?;

        let draws = cli.draws.or(file.draws);
        if let Some(d) = draws {
            if d < cutoff_core::oracle::MIN_DRAWS {
                return Err(ConfigError(format!("draws must be at least {}", cutoff_core::oracle::MIN_DRAWS)));
            }
        }

        Ok(RunConfig {
            command: cli.command,
            setting: Setting {
                prim,
                tech,
                noise,
                posting,
            },
            knob,
            regime,
            regime_label,
            posting_label,
            t_grid,
            lambda_grid,
            v_grid,
            gamma_grid,
            theta_grid,
            axis: cli.axis.or(file.axis).unwrap_or(Axis::V),
            out: cli.out.clone().or(file.out),
            format: cli.format.or(file.format).unwrap_or(Format::Csv),
            seed: cli.seed.or(file.seed).unwrap_or(0),
            draws,
        })
    }

    /// Every resolved setting as `key=value` pairs, in a fixed order.
    pub fn params(&self) -> Vec<(&'static str, String)> {
        let s = &self.setting;
        let tech = match s.tech {
            Technology::Multiplicative => "mult",
            Technology::Additive => "add",
        };
        let axis = match self.axis {
            Axis::V => "V",
            Axis::Gamma => "gamma",
        };
        vec![
            ("command", self.command.name().to_string()),
            ("V", s.prim.v.to_string()),
            ("gamma", s.prim.gamma.to_string()),
            ("lambda", s.prim.lambda.to_string()),
            ("alpha", self.knob.alpha().to_string()),
            ("technology", tech.to_string()),
            ("eta_plus", s.noise.eta_plus.to_string()),
            ("eta_minus", s.noise.eta_minus.to_string()),
            ("posting_cost", self.posting_label.clone()),
            ("regime", self.regime_label.clone()),
            ("T_grid", self.t_grid.as_ref().map_or("none".into(), |g| g.to_string())),
            ("lambda_grid", self.lambda_grid.to_string()),
            ("V_grid", self.v_grid.to_string()),
            ("gamma_grid", self.gamma_grid.to_string()),
            ("theta_grid", self.theta_grid.to_string()),
            ("axis", axis.to_string()),
            ("seed", self.seed.to_string()),
            ("draws", self.draws.map_or("none".into(), |d| d.to_string())),
        ]
    }
}
