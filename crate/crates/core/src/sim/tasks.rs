//! Configurations and table builders behind the command-line subcommands.

use super::fit::{fit_rate, RateFit, RateModel};
use super::{velocity_profile_values, TimeGrid, VelocityProfile};
use crate::coefficients::{compute_coefficients, k_bound};
use crate::collision::CollisionOperator;
use crate::error::{Error, Result};
use crate::grid::VelocityGrid;
use crate::hypocoercivity::{entropy_report, ModeEvolver, ModeState};
use crate::model::{predicted_rate, ModelParams, Rate};
use crate::C64;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

/// Rows of numbers under a header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    fn push_numbers(&mut self, row: &[f64]) {
        self.rows.push(row.iter().map(|x| format!("{x:e}")).collect());
    }

    pub fn write(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "{}", self.header.join(","))?;
        for r in &self.rows {
            writeln!(out, "{}", r.join(","))?;
        }
        Ok(())
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write(std::io::BufWriter::new(std::fs::File::create(path)?))
    }

    /// Numeric column by header name.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.header.iter().position(|h| h == name)?;
        self.rows.iter().map(|r| r[j].parse().ok()).collect()
    }
}

fn default_n() -> usize {
    400
}

/// `coeffs`: the coefficient family over a log-spaced |ξ| sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffsConfig {
    pub params: ModelParams,
    #[serde(default = "default_n")]
    pub n_velocity: usize,
    #[serde(default)]
    pub eta: Option<f64>,
    pub xi_min: f64,
    pub xi_max: f64,
    pub count: usize,
}

pub fn coefficient_table(cfg: &CoeffsConfig) -> Result<Table> {
    cfg.params.validate()?;
    if !(cfg.xi_min > 0.0 && cfg.xi_max > cfg.xi_min && cfg.count >= 2) {
        return Err(Error::Config("need 0 < xi_min < xi_max and count >= 2".into()));
    }
    let eta = cfg.eta.unwrap_or_else(|| cfg.params.default_eta());
    let grid = Arc::new(VelocityGrid::build_default(&cfg.params, cfg.n_velocity)?);
    let op = CollisionOperator::build(grid)?;
    let mut t = Table::new(&[
        "xi", "lambda0", "lambda1", "tlambda0", "tlambda1", "mu2", "tmu1", "tmu2", "mu_l", "lambda_l", "k",
    ]);
    let (a, b) = (cfg.xi_min.log10(), cfg.xi_max.log10());
    for i in 0..cfg.count {
        let xi = 10f64.powf(a + (b - a) * i as f64 / (cfg.count - 1) as f64);
        let c = compute_coefficients(&op, xi, eta)?;
        let k = k_bound(&c)?;
        t.push_numbers(&[
            xi, c.lambda0, c.lambda1, c.tlambda0, c.tlambda1, c.mu2, c.tmu1, c.tmu2, c.mu_l, c.lambda_l, k,
        ]);
    }
    Ok(t)
}

fn default_delta() -> f64 {
    1.0
}
fn default_tol() -> f64 {
    1e-8
}

/// `evolve-mode`: one Fourier mode with its entropy bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveModeConfig {
    pub params: ModelParams,
    #[serde(default = "default_n")]
    pub n_velocity: usize,
    pub xi: f64,
    pub velocity: VelocityProfile,
    pub time: TimeGrid,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub eta: Option<f64>,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

pub fn mode_table(cfg: &EvolveModeConfig) -> Result<Table> {
    cfg.params.validate()?;
    let grid = Arc::new(VelocityGrid::build_default(&cfg.params, cfg.n_velocity)?);
    let op = CollisionOperator::build(grid.clone())?;
    let h: Vec<C64> = velocity_profile_values(&cfg.velocity, &grid)?.iter().map(|&x| C64::new(x, 0.0)).collect();
    let eta = cfg.eta.unwrap_or_else(|| cfg.params.default_eta());
    let ev = ModeEvolver::new(&op, cfg.xi, cfg.tol);
    let traj = ev.evolve(&ModeState::new(cfg.xi, h, 0.0), &cfg.time.times())?;
    let reps = entropy_report(&ev, &traj, cfg.delta, eta)?;
    let mut t = Table::new(&["t", "norm2", "h", "r", "r_flow", "i1", "i2", "i3", "i4", "i5", "i6", "i7"]);
    for r in &reps {
        let i = r.i_terms_re();
        t.push_numbers(&[r.time, r.norm2, r.h, r.r, r.r_flow, i[0], i[1], i[2], i[3], i[4], i[5], i[6]]);
    }
    Ok(t)
}

/// Fit request inside a `rates` config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesFit {
    /// CSV written by `simulate`
    pub series: PathBuf,
    #[serde(default = "default_column")]
    pub column: String,
    pub model: RateModel,
    #[serde(default)]
    pub window: Option<(f64, f64)>,
}

fn default_column() -> String {
    "l2_norm2".into()
}

/// `rates`: predicted rates for a list of models, and optionally a fit of a
/// simulated series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatesConfig {
    pub models: Vec<ModelParams>,
    #[serde(default)]
    pub fit: Option<SeriesFit>,
}

pub fn rates_table(cfg: &RatesConfig) -> Result<Table> {
    let mut t = Table::new(&["d", "gamma", "beta", "k", "alpha", "tau", "log_corrected", "regime", "attained"]);
    for p in &cfg.models {
        let r = predicted_rate(p)?;
        let tau = match r.tau {
            Rate::Finite(x) => format!("{x:e}"),
            Rate::Infinite => "inf".into(),
        };
        t.rows.push(vec![
            p.d.to_string(),
            format!("{:e}", p.gamma),
            format!("{:e}", p.beta()),
            format!("{:e}", p.k),
            format!("{:e}", r.alpha),
            tau,
            r.log_corrected.to_string(),
            format!("{:?}", r.regime),
            r.attained.to_string(),
        ]);
    }
    Ok(t)
}

/// Fit the series named in a `rates` config.
pub fn fit_series(fit: &SeriesFit) -> Result<RateFit> {
    let text = std::fs::read_to_string(&fit.series)?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
    let header: Vec<&str> = lines.next().ok_or_else(|| Error::Config("empty series".into()))?.split(',').collect();
    let tj = header.iter().position(|h| *h == "t").ok_or_else(|| Error::Config("series has no t column".into()))?;
    let yj = header
        .iter()
        .position(|h| *h == fit.column)
        .ok_or_else(|| Error::Config(format!("series has no {} column", fit.column)))?;
    let (mut ts, mut ys) = (Vec::new(), Vec::new());
    for l in lines {
        let cells: Vec<&str> = l.split(',').collect();
        let parse = |j: usize| cells.get(j).and_then(|c| c.trim().parse::<f64>().ok());
        match (parse(tj), parse(yj)) {
            (Some(t), Some(y)) => {
                ts.push(t);
                ys.push(y);
            }
            _ => return Err(Error::Config(format!("bad series line: {l}"))),
        }
    }
    fit_rate(&ts, &ys, fit.model, fit.window)
}
