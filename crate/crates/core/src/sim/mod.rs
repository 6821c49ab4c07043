//! Space–velocity simulation in d = 1 by a sweep over Fourier modes.
//!
//! For f^in(x,v) = g(x)h(v) every mode starts at ĝ(ξ)h and evolves
//! independently under ∂ₜf̂ = (L − iξv)f̂. Norms are rebuilt by Plancherel,
//! ‖f(t)‖² = (1/π)∫₀^∞ ‖f̂(t,ξ)‖² dξ, using evenness in ξ.
//!
//! The ξ quadrature is composite Gauss–Legendre: panels in log ξ from
//! ξ_min = 2π/X_box up to 1, one linear panel from 1 to ξ_max, and the
//! sliver [0, ξ_min] lumped onto the smallest node.

pub mod fit;
pub mod plot;
pub mod tasks;
pub mod verify;

pub use fit::{default_window, fit_rate, RateFit, RateModel};
pub use verify::{operator_report, verify_suite, CheckResult, VerifyConfig, VerifyReport};

use crate::collision::CollisionOperator;
use crate::error::{Error, Result};
use crate::grid::VelocityGrid;
use crate::hypocoercivity::{EvolveMethod, ModeEvolver, ModeState};
use crate::model::{bracket, predicted_rate, ModelParams, RatePrediction};
use crate::quad::gauss_legendre;
use crate::C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

/// Fraction of ‖f(t_max)‖² near ξ_min above which a run is box-limited.
pub const BOX_FRACTION_LIMIT: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpatialProfile {
    /// unit-mass Gaussian of standard deviation `width`
    Gaussian { width: f64 },
}

impl SpatialProfile {
    /// ĝ(ξ) = ∫g(x)e^{−ixξ}dx.
    pub fn fourier(&self, xi: f64) -> f64 {
        match *self {
            SpatialProfile::Gaussian { width } => (-0.5 * width * width * xi * xi).exp(),
        }
    }

    /// ∫g² dx.
    pub fn l2_norm2(&self) -> f64 {
        match *self {
            SpatialProfile::Gaussian { width } => 1.0 / (2.0 * width * PI.sqrt()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VelocityProfile {
    /// h = F
    Equilibrium,
    /// h ∝ (1 − (v−c)²/w²)² on |v − c| < w
    Bump { center: f64, width: f64 },
    /// h ∝ ⟨v⟩^{−exponent}
    PowerTail { exponent: f64 },
    /// two-column CSV (v, h), linearly interpolated, zero outside
    File { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialCondition {
    pub spatial: SpatialProfile,
    pub velocity: VelocityProfile,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub count: usize,
}

impl TimeGrid {
    /// 0 followed by `count` log-spaced times.
    pub fn times(&self) -> Vec<f64> {
        let (a, b) = (self.t_min.log10(), self.t_max.log10());
        let mut t = vec![0.0];
        t.extend((0..self.count).map(|i| 10f64.powf(a + (b - a) * i as f64 / (self.count - 1) as f64)));
        t
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub model: RateModel,
    #[serde(default)]
    pub window: Option<(f64, f64)>,
    #[serde(default = "default_stderr_max")]
    pub stderr_max: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig { model: RateModel::PowerLaw, window: None, stderr_max: default_stderr_max() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OutputConfig {
    #[serde(default)]
    pub csv: Option<PathBuf>,
    #[serde(default)]
    pub modes_csv: Option<PathBuf>,
    #[serde(default)]
    pub svg: Option<PathBuf>,
}

fn default_stderr_max() -> f64 {
    0.05
}
fn default_xi_max() -> f64 {
    8.0
}
fn default_box() -> f64 {
    2f64.powi(26)
}
fn default_delta() -> f64 {
    1.0
}
fn default_tol() -> f64 {
    1e-8
}
fn default_gate() -> f64 {
    3.0
}

/// Simulation configuration, read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub params: ModelParams,
    pub n_velocity: usize,
    pub n_modes: usize,
    #[serde(default = "default_xi_max")]
    pub xi_max: f64,
    #[serde(default = "default_box")]
    pub box_length: f64,
    pub initial: InitialCondition,
    pub time: TimeGrid,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub fit: FitConfig,
    /// bound on sup‖f(t)‖_k/‖f^in‖_k
    #[serde(default = "default_gate")]
    pub weighted_gate: f64,
    #[serde(default)]
    pub output: OutputConfig,
}

impl SimConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SimConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.params.d != 1 {
            return Err(Error::Config("simulations run in d = 1".into()));
        }
        if self.n_velocity < 16 {
            return Err(Error::Config("n_velocity must be at least 16".into()));
        }
        if self.n_modes < 16 {
            return Err(Error::Config("n_modes must be at least 16".into()));
        }
        if !(self.xi_max > 1.0) {
            return Err(Error::Config("xi_max must exceed 1".into()));
        }
        if !(self.box_length > 2.0 * PI) {
            return Err(Error::Config("box_length must exceed 2π".into()));
        }
        let t = self.time;
        if !(t.t_min > 0.0 && t.t_max > t.t_min && t.count >= 2) {
            return Err(Error::Config("time grid needs 0 < t_min < t_max and count ≥ 2".into()));
        }
        if !(self.delta > 0.0 && self.delta < 2.0) {
            return Err(Error::Config(format!("delta must lie in (0,2), got {}", self.delta)));
        }
        if !(self.tol > 0.0 && self.tol < 1e-2) {
            return Err(Error::Config("tol must lie in (0, 1e-2)".into()));
        }
        match &self.initial.spatial {
            SpatialProfile::Gaussian { width } if !(*width > 0.0) => {
                return Err(Error::Config("spatial width must be positive".into()))
            }
            _ => {}
        }
        self.check_initial_moments()
    }

    /// ⦀f^in⦀_k < ∞: h ∈ L¹(dv) ∩ L²(⟨v⟩^k dμ).
    fn check_initial_moments(&self) -> Result<()> {
        let p = &self.params;
        let tail = (p.d as f64) + p.gamma;
        let decay = match &self.initial.velocity {
            VelocityProfile::Equilibrium => tail,
            VelocityProfile::Bump { width, .. } => {
                if !(*width > 0.0) {
                    return Err(Error::Config("bump width must be positive".into()));
                }
                f64::INFINITY
            }
            VelocityProfile::PowerTail { exponent } => *exponent,
            VelocityProfile::File { .. } => return Ok(()),
        };
        // |h|²⟨v⟩^k/F ~ |v|^{−2p+k+d+γ} must be integrable, and h itself
        if !(decay > 1.0) || !(2.0 * decay - p.k - tail > 1.0) {
            return Err(Error::Config(format!(
                "initial velocity profile decays like |v|^-{decay}, so its k = {} weighted norm is infinite",
                p.k
            )));
        }
        Ok(())
    }
}

/// Node values of the velocity profile, normalized to unit mass.
pub fn velocity_profile_values(profile: &VelocityProfile, grid: &VelocityGrid) -> Result<Vec<f64>> {
    let v = grid.nodes();
    let raw: Vec<f64> = match profile {
        VelocityProfile::Equilibrium => grid.f_values().to_vec(),
        VelocityProfile::Bump { center, width } => v
            .iter()
            .map(|&x| {
                let s = (x - center) / width;
                if s.abs() < 1.0 {
                    (1.0 - s * s).powi(2)
                } else {
                    0.0
                }
            })
            .collect(),
        VelocityProfile::PowerTail { exponent } => v.iter().map(|&x| bracket(x).powf(-exponent)).collect(),
        VelocityProfile::File { path } => read_profile(path, v)?,
    };
    let mass: f64 = raw.iter().zip(grid.weights()).map(|(h, w)| h * w).sum();
    if !(mass.abs() > 0.0) || !mass.is_finite() {
        return Err(Error::Config("initial velocity profile has zero or infinite mass on the grid".into()));
    }
    Ok(raw.iter().map(|h| h / mass).collect())
}

fn read_profile(path: &Path, nodes: &[f64]) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    let mut pts = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(|c: char| c.is_alphabetic()) {
            continue;
        }
        let mut it = line.split(',').map(|s| s.trim().parse::<f64>());
        match (it.next(), it.next()) {
            (Some(Ok(a)), Some(Ok(b))) => pts.push((a, b)),
            _ => return Err(Error::Config(format!("bad profile line: {line}"))),
        }
    }
    if pts.len() < 2 || pts.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::Config("profile file needs at least two rows with increasing v".into()));
    }
    Ok(nodes
        .iter()
        .map(|&x| {
            if x < pts[0].0 || x > pts[pts.len() - 1].0 {
                return 0.0;
            }
            let j = pts.partition_point(|p| p.0 <= x).clamp(1, pts.len() - 1);
            let (a, b) = (pts[j - 1], pts[j]);
            a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0)
        })
        .collect())
}

/// Nodes and weights for ∫₀^∞ g(ξ) dξ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeQuadrature {
    pub xi: Vec<f64>,
    pub weights: Vec<f64>,
    pub xi_min: f64,
}

impl ModeQuadrature {
    pub fn new(n_modes: usize, xi_min: f64, xi_max: f64) -> Result<Self> {
        if !(xi_min > 0.0 && xi_min < 1.0 && xi_max > 1.0) || n_modes < 16 {
            return Err(Error::Config("mode quadrature needs 0 < xi_min < 1 < xi_max and at least 16 modes".into()));
        }
        let n_lin = (n_modes / 6).max(16);
        let n_log = n_modes - n_lin;
        let decades = -xi_min.log10();
        let panels = (decades.ceil() as usize).clamp(1, n_log / 4);
        let mut xi = Vec::with_capacity(n_modes);
        let mut weights = Vec::with_capacity(n_modes);
        let (a, b) = (xi_min.ln(), 0.0);
        let h = (b - a) / panels as f64;
        for p in 0..panels {
            let m = n_log / panels + usize::from(p < n_log % panels);
            let (x, w) = gauss_legendre(m);
            let lo = a + p as f64 * h;
            for (xj, wj) in x.iter().zip(&w) {
                let u = lo + 0.5 * h * (xj + 1.0);
                xi.push(u.exp());
                weights.push(0.5 * h * wj * u.exp());
            }
        }
        let (x, w) = gauss_legendre(n_lin);
        for (xj, wj) in x.iter().zip(&w) {
            xi.push(1.0 + 0.5 * (xi_max - 1.0) * (xj + 1.0));
            weights.push(0.5 * (xi_max - 1.0) * wj);
        }
        weights[0] += xi_min;
        Ok(ModeQuadrature { xi, weights, xi_min })
    }

    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }
}

/// Time series produced by [`run_simulation`].
#[derive(Debug, Clone, Serialize)]
pub struct SimResult {
    pub times: Vec<f64>,
    /// ‖f(t)‖²_{L²(dx dμ)}
    pub l2_norm2: Vec<f64>,
    /// ‖f(t)‖²_{L²(⟨v⟩^k dx dμ)}
    pub weighted_norm2: Vec<f64>,
    pub k: f64,
    /// ‖f^in‖_{L¹}; mass conservation and positivity keep ‖f(t)‖_{L¹} below it
    pub l1_bound: f64,
    pub modes: ModeQuadrature,
    /// ‖f̂(t,ξⱼ)‖², indexed [mode][time]
    pub mode_norm2: Vec<Vec<f64>>,
    /// |Π-mass drift| of the ξ = 0 mode relative to its initial mass
    pub mass_drift: f64,
    /// reconstructed ‖f(0)‖² against ∫g²dx·‖h‖₀²
    pub plancherel_error: f64,
    /// share of ‖f(t_max)‖² carried by modes with ξ ≤ 3ξ_min
    pub box_fraction: f64,
    pub box_limited: bool,
    /// modes that fell back to the implicit stepper
    pub implicit_modes: usize,
    pub prediction: RatePrediction,
}

impl SimResult {
    /// Global ‖f(t)‖² nonincreasing at all sampled times, up to relative `tol`.
    pub fn is_monotone(&self, tol: f64) -> bool {
        self.l2_norm2.windows(2).all(|w| w[1] <= w[0] * (1.0 + tol))
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "t,l2_norm2,weighted_norm2,l1_bound")?;
        for i in 0..self.times.len() {
            writeln!(
                out,
                "{:e},{:e},{:e},{:e}",
                self.times[i], self.l2_norm2[i], self.weighted_norm2[i], self.l1_bound
            )?;
        }
        Ok(())
    }

    /// One row per (mode, time).
    pub fn write_modes_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "xi,weight,t,norm2")?;
        for (j, row) in self.mode_norm2.iter().enumerate() {
            for (i, n) in row.iter().enumerate() {
                writeln!(out, "{:e},{:e},{:e},{:e}", self.modes.xi[j], self.modes.weights[j], self.times[i], n)?;
            }
        }
        Ok(())
    }
}

/// Evolve every retained mode and rebuild the global norms.
pub fn run_simulation(cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate()?;
    let grid = Arc::new(VelocityGrid::build_default(&cfg.params, cfg.n_velocity)?);
    let op = CollisionOperator::build(grid.clone())?;
    run_with_operator(cfg, &op)
}

/// As [`run_simulation`] with a prebuilt operator.
pub fn run_with_operator(cfg: &SimConfig, op: &CollisionOperator) -> Result<SimResult> {
    let grid = op.grid().clone();
    let k = cfg.params.k;
    let h = velocity_profile_values(&cfg.initial.velocity, &grid)?;
    let h: Vec<C64> = h.iter().map(|&x| C64::new(x, 0.0)).collect();
    let times = cfg.time.times();
    let modes = ModeQuadrature::new(cfg.n_modes, 2.0 * PI / cfg.box_length, cfg.xi_max)?;
    let spatial = &cfg.initial.spatial;

    let sweep: Vec<Result<(Vec<f64>, Vec<f64>, bool)>> = modes
        .xi
        .par_iter()
        .map(|&xi| {
            let ev = ModeEvolver::new(op, xi, cfg.tol);
            let traj = ev.evolve(&ModeState::new(xi, h.clone(), 0.0), &times)?;
            let g2 = spatial.fourier(xi).powi(2);
            let n0 = traj.iter().map(|s| g2 * grid.norm2(&s.values)).collect();
            let nk = traj.iter().map(|s| g2 * grid.norm2_k(&s.values, k)).collect();
            Ok((n0, nk, matches!(ev.method(), EvolveMethod::Implicit(_))))
        })
        .collect();
    let mut mode_norm2 = Vec::with_capacity(modes.len());
    let mut mode_normk = Vec::with_capacity(modes.len());
    let mut implicit_modes = 0;
    for r in sweep {
        let (a, b, imp) = r?;
        mode_norm2.push(a);
        mode_normk.push(b);
        implicit_modes += usize::from(imp);
    }
    let reduce = |rows: &[Vec<f64>], i: usize| -> f64 {
        rows.iter().zip(&modes.weights).map(|(r, w)| w * r[i]).sum::<f64>() / PI
    };
    let l2_norm2: Vec<f64> = (0..times.len()).map(|i| reduce(&mode_norm2, i)).collect();
    let weighted_norm2: Vec<f64> = (0..times.len()).map(|i| reduce(&mode_normk, i)).collect();

    let zero = ModeEvolver::new(op, 0.0, cfg.tol).evolve(&ModeState::new(0.0, h.clone(), 0.0), &times)?;
    let m0 = grid.rho(&h);
    let mass_drift = zero.iter().map(|s| (grid.rho(&s.values) - m0).norm()).fold(0.0, f64::max) / m0.norm();

    let direct = spatial.l2_norm2() * grid.norm2(&h);
    let plancherel_error = (l2_norm2[0] - direct).abs() / direct;

    let last = times.len() - 1;
    let near: f64 = modes
        .xi
        .iter()
        .zip(&modes.weights)
        .zip(&mode_norm2)
        .filter(|((&x, _), _)| x <= 3.0 * modes.xi_min)
        .map(|((_, w), r)| w * r[last])
        .sum::<f64>()
        / PI;
    let box_fraction = near / l2_norm2[last];
    let l1_bound = h.iter().zip(grid.weights()).map(|(x, w)| x.norm() * w).sum();

    let result = SimResult {
        times,
        l2_norm2,
        weighted_norm2,
        k,
        l1_bound,
        modes,
        mode_norm2,
        mass_drift,
        plancherel_error,
        box_fraction,
        box_limited: box_fraction > BOX_FRACTION_LIMIT,
        implicit_modes,
        prediction: predicted_rate(&cfg.params)?,
    };
    if let Some(p) = &cfg.output.csv {
        result.write_csv(p)?;
    }
    if let Some(p) = &cfg.output.modes_csv {
        result.write_modes_csv(p)?;
    }
    if let Some(p) = &cfg.output.svg {
        let tau = result.prediction.tau.is_finite().then(|| result.prediction.tau.value());
        plot::write_decay_svg(p, &result.times, &result.l2_norm2, tau, "‖f(t)‖² against t")?;
    }
    Ok(result)
}

/// Weighted-norm propagation along a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedNormReport {
    pub k: f64,
    /// sup_t ‖f(t)‖_k / ‖f^in‖_k
    pub ratio_max: f64,
    pub gate: f64,
    /// log–log slope of ‖f(t)‖_k² over the last decade
    pub final_decade_slope: f64,
    pub upward_trend: bool,
    pub passes: bool,
}

/// Check sup_t ‖f(t)‖_k/‖f^in‖_k ≤ gate and the absence of growth late in the run.
pub fn weighted_norm_monitor(result: &SimResult, gate: f64) -> Result<WeightedNormReport> {
    if !(result.k > 0.0) {
        return Err(Error::Config("weighted-norm monitoring needs k > 0".into()));
    }
    let w0 = result.weighted_norm2[0];
    let ratio_max = result.weighted_norm2.iter().map(|w| (w / w0).sqrt()).fold(0.0, f64::max);
    let (lo, hi) = default_window(&result.times);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (&t, &w) in result.times.iter().zip(&result.weighted_norm2) {
        if t >= lo && t <= hi && w > 0.0 {
            xs.push(t.ln());
            ys.push(w.ln());
        }
    }
    let n = xs.len() as f64;
    let slope = if xs.len() >= 2 {
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        sxy / sxx
    } else {
        0.0
    };
    let upward_trend = slope > 1e-3;
    Ok(WeightedNormReport {
        k: result.k,
        ratio_max,
        gate,
        final_decade_slope: slope,
        upward_trend,
        passes: ratio_max <= gate && !upward_trend,
    })
}

/// Parameters of a run with the given model and defaults elsewhere.
pub fn default_config(params: ModelParams) -> SimConfig {
    SimConfig {
        params,
        n_velocity: 400,
        n_modes: 256,
        xi_max: default_xi_max(),
        box_length: default_box(),
        initial: InitialCondition {
            spatial: SpatialProfile::Gaussian { width: 1.0 },
            velocity: VelocityProfile::Equilibrium,
        },
        time: TimeGrid { t_min: 0.1, t_max: 1e4, count: 51 },
        delta: default_delta(),
        tol: default_tol(),
        fit: FitConfig::default(),
        weighted_gate: default_gate(),
        output: OutputConfig::default(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Kernel;

    #[test]
    fn mode_quadrature_integrates_gaussian() {
        let q = ModeQuadrature::new(256, 2.0 * PI / 2f64.powi(26), 8.0).unwrap();
        let s: f64 = q.xi.iter().zip(&q.weights).map(|(x, w)| w * (-x * x).exp()).sum();
        assert!((s - PI.sqrt() / 2.0).abs() < 1e-10);
        let e: f64 = q.xi.iter().zip(&q.weights).map(|(x, w)| w * (-2.0 * x * 1e4).exp()).sum();
        assert!((e * 2e4 - 1.0).abs() < 1e-4);
    }

    #[test]
    fn config_roundtrip_and_rejections() {
        let p = ModelParams::scattering(1.0, Kernel::Separable, 0.0).unwrap().with_k(0.5).unwrap();
        let cfg = default_config(p);
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(SimConfig::from_json(&text).unwrap(), cfg);
        let bad = text.replace("\"k\":0.5", "\"k\":1.5");
        assert!(SimConfig::from_json(&bad).is_err());
        let mut c = cfg.clone();
        c.delta = 2.5;
        assert!(c.validate().is_err());
        c = cfg.clone();
        c.initial.velocity = VelocityProfile::PowerTail { exponent: 1.6 };
        assert!(c.validate().is_err());
    }

    #[test]
    fn small_run_is_consistent() {
        let p = ModelParams::scattering(1.0, Kernel::Separable, 0.0).unwrap().with_k(0.5).unwrap();
        let mut cfg = default_config(p);
        cfg.n_velocity = 80;
        cfg.n_modes = 96;
        cfg.time = TimeGrid { t_min: 0.1, t_max: 100.0, count: 13 };
        let r = run_simulation(&cfg).unwrap();
        assert!(r.plancherel_error < 1e-6, "{}", r.plancherel_error);
        assert!(r.mass_drift < 1e-10);
        assert!(r.is_monotone(1e-10));
        assert!(!r.box_limited);
    }
}
