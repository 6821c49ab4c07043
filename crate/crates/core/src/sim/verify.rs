//! The invariant battery behind the `verify` subcommand.

use crate::coefficients::{
    compute_coefficients, diffusion_limit_coeff, grid_coefficients, k_bound, kappa, mu2_asymptotic_reference,
    symbol_moments,
};
use crate::collision::identities::{hardy_poincare_sides, lyapunov_l1_check, scattering_gap_sides};
use crate::collision::{CollisionOperator, OperatorKind};
use crate::error::{Error, Result};
use crate::grid::VelocityGrid;
use crate::hypocoercivity::{apply_a, check_i_term_bounds, instant_report, transport};
use crate::model::{Kernel, ModelParams, Operator};
use crate::coefficients::SymbolFunctions;
use crate::states::{mixed_state, seeded_rng, smooth_state, white_state, SmoothProfile};
use crate::C64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

fn default_n() -> usize {
    200
}
fn default_samples() -> usize {
    50
}
fn default_seed() -> u64 {
    1
}
fn default_delta() -> f64 {
    1.0
}

/// Models checked by default: one per operator family and kernel.
pub fn default_models() -> Vec<ModelParams> {
    vec![
        ModelParams::fokker_planck(1.0).expect("valid"),
        ModelParams::scattering(1.0, Kernel::Separable, 0.0).expect("valid"),
        ModelParams::scattering(3.0, Kernel::Separable, 1.0).expect("valid"),
        ModelParams::scattering(1.0, Kernel::PowerDifference, 0.3).expect("valid"),
        ModelParams::fractional(1.0, 1.0).expect("valid"),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default = "default_n")]
    pub n_velocity: usize,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_models")]
    pub models: Vec<ModelParams>,
    /// strength of a detailed-balance-breaking mutation applied to every operator
    #[serde(default)]
    pub perturb: Option<f64>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            n_velocity: default_n(),
            samples: default_samples(),
            seed: default_seed(),
            delta: default_delta(),
            models: default_models(),
            perturb: None,
        }
    }
}

impl VerifyConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: VerifyConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 2.0) {
            return Err(Error::Config(format!("delta must lie in (0,2), got {}", self.delta)));
        }
        if self.n_velocity < 16 || self.samples == 0 {
            return Err(Error::Config("need n_velocity >= 16 and at least one sample".into()));
        }
        for m in &self.models {
            m.validate()?;
            if m.d != 1 {
                return Err(Error::Config("operators are checked in d = 1".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    /// the property being checked
    pub property: String,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "name,passed,value,threshold")?;
        for c in &self.checks {
            writeln!(out, "{},{},{:e},{:e}", c.name, c.passed, c.value, c.threshold)?;
        }
        Ok(())
    }
}

struct Sink(Vec<CheckResult>);

impl Sink {
    /// Record value ≤ threshold.
    fn le(&mut self, name: String, property: &str, value: f64, threshold: f64, detail: String) {
        self.0.push(CheckResult {
            name,
            property: property.into(),
            passed: value <= threshold,
            value,
            threshold,
            detail,
        });
    }

    fn error(&mut self, name: String, property: &str, e: Error) {
        self.0.push(CheckResult {
            name,
            property: property.into(),
            passed: false,
            value: f64::NAN,
            threshold: f64::NAN,
            detail: e.to_string(),
        });
    }
}

/// Short label of a model, used in check names.
pub fn model_label(p: &ModelParams) -> String {
    match p.operator {
        Operator::FokkerPlanck => format!("L1(gamma={})", p.gamma),
        Operator::Scattering { kernel: Kernel::Separable, beta } => format!("L2-sep(gamma={},beta={beta})", p.gamma),
        Operator::Scattering { kernel: Kernel::PowerDifference, beta } => {
            format!("L2-pow(gamma={},beta={beta})", p.gamma)
        }
        Operator::FractionalFP { sigma } => format!("L3(gamma={},sigma={sigma})", p.gamma),
    }
}

/// Run every check. Failures are report entries; only an invalid
/// configuration is an error.
pub fn verify_suite(cfg: &VerifyConfig) -> Result<VerifyReport> {
    cfg.validate()?;
    let mut sink = Sink(Vec::new());
    for p in &cfg.models {
        let label = model_label(p);
        let built = VelocityGrid::build_default(p, cfg.n_velocity)
            .and_then(|g| CollisionOperator::build(Arc::new(g)));
        match built {
            Ok(op) => {
                let op = match cfg.perturb {
                    Some(eps) => op.with_broken_symmetry(eps),
                    None => op,
                };
                operator_checks(&mut sink, cfg, &op, &label);
            }
            Err(e) => sink.error(format!("assembly/{label}"), "operator assembly", e),
        }
    }
    global_checks(&mut sink, cfg);
    Ok(VerifyReport { checks: sink.0 })
}

/// The per-operator part of the battery for an already assembled operator.
pub fn operator_report(cfg: &VerifyConfig, op: &CollisionOperator) -> VerifyReport {
    let mut sink = Sink(Vec::new());
    operator_checks(&mut sink, cfg, op, &model_label(&op.params));
    VerifyReport { checks: sink.0 }
}

fn operator_checks(sink: &mut Sink, cfg: &VerifyConfig, op: &CollisionOperator, label: &str) {
    let g = op.grid().clone();
    let mut rng = seeded_rng(cfg.seed);
    let states: Vec<Vec<C64>> = (0..cfg.samples)
        .map(|i| match i % 3 {
            0 => white_state(&g, &mut rng),
            1 => smooth_state(&g, &mut rng, 6),
            _ => mixed_state(&g, &mut rng),
        })
        .collect();

    let mass = states.iter().map(|f| op.mass_defect(f)).fold(0.0, f64::max);
    sink.le(format!("mass_conservation/{label}"), "|Σw(Lf)| ≤ 1e-8‖f‖", mass, 1e-8, String::new());

    let random = states.iter().map(|f| op.quadratic_form(f).re / g.norm2(f)).fold(f64::NEG_INFINITY, f64::max);
    match op.max_dissipation_eigenvalue() {
        Ok(top) => sink.le(
            format!("dissipativity/{label}"),
            "Re⟨f,Lf⟩ ≤ 1e-10‖f‖²",
            top.max(random),
            1e-10,
            format!("spectral {top:.3e}, random states {random:.3e}"),
        ),
        Err(e) => sink.error(format!("dissipativity/{label}"), "Re⟨f,Lf⟩ ≤ 1e-10‖f‖²", e),
    }

    let kernel_tol = if op.kind == OperatorKind::L3 { 1e-3 } else { 1e-6 };
    sink.le(format!("equilibrium_kernel/{label}"), "‖LF‖/‖F‖ small", op.kernel_residual(), kernel_tol, String::new());

    let dir = states
        .iter()
        .map(|f| {
            let d = op.dirichlet_form(f);
            (op.quadratic_form(f).re + d).abs() / d.max(g.norm2(f))
        })
        .fold(0.0, f64::max);
    sink.le(format!("dirichlet_form/{label}"), "−⟨f,Lf⟩ equals the Dirichlet form", dir, 1e-9, String::new());

    let sym = SymbolFunctions::new(&op.params, op.params.default_eta());
    let mut worst: f64 = 0.0;
    let mut worst_h: f64 = 0.0;
    for f in &states {
        let xi = 10f64.powf(rng.random_range(-4.0..3.0));
        let a = g.dot(&apply_a(&g, &sym, xi, f), f);
        let n2 = g.norm2(f);
        worst = worst.max(a.norm() / n2);
        let h = n2 + cfg.delta * a.re;
        let lo = (2.0 - cfg.delta) * n2 - 2.0 * h;
        let hi = 2.0 * h - (2.0 + cfg.delta) * n2;
        worst_h = worst_h.max(lo.max(hi) / n2);
    }
    sink.le(format!("a_bound/{label}"), "|⟨Af,f⟩| ≤ ½‖f‖²", worst, 0.5, String::new());
    sink.le(
        format!("entropy_equivalence/{label}"),
        "(2−δ)‖f‖² ≤ 2H ≤ (2+δ)‖f‖²",
        worst_h,
        1e-12,
        format!("delta = {}", cfg.delta),
    );

    let skew = states
        .iter()
        .zip(states.iter().skip(1))
        .map(|(f, h)| {
            let xi = 0.7;
            let (tf, th) = (transport(&g, xi, f), transport(&g, xi, h));
            let scale = (g.norm2(&tf) * g.norm2(h)).sqrt() + (g.norm2(f) * g.norm2(&th)).sqrt();
            (g.dot(&tf, h) + g.dot(f, &th)).norm() / scale
        })
        .fold(0.0, f64::max);
    let ptp = states
        .iter()
        .map(|f| {
            let t = transport(&g, 0.7, &g.pi(f));
            g.norm2(&g.pi(&t)).sqrt() / g.norm2(f).sqrt()
        })
        .fold(0.0, f64::max);
    sink.le(format!("transport_skew/{label}"), "⟨Tf,g⟩ + ⟨f,Tg⟩ = 0 relative to ‖Tf‖‖g‖ + ‖f‖‖Tg‖", skew, 1e-12, String::new());
    sink.le(format!("pi_t_pi/{label}"), "ΠTΠ = 0", ptp, 1e-12, String::new());

    let eta = op.params.default_eta();
    if eta >= -op.params.beta() {
        let adj = op.adjoint_matrix();
        let mut violations = 0usize;
        let mut total = 0usize;
        let mut worst_ratio: f64 = 0.0;
        let mut i1_gap: f64 = 0.0;
        for (i, f) in states.iter().enumerate() {
            let xi = 10f64.powf(-3.0 + 5.0 * i as f64 / states.len() as f64);
            let c = grid_coefficients(op, &adj, xi, eta);
            match instant_report(op, xi, f, 0.0, cfg.delta, eta) {
                Ok(r) => {
                    i1_gap = i1_gap.max((r.i_terms[0].re - r.i1_dual).abs() / r.i1_dual.abs().max(f64::MIN_POSITIVE));
                    let b = check_i_term_bounds(&r, &c);
                    for k in 0..6 {
                        total += 1;
                        violations += usize::from(!b.holds[k]);
                        if b.rhs[k] > 0.0 {
                            worst_ratio = worst_ratio.max(b.lhs[k] / b.rhs[k]);
                        }
                    }
                }
                Err(e) => {
                    sink.error(format!("i_term_bounds/{label}"), "|Iₖ| bounded by coefficient products", e);
                    return;
                }
            }
        }
        sink.le(
            format!("i_term_bounds/{label}"),
            "|Iₖ| bounded by coefficient products",
            violations as f64,
            0.0,
            format!("{total} bounds, worst lhs/rhs {worst_ratio:.3}"),
        );
        sink.le(format!("i1_dual/{label}"), "I₁ equals λ₀μ₂|ρ|²", i1_gap, 1e-8, String::new());
    }
}

fn global_checks(sink: &mut Sink, cfg: &VerifyConfig) {
    let mut rng = seeded_rng(cfg.seed + 1);
    let fp = ModelParams::fokker_planck(1.0).expect("valid");
    match VelocityGrid::build_default(&fp, 300) {
        Ok(g) => {
            let worst = (0..cfg.samples)
                .map(|_| {
                    let h = SmoothProfile::random(&mut rng, 8);
                    let (l, r) = hardy_poincare_sides(&g, &h);
                    r - l
                })
                .fold(f64::NEG_INFINITY, f64::max);
            sink.le(
                "hardy_poincare/L1(gamma=1)".into(),
                "∫|h′|²F ≥ 2(d+γ)∫|h−h̄|²⟨v⟩⁻²F",
                worst,
                1e-8,
                "largest rhs − lhs".into(),
            );
        }
        Err(e) => sink.error("hardy_poincare/L1(gamma=1)".into(), "Hardy-Poincaré inequality", e),
    }

    let lyap = VelocityGrid::build_default(&fp, 800)
        .and_then(|g| CollisionOperator::build(Arc::new(g)))
        .and_then(|op| lyapunov_l1_check(&op, 0.5, 100.0));
    match lyap {
        Ok(c) => sink.le(
            "lyapunov_identity/L1(gamma=1,k=0.5)".into(),
            "F⁻¹L₁(F⟨v⟩^k) closed form, |v| ≤ 100",
            c.max_error,
            1e-4,
            "n = 800".into(),
        ),
        Err(e) => sink.error("lyapunov_identity/L1(gamma=1,k=0.5)".into(), "Lyapunov identity", e),
    }

    let bgk = ModelParams::scattering(1.0, Kernel::Separable, 0.0).expect("valid");
    if let Ok(g) = VelocityGrid::build_default(&bgk, cfg.n_velocity) {
        let worst = (0..cfg.samples.min(20))
            .map(|_| {
                let f = smooth_state(&g, &mut rng, 6);
                let (l, r) = scattering_gap_sides(&g, 0.0, &f);
                (l - r).abs() / l
            })
            .fold(0.0, f64::max);
        sink.le("scattering_gap/L2-sep(beta=0)".into(), "gap inequality is an equality for β = 0", worst, 1e-10, String::new());
    }

    let asym = |p: ModelParams| -> Result<(f64, f64)> {
        let a = symbol_moments(&p, 1e-5, p.default_eta())?.mu2;
        let b = symbol_moments(&p, 1e-3, p.default_eta())?.mu2;
        Ok(((b / a).ln() / 100f64.ln(), mu2_asymptotic_reference(&p).exponent))
    };
    for (gamma, beta) in [(1.0, 0.0), (3.0, 0.0), (1.0, -0.5)] {
        let name = format!("mu2_exponent/(gamma={gamma},beta={beta})");
        match ModelParams::scattering(gamma, Kernel::Separable, beta).and_then(asym) {
            Ok((slope, e)) => sink.le(
                name,
                "small-ξ exponent of μ₂",
                (slope / e - 1.0).abs(),
                0.02,
                format!("slope {slope:.4}, reference {e}"),
            ),
            Err(e) => sink.error(name, "small-ξ exponent of μ₂", e),
        }
    }

    let ksweep = || -> Result<(f64, f64)> {
        let g = Arc::new(VelocityGrid::build_default(&bgk, cfg.n_velocity)?);
        let op = CollisionOperator::build(g)?;
        let (mut hi_min, mut hi_max, mut max_all) = (f64::INFINITY, 0.0_f64, 0.0_f64);
        for i in 0..60 {
            let xi = 10f64.powf(-6.0 + 9.0 * i as f64 / 59.0);
            let k = k_bound(&compute_coefficients(&op, xi, 0.0)?)?;
            if !k.is_finite() {
                return Err(Error::Domain(format!("K infinite at xi = {xi}")));
            }
            max_all = max_all.max(k);
            if xi >= 1.0 {
                hi_min = hi_min.min(k);
                hi_max = hi_max.max(k);
            }
        }
        Ok((hi_max / hi_min, max_all))
    };
    match ksweep() {
        Ok((ratio, max_all)) => sink.le(
            "k_bound_sweep/L2-sep(gamma=1,beta=0)".into(),
            "K(ξ) finite and flat for |ξ| ≥ 1",
            ratio,
            10.0,
            format!("max K = {max_all:.4}"),
        ),
        Err(e) => sink.error("k_bound_sweep/L2-sep(gamma=1,beta=0)".into(), "K(ξ) bounded", e),
    }

    match diffusion_limit_coeff(&bgk, 1.0, 1e-3).and_then(|b| Ok(b / kappa(&bgk)?)) {
        Ok(r) => sink.le(
            "diffusion_limit/L2-sep(gamma=1,beta=0)".into(),
            "b_ε → κ|ξ|^α",
            (r - 1.0).abs(),
            0.05,
            "eps = 1e-3, xi = 1".into(),
        ),
        Err(e) => sink.error("diffusion_limit/L2-sep(gamma=1,beta=0)".into(), "b_ε → κ|ξ|^α", e),
    }

    for (gamma, sigma) in [(1.0, 1.0), (1.5, 0.7)] {
        let name = format!("force_field/L3(gamma={gamma},sigma={sigma})");
        let built = ModelParams::fractional(gamma, sigma)
            .and_then(|p| VelocityGrid::build_default(&p, cfg.n_velocity))
            .and_then(|g| crate::collision::build_force_field(&g).map(|ff| (g, ff)));
        match built {
            Ok((g, ff)) => {
                let (lo, hi) = ff.g_range(&g);
                let ok = lo > 0.0 && hi.is_finite();
                sink.le(
                    name,
                    "Δ^{σ/2}F + ∇·(EF) = 0 and G bounded above and below",
                    if ok { ff.residual } else { f64::INFINITY },
                    1e-3,
                    format!("G in [{lo:.4}, {hi:.4}]"),
                );
            }
            Err(e) => sink.error(name, "force field construction", e),
        }
    }
}
