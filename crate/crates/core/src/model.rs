//! Closed-form layer: equilibrium normalization, the exponents α and γ⋆,
//! predicted decay rates and the Nash-type profile functions.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Absolute tolerance used to detect the critical line γ = 2 + β.
pub const CRITICAL_TOL: f64 = 1e-12;

/// Japanese bracket ⟨v⟩ = √(1 + v²).
#[inline]
pub fn bracket(v: f64) -> f64 {
    (1.0 + v * v).sqrt()
}

/// Surface area of the unit sphere in ℝ^d (ω₁ = 2).
pub fn sphere_area(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    2.0 * PI.powf(h) / libm::tgamma(h)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Kernel {
    /// b(v,v′) = Z⁻¹⟨v⟩^{-β}⟨v′⟩^{-β}
    Separable,
    /// b(v,v′) = |v − v′|^{-β}
    PowerDifference,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Operator {
    FokkerPlanck,
    Scattering { kernel: Kernel, beta: f64 },
    FractionalFP { sigma: f64 },
}

/// Model parameters; the exponent β is always derived from here.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub d: usize,
    pub gamma: f64,
    pub operator: Operator,
    #[serde(default)]
    pub k: f64,
}

impl ModelParams {
    pub fn new(d: usize, gamma: f64, operator: Operator, k: f64) -> Result<Self> {
        let p = ModelParams { d, gamma, operator, k };
        p.validate()?;
        Ok(p)
    }

    pub fn fokker_planck(gamma: f64) -> Result<Self> {
        Self::new(1, gamma, Operator::FokkerPlanck, 0.0)
    }

    pub fn scattering(gamma: f64, kernel: Kernel, beta: f64) -> Result<Self> {
        Self::new(1, gamma, Operator::Scattering { kernel, beta }, 0.0)
    }

    pub fn fractional(gamma: f64, sigma: f64) -> Result<Self> {
        Self::new(1, gamma, Operator::FractionalFP { sigma }, 0.0)
    }

    pub fn with_k(mut self, k: f64) -> Result<Self> {
        self.k = k;
        self.validate()?;
        Ok(self)
    }

    pub fn with_dim(mut self, d: usize) -> Result<Self> {
        self.d = d;
        self.validate()?;
        Ok(self)
    }

    pub fn beta(&self) -> f64 {
        match self.operator {
            Operator::FokkerPlanck => 2.0,
            Operator::Scattering { beta, .. } => beta,
            Operator::FractionalFP { sigma } => sigma - self.gamma,
        }
    }

    pub fn beta_plus(&self) -> f64 {
        self.beta().max(0.0)
    }

    pub fn sigma(&self) -> Option<f64> {
        match self.operator {
            Operator::FractionalFP { sigma } => Some(sigma),
            _ => None,
        }
    }

    pub fn alpha(&self) -> Result<f64> {
        alpha_exponent(self.gamma, self.beta())
    }

    pub fn is_critical(&self) -> bool {
        (self.gamma - (2.0 + self.beta())).abs() < CRITICAL_TOL
    }

    /// Normalization constant c_γ of the equilibrium.
    pub fn c_gamma(&self) -> f64 {
        normalization_constant(self.d, self.gamma).expect("validated")
    }

    /// Equilibrium F(v) = c_γ⟨v⟩^{-(d+γ)} as a function of |v|.
    pub fn equilibrium(&self, v: f64) -> f64 {
        self.c_gamma() * (1.0 + v * v).powf(-(self.d as f64 + self.gamma) / 2.0)
    }

    /// Default weight exponent η: −β when γ > β, otherwise −γ/2.
    pub fn default_eta(&self) -> f64 {
        let b = self.beta();
        if self.gamma > b {
            -b
        } else {
            -self.gamma / 2.0
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 1 {
            return Err(Error::Domain("dimension must be at least 1".into()));
        }
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(Error::Domain(format!("gamma must be positive, got {}", self.gamma)));
        }
        match self.operator {
            Operator::FractionalFP { sigma } => {
                if !(sigma > 0.0 && sigma < 2.0) {
                    return Err(Error::Domain(format!("sigma must lie in (0,2), got {sigma}")));
                }
            }
            Operator::Scattering { kernel: Kernel::PowerDifference, beta } => {
                if !(beta >= 0.0 && beta < self.d as f64 / 2.0) {
                    return Err(Error::Regime(format!(
                        "power-difference kernel needs beta in [0, d/2), got {beta}"
                    )));
                }
            }
            Operator::Scattering { kernel: Kernel::Separable, beta } => {
                if !beta.is_finite() {
                    return Err(Error::Domain("beta must be finite".into()));
                }
            }
            Operator::FokkerPlanck => {}
        }
        let b = self.beta();
        if self.gamma <= (-b).max(0.0) {
            return Err(Error::Regime(format!(
                "need gamma > max(0, -beta); gamma = {}, beta = {b}",
                self.gamma
            )));
        }
        if !(self.k >= 0.0) || self.k >= self.gamma {
            return Err(Error::Regime(format!(
                "moment exponent k = {} must lie in [0, gamma = {})",
                self.k, self.gamma
            )));
        }
        Ok(())
    }
}

pub fn normalization_constant(d: usize, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::Domain(format!("gamma must be positive, got {gamma}")));
    }
    if d < 1 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    let df = d as f64;
    Ok(PI.powf(-df / 2.0) * libm::tgamma((df + gamma) / 2.0) / libm::tgamma(gamma / 2.0))
}

pub fn alpha_exponent(gamma: f64, beta: f64) -> Result<f64> {
    if gamma <= (-beta).max(0.0) {
        return Err(Error::Regime(format!(
            "need gamma > max(0, -beta); gamma = {gamma}, beta = {beta}"
        )));
    }
    if gamma < 2.0 + beta - CRITICAL_TOL {
        if 1.0 + beta <= 0.0 {
            return Err(Error::Regime(format!(
                "gamma < 2 + beta requires 1 + beta > 0 (beta = {beta})"
            )));
        }
        Ok((gamma + beta) / (1.0 + beta))
    } else {
        Ok(2.0)
    }
}

/// Threshold curve γ⋆(β) separating the moment-limited regime τ = k/β from τ = d/α.
pub fn gamma_star(d: usize, beta: f64) -> Result<f64> {
    if beta < 0.0 {
        return Err(Error::Domain(format!("gamma_star needs beta >= 0, got {beta}")));
    }
    let df = d as f64;
    Ok(match d {
        0 => return Err(Error::Domain("dimension must be at least 1".into())),
        1 => 0.5 * (((5.0 * beta + 4.0) * beta).sqrt() - beta),
        2 => 0.5 * ((beta * (9.0 * beta + 8.0)).sqrt() - beta),
        _ => {
            let a = 0.5 * (((4.0 * df + 1.0) * beta * beta + 4.0 * df * beta).sqrt() - beta);
            a.max(df * beta / 2.0)
        }
    })
}

/// A decay exponent that may be infinite (the convention 1/0₊ = +∞).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Rate {
    Finite(f64),
    Infinite,
}

impl Rate {
    pub fn ratio(num: f64, den: f64) -> Rate {
        if den > 0.0 {
            Rate::Finite(num / den)
        } else {
            Rate::Infinite
        }
    }

    pub fn min(self, other: Rate) -> Rate {
        match (self, other) {
            (Rate::Infinite, r) | (r, Rate::Infinite) => r,
            (Rate::Finite(a), Rate::Finite(b)) => Rate::Finite(a.min(b)),
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Rate::Finite(x) => x,
            Rate::Infinite => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Rate::Finite(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Standard,
    CriticalLog,
    D1Intermediate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePrediction {
    pub alpha: f64,
    pub tau: Rate,
    pub log_corrected: bool,
    pub regime: Regime,
    /// false when τ is a supremum that the estimate does not reach
    pub attained: bool,
    /// the limiting value 2γ/(α(γ+β)+|γ−β|) reported alongside the intermediate bound
    pub intermediate_limit: Option<f64>,
}

pub fn predicted_rate(p: &ModelParams) -> Result<RatePrediction> {
    p.validate()?;
    let beta = p.beta();
    let gamma = p.gamma;
    let k = p.k;
    let alpha = alpha_exponent(gamma, beta)?;
    let df = p.d as f64;
    if p.is_critical() {
        return Ok(RatePrediction {
            alpha,
            tau: Rate::Finite(df / 2.0),
            log_corrected: true,
            regime: Regime::CriticalLog,
            attained: true,
            intermediate_limit: None,
        });
    }
    if p.d == 1 && beta > 1.0 && gamma > 1.0 && gamma < beta && k > gamma / alpha && k < gamma {
        let tau = (k + gamma) / (k * alpha - gamma + beta * (alpha + 1.0));
        let lim = 2.0 * gamma / (alpha * (gamma + beta) + (gamma - beta).abs());
        return Ok(RatePrediction {
            alpha,
            tau: Rate::Finite(tau),
            log_corrected: false,
            regime: Regime::D1Intermediate,
            attained: false,
            intermediate_limit: Some(lim),
        });
    }
    let tau = Rate::Finite(df / alpha).min(Rate::ratio(k, p.beta_plus()));
    Ok(RatePrediction {
        alpha,
        tau,
        log_corrected: false,
        regime: Regime::Standard,
        attained: true,
        intermediate_limit: None,
    })
}

/// τ⋆(η, k) = (k − η)/(α(k + β) + η + β).
pub fn tau_star(eta: f64, k: f64, alpha: f64, beta: f64) -> f64 {
    (k - eta) / (alpha * (k + beta) + eta + beta)
}

/// Fractional Nash profile Φ_a(s) = ω_d φ(a s/ω_d), with φ(x) the minimum over R of
/// R^d/d + (x/a)(1 + R^{-2})^{a/2}.
pub fn nash_profile(d: usize, a: f64, s: f64) -> Result<f64> {
    if !(a > 0.0 && a <= 2.0) {
        return Err(Error::Domain(format!("nash exponent a must lie in (0,2], got {a}")));
    }
    if !(s >= 0.0) {
        return Err(Error::Domain(format!("nash argument must be nonnegative, got {s}")));
    }
    if d < 1 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    let w = sphere_area(d);
    Ok(w * nash_phi(d, a, a * s / w))
}

fn nash_phi(d: usize, a: f64, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let df = d as f64;
    let r = nash_root(df, a, x);
    r.powf(df) / df + (x / a) * (1.0 + r.powi(-2)).powf(a / 2.0)
}

/// Root of R^{d+a}(1+R²)^{1−a/2} = x by bisection.
fn nash_root(df: f64, a: f64, x: f64) -> f64 {
    let g = |r: f64| (df + a) * r.ln() + (1.0 - a / 2.0) * (1.0 + r * r).ln() - x.ln();
    let mut lo = 0.0f64;
    let mut hi = 1.0f64.max(2.0 * x.powf(1.0 / (df + a)));
    while hi - lo > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if g(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Φ(x) = (1/d) x^{1+2/d} |log x| on (0, 1).
pub fn log_nash_profile(d: usize, x: f64) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Domain(format!("log profile needs x in (0,1), got {x}")));
    }
    let df = d as f64;
    Ok(x.powf(1.0 + 2.0 / df) * x.ln().abs() / df)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn normalization_examples() {
        assert!(close(normalization_constant(1, 1.0).unwrap(), 1.0 / PI, 1e-14));
        assert!(close(normalization_constant(3, 2.0).unwrap(), 3.0 / (4.0 * PI), 1e-14));
        assert!(normalization_constant(1, 0.0).is_err());
        let p = ModelParams::scattering(1.0, Kernel::Separable, 0.0).unwrap();
        assert!(close(p.equilibrium(0.0), 1.0 / PI, 1e-14));
    }

    #[test]
    fn alpha_examples() {
        assert_eq!(alpha_exponent(1.0, 0.0).unwrap(), 1.0);
        assert_eq!(alpha_exponent(4.0, 0.0).unwrap(), 2.0);
        assert_eq!(alpha_exponent(1.0, -0.5).unwrap(), 1.0);
        assert!(alpha_exponent(0.5, -1.2).is_err());
        let near = alpha_exponent(2.0 - 1e-9, 0.0).unwrap();
        assert!((near - 2.0).abs() < 1e-8);
    }

    #[test]
    fn gamma_star_examples() {
        assert_eq!(gamma_star(3, 0.0).unwrap(), 0.0);
        assert!(close(gamma_star(3, 4.0).unwrap(), 6.0, 1e-14));
        assert!(close(gamma_star(2, 1.0).unwrap(), 0.5 * (17f64.sqrt() - 1.0), 1e-14));
        assert!(gamma_star(1, -0.1).is_err());
        for d in 3..8 {
            let b = 4.0 / (d as f64 - 2.0);
            let df = d as f64;
            let a = 0.5 * (((4.0 * df + 1.0) * b * b + 4.0 * df * b).sqrt() - b);
            assert!(close(a, df * b / 2.0, 1e-12));
        }
    }

    #[test]
    fn rate_examples() {
        let p = ModelParams::scattering(1.0, Kernel::Separable, 0.0)
            .unwrap()
            .with_dim(3)
            .unwrap()
            .with_k(0.5)
            .unwrap();
        let r = predicted_rate(&p).unwrap();
        assert_eq!(r.tau, Rate::Finite(3.0));
        assert_eq!(r.regime, Regime::Standard);

        let p = ModelParams::scattering(3.0, Kernel::Separable, 0.0).unwrap().with_k(1.0).unwrap();
        assert_eq!(predicted_rate(&p).unwrap().tau, Rate::Finite(0.5));

        let p = ModelParams::scattering(4.0, Kernel::Separable, 2.0)
            .unwrap()
            .with_dim(2)
            .unwrap()
            .with_k(1.0)
            .unwrap();
        let r = predicted_rate(&p).unwrap();
        assert!(r.log_corrected);
        assert_eq!(r.regime, Regime::CriticalLog);
        assert_eq!(r.tau, Rate::Finite(1.0));
    }

    #[test]
    fn intermediate_regime_is_flagged() {
        let p = ModelParams::scattering(1.5, Kernel::Separable, 3.0).unwrap().with_k(1.4).unwrap();
        let r = predicted_rate(&p).unwrap();
        assert_eq!(r.regime, Regime::D1Intermediate);
        assert!(!r.attained);
        let alpha = r.alpha;
        let expected = (1.4 + 1.5) / (1.4 * alpha - 1.5 + 3.0 * (alpha + 1.0));
        assert!(close(r.tau.value(), expected, 1e-14));
        assert!(close(r.tau.value(), tau_star(-1.5, 1.4, alpha, 3.0), 1e-14));
        assert!(r.intermediate_limit.unwrap() > 0.0);
    }

    #[test]
    fn nash_limits() {
        assert_eq!(nash_profile(1, 1.0, 0.0).unwrap(), 0.0);
        let s = 1e-10;
        let small = nash_profile(1, 1.0, s).unwrap() / s.sqrt();
        let expected = 2.0 * 2.0 * (0.5f64).sqrt();
        assert!((small / expected - 1.0).abs() < 1e-3, "{small} vs {expected}");
        let big = nash_profile(1, 1.0, 1e6).unwrap() / 1e6;
        assert!((big - 1.0).abs() < 0.01);
    }

    #[test]
    fn log_profile_examples() {
        let e = std::f64::consts::E;
        assert!(close(log_nash_profile(1, 1.0 / e).unwrap(), e.powi(-3), 1e-14));
        assert!(close(log_nash_profile(2, 1.0 / e).unwrap(), 0.5 * e.powi(-2), 1e-14));
        assert!(log_nash_profile(1, 1.0 - 1e-12).unwrap() < 1e-11);
        assert!(log_nash_profile(1, 1.0).is_err());
    }

    #[test]
    fn parameter_checks() {
        assert!(ModelParams::scattering(0.2, Kernel::Separable, -0.5).is_err());
        assert!(ModelParams::scattering(1.0, Kernel::PowerDifference, 0.5).is_err());
        assert!(ModelParams::fractional(1.0, 2.0).is_err());
        assert!(ModelParams::scattering(1.0, Kernel::Separable, 0.0).unwrap().with_k(1.0).is_err());
        assert_eq!(ModelParams::fractional(1.5, 0.7).unwrap().beta(), 0.7 - 1.5);
        assert_eq!(ModelParams::fokker_planck(1.0).unwrap().beta(), 2.0);
    }
}
