//! Least-squares decay-rate fits in log–log coordinates.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateModel {
    /// log y = c − τ log(1+t)
    PowerLaw,
    /// log y = c − τ (log t + log log t)
    PowerLogLaw,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFit {
    pub model: RateModel,
    pub tau_hat: f64,
    /// fitted log C
    pub intercept: f64,
    pub window: (f64, f64),
    /// standard error of τ̂
    pub stderr: f64,
    /// max |log y − fit| over the window
    pub residual: f64,
    pub rms_residual: f64,
    /// τ̂ of the t log t model when that model was fitted
    pub log_corrected_fit: Option<f64>,
    pub points: usize,
}

impl RateFit {
    /// τ̂ is usable when its standard error is below `threshold`.
    pub fn is_valid(&self, threshold: f64) -> bool {
        self.stderr < threshold
    }
}

/// Last decade of the series.
pub fn default_window(times: &[f64]) -> (f64, f64) {
    let t_max = times.iter().copied().fold(0.0, f64::max);
    (t_max / 10.0, t_max)
}

/// Fit `values` ~ C·X(t)^{−τ} over `window` (inclusive). Requires positive
/// times spanning at least two decades and at least four points in the window.
pub fn fit_rate(times: &[f64], values: &[f64], model: RateModel, window: Option<(f64, f64)>) -> Result<RateFit> {
    if times.len() != values.len() {
        return Err(Error::Window("times and values differ in length".into()));
    }
    let pos: Vec<f64> = times.iter().copied().filter(|&t| t > 0.0).collect();
    let (t_lo_all, t_hi_all) = pos.iter().fold((f64::INFINITY, 0.0_f64), |(a, b), &t| (a.min(t), b.max(t)));
    if pos.is_empty() || t_hi_all < 100.0 * t_lo_all {
        return Err(Error::Window("series must span at least two decades of positive times".into()));
    }
    let (lo, hi) = window.unwrap_or_else(|| default_window(times));
    if model == RateModel::PowerLogLaw && lo <= std::f64::consts::E {
        return Err(Error::Window("the t log t model needs a window beyond t = e".into()));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&t, &y) in times.iter().zip(values) {
        if t >= lo * (1.0 - 1e-12) && t <= hi * (1.0 + 1e-12) {
            if !(y > 0.0) || !y.is_finite() {
                return Err(Error::Window(format!("nonpositive value {y} at t = {t}")));
            }
            let x = match model {
                RateModel::PowerLaw => (1.0 + t).ln(),
                RateModel::PowerLogLaw => t.ln() + t.ln().ln(),
            };
            xs.push(x);
            ys.push(y.ln());
        }
    }
    let n = xs.len();
    if n < 4 {
        return Err(Error::Window(format!("only {n} points in window [{lo}, {hi}]")));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let res: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| y - intercept - slope * x).collect();
    let sse: f64 = res.iter().map(|r| r * r).sum();
    let stderr = (sse / (nf - 2.0) / sxx).sqrt();
    let tau = if slope == 0.0 { 0.0 } else { -slope };
    Ok(RateFit {
        model,
        tau_hat: tau,
        intercept,
        window: (lo, hi),
        stderr,
        residual: res.iter().fold(0.0_f64, |m, r| m.max(r.abs())),
        rms_residual: (sse / nf).sqrt(),
        log_corrected_fit: (model == RateModel::PowerLogLaw).then_some(tau),
        points: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn log_times(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64)).collect()
    }

    #[test]
    fn exact_power_law() {
        let t = log_times(-1.0, 4.0, 51);
        let y: Vec<f64> = t.iter().map(|t| 1.0 / (1.0 + t)).collect();
        let f = fit_rate(&t, &y, RateModel::PowerLaw, None).unwrap();
        assert!((f.tau_hat - 1.0).abs() < 1e-3);
    }

    #[test]
    fn log_law_is_discriminated() {
        let t = log_times(0.0, 4.0, 41);
        let y: Vec<f64> = t.iter().map(|t| (t * t.ln()).powf(-0.5)).collect();
        let w = Some((100.0, 1e4));
        let a = fit_rate(&t, &y, RateModel::PowerLogLaw, w).unwrap();
        let b = fit_rate(&t, &y, RateModel::PowerLaw, w).unwrap();
        assert!((a.tau_hat - 0.5).abs() < 0.025);
        assert!(a.rms_residual < b.rms_residual);
        assert!(b.tau_hat > 0.55);
    }

    #[test]
    fn constant_series() {
        let t = log_times(0.0, 3.0, 31);
        let y = vec![2.0; t.len()];
        assert_eq!(fit_rate(&t, &y, RateModel::PowerLaw, None).unwrap().tau_hat, 0.0);
    }

    #[test]
    fn short_series_rejected() {
        let t = log_times(0.0, 1.0, 11);
        let y = vec![1.0; t.len()];
        assert!(matches!(fit_rate(&t, &y, RateModel::PowerLaw, None), Err(Error::Window(_))));
    }
}
