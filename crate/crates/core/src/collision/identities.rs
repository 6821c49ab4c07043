//! Closed-form identities and functional inequalities used as oracles for
//! the assembled operators.

use super::CollisionOperator;
use crate::error::{Error, Result};
use crate::grid::VelocityGrid;
use crate::model::Operator;
use crate::states::SmoothProfile;
use crate::C64;

/// F⁻¹L₁(F⟨v⟩^k) in closed form: k(d+γ−k+2)⟨v⟩^{k−4} − k(γ+2−k)⟨v⟩^{k−2}.
pub fn lyapunov_l1_exact(d: usize, gamma: f64, k: f64, v: f64) -> f64 {
    let b = crate::model::bracket(v);
    let df = d as f64;
    k * (df + gamma - k + 2.0) * b.powf(k - 4.0) - k * (gamma + 2.0 - k) * b.powf(k - 2.0)
}

/// Pointwise comparison of the discrete F⁻¹L₁(F⟨v⟩^k) with its closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovCheck {
    pub nodes: Vec<f64>,
    pub discrete: Vec<f64>,
    pub exact: Vec<f64>,
    /// max |discrete − exact| over nodes with |v| ≤ v_cut
    pub max_error: f64,
}

pub fn lyapunov_l1_check(op: &CollisionOperator, k: f64, v_cut: f64) -> Result<LyapunovCheck> {
    if op.params.operator != Operator::FokkerPlanck {
        return Err(Error::Config("the Lyapunov identity is checked for the Fokker-Planck operator".into()));
    }
    let g = op.grid();
    let f: Vec<f64> = g.f_values().iter().zip(g.brackets()).map(|(f, b)| f * b.powf(k)).collect();
    let lf = op.matrix.apply_real(&f);
    let mut out = LyapunovCheck { nodes: vec![], discrete: vec![], exact: vec![], max_error: 0.0 };
    for i in 0..g.len() {
        let v = g.nodes()[i];
        if v.abs() > v_cut {
            continue;
        }
        let a = lf[i] / g.f_values()[i];
        let e = lyapunov_l1_exact(op.params.d, op.params.gamma, k, v);
        out.max_error = out.max_error.max((a - e).abs());
        out.nodes.push(v);
        out.discrete.push(a);
        out.exact.push(e);
    }
    Ok(out)
}

/// Two sides of the Hardy–Poincaré inequality
/// ∫|h′|²F ≥ 2(d+γ)∫|h − h̄₋₂|²⟨v⟩^{−2}F, h̄₋₂ the ⟨v⟩^{−2}F-weighted mean.
pub fn hardy_poincare_sides(grid: &VelocityGrid, h: &SmoothProfile) -> (f64, f64) {
    let p = grid.params();
    let mut lhs = 0.0;
    let mut m0 = 0.0;
    let mut m1 = C64::new(0.0, 0.0);
    let vals: Vec<(C64, C64)> = grid.nodes().iter().map(|&v| h.eval(v)).collect();
    for i in 0..grid.len() {
        let wf = grid.weights()[i] * grid.f_values()[i];
        let b2 = grid.brackets()[i].powi(-2);
        lhs += wf * vals[i].1.norm_sqr();
        m0 += wf * b2;
        m1 += vals[i].0 * (wf * b2);
    }
    let mean = m1 / m0;
    let var: f64 = (0..grid.len())
        .map(|i| grid.weights()[i] * grid.f_values()[i] * grid.brackets()[i].powi(-2) * (vals[i].0 - mean).norm_sqr())
        .sum();
    (lhs, 2.0 * (p.d as f64 + p.gamma) * var)
}

/// Two sides of the scattering gap inequality for the separable kernel,
/// ∬b(h−h′)²FF′ ≥ Λ∫|h − h̄_{−β}|²⟨v⟩^{−β}F with Λ = (2/Z)∫F⟨v⟩^{−β}.
/// Both are plain grid sums in h = f/F.
pub fn scattering_gap_sides(grid: &VelocityGrid, beta: f64, f: &[C64]) -> (f64, f64) {
    let n = grid.len();
    let w = grid.weights();
    let fv = grid.f_values();
    let nu: Vec<f64> = grid.brackets().iter().map(|b| b.powf(-beta)).collect();
    let h: Vec<C64> = f.iter().zip(fv).map(|(a, b)| a / *b).collect();
    let z: f64 = (0..n).map(|i| w[i] * nu[i] * fv[i]).sum();
    let mut lhs = 0.0;
    for i in 0..n {
        for j in 0..n {
            lhs += w[i] * w[j] * nu[i] * nu[j] * fv[i] * fv[j] * (h[i] - h[j]).norm_sqr();
        }
    }
    lhs /= z;
    let mean: C64 = (0..n).map(|i| h[i] * (w[i] * nu[i] * fv[i])).sum::<C64>() / z;
    let var: f64 = (0..n).map(|i| w[i] * nu[i] * fv[i] * (h[i] - mean).norm_sqr()).sum();
    // Λ = (2/Z)·Z for the separable kernel
    (lhs, 2.0 * var)
}

/// Ratio −⟨f,Lf⟩ / (‖(1−Π)f‖₀^{2(k+β)/(k−η)} ‖f‖_k^{−2(η+β)/(k−η)}); the
/// interpolation inequality asserts a positive lower bound over all f.
pub fn interpolation_ratio(op: &CollisionOperator, f: &[C64], k: f64, eta: f64) -> Result<f64> {
    let g = op.grid();
    let beta = op.params.beta();
    if k <= eta {
        return Err(Error::Domain(format!("need k > eta, got k = {k}, eta = {eta}")));
    }
    g.check_moment(k)?;
    let p = g.pi(f);
    let q: Vec<C64> = f.iter().zip(&p).map(|(a, b)| a - b).collect();
    let micro = g.norm2(&q);
    let fk = g.norm2_k(f, k);
    let a = (k + beta) / (k - eta);
    let b = (eta + beta) / (k - eta);
    let den = micro.powf(a) * fk.powf(-b);
    Ok(-op.quadratic_form(f).re / den)
}
