//! L₂f = ∫ b(·,v′)(f′F − fF′) dv′ for the separable and the power-difference kernel.

use super::RealMatrix;
use crate::grid::VelocityGrid;

/// Separable kernel: L₂f = ν(r_f F/Z − f) with ν = ⟨v⟩^{−β}, r_f = Σwν f and the
/// discrete Z = ΣwνF, so that ν is exactly ⟨v⟩^{−β} on the grid.
pub(crate) fn assemble_separable(grid: &VelocityGrid, beta: f64) -> (RealMatrix, Vec<f64>) {
    let n = grid.len();
    let w = grid.weights();
    let f = grid.f_values();
    let nu: Vec<f64> = grid.brackets().iter().map(|b| b.powf(-beta)).collect();
    let z: f64 = (0..n).map(|i| w[i] * nu[i] * f[i]).sum();
    let mut m = RealMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            m.set(i, j, nu[i] * f[i] * w[j] * nu[j] / z);
        }
        m.add(i, i, -nu[i]);
    }
    (m, nu)
}

/// Power-difference kernel b = |v − v′|^{−β} with the diagonal omitted:
/// (L₂f)ᵢ = Σ_{j≠i} wⱼbᵢⱼ(fⱼFᵢ − fᵢFⱼ), ν(vᵢ) = Σ_{j≠i} wⱼbᵢⱼFⱼ.
pub(crate) fn assemble_power(grid: &VelocityGrid, beta: f64) -> (RealMatrix, Vec<f64>) {
    let n = grid.len();
    let w = grid.weights();
    let f = grid.f_values();
    let v = grid.nodes();
    let mut m = RealMatrix::zeros(n);
    let mut nu = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            if j != i {
                let b = (v[i] - v[j]).abs().powf(-beta);
                m.set(i, j, w[j] * b * f[i]);
                nu[i] += w[j] * b * f[j];
            }
        }
        m.set(i, i, -nu[i]);
    }
    (m, nu)
}
