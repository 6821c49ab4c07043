//! L₁f = ∂ᵥ(F ∂ᵥ(f/F)) as a finite-volume scheme in h = f/F.
//!
//! wᵢ(L₁f)ᵢ = S_{i+½}(hᵢ₊₁ − hᵢ) − S_{i−½}(hᵢ − hᵢ₋₁) with edge conductance
//! S_{i+½} = F(v_{i+½})/(vᵢ₊₁ − vᵢ) and no flux through the outer ends, i.e.
//! L₁ = −D*·diag(F)·D for the difference operator D.

use super::RealMatrix;
use crate::grid::VelocityGrid;

pub(crate) fn edge_conductance(grid: &VelocityGrid, e: usize) -> f64 {
    let v = grid.nodes();
    let mid = 0.5 * (v[e] + v[e + 1]);
    grid.params().equilibrium(mid) / (v[e + 1] - v[e])
}

pub(crate) fn assemble(grid: &VelocityGrid) -> RealMatrix {
    let n = grid.len();
    let w = grid.weights();
    let f = grid.f_values();
    let mut m = RealMatrix::zeros(n);
    for e in 0..n - 1 {
        let s = edge_conductance(grid, e);
        let (i, j) = (e, e + 1);
        m.add(i, j, s / (w[i] * f[j]));
        m.add(i, i, -s / (w[i] * f[i]));
        m.add(j, i, s / (w[j] * f[i]));
        m.add(j, j, -s / (w[j] * f[j]));
    }
    m
}
