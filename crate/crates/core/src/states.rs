//! Seeded random test states on a velocity grid.

use crate::grid::VelocityGrid;
use crate::model::bracket;
use crate::C64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;

pub fn seeded_rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

fn normal_c64(rng: &mut StdRng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// A bounded smooth h(v) = Σ cⱼ Tⱼ(v/⟨v⟩) with Chebyshev polynomials Tⱼ.
#[derive(Debug, Clone)]
pub struct SmoothProfile {
    pub coeffs: Vec<C64>,
}

impl SmoothProfile {
    pub fn random(rng: &mut StdRng, degree: usize) -> Self {
        let coeffs = (0..=degree).map(|j| normal_c64(rng) / (1.0 + j as f64)).collect();
        SmoothProfile { coeffs }
    }

    pub fn random_real(rng: &mut StdRng, degree: usize) -> Self {
        let coeffs = (0..=degree)
            .map(|j| C64::new(rng.sample::<f64, _>(StandardNormal) / (1.0 + j as f64), 0.0))
            .collect();
        SmoothProfile { coeffs }
    }

    /// h(v) and h′(v).
    pub fn eval(&self, v: f64) -> (C64, C64) {
        let b = bracket(v);
        let x = v / b;
        let dx = 1.0 / (b * b * b);
        // Tⱼ and Tⱼ′ by the three-term recurrences
        let (mut t0, mut t1) = (1.0, x);
        let (mut d0, mut d1) = (0.0, 1.0);
        let mut h = self.coeffs[0] * t0;
        let mut dh = C64::new(0.0, 0.0);
        for (j, c) in self.coeffs.iter().enumerate().skip(1) {
            if j > 1 {
                let t2 = 2.0 * x * t1 - t0;
                let d2 = 2.0 * t1 + 2.0 * x * d1 - d0;
                t0 = t1;
                t1 = t2;
                d0 = d1;
                d1 = d2;
            }
            h += c * t1;
            dh += c * d1;
        }
        (h, dh * dx)
    }

    pub fn h(&self, v: f64) -> C64 {
        self.eval(v).0
    }

    /// Node values of f = hF.
    pub fn on_grid(&self, grid: &VelocityGrid) -> Vec<C64> {
        grid.nodes().iter().zip(grid.f_values()).map(|(&v, &f)| self.h(v) * f).collect()
    }
}

/// Random smooth f = hF with h of the given Chebyshev degree.
pub fn smooth_state(grid: &VelocityGrid, rng: &mut StdRng, degree: usize) -> Vec<C64> {
    SmoothProfile::random(rng, degree).on_grid(grid)
}

/// Independent standard normal coordinates in a μ-orthonormal basis, so that
/// every node carries an O(1) share of ‖f‖₀².
pub fn white_state(grid: &VelocityGrid, rng: &mut StdRng) -> Vec<C64> {
    grid.weights()
        .iter()
        .zip(grid.f_values())
        .map(|(&w, &f)| normal_c64(rng) * (f / w).sqrt())
        .collect()
}

/// Mixture of a smooth and a white component with random relative size.
pub fn mixed_state(grid: &VelocityGrid, rng: &mut StdRng) -> Vec<C64> {
    let a = smooth_state(grid, rng, 6);
    let b = white_state(grid, rng);
    let t: f64 = rng.random::<f64>();
    let na = grid.norm2(&a).sqrt();
    let nb = grid.norm2(&b).sqrt();
    a.iter().zip(&b).map(|(x, y)| x * (t / na) + y * ((1.0 - t) / nb)).collect()
}

/// State whose ‖·‖₀ mass sits near |v| ≈ v0 (log-Gaussian bump in |v|).
pub fn tail_state(grid: &VelocityGrid, v0: f64) -> Vec<C64> {
    grid.nodes()
        .iter()
        .zip(grid.f_values())
        .map(|(&v, &f)| {
            let s = (bracket(v) / bracket(v0)).ln();
            let sign = if v >= 0.0 { 1.0 } else { 0.3 };
            C64::new(sign * f * (-s * s).exp(), 0.0)
        })
        .collect()
}
