//! Discrete collision operators acting on node values of f (a density
//! against dv). All three are assembled so that mass conservation, LF = 0
//! and dissipativity in L²(dμ) hold at the matrix level.

mod fokker_planck;
pub mod fractional;
pub mod identities;
mod scattering;

pub use fractional::{
    build_force_field, force_field_at, fractional_constant, fractional_laplacian, fractional_laplacian_at,
    fractional_laplacian_profile, BracketPower, ForceField, GridProfile, Profile,
};

use crate::error::{Error, Result};
use crate::grid::{VelocityGrid, WeightedVector};
use crate::model::{Kernel, ModelParams, Operator};
use crate::C64;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

/// Dense row-major real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct RealMatrix {
    n: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    pub fn zeros(n: usize) -> Self {
        RealMatrix { n, data: vec![0.0; n * n] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, x: f64) {
        self.data[i * self.n + j] = x;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, x: f64) {
        self.data[i * self.n + j] += x;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn apply(&self, f: &[C64]) -> Vec<C64> {
        assert_eq!(f.len(), self.n);
        (0..self.n)
            .map(|i| self.row(i).iter().zip(f).map(|(a, x)| x * *a).sum())
            .collect()
    }

    pub fn apply_real(&self, f: &[f64]) -> Vec<f64> {
        assert_eq!(f.len(), self.n);
        (0..self.n).map(|i| self.row(i).iter().zip(f).map(|(a, x)| a * x).sum()).collect()
    }

    pub fn transpose(&self) -> RealMatrix {
        let mut t = RealMatrix::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    L1,
    L2,
    L3,
}

/// An assembled collision operator on a fixed grid.
#[derive(Debug, Clone)]
pub struct CollisionOperator {
    pub kind: OperatorKind,
    pub matrix: RealMatrix,
    /// collision frequency ν(vᵢ) (scattering only)
    pub nu_values: Option<Vec<f64>>,
    /// force field (fractional operator only)
    pub force: Option<ForceField>,
    /// symmetric jump weights of the discrete fractional Laplacian
    pub jump_weights: Option<RealMatrix>,
    /// edge fluxes Jᶠ of the equilibrium for the discrete drift
    pub edge_flux: Option<Vec<f64>>,
    pub params: ModelParams,
    grid: Arc<VelocityGrid>,
}

impl CollisionOperator {
    /// Assemble the operator selected by the grid's model parameters.
    pub fn build(grid: Arc<VelocityGrid>) -> Result<Self> {
        let params = *grid.params();
        if grid.is_radial() {
            return Err(Error::Domain("collision operators are assembled for d = 1 only".into()));
        }
        let mut op = CollisionOperator {
            kind: OperatorKind::L1,
            matrix: RealMatrix::zeros(0),
            nu_values: None,
            force: None,
            jump_weights: None,
            edge_flux: None,
            params,
            grid: grid.clone(),
        };
        match params.operator {
            Operator::FokkerPlanck => {
                op.matrix = fokker_planck::assemble(&grid);
            }
            Operator::Scattering { kernel, beta } => {
                op.kind = OperatorKind::L2;
                let (m, nu) = match kernel {
                    Kernel::Separable => scattering::assemble_separable(&grid, beta),
                    Kernel::PowerDifference => scattering::assemble_power(&grid, beta),
                };
                op.matrix = m;
                op.nu_values = Some(nu);
            }
            Operator::FractionalFP { sigma } => {
                op.kind = OperatorKind::L3;
                op.force = Some(build_force_field(&grid)?);
                let (m, p, flux) = fractional::assemble(&grid, sigma);
                op.matrix = m;
                op.jump_weights = Some(p);
                op.edge_flux = Some(flux);
            }
        }
        Ok(op)
    }

    /// Replace the matrix, e.g. to build perturbed operators for mutation tests.
    pub fn with_matrix(&self, matrix: RealMatrix) -> Self {
        assert_eq!(matrix.dim(), self.grid.len());
        CollisionOperator { matrix, ..self.clone() }
    }

    pub fn grid(&self) -> &Arc<VelocityGrid> {
        &self.grid
    }

    pub fn apply_values(&self, f: &[C64]) -> Vec<C64> {
        self.matrix.apply(f)
    }

    /// Lf as a vector of the same space.
    pub fn apply(&self, f: &WeightedVector) -> Result<WeightedVector> {
        if f.grid_id() != self.grid.id() {
            return Err(Error::GridMismatch);
        }
        Ok(self.grid.vector(self.matrix.apply(&f.values), f.weight_exponent))
    }

    /// Matrix of the L²(dμ) adjoint, L* = M⁻¹LᵀM with M = diag(μ).
    pub fn adjoint_matrix(&self) -> RealMatrix {
        let mu = self.grid.mu_weights();
        let n = mu.len();
        let mut a = RealMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                a.set(i, j, self.matrix.get(j, i) * mu[j] / mu[i]);
            }
        }
        a
    }

    /// |Σ wᵢ(Lf)ᵢ| / ‖f‖₀.
    pub fn mass_defect(&self, f: &[C64]) -> f64 {
        let lf = self.matrix.apply(f);
        self.grid.rho(&lf).norm() / self.grid.norm2(f).sqrt()
    }

    /// ⟨f, Lf⟩_μ.
    pub fn quadratic_form(&self, f: &[C64]) -> C64 {
        self.grid.dot(f, &self.matrix.apply(f))
    }

    /// ‖LF‖₀ / ‖F‖₀.
    pub fn kernel_residual(&self) -> f64 {
        let f: Vec<C64> = self.grid.f_values().iter().map(|&x| C64::new(x, 0.0)).collect();
        (self.grid.norm2(&self.matrix.apply(&f)) / self.grid.norm2(&f)).sqrt()
    }

    /// −⟨f, Lf⟩_μ computed from the operator's discrete Dirichlet form in h = f/F,
    /// without touching the assembled matrix.
    pub fn dirichlet_form(&self, f: &[C64]) -> f64 {
        let g = &self.grid;
        let fv = g.f_values();
        let w = g.weights();
        let v = g.nodes();
        let h: Vec<C64> = f.iter().zip(fv).map(|(a, b)| a / *b).collect();
        let n = h.len();
        match self.params.operator {
            Operator::FokkerPlanck => (0..n - 1)
                .map(|e| fokker_planck::edge_conductance(g, e) * (h[e + 1] - h[e]).norm_sqr())
                .sum(),
            Operator::Scattering { kernel: Kernel::Separable, beta } => {
                let nu: Vec<f64> = g.brackets().iter().map(|b| b.powf(-beta)).collect();
                let z: f64 = (0..n).map(|i| w[i] * nu[i] * fv[i]).sum();
                let mut s = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        s += w[i] * w[j] * nu[i] * nu[j] * fv[i] * fv[j] * (h[i] - h[j]).norm_sqr();
                    }
                }
                0.5 * s / z
            }
            Operator::Scattering { kernel: Kernel::PowerDifference, beta } => {
                let mut s = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        if i != j {
                            s += w[i] * w[j] * (v[i] - v[j]).abs().powf(-beta) * fv[i] * fv[j] * (h[i] - h[j]).norm_sqr();
                        }
                    }
                }
                0.5 * s
            }
            Operator::FractionalFP { .. } => {
                let p = self.jump_weights.as_ref().expect("assembled with jump weights");
                let mut s = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        if i != j {
                            s += p.get(i, j) * (fv[i] + fv[j]) * (h[i] - h[j]).norm_sqr();
                        }
                    }
                }
                0.25 * s
            }
        }
    }

    /// Largest eigenvalue of the symmetric part of L in L²(dμ), relative to
    /// max|Lᵢᵢ|. Dissipativity means this is ≤ 0 up to rounding.
    pub fn max_dissipation_eigenvalue(&self) -> Result<f64> {
        let mu = self.grid.mu_weights();
        let n = mu.len();
        let s: Vec<f64> = mu.iter().map(|m| m.sqrt()).collect();
        let sym = faer::Mat::<f64>::from_fn(n, n, |i, j| {
            0.5 * (s[i] / s[j] * self.matrix.get(i, j) + s[j] / s[i] * self.matrix.get(j, i))
        });
        let ev = sym
            .self_adjoint_eigenvalues(faer::Side::Lower)
            .map_err(|e| Error::Linalg(format!("{e:?}")))?;
        let scale = (0..n).map(|i| self.matrix.get(i, i).abs()).fold(0.0, f64::max);
        Ok(ev.last().copied().unwrap_or(0.0) / scale)
    }

    /// Mutation for sensitivity tests: off-diagonal entries scaled by
    /// 1 + ε·sign(vᵢ), which breaks the detailed balance of the kernel.
    pub fn with_broken_symmetry(&self, eps: f64) -> Self {
        let v = self.grid.nodes();
        let mut m = self.matrix.clone();
        for i in 0..m.dim() {
            for j in 0..m.dim() {
                if i != j {
                    m.set(i, j, m.get(i, j) * (1.0 + eps * v[i].signum()));
                }
            }
        }
        self.with_matrix(m)
    }

    /// Matrix as CSV, one row per line.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        for i in 0..self.matrix.dim() {
            let row: Vec<String> = self.matrix.row(i).iter().map(|x| format!("{x:e}")).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Collision frequency of the separable kernel, ν(v) = ⟨v⟩^{−β}.
pub fn separable_frequency(v: f64, beta: f64) -> f64 {
    crate::model::bracket(v).powf(-beta)
}
