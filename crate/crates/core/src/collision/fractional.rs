//! Fractional Laplacian by singular quadrature, the confining force field of
//! the fractional Fokker–Planck operator, and the discrete L₃.

use super::RealMatrix;
use crate::error::{Error, Result};
use crate::grid::VelocityGrid;
use crate::model::{bracket, ModelParams};
use crate::quad::{integrate, integrate_geometric, integrate_to_inf, Tol};
use std::f64::consts::PI;

/// Relative residual allowed for the force field.
pub const FORCE_FIELD_TOL: f64 = 1e-3;

const QUAD_TOL: f64 = 1e-12;

/// C_{d,σ} = −(2^σ/π^{d/2}) Γ((d+σ)/2)/Γ(−σ/2).
pub fn fractional_constant(d: usize, sigma: f64) -> f64 {
    let df = d as f64;
    -(2f64.powf(sigma) / PI.powf(df / 2.0)) * libm::tgamma((df + sigma) / 2.0) / libm::tgamma(-sigma / 2.0)
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma < 2.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("sigma must lie in (0,2), got {sigma}")))
    }
}

/// A smooth real function of v with algebraic decay (or slow growth).
pub trait Profile: Sync {
    fn value(&self, v: f64) -> f64;

    /// g″(v); the default is a Richardson-extrapolated central difference.
    fn second_derivative(&self, v: f64) -> f64 {
        let h = 1e-2 * bracket(v);
        let d = |h: f64| (self.value(v + h) - 2.0 * self.value(v) + self.value(v - h)) / (h * h);
        (4.0 * d(h / 2.0) - d(h)) / 3.0
    }
}

/// g(v) = c⟨v⟩^{−q}; q may be negative.
#[derive(Debug, Clone, Copy)]
pub struct BracketPower {
    pub c: f64,
    pub q: f64,
}

impl Profile for BracketPower {
    fn value(&self, v: f64) -> f64 {
        self.c * (1.0 + v * v).powf(-self.q / 2.0)
    }

    fn second_derivative(&self, v: f64) -> f64 {
        let s = 1.0 + v * v;
        let q = self.q;
        -q * self.c * (s.powf(-q / 2.0 - 1.0) - (q + 2.0) * v * v * s.powf(-q / 2.0 - 2.0))
    }
}

/// Grid values extended by barycentric interpolation in the reference
/// variable and, beyond the last node, by the power law fitted to the two
/// outermost nodes on each side.
pub struct GridProfile<'a> {
    grid: &'a VelocityGrid,
    values: &'a [f64],
    v_lo: f64,
    v_hi: f64,
    left: (f64, f64),
    right: (f64, f64),
}

impl<'a> GridProfile<'a> {
    pub fn new(grid: &'a VelocityGrid, values: &'a [f64]) -> Self {
        let v = grid.nodes();
        let n = v.len();
        let fit = |i: usize, j: usize| -> (f64, f64) {
            let (a, b) = (values[i], values[j]);
            if a == 0.0 || b == 0.0 || a.signum() != b.signum() {
                return (0.0, 0.0);
            }
            let p = -(b / a).abs().ln() / (v[j].abs() / v[i].abs()).ln();
            (b * v[j].abs().powf(p), p)
        };
        GridProfile {
            grid,
            values,
            v_lo: v[0],
            v_hi: v[n - 1],
            left: fit(1, 0),
            right: fit(n - 2, n - 1),
        }
    }
}

impl Profile for GridProfile<'_> {
    fn value(&self, v: f64) -> f64 {
        if v > self.v_hi {
            self.right.0 * v.powf(-self.right.1)
        } else if v < self.v_lo {
            self.left.0 * (-v).powf(-self.left.1)
        } else {
            self.grid.interpolate(self.values, v)
        }
    }
}

/// ∫_lo^hi f over a piece of the real line, split at ±1, 0 and geometrically
/// beyond |y| = 1; infinite ends are allowed.
fn segment<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, tol: Tol) -> f64 {
    if !(hi > lo) {
        return 0.0;
    }
    let mut pts = vec![];
    if lo.is_finite() {
        pts.push(lo);
    }
    for b in [-1.0, 0.0, 1.0] {
        if b > lo && b < hi {
            pts.push(b);
        }
    }
    if hi.is_finite() {
        pts.push(hi);
    }
    let mut s = 0.0;
    if lo == f64::NEG_INFINITY {
        let a = pts[0];
        s += integrate_to_inf(|x| f(-x), -a, tol);
    }
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        s += if a >= 1.0 {
            integrate_geometric(f, a, b, tol)
        } else if b <= -1.0 {
            integrate_geometric(|x| f(-x), -b, -a, tol)
        } else {
            integrate(f, a, b, tol)
        };
    }
    if hi == f64::INFINITY {
        let b = *pts.last().unwrap();
        s += integrate_to_inf(f, b, tol);
    }
    s
}

/// Δ^{σ/2}g(v) = C_{1,σ} PV∫(g(v+z) − g(v))|z|^{−1−σ}dz (the sign convention
/// Δ^{σ/2} = −(−Δ)^{σ/2}), split at radius r = ⟨v⟩/2. The inner region is
/// regularized by the second-order Taylor term, the outer region is integrated
/// directly in the variable y = v + z.
pub fn fractional_laplacian_at<P: Profile + ?Sized>(g: &P, v: f64, sigma: f64) -> f64 {
    let tol = Tol::rel(QUAD_TOL);
    let c = fractional_constant(1, sigma);
    let r = bracket(v) / 2.0;
    let g0 = g.value(v);
    let g2 = g.second_derivative(v);
    let zc = 1e-3 * r;
    let inner = integrate(
        |z| (g.value(v + z) + g.value(v - z) - 2.0 * g0 - g2 * z * z) * z.powf(-1.0 - sigma),
        zc,
        r,
        tol,
    );
    let taylor = g2 * r.powf(2.0 - sigma) / (2.0 - sigma);
    let kernel = |y: f64| g.value(y) * (y - v).abs().powf(-1.0 - sigma);
    let outer = segment(&kernel, f64::NEG_INFINITY, v - r, tol) + segment(&kernel, v + r, f64::INFINITY, tol);
    let constant = 2.0 * g0 * r.powf(-sigma) / sigma;
    c * (inner + taylor + outer - constant)
}

/// Δ^{σ/2} applied to grid values, evaluated at every node.
pub fn fractional_laplacian(grid: &VelocityGrid, values: &[f64], sigma: f64) -> Result<Vec<f64>> {
    check_sigma(sigma)?;
    if grid.is_radial() {
        return Err(Error::Domain("the fractional Laplacian is implemented for d = 1".into()));
    }
    let g = GridProfile::new(grid, values);
    Ok(grid.nodes().iter().map(|&v| fractional_laplacian_at(&g, v, sigma)).collect())
}

/// Δ^{σ/2} of a closed-form profile at the given points.
pub fn fractional_laplacian_profile<P: Profile>(g: &P, points: &[f64], sigma: f64) -> Result<Vec<f64>> {
    check_sigma(sigma)?;
    Ok(points.iter().map(|&v| fractional_laplacian_at(g, v, sigma)).collect())
}

/// ∫_0^∞ w^{−σ}[h(v−w) − h(v+w)] dw, the d = 1 convolution of h with
/// sign(w)|w|^{−σ}. `dh` is h′, used to regularize w → 0.
fn odd_convolution(h: &dyn Fn(f64) -> f64, dh: &dyn Fn(f64) -> f64, v: f64, sigma: f64) -> f64 {
    let tol = Tol::rel(QUAD_TOL);
    let a = bracket(v) / 2.0;
    let wc = 1e-3 * a;
    let d1 = dh(v);
    let near = integrate(|w| (h(v - w) - h(v + w) + 2.0 * w * d1) * w.powf(-sigma), wc, a, tol)
        - 2.0 * d1 * a.powf(2.0 - sigma) / (2.0 - sigma);
    let left = segment(&|y: f64| (v - y).powf(-sigma) * h(y), f64::NEG_INFINITY, v - a, tol);
    let right = segment(&|y: f64| (y - v).powf(-sigma) * h(y), v + a, f64::INFINITY, tol);
    near + left - right
}

/// Force field E with Δ^{σ/2}F + ∂ᵥ(EF) = 0, tabulated on the grid.
#[derive(Debug, Clone)]
pub struct ForceField {
    pub sigma: f64,
    pub beta: f64,
    /// E(vᵢ) from the convolution formula.
    pub e_values: Vec<f64>,
    /// G(vᵢ) = E(vᵢ)⟨vᵢ⟩^β/vᵢ (NaN at v = 0).
    pub g_values: Vec<f64>,
    /// ∂ᵥ(EF)(vᵢ) from the differentiated convolution.
    pub div_ef: Vec<f64>,
    /// Δ^{σ/2}F(vᵢ) by singular quadrature.
    pub lap_f: Vec<f64>,
    /// ‖Δ^{σ/2}F + ∂ᵥ(EF)‖₀ / ‖Δ^{σ/2}F‖₀.
    pub residual: f64,
}

impl ForceField {
    /// min and max of G over nodes with 1 < |v| < v_max.
    pub fn g_range(&self, grid: &VelocityGrid) -> (f64, f64) {
        let vmax = grid.v_max();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (v, g) in grid.nodes().iter().zip(&self.g_values) {
            if v.abs() > 1.0 && v.abs() < vmax {
                lo = lo.min(*g);
                hi = hi.max(*g);
            }
        }
        (lo, hi)
    }

    pub fn write_csv(&self, grid: &VelocityGrid, path: impl AsRef<std::path::Path>) -> Result<()> {
        use std::io::Write;
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "v,E,G")?;
        for i in 0..grid.len() {
            writeln!(out, "{:e},{:e},{:e}", grid.nodes()[i], self.e_values[i], self.g_values[i])?;
        }
        Ok(())
    }
}

/// E(v) = (C_{1,σ}/σ)⟨v⟩^{1+γ} ∫_0^∞ w^{−σ}[g(v−w) − g(v+w)]dw with g = ⟨·⟩^{−1−γ}.
/// The symmetric form is a principal value for σ ≥ 1 and an absolutely
/// convergent integral for σ < 1.
pub fn force_field_at(params: &ModelParams, v: f64) -> Result<f64> {
    let sigma = params
        .sigma()
        .ok_or_else(|| Error::Domain("force field needs the fractional operator".into()))?;
    let q = 1.0 + params.gamma;
    let g = |y: f64| (1.0 + y * y).powf(-q / 2.0);
    let dg = |y: f64| -q * y * (1.0 + y * y).powf(-q / 2.0 - 1.0);
    let k = odd_convolution(&g, &dg, v, sigma);
    Ok(fractional_constant(1, sigma) / sigma * bracket(v).powf(q) * k)
}

/// Tabulate E, G, ∂(EF) and Δ^{σ/2}F on the grid and check the defining identity.
pub fn build_force_field(grid: &VelocityGrid) -> Result<ForceField> {
    let params = grid.params();
    if params.d != 1 {
        return Err(Error::Domain("the force field is implemented for d = 1".into()));
    }
    let sigma = params
        .sigma()
        .ok_or_else(|| Error::Domain("force field needs the fractional operator".into()))?;
    let beta = params.beta();
    let q = 1.0 + params.gamma;
    let cg = params.c_gamma();
    let pref = fractional_constant(1, sigma) / sigma;
    let dg = |y: f64| -q * y * (1.0 + y * y).powf(-q / 2.0 - 1.0);
    let ddg = |y: f64| {
        let s = 1.0 + y * y;
        -q * (s.powf(-q / 2.0 - 1.0) - (q + 2.0) * y * y * s.powf(-q / 2.0 - 2.0))
    };
    let feq = BracketPower { c: cg, q };
    let n = grid.len();
    let mut e_values = vec![0.0; n];
    let mut g_values = vec![0.0; n];
    let mut div_ef = vec![0.0; n];
    let mut lap_f = vec![0.0; n];
    for (i, &v) in grid.nodes().iter().enumerate() {
        let e = force_field_at(params, v)?;
        e_values[i] = e;
        g_values[i] = if v == 0.0 { f64::NAN } else { e * bracket(v).powf(beta) / v };
        div_ef[i] = pref * cg * odd_convolution(&dg, &ddg, v, sigma);
        lap_f[i] = fractional_laplacian_at(&feq, v, sigma);
    }
    let mu = grid.mu_weights();
    let num: f64 = (0..n).map(|i| mu[i] * (lap_f[i] + div_ef[i]).powi(2)).sum();
    let den: f64 = (0..n).map(|i| mu[i] * lap_f[i].powi(2)).sum();
    let residual = (num / den).sqrt();
    let field = ForceField { sigma, beta, e_values, g_values, div_ef, lap_f, residual };
    if !(residual <= FORCE_FIELD_TOL) {
        return Err(Error::ForceField { residual, tol: FORCE_FIELD_TOL });
    }
    Ok(field)
}

/// Symmetric jump weights Pᵢⱼ = C wᵢwⱼ|vᵢ − vⱼ|^{−1−σ} of the discrete Δ^{σ/2},
/// with wᵢ(Δₕf)ᵢ = Σⱼ Pᵢⱼ(fⱼ − fᵢ).
///
/// The part of the second moment ∫_{|z|<⟨vᵢ⟩/2} C|z|^{1−σ}dz missed by the
/// off-diagonal sum is restored on the nearest-neighbour links.
pub fn jump_weights(grid: &VelocityGrid, sigma: f64) -> RealMatrix {
    let n = grid.len();
    let v = grid.nodes();
    let w = grid.weights();
    let c = fractional_constant(1, sigma);
    let mut p = RealMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                p.set(i, j, c * w[i] * w[j] * (v[i] - v[j]).abs().powf(-1.0 - sigma));
            }
        }
    }
    let mut missing = vec![0.0; n];
    for i in 0..n {
        let r = bracket(v[i]) / 2.0;
        let mut m = 2.0 * c * r.powf(2.0 - sigma) / (2.0 - sigma);
        for j in 0..n {
            let d = (v[j] - v[i]).abs();
            if j != i && d < r {
                m -= w[j] * c * d.powf(1.0 - sigma);
            }
        }
        missing[i] = m.max(0.0);
    }
    for e in 0..n - 1 {
        let dv = v[e + 1] - v[e];
        let extra = (missing[e] * w[e] + missing[e + 1] * w[e + 1]) / (4.0 * dv * dv);
        let x = p.get(e, e + 1) + extra;
        p.set(e, e + 1, x);
        p.set(e + 1, e, x);
    }
    p
}

/// Discrete L₃ = Δₕ + Dₕ and the edge fluxes Jᶠ of the equilibrium.
///
/// The drift is a centred flux in h = f/F, wᵢ(Dₕf)ᵢ = J_{i+½}(hᵢ+hᵢ₊₁)/2 −
/// J_{i−½}(hᵢ₋₁+hᵢ)/2, with Jᶠ chosen so that Dₕ F = −Δₕ F exactly.
pub(crate) fn assemble(grid: &VelocityGrid, sigma: f64) -> (RealMatrix, RealMatrix, Vec<f64>) {
    let n = grid.len();
    let w = grid.weights();
    let f = grid.f_values();
    let v = grid.nodes();
    let p = jump_weights(grid, sigma);
    // wᵢ(ΔₕF)ᵢ
    let lap: Vec<f64> = (0..n)
        .map(|i| (0..n).filter(|&j| j != i).map(|j| p.get(i, j) * (f[j] - f[i])).sum())
        .collect();
    // J_{e} for the edge between e and e+1: J_e − J_{e−1} = −wₑ(ΔₕF)ₑ
    let mut left = vec![0.0; n - 1];
    let mut acc = 0.0;
    for e in 0..n - 1 {
        acc -= lap[e];
        left[e] = acc;
    }
    let mut right = vec![0.0; n - 1];
    let mut acc = 0.0;
    for e in (0..n - 1).rev() {
        acc += lap[e + 1];
        right[e] = acc;
    }
    let flux: Vec<f64> = (0..n - 1)
        .map(|e| if v[e] + v[e + 1] < 0.0 { left[e] } else { right[e] })
        .collect();
    let mut m = RealMatrix::zeros(n);
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if j != i {
                let x = p.get(i, j) / w[i];
                m.set(i, j, x);
                diag -= x;
            }
        }
        m.set(i, i, diag);
    }
    for e in 0..n - 1 {
        let (i, j) = (e, e + 1);
        // flux J_e (h_i + h_j)/2 enters row i with + and row j with −
        let a = 0.5 * flux[e];
        m.add(i, i, a / (w[i] * f[i]));
        m.add(i, j, a / (w[i] * f[j]));
        m.add(j, i, -a / (w[j] * f[i]));
        m.add(j, j, -a / (w[j] * f[j]));
    }
    (m, p, flux)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_matches_cauchy_case() {
        assert!((fractional_constant(1, 1.0) - 1.0 / PI).abs() < 1e-15);
        // C_{1,σ} → 0 as σ → 0 and stays positive
        assert!(fractional_constant(1, 0.3) > 0.0);
        assert!(fractional_constant(1, 1.9) > 0.0);
    }

    #[test]
    fn poisson_kernel_identity() {
        let g = BracketPower { c: 1.0 / PI, q: 2.0 };
        for &v in &[0.0, 0.3, 1.7, -4.0, 9.5] {
            let num = fractional_laplacian_at(&g, v, 1.0);
            let exact = (v * v - 1.0) / (PI * (1.0 + v * v).powi(2));
            assert!((num - exact).abs() <= 1e-9 * exact.abs().max(1e-3), "v = {v}: {num} vs {exact}");
        }
    }

    #[test]
    fn constants_are_annihilated() {
        let g = BracketPower { c: 2.5, q: 0.0 };
        for &v in &[0.0, 2.0, 100.0] {
            assert!(fractional_laplacian_at(&g, v, 0.7).abs() < 1e-9);
        }
    }

    #[test]
    fn cauchy_force_is_linear() {
        let p = ModelParams::fractional(1.0, 1.0).unwrap();
        for &v in &[0.0, 0.5, -3.0, 40.0, 1e4] {
            let e = force_field_at(&p, v).unwrap();
            assert!((e - v).abs() <= 1e-8 * v.abs().max(1.0), "v = {v}: E = {e}");
        }
    }
}
