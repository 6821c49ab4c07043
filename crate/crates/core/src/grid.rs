//! Tail-adapted velocity quadrature.
//!
//! Nodes come from Gauss–Legendre points u ∈ (−1, 1) pushed through the
//! algebraic map v = s·u/(1 − u²)^p. The rule integrates against dv; the
//! equilibrium F and the weights of dμ = F⁻¹dv are tabulated alongside.

use crate::error::{Error, Result};
use crate::model::{bracket, sphere_area, ModelParams};
use crate::quad::gauss_legendre;
use crate::C64;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

/// Relative tolerance on Σ wᵢF(vᵢ) = 1.
pub const NORMALIZATION_TOL: f64 = 1e-10;

/// Largest admissible value of (d+γ)·log₁₀(v_max); keeps F(v_max) well above underflow.
const MAX_TAIL_DECADES: f64 = 250.0;

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

/// Parameters of the map u ↦ s·u/(1 − u²)^p.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapParams {
    pub scale: f64,
    pub power: f64,
}

impl MapParams {
    pub fn new(scale: f64, power: f64) -> Self {
        MapParams { scale, power }
    }

    /// Scale max(1, γ) and power ⌈2γ⌉/γ, which is 2 when 2γ is an integer.
    /// With this power F(v(u))v′(u) vanishes like an integer power of 1 − u,
    /// so the Gauss–Legendre rule sees a smooth integrand.
    pub fn default_for(params: &ModelParams) -> Self {
        let g = params.gamma;
        let m = (2.0 * g - 1e-9).ceil().max(1.0);
        MapParams { scale: g.max(1.0), power: m / g }
    }

    pub fn map(&self, u: f64) -> f64 {
        self.scale * u / (1.0 - u * u).powf(self.power)
    }

    pub fn jacobian(&self, u: f64) -> f64 {
        let q = 1.0 - u * u;
        self.scale * (q + 2.0 * self.power * u * u) / q.powf(self.power + 1.0)
    }

    /// Inverse of [`MapParams::map`] by bisection.
    pub fn inverse(&self, v: f64) -> f64 {
        if v == 0.0 {
            return 0.0;
        }
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        let target = v.abs();
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            if self.map(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi) * v.signum()
    }
}

/// Quadrature in velocity with the equilibrium tabulated on it.
///
/// For d = 1 the nodes cover ℝ symmetrically. For d ≥ 2 they are radii
/// r > 0 and the weights carry the factor |S^{d−1}| r^{d−1}, so radial
/// integrands are integrated over ℝ^d.
#[derive(Debug, Clone)]
pub struct VelocityGrid {
    params: ModelParams,
    map: MapParams,
    u: Vec<f64>,
    u_weights: Vec<f64>,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    f_values: Vec<f64>,
    mu_weights: Vec<f64>,
    brackets: Vec<f64>,
    id: u64,
}

impl VelocityGrid {
    /// Build with the default tail map (power 2) and the given scale.
    pub fn build(params: &ModelParams, n: usize, scale: f64) -> Result<Self> {
        let mut map = MapParams::default_for(params);
        map.scale = scale;
        Self::build_with_map(params, n, map)
    }

    /// Build with the default scale max(1, γ).
    pub fn build_default(params: &ModelParams, n: usize) -> Result<Self> {
        Self::build_with_map(params, n, MapParams::default_for(params))
    }

    pub fn build_with_map(params: &ModelParams, n: usize, map: MapParams) -> Result<Self> {
        params.validate()?;
        if n < 16 {
            return Err(Error::Grid(format!("need at least 16 nodes, got {n}")));
        }
        if !(map.scale > 0.0 && map.power > 0.0) {
            return Err(Error::Grid(format!("invalid map parameters {map:?}")));
        }
        let radial = params.d >= 2;
        let (x, w) = gauss_legendre(n);
        // radial integrands carry r^{d−1}, which is not even in u for even d
        let (u, uw): (Vec<f64>, Vec<f64>) = if radial {
            x.iter().zip(&w).map(|(a, b)| (0.5 * (a + 1.0), 0.5 * b)).unzip()
        } else {
            (x, w)
        };
        let umax = u.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        let tail = (params.d as f64 + params.gamma) * map.map(umax).log10();
        if !(tail < MAX_TAIL_DECADES) {
            return Err(Error::Grid(format!(
                "map power {} reaches v = {:.3e}; the equilibrium underflows there",
                map.power,
                map.map(umax)
            )));
        }
        let area = sphere_area(params.d);
        let mut nodes = Vec::with_capacity(u.len());
        let mut weights = Vec::with_capacity(u.len());
        for (&ui, &wi) in u.iter().zip(&uw) {
            let v = map.map(ui);
            let mut wt = wi * map.jacobian(ui);
            if radial {
                wt *= area * v.powi(params.d as i32 - 1);
            }
            nodes.push(v);
            weights.push(wt);
        }
        let f_values: Vec<f64> = nodes.iter().map(|&v| params.equilibrium(v)).collect();
        let mu_weights = weights.iter().zip(&f_values).map(|(w, f)| w / f).collect();
        let brackets = nodes.iter().map(|&v| bracket(v)).collect();
        let grid = VelocityGrid {
            params: *params,
            map,
            u,
            u_weights: uw,
            nodes,
            weights,
            f_values,
            mu_weights,
            brackets,
            id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
        };
        let mass = grid.mass_of_equilibrium();
        if !((mass - 1.0).abs() <= NORMALIZATION_TOL) {
            return Err(Error::Grid(format!(
                "equilibrium mass {mass:.15} misses 1 by {:.2e} (n = {n} is too small for gamma = {})",
                (mass - 1.0).abs(),
                params.gamma
            )));
        }
        Ok(grid)
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }
    pub fn map_params(&self) -> MapParams {
        self.map
    }
    pub fn len(&self) -> usize {
        self.nodes.len()
    }
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
    pub fn id(&self) -> u64 {
        self.id
    }
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    pub fn f_values(&self) -> &[f64] {
        &self.f_values
    }
    pub fn mu_weights(&self) -> &[f64] {
        &self.mu_weights
    }
    /// ⟨vᵢ⟩ at every node.
    pub fn brackets(&self) -> &[f64] {
        &self.brackets
    }
    pub fn reference_nodes(&self) -> &[f64] {
        &self.u
    }
    pub fn v_max(&self) -> f64 {
        self.nodes.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
    pub fn is_radial(&self) -> bool {
        self.params.d >= 2
    }

    /// Σ wᵢF(vᵢ), summed from the tails inwards.
    pub fn mass_of_equilibrium(&self) -> f64 {
        self.sum_small_first(|i| self.weights[i] * self.f_values[i])
    }

    fn sum_small_first(&self, term: impl Fn(usize) -> f64) -> f64 {
        let n = self.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| self.nodes[b].abs().total_cmp(&self.nodes[a].abs()));
        order.into_iter().map(term).sum()
    }

    /// Σ wᵢ⟨vᵢ⟩^k F(vᵢ); requires k < γ.
    pub fn moment(&self, k: f64) -> Result<f64> {
        self.check_moment(k)?;
        Ok(self.sum_small_first(|i| self.weights[i] * self.brackets[i].powf(k) * self.f_values[i]))
    }

    pub fn check_moment(&self, k: f64) -> Result<()> {
        if k >= self.params.gamma {
            return Err(Error::Domain(format!(
                "moment exponent {k} is not below gamma = {}",
                self.params.gamma
            )));
        }
        Ok(())
    }

    /// Tag node values as an element of L²(⟨v⟩^k dμ).
    pub fn vector(&self, values: Vec<C64>, weight_exponent: f64) -> WeightedVector {
        assert_eq!(values.len(), self.len(), "vector length differs from grid size");
        WeightedVector { values, weight_exponent, grid_id: self.id }
    }

    pub fn real_vector(&self, values: &[f64], weight_exponent: f64) -> WeightedVector {
        self.vector(values.iter().map(|&x| C64::new(x, 0.0)).collect(), weight_exponent)
    }

    pub fn equilibrium_vector(&self) -> WeightedVector {
        self.real_vector(&self.f_values, 0.0)
    }

    fn owns(&self, f: &WeightedVector) -> Result<()> {
        if f.grid_id != self.id || f.values.len() != self.len() {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    /// ⟨f, g⟩ = Σ μᵢ f̄ᵢ gᵢ.
    pub fn inner(&self, f: &WeightedVector, g: &WeightedVector) -> Result<C64> {
        self.owns(f)?;
        self.owns(g)?;
        Ok(self.dot(&f.values, &g.values))
    }

    /// Discrete ⟨f, g⟩ on raw node values.
    pub fn dot(&self, f: &[C64], g: &[C64]) -> C64 {
        f.iter()
            .zip(g)
            .zip(&self.mu_weights)
            .map(|((a, b), m)| a.conj() * b * *m)
            .sum()
    }

    /// ⟨f, g⟩ with the extra weight ⟨v⟩^k.
    pub fn dot_k(&self, f: &[C64], g: &[C64], k: f64) -> C64 {
        f.iter()
            .zip(g)
            .enumerate()
            .map(|(i, (a, b))| a.conj() * b * (self.mu_weights[i] * self.brackets[i].powf(k)))
            .sum()
    }

    /// ‖f‖₀² on raw values.
    pub fn norm2(&self, f: &[C64]) -> f64 {
        f.iter().zip(&self.mu_weights).map(|(a, m)| a.norm_sqr() * m).sum()
    }

    /// ‖f‖_k² = Σ μᵢ⟨vᵢ⟩^k|fᵢ|².
    pub fn norm2_k(&self, f: &[C64], k: f64) -> f64 {
        f.iter()
            .enumerate()
            .map(|(i, a)| a.norm_sqr() * self.mu_weights[i] * self.brackets[i].powf(k))
            .sum()
    }

    /// ‖f‖_k.
    pub fn weighted_norm(&self, f: &WeightedVector, k: f64) -> f64 {
        self.norm2_k(&f.values, k).sqrt()
    }

    /// ρ_f = Σ wᵢfᵢ.
    pub fn rho(&self, f: &[C64]) -> C64 {
        f.iter().zip(&self.weights).map(|(a, w)| a * *w).sum()
    }

    /// Πf = ρ_f F on raw values.
    pub fn pi(&self, f: &[C64]) -> Vec<C64> {
        let r = self.rho(f);
        self.f_values.iter().map(|&x| r * x).collect()
    }

    pub fn project_pi(&self, f: &WeightedVector) -> Result<WeightedVector> {
        self.owns(f)?;
        Ok(WeightedVector { values: self.pi(&f.values), ..f.clone() })
    }

    /// Π_k g = (Σw⟨v⟩^k g / Σw⟨v⟩^k F) F.
    pub fn project_pi_k(&self, f: &WeightedVector, k: f64) -> Result<WeightedVector> {
        self.owns(f)?;
        let den = self.moment(k)?;
        let num: C64 = f
            .values
            .iter()
            .enumerate()
            .map(|(i, a)| a * (self.weights[i] * self.brackets[i].powf(k)))
            .sum();
        let c = num / den;
        Ok(WeightedVector {
            values: self.f_values.iter().map(|&x| c * x).collect(),
            ..f.clone()
        })
    }

    /// Barycentric interpolation of node values, carried out in the reference variable u.
    pub fn interpolate(&self, values: &[f64], v: f64) -> f64 {
        let u = if self.is_radial() { self.map.inverse(v.abs()) } else { self.map.inverse(v) };
        let mut num = 0.0;
        let mut den = 0.0;
        for (j, (&uj, &wj)) in self.u.iter().zip(&self.u_weights).enumerate() {
            let diff = u - uj;
            if diff == 0.0 {
                return values[j];
            }
            let span = if self.is_radial() { uj * (1.0 - uj) } else { 1.0 - uj * uj };
            let lam = (span * wj).sqrt() * if j % 2 == 0 { 1.0 } else { -1.0 };
            let t = lam / diff;
            num += t * values[j];
            den += t;
        }
        num / den
    }

    /// Flat CSV dump: a comment line with the map parameters, then `node,weight,F`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "# scale={:e} power={:e}", self.map.scale, self.map.power)?;
        writeln!(out, "node,weight,F")?;
        for i in 0..self.len() {
            writeln!(out, "{:e},{:e},{:e}", self.nodes[i], self.weights[i], self.f_values[i])?;
        }
        Ok(())
    }

    /// Rebuild from a CSV produced by [`VelocityGrid::write_csv`]. The tabulated F is
    /// checked against the model equilibrium.
    pub fn read_csv(params: &ModelParams, path: impl AsRef<Path>) -> Result<Self> {
        let file = BufReader::new(std::fs::File::open(path)?);
        let mut map = None;
        let mut rows = Vec::new();
        for line in file.lines() {
            let line = line?;
            let line = line.trim();
            if let Some(rest) = line.strip_prefix('#') {
                let mut scale = None;
                let mut power = None;
                for tok in rest.split_whitespace() {
                    if let Some(x) = tok.strip_prefix("scale=") {
                        scale = x.parse::<f64>().ok();
                    } else if let Some(x) = tok.strip_prefix("power=") {
                        power = x.parse::<f64>().ok();
                    }
                }
                if let (Some(s), Some(p)) = (scale, power) {
                    map = Some(MapParams::new(s, p));
                }
                continue;
            }
            if line.is_empty() || line.starts_with("node") {
                continue;
            }
            let cols: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Grid(format!("bad CSV row '{line}': {e}")))?;
            if cols.len() != 3 {
                return Err(Error::Grid(format!("expected 3 columns, got '{line}'")));
            }
            rows.push((cols[0], cols[1], cols[2]));
        }
        let map = map.ok_or_else(|| Error::Grid("missing map parameter line".into()))?;
        let grid = Self::build_with_map(params, rows.len(), map)?;
        for (i, &(v, w, f)) in rows.iter().enumerate() {
            let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300);
            if !close(v, grid.nodes[i]) || !close(w, grid.weights[i]) || !close(f, grid.f_values[i]) {
                return Err(Error::Grid(format!("row {i} does not match the rebuilt grid")));
            }
        }
        Ok(grid)
    }
}

/// Relative change of ∫⟨v⟩^kF dv when the number of nodes is doubled.
pub fn refinement_change(params: &ModelParams, n: usize, map: MapParams, k: f64) -> Result<f64> {
    let a = VelocityGrid::build_with_map(params, n, map)?.moment(k)?;
    let b = VelocityGrid::build_with_map(params, 2 * n, map)?.moment(k)?;
    Ok(((a - b) / b).abs())
}

/// Complex node values tagged with the weight exponent of the space they live in.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedVector {
    pub values: Vec<C64>,
    pub weight_exponent: f64,
    grid_id: u64,
}

impl WeightedVector {
    pub fn grid_id(&self) -> u64 {
        self.grid_id
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scale(&self, c: C64) -> WeightedVector {
        WeightedVector { values: self.values.iter().map(|x| x * c).collect(), ..self.clone() }
    }

    pub fn sub(&self, other: &WeightedVector) -> Result<WeightedVector> {
        if self.grid_id != other.grid_id {
            return Err(Error::GridMismatch);
        }
        Ok(WeightedVector {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
            ..self.clone()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Kernel;
    use crate::quad::{integrate_to_inf, Tol};

    fn bgk(gamma: f64) -> ModelParams {
        ModelParams::scattering(gamma, Kernel::Separable, 0.0).unwrap()
    }

    #[test]
    fn cauchy_mass_and_half_moment() {
        let p = bgk(1.0);
        let g = VelocityGrid::build_default(&p, 400).unwrap();
        assert!((g.mass_of_equilibrium() - 1.0).abs() < 1e-10);
        let reference = 2.0
            * integrate_to_inf(|v| bracket(v).powf(0.5) / (std::f64::consts::PI * (1.0 + v * v)), 0.0, Tol::rel(1e-13));
        let m = g.moment(0.5).unwrap();
        assert!((m - reference).abs() / reference < 1e-6, "{m} vs {reference}");
    }

    #[test]
    fn under_resolved_grid_is_rejected() {
        let p = bgk(0.2);
        assert!(matches!(VelocityGrid::build_default(&p, 16), Err(Error::Grid(_))));
    }

    #[test]
    fn nodes_increasing_and_symmetric() {
        let g = VelocityGrid::build_default(&bgk(2.0), 64).unwrap();
        let v = g.nodes();
        assert!(v.windows(2).all(|w| w[0] < w[1]));
        for i in 0..v.len() {
            assert_eq!(v[i], -v[v.len() - 1 - i]);
        }
        assert!(g.weights().iter().all(|&w| w > 0.0));
    }

    #[test]
    fn inner_product_basics() {
        let g = VelocityGrid::build_default(&bgk(1.0), 400).unwrap();
        let f = g.equilibrium_vector();
        assert!((g.inner(&f, &f).unwrap().re - 1.0).abs() < 1e-10);
        let vf: Vec<f64> = g.nodes().iter().zip(g.f_values()).map(|(v, f)| v * f).collect();
        let vf = g.real_vector(&vf, 0.0);
        assert!(g.inner(&f, &vf).unwrap().norm() < 1e-12);
        let pi = g.project_pi(&vf).unwrap();
        assert!(pi.values.iter().all(|x| x.norm() < 1e-12));
        let pif = g.project_pi(&f).unwrap();
        let diff = pif.sub(&f).unwrap();
        assert!(g.weighted_norm(&diff, 0.0) < 1e-9);
    }

    #[test]
    fn grid_mismatch_detected() {
        let p = bgk(1.0);
        let a = VelocityGrid::build_default(&p, 64).unwrap();
        let b = VelocityGrid::build_default(&p, 64).unwrap();
        let fa = a.equilibrium_vector();
        let fb = b.equilibrium_vector();
        assert!(matches!(a.inner(&fa, &fb), Err(Error::GridMismatch)));
    }

    #[test]
    fn moment_exponent_checked() {
        let g = VelocityGrid::build_default(&bgk(1.0), 64).unwrap();
        assert!(g.moment(1.0).is_err());
        let f = g.equilibrium_vector();
        assert!(g.project_pi_k(&f, 1.5).is_err());
    }

    #[test]
    fn pi_k_idempotent() {
        let g = VelocityGrid::build_default(&bgk(1.5), 128).unwrap();
        let vals: Vec<f64> = g.nodes().iter().zip(g.f_values()).map(|(v, f)| (1.0 + v.sin()) * f).collect();
        let f = g.real_vector(&vals, 0.5);
        let p1 = g.project_pi_k(&f, 0.5).unwrap();
        let p2 = g.project_pi_k(&p1, 0.5).unwrap();
        assert!(g.weighted_norm(&p1.sub(&p2).unwrap(), 0.5) < 1e-12 * g.weighted_norm(&p1, 0.5));
    }

    #[test]
    fn map_inverse_roundtrip() {
        let m = MapParams::new(2.0, 2.0);
        for &u in &[-0.999, -0.3, 0.0, 0.1, 0.9, 0.99999] {
            assert!((m.inverse(m.map(u)) - u).abs() < 1e-14);
        }
    }

    #[test]
    fn interpolation_reproduces_smooth_profile() {
        let g = VelocityGrid::build_default(&bgk(1.0), 200).unwrap();
        let f = |v: f64| 1.0 / (1.0 + v * v);
        let vals: Vec<f64> = g.nodes().iter().map(|&v| f(v)).collect();
        for &v in &[0.0, 0.37, -2.5, 11.0] {
            assert!((g.interpolate(&vals, v) - f(v)).abs() < 1e-8, "v = {v}");
        }
    }

    #[test]
    fn radial_grid_normalizes() {
        for d in [2, 3, 4] {
            let p = ModelParams::new(d, 2.0, crate::model::Operator::Scattering { kernel: Kernel::Separable, beta: 0.0 }, 0.0)
                .unwrap();
            let g = VelocityGrid::build_default(&p, 200).unwrap();
            assert!((g.mass_of_equilibrium() - 1.0).abs() < 1e-10, "d = {d}");
            let f = |v: f64| (1.0 + v * v).powf(-0.5);
            let vals: Vec<f64> = g.nodes().iter().map(|&v| f(v)).collect();
            for v in [0.3, 2.0, 15.0] {
                assert!((g.interpolate(&vals, v) - f(v)).abs() < 1e-8, "d = {d}, v = {v}");
            }
        }
    }

    #[test]
    fn csv_roundtrip() {
        let p = bgk(1.0);
        let g = VelocityGrid::build_default(&p, 32).unwrap();
        let path = std::env::temp_dir().join(format!("fattail_grid_{}.csv", std::process::id()));
        g.write_csv(&path).unwrap();
        let h = VelocityGrid::read_csv(&p, &path).unwrap();
        assert_eq!(h.len(), g.len());
        std::fs::remove_file(path).ok();
    }
}
