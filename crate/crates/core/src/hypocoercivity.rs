//! Mode-by-mode machinery: the transport multiplier T f = iξv f, the operator
//! A_ξ f = ψ Π(T*φ f), the entropy H_ξ = ‖f‖² + δ Re⟨A_ξf, f⟩, the I₁…I₇
//! decomposition of R_ξ, and time evolution of a single Fourier mode.

use crate::coefficients::{CoefficientSet, SymbolFunctions};
use crate::collision::CollisionOperator;
use crate::error::{Error, Result};
use crate::grid::VelocityGrid;
use crate::C64;
use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::Mat;
use serde::Serialize;
use std::collections::HashMap;

/// One Fourier mode f̂(t, ξ, ·) on the velocity grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeState {
    pub xi: f64,
    pub values: Vec<C64>,
    pub time: f64,
}

impl ModeState {
    pub fn new(xi: f64, values: Vec<C64>, time: f64) -> Self {
        ModeState { xi, values, time }
    }

    /// ρ_f = Σ wᵢfᵢ.
    pub fn rho(&self, grid: &VelocityGrid) -> C64 {
        grid.rho(&self.values)
    }
}

/// T f = iξv f.
pub fn transport(grid: &VelocityGrid, xi: f64, f: &[C64]) -> Vec<C64> {
    f.iter().zip(grid.nodes()).map(|(x, &v)| x * C64::new(0.0, xi * v)).collect()
}

/// A_ξ f = ψF · Σ wᵢ(−iξvᵢ)φᵢfᵢ; the output is a multiple of ψF.
pub fn apply_a(grid: &VelocityGrid, sym: &SymbolFunctions, xi: f64, f: &[C64]) -> Vec<C64> {
    let s = a_scalar(grid, sym, xi, f);
    grid.nodes().iter().zip(grid.f_values()).map(|(&v, &fv)| s * (sym.psi(v) * fv)).collect()
}

fn a_scalar(grid: &VelocityGrid, sym: &SymbolFunctions, xi: f64, f: &[C64]) -> C64 {
    grid.nodes()
        .iter()
        .zip(grid.weights())
        .zip(f)
        .map(|((&v, &w), x)| x * C64::new(0.0, -xi * v * w * sym.phi(xi, v)))
        .sum()
}

/// A_ξ applied to a mode.
pub fn apply_a_mode(op: &CollisionOperator, mode: &ModeState) -> ModeState {
    let sym = SymbolFunctions::new(&op.params, 0.0);
    ModeState { values: apply_a(op.grid(), &sym, mode.xi, &mode.values), ..mode.clone() }
}

/// Dense generator G = L − iξ diag(v).
pub fn mode_generator(op: &CollisionOperator, xi: f64) -> Mat<C64> {
    let n = op.matrix.dim();
    let v = op.grid().nodes();
    Mat::from_fn(n, n, |i, j| {
        let mut x = C64::new(op.matrix.get(i, j), 0.0);
        if i == j {
            x -= C64::new(0.0, xi * v[i]);
        }
        x
    })
}

/// G f without forming G.
pub fn generator_apply(op: &CollisionOperator, xi: f64, f: &[C64]) -> Vec<C64> {
    let lf = op.apply_values(f);
    let tf = transport(op.grid(), xi, f);
    lf.iter().zip(&tf).map(|(a, b)| a - b).collect()
}

/// How a mode trajectory was computed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum EvolveMethod {
    Eigen,
    /// implicit stepper, with the reason the eigen path was rejected
    Implicit(String),
}

struct EigenData {
    scale: Vec<f64>,
    vectors: Mat<C64>,
    values: Vec<C64>,
    lu: PartialPivLu<C64>,
}

/// Propagator of ∂ₜf = Gf for one ξ. Works with the symmetrized generator
/// M^{1/2} G M^{−1/2}, M = diag(μ), in which T is skew and L dissipative.
pub struct ModeEvolver<'a> {
    op: &'a CollisionOperator,
    xi: f64,
    tol: f64,
    eigen: Option<EigenData>,
    eigen_error: Option<String>,
}

impl<'a> ModeEvolver<'a> {
    /// Eigendecompose the generator; the implicit stepper is used whenever the
    /// decomposition fails or reconstructs a test state worse than `tol`.
    pub fn new(op: &'a CollisionOperator, xi: f64, tol: f64) -> Self {
        let mut ev = ModeEvolver { op, xi, tol, eigen: None, eigen_error: None };
        match ev.decompose() {
            Ok(e) => ev.eigen = Some(e),
            Err(msg) => ev.eigen_error = Some(msg),
        }
        ev
    }

    /// Implicit stepping only.
    pub fn implicit(op: &'a CollisionOperator, xi: f64, tol: f64) -> Self {
        ModeEvolver { op, xi, tol, eigen: None, eigen_error: Some("implicit stepper requested".into()) }
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn operator(&self) -> &CollisionOperator {
        self.op
    }

    pub fn method(&self) -> EvolveMethod {
        match &self.eigen_error {
            None => EvolveMethod::Eigen,
            Some(m) => EvolveMethod::Implicit(m.clone()),
        }
    }

    fn scaled_generator(&self, scale: &[f64]) -> Mat<C64> {
        let g = mode_generator(self.op, self.xi);
        let n = scale.len();
        Mat::from_fn(n, n, |i, j| g[(i, j)] * (scale[i] / scale[j]))
    }

    fn decompose(&self) -> std::result::Result<EigenData, String> {
        let grid = self.op.grid();
        let scale: Vec<f64> = grid.mu_weights().iter().map(|m| m.sqrt()).collect();
        let gs = self.scaled_generator(&scale);
        let eig = gs.eigen().map_err(|e| format!("eigendecomposition failed: {e:?}"))?;
        let vectors = eig.U().to_owned();
        let values: Vec<C64> = eig
            .S()
            .column_vector()
            .iter()
            .map(|l| C64::new(l.re.min(0.0), l.im))
            .collect();
        if values.iter().any(|l| !l.re.is_finite() || !l.im.is_finite()) {
            return Err("non-finite eigenvalues".into());
        }
        let lu = vectors.partial_piv_lu();
        let data = EigenData { scale, vectors, values, lu };
        // reconstruction test on a deterministic state with every node populated
        let n = grid.len();
        let probe: Vec<C64> = (0..n).map(|i| C64::new(1.0 + (i as f64 * 0.7).sin(), (i as f64 * 1.3).cos())).collect();
        let c = data.coefficients_scaled(&probe);
        let back = data.combine(&c, 0.0);
        let err = probe.iter().zip(&back).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        let size = probe.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let amplification = (0..n)
            .map(|j| c[j].norm() * (0..n).map(|i| data.vectors[(i, j)].norm_sqr()).sum::<f64>().sqrt())
            .sum::<f64>()
            / size;
        if err > self.tol * size || amplification * 1e-15 > self.tol {
            return Err(format!(
                "eigenvector basis ill-conditioned (reconstruction {:.1e}, amplification {:.1e})",
                err / size,
                amplification
            ));
        }
        Ok(data)
    }

    /// Values at the requested times, which must be nondecreasing and start
    /// at or after `mode.time`.
    pub fn evolve(&self, mode: &ModeState, times: &[f64]) -> Result<Vec<ModeState>> {
        if times.windows(2).any(|w| w[1] < w[0]) || times.first().is_some_and(|&t| t < mode.time) {
            return Err(Error::Config("output times must be nondecreasing and not before the mode time".into()));
        }
        if mode.xi != self.xi {
            return Err(Error::Config(format!("mode at xi = {} given to evolver for xi = {}", mode.xi, self.xi)));
        }
        match &self.eigen {
            Some(e) => {
                let y: Vec<C64> = mode.values.iter().zip(&e.scale).map(|(x, s)| x * *s).collect();
                let c = e.coefficients_scaled(&y);
                Ok(times
                    .iter()
                    .map(|&t| {
                        let z = e.combine(&c, t - mode.time);
                        let values = z.iter().zip(&e.scale).map(|(x, s)| x / *s).collect();
                        ModeState { xi: self.xi, values, time: t }
                    })
                    .collect())
            }
            None => self.evolve_implicit(mode, times),
        }
    }

    /// f(t + dt) from f(t).
    pub fn propagate(&self, f: &[C64], dt: f64) -> Result<Vec<C64>> {
        let m = ModeState { xi: self.xi, values: f.to_vec(), time: 0.0 };
        Ok(self.evolve(&m, &[dt])?.pop().expect("one output").values)
    }

    /// Eigenvalues of G (empty on the implicit path).
    pub fn eigenvalues(&self) -> Vec<C64> {
        self.eigen.as_ref().map(|e| e.values.clone()).unwrap_or_default()
    }

    fn evolve_implicit(&self, mode: &ModeState, times: &[f64]) -> Result<Vec<ModeState>> {
        let grid = self.op.grid();
        let scale: Vec<f64> = grid.mu_weights().iter().map(|m| m.sqrt()).collect();
        let g = self.scaled_generator(&scale);
        let mut y: Vec<C64> = mode.values.iter().zip(&scale).map(|(x, s)| x * *s).collect();
        let mut stepper = Sdirk::new(&g, self.tol);
        let mut t = mode.time;
        let mut out = Vec::with_capacity(times.len());
        for &target in times {
            y = stepper.advance(y, target - t)?;
            t = target;
            let values = y.iter().zip(&scale).map(|(x, s)| x / *s).collect();
            out.push(ModeState { xi: self.xi, values, time: t });
        }
        Ok(out)
    }
}

impl EigenData {
    fn coefficients_scaled(&self, y: &[C64]) -> Vec<C64> {
        let n = y.len();
        let mut rhs = Mat::from_fn(n, 1, |i, _| y[i]);
        self.lu.solve_in_place(rhs.as_mut());
        (0..n).map(|i| rhs[(i, 0)]).collect()
    }

    fn combine(&self, c: &[C64], t: f64) -> Vec<C64> {
        let n = c.len();
        let ec: Vec<C64> = c.iter().zip(&self.values).map(|(x, l)| x * (l * t).exp()).collect();
        let mut z = vec![C64::new(0.0, 0.0); n];
        for (j, e) in ec.iter().enumerate() {
            if *e == C64::new(0.0, 0.0) {
                continue;
            }
            let col = self.vectors.col(j);
            for (i, zi) in z.iter_mut().enumerate() {
                *zi += col[i] * e;
            }
        }
        z
    }
}

/// Two-stage L-stable SDIRK with step-doubling error control.
struct Sdirk<'g> {
    g: &'g Mat<C64>,
    tol: f64,
    h: f64,
    lu: HashMap<u64, PartialPivLu<C64>>,
}

const SDIRK_GAMMA: f64 = 1.0 - std::f64::consts::FRAC_1_SQRT_2;

impl<'g> Sdirk<'g> {
    fn new(g: &'g Mat<C64>, tol: f64) -> Self {
        Sdirk { g, tol, h: 1e-3, lu: HashMap::new() }
    }

    fn matvec(&self, y: &[C64]) -> Vec<C64> {
        let n = y.len();
        (0..n).map(|i| (0..n).map(|j| self.g[(i, j)] * y[j]).sum()).collect()
    }

    fn solve(&mut self, h: f64, rhs: &[C64]) -> Vec<C64> {
        let n = rhs.len();
        let g = self.g;
        let lu = self.lu.entry(h.to_bits()).or_insert_with(|| {
            let m = Mat::from_fn(n, n, |i, j| {
                let id = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
                id - g[(i, j)] * (h * SDIRK_GAMMA)
            });
            m.partial_piv_lu()
        });
        let mut b = Mat::from_fn(n, 1, |i, _| rhs[i]);
        lu.solve_in_place(b.as_mut());
        (0..n).map(|i| b[(i, 0)]).collect()
    }

    fn step(&mut self, y: &[C64], h: f64) -> Vec<C64> {
        let k1 = self.solve(h, &self.matvec(y));
        let y1: Vec<C64> = y.iter().zip(&k1).map(|(a, k)| a + k * (h * (1.0 - SDIRK_GAMMA))).collect();
        let k2 = self.solve(h, &self.matvec(&y1));
        y.iter()
            .zip(&k1)
            .zip(&k2)
            .map(|((a, p), q)| a + p * (h * (1.0 - SDIRK_GAMMA)) + q * (h * SDIRK_GAMMA))
            .collect()
    }

    fn advance(&mut self, mut y: Vec<C64>, span: f64) -> Result<Vec<C64>> {
        let norm = |v: &[C64]| v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        let mut done = 0.0;
        let mut guard = 0usize;
        while done < span {
            guard += 1;
            if guard > 2_000_000 {
                return Err(Error::Linalg("implicit stepper exceeded its step budget".into()));
            }
            let h = self.h.min(span - done);
            let full = self.step(&y, h);
            let half = self.step(&y, h / 2.0);
            let two = self.step(&half, h / 2.0);
            let err = full.iter().zip(&two).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
            let scale = norm(&two).max(1e-300);
            if err <= self.tol * scale {
                y = two;
                done += h;
                if err < self.tol * scale / 8.0 {
                    self.h *= 2.0;
                }
            } else {
                self.h = h / 2.0;
                if self.h < 1e-14 * span.max(1.0) {
                    return Err(Error::Linalg("implicit stepper step size underflow".into()));
                }
            }
        }
        Ok(y)
    }
}

/// Evolve a mode to the requested times. Returns the states and the method used.
pub fn evolve_mode(
    mode: &ModeState,
    op: &CollisionOperator,
    t_grid: &[f64],
    tol: f64,
) -> Result<(Vec<ModeState>, EvolveMethod)> {
    let ev = ModeEvolver::new(op, mode.xi, tol);
    Ok((ev.evolve(mode, t_grid)?, ev.method()))
}

/// Entropy bookkeeping at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyReport {
    pub time: f64,
    /// H_ξ[f] = ‖f‖² + δ Re⟨A_ξf, f⟩
    pub h: f64,
    pub norm2: f64,
    /// Re⟨A_ξf, f⟩
    pub a_term: f64,
    /// R_ξ = Re ΣIₖ
    pub r: f64,
    /// −d/dt Re⟨A_ξf, f⟩ by a forward difference along the flow
    pub r_flow: f64,
    pub i_terms: [C64; 7],
    /// λ₀μ₂‖Πf‖² with grid quadrature
    pub i1_dual: f64,
    /// 2 Re⟨Lf, f⟩
    pub dissipation: f64,
    /// ‖Πf‖²
    pub macro_norm2: f64,
    /// ‖(1−Π)f‖_η²
    pub micro_norm2_eta: f64,
}

impl EntropyReport {
    pub fn i_terms_re(&self) -> [f64; 7] {
        self.i_terms.map(|z| z.re)
    }

    pub fn with_delta(&self, delta: f64) -> f64 {
        self.norm2 + delta * self.a_term
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 2.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("delta must lie in (0,2), got {delta}")))
    }
}

/// I₁…I₇ for a state f, with Πf = ρF and the η-weighted micro norm.
pub fn i_terms(op: &CollisionOperator, xi: f64, f: &[C64], eta: f64) -> ([C64; 7], f64, f64) {
    let grid = op.grid();
    let sym = SymbolFunctions::new(&op.params, eta);
    let p = grid.pi(f);
    let q: Vec<C64> = f.iter().zip(&p).map(|(a, b)| a - b).collect();
    let a = |g: &[C64]| apply_a(grid, &sym, xi, g);
    let t = |g: &[C64]| transport(grid, xi, g);
    let lq = op.apply_values(&q);
    let dot = |x: &[C64], y: &[C64]| grid.dot(x, y);
    let tp = t(&p);
    let tq = t(&q);
    let aq = a(&q);
    let terms = [
        dot(&a(&tp), &p),
        dot(&a(&tp), &q),
        dot(&a(&tq), &p),
        dot(&a(&tq), &q),
        dot(&aq, &tq),
        -dot(&a(&lq), f),
        -dot(&aq, &lq),
    ];
    (terms, grid.norm2(&p), grid.norm2_k(&q, eta))
}

/// Entropy bookkeeping for a single state, without the flow derivative
/// (`r_flow` is NaN).
pub fn instant_report(op: &CollisionOperator, xi: f64, f: &[C64], time: f64, delta: f64, eta: f64) -> Result<EntropyReport> {
    check_delta(delta)?;
    let grid = op.grid();
    let sym = SymbolFunctions::new(&op.params, eta);
    let a_term = grid.dot(&apply_a(grid, &sym, xi, f), f).re;
    let (terms, macro_norm2, micro) = i_terms(op, xi, f, eta);
    let (mut lambda0, mut mu2) = (0.0, 0.0);
    for ((&v, &w), &fv) in grid.nodes().iter().zip(grid.weights()).zip(grid.f_values()) {
        lambda0 += w * sym.psi(v) * fv;
        mu2 += w * (xi * v).powi(2) * sym.phi(xi, v) * fv;
    }
    let norm2 = grid.norm2(f);
    Ok(EntropyReport {
        time,
        h: norm2 + delta * a_term,
        norm2,
        a_term,
        r: terms.iter().map(|z| z.re).sum(),
        r_flow: f64::NAN,
        i_terms: terms,
        i1_dual: lambda0 * mu2 * grid.rho(f).norm_sqr() * grid.mass_of_equilibrium(),
        dissipation: 2.0 * op.quadratic_form(f).re,
        macro_norm2,
        micro_norm2_eta: micro,
    })
}

/// Entropy reports along a trajectory produced by `evolver`. R is the I-term
/// sum; `r_flow` is −d/dt Re⟨A_ξf, f⟩ by a one-sided second-order difference
/// along the exact flow.
pub fn entropy_report(
    evolver: &ModeEvolver,
    trajectory: &[ModeState],
    delta: f64,
    eta: f64,
) -> Result<Vec<EntropyReport>> {
    check_delta(delta)?;
    let op = evolver.operator();
    let grid = op.grid();
    let xi = evolver.xi();
    let sym = SymbolFunctions::new(&op.params, eta);
    let a_form = |f: &[C64]| grid.dot(&apply_a(grid, &sym, xi, f), f).re;
    let mut out = Vec::with_capacity(trajectory.len());
    for s in trajectory {
        let mut rep = instant_report(op, xi, &s.values, s.time, delta, eta)?;
        let h = 3e-6 * s.time.max(1e-3);
        let f1 = evolver.propagate(&s.values, h)?;
        let f2 = evolver.propagate(&s.values, 2.0 * h)?;
        rep.r_flow = -(-3.0 * rep.a_term + 4.0 * a_form(&f1) - a_form(&f2)) / (2.0 * h);
        out.push(rep);
    }
    Ok(out)
}

/// Outcome of the six I-term bounds |Iₖ| ≤ boundₖ, k = 2…7.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IBoundCheck {
    pub lhs: [f64; 6],
    pub rhs: [f64; 6],
    pub holds: [bool; 6],
}

/// Evaluate the bounds with X = ‖Πf‖, Y = ‖(1−Π)f‖_η:
/// |I₂| ≤ λ̃₀μ₂XY, |I₃| ≤ λ₀μ̃₂XY, |I₄| ≤ λ̃₀μ̃₂Y², |I₅| ≤ λ̃₁μ̃₁Y²,
/// |I₆| ≤ λ₀√μ_L XY + λ̃₀√μ_L Y², |I₇| ≤ √λ_L μ̃₁Y².
pub fn check_i_term_bounds(report: &EntropyReport, c: &CoefficientSet) -> IBoundCheck {
    let x = report.macro_norm2.sqrt();
    let y = report.micro_norm2_eta.sqrt();
    let ml = c.mu_l.sqrt();
    let ll = c.lambda_l.sqrt();
    let rhs = [
        c.tlambda0 * c.mu2 * x * y,
        c.lambda0 * c.tmu2 * x * y,
        c.tlambda0 * c.tmu2 * y * y,
        c.tlambda1 * c.tmu1 * y * y,
        c.lambda0 * ml * x * y + c.tlambda0 * ml * y * y,
        ll * c.tmu1 * y * y,
    ];
    let mut lhs = [0.0; 6];
    let mut holds = [false; 6];
    for k in 0..6 {
        lhs[k] = report.i_terms[k + 1].norm();
        let slack = 1e-9 * (rhs[k] + report.norm2 * 1e-6);
        holds[k] = lhs[k] <= rhs[k] * (1.0 + 1e-9) + slack;
    }
    IBoundCheck { lhs, rhs, holds }
}

/// ℒ(ξ) = |ξ|^α/⟨ξ⟩^α.
pub fn macro_symbol(xi: f64, alpha: f64) -> f64 {
    (xi.abs() / (1.0 + xi * xi).sqrt()).powf(alpha)
}

/// Largest c with R ≥ c ℒ(ξ)‖Πf‖² − K‖(1−Π)f‖_η² at every report.
pub fn entropy_inequality_constant(reports: &[EntropyReport], xi: f64, alpha: f64, k: f64) -> f64 {
    let l = macro_symbol(xi, alpha);
    reports
        .iter()
        .filter(|r| r.macro_norm2 > 0.0)
        .map(|r| (r.r + k * r.micro_norm2_eta) / (l * r.macro_norm2))
        .fold(f64::INFINITY, f64::min)
}

/// H_ξ nonincreasing across consecutive reports for the given δ.
pub fn h_nonincreasing(reports: &[EntropyReport], delta: f64) -> bool {
    reports.windows(2).all(|w| {
        let (a, b) = (w[0].with_delta(delta), w[1].with_delta(delta));
        b <= a * (1.0 + 1e-10) + 1e-300
    })
}

/// The largest δ among `candidates` for which H_ξ is nonincreasing.
pub fn largest_monotone_delta(reports: &[EntropyReport], candidates: &[f64]) -> Option<f64> {
    candidates
        .iter()
        .copied()
        .filter(|&d| h_nonincreasing(reports, d))
        .fold(None, |m: Option<f64>, d| Some(m.map_or(d, |x| x.max(d))))
}
