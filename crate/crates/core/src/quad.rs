//! Quadrature building blocks: Gauss–Legendre rules, a globally adaptive
//! integrator on finite intervals and helpers for half-lines with
//! power-law tails.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

/// Gauss–Legendre nodes and weights on (-1, 1), nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

fn base_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(15))
}

fn rule_on<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let (x, w) = base_rule();
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut s = 0.0;
    for (xi, wi) in x.iter().zip(w) {
        s += wi * f(c + h * xi);
    }
    s * h
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.partial_cmp(&other.err).unwrap_or(Ordering::Equal)
    }
}

fn piece<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, coarse: f64) -> Piece {
    let m = 0.5 * (a + b);
    let fine = rule_on(f, a, m) + rule_on(f, m, b);
    Piece {
        a,
        b,
        value: fine,
        err: (fine - coarse).abs(),
    }
}

/// Tolerances for the adaptive integrators.
#[derive(Debug, Clone, Copy)]
pub struct Tol {
    pub rel: f64,
    pub abs: f64,
}

impl Default for Tol {
    fn default() -> Self {
        Tol { rel: 1e-11, abs: 1e-300 }
    }
}

impl Tol {
    pub fn rel(rel: f64) -> Self {
        Tol { rel, abs: 1e-300 }
    }
}

/// Globally adaptive integration on a finite interval. Each piece compares a
/// 15-point Gauss rule against the same rule on both halves.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tol) -> f64 {
    if a == b {
        return 0.0;
    }
    if b < a {
        return -integrate(f, b, a, tol);
    }
    let mut heap = BinaryHeap::new();
    let first = piece(&f, a, b, rule_on(&f, a, b));
    let mut total = first.value;
    let mut err = first.err;
    heap.push(first);
    let mut count = 1;
    while err > tol.abs.max(tol.rel * total.abs()) && count < 4000 {
        let Some(p) = heap.pop() else { break };
        let m = 0.5 * (p.a + p.b);
        if m <= p.a || m >= p.b {
            heap.push(Piece { err: 0.0, ..p });
            err = heap.iter().map(|q| q.err).sum();
            continue;
        }
        let left = piece(&f, p.a, m, rule_on(&f, p.a, m));
        let right = piece(&f, m, p.b, rule_on(&f, m, p.b));
        total += left.value + right.value - p.value;
        err += left.err + right.err - p.err;
        heap.push(left);
        heap.push(right);
        count += 1;
        if count % 64 == 0 {
            total = heap.iter().map(|q| q.value).sum();
            err = heap.iter().map(|q| q.err).sum();
        }
    }
    heap.iter().map(|q| q.value).sum()
}

/// Integral over [a, b] with 0 < a < b split into geometric panels of ratio 4,
/// suited to integrands varying on a logarithmic scale.
pub fn integrate_geometric<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tol) -> f64 {
    assert!(a > 0.0 && b >= a);
    let mut s = 0.0;
    let mut lo = a;
    while lo < b {
        let hi = (lo * 4.0).min(b);
        s += integrate(&f, lo, hi, tol);
        lo = hi;
    }
    s
}

/// Integral over [a, ∞) for integrands with power-law (or faster) decay.
/// Geometric panels are summed until the panel ratio signals a geometric
/// series, whose remainder is added in closed form.
pub fn integrate_to_inf<F: Fn(f64) -> f64>(f: F, a: f64, tol: Tol) -> f64 {
    let mut s = 0.0;
    let mut lo = a;
    if lo <= 0.0 {
        s += integrate(&f, lo, 1.0, tol);
        lo = 1.0;
    }
    let mut prev: Option<f64> = None;
    let mut small = 0;
    while lo < 1e290 {
        let hi = lo * 4.0;
        let p = integrate(&f, lo, hi, tol);
        s += p;
        lo = hi;
        if p == 0.0 {
            small += 1;
            if small >= 2 {
                break;
            }
            prev = Some(p);
            continue;
        }
        small = 0;
        if let Some(q0) = prev {
            if q0 != 0.0 {
                let q = p / q0;
                if q > 0.0 && q < 0.9 {
                    let rest = p * q / (1.0 - q);
                    if rest.abs() <= 1e-3 * tol.rel * s.abs() + tol.abs {
                        s += rest;
                        break;
                    }
                }
            }
        }
        prev = Some(p);
    }
    s
}

/// Integral over (-∞, ∞) with user breakpoints; the outer pieces use
/// [`integrate_to_inf`].
pub fn integrate_line<F: Fn(f64) -> f64>(f: F, breaks: &[f64], tol: Tol) -> f64 {
    let mut b: Vec<f64> = breaks.to_vec();
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.dedup();
    if b.is_empty() {
        b.push(0.0);
    }
    let lo = b[0];
    let hi = *b.last().unwrap();
    let mut s = integrate_to_inf(|x| f(lo - x), 0.0, tol);
    for w in b.windows(2) {
        s += integrate(&f, w[0], w[1], tol);
    }
    s + integrate_to_inf(|x| f(hi + x), 0.0, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_is_exact_for_polynomials() {
        let (x, w) = gauss_legendre(20);
        for k in 0..40 {
            let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k)).sum();
            let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
            assert!((s - exact).abs() < 1e-13, "degree {k}: {s} vs {exact}");
        }
    }

    #[test]
    fn large_rules_have_unit_weight_sum() {
        for n in [400, 801] {
            let (x, w) = gauss_legendre(n);
            let s: f64 = w.iter().sum();
            assert!((s - 2.0).abs() < 1e-12);
            assert!(x.windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let v = integrate(|x| x.powf(-0.5), 0.0, 1.0, Tol::rel(1e-10));
        assert!((v - 2.0).abs() < 1e-8, "{v}");
    }

    #[test]
    fn power_tail() {
        let v = integrate_to_inf(|x| 1.0 / (1.0 + x * x), 0.0, Tol::rel(1e-11));
        assert!((v - std::f64::consts::FRAC_PI_2).abs() < 1e-9, "{v}");
        let v = integrate_to_inf(|x| x.powf(-1.5), 1.0, Tol::rel(1e-11));
        assert!((v - 2.0).abs() < 1e-8, "{v}");
    }

    #[test]
    fn whole_line() {
        let v = integrate_line(|x| (-x * x).exp(), &[-1.0, 1.0], Tol::rel(1e-12));
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-11);
    }
}
