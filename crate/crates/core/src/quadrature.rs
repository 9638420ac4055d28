//! Gauss-Legendre rules and a bisecting adaptive integrator.

use num_complex::Complex64;
use std::ops::{Add, Mul, Sub};
use std::sync::OnceLock;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

const PANEL_ORDER: usize = 10;

fn panel_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(PANEL_ORDER))
}

/// Values the adaptive integrator can accumulate.
pub trait Integrand:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn zero() -> Self;
    fn magnitude(self) -> f64;
}

impl Integrand for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl Integrand for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

/// Fixed `PANEL_ORDER`-point Gauss-Legendre on `[a, b]`.
pub fn gauss_panel<T: Integrand>(f: &impl Fn(f64) -> T, a: f64, b: f64) -> T {
    let (x, w) = panel_rule();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    let mut acc = T::zero();
    for (xi, wi) in x.iter().zip(w) {
        acc = acc + f(mid + half * xi) * (wi * half);
    }
    acc
}

/// Adaptive Gauss-Legendre: a panel is accepted when it agrees with the sum
/// over its two halves to `max(rel_tol·|I|, abs_tol)`.
pub fn adaptive<T: Integrand>(f: impl Fn(f64) -> T, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> T {
    if a == b {
        return T::zero();
    }
    let whole = gauss_panel(&f, a, b);
    recurse(&f, a, b, whole, rel_tol, abs_tol, 0)
}

fn recurse<T: Integrand>(
    f: &impl Fn(f64) -> T,
    a: f64,
    b: f64,
    whole: T,
    rel_tol: f64,
    abs_tol: f64,
    depth: u32,
) -> T {
    let m = 0.5 * (a + b);
    let left = gauss_panel(f, a, m);
    let right = gauss_panel(f, m, b);
    let halves = left + right;
    let err = (halves - whole).magnitude();
    if err <= (rel_tol * halves.magnitude()).max(abs_tol) || depth >= 40 {
        return halves;
    }
    recurse(f, a, m, left, rel_tol, abs_tol * 0.5, depth + 1)
        + recurse(f, m, b, right, rel_tol, abs_tol * 0.5, depth + 1)
}
