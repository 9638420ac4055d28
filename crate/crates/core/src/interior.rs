//! Linearised Euler flow in the channel `-1 < y < 1` around the Couette
//! profile `U(y) = y`.
//!
//! For a single horizontal mode `e^{iαx}` the vorticity is transported,
//! `ω(t, y) = ω(0, y) e^{-iαyt}`, and the stream function is recovered with
//! the Dirichlet Green function of `∂_y² - α²`. The initial vorticity is a
//! sum of three point vortices (or mollified bumps) whose amplitudes cancel
//! the wall shear at `t = 0`. The horizontal slip left on the lower wall is
//! the boundary data `φ(t)` that drives the viscous boundary layer.

use crate::error::{Error, Result};
use crate::heat::WallTrace;
use crate::quadrature;
use num_complex::Complex64;
use std::sync::OnceLock;

/// Default vortex positions.
pub const DEFAULT_POSITIONS: [f64; 3] = [-0.5, 0.0, 0.5];

/// Which wall of the channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Wall {
    /// `y = -1`
    Lower,
    /// `y = +1`
    Upper,
}

impl Wall {
    pub fn y(self) -> f64 {
        match self {
            Wall::Lower => -1.0,
            Wall::Upper => 1.0,
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::invalid("alpha", format!("must be positive and finite, got {alpha}")));
    }
    Ok(())
}

/// Dirichlet Green function of `∂_y² - α²` on `[-1, 1]`.
///
/// `G(y', y) = sinh α(y_< + 1) · sinh α(y_> - 1) / (α sinh 2α)`, which has
/// unit jump of `∂_y G` across `y = y'`.
pub fn green_function(alpha: f64, y_src: f64, y_obs: f64) -> Result<f64> {
    check_alpha(alpha)?;
    for (name, y) in [("y_src", y_src), ("y_obs", y_obs)] {
        if !(-1.0..=1.0).contains(&y) {
            return Err(Error::invalid(name, format!("{y} outside [-1, 1]")));
        }
    }
    let (lo, hi) = if y_src <= y_obs { (y_src, y_obs) } else { (y_obs, y_src) };
    Ok((alpha * (lo + 1.0)).sinh() * (alpha * (hi - 1.0)).sinh() / (alpha * (2.0 * alpha).sinh()))
}

/// `∂_y G(z, y)` evaluated on a wall, for a source at `z`.
pub fn green_wall_slope(alpha: f64, z: f64, wall: Wall) -> f64 {
    let s2 = (2.0 * alpha).sinh();
    match wall {
        Wall::Upper => (alpha * (z + 1.0)).sinh() / s2,
        Wall::Lower => (alpha * (z - 1.0)).sinh() / s2,
    }
}

/// Smooth bump `exp(-1/(1-u²))` on `(-1, 1)`, normalised to unit integral.
#[derive(Debug, Clone, Copy)]
pub struct Mollifier {
    norm: f64,
}

impl Default for Mollifier {
    fn default() -> Self {
        static NORM: OnceLock<f64> = OnceLock::new();
        let norm = *NORM.get_or_init(|| {
            quadrature::adaptive(raw_bump, -1.0, 1.0, 1e-14, 1e-16)
        });
        Self { norm }
    }
}

fn raw_bump(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - u * u)).exp()
    }
}

impl Mollifier {
    pub fn eval(&self, u: f64) -> f64 {
        raw_bump(u) / self.norm
    }

    /// `χ((y - b)/μ) / μ`
    pub fn scaled(&self, y: f64, center: f64, width: f64) -> f64 {
        self.eval((y - center) / width) / width
    }

    /// Quadrature of the bump over its support.
    pub fn integral(&self) -> f64 {
        quadrature::adaptive(|u| self.eval(u), -1.0, 1.0, 1e-13, 1e-16)
    }

    /// `∫ χ(u) f(center + width·u) du` over the support.
    pub fn average<T: quadrature::Integrand>(&self, center: f64, width: f64, f: impl Fn(f64) -> T) -> T {
        quadrature::adaptive(|u| f(center + width * u) * self.eval(u), -1.0, 1.0, 1e-12, 1e-15)
    }
}

/// Parameters of the initial interior vorticity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveSetup {
    pub alpha: f64,
    pub amplitudes: [f64; 3],
    pub positions: [f64; 3],
    /// Mollification width; `0` is the point-vortex limit.
    pub mu: f64,
}

impl WaveSetup {
    pub fn new(alpha: f64, amplitudes: [f64; 3], positions: [f64; 3], mu: f64) -> Result<Self> {
        check_alpha(alpha)?;
        let [b1, b2, b3] = positions;
        if !(-1.0 < b1 && b1 < b2 && b2 < b3 && b3 < 1.0) {
            return Err(Error::invalid(
                "positions",
                format!("need -1 < b1 < b2 < b3 < 1, got {positions:?}"),
            ));
        }
        if !(mu >= 0.0 && mu.is_finite()) {
            return Err(Error::invalid("mu", format!("must be >= 0, got {mu}")));
        }
        if mu > 0.0 && (b1 - mu <= -1.0 || b3 + mu >= 1.0) {
            return Err(Error::invalid("mu", format!("support of width {mu} reaches a wall")));
        }
        Ok(Self {
            alpha,
            amplitudes,
            positions,
            mu,
        })
    }

    /// Point vortices at `(-½, 0, ½)` with amplitudes cancelling the wall shear.
    pub fn dirac(alpha: f64) -> Result<Self> {
        Self::new(alpha, solve_dirac_coefficients(alpha)?, DEFAULT_POSITIONS, 0.0)
    }

    /// Mollified vortices of width `mu` at `(-½, 0, ½)`, with amplitudes from
    /// the mollified cancellation system.
    pub fn mollified(alpha: f64, mu: f64, chi: &Mollifier) -> Result<Self> {
        let trial = Self::new(alpha, [0.0, 0.0, 0.0], DEFAULT_POSITIONS, mu)?;
        let amplitudes = solve_mollified_coefficients(&trial, chi)?;
        Ok(Self { amplitudes, ..trial })
    }
}

/// Amplitudes `(a₁, a₂, a₃)` of point vortices at `(-½, 0, ½)` such that
/// `∂_y ψ₁(0, ±1) = 0`, with `a₂ = 1/sinh α`.
pub fn solve_dirac_coefficients(alpha: f64) -> Result<[f64; 3]> {
    check_alpha(alpha)?;
    let a2 = 1.0 / alpha.sinh();
    let a13 = -1.0 / ((0.5 * alpha).sinh() + (1.5 * alpha).sinh());
    Ok([a13, a2, a13])
}

/// Residuals of the two wall-shear cancellation equations at `t = 0` for point vortices.
pub fn dirac_system_residual(alpha: f64, amplitudes: [f64; 3], positions: [f64; 3]) -> [f64; 2] {
    let mut r = [0.0; 2];
    for k in 0..3 {
        r[0] += amplitudes[k] * (alpha * (positions[k] + 1.0)).sinh();
        r[1] += amplitudes[k] * (alpha * (positions[k] - 1.0)).sinh();
    }
    r
}

/// Coefficients `A_k^±(μ) = ∫ χ(u) ∂_y G(b_k + μu, ±1) du`, rows `[upper, lower]`.
pub fn mollified_system(setup: &WaveSetup, chi: &Mollifier) -> [[f64; 3]; 2] {
    let mut a = [[0.0; 3]; 2];
    for (row, wall) in [Wall::Upper, Wall::Lower].into_iter().enumerate() {
        for k in 0..3 {
            a[row][k] = chi.average(setup.positions[k], setup.mu, |z| green_wall_slope(setup.alpha, z, wall));
        }
    }
    a
}

/// Amplitudes `(a₁(μ), a₂, a₃(μ))` cancelling the wall shear of mollified
/// vortices at `t = 0`, with `a₂ = 1/sinh α` held fixed.
pub fn solve_mollified_coefficients(setup: &WaveSetup, chi: &Mollifier) -> Result<[f64; 3]> {
    if setup.mu <= 0.0 {
        return Err(Error::invalid("mu", "mollified system needs mu > 0"));
    }
    let a2 = 1.0 / setup.alpha.sinh();
    let m = mollified_system(setup, chi);
    // [A1+ A3+; A1- A3-] (a1, a3) = -a2 (A2+, A2-)
    let det = m[0][0] * m[1][2] - m[0][2] * m[1][0];
    let scale = m.iter().flatten().fold(0.0_f64, |s, v| s.max(v.abs()));
    if det.abs() <= 1e-12 * scale * scale {
        return Err(Error::Singular {
            context: "mollified wall-shear system",
        });
    }
    let r0 = -a2 * m[0][1];
    let r1 = -a2 * m[1][1];
    let a1 = (r0 * m[1][2] - m[0][2] * r1) / det;
    let a3 = (m[0][0] * r1 - r0 * m[1][0]) / det;
    Ok([a1, a2, a3])
}

/// Complex wall shear `∂_y ψ₁(t, ±1)` of the mode generated by `setup`.
///
/// Point vortices (`mu = 0`) sum the Green-function slopes directly; for
/// `mu > 0` each bump is integrated by adaptive quadrature.
pub fn wall_shear(t: f64, setup: &WaveSetup, chi: &Mollifier, wall: Wall) -> Complex64 {
    let alpha = setup.alpha;
    let phase = |z: f64| Complex64::from_polar(1.0, -alpha * z * t);
    (0..3)
        .map(|k| {
            let b = setup.positions[k];
            let contrib = if setup.mu == 0.0 {
                phase(b) * green_wall_slope(alpha, b, wall)
            } else {
                chi.average(b, setup.mu, |z| phase(z) * green_wall_slope(alpha, z, wall))
            };
            contrib * setup.amplitudes[k]
        })
        .sum()
}

/// Horizontal slip on the lower wall seen at `x = -t`, rebuilt from the wall
/// shear: `u_h(t, -t, -1) = -Re[sinh 2α · ∂_y ψ₁(t,-1) · e^{-iαt}]`.
///
/// Returns the boundary-layer wall trace, which is minus that slip.
pub fn trace_from_wall_shear(t: f64, setup: &WaveSetup, chi: &Mollifier) -> f64 {
    let s = wall_shear(t, setup, chi, Wall::Lower);
    ((2.0 * setup.alpha).sinh() * s * Complex64::from_polar(1.0, -setup.alpha * t)).re
}

/// Wall trace `φ(t) = -cos αt - a₁ sinh(3α/2) cos(αt/2) - a₃ sinh(α/2) cos(3αt/2)`
/// for the point-vortex configuration.
pub fn trace_phi(t: f64, alpha: f64) -> Result<f64> {
    Ok(DiracTrace::new(alpha)?.value(t))
}

/// The closed-form wall trace of the point-vortex configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiracTrace {
    pub alpha: f64,
    c_half: f64,
    c_three_half: f64,
}

impl DiracTrace {
    pub fn new(alpha: f64) -> Result<Self> {
        let [a1, _, a3] = solve_dirac_coefficients(alpha)?;
        Ok(Self {
            alpha,
            c_half: a1 * (1.5 * alpha).sinh(),
            c_three_half: a3 * (0.5 * alpha).sinh(),
        })
    }

    /// Period `4π/α`.
    pub fn period(&self) -> f64 {
        4.0 * std::f64::consts::PI / self.alpha
    }
}

impl WallTrace for DiracTrace {
    fn value(&self, t: f64) -> f64 {
        let at = self.alpha * t;
        -at.cos() - self.c_half * (0.5 * at).cos() - self.c_three_half * (1.5 * at).cos()
    }

    fn derivative(&self, t: f64) -> f64 {
        let a = self.alpha;
        let at = a * t;
        a * at.sin() + 0.5 * a * self.c_half * (0.5 * at).sin() + 1.5 * a * self.c_three_half * (1.5 * at).sin()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Tridiagonal;
    use approx::assert_relative_eq;

    #[test]
    fn green_vanishes_on_walls_and_is_symmetric() {
        for y in [-1.0, 1.0] {
            assert_eq!(green_function(1.0, 0.0, y).unwrap().abs(), 0.0);
        }
        let a = green_function(1.0, 0.3, -0.4).unwrap();
        let b = green_function(1.0, -0.4, 0.3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn green_rejects_bad_alpha_and_positions() {
        assert!(green_function(0.0, 0.0, 0.0).is_err());
        assert!(green_function(-1.0, 0.0, 0.0).is_err());
        assert!(green_function(1.0, 1.5, 0.0).is_err());
    }

    /// Discrete oracle: solve (D² - α²) g = δ_0/h with Dirichlet ends.
    fn discrete_green(alpha: f64, n: usize, src: usize) -> (f64, Vec<f64>) {
        let h = 2.0 / n as f64;
        let m = n - 1;
        let t = Tridiagonal::new(
            vec![1.0 / (h * h); m - 1],
            vec![-2.0 / (h * h) - alpha * alpha; m],
            vec![1.0 / (h * h); m - 1],
        );
        let mut rhs = vec![0.0; m];
        rhs[src - 1] = 1.0 / h;
        t.solve(&mut rhs, "test").unwrap();
        (h, rhs)
    }

    #[test]
    fn green_at_origin_matches_discrete_delta_solve() {
        let n = 4000;
        let (_, g) = discrete_green(1.0, n, n / 2);
        let expected = -(1.0f64.sinh().powi(2)) / 2.0f64.sinh();
        assert!((g[n / 2 - 1] - expected).abs() < 1e-6);
        assert_relative_eq!(green_function(1.0, 0.0, 0.0).unwrap(), expected, epsilon = 1e-15);
        assert!((expected + 0.38080).abs() < 1e-5);
    }

    #[test]
    fn discrete_residual_shrinks_with_h() {
        // Max error of the continuous G against the discrete delta solve,
        // away from the source node.
        let err = |n: usize| {
            let (h, g) = discrete_green(2.0, n, n / 4);
            let src = -1.0 + h * (n / 4) as f64;
            g.iter()
                .enumerate()
                .map(|(i, v)| {
                    let y = -1.0 + h * (i + 1) as f64;
                    (v - green_function(2.0, src, y).unwrap()).abs()
                })
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(200), err(400));
        assert!(e2 < e1 && e2 < 1e-3, "{e1} {e2}");
    }

    #[test]
    fn dirac_coefficients_alpha_one() {
        let [a1, a2, a3] = solve_dirac_coefficients(1.0).unwrap();
        assert_eq!(a1, a3);
        assert_relative_eq!(a2, 0.850_918_128_239_321_6, epsilon = 1e-15);
        // -(sinh ½ + sinh 3/2)^-1 evaluated independently at high precision.
        assert_relative_eq!(a1, -0.377_305_132_417_549_7, epsilon = 1e-15);
    }

    #[test]
    fn dirac_system_residuals_vanish() {
        for alpha in [0.5, 1.0, 2.0] {
            let a = solve_dirac_coefficients(alpha).unwrap();
            let r = dirac_system_residual(alpha, a, DEFAULT_POSITIONS);
            assert!(r[0].abs() <= 1e-14 && r[1].abs() <= 1e-14, "{alpha}: {r:?}");
        }
    }

    #[test]
    fn wall_shear_cancels_at_t0_and_is_periodic() {
        let setup = WaveSetup::dirac(1.0).unwrap();
        let chi = Mollifier::default();
        for wall in [Wall::Lower, Wall::Upper] {
            assert!(wall_shear(0.0, &setup, &chi, wall).norm() <= 1e-12);
            for t in [0.3, 2.0, 7.65] {
                let a = wall_shear(t, &setup, &chi, wall);
                let b = wall_shear(t + 4.0 * std::f64::consts::PI, &setup, &chi, wall);
                assert!((a - b).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn setup_validation() {
        assert!(WaveSetup::new(1.0, [0.0; 3], [0.0, -0.5, 0.5], 0.0).is_err());
        assert!(WaveSetup::new(1.0, [0.0; 3], [-1.0, 0.0, 0.5], 0.0).is_err());
        assert!(WaveSetup::new(1.0, [0.0; 3], [-0.5, 0.0, 0.5], 0.6).is_err());
        assert!(WaveSetup::new(1.0, [0.0; 3], [-0.5, 0.0, 0.5], 0.4).is_ok());
    }

    #[test]
    fn mollifier_has_unit_mass() {
        let chi = Mollifier::default();
        assert!((chi.integral() - 1.0).abs() < 1e-10);
        assert_eq!(chi.eval(1.0), 0.0);
        assert!(chi.eval(0.0) > 0.0);
    }

    #[test]
    fn trace_phi_vanishes_at_zero_and_is_periodic() {
        assert!(trace_phi(0.0, 1.0).unwrap().abs() < 1e-15);
        let t = 1.234;
        let p = 4.0 * std::f64::consts::PI;
        assert!((trace_phi(t, 1.0).unwrap() - trace_phi(t + p, 1.0).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn trace_phi_regression_anchor() {
        // Closed form evaluated independently in extended precision.
        assert_relative_eq!(trace_phi(7.65, 1.0).unwrap(), -0.734846631555512, epsilon = 1e-12);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let tr = DiracTrace::new(1.3).unwrap();
        for t in [0.0, 0.7, 5.1, 9.9] {
            let d = 1e-5;
            let fd = (tr.value(t + d) - tr.value(t - d)) / (2.0 * d);
            assert!((fd - tr.derivative(t)).abs() < 1e-9);
        }
    }
}
