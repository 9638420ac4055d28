//! Viscous correction of the Rayleigh mode.
//!
//! With the rescaled viscosity `ν̂` the Orr-Sommerfeld equation reads
//! `(V - c)(∂² - α²)ψ - V''ψ = ε (∂² - α²)²ψ`, `ε = iν̂/α`, with
//! `ψ(0) = ψ'(0) = 0` and decay at infinity. Its eigenvalue is computed with
//! the compound-matrix method: the six 2×2 minors of the two decaying
//! solutions are integrated from `Y0` to the wall, where the no-slip
//! determinant is the `(ψ, ψ')` minor.

use crate::error::{Error, Result};
use crate::shooting::{EigenPair, ProfileInterp, ShootingConfig};
use crate::spectral::RayleighProblem;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::Path;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, PartialEq)]
pub struct OsProblem {
    pub base: RayleighProblem,
    pub nu_hat: f64,
    /// `i ν̂ / α`
    pub epsilon: Complex64,
}

impl OsProblem {
    pub fn new(base: RayleighProblem, nu_hat: f64) -> Result<Self> {
        if !(nu_hat >= 0.0 && nu_hat.is_finite()) {
            return Err(Error::invalid("nu_hat", format!("must be >= 0, got {nu_hat}")));
        }
        let epsilon = I * (nu_hat / base.alpha_ray);
        Ok(Self { base, nu_hat, epsilon })
    }
}

/// Pointwise Orr-Sommerfeld residual
/// `(V - c)(D² - α²)ψ - V''ψ - ε(D⁴ - 2α²D² + α⁴)ψ` with centred 3- and
/// 5-point differences, at samples `k ≥ 5` that keep the stencil inside the
/// data. Returns `(Y_k, residual_k)`.
pub fn os_residual_field(pair: &EigenPair, os: &OsProblem) -> Result<Vec<(f64, Complex64)>> {
    let h = pair.spacing();
    if h > 0.02 * (1.0 + 1e-9) {
        return Err(Error::invalid("pair", format!("sample spacing {h} exceeds 0.02")));
    }
    let n = pair.psi.len();
    if n < 9 {
        return Err(Error::invalid("pair", "too few samples for the 5-point stencil"));
    }
    let interp = ProfileInterp::new(&os.base.profile)?;
    let a2 = os.base.alpha_ray * os.base.alpha_ray;
    let p = &pair.psi;
    Ok((5..n - 2)
        .map(|k| {
            let y = pair.y[k];
            let d2 = (p[k + 1] - p[k] * 2.0 + p[k - 1]) / (h * h);
            let d4 = (p[k + 2] - p[k + 1] * 4.0 + p[k] * 6.0 - p[k - 1] * 4.0 + p[k - 2]) / (h * h * h * h);
            let lap = d2 - p[k] * a2;
            let bilap = d4 - d2 * (2.0 * a2) + p[k] * (a2 * a2);
            let r = (interp.v(y) - pair.c) * lap - p[k] * interp.vpp(y) - os.epsilon * bilap;
            (y, r)
        })
        .collect())
}

/// Max norm of [`os_residual_field`].
pub fn os_residual(pair: &EigenPair, os: &OsProblem) -> Result<f64> {
    Ok(os_residual_field(pair, os)?
        .iter()
        .map(|(_, r)| r.norm())
        .fold(0.0, f64::max))
}

fn principal_sqrt_positive(z: Complex64) -> Complex64 {
    let r = z.sqrt();
    if r.re < 0.0 {
        -r
    } else {
        r
    }
}

/// Wall sublayer of the viscous correction: the rate `γ = √(iαc₀)` with
/// `Re γ > 0`, and the layer width `ν̂^{1/2} / Re γ` in boundary-layer units.
pub fn sublayer_profile(c0: Complex64, alpha_ray: f64, nu_hat: f64) -> Result<(Complex64, f64)> {
    if c0 == Complex64::new(0.0, 0.0) {
        return Err(Error::Degenerate("c0 = 0 has no sublayer".into()));
    }
    let gamma = principal_sqrt_positive(I * c0 * alpha_ray);
    if gamma.re <= 1e-14 * gamma.norm() {
        return Err(Error::Degenerate(format!(
            "i·α·c0 = {} is a negative real: purely oscillatory, no decaying root",
            I * c0 * alpha_ray
        )));
    }
    Ok((gamma, nu_hat.sqrt() / gamma.re))
}

type Minors = [Complex64; 6];

/// Compound-matrix integrator for one problem and step size.
pub struct CompoundShooter<'a> {
    os: &'a OsProblem,
    config: ShootingConfig,
    v: Vec<f64>,
    vpp: Vec<f64>,
}

impl<'a> CompoundShooter<'a> {
    pub fn new(os: &'a OsProblem, config: ShootingConfig) -> Result<Self> {
        if os.nu_hat <= 0.0 {
            return Err(Error::invalid("nu_hat", "compound-matrix solve needs nu_hat > 0"));
        }
        let interp = ProfileInterp::new(&os.base.profile)?;
        let step = config.step();
        let m = 2 * config.steps + 1;
        let y = |j: usize| (config.y0 - 0.5 * step * j as f64).max(0.0);
        Ok(Self {
            os,
            config,
            v: (0..m).map(|j| interp.v(y(j))).collect(),
            vpp: (0..m).map(|j| interp.vpp(y(j))).collect(),
        })
    }

    fn rate(&self, j: usize, c: Complex64) -> Complex64 {
        let a2 = self.os.base.alpha_ray.powi(2);
        principal_sqrt_positive((self.v[j] - c) / self.os.epsilon + a2)
    }

    /// Largest step that resolves the fastest local viscous rate ten times over.
    pub fn required_step(&self, c: Complex64) -> f64 {
        let fastest = (0..self.v.len()).step_by(64).chain([0, self.v.len() - 1])
            .map(|j| self.rate(j, c).norm())
            .fold(0.0, f64::max);
        0.1 / fastest
    }

    /// Wall value of the `(ψ, ψ')` minor, normalised by the local growth
    /// `exp ∫ (α + q(Y)) dY` so it stays `O(1)` and analytic in `c`.
    pub fn determinant(&self, c: Complex64) -> Result<Complex64> {
        let step = self.config.step();
        let required = self.required_step(c);
        if step > required {
            return Err(Error::Underresolved { step, required });
        }
        let alpha = self.os.base.alpha_ray;
        let a2 = alpha * alpha;
        let eps = self.os.epsilon;
        let q = self.rate(0, c);
        let sigma: Vec<Complex64> = (0..self.v.len()).map(|j| self.rate(j, c) + alpha).collect();

        let u = [Complex64::new(1.0, 0.0), (-alpha).into(), a2.into(), (-alpha * a2).into()];
        let w = [Complex64::new(1.0, 0.0), -q, q * q, -q * q * q];
        let minor = |i: usize, j: usize| u[i] * w[j] - u[j] * w[i];
        // order: 12, 13, 14, 23, 24, 34
        let mut m: Minors = [minor(0, 1), minor(0, 2), minor(0, 3), minor(1, 2), minor(1, 3), minor(2, 3)];

        let rhs = |j: usize, m: &Minors| -> Minors {
            let d = self.v[j] - c;
            let a3 = d / eps + 2.0 * a2;
            let a1 = -(d * a2 + self.vpp[j]) / eps - a2 * a2;
            let s = sigma[j];
            [
                m[1] + s * m[0],
                m[3] + m[2] + s * m[1],
                m[4] + a3 * m[1] + s * m[2],
                m[4] + s * m[3],
                m[5] - a1 * m[0] + a3 * m[3] + s * m[4],
                -a1 * m[1] + s * m[5],
            ]
        };
        let add = |m: &Minors, k: &Minors, f: f64| -> Minors {
            let mut out = *m;
            for n in 0..6 {
                out[n] += k[n] * f;
            }
            out
        };
        let h = -step;
        for i in 0..self.config.steps {
            let j = 2 * i;
            let k1 = rhs(j, &m);
            let k2 = rhs(j + 1, &add(&m, &k1, 0.5 * h));
            let k3 = rhs(j + 1, &add(&m, &k2, 0.5 * h));
            let k4 = rhs(j + 2, &add(&m, &k3, h));
            for n in 0..6 {
                m[n] += (k1[n] + (k2[n] + k3[n]) * 2.0 + k4[n]) * (h / 6.0);
            }
        }
        if m.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Underresolved { step, required: 0.5 * step });
        }
        Ok(m[0])
    }

    /// `dD/dc` by a centred difference along `direction` (`1` or `i`).
    pub fn derivative(&self, c: Complex64, direction: Complex64) -> Result<Complex64> {
        let delta = 1e-6 * c.norm().max(1.0) * direction;
        Ok((self.determinant(c + delta)? - self.determinant(c - delta)?) / (delta * 2.0))
    }

    pub fn refine(&self, seed: Complex64) -> Result<Complex64> {
        let mut c = seed;
        let mut d = self.determinant(c)?;
        for it in 0..self.config.max_iters {
            let slope = self.derivative(c, Complex64::new(1.0, 0.0))?;
            let mut delta = d / slope;
            if delta.norm() > MAX_NEWTON_STEP {
                delta *= MAX_NEWTON_STEP / delta.norm();
            }
            if !(delta.re.is_finite() && delta.im.is_finite()) {
                return Err(Error::NewtonFailed {
                    iterations: it,
                    re: c.re,
                    im: c.im,
                    residual: d.norm(),
                });
            }
            c -= delta;
            d = self.determinant(c)?;
            if delta.norm() <= 1e-12 * c.norm().max(1.0) {
                return Ok(c);
            }
        }
        Err(Error::NewtonFailed {
            iterations: self.config.max_iters,
            re: c.re,
            im: c.im,
            residual: d.norm(),
        })
    }
}

/// Damping cap on a single Newton update of `c`.
const MAX_NEWTON_STEP: f64 = 0.02;

/// Orr-Sommerfeld eigenvalue near `c_seed` by compound-matrix shooting.
pub fn os_eigen_compound(os: &OsProblem, c_seed: Complex64, config: &ShootingConfig) -> Result<Complex64> {
    CompoundShooter::new(os, *config)?.refine(c_seed)
}

/// The Rayleigh eigenvalue of the pair `{c, c̄}` that survives as `ν̂ → 0`
/// when the viscous term carries `ε = iν̂/α`: the one in the lower half plane.
/// The other member's viscous counterpart is its conjugate, since `V` is real.
pub fn viscous_partner(c_ray: Complex64) -> Complex64 {
    if c_ray.im > 0.0 {
        c_ray.conj()
    } else {
        c_ray
    }
}

/// Default `ν̂` values for the scaling study.
pub const DEFAULT_NU_HATS: [f64; 3] = [1e-3, 2.5e-4, 6.25e-5];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionReport {
    pub alpha_ray: f64,
    /// `[Re, Im]`
    pub c_ray: [f64; 2],
    /// Member of the conjugate Rayleigh pair the viscous mode continues.
    /// With `ε = iν̂/α` this is the one with `Im c ≤ 0`.
    pub c_seed: [f64; 2],
    pub nu_hat: Vec<f64>,
    pub c_os: Vec<[f64; 2]>,
    /// Slope of `log |c_OS - c_Ray|` against `log ν̂`.
    pub fitted_exponent: f64,
    pub gamma: [f64; 2],
    pub sublayer_width: Vec<f64>,
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Orr-Sommerfeld eigenvalues along `nu_hats`, continued from the smallest
/// `ν̂` (seeded with `c_ray`), and the fitted convergence exponent.
pub fn expansion_study(
    base: &RayleighProblem,
    c_ray: Complex64,
    nu_hats: &[f64],
    config: &ShootingConfig,
) -> Result<ExpansionReport> {
    if nu_hats.len() < 2 {
        return Err(Error::invalid("nu_hat", "need at least two values to fit an exponent"));
    }
    let mut order: Vec<usize> = (0..nu_hats.len()).collect();
    order.sort_by(|&a, &b| nu_hats[a].total_cmp(&nu_hats[b]));
    let mut c_os = vec![Complex64::new(0.0, 0.0); nu_hats.len()];
    let c_seed = viscous_partner(c_ray);
    let mut seed = c_seed;
    for &i in &order {
        let os = OsProblem::new(base.clone(), nu_hats[i])?;
        let c = os_eigen_compound(&os, seed, config)?;
        c_os[i] = c;
        seed = c;
    }
    let lx: Vec<f64> = nu_hats.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = c_os.iter().map(|c| (c - c_seed).norm().ln()).collect();
    let (gamma, _) = sublayer_profile(c_seed, base.alpha_ray, 1.0)?;
    let widths = nu_hats
        .iter()
        .map(|&nu| sublayer_profile(c_seed, base.alpha_ray, nu).map(|(_, w)| w))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExpansionReport {
        alpha_ray: base.alpha_ray,
        c_ray: [c_ray.re, c_ray.im],
        c_seed: [c_seed.re, c_seed.im],
        nu_hat: nu_hats.to_vec(),
        c_os: c_os.iter().map(|c| [c.re, c.im]).collect(),
        fitted_exponent: fit_slope(&lx, &ly),
        gamma: [gamma.re, gamma.im],
        sublayer_width: widths,
    })
}

impl ExpansionReport {
    pub fn save_json(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }
}
