//! The boundary layer in the frame moving with the lower wall.
//!
//! `∂_t w = ∂_Y² w` on `Y > 0` with `w(0, ·) = 0` and `w(t, 0) = φ(t)`. The
//! solution is available two ways: a Crank-Nicolson march on a truncated grid
//! and the exact double-layer (Duhamel) representation
//! `w(t, Y) = ∫₀ᵗ φ(s) K(Y, t - s) ds`, `K(Y, τ) = Y (4πτ³)^{-1/2} e^{-Y²/4τ}`.
//! The second one is evaluated after the substitution `u = Y / (2√(t - s))`,
//! which turns it into the smooth integral
//! `(2/√π) ∫_{Y/2√t}^∞ φ(t - Y²/4u²) e^{-u²} du`.

use crate::error::{Error, Result};
use crate::linalg::Tridiagonal;
use crate::output::{fmt_f64, CsvHeader};
use crate::quadrature;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

/// Boundary data of the heat problem.
pub trait WallTrace: Sync {
    fn value(&self, t: f64) -> f64;
    fn derivative(&self, t: f64) -> f64;
}

/// `φ ≡ c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantTrace(pub f64);

impl WallTrace for ConstantTrace {
    fn value(&self, _t: f64) -> f64 {
        self.0
    }
    fn derivative(&self, _t: f64) -> f64 {
        0.0
    }
}

/// Uniform grid `Y_k = k·h`, `k = 0..=n`, on `[0, Y0]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfLineGrid {
    pub y0: f64,
    pub h: f64,
    pub n: usize,
}

impl HalfLineGrid {
    pub const MIN_HEIGHT: f64 = 20.0;

    pub fn new(y0: f64, h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::invalid("h", format!("must be positive, got {h}")));
        }
        if !(y0 >= Self::MIN_HEIGHT && y0.is_finite()) {
            return Err(Error::invalid("y0", format!("must be >= {}, got {y0}", Self::MIN_HEIGHT)));
        }
        let ratio = y0 / h;
        let n = ratio.round();
        if (ratio - n).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::invalid("h", format!("y0/h = {ratio} is not an integer")));
        }
        Ok(Self { y0, h, n: n as usize })
    }

    pub fn y(&self, k: usize) -> f64 {
        k as f64 * self.h
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n).map(|k| self.y(k)).collect()
    }
}

impl Default for HalfLineGrid {
    fn default() -> Self {
        Self::new(30.0, 0.01).expect("default grid is valid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HeatMethod {
    CrankNicolson,
    Duhamel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatSolution {
    pub grid: HalfLineGrid,
    pub t: f64,
    pub w: Vec<f64>,
    /// Time step of the Crank-Nicolson march.
    pub dt: Option<f64>,
    pub method: HeatMethod,
}

/// Default Crank-Nicolson time step.
pub const DEFAULT_DT: f64 = 1e-3;

/// Crank-Nicolson march from `0` to `t` with `w = φ` at `Y = 0` and `w = 0`
/// at `Y0`. The first step is split into two backward-Euler half steps to damp
/// the stiff modes excited by incompatible data.
pub fn solve_heat_cn(trace: &impl WallTrace, grid: HalfLineGrid, t: f64, dt: f64) -> Result<HeatSolution> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::invalid("t", format!("must be positive, got {t}")));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid("dt", format!("must be positive, got {dt}")));
    }
    let steps = (t / dt).round();
    if steps < 1.0 || (t - steps * dt).abs() > 1e-12 {
        return Err(Error::invalid("dt", format!("t = {t} is not an integer multiple of dt = {dt}")));
    }
    let steps = steps as usize;
    let m = grid.n - 1;
    if m < 2 {
        return Err(Error::invalid("grid", "need at least three interior nodes"));
    }
    let h2 = grid.h * grid.h;
    let mut w = vec![0.0; m];

    let implicit = |theta_dt: f64| {
        let r = theta_dt / h2;
        Tridiagonal::new(vec![-r; m - 1], vec![1.0 + 2.0 * r; m], vec![-r; m - 1])
    };

    // Two backward-Euler half steps.
    let be = implicit(0.5 * dt).factor("heat BE step")?;
    let r_be = 0.5 * dt / h2;
    for j in 1..=2 {
        let tn = 0.5 * dt * j as f64;
        w[0] += r_be * trace.value(tn);
        be.solve_in_place(&mut w);
    }

    let cn = implicit(0.5 * dt).factor("heat CN step")?;
    let r = 0.5 * dt / h2;
    let mut rhs = vec![0.0; m];
    for k in 1..steps {
        let t_old = k as f64 * dt;
        let t_new = if k + 1 == steps { t } else { (k + 1) as f64 * dt };
        for i in 0..m {
            let left = if i == 0 { trace.value(t_old) } else { w[i - 1] };
            let right = if i + 1 == m { 0.0 } else { w[i + 1] };
            rhs[i] = w[i] + r * (left - 2.0 * w[i] + right);
        }
        rhs[0] += r * trace.value(t_new);
        cn.solve_in_place(&mut rhs);
        std::mem::swap(&mut w, &mut rhs);
    }

    let mut full = Vec::with_capacity(grid.n + 1);
    full.push(trace.value(t));
    full.extend_from_slice(&w);
    full.push(0.0);
    Ok(HeatSolution {
        grid,
        t,
        w: full,
        dt: Some(dt),
        method: HeatMethod::CrankNicolson,
    })
}

/// Upper cut-off of the `u` integral; `e^{-64}` is below 1e-27.
const U_MAX: f64 = 8.0;

fn duhamel_integral(f: impl Fn(f64) -> f64, y: f64, t: f64) -> f64 {
    let u0 = y / (2.0 * t.sqrt());
    if u0 >= U_MAX {
        return 0.0;
    }
    let integrand = |u: f64| {
        let s = t - y * y / (4.0 * u * u);
        f(s.max(0.0)) * (-u * u).exp()
    };
    2.0 / PI.sqrt() * quadrature::adaptive(integrand, u0, U_MAX, 1e-12, 1e-15)
}

/// `w(t, Y)` from the double-layer representation; `w(t, 0) = φ(t)`.
pub fn eval_duhamel(trace: &impl WallTrace, y: f64, t: f64) -> f64 {
    assert!(y >= 0.0 && t > 0.0, "eval_duhamel needs Y >= 0 and t > 0");
    if y == 0.0 {
        return trace.value(t);
    }
    duhamel_integral(|s| trace.value(s), y, t)
}

/// Half-line Dirichlet heat kernel `K(Y, τ)`.
pub fn heat_kernel(y: f64, tau: f64) -> f64 {
    if tau <= 0.0 {
        return 0.0;
    }
    y / (4.0 * PI * tau * tau * tau).sqrt() * (-y * y / (4.0 * tau)).exp()
}

/// `∂_Y² w(t, Y)`.
///
/// Two derivatives of the kernel in `Y` equal one in `τ`, and moving that
/// derivative onto the data gives `φ(0) K(Y, t) + ∫₀ᵗ φ'(s) K(Y, t - s) ds`,
/// evaluated with the same substitution as [`eval_duhamel`].
pub fn eval_duhamel_yy(trace: &impl WallTrace, y: f64, t: f64) -> f64 {
    assert!(y >= 0.0 && t > 0.0, "eval_duhamel_yy needs Y >= 0 and t > 0");
    if y == 0.0 {
        return trace.derivative(t);
    }
    trace.value(0.0) * heat_kernel(y, t) + duhamel_integral(|s| trace.derivative(s), y, t)
}

/// Duhamel solution sampled on a grid.
pub fn solve_heat_duhamel(trace: &impl WallTrace, grid: HalfLineGrid, t: f64) -> Result<HeatSolution> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::invalid("t", format!("must be positive, got {t}")));
    }
    let w = (0..=grid.n)
        .into_par_iter()
        .map(|k| eval_duhamel(trace, grid.y(k), t))
        .collect();
    Ok(HeatSolution {
        grid,
        t,
        w,
        dt: None,
        method: HeatMethod::Duhamel,
    })
}

/// Sign convention for the boundary-layer velocity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    /// `V = -φ(t) + w`, so `V(0) = 0` (no slip).
    #[default]
    WallAnchored,
    /// `V = φ(t) + w`.
    ClaimLiteral,
}

impl Convention {
    pub fn name(self) -> &'static str {
        match self {
            Convention::WallAnchored => "wall-anchored",
            Convention::ClaimLiteral => "claim-literal",
        }
    }

    /// Constant added to `w`.
    pub fn offset(self, phi: f64) -> f64 {
        match self {
            Convention::WallAnchored => -phi,
            Convention::ClaimLiteral => phi,
        }
    }
}

impl std::str::FromStr for Convention {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wall-anchored" => Ok(Convention::WallAnchored),
            "claim-literal" => Ok(Convention::ClaimLiteral),
            other => Err(Error::invalid("convention", format!("unknown convention `{other}`"))),
        }
    }
}

/// Boundary-layer velocity `V_s(t, ·)` and its second derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub grid: HalfLineGrid,
    pub t: f64,
    pub v: Vec<f64>,
    pub vpp: Vec<f64>,
    pub convention: Convention,
    pub far_field: f64,
}

/// Samples `V_s(t, ·)` on `grid`; `V''` comes from the analytic kernel route.
pub fn build_profile(trace: &impl WallTrace, t: f64, grid: HalfLineGrid, convention: Convention) -> Result<Profile> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::invalid("t", format!("must be positive, got {t}")));
    }
    let offset = convention.offset(trace.value(t));
    let (v, vpp): (Vec<f64>, Vec<f64>) = (0..=grid.n)
        .into_par_iter()
        .map(|k| {
            let y = grid.y(k);
            let w = if k == 0 { 0.0 } else { eval_duhamel(trace, y, t) };
            let v = if k == 0 {
                match convention {
                    Convention::WallAnchored => 0.0,
                    Convention::ClaimLiteral => 2.0 * trace.value(t),
                }
            } else {
                offset + w
            };
            (v, eval_duhamel_yy(trace, y, t))
        })
        .unzip();
    let far_field = v[grid.n];
    Ok(Profile {
        grid,
        t,
        v,
        vpp,
        convention,
        far_field,
    })
}

impl Profile {
    /// Profile with `V` replaced by `V + s` (`V''` unchanged).
    pub fn shifted(&self, s: f64) -> Profile {
        Profile {
            v: self.v.iter().map(|v| v + s).collect(),
            far_field: self.far_field + s,
            ..self.clone()
        }
    }

    /// Profile with `V → -V`.
    pub fn negated(&self) -> Profile {
        Profile {
            v: self.v.iter().map(|v| -v).collect(),
            vpp: self.vpp.iter().map(|v| -v).collect(),
            far_field: -self.far_field,
            ..self.clone()
        }
    }

    /// Centred second differences of `V` on nodes `1..n` (length `n - 1`).
    pub fn vpp_finite_difference(&self) -> Vec<f64> {
        let h2 = self.grid.h * self.grid.h;
        self.v.windows(3).map(|w| (w[0] - 2.0 * w[1] + w[2]) / h2).collect()
    }

    pub fn range(&self) -> (f64, f64) {
        self.v
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    /// Whether `V''` changes sign at some `Y > 0`; values within `tol` of zero are ignored.
    pub fn has_inflection(&self, tol: f64) -> bool {
        let mut sign = 0.0;
        for &v in &self.vpp[1..] {
            if v.abs() <= tol {
                continue;
            }
            if sign != 0.0 && v.signum() != sign {
                return true;
            }
            sign = v.signum();
        }
        false
    }

    /// CSV with columns `Y,V,Vpp`.
    pub fn write_csv(&self, mut out: impl Write, header: &CsvHeader) -> std::io::Result<()> {
        header.write(&mut out)?;
        writeln!(out, "Y,V,Vpp")?;
        for k in 0..=self.grid.n {
            writeln!(out, "{},{},{}", fmt_f64(self.grid.y(k)), fmt_f64(self.v[k]), fmt_f64(self.vpp[k]))?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path, header: &CsvHeader) -> Result<()> {
        let f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_csv(f, header)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interior::DiracTrace;

    fn erfc(x: f64) -> f64 {
        libm::erfc(x)
    }

    #[test]
    fn grid_validation() {
        assert!(HalfLineGrid::new(30.0, 0.01).is_ok());
        assert_eq!(HalfLineGrid::new(30.0, 0.02).unwrap().n, 1500);
        assert!(HalfLineGrid::new(30.0, 0.007).is_err());
        assert!(HalfLineGrid::new(10.0, 0.01).is_err());
        assert!(HalfLineGrid::new(30.0, 0.0).is_err());
    }

    #[test]
    fn duhamel_constant_data_is_erfc() {
        let one = ConstantTrace(1.0);
        for t in [0.5, 1.0, 7.65] {
            for y in [0.0, 0.01, 0.3, 1.0, 3.0, 10.0] {
                let got = eval_duhamel(&one, y, t);
                let want = erfc(y / (2.0 * t.sqrt()));
                assert!((got - want).abs() < 1e-8, "t={t} y={y}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn duhamel_far_field_decays() {
        let tr = DiracTrace::new(1.0).unwrap();
        assert!(eval_duhamel(&tr, 30.0, 7.65).abs() <= 1e-8);
    }

    #[test]
    fn duhamel_yy_matches_finite_differences() {
        let tr = DiracTrace::new(1.0).unwrap();
        let (t, d) = (7.65, 1e-3);
        for y in [0.2, 1.0, 2.5, 6.0] {
            let fd = (eval_duhamel(&tr, y + d, t) - 2.0 * eval_duhamel(&tr, y, t) + eval_duhamel(&tr, y - d, t)) / (d * d);
            assert!((fd - eval_duhamel_yy(&tr, y, t)).abs() < 1e-5, "y={y}");
        }
        // constant data exercises the φ(0)K term
        let one = ConstantTrace(1.0);
        let y = 0.7;
        let fd = (eval_duhamel(&one, y + d, 1.0) - 2.0 * eval_duhamel(&one, y, 1.0) + eval_duhamel(&one, y - d, 1.0)) / (d * d);
        assert!((fd - eval_duhamel_yy(&one, y, 1.0)).abs() < 1e-5);
    }

    #[test]
    fn cn_zero_data_stays_zero() {
        let grid = HalfLineGrid::new(20.0, 0.05).unwrap();
        let sol = solve_heat_cn(&ConstantTrace(0.0), grid, 1.0, 0.01).unwrap();
        assert!(sol.w.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn cn_rejects_non_integer_step_count() {
        let grid = HalfLineGrid::new(20.0, 0.05).unwrap();
        assert!(solve_heat_cn(&ConstantTrace(1.0), grid, 1.0, 0.3).is_err());
        assert!(solve_heat_cn(&ConstantTrace(1.0), grid, 1.0, -0.1).is_err());
        assert!(solve_heat_cn(&ConstantTrace(1.0), grid, 0.0, 0.1).is_err());
    }

    #[test]
    fn cn_constant_data_is_erfc() {
        let grid = HalfLineGrid::default();
        let sol = solve_heat_cn(&ConstantTrace(1.0), grid, 1.0, DEFAULT_DT).unwrap();
        let err = (0..=grid.n)
            .map(|k| (sol.w[k] - erfc(grid.y(k) / 2.0)).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-4, "max error {err}");
    }

    #[test]
    fn cn_is_second_order_in_time() {
        // Same mesh throughout, so the fine-step run isolates the time error.
        let tr = DiracTrace::new(1.0).unwrap();
        let grid = HalfLineGrid::new(20.0, 0.05).unwrap();
        let fine = solve_heat_cn(&tr, grid, 2.0, 0.0025).unwrap().w;
        let gap = |dt: f64| {
            let s = solve_heat_cn(&tr, grid, 2.0, dt).unwrap();
            s.w.iter().zip(&fine).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        };
        let (e1, e2) = (gap(0.1), gap(0.05));
        assert!(e1 / e2 > 3.0, "{e1} {e2}");
    }

    #[test]
    fn wall_anchored_profile_basics() {
        let tr = DiracTrace::new(1.0).unwrap();
        let grid = HalfLineGrid::new(30.0, 0.05).unwrap();
        let p = build_profile(&tr, 7.65, grid, Convention::WallAnchored).unwrap();
        assert_eq!(p.v[0], 0.0);
        assert!((p.far_field + tr.value(7.65)).abs() < 1e-8);
        assert_eq!(p.vpp[0], tr.derivative(7.65));
        assert!(p.has_inflection(1e-8));
        let claim = build_profile(&tr, 7.65, grid, Convention::ClaimLiteral).unwrap();
        let shift = 2.0 * tr.value(7.65);
        for (a, b) in claim.v.iter().zip(&p.v) {
            assert!((a - b - shift).abs() < 1e-14);
        }
    }

    #[test]
    fn early_profile_is_convex() {
        let tr = DiracTrace::new(1.0).unwrap();
        let grid = HalfLineGrid::new(30.0, 0.05).unwrap();
        let p = build_profile(&tr, 0.1, grid, Convention::WallAnchored).unwrap();
        assert!(!p.has_inflection(1e-10));
    }

    #[test]
    fn convention_parsing() {
        assert_eq!("claim-literal".parse::<Convention>().unwrap(), Convention::ClaimLiteral);
        assert!("sideways".parse::<Convention>().is_err());
    }
}
