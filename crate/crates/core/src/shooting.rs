//! Shooting verification of Rayleigh eigenvalues.
//!
//! `ψ'' = (α² + V''/(V - c)) ψ` is integrated from `Y0` down to the wall with
//! classical RK4, starting on the decaying far-field solution
//! `ψ = e^{-αY0}`, `ψ' = -α e^{-αY0}`. An eigenvalue is a zero of `ψ(0; c)`,
//! found by Newton's method with the exact derivative `∂_c ψ(0; c)` from the
//! co-integrated variational equation.

use crate::error::{Error, Result};
use crate::heat::Profile;
use crate::linalg::CubicSpline;
use crate::output::{fmt_f64, CsvHeader};
use crate::heat::{build_profile, WallTrace};
use crate::spectral::{RayleighProblem, SweepResult, SweepTemplate, TraceRef};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootingConfig {
    pub y0: f64,
    pub steps: usize,
    pub newton_tol: f64,
    pub max_iters: usize,
    /// Minimum admissible `|V - c|` along the path.
    pub pole_guard: f64,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        Self {
            y0: 30.0,
            steps: 30_000,
            newton_tol: 1e-10,
            max_iters: 50,
            pole_guard: 1e-8,
        }
    }
}

impl ShootingConfig {
    pub fn step(&self) -> f64 {
        self.y0 / self.steps as f64
    }

    /// Same step, different starting height.
    pub fn with_height(&self, y0: f64) -> Self {
        let steps = (y0 / self.step()).round() as usize;
        Self { y0, steps, ..*self }
    }

    fn validate(&self) -> Result<()> {
        if !(self.y0 > 0.0 && self.y0.is_finite()) {
            return Err(Error::invalid("y0", format!("must be positive, got {}", self.y0)));
        }
        if self.steps == 0 {
            return Err(Error::invalid("steps", "must be positive"));
        }
        Ok(())
    }
}

/// Cubic-spline interpolants of `V` and `V''`, held constant beyond the grid.
#[derive(Debug, Clone)]
pub struct ProfileInterp {
    v: CubicSpline,
    vpp: CubicSpline,
}

impl ProfileInterp {
    pub fn new(profile: &Profile) -> Result<Self> {
        Ok(Self {
            v: CubicSpline::uniform(0.0, profile.grid.h, &profile.v)?,
            vpp: CubicSpline::uniform(0.0, profile.grid.h, &profile.vpp)?,
        })
    }

    pub fn v(&self, y: f64) -> f64 {
        self.v.eval(y)
    }

    pub fn vpp(&self, y: f64) -> f64 {
        self.vpp.eval(y)
    }
}

/// `V`, `V''` at every RK node and half node, from `Y0` down to `0`.
struct PathSamples {
    step: f64,
    steps: usize,
    v: Vec<f64>,
    vpp: Vec<f64>,
}

impl PathSamples {
    fn new(interp: &ProfileInterp, config: &ShootingConfig) -> Self {
        let step = config.step();
        let m = 2 * config.steps + 1;
        let y = |j: usize| (config.y0 - 0.5 * step * j as f64).max(0.0);
        Self {
            step,
            steps: config.steps,
            v: (0..m).map(|j| interp.v(y(j))).collect(),
            vpp: (0..m).map(|j| interp.vpp(y(j))).collect(),
        }
    }

    fn y(&self, j: usize) -> f64 {
        (0.5 * self.step * (2 * self.steps - j) as f64).max(0.0)
    }

    /// Node where a real `c` meets the sampled range of `V`, if it does.
    fn critical_node(&self, c: Complex64, guard: f64) -> Option<usize> {
        if c.im.abs() >= guard {
            return None;
        }
        let (lo, hi) = self.v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        if c.re < lo - guard || c.re > hi + guard {
            return None;
        }
        (0..self.v.len()).min_by(|&a, &b| (self.v[a] - c.re).abs().total_cmp(&(self.v[b] - c.re).abs()))
    }
}

type State = [Complex64; 4];

#[derive(Debug, Clone, PartialEq)]
pub struct Shot {
    pub psi0: Complex64,
    pub dpsi0_dc: Complex64,
    pub dpsi0: Complex64,
}

struct Trajectory {
    /// `(Y, ψ, ψ')` every `stride` steps, ascending in `Y`.
    samples: Vec<(f64, Complex64, Complex64)>,
}

fn shoot(
    c: Complex64,
    alpha: f64,
    path: &PathSamples,
    guard: f64,
    initial: (Complex64, Complex64),
    stride: Option<usize>,
) -> Result<(Shot, Option<Trajectory>)> {
    if let Some(j) = path.critical_node(c, guard) {
        return Err(Error::PoleProximity {
            y: path.y(j),
            re: c.re,
            im: c.im,
            guard,
        });
    }
    let a2 = alpha * alpha;
    let rhs = |j: usize, s: &State| -> Result<State> {
        let diff = path.v[j] - c;
        if diff.norm() < guard {
            return Err(Error::PoleProximity {
                y: path.y(j),
                re: c.re,
                im: c.im,
                guard,
            });
        }
        let q = path.vpp[j] / diff;
        let k = q + a2;
        Ok([s[1], k * s[0], s[3], k * s[2] + q / diff * s[0]])
    };
    let h = -path.step;
    let mut s: State = [initial.0, initial.1, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)];
    let mut samples = stride.map(|_| Vec::with_capacity(path.steps + 1));
    let record = |samples: &mut Option<Vec<_>>, i: usize, s: &State| {
        if let (Some(out), Some(stride)) = (samples.as_mut(), stride) {
            if (path.steps - i).is_multiple_of(stride) {
                out.push((path.y(2 * i), s[0], s[1]));
            }
        }
    };
    record(&mut samples, 0, &s);
    let add = |s: &State, k: &State, f: f64| -> State {
        [s[0] + k[0] * f, s[1] + k[1] * f, s[2] + k[2] * f, s[3] + k[3] * f]
    };
    for i in 0..path.steps {
        let j = 2 * i;
        let k1 = rhs(j, &s)?;
        let k2 = rhs(j + 1, &add(&s, &k1, 0.5 * h))?;
        let k3 = rhs(j + 1, &add(&s, &k2, 0.5 * h))?;
        let k4 = rhs(j + 2, &add(&s, &k3, h))?;
        for n in 0..4 {
            s[n] += (k1[n] + (k2[n] + k3[n]) * 2.0 + k4[n]) * (h / 6.0);
        }
        record(&mut samples, i + 1, &s);
    }
    let traj = samples.map(|mut v| {
        v.reverse();
        Trajectory { samples: v }
    });
    Ok((
        Shot {
            psi0: s[0],
            dpsi0: s[1],
            dpsi0_dc: s[2],
        },
        traj,
    ))
}

fn far_field_data(alpha: f64, y0: f64) -> (Complex64, Complex64) {
    let e = (-alpha * y0).exp();
    (Complex64::new(e, 0.0), Complex64::new(-alpha * e, 0.0))
}

/// Reusable shooting context for one problem and configuration.
pub struct Shooter<'a> {
    problem: &'a RayleighProblem,
    config: ShootingConfig,
    path: PathSamples,
}

impl<'a> Shooter<'a> {
    pub fn new(problem: &'a RayleighProblem, config: ShootingConfig) -> Result<Self> {
        config.validate()?;
        let interp = ProfileInterp::new(&problem.profile)?;
        Ok(Self {
            problem,
            path: PathSamples::new(&interp, &config),
            config,
        })
    }

    /// `ψ(0; c)`, `∂_c ψ(0; c)` and `ψ'(0; c)` for far-field data scaled by `scale`.
    pub fn shot_scaled(&self, c: Complex64, scale: Complex64) -> Result<Shot> {
        let (p, dp) = far_field_data(self.problem.alpha_ray, self.config.y0);
        Ok(shoot(c, self.problem.alpha_ray, &self.path, self.config.pole_guard, (p * scale, dp * scale), None)?.0)
    }

    pub fn shot(&self, c: Complex64) -> Result<Shot> {
        self.shot_scaled(c, Complex64::new(1.0, 0.0))
    }

    pub fn refine(&self, seed: Complex64) -> Result<EigenPair> {
        let mut c = seed;
        let mut last = f64::INFINITY;
        for it in 0..=self.config.max_iters {
            let shot = self.shot(c)?;
            last = shot.psi0.norm();
            if last < self.config.newton_tol {
                return self.eigenpair(c, it, last);
            }
            if it == self.config.max_iters {
                break;
            }
            let delta = shot.psi0 / shot.dpsi0_dc;
            if !(delta.re.is_finite() && delta.im.is_finite()) {
                break;
            }
            c -= delta;
        }
        Err(Error::NewtonFailed {
            iterations: self.config.max_iters,
            re: c.re,
            im: c.im,
            residual: last,
        })
    }

    fn eigenpair(&self, c: Complex64, iterations: usize, residual: f64) -> Result<EigenPair> {
        let alpha = self.problem.alpha_ray;
        let grid_h = self.problem.profile.grid.h;
        let ratio = grid_h / self.path.step;
        let stride = if (ratio - ratio.round()).abs() < 1e-9 && ratio >= 1.0 {
            ratio.round() as usize
        } else {
            1
        };
        let stride = if self.path.steps.is_multiple_of(stride) { stride } else { 1 };
        let (p, dp) = far_field_data(alpha, self.config.y0);
        let (shot, traj) = shoot(c, alpha, &self.path, self.config.pole_guard, (p, dp), Some(stride))?;
        let samples = traj.expect("trajectory requested").samples;

        let peak = samples
            .iter()
            .map(|s| s.1)
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .expect("non-empty trajectory");
        let y: Vec<f64> = samples.iter().map(|s| s.0).collect();
        let psi: Vec<Complex64> = samples.iter().map(|s| s.1 / peak).collect();
        let dpsi: Vec<Complex64> = samples.iter().map(|s| s.2 / peak).collect();
        let hs = self.path.step * stride as f64;
        let omega = centred_vorticity(&psi, hs, alpha, {
            let interp = ProfileInterp::new(&self.problem.profile)?;
            move |psi0: Complex64| interp.vpp(0.0) * psi0 / (interp.v(0.0) - c)
        });
        Ok(EigenPair {
            c,
            alpha_ray: alpha,
            y,
            psi,
            omega,
            dpsi0: shot.dpsi0 / peak,
            dpsi,
            psi0_residual: residual,
            iterations,
        })
    }
}

/// `ω = (∂² - α²)ψ` by centred differences; the wall value comes from the
/// equation itself and the top uses the Neumann closure `ψ_{N+1} = ψ_N`.
fn centred_vorticity(
    psi: &[Complex64],
    h: f64,
    alpha: f64,
    wall: impl Fn(Complex64) -> Complex64,
) -> Vec<Complex64> {
    let n = psi.len();
    let ih2 = 1.0 / (h * h);
    let a2 = alpha * alpha;
    (0..n)
        .map(|k| {
            if k == 0 {
                wall(psi[0])
            } else {
                let up = if k + 1 < n { psi[k + 1] } else { psi[k] };
                (up - psi[k] * 2.0 + psi[k - 1]) * ih2 - psi[k] * a2
            }
        })
        .collect()
}

/// Converged Rayleigh eigenvalue with its eigenfunction.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub c: Complex64,
    pub alpha_ray: f64,
    /// Sample heights, ascending from the wall.
    pub y: Vec<f64>,
    /// Eigenfunction, normalised so that `max |ψ| = 1` (attained as `ψ = 1`).
    pub psi: Vec<Complex64>,
    pub omega: Vec<Complex64>,
    pub dpsi: Vec<Complex64>,
    pub dpsi0: Complex64,
    /// `|ψ(0; c)|` of the raw shot at convergence.
    pub psi0_residual: f64,
    pub iterations: usize,
}

impl EigenPair {
    pub fn spacing(&self) -> f64 {
        self.y[1] - self.y[0]
    }

    /// Residual of `(V - c)(ψ'' - α²ψ) - V''ψ` by centred differences, on
    /// interior samples.
    pub fn rayleigh_residual(&self, profile: &Profile) -> Result<Vec<Complex64>> {
        let interp = ProfileInterp::new(profile)?;
        let h = self.spacing();
        let a2 = self.alpha_ray * self.alpha_ray;
        Ok((1..self.psi.len() - 1)
            .map(|k| {
                let y = self.y[k];
                let d2 = (self.psi[k + 1] - self.psi[k] * 2.0 + self.psi[k - 1]) / (h * h);
                (interp.v(y) - self.c) * (d2 - self.psi[k] * a2) - self.psi[k] * interp.vpp(y)
            })
            .collect())
    }

    /// CSV with columns `Y,Re psi,Im psi,Re omega,Im omega`.
    pub fn write_csv(&self, mut out: impl Write, header: &CsvHeader) -> std::io::Result<()> {
        header.write(&mut out)?;
        writeln!(out, "Y,Re psi,Im psi,Re omega,Im omega")?;
        for k in 0..self.y.len() {
            writeln!(
                out,
                "{},{},{},{},{}",
                fmt_f64(self.y[k]),
                fmt_f64(self.psi[k].re),
                fmt_f64(self.psi[k].im),
                fmt_f64(self.omega[k].re),
                fmt_f64(self.omega[k].im)
            )?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path, header: &CsvHeader) -> Result<()> {
        self.write_csv(std::io::BufWriter::new(std::fs::File::create(path)?), header)?;
        Ok(())
    }
}

/// `ψ(0; c)` and its exact `c`-derivative.
pub fn integrate_shot(c: Complex64, problem: &RayleighProblem, config: &ShootingConfig) -> Result<(Complex64, Complex64)> {
    let shot = Shooter::new(problem, *config)?.shot(c)?;
    Ok((shot.psi0, shot.dpsi0_dc))
}

/// Newton iteration on `ψ(0; c) = 0` from `seed`.
pub fn newton_refine(seed: Complex64, problem: &RayleighProblem, config: &ShootingConfig) -> Result<EigenPair> {
    Shooter::new(problem, *config)?.refine(seed)
}

/// `ψ(0; c)` recomputed from several starting heights with the same step.
pub fn validate_farfield(
    c: Complex64,
    problem: &RayleighProblem,
    heights: &[f64],
    config: &ShootingConfig,
) -> Result<Vec<(f64, Complex64)>> {
    heights
        .iter()
        .map(|&y0| {
            let cfg = config.with_height(y0);
            Ok((y0, Shooter::new(problem, cfg)?.shot(c)?.psi0))
        })
        .collect()
}

/// Where a refined sweep point took its Newton seed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedSource {
    /// The converged value at the previous time.
    Continuation,
    /// The matrix eigenvalue at this time.
    Matrix,
}

impl SeedSource {
    pub fn name(self) -> &'static str {
        match self {
            SeedSource::Continuation => "continuation",
            SeedSource::Matrix => "matrix",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefinedPoint {
    pub t: f64,
    pub c_matrix: Complex64,
    pub c: Option<Complex64>,
    pub seed: SeedSource,
    pub error: Option<String>,
}

/// Shooting refinement of every unstable point of a matrix sweep, in time
/// order. Each point is seeded from the previous converged value when there
/// is one, and from its own matrix eigenvalue if that fails or there is none.
pub fn refine_sweep(
    trace: &(impl WallTrace + ?Sized),
    sweep: &SweepResult,
    template: &SweepTemplate,
    config: &ShootingConfig,
) -> Vec<RefinedPoint> {
    let mut previous: Option<Complex64> = None;
    let mut out = Vec::new();
    for p in &sweep.points {
        let Some(c_matrix) = p.c else {
            previous = None;
            continue;
        };
        let problem = build_profile(&TraceRef(trace), p.t, template.grid, template.convention)
            .and_then(|profile| RayleighProblem::new(template.alpha_ray, profile));
        let problem = match problem {
            Ok(problem) => problem,
            Err(e) => {
                out.push(RefinedPoint { t: p.t, c_matrix, c: None, seed: SeedSource::Matrix, error: Some(e.to_string()) });
                previous = None;
                continue;
            }
        };
        let attempt = |seed: Complex64| newton_refine(seed, &problem, config).map(|pair| pair.c);
        let (seed, result) = match previous.map(&attempt) {
            Some(Ok(c)) if c.im > 0.0 => (SeedSource::Continuation, Ok(c)),
            _ => (SeedSource::Matrix, attempt(c_matrix)),
        };
        previous = result.as_ref().ok().copied();
        out.push(RefinedPoint {
            t: p.t,
            c_matrix,
            c: result.as_ref().ok().copied(),
            seed,
            error: result.err().map(|e| e.to_string()),
        });
    }
    out
}

/// CSV with columns `t,Re c_matrix,Im c_matrix,Re c_shoot,Im c_shoot,seed`;
/// failed refinements leave the shooting columns empty.
pub fn write_refined_csv(points: &[RefinedPoint], mut out: impl Write, header: &CsvHeader) -> std::io::Result<()> {
    header.write(&mut out)?;
    writeln!(out, "t,Re c_matrix,Im c_matrix,Re c_shoot,Im c_shoot,seed")?;
    for p in points {
        let (re, im) = p.c.map_or((String::new(), String::new()), |c| (fmt_f64(c.re), fmt_f64(c.im)));
        writeln!(
            out,
            "{},{},{},{re},{im},{}",
            fmt_f64(p.t),
            fmt_f64(p.c_matrix.re),
            fmt_f64(p.c_matrix.im),
            p.seed.name()
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heat::{Convention, HalfLineGrid};

    fn linear_profile() -> RayleighProblem {
        // V'' ≡ 0
        let grid = HalfLineGrid::new(30.0, 0.1).unwrap();
        let v: Vec<f64> = (0..=grid.n).map(|k| 0.01 * grid.y(k)).collect();
        let profile = Profile {
            grid,
            t: 1.0,
            far_field: v[grid.n],
            v,
            vpp: vec![0.0; grid.n + 1],
            convention: Convention::WallAnchored,
        };
        RayleighProblem::new(0.5, profile).unwrap()
    }

    #[test]
    fn zero_curvature_gives_pure_exponential() {
        let p = linear_profile();
        let cfg = ShootingConfig::default();
        let (psi0, dc) = integrate_shot(Complex64::new(0.1, 0.2), &p, &cfg).unwrap();
        assert!((psi0 - 1.0).norm() < 1e-10, "{psi0}");
        assert_eq!(dc, Complex64::new(0.0, 0.0));
        for (_, v) in validate_farfield(Complex64::new(0.1, 0.2), &p, &[20.0, 25.0, 30.0], &cfg).unwrap() {
            assert!((v - 1.0).norm() < 1e-10);
        }
    }

    #[test]
    fn shot_is_linear_in_initial_data() {
        let p = linear_profile();
        let sh = Shooter::new(&p, ShootingConfig { steps: 3000, ..Default::default() }).unwrap();
        let c = Complex64::new(0.05, 0.1);
        let base = sh.shot(c).unwrap();
        let lam = Complex64::new(2.5, -1.0);
        let scaled = sh.shot_scaled(c, lam).unwrap();
        assert!((scaled.psi0 - base.psi0 * lam).norm() < 1e-12);
    }

    #[test]
    fn pole_proximity_is_reported() {
        let p = linear_profile();
        let cfg = ShootingConfig { steps: 300, ..Default::default() };
        let err = integrate_shot(Complex64::new(0.1, 0.0), &p, &cfg).unwrap_err();
        assert!(matches!(err, Error::PoleProximity { .. }), "{err}");
    }

    #[test]
    fn config_height_keeps_step() {
        let c = ShootingConfig::default().with_height(35.0);
        assert_eq!(c.steps, 35_000);
        assert!((c.step() - 1e-3).abs() < 1e-15);
    }
}
