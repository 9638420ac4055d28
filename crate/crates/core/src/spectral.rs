//! Rayleigh operator in vorticity form, `Ray ω = V ω - V'' A ω`, where
//! `A = (∂_Y² - α²)^{-1}` with `Aω(0) = 0` and a Neumann closure at the top
//! of the truncated half-line. Unknowns are `ω_k`, `k = 1..=N`, at `Y_k = k·h`.

use crate::error::{Error, Result};
use crate::heat::{build_profile, Convention, HalfLineGrid, Profile, WallTrace};
use crate::linalg::{self, Tridiagonal};
use crate::output::{fmt_f64, CsvHeader};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use std::io::Write;
use std::path::Path;

/// Eigenvalues with `|Im c|` above this are treated as genuine modes.
pub const DEFAULT_UNSTABLE_THRESHOLD: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct RayleighProblem {
    pub alpha_ray: f64,
    pub profile: Profile,
}

impl RayleighProblem {
    pub fn new(alpha_ray: f64, profile: Profile) -> Result<Self> {
        if !(alpha_ray > 0.0 && alpha_ray.is_finite()) {
            return Err(Error::invalid("alpha_ray", format!("must be positive, got {alpha_ray}")));
        }
        Ok(Self { alpha_ray, profile })
    }
}

/// Centred `∂_Y² - α²` on nodes `1..=N`: Dirichlet at node 0, `ω_{N+1} = ω_N`.
pub fn helmholtz_operator(grid: &HalfLineGrid, alpha: f64) -> Tridiagonal {
    let n = grid.n;
    let ih2 = 1.0 / (grid.h * grid.h);
    let mut diag = vec![-2.0 * ih2 - alpha * alpha; n];
    diag[n - 1] += ih2;
    Tridiagonal::new(vec![ih2; n - 1], diag, vec![ih2; n - 1])
}

/// Solves `(∂_Y² - α²) ψ = ω` with the centred scheme; `omega` and the
/// result hold nodes `1..=N`.
pub fn inverse_helmholtz(omega: &[f64], grid: &HalfLineGrid, alpha_ray: f64) -> Result<Vec<f64>> {
    if omega.len() != grid.n {
        return Err(Error::invalid("omega", format!("expected {} samples, got {}", grid.n, omega.len())));
    }
    let mut psi = omega.to_vec();
    helmholtz_operator(grid, alpha_ray).solve(&mut psi, "inverse Helmholtz")?;
    Ok(psi)
}

/// Dense `M = diag(V) - diag(V'') A` on nodes `1..=N`.
pub fn assemble_rayleigh_matrix(problem: &RayleighProblem) -> Result<DMatrix<f64>> {
    let p = &problem.profile;
    let n = p.grid.n;
    let lu = helmholtz_operator(&p.grid, problem.alpha_ray).factor("inverse Helmholtz")?;
    let columns: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            lu.solve_in_place(&mut e);
            e
        })
        .collect();
    let mut m = DMatrix::zeros(n, n);
    for (j, col) in columns.iter().enumerate() {
        for i in 0..n {
            m[(i, j)] = -p.vpp[i + 1] * col[i];
        }
        m[(j, j)] += p.v[j + 1];
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectralClass {
    /// `|Im c|` above the threshold: candidate discrete eigenvalue.
    Discrete,
    /// Part of the real-axis cluster approximating the range of `V`.
    Continuous,
}

impl SpectralClass {
    pub fn name(self) -> &'static str {
        match self {
            SpectralClass::Discrete => "discrete",
            SpectralClass::Continuous => "continuous",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Sorted by real part, then imaginary part.
    pub eigenvalues: Vec<Complex64>,
    pub classes: Vec<SpectralClass>,
    pub threshold: f64,
}

impl Spectrum {
    pub fn from_eigenvalues(mut eigenvalues: Vec<Complex64>, threshold: f64) -> Self {
        eigenvalues.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        let classes = eigenvalues
            .iter()
            .map(|c| {
                if c.im.abs() > threshold {
                    SpectralClass::Discrete
                } else {
                    SpectralClass::Continuous
                }
            })
            .collect();
        Self {
            eigenvalues,
            classes,
            threshold,
        }
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn discrete(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.eigenvalues
            .iter()
            .zip(&self.classes)
            .filter(|(_, k)| **k == SpectralClass::Discrete)
            .map(|(c, _)| *c)
    }

    pub fn continuous(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.eigenvalues
            .iter()
            .zip(&self.classes)
            .filter(|(_, k)| **k == SpectralClass::Continuous)
            .map(|(c, _)| *c)
    }

    /// Largest distance from an eigenvalue with `|Im c| > tol` to the nearest
    /// conjugate of another eigenvalue.
    pub fn conjugate_defect(&self, tol: f64) -> f64 {
        self.eigenvalues
            .iter()
            .filter(|c| c.im.abs() > tol)
            .map(|c| {
                self.eigenvalues
                    .iter()
                    .map(|d| (d - c.conj()).norm())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    }

    /// CSV with columns `Re(c),Im(c),class`.
    pub fn write_csv(&self, mut out: impl Write, header: &CsvHeader) -> std::io::Result<()> {
        header.write(&mut out)?;
        writeln!(out, "Re(c),Im(c),class")?;
        for (c, k) in self.eigenvalues.iter().zip(&self.classes) {
            writeln!(out, "{},{},{}", fmt_f64(c.re), fmt_f64(c.im), k.name())?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path, header: &CsvHeader) -> Result<()> {
        self.write_csv(std::io::BufWriter::new(std::fs::File::create(path)?), header)?;
        Ok(())
    }
}

/// All eigenvalues of `matrix` by Hessenberg reduction and shifted QR.
pub fn compute_spectrum(matrix: &DMatrix<f64>, threshold: f64) -> Result<Spectrum> {
    Ok(Spectrum::from_eigenvalues(linalg::eigenvalues(matrix)?, threshold))
}

/// Eigenvalue with the largest imaginary part, if that part exceeds the
/// spectrum's threshold.
pub fn most_unstable(spectrum: &Spectrum) -> Option<Complex64> {
    spectrum
        .eigenvalues
        .iter()
        .copied()
        .filter(|c| c.im > spectrum.threshold)
        .max_by(|a, b| a.im.total_cmp(&b.im))
}

/// Convenience: profile → matrix → spectrum → most unstable eigenvalue.
pub fn rayleigh_spectrum(problem: &RayleighProblem, threshold: f64) -> Result<Spectrum> {
    compute_spectrum(&assemble_rayleigh_matrix(problem)?, threshold)
}

/// Everything but the time needed to build a Rayleigh problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepTemplate {
    pub alpha_ray: f64,
    pub grid: HalfLineGrid,
    pub convention: Convention,
    pub threshold: f64,
}

/// Default matrix grid for sweeps: `h = 0.05` (N = 600).
pub fn default_sweep_grid() -> HalfLineGrid {
    HalfLineGrid::new(30.0, 0.05).expect("valid grid")
}

impl Default for SweepTemplate {
    fn default() -> Self {
        Self {
            alpha_ray: crate::default_alpha_ray(),
            grid: default_sweep_grid(),
            convention: Convention::WallAnchored,
            threshold: DEFAULT_UNSTABLE_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub t: f64,
    /// `max Im c`, `0` when every eigenvalue is real (or on failure).
    pub im_c_max: f64,
    pub c: Option<Complex64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
}

/// Growth-rate curve: for each `t`, the largest `Im c` of the matrix spectrum.
///
/// Failures at a single `t` are recorded on that point; the sweep continues.
/// `jobs` bounds the worker threads (`0` lets rayon decide).
pub fn sweep_growth(
    trace: &(impl WallTrace + ?Sized),
    times: &[f64],
    template: &SweepTemplate,
    jobs: usize,
) -> Result<SweepResult> {
    if times.iter().any(|t| !(*t > 0.0)) {
        return Err(Error::invalid("t_grid", "times must be positive"));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("t_grid", "times must be increasing"));
    }
    let point = |t: f64| -> SweepPoint {
        let run = || -> Result<Option<Complex64>> {
            let profile = build_profile(&TraceRef(trace), t, template.grid, template.convention)?;
            let problem = RayleighProblem::new(template.alpha_ray, profile)?;
            Ok(most_unstable(&rayleigh_spectrum(&problem, template.threshold)?))
        };
        match run() {
            Ok(c) => SweepPoint {
                t,
                im_c_max: c.map_or(0.0, |c| c.im),
                c,
                error: None,
            },
            Err(e) => SweepPoint {
                t,
                im_c_max: 0.0,
                c: None,
                error: Some(e.to_string()),
            },
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::invalid("jobs", e.to_string()))?;
    let points = pool.install(|| times.par_iter().map(|&t| point(t)).collect());
    Ok(SweepResult { points })
}

/// Sized adapter over a borrowed, possibly unsized, trace.
pub(crate) struct TraceRef<'a, T: ?Sized>(pub(crate) &'a T);

impl<T: WallTrace + ?Sized> WallTrace for TraceRef<'_, T> {
    fn value(&self, t: f64) -> f64 {
        self.0.value(t)
    }
    fn derivative(&self, t: f64) -> f64 {
        self.0.derivative(t)
    }
}

/// Evenly spaced times `start, start + step, ...` up to `end` inclusive.
pub fn time_grid(start: f64, end: f64, step: f64) -> Vec<f64> {
    let n = ((end - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|k| start + k as f64 * step).map(|t| (t * 1e12).round() / 1e12).collect()
}

impl SweepResult {
    /// First time with a positive growth rate.
    pub fn onset(&self) -> Option<f64> {
        self.points.iter().find(|p| p.im_c_max > 0.0).map(|p| p.t)
    }

    /// Time of the largest growth rate among points with `t` in `[lo, hi]`.
    pub fn argmax_in(&self, lo: f64, hi: f64) -> Option<f64> {
        self.points
            .iter()
            .filter(|p| p.t >= lo && p.t <= hi)
            .max_by(|a, b| a.im_c_max.total_cmp(&b.im_c_max))
            .map(|p| p.t)
    }

    /// After the point at `t_peak`, the curve decreases and later rises again.
    pub fn dips_then_rises_after(&self, t_peak: f64) -> bool {
        let after: Vec<f64> = self
            .points
            .iter()
            .filter(|p| p.t > t_peak)
            .map(|p| p.im_c_max)
            .collect();
        let Some(first) = after.first() else { return false };
        let peak = self
            .points
            .iter()
            .find(|p| p.t == t_peak)
            .map_or(*first, |p| p.im_c_max);
        // lowest point following the peak, then any later increase above it
        let mut low = peak;
        let mut dipped = false;
        for &v in &after {
            if v < low {
                low = v;
                dipped = true;
            } else if dipped && v > low {
                return true;
            }
        }
        false
    }

    pub fn failures(&self) -> impl Iterator<Item = &SweepPoint> {
        self.points.iter().filter(|p| p.error.is_some())
    }

    /// CSV with columns `t,im_c_max`.
    pub fn write_csv(&self, mut out: impl Write, header: &CsvHeader) -> std::io::Result<()> {
        header.write(&mut out)?;
        writeln!(out, "t,im_c_max")?;
        for p in &self.points {
            writeln!(out, "{},{}", fmt_f64(p.t), fmt_f64(p.im_c_max))?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path, header: &CsvHeader) -> Result<()> {
        self.write_csv(std::io::BufWriter::new(std::fs::File::create(path)?), header)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interior::DiracTrace;

    fn flat_profile(c: f64) -> Profile {
        let grid = HalfLineGrid::new(20.0, 0.5).unwrap();
        Profile {
            grid,
            t: 1.0,
            v: vec![c; grid.n + 1],
            vpp: vec![0.0; grid.n + 1],
            convention: Convention::WallAnchored,
            far_field: c,
        }
    }

    #[test]
    fn inverse_helmholtz_round_trip() {
        let alpha = 0.1f64.sqrt();
        let err = |h: f64| {
            let grid = HalfLineGrid::new(30.0, h).unwrap();
            let ys: Vec<f64> = (1..=grid.n).map(|k| grid.y(k)).collect();
            let omega: Vec<f64> = ys.iter().map(|y| ((y - 2.0) - alpha * alpha * y) * (-y).exp()).collect();
            let psi = inverse_helmholtz(&omega, &grid, alpha).unwrap();
            psi.iter().zip(&ys).map(|(p, y)| (p - y * (-y).exp()).abs()).fold(0.0, f64::max)
        };
        let (e1, e2) = (err(0.1), err(0.05));
        assert!(e1 < 1e-3 && e1 / e2 > 3.5, "{e1} {e2}");
    }

    #[test]
    fn inverse_helmholtz_zero_and_length_check() {
        let grid = HalfLineGrid::new(20.0, 0.5).unwrap();
        let psi = inverse_helmholtz(&vec![0.0; grid.n], &grid, 1.0).unwrap();
        assert!(psi.iter().all(|v| *v == 0.0));
        assert!(inverse_helmholtz(&[1.0], &grid, 1.0).is_err());
    }

    #[test]
    fn inverse_helmholtz_delta_column_matches_dense_inverse() {
        let grid = HalfLineGrid::new(20.0, 0.5).unwrap();
        let alpha = 0.7;
        let t = helmholtz_operator(&grid, alpha);
        let n = grid.n;
        let mut dense = DMatrix::zeros(n, n);
        for i in 0..n {
            dense[(i, i)] = t.diag[i];
            if i + 1 < n {
                dense[(i, i + 1)] = t.upper[i];
                dense[(i + 1, i)] = t.lower[i];
            }
        }
        let inv = dense.try_inverse().unwrap();
        let k = 7;
        let mut delta = vec![0.0; n];
        delta[k] = 1.0;
        let col = inverse_helmholtz(&delta, &grid, alpha).unwrap();
        for i in 0..n {
            assert!((col[i] - inv[(i, k)]).abs() < 1e-12);
            // Green function of a negative operator: non-positive, peaked at the source
            assert!(col[i] <= 0.0 && col[i] >= col[k]);
        }
    }

    #[test]
    fn constant_profile_gives_scalar_matrix() {
        let problem = RayleighProblem::new(0.3, flat_profile(0.4)).unwrap();
        let m = assemble_rayleigh_matrix(&problem).unwrap();
        assert_eq!(m, DMatrix::identity(m.nrows(), m.ncols()) * 0.4);
        let s = compute_spectrum(&m, DEFAULT_UNSTABLE_THRESHOLD).unwrap();
        assert!(s.eigenvalues.iter().all(|c| (c - Complex64::new(0.4, 0.0)).norm() < 1e-14));
        assert_eq!(most_unstable(&s), None);
    }

    #[test]
    fn matrix_structure_under_shift_and_flip() {
        let tr = DiracTrace::new(1.0).unwrap();
        let grid = HalfLineGrid::new(20.0, 0.2).unwrap();
        let p = build_profile(&tr, 7.65, grid, Convention::WallAnchored).unwrap();
        let m = assemble_rayleigh_matrix(&RayleighProblem::new(0.3, p.clone()).unwrap()).unwrap();
        let ms = assemble_rayleigh_matrix(&RayleighProblem::new(0.3, p.shifted(0.25)).unwrap()).unwrap();
        let mf = assemble_rayleigh_matrix(&RayleighProblem::new(0.3, p.negated()).unwrap()).unwrap();
        let id = DMatrix::<f64>::identity(m.nrows(), m.ncols());
        assert!((&ms - &m - id * 0.25).amax() <= 1e-15);
        assert_eq!(mf, -&m);
    }

    #[test]
    fn unstable_pair_on_coarse_grid_at_peak_time() {
        let tr = DiracTrace::new(1.0).unwrap();
        let grid = HalfLineGrid::new(30.0, 0.1).unwrap();
        let p = build_profile(&tr, 7.65, grid, Convention::WallAnchored).unwrap();
        let s = rayleigh_spectrum(&RayleighProblem::new(0.1f64.sqrt(), p).unwrap(), DEFAULT_UNSTABLE_THRESHOLD).unwrap();
        let c = most_unstable(&s).expect("unstable mode");
        assert!((c.im - 0.146).abs() < 0.01, "{c}");
        assert!(s.conjugate_defect(1e-6) < 1e-8);
    }

    #[test]
    fn sweep_records_bad_points_without_aborting() {
        let tr = DiracTrace::new(1.0).unwrap();
        let t = SweepTemplate {
            grid: HalfLineGrid::new(20.0, 0.5).unwrap(),
            ..Default::default()
        };
        assert!(sweep_growth(&tr, &[2.0, 1.0], &t, 1).is_err());
        let r = sweep_growth(&tr, &[0.5, 1.0], &t, 1).unwrap();
        assert_eq!(r.points.len(), 2);
    }

    #[test]
    fn time_grid_is_inclusive() {
        let g = time_grid(0.5, 16.0, 0.1);
        assert_eq!(g.len(), 156);
        assert_eq!(g[0], 0.5);
        assert_eq!(*g.last().unwrap(), 16.0);
        assert_eq!(g[35], 4.0);
    }

    #[test]
    fn dip_detection() {
        let pts = |v: &[f64]| SweepResult {
            points: v
                .iter()
                .enumerate()
                .map(|(i, &x)| SweepPoint { t: i as f64, im_c_max: x, c: None, error: None })
                .collect(),
        };
        assert!(pts(&[0.0, 1.0, 3.0, 2.0, 1.0, 1.5]).dips_then_rises_after(2.0));
        assert!(!pts(&[0.0, 1.0, 3.0, 2.0, 1.0, 0.5]).dips_then_rises_after(2.0));
    }
}
