use blstab::heat::{build_profile, Convention, HalfLineGrid};
use blstab::interior::DiracTrace;
use blstab::shooting::{integrate_shot, newton_refine, refine_sweep, validate_farfield, SeedSource, ShootingConfig};
use blstab::spectral::{
    assemble_rayleigh_matrix, compute_spectrum, most_unstable, sweep_growth, RayleighProblem, SweepTemplate,
    DEFAULT_UNSTABLE_THRESHOLD,
};
use blstab::{Complex64, Error};
use std::sync::OnceLock;

struct Setup {
    problem: RayleighProblem,
    c_matrix: Complex64,
}

fn problem_at(h: f64) -> RayleighProblem {
    let tr = DiracTrace::new(1.0).unwrap();
    let profile = build_profile(&tr, 7.65, HalfLineGrid::new(30.0, h).unwrap(), Convention::WallAnchored).unwrap();
    RayleighProblem::new(0.1f64.sqrt(), profile).unwrap()
}

fn setup() -> &'static Setup {
    static S: OnceLock<Setup> = OnceLock::new();
    S.get_or_init(|| {
        let problem = problem_at(0.05);
        let m = assemble_rayleigh_matrix(&problem).unwrap();
        let c_matrix = most_unstable(&compute_spectrum(&m, DEFAULT_UNSTABLE_THRESHOLD).unwrap()).unwrap();
        Setup { problem, c_matrix }
    })
}

fn tight(steps: usize) -> ShootingConfig {
    ShootingConfig {
        steps,
        newton_tol: 1e-15,
        ..Default::default()
    }
}

#[test]
fn variational_derivative_matches_central_differences() {
    let s = setup();
    let config = ShootingConfig::default();
    for offset in [Complex64::new(0.0, 0.0), Complex64::new(0.02, 0.01), Complex64::new(-0.05, 0.03)] {
        let c = s.c_matrix + offset;
        let (_, exact) = integrate_shot(c, &s.problem, &config).unwrap();
        for dir in [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)] {
            let d = dir * 1e-6;
            let fd = (integrate_shot(c + d, &s.problem, &config).unwrap().0 - integrate_shot(c - d, &s.problem, &config).unwrap().0) / (d * 2.0);
            assert!((fd - exact).norm() <= 1e-5 * exact.norm(), "c={c}: {fd} vs {exact}");
        }
    }
}

#[test]
fn converged_mode_satisfies_the_eigenpair_invariants() {
    let s = setup();
    let pair = newton_refine(s.c_matrix, &s.problem, &ShootingConfig::default()).unwrap();
    assert!(pair.psi0_residual < 1e-10);
    assert!(pair.c.im > 0.1 && (pair.c - s.c_matrix).norm() < 1e-3);
    let peak = pair.psi.iter().fold(0.0_f64, |m, p| m.max(p.norm()));
    assert!((peak - 1.0).abs() < 1e-14);
    assert!(pair.psi.iter().any(|p| (p - 1.0).norm() < 1e-14));
    let alpha = pair.alpha_ray;
    assert!(pair.psi.last().unwrap().norm() <= (-alpha * 30.0 / 2.0).exp());
    assert!(pair.dpsi0.norm() > 0.0);
    assert_eq!(pair.y.len(), pair.psi.len());
    assert!((pair.spacing() - 0.05).abs() < 1e-12);
}

#[test]
fn conjugate_seed_gives_conjugate_eigenvalue() {
    let s = setup();
    let config = tight(30_000);
    let a = newton_refine(s.c_matrix, &s.problem, &config).unwrap();
    let b = newton_refine(s.c_matrix.conj(), &s.problem, &config).unwrap();
    assert!((a.c.conj() - b.c).norm() < 1e-12, "{} vs {}", a.c, b.c);
}

#[test]
fn rk4_is_fourth_order_in_the_step() {
    let s = setup();
    let c = |steps| newton_refine(s.c_matrix, &s.problem, &tight(steps)).unwrap().c;
    let finest = c(120_000);
    let e_coarse = (c(7_500) - finest).norm();
    let e_fine = (c(15_000) - finest).norm();
    assert!(e_coarse / e_fine >= 12.0, "{e_coarse:e} {e_fine:e}");
    assert!((c(60_000) - c(30_000)).norm() < 1e-8);
}

#[test]
fn rayleigh_residual_is_second_order() {
    let residual = |h: f64| {
        let p = problem_at(h);
        let m = assemble_rayleigh_matrix(&p).unwrap();
        let seed = most_unstable(&compute_spectrum(&m, DEFAULT_UNSTABLE_THRESHOLD).unwrap()).unwrap();
        let pair = newton_refine(seed, &p, &ShootingConfig::default()).unwrap();
        pair.rayleigh_residual(&p.profile).unwrap().iter().fold(0.0_f64, |m, r| m.max(r.norm()))
    };
    let (r1, r2) = (residual(0.1), residual(0.05));
    assert!(r1 / r2 > 3.0, "{r1:e} {r2:e}");
}

#[test]
fn farfield_table_converges_geometrically() {
    let s = setup();
    let pair = newton_refine(s.c_matrix, &s.problem, &ShootingConfig::default()).unwrap();
    let table = validate_farfield(pair.c, &s.problem, &[20.0, 25.0, 30.0, 35.0], &ShootingConfig::default()).unwrap();
    let diffs: Vec<f64> = table.windows(2).map(|w| (w[1].1 - w[0].1).norm()).collect();
    assert!(diffs[1] < diffs[0] && diffs[2] < diffs[1], "{diffs:?}");
    // at least as fast as e^{-2αY0}; V'' decays faster still
    let rate = (diffs[2] / diffs[0]).ln() / 10.0;
    let alpha = s.problem.alpha_ray;
    assert!(rate < -1.8 * alpha && rate > -4.0 * alpha, "rate {rate} vs {}", -2.0 * alpha);
}

#[test]
fn real_wave_speed_inside_the_range_hits_the_pole_guard() {
    let s = setup();
    let r = integrate_shot(Complex64::new(s.problem.profile.v[100], 0.0), &s.problem, &ShootingConfig::default());
    assert!(matches!(r, Err(Error::PoleProximity { .. })), "{r:?}");
    // between nodes as well
    let v = &s.problem.profile.v;
    let mid = 0.5 * (v[100] + v[101]) + 1e-7;
    let r = integrate_shot(Complex64::new(mid, 0.0), &s.problem, &ShootingConfig::default());
    assert!(matches!(r, Err(Error::PoleProximity { .. })), "{r:?}");
    let top = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    assert!(integrate_shot(Complex64::new(top + 1e-3, 0.0), &s.problem, &ShootingConfig::default()).is_ok());
    assert!(integrate_shot(Complex64::new(mid, 1e-3), &s.problem, &ShootingConfig::default()).is_ok());
}

#[test]
fn sweep_refinement_uses_continuation() {
    let tr = DiracTrace::new(1.0).unwrap();
    let times = [7.4, 7.5, 7.6, 7.7];
    let template = SweepTemplate::default();
    let sweep = sweep_growth(&tr, &times, &template, 1).unwrap();
    let refined = refine_sweep(&tr, &sweep, &template, &ShootingConfig::default());
    assert_eq!(refined.len(), 4);
    assert_eq!(refined[0].seed, SeedSource::Matrix);
    assert!(refined[1..].iter().all(|p| p.seed == SeedSource::Continuation));
    for p in &refined {
        let c = p.c.unwrap();
        assert!((c - p.c_matrix).norm() < 2e-3, "t={}: {c} vs {}", p.t, p.c_matrix);
    }
}
