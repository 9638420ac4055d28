//! # `blstab`: stability of a heat-driven Couette boundary layer
//!
//! A shear flow between two walls is perturbed by a single Fourier mode whose
//! initial vorticity is a sum of three point vortices (or their mollified
//! versions). The amplitudes are chosen so the interior wall shear vanishes at
//! `t = 0`, yet the horizontal slip on the lower wall does not. A viscous
//! boundary layer forms, governed in the moving frame by a half-line heat
//! equation driven by that slip. This crate builds the resulting profile
//! `V_s(t, Y)` and studies its inviscid (Rayleigh) and viscous
//! (Orr-Sommerfeld) linear stability.
//!
//! Pipeline, one module per stage:
//! - [`interior`]: Green function of `d²/dy² - α²`, vortex amplitudes, wall
//!   shear and the wall trace `φ(t)`.
//! - [`heat`]: half-line heat problem solved by Crank-Nicolson and by an
//!   exact Duhamel (double-layer) quadrature; profile assembly.
//! - [`spectral`]: Rayleigh operator in vorticity form as a dense matrix,
//!   Hessenberg/QR spectrum, growth-rate sweeps.
//! - [`shooting`]: backward RK4 shooting with Newton refinement on the
//!   complex wave speed.
//! - [`orr_sommerfeld`]: viscous residuals and compound-matrix eigenvalues.
//!
//! Numerical kernels shared between stages live in [`linalg`] and
//! [`quadrature`]; file formats in [`output`].

pub mod cli;
pub mod error;
pub mod heat;
pub mod interior;
pub mod linalg;
pub mod orr_sommerfeld;
pub mod output;
pub mod quadrature;
pub mod shooting;
pub mod spectral;

pub use error::{Error, Result};
pub use heat::{
    build_profile, eval_duhamel, solve_heat_cn, Convention, HalfLineGrid, HeatMethod,
    HeatSolution, Profile, WallTrace,
};
pub use interior::{
    solve_dirac_coefficients, solve_mollified_coefficients, trace_phi, wall_shear, DiracTrace,
    Mollifier, Wall, WaveSetup,
};
pub use num_complex::Complex64;
pub use orr_sommerfeld::{os_eigen_compound, os_residual, sublayer_profile, ExpansionReport, OsProblem};
pub use shooting::{integrate_shot, newton_refine, validate_farfield, EigenPair, ShootingConfig};
pub use spectral::{
    assemble_rayleigh_matrix, compute_spectrum, most_unstable, sweep_growth, RayleighProblem,
    Spectrum, SweepResult,
};

/// Default Rayleigh wavenumber, `√0.1`.
pub fn default_alpha_ray() -> f64 {
    0.1_f64.sqrt()
}
