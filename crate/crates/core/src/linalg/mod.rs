//! Dense and banded linear algebra used by the solvers.

mod eigen;
mod spline;
mod tridiag;

pub use eigen::{eigenvalues, hessenberg_reduce, hessenberg_eigenvalues};
pub use spline::CubicSpline;
pub use tridiag::{Tridiagonal, TridiagonalLu};
