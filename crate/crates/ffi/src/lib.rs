//! C ABI over the `blstab` core.
//!
//! Every entry point returns a [`BlsStatus`]; on failure the message is kept
//! per thread and can be read with [`bls_last_error`]. Profiles and spectra
//! are opaque heap objects released with their `_free` function.

use blstab::heat::{build_profile, Convention, HalfLineGrid, Profile};
use blstab::interior::{solve_dirac_coefficients, trace_phi, DiracTrace};
use blstab::shooting::{newton_refine, ShootingConfig};
use blstab::spectral::{most_unstable, rayleigh_spectrum, RayleighProblem, Spectrum};
use blstab::{Complex64, Error};
use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

/// Status code returned by every function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlsStatus {
    Ok = 0,
    InvalidArgument = 1,
    NullPointer = 2,
    Singular = 3,
    NoConvergence = 4,
    PoleProximity = 5,
    Underresolved = 6,
    /// No eigenvalue with positive imaginary part above the threshold.
    NotFound = 7,
    Io = 8,
    Internal = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlsComplex {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for BlsComplex {
    fn from(c: Complex64) -> Self {
        Self { re: c.re, im: c.im }
    }
}

impl From<BlsComplex> for Complex64 {
    fn from(c: BlsComplex) -> Self {
        Complex64::new(c.re, c.im)
    }
}

/// Convention for the constant offset of the profile.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlsConvention {
    WallAnchored = 0,
    ClaimLiteral = 1,
}

/// Sampled boundary-layer profile.
pub struct BlsProfile(Profile);

/// Sorted Rayleigh spectrum.
pub struct BlsSpectrum(Spectrum);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> BlsStatus {
    match e {
        Error::InvalidParameter { .. } => BlsStatus::InvalidArgument,
        Error::Singular { .. } | Error::Degenerate(_) => BlsStatus::Singular,
        Error::NoConvergence { .. } | Error::NewtonFailed { .. } => BlsStatus::NoConvergence,
        Error::PoleProximity { .. } => BlsStatus::PoleProximity,
        Error::Underresolved { .. } => BlsStatus::Underresolved,
        Error::Io(_) => BlsStatus::Io,
    }
}

struct Fail(BlsStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(BlsStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> BlsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            BlsStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            BlsStatus::Internal
        }
    }
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to `cap`). Returns the full message length without
/// the terminator, or 0 when the last call succeeded.
///
/// # Safety
/// `buf` must be null or valid for `cap` bytes.
#[no_mangle]
pub unsafe extern "C" fn bls_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Wall trace `φ(t)` for interior wavenumber `alpha`.
///
/// # Safety
/// `out` must be null or valid for writing.
#[no_mangle]
pub unsafe extern "C" fn bls_trace_phi(t: f64, alpha: f64, out: *mut f64) -> BlsStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = trace_phi(t, alpha)?;
        Ok(())
    })
}

/// Point-vortex amplitudes `(a1, a2, a3)` that cancel the interior wall
/// shear at `t = 0`.
///
/// # Safety
/// `out` must be null or valid for writing 3 doubles.
#[no_mangle]
pub unsafe extern "C" fn bls_solve_dirac_coefficients(alpha: f64, out: *mut f64) -> BlsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let a = solve_dirac_coefficients(alpha)?;
        ptr::copy_nonoverlapping(a.as_ptr(), out, 3);
        Ok(())
    })
}

/// Builds the profile at time `t` on `[0, y0]` with mesh `h`.
/// `convention` is a [`BlsConvention`] value.
///
/// # Safety
/// `out` must be null or valid for writing; the handle it receives must be
/// released with [`bls_profile_free`].
#[no_mangle]
pub unsafe extern "C" fn bls_profile_new(
    t: f64,
    alpha: f64,
    y0: f64,
    h: f64,
    convention: u32,
    out: *mut *mut BlsProfile,
) -> BlsStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = ptr::null_mut();
        let convention = match convention {
            c if c == BlsConvention::WallAnchored as u32 => Convention::WallAnchored,
            c if c == BlsConvention::ClaimLiteral as u32 => Convention::ClaimLiteral,
            c => return Err(Fail(BlsStatus::InvalidArgument, format!("unknown convention {c}"))),
        };
        let trace = DiracTrace::new(alpha)?;
        let profile = build_profile(&trace, t, HalfLineGrid::new(y0, h)?, convention)?;
        *out = Box::into_raw(Box::new(BlsProfile(profile)));
        Ok(())
    })
}

/// Number of samples (`N + 1`, wall included).
///
/// # Safety
/// `profile` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bls_profile_len(profile: *const BlsProfile) -> usize {
    profile.as_ref().map_or(0, |p| p.0.v.len())
}

/// Far-field value `V(Y0)`.
///
/// # Safety
/// `profile` must be null or a live handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn bls_profile_far_field(profile: *const BlsProfile, out: *mut f64) -> BlsStatus {
    guard(|| {
        let p = profile.as_ref().ok_or_else(|| null("profile"))?;
        *out.as_mut().ok_or_else(|| null("out"))? = p.0.far_field;
        Ok(())
    })
}

/// Copies `Y`, `V` and `V''` into caller buffers of length `len`, which
/// must equal [`bls_profile_len`]. Any of the three may be null to skip it.
///
/// # Safety
/// Non-null buffers must be valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn bls_profile_copy(
    profile: *const BlsProfile,
    y: *mut f64,
    v: *mut f64,
    vpp: *mut f64,
    len: usize,
) -> BlsStatus {
    guard(|| {
        let p = &profile.as_ref().ok_or_else(|| null("profile"))?.0;
        if len != p.v.len() {
            return Err(Fail(
                BlsStatus::InvalidArgument,
                format!("buffer length {len} does not match profile length {}", p.v.len()),
            ));
        }
        if !y.is_null() {
            for k in 0..len {
                *y.add(k) = p.grid.y(k);
            }
        }
        if !v.is_null() {
            ptr::copy_nonoverlapping(p.v.as_ptr(), v, len);
        }
        if !vpp.is_null() {
            ptr::copy_nonoverlapping(p.vpp.as_ptr(), vpp, len);
        }
        Ok(())
    })
}

/// # Safety
/// `profile` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bls_profile_free(profile: *mut BlsProfile) {
    if !profile.is_null() {
        drop(Box::from_raw(profile));
    }
}

/// Full Rayleigh spectrum of `profile` at wavenumber `alpha_ray`.
/// Eigenvalues with `|Im c| > threshold` count as discrete.
///
/// # Safety
/// `profile` must be a live handle; `out` null or writable. The result is
/// released with [`bls_spectrum_free`].
#[no_mangle]
pub unsafe extern "C" fn bls_spectrum_compute(
    profile: *const BlsProfile,
    alpha_ray: f64,
    threshold: f64,
    out: *mut *mut BlsSpectrum,
) -> BlsStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = ptr::null_mut();
        let p = &profile.as_ref().ok_or_else(|| null("profile"))?.0;
        let problem = RayleighProblem::new(alpha_ray, p.clone())?;
        let spectrum = rayleigh_spectrum(&problem, threshold)?;
        *out = Box::into_raw(Box::new(BlsSpectrum(spectrum)));
        Ok(())
    })
}

/// # Safety
/// `spectrum` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bls_spectrum_len(spectrum: *const BlsSpectrum) -> usize {
    spectrum.as_ref().map_or(0, |s| s.0.len())
}

/// Copies the eigenvalues, sorted by real then imaginary part.
///
/// # Safety
/// `buf` must be valid for `len` elements, `len == bls_spectrum_len`.
#[no_mangle]
pub unsafe extern "C" fn bls_spectrum_copy(spectrum: *const BlsSpectrum, buf: *mut BlsComplex, len: usize) -> BlsStatus {
    guard(|| {
        let s = &spectrum.as_ref().ok_or_else(|| null("spectrum"))?.0;
        if buf.is_null() {
            return Err(null("buf"));
        }
        if len != s.len() {
            return Err(Fail(
                BlsStatus::InvalidArgument,
                format!("buffer length {len} does not match spectrum length {}", s.len()),
            ));
        }
        for (k, c) in s.eigenvalues.iter().enumerate() {
            *buf.add(k) = (*c).into();
        }
        Ok(())
    })
}

/// Eigenvalue with the largest imaginary part, or `NotFound` when the
/// spectrum has no discrete unstable member.
///
/// # Safety
/// `spectrum` must be a live handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn bls_spectrum_most_unstable(spectrum: *const BlsSpectrum, out: *mut BlsComplex) -> BlsStatus {
    guard(|| {
        let s = &spectrum.as_ref().ok_or_else(|| null("spectrum"))?.0;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        match most_unstable(s) {
            Some(c) => {
                *out = c.into();
                Ok(())
            }
            None => Err(Fail(BlsStatus::NotFound, "no unstable eigenvalue".into())),
        }
    })
}

/// # Safety
/// `spectrum` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bls_spectrum_free(spectrum: *mut BlsSpectrum) {
    if !spectrum.is_null() {
        drop(Box::from_raw(spectrum));
    }
}

/// Refines `seed` to a Rayleigh eigenvalue by shooting from `Y0` with
/// `steps` RK4 steps. Writes `c` and `|ψ(0, c)|`.
///
/// # Safety
/// `profile` must be a live handle; `c_out` and `residual_out` null or
/// writable (`residual_out` may be null to skip it).
#[no_mangle]
pub unsafe extern "C" fn bls_newton_refine(
    profile: *const BlsProfile,
    alpha_ray: f64,
    seed: BlsComplex,
    steps: usize,
    c_out: *mut BlsComplex,
    residual_out: *mut f64,
) -> BlsStatus {
    guard(|| {
        let p = &profile.as_ref().ok_or_else(|| null("profile"))?.0;
        let c_out = c_out.as_mut().ok_or_else(|| null("c_out"))?;
        if steps == 0 {
            return Err(Fail(BlsStatus::InvalidArgument, "steps must be positive".into()));
        }
        let problem = RayleighProblem::new(alpha_ray, p.clone())?;
        let config = ShootingConfig {
            y0: p.grid.y0,
            steps,
            ..Default::default()
        };
        let pair = newton_refine(seed.into(), &problem, &config)?;
        *c_out = pair.c.into();
        if let Some(r) = residual_out.as_mut() {
            *r = pair.psi0_residual;
        }
        Ok(())
    })
}
