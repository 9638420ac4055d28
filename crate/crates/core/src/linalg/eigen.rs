//! Eigenvalues of a dense real nonsymmetric matrix: Householder reduction to
//! upper Hessenberg form followed by the Francis implicit double-shift QR
//! iteration. Only eigenvalues are accumulated, so the QR sweeps touch the
//! active window alone. Working storage is row-major.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;

/// All eigenvalues of `m`, with complex ones in adjacent conjugate pairs.
///
/// The iteration cap is `30·n` QR sweeps in total.
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::invalid("matrix", format!("not square ({}x{})", n, m.ncols())));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("matrix", "contains non-finite entries"));
    }
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = m[(i, j)];
        }
    }
    hessenberg_reduce(&mut a, n);
    hessenberg_eigenvalues(&mut a, n, 30 * n)
}

/// In-place orthogonal similarity reduction of a row-major `n×n` matrix to
/// upper Hessenberg form.
pub fn hessenberg_reduce(a: &mut [f64], n: usize) {
    assert_eq!(a.len(), n * n);
    if n < 3 {
        return;
    }
    let mut v = vec![0.0; n];
    let mut w = vec![0.0; n];
    for k in 0..n - 2 {
        let len = n - k - 1;
        let mut norm2 = 0.0;
        for i in 0..len {
            let x = a[(k + 1 + i) * n + k];
            v[i] = x;
            norm2 += x * x;
        }
        let norm = norm2.sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if v[0] > 0.0 { -norm } else { norm };
        v[0] -= alpha;
        let vnorm2 = norm2 - 2.0 * alpha * (v[0] + alpha) + alpha * alpha;
        if vnorm2 <= f64::MIN_POSITIVE {
            continue;
        }
        let inv = 1.0 / vnorm2.sqrt();
        for vi in v[..len].iter_mut() {
            *vi *= inv;
        }
        let v = &v[..len];

        // H·A on rows k+1.., columns k+1..
        a[(k + 1) * n + k] = alpha;
        for i in 1..len {
            a[(k + 1 + i) * n + k] = 0.0;
        }
        let w = &mut w[..len];
        w.iter_mut().for_each(|x| *x = 0.0);
        for (i, &vi) in v.iter().enumerate() {
            let row = &a[(k + 1 + i) * n + k + 1..(k + 2 + i) * n];
            for (wj, &aij) in w.iter_mut().zip(row) {
                *wj += vi * aij;
            }
        }
        for (i, &vi) in v.iter().enumerate() {
            let s = 2.0 * vi;
            let row = &mut a[(k + 1 + i) * n + k + 1..(k + 2 + i) * n];
            for (aij, &wj) in row.iter_mut().zip(w.iter()) {
                *aij -= s * wj;
            }
        }

        // A·H on all rows, columns k+1..
        for i in 0..n {
            let row = &mut a[i * n + k + 1..(i + 1) * n];
            let d: f64 = row.iter().zip(v).map(|(x, y)| x * y).sum();
            let s = 2.0 * d;
            for (aij, &vj) in row.iter_mut().zip(v) {
                *aij -= s * vj;
            }
        }
    }
}

/// Eigenvalues of an upper Hessenberg matrix (row-major, destroyed).
pub fn hessenberg_eigenvalues(a: &mut [f64], n: usize, max_sweeps: usize) -> Result<Vec<Complex64>> {
    assert_eq!(a.len(), n * n);
    let idx = |i: usize, j: usize| i * n + j;
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    if n == 0 {
        return Ok(out);
    }

    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += a[idx(i, j)].abs();
        }
    }

    let mut sweeps = 0usize;
    let mut shift_acc = 0.0;
    let mut nn = n as isize - 1;
    while nn >= 0 {
        let mut its = 0;
        loop {
            let nu = nn as usize;
            // Find the bottom of the unreduced block.
            let mut l = nu;
            while l >= 1 {
                let mut s = a[idx(l - 1, l - 1)].abs() + a[idx(l, l)].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[idx(l, l - 1)].abs() <= f64::EPSILON * s {
                    a[idx(l, l - 1)] = 0.0;
                    break;
                }
                l -= 1;
            }

            let mut x = a[idx(nu, nu)];
            if l == nu {
                out[nu] = Complex64::new(x + shift_acc, 0.0);
                nn -= 1;
                break;
            }
            let mut y = a[idx(nu - 1, nu - 1)];
            let mut w = a[idx(nu, nu - 1)] * a[idx(nu - 1, nu)];
            if l == nu - 1 {
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let z = q.abs().sqrt();
                x += shift_acc;
                if q >= 0.0 {
                    let z = p + z.copysign(p);
                    let hi = x + z;
                    let lo = if z != 0.0 { x - w / z } else { hi };
                    out[nu - 1] = Complex64::new(hi, 0.0);
                    out[nu] = Complex64::new(lo, 0.0);
                } else {
                    out[nu - 1] = Complex64::new(x + p, z);
                    out[nu] = Complex64::new(x + p, -z);
                }
                nn -= 2;
                break;
            }

            if sweeps >= max_sweeps {
                return Err(Error::NoConvergence { index: nu });
            }
            if its == 10 || its == 20 {
                // Exceptional shift.
                shift_acc += x;
                for i in 0..=nu {
                    a[idx(i, i)] -= x;
                }
                let s = a[idx(nu, nu - 1)].abs() + a[idx(nu - 1, nu - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            sweeps += 1;

            // Look for two consecutive small subdiagonal elements.
            let mut m = nu - 2;
            let (mut p, mut q, mut r);
            loop {
                let z = a[idx(m, m)];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / a[idx(m + 1, m)] + a[idx(m, m + 1)];
                q = a[idx(m + 1, m + 1)] - z - rr - ss;
                r = a[idx(m + 2, m + 1)];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a[idx(m, m - 1)].abs() * (q.abs() + r.abs());
                let v = p.abs() * (a[idx(m - 1, m - 1)].abs() + z.abs() + a[idx(m + 1, m + 1)].abs());
                if u <= f64::EPSILON * v {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nu {
                a[idx(i, i - 2)] = 0.0;
                if i != m + 2 {
                    a[idx(i, i - 3)] = 0.0;
                }
            }

            // Double-shift QR sweep on rows/columns l..=nu.
            let mut k = m;
            while k < nu {
                let mut xk = 0.0;
                if k != m {
                    p = a[idx(k, k - 1)];
                    q = a[idx(k + 1, k - 1)];
                    r = if k != nu - 1 { a[idx(k + 2, k - 1)] } else { 0.0 };
                    xk = p.abs() + q.abs() + r.abs();
                    if xk != 0.0 {
                        p /= xk;
                        q /= xk;
                        r /= xk;
                    }
                }
                let s = (p * p + q * q + r * r).sqrt().copysign(p);
                if s != 0.0 {
                    if k == m {
                        if l != m {
                            a[idx(k, k - 1)] = -a[idx(k, k - 1)];
                        }
                    } else {
                        a[idx(k, k - 1)] = -s * xk;
                    }
                    p += s;
                    let hx = p / s;
                    let hy = q / s;
                    let hz = r / s;
                    q /= p;
                    r /= p;
                    let last = k == nu - 1;
                    for j in k..=nu {
                        let mut pj = a[idx(k, j)] + q * a[idx(k + 1, j)];
                        if !last {
                            pj += r * a[idx(k + 2, j)];
                            a[idx(k + 2, j)] -= pj * hz;
                        }
                        a[idx(k + 1, j)] -= pj * hy;
                        a[idx(k, j)] -= pj * hx;
                    }
                    let mmin = nu.min(k + 3);
                    for i in l..=mmin {
                        let mut pi = hx * a[idx(i, k)] + hy * a[idx(i, k + 1)];
                        if !last {
                            pi += hz * a[idx(i, k + 2)];
                            a[idx(i, k + 2)] -= pi * r;
                        }
                        a[idx(i, k + 1)] -= pi * q;
                        a[idx(i, k)] -= pi;
                    }
                }
                k += 1;
            }
        }
    }
    Ok(out)
}
