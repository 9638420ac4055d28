use crate::error::{Error, Result};

/// Tridiagonal matrix stored by diagonals.
///
/// `lower[i]` multiplies `x[i]` in row `i + 1`; `upper[i]` multiplies
/// `x[i + 1]` in row `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn new(lower: Vec<f64>, diag: Vec<f64>, upper: Vec<f64>) -> Self {
        let n = diag.len();
        assert!(n >= 1);
        assert_eq!(lower.len(), n - 1, "sub-diagonal length");
        assert_eq!(upper.len(), n - 1, "super-diagonal length");
        Self { lower, diag, upper }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.lower[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.upper[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    /// Thomas factorisation, reusable for many right-hand sides.
    pub fn factor(&self, context: &'static str) -> Result<TridiagonalLu> {
        let n = self.len();
        let mut pivots = vec![0.0; n];
        let mut ratios = vec![0.0; n.saturating_sub(1)];
        let scale = self
            .diag
            .iter()
            .chain(&self.lower)
            .chain(&self.upper)
            .fold(0.0_f64, |m, v| m.max(v.abs()));
        let tiny = f64::EPSILON * scale.max(f64::MIN_POSITIVE);
        pivots[0] = self.diag[0];
        for i in 1..n {
            if pivots[i - 1].abs() <= tiny {
                return Err(Error::Singular { context });
            }
            ratios[i - 1] = self.lower[i - 1] / pivots[i - 1];
            pivots[i] = self.diag[i] - ratios[i - 1] * self.upper[i - 1];
        }
        if pivots[n - 1].abs() <= tiny || pivots.iter().any(|p| !p.is_finite()) {
            return Err(Error::Singular { context });
        }
        Ok(TridiagonalLu {
            upper: self.upper.clone(),
            pivots,
            ratios,
        })
    }

    pub fn solve(&self, rhs: &mut [f64], context: &'static str) -> Result<()> {
        self.factor(context)?.solve_in_place(rhs);
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TridiagonalLu {
    upper: Vec<f64>,
    pivots: Vec<f64>,
    ratios: Vec<f64>,
}

impl TridiagonalLu {
    pub fn len(&self) -> usize {
        self.pivots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pivots.is_empty()
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.len();
        assert_eq!(x.len(), n);
        for i in 1..n {
            x[i] -= self.ratios[i - 1] * x[i - 1];
        }
        x[n - 1] /= self.pivots[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = (x[i] - self.upper[i] * x[i + 1]) / self.pivots[i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn singular_system_is_reported() {
        let m = Tridiagonal::new(vec![1.0], vec![1.0, 1.0], vec![1.0]);
        assert!(matches!(m.factor("test"), Err(Error::Singular { .. })));
    }

    proptest! {
        #[test]
        fn solve_inverts_matvec_for_diagonally_dominant(
            off in proptest::collection::vec(-1.0f64..1.0, 2..40),
            xs in proptest::collection::vec(-5.0f64..5.0, 41),
        ) {
            let n = off.len() + 1;
            let lower = off.clone();
            let upper: Vec<f64> = off.iter().map(|v| 0.5 * v).collect();
            let diag = vec![3.0; n];
            let m = Tridiagonal::new(lower, diag, upper);
            let x: Vec<f64> = xs[..n].to_vec();
            let mut b = m.matvec(&x);
            m.solve(&mut b, "test").unwrap();
            for (a, e) in b.iter().zip(&x) {
                prop_assert!((a - e).abs() < 1e-12);
            }
        }
    }
}
