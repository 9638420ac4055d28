use super::Tridiagonal;
use crate::error::Result;

/// Natural cubic spline through samples on a uniform grid `x_k = x0 + k·h`.
///
/// Outside `[x0, x_last]` the spline is held at the end value.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    x0: f64,
    h: f64,
    y: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn uniform(x0: f64, h: f64, y: &[f64]) -> Result<Self> {
        let n = y.len();
        assert!(n >= 2, "spline needs at least two knots");
        let mut m = vec![0.0; n];
        if n > 2 {
            let k = n - 2;
            let t = Tridiagonal::new(vec![1.0; k - 1], vec![4.0; k], vec![1.0; k - 1]);
            let mut rhs: Vec<f64> = (1..n - 1)
                .map(|i| 6.0 * (y[i + 1] - 2.0 * y[i] + y[i - 1]) / (h * h))
                .collect();
            t.solve(&mut rhs, "cubic spline")?;
            m[1..n - 1].copy_from_slice(&rhs);
        }
        Ok(Self {
            x0,
            h,
            y: y.to_vec(),
            m,
        })
    }

    pub fn end(&self) -> f64 {
        self.x0 + self.h * (self.y.len() - 1) as f64
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.y.len();
        let s = (x - self.x0) / self.h;
        if s <= 0.0 {
            return self.y[0];
        }
        if s >= (n - 1) as f64 {
            return self.y[n - 1];
        }
        let i = (s.floor() as usize).min(n - 2);
        let b = s - i as f64;
        let a = 1.0 - b;
        let h2 = self.h * self.h / 6.0;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_knots_exactly() {
        let y: Vec<f64> = (0..20).map(|k| (k as f64 * 0.3).sin()).collect();
        let s = CubicSpline::uniform(0.0, 0.3, &y).unwrap();
        for (k, v) in y.iter().enumerate() {
            assert!((s.eval(k as f64 * 0.3) - v).abs() < 1e-14);
        }
    }

    #[test]
    fn fourth_order_in_the_interior() {
        let err = |h: f64| {
            let n = (4.0 / h).round() as usize + 1;
            let y: Vec<f64> = (0..n).map(|k| (-(k as f64 * h)).exp()).collect();
            let s = CubicSpline::uniform(0.0, h, &y).unwrap();
            (0..100)
                .map(|j| 1.0 + 2.0 * j as f64 / 100.0 + 0.5 * h)
                .map(|x| (s.eval(x) - (-x).exp()).abs())
                .fold(0.0, f64::max)
        };
        let ratio = err(0.04) / err(0.02);
        assert!(ratio > 12.0, "ratio {ratio}");
    }
}
