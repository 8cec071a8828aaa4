//! One-dimensional quadrature rules.

use std::f64::consts::PI;

use crate::error::{OcsError, Result};

/// Gauss-Legendre nodes and weights on `[-1, 1]`, exact for degree `2 * npts - 1`.
pub fn gauss_legendre(npts: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; npts];
    let mut weights = vec![0.0; npts];
    let nf = npts as f64;
    for i in 0..npts.div_ceil(2) {
        // Tricomi initial guess, then Newton on the Legendre recurrence
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=npts {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if npts == 1 {
                p1 = x;
                p0 = 1.0;
            }
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        nodes[npts - 1 - i] = -x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[npts - 1 - i] = w;
    }
    if npts % 2 == 1 {
        nodes[npts / 2] = 0.0;
    }
    (nodes, weights)
}

/// Tanh-sinh (double exponential) integration of `f` over `[a, b]`.
///
/// The integrand is only evaluated in the open interval, so integrable
/// endpoint singularities (logarithmic, algebraic) are handled. The step is
/// halved until successive estimates agree to `tolerance` (absolute);
/// `max_level` bounds the number of halvings.
pub fn tanh_sinh<F>(f: F, a: f64, b: f64, tolerance: f64, max_level: usize) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if b <= a {
        return Ok(0.0);
    }
    let half = 0.5 * (b - a);
    // Abscissa x = tanh(pi/2 sinh t); the complement 1 - |x| is formed
    // directly to keep resolution next to the endpoints.
    let term = |t: f64| -> f64 {
        let s = 0.5 * PI * t.sinh();
        let e = (-2.0 * s.abs()).exp();
        let complement = 2.0 * e / (1.0 + e);
        let weight = 0.5 * PI * t.cosh() * 4.0 * e / ((1.0 + e) * (1.0 + e));
        if weight == 0.0 || complement == 0.0 {
            return 0.0;
        }
        let dist = half * complement;
        let x = if s >= 0.0 { b - dist } else { a + dist };
        if x <= a || x >= b {
            return 0.0;
        }
        let v = f(x) * weight;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let t_max = 4.0;
    let mut h = 1.0;
    let mut sum = term(0.0);
    let mut k = 1;
    while k as f64 * h <= t_max {
        let t = k as f64 * h;
        sum += term(t) + term(-t);
        k += 1;
    }
    let mut estimate = sum * h * half;
    let mut change = f64::INFINITY;
    for _ in 0..max_level {
        h *= 0.5;
        // add only the new (odd) abscissae
        let mut k = 1;
        while k as f64 * h <= t_max {
            let t = k as f64 * h;
            sum += term(t) + term(-t);
            k += 2;
        }
        let next = sum * h * half;
        change = (next - estimate).abs();
        estimate = next;
        if change <= tolerance {
            return Ok(estimate);
        }
    }
    Err(OcsError::NoConvergence { tolerance, change })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for npts in 1..=20 {
            let (x, w) = gauss_legendre(npts);
            for deg in 0..2 * npts {
                let approx: f64 = x
                    .iter()
                    .zip(&w)
                    .map(|(xi, wi)| wi * xi.powi(deg as i32))
                    .sum();
                let exact = if deg % 2 == 1 {
                    0.0
                } else {
                    2.0 / (deg as f64 + 1.0)
                };
                assert_relative_eq!(approx, exact, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn tanh_sinh_smooth_and_singular() {
        let v = tanh_sinh(|x| x.exp(), 0.0, 1.0, 1e-12, 12).unwrap();
        assert_relative_eq!(v, std::f64::consts::E - 1.0, epsilon = 1e-12);
        // int_0^1 ln x dx = -1
        let v = tanh_sinh(|x| x.ln(), 0.0, 1.0, 1e-12, 12).unwrap();
        assert_relative_eq!(v, -1.0, epsilon = 1e-11);
        // int_0^1 x^{-1/2} dx = 2
        let v = tanh_sinh(|x| 1.0 / x.sqrt(), 0.0, 1.0, 1e-10, 12).unwrap();
        assert_relative_eq!(v, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn tanh_sinh_reports_non_convergence() {
        let r = tanh_sinh(|x| (1.0 / x).sin() / x, 0.0, 1.0, 1e-14, 2);
        assert!(matches!(r, Err(OcsError::NoConvergence { .. })));
    }
}
