//! Orthonormal Zernike polynomials on the unit disk.
//!
//! Polynomials are identified either by the double index `(n, m)` (radial
//! order and signed azimuthal frequency) or by the single index
//! `j = (n(n+2) + m) / 2`. Normalization is always
//! `gamma = sqrt((2 - delta_{m,0}) (n + 1))`.
//!
//! The radial part is evaluated through its Jacobi form
//!
//! ```text
//! R_n^m(rho) = (-1)^k rho^m P_k^{(m,0)}(1 - 2 rho^2),   k = (n - m) / 2
//! ```
//!
//! using the three-term Jacobi recurrence, which stays accurate in double
//! precision well past n = 30. The explicit factorial sum is only used as a
//! test oracle.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{OcsError, Result};

/// A Zernike polynomial identified by `(n, m)` together with its single index `j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ZernikeIndex {
    pub n: u32,
    pub m: i32,
    pub j: usize,
}

impl ZernikeIndex {
    pub fn from_nm(n: u32, m: i32) -> Result<Self> {
        index_from_nm(n, m)
    }

    pub fn from_j(j: usize) -> Self {
        nm_from_index(j)
    }

    /// |m|
    pub fn m_abs(&self) -> u32 {
        self.m.unsigned_abs()
    }

    /// Orthonormalizing factor `sqrt((2 - delta_{m,0}) (n + 1))`.
    pub fn gamma(&self) -> f64 {
        let factor = if self.m == 0 { 1.0 } else { 2.0 };
        (factor * (self.n as f64 + 1.0)).sqrt()
    }
}

/// Converts `(n, m)` to a [`ZernikeIndex`], validating parity and bounds.
pub fn index_from_nm(n: u32, m: i32) -> Result<ZernikeIndex> {
    let (ni, mi) = (n as i64, m as i64);
    if mi.abs() > ni || (ni - mi).rem_euclid(2) != 0 {
        return Err(OcsError::InvalidIndex { n: ni, m: mi });
    }
    let j = (ni * (ni + 2) + mi) / 2;
    Ok(ZernikeIndex {
        n,
        m,
        j: j as usize,
    })
}

/// Inverse of [`index_from_nm`].
pub fn nm_from_index(j: usize) -> ZernikeIndex {
    // n is the largest order with n(n+1)/2 <= j
    let mut n = ((((8 * j + 1) as f64).sqrt() - 1.0) / 2.0) as usize;
    while (n + 1) * (n + 2) / 2 <= j {
        n += 1;
    }
    while n * (n + 1) / 2 > j {
        n -= 1;
    }
    let m = 2 * j as i64 - (n * (n + 2)) as i64;
    ZernikeIndex {
        n: n as u32,
        m: m as i32,
        j,
    }
}

/// Number of Zernike polynomials of radial order at most `n`: `(n+1)(n+2)/2`.
pub fn basis_dimension(n: u32) -> usize {
    let n = n as usize;
    (n + 1) * (n + 2) / 2
}

/// A point of the closed unit disk, carried in both polar and Cartesian form.
///
/// `theta` is normalized to `[0, 2pi)` and set to 0 at the origin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiskPoint {
    pub rho: f64,
    pub theta: f64,
    pub x: f64,
    pub y: f64,
}

/// Slack allowed on `x^2 + y^2 <= 1`.
pub const DISK_TOLERANCE: f64 = 1e-12;

impl DiskPoint {
    pub fn from_polar(rho: f64, theta: f64) -> Self {
        if rho == 0.0 {
            return DiskPoint {
                rho: 0.0,
                theta: 0.0,
                x: 0.0,
                y: 0.0,
            };
        }
        let theta = normalize_angle(theta);
        DiskPoint {
            rho,
            theta,
            x: rho * theta.cos(),
            y: rho * theta.sin(),
        }
    }

    pub fn from_cartesian(x: f64, y: f64) -> Self {
        let rho = x.hypot(y);
        if rho == 0.0 {
            return DiskPoint::from_polar(0.0, 0.0);
        }
        DiskPoint {
            rho,
            theta: normalize_angle(y.atan2(x)),
            x,
            y,
        }
    }

    pub fn in_disk(&self) -> bool {
        self.x * self.x + self.y * self.y <= 1.0 + DISK_TOLERANCE
    }
}

/// Maps an angle into `[0, 2pi)`.
pub fn normalize_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// Jacobi polynomials `P_0..=P_kmax` with parameters `(alpha, beta)` at `x`.
pub fn jacobi_sequence(kmax: usize, alpha: f64, beta: f64, x: f64, out: &mut Vec<f64>) {
    out.clear();
    out.push(1.0);
    if kmax == 0 {
        return;
    }
    out.push((alpha + 1.0) + (alpha + beta + 2.0) * (x - 1.0) / 2.0);
    for k in 2..=kmax {
        let k = k as f64;
        let s = 2.0 * k + alpha + beta;
        let a1 = 2.0 * k * (k + alpha + beta) * (s - 2.0);
        let a2 = (s - 1.0) * (alpha * alpha - beta * beta);
        let a3 = (s - 2.0) * (s - 1.0) * s;
        let a4 = 2.0 * (k + alpha - 1.0) * (k + beta - 1.0) * s;
        let len = out.len();
        let next = ((a2 + a3 * x) * out[len - 1] - a4 * out[len - 2]) / a1;
        out.push(next);
    }
}

fn check_radial(n: u32, m_abs: u32) -> Result<()> {
    if m_abs > n || !(n - m_abs).is_multiple_of(2) {
        return Err(OcsError::InvalidIndex {
            n: n as i64,
            m: m_abs as i64,
        });
    }
    Ok(())
}

fn parity_sign(k: usize) -> f64 {
    if k.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Radial polynomial `R_n^{|m|}(rho)`.
pub fn radial_eval(n: u32, m_abs: u32, rho: f64) -> Result<f64> {
    check_radial(n, m_abs)?;
    let k = ((n - m_abs) / 2) as usize;
    let mut p = Vec::with_capacity(k + 1);
    jacobi_sequence(k, m_abs as f64, 0.0, 1.0 - 2.0 * rho * rho, &mut p);
    Ok(parity_sign(k) * rho.powi(m_abs as i32) * p[k])
}

/// Radial polynomial, its derivative in `rho`, and `R / rho` (finite at the
/// origin for `m >= 1`; reported as 0 for `m = 0` where it is never needed).
pub fn radial_with_derivative(n: u32, m_abs: u32, rho: f64) -> Result<(f64, f64, f64)> {
    check_radial(n, m_abs)?;
    let k = ((n - m_abs) / 2) as usize;
    let m = m_abs as f64;
    let x = 1.0 - 2.0 * rho * rho;
    let mut p = Vec::with_capacity(k + 1);
    jacobi_sequence(k, m, 0.0, x, &mut p);
    let dp = if k == 0 {
        0.0
    } else {
        let mut q = Vec::with_capacity(k);
        jacobi_sequence(k - 1, m + 1.0, 1.0, x, &mut q);
        (k as f64 + m + 1.0) / 2.0 * q[k - 1]
    };
    let sign = parity_sign(k);
    let rho_m = rho.powi(m_abs as i32);
    let value = sign * rho_m * p[k];
    let (over_rho, deriv) = if m_abs == 0 {
        (0.0, sign * (-4.0 * rho) * dp)
    } else {
        let rho_m1 = rho.powi(m_abs as i32 - 1);
        (
            sign * rho_m1 * p[k],
            sign * (m * rho_m1 * p[k] - 4.0 * rho_m * rho * dp),
        )
    };
    Ok((value, deriv, over_rho))
}

/// Orthonormal Zernike polynomial at a disk point.
pub fn zernike_eval(idx: ZernikeIndex, p: &DiskPoint) -> f64 {
    let m_abs = idx.m_abs();
    let r = radial_eval(idx.n, m_abs, p.rho).expect("ZernikeIndex is validated");
    let angular = if idx.m >= 0 {
        (m_abs as f64 * p.theta).cos()
    } else {
        (m_abs as f64 * p.theta).sin()
    };
    idx.gamma() * r * angular
}

/// Cartesian gradient `(d/dx, d/dy)` of an orthonormal Zernike polynomial.
///
/// Uses the polar chain rule with `R / rho` computed without division, so the
/// origin (where `theta = 0`) gives the polynomial's own gradient.
pub fn zernike_gradient(idx: ZernikeIndex, p: &DiskPoint) -> (f64, f64) {
    let m_abs = idx.m_abs();
    let (_, dr, r_over_rho) =
        radial_with_derivative(idx.n, m_abs, p.rho).expect("ZernikeIndex is validated");
    let mf = m_abs as f64;
    let (c, s) = (p.theta.cos(), p.theta.sin());
    // angular factor T(theta) and dT/dtheta
    let (t, dt) = if idx.m >= 0 {
        ((mf * p.theta).cos(), -mf * (mf * p.theta).sin())
    } else {
        ((mf * p.theta).sin(), mf * (mf * p.theta).cos())
    };
    let g = idx.gamma();
    let dx = g * (dr * c * t - r_over_rho * s * dt);
    let dy = g * (dr * s * t + r_over_rho * c * dt);
    (dx, dy)
}

/// Evaluates every basis polynomial `Z_0 .. Z_{N-1}` of order `<= n_max` at `p`,
/// writing them into `out` in single-index order.
pub fn basis_values(n_max: u32, p: &DiskPoint, out: &mut [f64]) {
    let dim = basis_dimension(n_max);
    assert_eq!(out.len(), dim, "output slice must hold N(n) values");
    let x = 1.0 - 2.0 * p.rho * p.rho;
    let mut jac = Vec::with_capacity(n_max as usize / 2 + 1);
    for m_abs in 0..=n_max {
        let kmax = ((n_max - m_abs) / 2) as usize;
        jacobi_sequence(kmax, m_abs as f64, 0.0, x, &mut jac);
        let rho_m = p.rho.powi(m_abs as i32);
        let mf = m_abs as f64;
        let (cos_m, sin_m) = ((mf * p.theta).cos(), (mf * p.theta).sin());
        for (k, pk) in jac.iter().enumerate() {
            let n = m_abs + 2 * k as u32;
            let radial = parity_sign(k) * rho_m * pk;
            let np1 = n as f64 + 1.0;
            if m_abs == 0 {
                out[index_unchecked(n, 0)] = np1.sqrt() * radial;
            } else {
                let g = (2.0 * np1).sqrt();
                out[index_unchecked(n, m_abs as i32)] = g * radial * cos_m;
                out[index_unchecked(n, -(m_abs as i32))] = g * radial * sin_m;
            }
        }
    }
}

/// Gradients of every basis polynomial at `p`; `out[j] = (d/dx Z_j, d/dy Z_j)`.
pub fn basis_gradients(n_max: u32, p: &DiskPoint, out: &mut [(f64, f64)]) {
    let dim = basis_dimension(n_max);
    assert_eq!(out.len(), dim, "output slice must hold N(n) gradients");
    let x = 1.0 - 2.0 * p.rho * p.rho;
    let (c, s) = (p.theta.cos(), p.theta.sin());
    let mut jac = Vec::new();
    let mut djac = Vec::new();
    for m_abs in 0..=n_max {
        let kmax = ((n_max - m_abs) / 2) as usize;
        let mf = m_abs as f64;
        jacobi_sequence(kmax, mf, 0.0, x, &mut jac);
        if kmax > 0 {
            jacobi_sequence(kmax - 1, mf + 1.0, 1.0, x, &mut djac);
        }
        let rho_m = p.rho.powi(m_abs as i32);
        let rho_m1 = if m_abs == 0 {
            0.0
        } else {
            p.rho.powi(m_abs as i32 - 1)
        };
        let (cos_m, sin_m) = ((mf * p.theta).cos(), (mf * p.theta).sin());
        for k in 0..=kmax {
            let n = m_abs + 2 * k as u32;
            let sign = parity_sign(k);
            let dp = if k == 0 {
                0.0
            } else {
                (k as f64 + mf + 1.0) / 2.0 * djac[k - 1]
            };
            let dr = sign * (mf * rho_m1 * jac[k] - 4.0 * rho_m * p.rho * dp);
            let np1 = n as f64 + 1.0;
            if m_abs == 0 {
                let g = np1.sqrt();
                out[index_unchecked(n, 0)] = (g * dr * c, g * dr * s);
            } else {
                let g = (2.0 * np1).sqrt();
                let r_over_rho = sign * rho_m1 * jac[k];
                // cosine member: T = cos(m theta), dT = -m sin(m theta)
                let (t, dt) = (cos_m, -mf * sin_m);
                out[index_unchecked(n, m_abs as i32)] = (
                    g * (dr * c * t - r_over_rho * s * dt),
                    g * (dr * s * t + r_over_rho * c * dt),
                );
                // sine member: T = sin(m theta), dT = m cos(m theta)
                let (t, dt) = (sin_m, mf * cos_m);
                out[index_unchecked(n, -(m_abs as i32))] = (
                    g * (dr * c * t - r_over_rho * s * dt),
                    g * (dr * s * t + r_over_rho * c * dt),
                );
            }
        }
    }
}

#[inline]
fn index_unchecked(n: u32, m: i32) -> usize {
    ((n as i64 * (n as i64 + 2) + m as i64) / 2) as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn factorial(k: u32) -> f64 {
        (1..=k).map(|v| v as f64).product()
    }

    // explicit factorial sum; fine at low order
    fn radial_factorial_sum(n: u32, m: u32, rho: f64) -> f64 {
        (0..=(n - m) / 2)
            .map(|s| {
                let sign = if s % 2 == 0 { 1.0 } else { -1.0 };
                sign * factorial(n - s)
                    / (factorial(s) * factorial((n + m) / 2 - s) * factorial((n - m) / 2 - s))
                    * rho.powi((n - 2 * s) as i32)
            })
            .sum()
    }

    #[test]
    fn index_examples() {
        assert_eq!(index_from_nm(0, 0).unwrap().j, 0);
        assert_eq!(index_from_nm(2, 0).unwrap().j, 4);
        assert_eq!(index_from_nm(30, 30).unwrap().j, 495);
        let z = nm_from_index(1);
        assert_eq!((z.n, z.m), (1, -1));
        let z = nm_from_index(495);
        assert_eq!((z.n, z.m), (30, 30));
        assert_eq!(nm_from_index(0), ZernikeIndex { n: 0, m: 0, j: 0 });
    }

    #[test]
    fn invalid_indices_rejected() {
        assert!(matches!(
            index_from_nm(2, 1),
            Err(OcsError::InvalidIndex { .. })
        ));
        assert!(matches!(
            index_from_nm(2, 4),
            Err(OcsError::InvalidIndex { .. })
        ));
        assert!(matches!(
            index_from_nm(3, -5),
            Err(OcsError::InvalidIndex { .. })
        ));
        assert!(radial_eval(4, 1, 0.5).is_err());
    }

    #[test]
    fn exhaustive_round_trip_to_495() {
        for j in 0..=495 {
            let z = nm_from_index(j);
            assert_eq!(index_from_nm(z.n, z.m).unwrap().j, j);
        }
    }

    #[test]
    fn dimension_examples() {
        assert_eq!(basis_dimension(0), 1);
        assert_eq!(basis_dimension(10), 66);
        assert_eq!(basis_dimension(30), 496);
    }

    #[test]
    fn radial_examples() {
        assert_relative_eq!(radial_eval(5, 5, 0.5).unwrap(), 0.03125, epsilon = 1e-15);
        assert_relative_eq!(radial_eval(2, 0, 1.0).unwrap(), 1.0, epsilon = 1e-15);
        let oracle = radial_factorial_sum(4, 2, 0.7);
        assert_relative_eq!(radial_eval(4, 2, 0.7).unwrap(), oracle, epsilon = 1e-13);
    }

    #[test]
    fn radial_matches_factorial_sum_low_order() {
        for n in 0..=12u32 {
            for m in (n % 2..=n).step_by(2) {
                for i in 0..=20 {
                    let rho = i as f64 / 20.0;
                    let oracle = radial_factorial_sum(n, m, rho);
                    let value = radial_eval(n, m, rho).unwrap();
                    assert!((oracle - value).abs() < 1e-10, "n={n} m={m} rho={rho}");
                }
            }
        }
    }

    #[test]
    fn radial_order_30_bounded() {
        for i in 0..=10_000 {
            let rho = i as f64 / 10_000.0;
            let v = radial_eval(30, 0, rho).unwrap();
            assert!(v.abs() <= 1.0 + 1e-9, "rho={rho} value={v}");
        }
    }

    #[test]
    fn zernike_examples() {
        let piston = ZernikeIndex::from_j(0);
        assert_eq!(zernike_eval(piston, &DiskPoint::from_polar(0.3, 1.2)), 1.0);
        let tilt = index_from_nm(1, 1).unwrap();
        assert_relative_eq!(
            zernike_eval(tilt, &DiskPoint::from_polar(1.0, 0.0)),
            2.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn gradient_examples() {
        let p = DiskPoint::from_polar(0.4, 2.1);
        assert_eq!(zernike_gradient(ZernikeIndex::from_j(0), &p), (0.0, 0.0));
        let tilt = index_from_nm(1, 1).unwrap();
        for q in [
            p,
            DiskPoint::from_polar(0.0, 0.0),
            DiskPoint::from_polar(1.0, 4.0),
        ] {
            let (dx, dy) = zernike_gradient(tilt, &q);
            assert_relative_eq!(dx, 2.0, epsilon = 1e-14);
            assert_relative_eq!(dy, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn gradient_at_origin_matches_finite_difference() {
        let h = 1e-6;
        let origin = DiskPoint::from_polar(0.0, 0.0);
        for j in 0..66 {
            let idx = ZernikeIndex::from_j(j);
            let f = |x: f64, y: f64| zernike_eval(idx, &DiskPoint::from_cartesian(x, y));
            let fd = (
                (f(h, 0.0) - f(-h, 0.0)) / (2.0 * h),
                (f(0.0, h) - f(0.0, -h)) / (2.0 * h),
            );
            let (dx, dy) = zernike_gradient(idx, &origin);
            assert!(
                (dx - fd.0).abs() < 1e-6 && (dy - fd.1).abs() < 1e-6,
                "j={j}"
            );
        }
    }

    #[test]
    fn bulk_evaluation_matches_single() {
        let n = 9;
        let dim = basis_dimension(n);
        let mut vals = vec![0.0; dim];
        let mut grads = vec![(0.0, 0.0); dim];
        for p in [
            DiskPoint::from_polar(0.0, 0.0),
            DiskPoint::from_polar(0.37, 5.5),
            DiskPoint::from_polar(1.0, PI / 3.0),
        ] {
            basis_values(n, &p, &mut vals);
            basis_gradients(n, &p, &mut grads);
            for j in 0..dim {
                let idx = ZernikeIndex::from_j(j);
                assert_relative_eq!(vals[j], zernike_eval(idx, &p), epsilon = 1e-12);
                let g = zernike_gradient(idx, &p);
                assert_relative_eq!(grads[j].0, g.0, epsilon = 1e-10);
                assert_relative_eq!(grads[j].1, g.1, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn disk_point_conventions() {
        let o = DiskPoint::from_polar(0.0, 2.0);
        assert_eq!(o.theta, 0.0);
        let p = DiskPoint::from_polar(0.5, -PI / 2.0);
        assert_relative_eq!(p.theta, 1.5 * PI, epsilon = 1e-15);
        let q = DiskPoint::from_cartesian(0.0, -0.5);
        assert_relative_eq!(q.theta, p.theta, epsilon = 1e-15);
        assert!(DiskPoint::from_polar(1.0, 0.3).in_disk());
        assert!(!DiskPoint::from_cartesian(0.8, 0.8).in_disk());
    }
}
