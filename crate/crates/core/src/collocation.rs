//! Collocation matrices of the Zernike basis and their conditioning.
//!
//! Elevation mode: `A[i][j] = Z_j(P_i)`, square `N x N`.
//! Slope mode: two rows per node (d/dx then d/dy), columns `Z_1 .. Z_{N-1}`
//! (the piston has zero gradient), built on `N - 1` nodes.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{OcsError, Result};
use crate::patterns::{ocs_pattern, realize_nodes, rotate_ring, NodeSet, Provenance};
use crate::zernike::{basis_dimension, basis_gradients, basis_values};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixMode {
    Elevation,
    Slope,
}

impl fmt::Display for MatrixMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MatrixMode::Elevation => "elevation",
            MatrixMode::Slope => "slope",
        })
    }
}

impl FromStr for MatrixMode {
    type Err = OcsError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "elevation" => Ok(MatrixMode::Elevation),
            "slope" => Ok(MatrixMode::Slope),
            other => Err(OcsError::Domain(format!("unknown matrix mode '{other}'"))),
        }
    }
}

/// Dense collocation matrix with the metadata needed to interpret it.
#[derive(Clone, Debug, PartialEq)]
pub struct CollocationMatrix {
    pub entries: DMatrix<f64>,
    pub mode: MatrixMode,
    pub max_order: u32,
    pub provenance: Provenance,
}

impl CollocationMatrix {
    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn cols(&self) -> usize {
        self.entries.ncols()
    }
}

/// Builds the square elevation matrix on exactly `N(n)` nodes.
pub fn build_elevation_matrix(nodes: &NodeSet, n: u32) -> Result<CollocationMatrix> {
    let dim = basis_dimension(n);
    if nodes.len() != dim {
        return Err(OcsError::SizeMismatch {
            expected: dim,
            actual: nodes.len(),
            context: "elevation matrix needs N(n) nodes",
        });
    }
    let rows: Vec<Vec<f64>> = nodes
        .points
        .par_iter()
        .map(|p| {
            let mut row = vec![0.0; dim];
            basis_values(n, p, &mut row);
            row
        })
        .collect();
    let entries = DMatrix::from_fn(dim, dim, |i, j| rows[i][j]);
    Ok(CollocationMatrix {
        entries,
        mode: MatrixMode::Elevation,
        max_order: n,
        provenance: nodes.source,
    })
}

/// Builds the `2(N-1) x (N-1)` slope matrix on exactly `N(n) - 1` nodes.
///
/// Use [`NodeSet::without_innermost`] to drop a node from a critical pattern.
pub fn build_slope_matrix(nodes: &NodeSet, n: u32) -> Result<CollocationMatrix> {
    let dim = basis_dimension(n);
    if n == 0 || nodes.len() != dim - 1 {
        return Err(OcsError::SizeMismatch {
            expected: dim - 1,
            actual: nodes.len(),
            context: "slope matrix needs N(n) - 1 nodes and n >= 1",
        });
    }
    let grads: Vec<Vec<(f64, f64)>> = nodes
        .points
        .par_iter()
        .map(|p| {
            let mut g = vec![(0.0, 0.0); dim];
            basis_gradients(n, p, &mut g);
            g
        })
        .collect();
    let entries = DMatrix::from_fn(2 * nodes.len(), dim - 1, |r, c| {
        let g = grads[r / 2][c + 1];
        if r % 2 == 0 {
            g.0
        } else {
            g.1
        }
    });
    Ok(CollocationMatrix {
        entries,
        mode: MatrixMode::Slope,
        max_order: n,
        provenance: nodes.source,
    })
}

/// Conditioning summary of a collocation matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub n: u32,
    pub mode: MatrixMode,
    /// `sigma_max / sigma_min`; `+inf` (JSON `null`) when singular.
    pub kappa2: f64,
    /// `||A||_inf ||A^-1||_inf`, square matrices only.
    pub kappa_inf: Option<f64>,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub pattern: Provenance,
}

impl ConditionReport {
    pub fn is_singular(&self) -> bool {
        !self.kappa2.is_finite()
    }
}

/// Singular values below `sigma_max * eps * max(rows, cols)` are treated as zero.
pub fn numerical_zero_threshold(sigma_max: f64, rows: usize, cols: usize) -> f64 {
    sigma_max * f64::EPSILON * rows.max(cols) as f64
}

/// Extreme singular values `(sigma_min, sigma_max)` of a dense matrix.
pub fn extreme_singular_values(m: &DMatrix<f64>) -> (f64, f64) {
    let s = m.clone().singular_values();
    let max = s.iter().cloned().fold(0.0, f64::max);
    let min = s.iter().cloned().fold(f64::INFINITY, f64::min);
    (min, max)
}

/// Spectral condition number, `+inf` for numerically singular matrices.
pub fn kappa2(m: &DMatrix<f64>) -> f64 {
    let (min, max) = extreme_singular_values(m);
    if min <= numerical_zero_threshold(max, m.nrows(), m.ncols()) {
        f64::INFINITY
    } else {
        max / min
    }
}

fn inf_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Full conditioning report (`kappa2` from the SVD, `kappa_inf` for square matrices).
pub fn condition_numbers(a: &CollocationMatrix) -> Result<ConditionReport> {
    if a.rows() == 0 || a.cols() == 0 {
        return Err(OcsError::Domain("empty collocation matrix".into()));
    }
    let (sigma_min, sigma_max) = extreme_singular_values(&a.entries);
    let singular = sigma_min <= numerical_zero_threshold(sigma_max, a.rows(), a.cols());
    let kappa2 = if singular {
        f64::INFINITY
    } else {
        sigma_max / sigma_min
    };
    let kappa_inf = if a.entries.is_square() {
        Some(match a.entries.clone().try_inverse() {
            Some(inv) if !singular => inf_norm(&a.entries) * inf_norm(&inv),
            _ => f64::INFINITY,
        })
    } else {
        None
    };
    Ok(ConditionReport {
        n: a.max_order,
        mode: a.mode,
        kappa2,
        kappa_inf,
        sigma_min,
        sigma_max,
        pattern: a.provenance,
    })
}

/// LU factorization of a square elevation matrix, reusable across right-hand sides.
pub struct Interpolator {
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    dim: usize,
}

impl Interpolator {
    pub fn new(a: &CollocationMatrix) -> Result<Self> {
        if a.mode != MatrixMode::Elevation || !a.entries.is_square() {
            return Err(OcsError::WrongMode {
                expected: "square elevation matrix",
            });
        }
        let dim = a.rows();
        let lu = a.entries.clone().lu();
        let diag = lu.u().diagonal();
        let max = diag.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let min = diag.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
        let ratio = if max > 0.0 { min / max } else { 0.0 };
        if ratio <= f64::EPSILON * dim as f64 {
            return Err(OcsError::Singular { ratio });
        }
        Ok(Interpolator { lu, dim })
    }

    /// Zernike coefficients (ordered by single index) reproducing `samples` at the nodes.
    pub fn solve(&self, samples: &[f64]) -> Result<Vec<f64>> {
        if samples.len() != self.dim {
            return Err(OcsError::SizeMismatch {
                expected: self.dim,
                actual: samples.len(),
                context: "interpolation samples",
            });
        }
        let b = DVector::from_column_slice(samples);
        let x = self.lu.solve(&b).ok_or(OcsError::Singular { ratio: 0.0 })?;
        Ok(x.iter().copied().collect())
    }
}

/// Solves `A c = samples` for a square elevation matrix by pivoted LU.
pub fn interpolate(a: &CollocationMatrix, samples: &[f64]) -> Result<Vec<f64>> {
    Interpolator::new(a)?.solve(samples)
}

/// Least-squares fit of the non-piston coefficients to interleaved slope samples
/// `(dx_1, dy_1, dx_2, dy_2, ...)`, by Householder QR.
pub fn fit_slopes(a: &CollocationMatrix, slope_samples: &[f64]) -> Result<Vec<f64>> {
    if a.mode != MatrixMode::Slope {
        return Err(OcsError::WrongMode {
            expected: "slope matrix",
        });
    }
    if slope_samples.len() != a.rows() {
        return Err(OcsError::SizeMismatch {
            expected: a.rows(),
            actual: slope_samples.len(),
            context: "slope samples",
        });
    }
    let cols = a.cols();
    let qr = a.entries.clone().qr();
    let r = qr.r();
    let diag: Vec<f64> = r.diagonal().iter().map(|v| v.abs()).collect();
    let max = diag.iter().cloned().fold(0.0, f64::max);
    let tol = max * f64::EPSILON * a.rows().max(cols) as f64;
    let rank = diag.iter().filter(|&&d| d > tol).count();
    if rank < cols {
        return Err(OcsError::RankDeficient { rank, cols });
    }
    let mut b = DVector::from_column_slice(slope_samples);
    qr.q_tr_mul(&mut b);
    let rhs = b.rows(0, cols).into_owned();
    let x = r
        .solve_upper_triangular(&rhs)
        .ok_or(OcsError::RankDeficient { rank, cols })?;
    Ok(x.iter().copied().collect())
}

/// Rotates the outermost ring of OCS(n) by each angle and returns the largest
/// relative change of `kappa2` against the unrotated pattern.
pub fn gram_rotation_invariance_check(n: u32, alphas: &[f64]) -> Result<f64> {
    let base = ocs_pattern(n)?;
    let reference = kappa2(&build_elevation_matrix(&realize_nodes(&base), n)?.entries);
    let mut worst: f64 = 0.0;
    for &alpha in alphas {
        let rotated = rotate_ring(&base, 0, alpha)?;
        let k = kappa2(&build_elevation_matrix(&realize_nodes(&rotated), n)?.entries);
        worst = worst.max((k - reference).abs() / reference);
    }
    Ok(worst)
}
