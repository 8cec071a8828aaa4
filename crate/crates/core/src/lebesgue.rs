//! Lagrange fundamental polynomials and Lebesgue constants on the disk.
//!
//! The fundamental polynomials are expanded in the Zernike basis. With `A`
//! the elevation collocation matrix, `l_i(P_k) = sum_j A[k][j] C[j][i]`, so
//! the coefficient matrix `C` (column `i` for `l_i`) solves `A C = I`.
//! No determinants are formed.

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::collocation::build_elevation_matrix;
use crate::error::{OcsError, Result};
use crate::patterns::NodeSet;
use crate::zernike::{basis_dimension, basis_values, DiskPoint};

/// Zernike coefficients of the Lagrange fundamental polynomials of a node set.
#[derive(Clone, Debug)]
pub struct LagrangeBasis {
    /// Column `i` = coefficients of `l_i` in single-index order.
    pub coefficients: DMatrix<f64>,
    pub nodes: NodeSet,
    pub n: u32,
}

impl LagrangeBasis {
    pub fn dimension(&self) -> usize {
        self.coefficients.ncols()
    }

    /// Values `l_1(p) .. l_N(p)`.
    pub fn values(&self, p: &DiskPoint) -> Vec<f64> {
        let mut z = vec![0.0; self.dimension()];
        basis_values(self.n, p, &mut z);
        let z = nalgebra::DVector::from_vec(z);
        let l = self.coefficients.tr_mul(&z);
        l.iter().copied().collect()
    }

    /// Values of the Lebesgue function at a batch of points.
    fn lebesgue_batch(&self, points: &[DiskPoint]) -> Vec<f64> {
        let dim = self.dimension();
        let mut z = DMatrix::zeros(points.len(), dim);
        let mut row = vec![0.0; dim];
        for (r, p) in points.iter().enumerate() {
            basis_values(self.n, p, &mut row);
            for (c, v) in row.iter().enumerate() {
                z[(r, c)] = *v;
            }
        }
        let l = z * &self.coefficients;
        l.row_iter()
            .map(|r| r.iter().map(|v| v.abs()).sum())
            .collect()
    }
}

/// Assembles the Lagrange basis by solving `A C = I` with pivoted LU.
pub fn lagrange_basis(nodes: &NodeSet, n: u32) -> Result<LagrangeBasis> {
    let a = build_elevation_matrix(nodes, n)?;
    let dim = a.rows();
    let lu = a.entries.lu();
    let diag = lu.u().diagonal();
    let max = diag.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let min = diag.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
    let ratio = if max > 0.0 { min / max } else { 0.0 };
    if ratio <= f64::EPSILON * dim as f64 {
        return Err(OcsError::Singular { ratio });
    }
    let coefficients = lu
        .solve(&DMatrix::identity(dim, dim))
        .ok_or(OcsError::Singular { ratio })?;
    Ok(LagrangeBasis {
        coefficients,
        nodes: nodes.clone(),
        n,
    })
}

/// `sum_i |l_i(p)|`.
pub fn lebesgue_function(basis: &LagrangeBasis, p: &DiskPoint) -> f64 {
    basis.values(p).iter().map(|v| v.abs()).sum()
}

/// Polar evaluation mesh: `M + 1` Chebyshev-spaced radii `cos(i pi / 2M)`
/// (boundary circle and origin included, clustered at the rim) times `M`
/// uniform angles, `M = ceil(density * max(n, 1))`. Doubling the density
/// gives a superset of the previous mesh.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshSpec {
    pub density: f64,
    /// One level of local refinement around the discrete maximum.
    pub refine: bool,
    /// Global rotation of the mesh angles.
    pub rotation: f64,
}

impl Default for MeshSpec {
    fn default() -> Self {
        MeshSpec {
            density: 8.0,
            refine: true,
            rotation: 0.0,
        }
    }
}

/// Smallest admissible density factor.
pub const MIN_MESH_DENSITY: f64 = 4.0;

/// Local refinement grid: 10x finer spacing over +-1 coarse cell.
const REFINE_STEPS: usize = 10;

/// Mesh points (largest values first) that get a local refinement grid.
const REFINE_CANDIDATES: usize = 32;

impl MeshSpec {
    pub fn with_density(density: f64) -> Self {
        MeshSpec {
            density,
            ..MeshSpec::default()
        }
    }

    fn resolution(&self, n: u32) -> usize {
        ((self.density * n.max(1) as f64).ceil() as usize).max(4)
    }

    pub fn radii(&self, n: u32) -> Vec<f64> {
        let m = self.resolution(n);
        (0..=m)
            .map(|i| {
                if i == m {
                    0.0
                } else {
                    (i as f64 * PI / (2 * m) as f64).cos()
                }
            })
            .collect()
    }

    pub fn angles(&self, n: u32) -> Vec<f64> {
        let m = self.resolution(n);
        (0..m)
            .map(|j| self.rotation + TAU * j as f64 / m as f64)
            .collect()
    }

    /// Number of mesh points (the origin counted once).
    pub fn size(&self, n: u32) -> usize {
        let m = self.resolution(n);
        m * m + 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.density.is_nan() || self.density < MIN_MESH_DENSITY {
            return Err(OcsError::Domain(format!(
                "mesh density factor must be >= {MIN_MESH_DENSITY}, got {}",
                self.density
            )));
        }
        Ok(())
    }
}

/// Result of a Lebesgue-constant estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LebesgueReport {
    pub n: u32,
    #[serde(rename = "N")]
    pub dimension: usize,
    /// Refined estimate of the Lebesgue constant.
    pub lambda: f64,
    /// Maximum over the mesh before refinement.
    pub mesh_max: f64,
    pub argmax_point: DiskPoint,
    pub mesh_size: usize,
}

/// Lebesgue function over the mesh, one `(point, value)` per mesh point.
pub fn mesh_values(basis: &LagrangeBasis, mesh: &MeshSpec) -> Result<Vec<(DiskPoint, f64)>> {
    mesh.validate()?;
    let radii = mesh.radii(basis.n);
    let angles = mesh.angles(basis.n);
    let rows: Vec<Vec<(DiskPoint, f64)>> = radii
        .par_iter()
        .map(|&rho| {
            let points: Vec<DiskPoint> = if rho == 0.0 {
                vec![DiskPoint::from_polar(0.0, 0.0)]
            } else {
                angles
                    .iter()
                    .map(|&t| DiskPoint::from_polar(rho, t))
                    .collect()
            };
            let values = basis.lebesgue_batch(&points);
            points.into_iter().zip(values).collect()
        })
        .collect();
    Ok(rows.into_iter().flatten().collect())
}

/// Estimates the Lebesgue constant: maximum over the mesh, then (optionally)
/// over 10x finer local grids around the largest mesh values.
pub fn lebesgue_constant(nodes: &NodeSet, n: u32, mesh: &MeshSpec) -> Result<LebesgueReport> {
    mesh.validate()?;
    let basis = lagrange_basis(nodes, n)?;
    lebesgue_constant_for_basis(&basis, mesh)
}

pub fn lebesgue_constant_for_basis(
    basis: &LagrangeBasis,
    mesh: &MeshSpec,
) -> Result<LebesgueReport> {
    let n = basis.n;
    let values = mesh_values(basis, mesh)?;
    let (mut best_point, mut best) = (values[0].0, values[0].1);
    for &(p, v) in &values[1..] {
        if v > best {
            best = v;
            best_point = p;
        }
    }
    let mesh_max = best;
    if mesh.refine {
        let radii = mesh.radii(n);
        let d_theta = TAU / mesh.resolution(n) as f64;
        let steps = REFINE_STEPS as i64;
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[b].1.total_cmp(&values[a].1));
        let mut local = Vec::with_capacity(REFINE_CANDIDATES * (2 * REFINE_STEPS + 1).pow(2));
        for &idx in order.iter().take(REFINE_CANDIDATES) {
            let center = values[idx].0;
            // radial cell around the candidate: widest neighbouring gap
            let pos = radii.iter().position(|&r| r == center.rho).unwrap_or(0);
            let gap_in = if pos + 1 < radii.len() {
                radii[pos] - radii[pos + 1]
            } else {
                0.0
            };
            let gap_out = if pos > 0 {
                radii[pos - 1] - radii[pos]
            } else {
                0.0
            };
            let d_rho = gap_in.max(gap_out);
            for a in -steps..=steps {
                let rho = center.rho + d_rho * a as f64 / steps as f64;
                if !(0.0..=1.0).contains(&rho) {
                    continue;
                }
                for b in -steps..=steps {
                    let theta = center.theta + d_theta * b as f64 / steps as f64;
                    local.push(DiskPoint::from_polar(rho, theta));
                }
            }
        }
        let local_values = basis.lebesgue_batch(&local);
        for (p, v) in local.into_iter().zip(local_values) {
            if v > best {
                best = v;
                best_point = p;
            }
        }
    }
    Ok(LebesgueReport {
        n,
        dimension: basis_dimension(n),
        lambda: best,
        mesh_max,
        argmax_point: best_point,
        mesh_size: mesh.size(n),
    })
}
