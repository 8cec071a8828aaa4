//! Node sets on the unit disk.
//!
//! The main construction is the concentric ring ("Bos array") layout: for
//! maximal radial order `n` there are `k = floor(n/2) + 1` rings and ring `i`
//! (1-based, outermost first) carries `2n + 5 - 4i` equally spaced nodes,
//! which adds up to exactly `N(n)` nodes. Ring radii come from a cubic in the
//! Chebyshev zeros (the OCS layout) or from the Carnicer power law. A golden
//! angle spiral is provided as a stand-in baseline.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{OcsError, Result};
use crate::zernike::{basis_dimension, DiskPoint};

/// Coefficients of the radius cubic `r = a1 z + a2 z^2 + a3 z^3`.
pub const OCS_RADIUS_CUBIC: [f64; 3] = [1.1565, -0.76535, 0.60517];

/// Largest order for which the radius cubic was fitted.
pub const OCS_FITTED_MAX_ORDER: u32 = 30;

/// Default Carnicer exponent.
pub const CARNICER_DEFAULT_EXPONENT: f64 = 1.46;

/// Where a node set came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Ocs,
    Spiral,
    Carnicer,
    Custom,
    Perturbed,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Provenance::Ocs => "ocs",
            Provenance::Spiral => "spiral",
            Provenance::Carnicer => "carnicer",
            Provenance::Custom => "custom",
            Provenance::Perturbed => "perturbed",
        };
        f.write_str(s)
    }
}

/// One ring of a concentric pattern.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ring {
    pub radius: f64,
    pub count: usize,
    /// Angle of the first node, in `[0, 2pi / count)`.
    pub phase: f64,
}

/// Concentric ring layout, outermost ring first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RingPattern {
    pub max_order: u32,
    pub rings: Vec<Ring>,
    pub source: Provenance,
}

/// Flattened node list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeSet {
    pub points: Vec<DiskPoint>,
    pub source: Provenance,
}

impl NodeSet {
    pub fn new(points: Vec<DiskPoint>, source: Provenance) -> Self {
        NodeSet { points, source }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Copy without the node closest to the origin (ties: the last such node).
    pub fn without_innermost(&self) -> NodeSet {
        let mut points = self.points.clone();
        if let Some(pos) = innermost_position(&points) {
            points.remove(pos);
        }
        NodeSet {
            points,
            source: self.source,
        }
    }
}

fn innermost_position(points: &[DiskPoint]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, p) in points.iter().enumerate() {
        match best {
            Some((_, r)) if p.rho > r => {}
            _ => best = Some((i, p.rho)),
        }
    }
    best.map(|(i, _)| i)
}

/// Number of rings for order `n`.
pub fn ring_count(n: u32) -> usize {
    (n / 2 + 1) as usize
}

/// Node count of ring `i` (1-based): `2n + 5 - 4i`.
pub fn ring_node_count(n: u32, i: usize) -> usize {
    (2 * n as usize + 5) - 4 * i
}

/// Zero `cos((2j - 1) pi / (2(n + 1)))` of the Chebyshev polynomial of degree `n + 1`.
///
/// The middle zero for even `n` is returned as exactly 0.
pub fn chebyshev_zero(j: usize, n: u32) -> f64 {
    let numerator = 2 * j - 1;
    let denominator = 2 * (n as usize + 1);
    if 2 * numerator == denominator {
        return 0.0;
    }
    (numerator as f64 * PI / denominator as f64).cos()
}

/// Radius cubic evaluated at a Chebyshev zero.
pub fn radius_cubic(z: f64, coefficients: &[f64; 3]) -> f64 {
    z * (coefficients[0] + z * (coefficients[1] + z * coefficients[2]))
}

/// OCS ring radii for order `n`, outermost first.
pub fn ocs_radii(n: u32) -> Result<Vec<f64>> {
    if n < 1 {
        return Err(OcsError::Domain(format!(
            "OCS radii need order >= 1, got {n}"
        )));
    }
    if n > OCS_FITTED_MAX_ORDER {
        log::warn!("radius formula was fitted for orders <= {OCS_FITTED_MAX_ORDER}; extrapolating to n = {n}");
    }
    Ok((1..=ring_count(n))
        .map(|j| radius_cubic(chebyshev_zero(j, n), &OCS_RADIUS_CUBIC))
        .collect())
}

/// Ring pattern with the standard node counts, the given radii and zero phases.
pub fn pattern_with_radii(n: u32, radii: &[f64], source: Provenance) -> Result<RingPattern> {
    if n < 1 {
        return Err(OcsError::Domain(format!(
            "ring patterns need order >= 1, got {n}"
        )));
    }
    let k = ring_count(n);
    if radii.len() != k {
        return Err(OcsError::SizeMismatch {
            expected: k,
            actual: radii.len(),
            context: "ring radii",
        });
    }
    let rings = radii
        .iter()
        .enumerate()
        .map(|(i, &radius)| Ring {
            radius,
            count: ring_node_count(n, i + 1),
            phase: 0.0,
        })
        .collect();
    Ok(RingPattern {
        max_order: n,
        rings,
        source,
    })
}

/// The OCS pattern for order `n`: fitted radii, one node at angle 0 on every ring.
pub fn ocs_pattern(n: u32) -> Result<RingPattern> {
    pattern_with_radii(n, &ocs_radii(n)?, Provenance::Ocs)
}

/// Ring pattern with Carnicer radii `1 - (2(j-1)/n)^a`.
pub fn carnicer_pattern(n: u32, exponent: f64) -> Result<RingPattern> {
    if !(exponent > 1.0 && exponent < 2.0) {
        return Err(OcsError::Domain(format!(
            "Carnicer exponent must lie in (1, 2), got {exponent}"
        )));
    }
    if n < 1 {
        return Err(OcsError::Domain(format!(
            "ring patterns need order >= 1, got {n}"
        )));
    }
    let radii: Vec<f64> = (1..=ring_count(n))
        .map(|j| 1.0 - (2.0 * (j as f64 - 1.0) / n as f64).powf(exponent))
        .collect();
    pattern_with_radii(n, &radii, Provenance::Carnicer)
}

/// Places the nodes of every ring, outermost ring first and angles ascending.
pub fn realize_nodes(pattern: &RingPattern) -> NodeSet {
    let mut points = Vec::with_capacity(pattern.rings.iter().map(|r| r.count).sum());
    for ring in &pattern.rings {
        if ring.radius == 0.0 {
            // every node of a zero-radius ring coincides with the origin
            points.extend((0..ring.count).map(|_| DiskPoint::from_polar(0.0, 0.0)));
            continue;
        }
        for s in 0..ring.count {
            let theta = ring.phase + TAU * s as f64 / ring.count as f64;
            points.push(DiskPoint::from_polar(ring.radius, theta));
        }
    }
    NodeSet {
        points,
        source: pattern.source,
    }
}

/// Golden-angle (Vogel) spiral with `N(n)` points: `rho_t = sqrt(t/N)`,
/// `theta_t = t * 2pi (1 - 1/phi)`, `t = 1..N`.
///
/// This is a documented stand-in baseline, not a reproduction of any
/// particular published spiral layout.
pub fn spiral_pattern(n: u32) -> Result<NodeSet> {
    if n < 1 {
        return Err(OcsError::Domain(format!(
            "spiral needs order >= 1, got {n}"
        )));
    }
    let count = basis_dimension(n);
    let golden = (1.0 + 5f64.sqrt()) / 2.0;
    let increment = TAU * (1.0 - 1.0 / golden);
    let points = (1..=count)
        .map(|t| {
            let rho = (t as f64 / count as f64).sqrt();
            DiskPoint::from_polar(rho.min(1.0), t as f64 * increment)
        })
        .collect();
    Ok(NodeSet {
        points,
        source: Provenance::Spiral,
    })
}

/// Sets the phase of one ring (0-based index), keeping the equal spacing.
pub fn rotate_ring(pattern: &RingPattern, ring_index: usize, alpha: f64) -> Result<RingPattern> {
    let rings = pattern.rings.len();
    let ring = pattern
        .rings
        .get(ring_index)
        .ok_or(OcsError::RingOutOfRange {
            index: ring_index,
            rings,
        })?;
    let period = TAU / ring.count as f64;
    if !(0.0..period).contains(&alpha) {
        return Err(OcsError::Domain(format!(
            "ring phase must lie in [0, {period}), got {alpha}"
        )));
    }
    let mut rotated = pattern.clone();
    rotated.rings[ring_index].phase = alpha;
    Ok(rotated)
}

/// How [`perturb`] moves nodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PerturbMode {
    /// Scale every ring radius by `1 + u * magnitude`, one `u ~ U[-1, 1]` per ring.
    Radii,
    /// Move every node independently by a uniform vector of length `<= magnitude`.
    Points,
}

impl FromStr for PerturbMode {
    type Err = OcsError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "radii" => Ok(PerturbMode::Radii),
            "points" => Ok(PerturbMode::Points),
            other => Err(OcsError::Domain(format!(
                "unknown perturbation mode '{other}'"
            ))),
        }
    }
}

/// Randomly perturbs a node set; results are clipped to the closed disk.
///
/// In radii mode rings are recognized as groups of nodes sharing the same
/// radius, in order of first appearance.
pub fn perturb(nodes: &NodeSet, mode: PerturbMode, magnitude: f64, seed: u64) -> Result<NodeSet> {
    if magnitude.is_nan() || magnitude < 0.0 {
        return Err(OcsError::Domain(format!(
            "perturbation magnitude must be non-negative, got {magnitude}"
        )));
    }
    if magnitude == 0.0 {
        return Ok(nodes.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = match mode {
        PerturbMode::Radii => {
            let mut scales: Vec<(u64, f64)> = Vec::new();
            nodes
                .points
                .iter()
                .map(|p| {
                    let key = p.rho.to_bits();
                    let scale = match scales.iter().find(|(k, _)| *k == key) {
                        Some(&(_, s)) => s,
                        None => {
                            let s = 1.0 + rng.gen_range(-1.0..=1.0) * magnitude;
                            scales.push((key, s));
                            s
                        }
                    };
                    DiskPoint::from_polar((p.rho * scale).clamp(0.0, 1.0), p.theta)
                })
                .collect()
        }
        PerturbMode::Points => nodes
            .points
            .iter()
            .map(|p| {
                // uniform in the disk of radius `magnitude`
                let r = magnitude * rng.gen::<f64>().sqrt();
                let phi = rng.gen_range(0.0..TAU);
                clip_to_disk(p.x + r * phi.cos(), p.y + r * phi.sin())
            })
            .collect(),
    };
    Ok(NodeSet {
        points,
        source: Provenance::Perturbed,
    })
}

fn clip_to_disk(x: f64, y: f64) -> DiskPoint {
    let rho = x.hypot(y);
    if rho > 1.0 {
        DiskPoint::from_polar(1.0, y.atan2(x))
    } else {
        DiskPoint::from_cartesian(x, y)
    }
}
