//! Experiment drivers: conditioning tables, coefficient recovery, ring
//! rotation and perturbation sweeps, slope conditioning and Lebesgue growth.
//!
//! Every driver is a pure function of its arguments. Randomized drivers draw
//! one sub-seed per trial from a master generator before any work is
//! scheduled, so results do not depend on the rayon worker count.

use std::f64::consts::TAU;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::collocation::{
    build_elevation_matrix, build_slope_matrix, condition_numbers, kappa2, ConditionReport,
    Interpolator,
};
use crate::error::{OcsError, Result};
use crate::lebesgue::{lebesgue_constant, MeshSpec};
use crate::patterns::{
    carnicer_pattern, ocs_pattern, perturb, realize_nodes, rotate_ring, spiral_pattern, NodeSet,
    PerturbMode, CARNICER_DEFAULT_EXPONENT,
};

/// Node layouts the experiments can be run on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PatternKind {
    Ocs,
    /// Golden-angle spiral stand-in baseline.
    Spiral,
    /// Carnicer radii with the default exponent.
    Carnicer,
}

impl PatternKind {
    pub fn nodes(&self, n: u32) -> Result<NodeSet> {
        match self {
            PatternKind::Ocs => Ok(realize_nodes(&ocs_pattern(n)?)),
            PatternKind::Spiral => spiral_pattern(n),
            PatternKind::Carnicer => Ok(realize_nodes(&carnicer_pattern(
                n,
                CARNICER_DEFAULT_EXPONENT,
            )?)),
        }
    }
}

impl fmt::Display for PatternKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PatternKind::Ocs => "ocs",
            PatternKind::Spiral => "spiral",
            PatternKind::Carnicer => "carnicer",
        })
    }
}

impl FromStr for PatternKind {
    type Err = OcsError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ocs" => Ok(PatternKind::Ocs),
            "spiral" => Ok(PatternKind::Spiral),
            "carnicer" => Ok(PatternKind::Carnicer),
            other => Err(OcsError::Domain(format!("unknown pattern '{other}'"))),
        }
    }
}

/// Settings shared by the experiment drivers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub id: String,
    pub orders: Vec<u32>,
    pub pattern: PatternKind,
    pub trials: usize,
    pub seed: u64,
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(OcsError::Domain("trials must be >= 1".into()));
        }
        if self.orders.is_empty() {
            return Err(OcsError::Domain("at least one order is required".into()));
        }
        if let Some(&n) = self.orders.iter().find(|&&n| n < 1) {
            return Err(OcsError::Domain(format!("orders must be >= 1, got {n}")));
        }
        Ok(())
    }
}

fn trial_seeds(seed: u64, count: usize) -> Vec<u64> {
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| master.gen()).collect()
}

/// Elevation-matrix conditioning for every `(order, pattern)` pair, orders
/// outermost in the iteration. Singular layouts report `kappa2 = inf`.
pub fn run_condition_table(
    orders: &[u32],
    patterns: &[PatternKind],
) -> Result<Vec<ConditionReport>> {
    let jobs: Vec<(u32, PatternKind)> = orders
        .iter()
        .flat_map(|&n| patterns.iter().map(move |&p| (n, p)))
        .collect();
    jobs.par_iter()
        .map(|&(n, pattern)| condition_numbers(&build_elevation_matrix(&pattern.nodes(n)?, n)?))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryStats {
    pub n: u32,
    pub pattern: PatternKind,
    pub trials: usize,
    pub rms_mean: f64,
    pub rms_std: f64,
}

/// Root mean square of the coefficient errors over all modes.
pub fn rms_error(recovered: &[f64], exact: &[f64]) -> f64 {
    let sum: f64 = recovered
        .iter()
        .zip(exact)
        .map(|(a, b)| (a - b).powi(2))
        .sum();
    (sum / exact.len() as f64).sqrt()
}

fn mean_and_std(values: &[f64]) -> (f64, f64) {
    let count = values.len() as f64;
    let mean = values.iter().sum::<f64>() / count;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1.0);
    (mean, var.sqrt())
}

/// Draws coefficients uniform in `[-1, 1]^N`, samples the expansion at the
/// pattern nodes, interpolates, and summarizes the RMS coefficient error.
pub fn run_recovery_experiment(
    n: u32,
    trials: usize,
    seed: u64,
    pattern: PatternKind,
) -> Result<RecoveryStats> {
    if trials < 1 {
        return Err(OcsError::Domain("trials must be >= 1".into()));
    }
    let a = build_elevation_matrix(&pattern.nodes(n)?, n)?;
    let interp = Interpolator::new(&a)?;
    let dim = a.cols();
    let errors: Vec<f64> = trial_seeds(seed, trials)
        .par_iter()
        .map(|&s| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let exact: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let samples = &a.entries * DVector::from_column_slice(&exact);
            let recovered = interp.solve(samples.as_slice())?;
            Ok(rms_error(&recovered, &exact))
        })
        .collect::<Result<_>>()?;
    let (rms_mean, rms_std) = mean_and_std(&errors);
    Ok(RecoveryStats {
        n,
        pattern,
        trials,
        rms_mean,
        rms_std,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationRow {
    pub n: u32,
    /// 1-based, outermost ring first.
    pub ring: usize,
    pub radius: f64,
    pub count: usize,
    pub baseline_kappa2: f64,
    pub max_abs_change: f64,
    pub max_rel_change: f64,
}

/// Rotates each OCS ring in turn through `alphas_per_ring` phases spread over
/// `[0, 2pi / count)` and records the largest change of `kappa2`.
pub fn run_rotation_sweep(n: u32, alphas_per_ring: usize) -> Result<Vec<RotationRow>> {
    if alphas_per_ring < 1 {
        return Err(OcsError::Domain("need at least one phase per ring".into()));
    }
    let base = ocs_pattern(n)?;
    let baseline = kappa2(&build_elevation_matrix(&realize_nodes(&base), n)?.entries);
    base.rings
        .iter()
        .enumerate()
        .map(|(i, ring)| {
            let period = TAU / ring.count as f64;
            let changes: Vec<f64> = (0..alphas_per_ring)
                .into_par_iter()
                .map(|s| {
                    let alpha = period * s as f64 / alphas_per_ring as f64;
                    let rotated = rotate_ring(&base, i, alpha)?;
                    let k = kappa2(&build_elevation_matrix(&realize_nodes(&rotated), n)?.entries);
                    Ok((k - baseline).abs())
                })
                .collect::<Result<_>>()?;
            let max_abs_change = changes.iter().cloned().fold(0.0, f64::max);
            Ok(RotationRow {
                n,
                ring: i + 1,
                radius: ring.radius,
                count: ring.count,
                baseline_kappa2: baseline,
                max_abs_change,
                max_rel_change: max_abs_change / baseline,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationPoint {
    pub n: u32,
    pub mode: PerturbMode,
    pub magnitude: f64,
    pub trials: usize,
    /// Worst `kappa2` over the trials (`inf` if some trial was singular).
    pub max_kappa2: f64,
    pub mean_kappa2: f64,
    pub baseline_kappa2: f64,
}

/// Default magnitude grid of the perturbation sweep.
pub const DEFAULT_MAGNITUDES: [f64; 5] = [0.0, 1e-5, 1e-4, 1e-3, 1e-2];

/// `kappa2` of perturbed OCS(n) layouts for each magnitude and both modes.
pub fn run_perturbation_sweep(
    n: u32,
    magnitudes: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<PerturbationPoint>> {
    if trials < 1 {
        return Err(OcsError::Domain("trials must be >= 1".into()));
    }
    if magnitudes.iter().any(|m| m.is_nan() || *m < 0.0)
        || magnitudes.windows(2).any(|w| w[1] < w[0])
    {
        return Err(OcsError::Domain(
            "magnitudes must be non-negative and ascending".into(),
        ));
    }
    let nodes = realize_nodes(&ocs_pattern(n)?);
    let baseline = kappa2(&build_elevation_matrix(&nodes, n)?.entries);
    let mut points = Vec::new();
    let modes = [PerturbMode::Radii, PerturbMode::Points];
    let seeds = trial_seeds(seed, modes.len() * magnitudes.len() * trials);
    for (mi, &mode) in modes.iter().enumerate() {
        for (gi, &magnitude) in magnitudes.iter().enumerate() {
            let offset = (mi * magnitudes.len() + gi) * trials;
            let values: Vec<f64> = seeds[offset..offset + trials]
                .par_iter()
                .map(|&s| {
                    let moved = perturb(&nodes, mode, magnitude, s)?;
                    Ok(kappa2(&build_elevation_matrix(&moved, n)?.entries))
                })
                .collect::<Result<_>>()?;
            let max_kappa2 = values.iter().cloned().fold(0.0, f64::max);
            let mean_kappa2 = values.iter().sum::<f64>() / values.len() as f64;
            points.push(PerturbationPoint {
                n,
                mode,
                magnitude,
                trials,
                max_kappa2,
                mean_kappa2,
                baseline_kappa2: baseline,
            });
        }
    }
    Ok(points)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeRow {
    pub n: u32,
    pub pattern: PatternKind,
    pub rows: usize,
    pub cols: usize,
    pub kappa2: f64,
}

/// Slope-matrix `kappa2` with the innermost node of each layout removed.
pub fn run_slope_condition_curve(
    orders: &[u32],
    patterns: &[PatternKind],
) -> Result<Vec<SlopeRow>> {
    let jobs: Vec<(u32, PatternKind)> = orders
        .iter()
        .flat_map(|&n| patterns.iter().map(move |&p| (n, p)))
        .collect();
    jobs.par_iter()
        .map(|&(n, pattern)| {
            let nodes = pattern.nodes(n)?.without_innermost();
            let s = build_slope_matrix(&nodes, n)?;
            Ok(SlopeRow {
                n,
                pattern,
                rows: s.rows(),
                cols: s.cols(),
                kappa2: kappa2(&s.entries),
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LebesgueRow {
    pub n: u32,
    #[serde(rename = "N")]
    pub dimension: usize,
    pub lambda: f64,
}

/// Least-squares line `y = intercept + slope x` with its coefficient of determination.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> LinearFit {
    let count = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / count;
    let my = ys.iter().sum::<f64>() / count;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    LinearFit {
        slope,
        intercept,
        r_squared,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LebesgueCurve {
    pub rows: Vec<LebesgueRow>,
    /// Fit of lambda against N over the orders `>= 1`.
    pub fit: Option<LinearFit>,
}

/// Largest order the Lebesgue curve accepts unless the caller raises it.
pub const DEFAULT_LEBESGUE_MAX_ORDER: u32 = 25;

/// Lebesgue constants of OCS(n) for each order; order 0 is the single node at
/// the origin (constant interpolation, `lambda = 1`).
pub fn run_lebesgue_curve(
    orders: &[u32],
    mesh: &MeshSpec,
    max_order: u32,
) -> Result<LebesgueCurve> {
    if let Some(&n) = orders.iter().find(|&&n| n > max_order) {
        return Err(OcsError::Domain(format!(
            "Lebesgue curve limited to n <= {max_order}, got {n}"
        )));
    }
    let rows: Vec<LebesgueRow> = orders
        .iter()
        .map(|&n| {
            let nodes = if n == 0 {
                NodeSet::new(
                    vec![crate::zernike::DiskPoint::from_polar(0.0, 0.0)],
                    crate::patterns::Provenance::Ocs,
                )
            } else {
                PatternKind::Ocs.nodes(n)?
            };
            let report = lebesgue_constant(&nodes, n, mesh)?;
            Ok(LebesgueRow {
                n,
                dimension: report.dimension,
                lambda: report.lambda,
            })
        })
        .collect::<Result<_>>()?;
    let fitted: Vec<&LebesgueRow> = rows.iter().filter(|r| r.n >= 1).collect();
    let fit = (fitted.len() >= 2).then(|| {
        let xs: Vec<f64> = fitted.iter().map(|r| r.dimension as f64).collect();
        let ys: Vec<f64> = fitted.iter().map(|r| r.lambda).collect();
        linear_fit(&xs, &ys)
    });
    Ok(LebesgueCurve { rows, fit })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        let mut c = ExperimentConfig {
            id: "t".into(),
            orders: vec![3, 5],
            pattern: PatternKind::Ocs,
            trials: 1,
            seed: 0,
            output: None,
        };
        assert!(c.validate().is_ok());
        c.trials = 0;
        assert!(c.validate().is_err());
        c.trials = 2;
        c.orders = vec![0];
        assert!(c.validate().is_err());
    }

    #[test]
    fn condition_table_order() {
        let rows =
            run_condition_table(&[10, 15], &[PatternKind::Ocs, PatternKind::Spiral]).unwrap();
        let keys: Vec<(u32, String)> = rows.iter().map(|r| (r.n, r.pattern.to_string())).collect();
        assert_eq!(keys[0], (10, "ocs".to_string()));
        assert_eq!(keys[3], (15, "spiral".to_string()));
        assert!(rows.iter().all(|r| r.kappa_inf.is_some()));
    }

    #[test]
    fn recovery_low_order_is_exact_to_rounding() {
        let stats = run_recovery_experiment(10, 20, 5, PatternKind::Ocs).unwrap();
        assert!(stats.rms_mean < 1e-12, "{}", stats.rms_mean);
        let once = run_recovery_experiment(10, 1, 9, PatternKind::Ocs).unwrap();
        let again = run_recovery_experiment(10, 1, 9, PatternKind::Ocs).unwrap();
        assert_eq!(once, again);
        assert_eq!(once.rms_std, 0.0);
    }

    #[test]
    fn perturbation_zero_magnitude_is_baseline() {
        let pts = run_perturbation_sweep(8, &[0.0, 1e-3], 3, 1).unwrap();
        for p in pts.iter().filter(|p| p.magnitude == 0.0) {
            assert_eq!(p.max_kappa2, p.baseline_kappa2);
        }
        assert!(run_perturbation_sweep(8, &[1e-3, 0.0], 3, 1).is_err());
    }

    #[test]
    fn slope_curve_smallest_order() {
        let rows = run_slope_condition_curve(&[1], &[PatternKind::Ocs]).unwrap();
        assert_eq!((rows[0].rows, rows[0].cols), (4, 2));
        assert!(rows[0].kappa2.is_finite());
    }

    #[test]
    fn lebesgue_curve_order_zero_and_limit() {
        let curve =
            run_lebesgue_curve(&[0], &MeshSpec::default(), DEFAULT_LEBESGUE_MAX_ORDER).unwrap();
        assert_eq!(curve.rows[0].lambda, 1.0);
        assert!(curve.fit.is_none());
        assert!(
            run_lebesgue_curve(&[26], &MeshSpec::default(), DEFAULT_LEBESGUE_MAX_ORDER).is_err()
        );
    }

    #[test]
    fn linear_fit_exact_line() {
        let f = linear_fit(&[1.0, 2.0, 3.0], &[3.0, 5.0, 7.0]);
        assert!((f.slope - 2.0).abs() < 1e-14 && (f.intercept - 1.0).abs() < 1e-14);
        assert!((f.r_squared - 1.0).abs() < 1e-14);
    }
}
