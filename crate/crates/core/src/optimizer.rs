//! Minimization of the elevation-matrix condition number over ring radii.
//!
//! Ring counts and phases stay fixed; only the radii `1 > r_1 > ... > r_k >= 0`
//! move. The search starts at the fitted OCS radii, runs simulated annealing
//! with single-radius moves that never leave the feasible set, and finishes
//! with a coordinate search whose step halves until it drops below the radius
//! tolerance.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::collocation::{build_elevation_matrix, kappa2};
use crate::error::{OcsError, Result};
use crate::patterns::{
    chebyshev_zero, ocs_radii, pattern_with_radii, realize_nodes, ring_count, Provenance,
};

/// Practical cap on the outermost radius.
pub const MAX_OUTER_RADIUS: f64 = 1.0 - 1e-6;

/// Smallest budget accepted by [`optimize_radii`].
pub const MIN_BUDGET: usize = 100;

/// Simulated annealing and refinement settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Initial temperature as a fraction of the starting objective.
    pub initial_temperature_fraction: f64,
    /// Geometric cooling factor applied after every stage.
    pub cooling_factor: f64,
    /// Proposals per temperature stage, per ring.
    pub proposals_per_ring: usize,
    /// Annealing stops once `T < final_temperature_ratio * T0`.
    pub final_temperature_ratio: f64,
    /// Fraction of the evaluation budget given to annealing.
    pub annealing_share: f64,
    /// First coordinate-search step.
    pub refine_initial_step: f64,
    /// Coordinate search stops when its step falls below this.
    pub radius_tolerance: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            initial_temperature_fraction: 0.1,
            cooling_factor: 0.95,
            proposals_per_ring: 50,
            final_temperature_ratio: 1e-6,
            annealing_share: 0.5,
            refine_initial_step: 1e-2,
            radius_tolerance: 1e-5,
        }
    }
}

impl OptimizerConfig {
    fn stage_count(&self) -> usize {
        (self.final_temperature_ratio.ln() / self.cooling_factor.ln()).ceil() as usize
    }

    /// Proposals per stage, shrunk when the full cooling schedule would not
    /// fit in the annealing share of the budget.
    fn stage_length(&self, rings: usize, annealing_budget: usize) -> usize {
        let nominal = self.proposals_per_ring * rings;
        let affordable = annealing_budget / self.stage_count().max(1);
        nominal.min(affordable).max(1)
    }
}

/// The objective `kappa2(A_n(radii))` on the feasible set of strictly
/// decreasing radii in `[0, MAX_OUTER_RADIUS]`.
#[derive(Clone, Debug)]
pub struct RadiiOptimizationProblem {
    pub n: u32,
}

impl RadiiOptimizationProblem {
    pub fn new(n: u32) -> Result<Self> {
        if n < 1 {
            return Err(OcsError::Domain(format!(
                "radii optimization needs n >= 1, got {n}"
            )));
        }
        Ok(RadiiOptimizationProblem { n })
    }

    pub fn rings(&self) -> usize {
        ring_count(self.n)
    }

    pub fn is_feasible(&self, radii: &[f64]) -> bool {
        radii.len() == self.rings()
            && radii[0] <= MAX_OUTER_RADIUS
            && radii[radii.len() - 1] >= 0.0
            && radii.windows(2).all(|w| w[0] > w[1])
    }

    /// Open interval available to radius `i` given its neighbours.
    fn bounds(&self, radii: &[f64], i: usize) -> (f64, f64) {
        let lo = if i + 1 < radii.len() {
            radii[i + 1]
        } else {
            0.0
        };
        let hi = if i == 0 {
            MAX_OUTER_RADIUS
        } else {
            radii[i - 1]
        };
        (lo, hi)
    }

    pub fn objective(&self, radii: &[f64]) -> Result<f64> {
        let pattern = pattern_with_radii(self.n, radii, Provenance::Custom)?;
        let a = build_elevation_matrix(&realize_nodes(&pattern), self.n)?;
        Ok(kappa2(&a.entries))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub evaluation: usize,
    pub best_kappa2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub n: u32,
    pub radii: Vec<f64>,
    pub kappa2: f64,
    /// Objective at the fitted starting radii.
    pub seed_kappa2: f64,
    /// Objective evaluations spent.
    pub iterations: usize,
    /// Whether the budget ran out before the coordinate search converged.
    pub budget_exhausted: bool,
    pub trace: Vec<TracePoint>,
}

struct Search<'a> {
    problem: &'a RadiiOptimizationProblem,
    budget: usize,
    evaluations: usize,
    best: Vec<f64>,
    best_value: f64,
    trace: Vec<TracePoint>,
}

impl Search<'_> {
    fn exhausted(&self) -> bool {
        self.evaluations >= self.budget
    }

    fn evaluate(&mut self, radii: &[f64]) -> Result<f64> {
        let value = self.problem.objective(radii)?;
        self.evaluations += 1;
        if value < self.best_value {
            self.best_value = value;
            self.best = radii.to_vec();
        }
        self.trace.push(TracePoint {
            evaluation: self.evaluations,
            best_kappa2: self.best_value,
        });
        Ok(value)
    }
}

/// [`optimize_radii_with`] using the default configuration.
pub fn optimize_radii(n: u32, seed: u64, budget: usize) -> Result<OptimizationResult> {
    optimize_radii_with(n, seed, budget, &OptimizerConfig::default())
}

pub fn optimize_radii_with(
    n: u32,
    seed: u64,
    budget: usize,
    config: &OptimizerConfig,
) -> Result<OptimizationResult> {
    if budget < MIN_BUDGET {
        return Err(OcsError::Domain(format!(
            "budget must be >= {MIN_BUDGET}, got {budget}"
        )));
    }
    let problem = RadiiOptimizationProblem::new(n)?;
    let start = ocs_radii(n)?;
    let mut search = Search {
        problem: &problem,
        budget,
        evaluations: 0,
        best: start.clone(),
        best_value: f64::INFINITY,
        trace: Vec::with_capacity(budget),
    };
    let seed_value = search.evaluate(&start)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    anneal(&mut search, config, start, seed_value, &mut rng)?;
    let converged = coordinate_search(&mut search, config)?;
    if !converged {
        log::warn!(
            "radii optimization for n = {n} exhausted its budget of {budget} evaluations; returning best found"
        );
    }

    Ok(OptimizationResult {
        n,
        radii: search.best,
        kappa2: search.best_value,
        seed_kappa2: seed_value,
        iterations: search.evaluations,
        budget_exhausted: !converged,
        trace: search.trace,
    })
}

fn anneal(
    search: &mut Search<'_>,
    config: &OptimizerConfig,
    start: Vec<f64>,
    start_value: f64,
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    let rings = search.problem.rings();
    let annealing_budget = ((search.budget as f64) * config.annealing_share) as usize;
    let stage_length = config.stage_length(rings, annealing_budget);
    let t0 = config.initial_temperature_fraction * start_value;
    let t_end = config.final_temperature_ratio * t0;
    let mut temperature = t0;
    let mut current = start;
    let mut current_value = start_value;

    while temperature >= t_end && search.evaluations < annealing_budget.min(search.budget) {
        // step width shrinks with the temperature
        let width = (temperature / t0).sqrt().max(1e-3);
        for _ in 0..stage_length {
            if search.evaluations >= annealing_budget.min(search.budget) {
                break;
            }
            let i = rng.gen_range(0..rings);
            let (lo, hi) = search.problem.bounds(&current, i);
            let half = 0.5 * (hi - lo);
            let margin = 1e-9 * (hi - lo);
            let lo_eff = if i + 1 == rings { lo } else { lo + margin };
            let hi_eff = if i == 0 { hi } else { hi - margin };
            let step = rng.gen_range(-1.0..=1.0) * width * half;
            let mut candidate = current.clone();
            candidate[i] = (current[i] + step).clamp(lo_eff, hi_eff);
            if candidate[i] == current[i] || !search.problem.is_feasible(&candidate) {
                continue;
            }
            let value = search.evaluate(&candidate)?;
            let delta = value - current_value;
            if delta <= 0.0 || rng.gen::<f64>() < (-delta / temperature).exp() {
                current = candidate;
                current_value = value;
            }
        }
        temperature *= config.cooling_factor;
    }
    Ok(())
}

/// Returns `true` if the step fell below the tolerance within the budget.
fn coordinate_search(search: &mut Search<'_>, config: &OptimizerConfig) -> Result<bool> {
    let rings = search.problem.rings();
    let mut step = config.refine_initial_step;
    while step >= config.radius_tolerance {
        let mut improved = false;
        for i in 0..rings {
            for direction in [1.0, -1.0] {
                if search.exhausted() {
                    return Ok(false);
                }
                let mut candidate = search.best.clone();
                candidate[i] += direction * step;
                if !search.problem.is_feasible(&candidate) {
                    continue;
                }
                let before = search.best_value;
                search.evaluate(&candidate)?;
                if search.best_value < before {
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok(true)
}

/// Least-squares fit of `r = c1 z + c2 z^2 + c3 z^3` over Chebyshev zeros.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiiFit {
    pub coefficients: [f64; 3],
    pub residual_rms: f64,
    pub samples: usize,
}

/// Minimum number of orders accepted by [`refit_radii_formula`].
pub const MIN_REFIT_ORDERS: usize = 10;

/// Fits the radius cubic (no constant term) to optimal radii keyed by order.
pub fn refit_radii_formula(optimal_radii: &BTreeMap<u32, Vec<f64>>) -> Result<RadiiFit> {
    if optimal_radii.len() < MIN_REFIT_ORDERS {
        return Err(OcsError::Domain(format!(
            "need radii for at least {MIN_REFIT_ORDERS} orders, got {}",
            optimal_radii.len()
        )));
    }
    let mut rows = Vec::new();
    for (&n, radii) in optimal_radii {
        if radii.len() != ring_count(n) {
            return Err(OcsError::SizeMismatch {
                expected: ring_count(n),
                actual: radii.len(),
                context: "radii per order",
            });
        }
        for (j, &r) in radii.iter().enumerate() {
            rows.push((chebyshev_zero(j + 1, n), r));
        }
    }
    let design = DMatrix::from_fn(rows.len(), 3, |i, c| rows[i].0.powi(c as i32 + 1));
    let target = DVector::from_iterator(rows.len(), rows.iter().map(|r| r.1));
    let qr = design.clone().qr();
    let r = qr.r();
    let diag_max = r.diagonal().iter().map(|v| v.abs()).fold(0.0, f64::max);
    let rank = r
        .diagonal()
        .iter()
        .filter(|v| v.abs() > diag_max * f64::EPSILON * rows.len() as f64)
        .count();
    if rank < 3 {
        return Err(OcsError::RankDeficient { rank, cols: 3 });
    }
    let mut qtb = target.clone();
    qr.q_tr_mul(&mut qtb);
    let coeffs = r
        .solve_upper_triangular(&qtb.rows(0, 3).into_owned())
        .ok_or(OcsError::RankDeficient { rank, cols: 3 })?;
    let residual = &design * &coeffs - target;
    let residual_rms = (residual.norm_squared() / rows.len() as f64).sqrt();
    Ok(RadiiFit {
        coefficients: [coeffs[0], coeffs[1], coeffs[2]],
        residual_rms,
        samples: rows.len(),
    })
}
