use std::collections::BTreeMap;
use std::sync::OnceLock;

use ocs_core::optimizer::{
    optimize_radii, refit_radii_formula, OptimizationResult, RadiiOptimizationProblem,
};
use ocs_core::patterns::{chebyshev_zero, ocs_radii, radius_cubic, OCS_RADIUS_CUBIC};

const BUDGET: usize = 600;

fn sweep() -> &'static BTreeMap<u32, OptimizationResult> {
    static SWEEP: OnceLock<BTreeMap<u32, OptimizationResult>> = OnceLock::new();
    SWEEP.get_or_init(|| {
        (4..=30)
            .map(|n| (n, optimize_radii(n, 1, BUDGET).unwrap()))
            .collect()
    })
}

#[test]
fn order_10_reaches_tabulated_conditioning() {
    let result = optimize_radii(10, 3, 1500).unwrap();
    assert!(result.kappa2 <= 3.2 * 1.05, "{}", result.kappa2);
}

#[test]
fn sweep_results_are_feasible_and_no_worse_than_seed() {
    for (&n, result) in sweep() {
        let problem = RadiiOptimizationProblem::new(n).unwrap();
        assert!(problem.is_feasible(&result.radii), "n={n}");
        assert!(result.kappa2 <= result.seed_kappa2 + 1e-12);
        assert!(result.kappa2.is_finite());
        assert!(result
            .trace
            .windows(2)
            .all(|w| w[1].best_kappa2 <= w[0].best_kappa2));
    }
}

#[test]
fn refit_recovers_formula_coefficients() {
    let radii: BTreeMap<u32, Vec<f64>> =
        sweep().iter().map(|(&n, r)| (n, r.radii.clone())).collect();
    let fit = refit_radii_formula(&radii).unwrap();
    for (got, want) in fit.coefficients.iter().zip(OCS_RADIUS_CUBIC) {
        assert!(
            (got - want).abs() <= 0.05,
            "{:?} vs {:?}",
            fit.coefficients,
            OCS_RADIUS_CUBIC
        );
    }
}

#[test]
fn formula_residual_against_optimized_radii() {
    let mut sum = 0.0;
    let mut count = 0;
    for (&n, result) in sweep() {
        for (j, r) in result.radii.iter().enumerate() {
            let fitted = radius_cubic(chebyshev_zero(j + 1, n), &OCS_RADIUS_CUBIC);
            sum += (r - fitted).powi(2);
            count += 1;
        }
    }
    let rms = (sum / count as f64).sqrt();
    assert!(rms < 0.01, "{rms}");
}

#[test]
fn optimized_radii_close_to_formula() {
    let mut worst = (0, 0.0f64);
    for (&n, result) in sweep() {
        let formula = ocs_radii(n).unwrap();
        for (a, b) in result.radii.iter().zip(&formula) {
            if (a - b).abs() > worst.1 {
                worst = (n, (a - b).abs());
            }
        }
    }
    assert!(
        worst.1 <= 2e-2,
        "largest radius difference {:.4} at n={}",
        worst.1,
        worst.0
    );
}
