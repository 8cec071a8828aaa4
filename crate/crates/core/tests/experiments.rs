use ocs_core::collocation::MatrixMode;
use ocs_core::experiments::{
    run_condition_table, run_perturbation_sweep, run_recovery_experiment, run_rotation_sweep,
    run_slope_condition_curve, PatternKind, DEFAULT_MAGNITUDES,
};
use ocs_core::output::records_csv;
use ocs_core::patterns::PerturbMode;
use ocs_core::zernike::basis_dimension;

#[test]
fn condition_table_rows() {
    let orders = [10, 15, 20, 22, 27, 30];
    assert_eq!(orders.map(basis_dimension), [66, 136, 231, 276, 406, 496]);
    let rows = run_condition_table(&orders, &[PatternKind::Ocs, PatternKind::Spiral]).unwrap();
    assert_eq!(rows.len(), 12);
    assert!(rows
        .iter()
        .all(|r| r.mode == MatrixMode::Elevation && r.kappa2.is_finite()));
    for pair in rows.chunks(2) {
        assert_eq!(pair[0].n, pair[1].n);
        assert!(pair[1].kappa2 > pair[0].kappa2);
    }
}

#[test]
fn carnicer_is_outperformed() {
    let rows = run_condition_table(&[10, 20], &[PatternKind::Ocs, PatternKind::Carnicer]).unwrap();
    for pair in rows.chunks(2) {
        assert!(pair[0].kappa2 < pair[1].kappa2);
        assert!(pair[0].kappa_inf.unwrap() < pair[1].kappa_inf.unwrap());
    }
}

#[test]
fn recovery_statistics() {
    let low = run_recovery_experiment(10, 50, 1, PatternKind::Ocs).unwrap();
    assert!(low.rms_mean < 1e-12 && low.rms_mean >= 0.0 && low.rms_std >= 0.0);
    let a = run_recovery_experiment(10, 1, 99, PatternKind::Ocs).unwrap();
    let b = run_recovery_experiment(10, 1, 99, PatternKind::Ocs).unwrap();
    assert_eq!(a.rms_mean.to_bits(), b.rms_mean.to_bits());
    let spiral = run_recovery_experiment(25, 10, 1, PatternKind::Spiral).unwrap();
    let ocs = run_recovery_experiment(25, 10, 1, PatternKind::Ocs).unwrap();
    assert!(spiral.rms_mean > 100.0 * ocs.rms_mean);
}

#[test]
fn rotation_sweep_ring_counts() {
    let rows = run_rotation_sweep(25, 8).unwrap();
    assert_eq!(rows.len(), 13);
    assert!(rows[0].max_rel_change <= 1e-9);
    assert!(rows.iter().skip(1).any(|r| r.max_rel_change > 1e-6));
    assert_eq!(run_rotation_sweep(30, 2).unwrap().len(), 16);
}

#[test]
fn perturbation_sweep_trends() {
    for n in [20u32, 25, 30] {
        let trials = 20;
        let points = run_perturbation_sweep(n, &DEFAULT_MAGNITUDES, trials, 7).unwrap();
        assert_eq!(points.len(), 10);
        for mode in [PerturbMode::Radii, PerturbMode::Points] {
            let curve: Vec<_> = points.iter().filter(|p| p.mode == mode).collect();
            assert_eq!(curve[0].max_kappa2, curve[0].baseline_kappa2);
            let at_1e3 = curve.iter().find(|p| p.magnitude == 1e-3).unwrap();
            assert!(at_1e3.max_kappa2 < 10.0 * at_1e3.baseline_kappa2);
            // worst case over trials grows with the magnitude
            let first = curve[1].max_kappa2;
            let last = curve.last().unwrap().max_kappa2;
            assert!(last >= first, "n={n} {mode:?}: {first} -> {last}");
        }
    }
}

#[test]
fn slope_conditioning_curve() {
    let orders: Vec<u32> = (1..=30).collect();
    let rows = run_slope_condition_curve(&orders, &[PatternKind::Ocs]).unwrap();
    assert!(rows.iter().all(|r| r.kappa2 < 1e4), "{rows:?}");
    let n1 = &rows[0];
    assert_eq!((n1.rows, n1.cols), (4, 2));
    let spiral = run_slope_condition_curve(&[30], &[PatternKind::Spiral]).unwrap();
    assert!(rows[29].kappa2 < spiral[0].kappa2);
}

#[test]
fn outputs_are_reproducible() {
    let a = records_csv(&run_perturbation_sweep(8, &[0.0, 1e-2], 5, 42).unwrap()).unwrap();
    let b = records_csv(&run_perturbation_sweep(8, &[0.0, 1e-2], 5, 42).unwrap()).unwrap();
    assert_eq!(a, b);
    assert!(a.starts_with("n,mode,magnitude,trials,max_kappa2,mean_kappa2,baseline_kappa2\n"));
}
