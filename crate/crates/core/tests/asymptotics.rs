use ocs_core::asymptotics::{l_functional, l_functional_with_tolerance, GVariant, OPTIMAL_L};

// Reference values were reproduced independently with 30-digit mpmath
// tanh-sinh quadrature: fitted -0.6815668754, g1 -0.6806085843, g2 -0.67567569.
#[test]
fn l_values_match_reference() {
    let cases = [
        (GVariant::Fitted, -0.681567),
        (GVariant::G1, -0.680609),
        (GVariant::G2, -0.675676),
    ];
    for (variant, expected) in cases {
        let l = l_functional(variant).unwrap();
        assert!((l - expected).abs() < 1e-5, "{variant}: {l} vs {expected}");
    }
}

#[test]
fn l_values_below_optimal_and_ordered() {
    let f = l_functional(GVariant::Fitted).unwrap();
    let g1 = l_functional(GVariant::G1).unwrap();
    let g2 = l_functional(GVariant::G2).unwrap();
    assert!(f < g1 && g1 < g2 && g2 < OPTIMAL_L);
}

#[test]
fn quadrature_self_consistent() {
    for variant in GVariant::ALL {
        let a = l_functional_with_tolerance(variant, 1e-6).unwrap();
        let b = l_functional_with_tolerance(variant, 5e-7).unwrap();
        assert!((a - b).abs() < 1e-6, "{variant}: {a} vs {b}");
    }
}
