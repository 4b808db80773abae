//! Experiment-harness trends at small desk scale.

use fourier_l1::analysis::{convergence_run, decomposition_norm_run};
use fourier_l1::families::FamilySpec;

#[test]
fn component_norms_shrink_for_a_calm_geometric_family() {
    let spec = FamilySpec::Geometric { rx: 0.7, ry: 0.7 };
    let records = decomposition_norm_run(&spec, &[(8, 8), (16, 16), (32, 32)], 1.5).unwrap();
    assert_eq!(records.len(), 3);
    for c in 0..6 {
        for w in records.windows(2) {
            assert!(
                w[1].component_norms[c] <= w[0].component_norms[c] * (1.0 + 1e-9),
                "component r{c}: {} -> {}",
                w[0].component_norms[c],
                w[1].component_norms[c]
            );
        }
    }
    for r in &records {
        assert!(r.reconstruction_residual <= 1e-9);
        let total: f64 = r.component_norms.iter().sum();
        assert!(r.norm_v_s <= total + 1e-9 * total.max(1.0));
    }
}

#[test]
fn partial_and_cesaro_norms_shrink_along_the_ladder() {
    let spec = FamilySpec::Geometric { rx: 0.8, ry: 0.8 };
    let records = convergence_run(&spec, &[(4, 4), (8, 8), (16, 16)], 1.5, 1e-6).unwrap();
    for w in records.windows(2) {
        assert!(w[1].norm_s_f < w[0].norm_s_f);
        assert!(w[1].norm_sigma_f < w[0].norm_sigma_f);
        assert!(w[1].norm_v_s < w[0].norm_v_s);
    }
    for r in &records {
        assert!(r.norm_v_f <= r.norm_v_s + r.norm_s_f + 1e-9);
    }
}

#[test]
fn truncated_reference_families_run_too() {
    // no closed form, but a certified power-law tail bound
    let spec = FamilySpec::RandomSparse {
        seed: 3,
        bound_j: 24,
        bound_k: 24,
        density: 0.5,
        decay_exponent: 2.0,
    };
    let records = convergence_run(&spec, &[(4, 4), (8, 8)], 2.0, 1e-5).unwrap();
    assert_eq!(records.len(), 2);
    for r in &records {
        assert!(r.norm_s_f.is_finite() && r.norm_s_f >= 0.0);
        assert!(r.norm_v_f <= r.norm_v_s + r.norm_s_f + 1e-9);
    }
}
