//! Ordering between classical and quantum Fisher information.

use qwkt_core::biphoton::BiphotonSource;
use qwkt_core::estimator::{fisher_information, quantum_fisher_information};
use qwkt_core::hom::{DetectionModel, Variant};
use qwkt_core::spectral::FrequencyGrid;

#[test]
fn classical_information_never_exceeds_the_quantum_bound() {
    let source = BiphotonSource::degenerate_nm(10e-9).unwrap();
    let sigma = source.sigma_spectral();
    let q = quantum_fisher_information(&source, 1).unwrap();
    assert!((q.q_numeric / (sigma * sigma) - 1.0).abs() < 1e-6);
    let grid = FrequencyGrid::default_for(&source);
    for gamma in [0.0, 0.1, 0.2, 0.5, 0.9] {
        for alpha in [0.0, 0.5, 0.9, 0.99, 1.0] {
            for tau in [0.01, 0.1, 0.5, 1.0, 5.0].map(|x| x / sigma) {
                let model = DetectionModel::new(gamma, alpha, 1000, grid.clone(), Variant::TwoPort)
                    .unwrap();
                let r = fisher_information(&source, tau, &model).unwrap();
                assert!(r.g_omega >= 0.0);
                assert!(r.g_omega <= 4.0 * q.q * (1.0 + 1e-9));
                if gamma == 0.0 && alpha == 1.0 {
                    assert!((r.g_omega / (4.0 * q.q) - 1.0).abs() < 1e-6);
                }
                if r.g_omega > 0.0 {
                    let product = r.crb * (r.n_trials as f64 * r.g_omega).sqrt();
                    assert!((product - 1.0).abs() <= 4.0 * f64::EPSILON);
                }
            }
        }
    }
}
