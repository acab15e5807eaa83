//! Coincidence probability against direct integration of the anti-bunched
//! amplitude.

use qwkt_core::biphoton::BiphotonSource;
use qwkt_core::hom::{antibunch_amplitude, coincidence_probability, JointAmplitude};
use qwkt_core::quadrature::GaussKronrod;

/// `∫∫ |A(ω_s, ω_i)|² dω_s dω_i` in sum/difference coordinates.
fn integrated(source: &BiphotonSource, tau: f64) -> f64 {
    let f = JointAmplitude::from_source(source, true);
    let gk = GaussKronrod::with_rel_tol(1e-10);
    let lw = f.pump_linewidth;
    let reach = f.center_difference.abs() + 24.0 * f.sigma;
    let wp = f.pump_frequency;
    let outer = |d: f64| {
        gk.integrate(
            |s: f64| {
                let (ws, wi) = (0.5 * (wp + s + d), 0.5 * (wp + s - d));
                0.5 * antibunch_amplitude(&f, tau, ws, wi).norm_sqr()
            },
            -12.0 * lw,
            12.0 * lw,
            2,
        )
        .unwrap()
        .value
    };
    gk.integrate(outer, -reach, reach, 64).unwrap().value
}

#[test]
fn closed_form_matches_quadrature() {
    let source = BiphotonSource::degenerate_nm(10e-9).unwrap();
    assert_eq!(coincidence_probability(&source, 0.0), 0.0);
    for tau in [0.0, 0.05e-12, 0.12e-12, 0.267e-12, 0.364e-12] {
        let closed = coincidence_probability(&source, tau);
        let numeric = integrated(&source, tau);
        assert!(
            (closed - numeric).abs() <= 1e-6,
            "{tau}: {closed} vs {numeric}"
        );
        let sigma = source.sigma_spectral();
        assert!((closed - 0.5 * (1.0 - (-2.0 * sigma * sigma * tau * tau).exp())).abs() < 1e-15);
    }
}

#[test]
fn nondegenerate_beat_matches_quadrature() {
    let lambda_i = 1.0 / (1.0 / 405e-9 - 1.0 / 805e-9);
    let source = BiphotonSource::new(1.5e13, 805e-9, lambda_i, 405e-9).unwrap();
    for tau in [0.03e-12, 0.1e-12, 0.2e-12] {
        let closed = coincidence_probability(&source, tau);
        assert!((closed - integrated(&source, tau)).abs() <= 1e-6);
    }
}
