//! Classical and quantum Fisher information for a single delay.

use serde::{Deserialize, Serialize};

use crate::biphoton::BiphotonSource;
use crate::error::{Error, Result};
use crate::hom::{DetectionModel, JointAmplitude, Variant};
use crate::quadrature::{GaussKronrod, Quadrature};

/// Integration half-width in units of the envelope RMS width `2σ`.
pub const FISHER_WINDOW_WIDTHS: f64 = 6.0;
/// A quadrature result is accepted when its error estimate is below this
/// fraction of the value.
pub const FISHER_REL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FisherReport {
    /// Per-trial information about the delay, in 1/s².
    pub g_omega: f64,
    /// Cramér–Rao bound `1/√(N·G)` in seconds; infinite when `G = 0`.
    pub crb: f64,
    pub variant: Variant,
    pub sigma: f64,
    pub tau: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub n_trials: u64,
    pub abs_error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QfiReport {
    /// Closed-form quantum Fisher information, 1/s².
    pub q: f64,
    /// The same quantity by quadrature over the joint spectral density.
    pub q_numeric: f64,
    /// `1/(2√(N·q))`, seconds.
    pub qcrb: f64,
    pub sigma: f64,
    pub n_trials: u64,
}

fn accept(result: Result<Quadrature>) -> Result<Quadrature> {
    match result {
        Ok(q) => Ok(q),
        // The integrator aims higher than the acceptance threshold; keep a
        // result that still meets it.
        Err(Error::Numerical {
            estimate,
            error,
            evaluations,
            ..
        }) if error <= FISHER_REL_TOL * estimate.abs() => Ok(Quadrature {
            value: estimate,
            abs_error: error,
            evaluations,
        }),
        Err(e) => Err(e),
    }
}

/// Fisher information per trial about a single delay `tau`.
///
/// Two-port: the outcome probabilities of anti-bunched and bunched pairs
/// reduce the information to
/// `(1-γ)² ∫ env_pdf(ω) α²ω² sin²(ωτ) / (1 - α² cos²(ωτ)) dω`.
/// The denominator is evaluated as `sin² + (1-α²)cos²`, and the ratio taken
/// as its limit `α²` where both vanish.
///
/// Three-outcome: sums the coincidence and single-click terms with the
/// fringe written `1 + α cos(ωτ)` and the unit-area envelope. The no-click
/// term does not depend on the delay and contributes nothing.
///
/// Both integrate over `|ω| ≤ 12σ`.
pub fn fisher_information(
    source: &BiphotonSource,
    tau: f64,
    model: &DetectionModel,
) -> Result<FisherReport> {
    if !tau.is_finite() {
        return Err(crate::error::domain(format!(
            "delay must be finite, got {tau}"
        )));
    }
    let sigma = source.sigma_spectral();
    let (gamma, alpha) = (model.gamma(), model.alpha());
    let k = model.pair_survival();
    let limit = FISHER_WINDOW_WIDTHS * 2.0 * sigma;
    // Enough starting pieces to resolve each half-period of the fringe.
    let pieces = ((limit * tau.abs() / std::f64::consts::PI).ceil() as usize + 8).min(4096);
    let gk = GaussKronrod::with_rel_tol(1e-10);

    let half = match model.variant() {
        Variant::TwoPort => accept(gk.integrate(
            |w| {
                let (s, c) = (w * tau).sin_cos();
                let den = s * s + (1.0 - alpha * alpha) * c * c;
                let ratio = if den > 0.0 {
                    alpha * alpha * s * s / den
                } else {
                    alpha * alpha
                };
                k * source.envelope_pdf(w) * w * w * ratio
            },
            0.0,
            limit,
            pieces,
        ))?,
        Variant::PaperEq16 => {
            let h = 0.5 * k;
            let base = 2.0 * (1.0 + gamma) / (1.0 - gamma);
            let invalid = std::cell::Cell::new(None);
            let q = accept(gk.integrate(
                |w| {
                    let (s, c) = (w * tau).sin_cos();
                    let pdf = source.envelope_pdf(w);
                    let derivative = h * pdf * alpha * w * s;
                    // (∂P₂)²/P₂ with 1 + α cos written so that α = 1 stays
                    // finite at the fringe zeros.
                    let coincidence = if alpha == 1.0 {
                        h * pdf * w * w * (1.0 - c)
                    } else {
                        h * pdf * alpha * alpha * w * w * s * s / (1.0 + alpha * c)
                    };
                    let p1 = h * (base - pdf * (1.0 + alpha * c));
                    let single = if derivative == 0.0 {
                        0.0
                    } else {
                        derivative * derivative / p1
                    };
                    if p1 <= 0.0 && invalid.get().is_none() {
                        invalid.set(Some(w));
                    }
                    // ∂P₀/∂τ = 0.
                    let none = 0.0;
                    coincidence + single + none
                },
                0.0,
                limit,
                pieces,
            ))?;
            if let Some(w) = invalid.get() {
                return Err(Error::Numerical {
                    message: format!("single-click probability is not positive at ω = {w:e} rad/s"),
                    estimate: q.value,
                    error: q.abs_error,
                    evaluations: q.evaluations,
                });
            }
            q
        }
    };
    let g_omega = 2.0 * half.value;
    let n = model.n_trials();
    let crb = if g_omega > 0.0 {
        1.0 / (n as f64 * g_omega).sqrt()
    } else {
        f64::INFINITY
    };
    Ok(FisherReport {
        g_omega,
        crb,
        variant: model.variant(),
        sigma,
        tau,
        gamma,
        alpha,
        n_trials: n,
        abs_error: 2.0 * half.abs_error,
        evaluations: half.evaluations,
    })
}

/// Closed-form variance of the idler frequency for the symmetric amplitude
/// in the monochromatic-pump limit: `σ² + Ω₀²/(4(1+ε))`, which is `σ²` for a
/// degenerate source.
fn closed_form_q(source: &BiphotonSource) -> f64 {
    let sigma = source.sigma_spectral();
    let d = source.center_difference_frequency();
    if d == 0.0 {
        return sigma * sigma;
    }
    let overlap = (-(d * d) / (8.0 * sigma * sigma)).exp();
    sigma * sigma + d * d / (4.0 * (1.0 + overlap))
}

/// Variance of the idler frequency over `|f(ω_s, ω_i)|²` by nested
/// quadrature in difference/sum coordinates.
fn numeric_q(amplitude: &JointAmplitude) -> Result<f64> {
    let lw = amplitude.pump_linewidth;
    let d = amplitude.center_difference.abs();
    let reach = d + 12.0 * 2.0 * amplitude.sigma;
    let density = |diff: f64, sum: f64| {
        let f = amplitude.eval_rotated(diff, sum);
        0.5 * f * f
    };
    // Idler offset from ω_p/2 is (S - D)/2.
    // Odd moments vanish for symmetric amplitudes, so each moment also gets
    // an absolute tolerance on its natural scale σ^m.
    let moment = |m: i32| -> Result<f64> {
        let scale = amplitude.sigma.powi(m);
        let gk = GaussKronrod {
            rel_tol: 1e-11,
            abs_tol: 1e-14 * scale,
            ..GaussKronrod::default()
        };
        let inner = GaussKronrod {
            abs_tol: 1e-14 * scale / amplitude.sigma,
            ..gk
        };
        let outer = |diff: f64| {
            inner
                .integrate(
                    |sum| {
                        let v = 0.5 * (sum - diff);
                        density(diff, sum) * v.powi(m)
                    },
                    -12.0 * lw,
                    12.0 * lw,
                    2,
                )
                .map(|q| q.value)
                .unwrap_or(f64::NAN)
        };
        let q = gk.integrate(outer, -reach, reach, 16)?;
        if q.value.is_nan() {
            return Err(Error::Numerical {
                message: "inner quadrature of the joint density failed".into(),
                estimate: q.value,
                error: q.abs_error,
                evaluations: q.evaluations,
            });
        }
        Ok(q.value)
    };
    let m0 = moment(0)?;
    let m1 = moment(1)? / m0;
    let m2 = moment(2)? / m0;
    Ok(m2 - m1 * m1)
}

/// Quantum Fisher information of the delay and the resulting bound on
/// `n_trials` repetitions.
///
/// The delay imprints `exp(-iω_i τ)` on the idler, so `Q` is the variance of
/// the idler frequency over the joint spectral density. `q` is the closed
/// form; `q_numeric` recomputes it by quadrature.
pub fn quantum_fisher_information(source: &BiphotonSource, n_trials: u64) -> Result<QfiReport> {
    if n_trials == 0 {
        return Err(crate::error::domain("trial count must be at least 1"));
    }
    let q = closed_form_q(source);
    let q_numeric = numeric_q(&JointAmplitude::from_source(source, true))?;
    Ok(QfiReport {
        q,
        q_numeric,
        qcrb: 0.5 / ((n_trials as f64).sqrt() * q.sqrt()),
        sigma: source.sigma_spectral(),
        n_trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::FrequencyGrid;

    fn src10() -> BiphotonSource {
        BiphotonSource::degenerate_nm(10e-9).unwrap()
    }

    fn model(source: &BiphotonSource, gamma: f64, alpha: f64, variant: Variant) -> DetectionModel {
        DetectionModel::new(
            gamma,
            alpha,
            10_000,
            FrequencyGrid::default_for(source),
            variant,
        )
        .unwrap()
    }

    #[test]
    fn ideal_two_port_reaches_four_sigma_squared() {
        let s = src10();
        let ceiling = 4.0 * s.sigma_spectral().powi(2);
        for tau in [0.05e-12, 0.5e-12, 2e-12] {
            let r = fisher_information(&s, tau, &model(&s, 0.0, 1.0, Variant::TwoPort)).unwrap();
            assert!(
                (r.g_omega / ceiling - 1.0).abs() < 1e-6,
                "{tau}: {}",
                r.g_omega / ceiling
            );
            assert!(
                ((r.crb * (r.n_trials as f64 * r.g_omega).sqrt()) - 1.0).abs() < 4.0 * f64::EPSILON
            );
        }
    }

    #[test]
    fn loss_scales_by_pair_survival() {
        let s = src10();
        let ceiling = 4.0 * s.sigma_spectral().powi(2);
        let r = fisher_information(&s, 0.3e-12, &model(&s, 0.2, 1.0, Variant::TwoPort)).unwrap();
        assert!((r.g_omega / (0.64 * ceiling) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn imperfect_visibility_loses_small_delays() {
        let s = src10();
        let sigma = s.sigma_spectral();
        let m = model(&s, 0.0, 0.9, Variant::TwoPort);
        let tiny = fisher_information(&s, 1e-4 / sigma, &m).unwrap();
        assert!(tiny.g_omega <= 1e-4 * 4.0 * sigma * sigma);
        let mut prev = tiny.g_omega;
        // G rises up to στ ≈ 0.4 before settling to a plateau.
        for j in 1..8 {
            let g = fisher_information(&s, j as f64 * 0.05 / sigma, &m)
                .unwrap()
                .g_omega;
            assert!(g > prev);
            prev = g;
        }
        let zero = fisher_information(&s, 1e-13, &model(&s, 0.0, 0.0, Variant::TwoPort)).unwrap();
        assert_eq!(zero.g_omega, 0.0);
        assert!(zero.crb.is_infinite());
    }

    #[test]
    fn two_port_matches_a_brute_force_sum() {
        // Independent oracle: Riemann sum of Σ (∂p)²/p over the two
        // ports with the fringe differentiated numerically.
        let s = src10();
        let sigma = s.sigma_spectral();
        let (gamma, alpha, tau) = (0.1, 0.8, 0.15e-12);
        let r = fisher_information(&s, tau, &model(&s, gamma, alpha, Variant::TwoPort)).unwrap();
        let k = (1.0 - gamma) * (1.0 - gamma);
        let n = 400_000;
        let lim = 12.0 * sigma;
        let dw = 2.0 * lim / n as f64;
        let h = 1e-6 / sigma;
        let mut total = 0.0;
        for j in 0..n {
            let w = -lim + (j as f64 + 0.5) * dw;
            let e = s.envelope_pdf(w);
            let pa = |t: f64| 0.5 * k * e * (1.0 - alpha * (w * t).cos());
            let pb = |t: f64| 0.5 * k * e * (1.0 + alpha * (w * t).cos());
            let da = (pa(tau + h) - pa(tau - h)) / (2.0 * h);
            let db = (pb(tau + h) - pb(tau - h)) / (2.0 * h);
            total += (da * da / pa(tau) + db * db / pb(tau)) * dw;
        }
        assert!(
            (r.g_omega / total - 1.0).abs() < 1e-6,
            "{}",
            r.g_omega / total
        );
    }

    #[test]
    fn printed_three_outcome_form() {
        // With γ = 0, α = 1 the coincidence term integrates to
        // 2σ²[1 - (1 - 4σ²τ²)e^{-2σ²τ²}]; the single-click term carries a
        // squared density and is negligible.
        let s = src10();
        let sigma = s.sigma_spectral();
        for tau in [0.05e-12, 0.2e-12, 1e-12] {
            let r = fisher_information(&s, tau, &model(&s, 0.0, 1.0, Variant::PaperEq16)).unwrap();
            let x = 2.0 * sigma * sigma * tau * tau;
            let expected = 2.0 * sigma * sigma * (1.0 - (1.0 - 2.0 * x) * (-x).exp());
            assert!(
                (r.g_omega / expected - 1.0).abs() < 1e-6,
                "{}",
                r.g_omega / expected
            );
        }
    }

    #[test]
    fn qfi_closed_form_and_quadrature_agree() {
        for nm in [5e-9, 10e-9, 20e-9] {
            let s = BiphotonSource::degenerate_nm(nm).unwrap();
            let r = quantum_fisher_information(&s, 10_000).unwrap();
            let sigma = s.sigma_spectral();
            assert_eq!(r.q, sigma * sigma);
            assert!((r.q_numeric / r.q - 1.0).abs() < 1e-6);
            assert_eq!(r.qcrb, 1.0 / (2.0 * sigma * 100.0));
        }
        let r = quantum_fisher_information(&src10(), 10_000).unwrap();
        assert!((r.qcrb / 1.74e-16 - 1.0).abs() < 1e-3, "{}", r.qcrb);
    }

    #[test]
    fn qfi_of_a_nondegenerate_pair() {
        let s =
            BiphotonSource::new(2e13, 800e-9, 1.0 / (1.0 / 405e-9 - 1.0 / 800e-9), 405e-9).unwrap();
        let r = quantum_fisher_information(&s, 1).unwrap();
        assert!(
            (r.q_numeric / r.q - 1.0).abs() < 1e-6,
            "{}",
            r.q_numeric / r.q
        );
    }

    #[test]
    fn doubling_bandwidth_halves_the_quantum_bound() {
        let a =
            quantum_fisher_information(&BiphotonSource::degenerate(1e13).unwrap(), 100).unwrap();
        let b =
            quantum_fisher_information(&BiphotonSource::degenerate(2e13).unwrap(), 100).unwrap();
        assert_eq!(a.qcrb, 2.0 * b.qcrb);
    }
}
