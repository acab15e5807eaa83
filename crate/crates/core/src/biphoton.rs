//! Closed-form biphoton models.
//!
//! The pair is described by Gaussian envelopes: a temporal bandwidth `Δ` for
//! the time-bin modes and cross-correlation function, and a spectral
//! bandwidth `σ` for the joint spectral intensity. The two are tied by
//! `Δ = √2·σ`, the only choice under which the Fourier transform of the
//! correlation envelope `exp(-Δ²T²)` is the spectral envelope
//! `exp(-ω²/8σ²)`.
//!
//! Spectral quantities are functions of the difference frequency
//! `ω = ω_s - ω_i` in rad/s; times are in seconds.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Factor taking the peak-normalized cross-correlation to the joint spectral
/// intensity's normalization under the transform pair used by
/// [`crate::spectral::QwktPair`]: `forward(CCF_TO_JSI_SCALE · R) = F`.
pub const CCF_TO_JSI_SCALE: f64 = 0.5;

const ENERGY_CONSERVATION_TOL: f64 = 1e-6;

/// A frequency-entangled photon pair with Gaussian envelopes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiphotonSource {
    sigma_spectral: f64,
    delta_temporal: f64,
    center_wavelength_signal: f64,
    center_wavelength_idler: f64,
    pump_wavelength: f64,
}

impl BiphotonSource {
    pub const DEFAULT_CENTER_WAVELENGTH: f64 = 810e-9;
    pub const DEFAULT_PUMP_WAVELENGTH: f64 = 405e-9;
    pub const DEFAULT_BANDWIDTH: f64 = 20e-9;

    /// Builds a source from its RMS spectral bandwidth (rad/s) and line
    /// centers (m). The temporal bandwidth is derived as `√2·σ`.
    pub fn new(
        sigma_spectral: f64,
        center_wavelength_signal: f64,
        center_wavelength_idler: f64,
        pump_wavelength: f64,
    ) -> Result<Self> {
        if !(sigma_spectral.is_finite() && sigma_spectral > 0.0) {
            return Err(domain(format!(
                "spectral bandwidth must be positive, got {sigma_spectral}"
            )));
        }
        for (name, value) in [
            ("signal wavelength", center_wavelength_signal),
            ("idler wavelength", center_wavelength_idler),
            ("pump wavelength", pump_wavelength),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(domain(format!("{name} must be positive, got {value}")));
            }
        }
        let mismatch = (1.0 / center_wavelength_signal + 1.0 / center_wavelength_idler
            - 1.0 / pump_wavelength)
            * pump_wavelength;
        if mismatch.abs() > ENERGY_CONSERVATION_TOL {
            return Err(domain(format!(
                "line centers violate energy conservation (relative mismatch {mismatch:e})"
            )));
        }
        Ok(Self {
            sigma_spectral,
            delta_temporal: SQRT_2 * sigma_spectral,
            center_wavelength_signal,
            center_wavelength_idler,
            pump_wavelength,
        })
    }

    /// Degenerate 810 nm pair from a 405 nm pump with the given spectral
    /// bandwidth in rad/s.
    pub fn degenerate(sigma_spectral: f64) -> Result<Self> {
        Self::new(
            sigma_spectral,
            Self::DEFAULT_CENTER_WAVELENGTH,
            Self::DEFAULT_CENTER_WAVELENGTH,
            Self::DEFAULT_PUMP_WAVELENGTH,
        )
    }

    /// Degenerate pair whose bandwidth is given in wavelength units about
    /// the 810 nm line center.
    pub fn degenerate_nm(bandwidth: f64) -> Result<Self> {
        let sigma = bandwidth_nm_to_rads(bandwidth, Self::DEFAULT_CENTER_WAVELENGTH)?;
        Self::degenerate(sigma)
    }

    pub fn sigma_spectral(&self) -> f64 {
        self.sigma_spectral
    }

    pub fn delta_temporal(&self) -> f64 {
        self.delta_temporal
    }

    pub fn center_wavelength_signal(&self) -> f64 {
        self.center_wavelength_signal
    }

    pub fn center_wavelength_idler(&self) -> f64 {
        self.center_wavelength_idler
    }

    pub fn pump_wavelength(&self) -> f64 {
        self.pump_wavelength
    }

    /// Pump angular frequency `ω_p`.
    pub fn pump_frequency(&self) -> f64 {
        2.0 * PI * SPEED_OF_LIGHT / self.pump_wavelength
    }

    /// Difference of the line-center frequencies, `ω_s0 - ω_i0`.
    pub fn center_difference_frequency(&self) -> f64 {
        2.0 * PI
            * SPEED_OF_LIGHT
            * (1.0 / self.center_wavelength_signal - 1.0 / self.center_wavelength_idler)
    }

    /// Time-bin modes `(f_s, f_i)` at time `t`.
    ///
    /// The idler mode carries the synchronous component plus one displaced
    /// copy per layer: `f_i(t) = g(t) + Σ a_k g(t + τ_k)` with
    /// `g(t) = exp(-Δ²t²/2)`.
    pub fn temporal_modes(&self, profile: &DelayProfile, t: f64) -> (f64, f64) {
        let d2 = self.delta_temporal * self.delta_temporal;
        let mode = |x: f64| (-0.5 * d2 * x * x).exp();
        let f_s = mode(t);
        let f_i = f_s
            + profile
                .layers()
                .iter()
                .map(|l| l.weight * mode(t + l.tau))
                .sum::<f64>();
        (f_s, f_i)
    }

    /// Symmetrized cross-correlation `R(T)` with unit main-peak coefficient.
    ///
    /// `R(T) = exp(-Δ²T²) + Σ (a_k/2)[exp(-Δ²(T+τ_k)²) + exp(-Δ²(T-τ_k)²)]`.
    pub fn cross_correlation(&self, profile: &DelayProfile, lag: f64) -> f64 {
        let d2 = self.delta_temporal * self.delta_temporal;
        let peak = |x: f64| (-d2 * x * x).exp();
        peak(lag)
            + profile
                .layers()
                .iter()
                .map(|l| 0.5 * l.weight * (peak(lag + l.tau) + peak(lag - l.tau)))
                .sum::<f64>()
    }

    /// Spectral envelope density `exp(-ω²/8σ²)/√(2π(2σ)²)`, unit area.
    pub fn envelope_pdf(&self, omega: f64) -> f64 {
        let s = 2.0 * self.sigma_spectral;
        (-(omega * omega) / (2.0 * s * s)).exp() / ((2.0 * PI).sqrt() * s)
    }

    /// Peak-one spectral envelope `exp(-ω²/8σ²)`.
    pub fn envelope_norm(&self, omega: f64) -> f64 {
        let s = 2.0 * self.sigma_spectral;
        (-(omega * omega) / (2.0 * s * s)).exp()
    }

    /// Joint spectral intensity of the anti-bunched pair at difference
    /// frequency `omega`:
    /// `F(ω) = env_pdf(ω)·[1 - s·Σ a_k cos(ωτ_k + φ)]/2`.
    pub fn joint_spectral_intensity(
        &self,
        profile: &DelayProfile,
        cfg: &ForwardModelConfig,
        omega: f64,
    ) -> f64 {
        let fringe = profile.fringe(omega, cfg.phi);
        let value = self.envelope_pdf(omega) * (1.0 - cfg.fringe_sign.value() * fringe) * 0.5;
        // |fringe| ≤ 1, so only rounding can push this below zero.
        value.max(0.0)
    }
}

impl Default for BiphotonSource {
    fn default() -> Self {
        Self::degenerate_nm(Self::DEFAULT_BANDWIDTH).expect("default source is valid")
    }
}

/// One sample-induced delay and its intensity weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub tau: f64,
    pub weight: f64,
}

impl Layer {
    pub fn new(tau: f64, weight: f64) -> Self {
        Self { tau, weight }
    }
}

const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Ordered delays of a (multi-)layer sample with weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Layer>", into = "Vec<Layer>")]
pub struct DelayProfile {
    layers: Vec<Layer>,
}

impl DelayProfile {
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(domain("delay profile needs at least one layer"));
        }
        for (i, l) in layers.iter().enumerate() {
            if !(l.tau.is_finite() && l.tau >= 0.0) {
                return Err(domain(format!(
                    "layer {i}: delay must be >= 0, got {}",
                    l.tau
                )));
            }
            if !(l.weight.is_finite() && l.weight > 0.0) {
                return Err(domain(format!(
                    "layer {i}: weight must be > 0, got {}",
                    l.weight
                )));
            }
        }
        if layers.windows(2).any(|w| w[1].tau <= w[0].tau) {
            return Err(domain("layer delays must be strictly increasing"));
        }
        let total: f64 = layers.iter().map(|l| l.weight).sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(domain(format!("layer weights must sum to 1, got {total}")));
        }
        Ok(Self { layers })
    }

    /// Like [`DelayProfile::new`] but rescales the weights to unit sum and
    /// sorts by delay first.
    pub fn normalized(mut layers: Vec<Layer>) -> Result<Self> {
        let total: f64 = layers.iter().map(|l| l.weight).sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(domain("layer weights must have a positive finite sum"));
        }
        for l in &mut layers {
            l.weight /= total;
        }
        layers.sort_by(|a, b| a.tau.total_cmp(&b.tau));
        Self::new(layers)
    }

    pub fn single(tau: f64) -> Result<Self> {
        Self::new(vec![Layer::new(tau, 1.0)])
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn len(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    pub fn max_tau(&self) -> f64 {
        self.layers.last().map_or(0.0, |l| l.tau)
    }

    /// `Σ a_k cos(ωτ_k + φ)`.
    pub fn fringe(&self, omega: f64, phi: f64) -> f64 {
        self.layers
            .iter()
            .map(|l| l.weight * (omega * l.tau + phi).cos())
            .sum()
    }

    /// `∂/∂τ_k` of [`DelayProfile::fringe`] is `-a_k ω sin(ωτ_k + φ)`; this
    /// returns the sum over layers, i.e. the derivative under a common shift.
    pub fn fringe_shift_derivative(&self, omega: f64, phi: f64) -> f64 {
        -self
            .layers
            .iter()
            .map(|l| l.weight * omega * (omega * l.tau + phi).sin())
            .sum::<f64>()
    }
}

impl TryFrom<Vec<Layer>> for DelayProfile {
    type Error = crate::Error;

    fn try_from(layers: Vec<Layer>) -> Result<Self> {
        Self::new(layers)
    }
}

impl From<DelayProfile> for Vec<Layer> {
    fn from(p: DelayProfile) -> Self {
        p.layers
    }
}

/// Sign in front of the fringe term.
///
/// `Plus` gives `1 - cos(ωτ + φ)`, which vanishes at `ω = 0` for `φ = 0`
/// (the HOM dip). `Minus` gives `1 + cos(ωτ + φ)`, the form of the
/// lossy three-outcome model's coincidence term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum FringeSign {
    #[default]
    Plus,
    Minus,
}

impl FringeSign {
    pub fn value(self) -> f64 {
        match self {
            FringeSign::Plus => 1.0,
            FringeSign::Minus => -1.0,
        }
    }

    pub fn from_value(v: i32) -> Result<Self> {
        match v {
            1 => Ok(FringeSign::Plus),
            -1 => Ok(FringeSign::Minus),
            _ => Err(domain(format!("fringe sign must be +1 or -1, got {v}"))),
        }
    }
}

/// Phase and sign convention of the spectral fringe.
///
/// The default (`φ = 0`, `Plus`) has a zero at the line center. `φ = π`
/// gives the `1 + cos(ωτ)` pattern obtained by transforming the
/// cross-correlation directly.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ForwardModelConfig {
    pub phi: f64,
    pub fringe_sign: FringeSign,
}

impl ForwardModelConfig {
    pub fn new(phi: f64, fringe_sign: FringeSign) -> Self {
        Self { phi, fringe_sign }
    }

    /// `φ = π`: matches the transform of the cross-correlation.
    pub fn correlation_matched() -> Self {
        Self::new(PI, FringeSign::Plus)
    }

    /// `1 + α cos(ωτ)` coincidence term, written exactly as in the
    /// three-outcome loss model.
    pub fn three_outcome_printed() -> Self {
        Self::new(0.0, FringeSign::Minus)
    }
}

/// Converts a wavelength bandwidth about `center_lambda` to angular
/// frequency: `2πc·Δλ/λ²`.
pub fn bandwidth_nm_to_rads(delta_lambda: f64, center_lambda: f64) -> Result<f64> {
    if !(center_lambda.is_finite() && center_lambda > 0.0) {
        return Err(domain(format!(
            "center wavelength must be positive, got {center_lambda}"
        )));
    }
    if !(delta_lambda.is_finite() && delta_lambda >= 0.0) {
        return Err(domain(format!(
            "bandwidth must be non-negative, got {delta_lambda}"
        )));
    }
    Ok(2.0 * PI * SPEED_OF_LIGHT * delta_lambda / (center_lambda * center_lambda))
}

/// Difference frequency `ω_s - ω_i` of a pair whose signal photon is
/// detected at `wavelength`, with the idler fixed by energy conservation.
pub fn wavelength_to_difference_frequency(wavelength: f64, pump_wavelength: f64) -> Result<f64> {
    if !(wavelength.is_finite() && wavelength > 0.0) {
        return Err(domain(format!(
            "wavelength must be positive, got {wavelength}"
        )));
    }
    if !(pump_wavelength.is_finite() && pump_wavelength > 0.0) {
        return Err(domain(format!(
            "pump wavelength must be positive, got {pump_wavelength}"
        )));
    }
    let k = 2.0 * PI * SPEED_OF_LIGHT;
    Ok(2.0 * k / wavelength - k / pump_wavelength)
}

/// Inverse of [`wavelength_to_difference_frequency`].
pub fn difference_frequency_to_wavelength(omega: f64, pump_wavelength: f64) -> Result<f64> {
    if !(pump_wavelength.is_finite() && pump_wavelength > 0.0) {
        return Err(domain(format!(
            "pump wavelength must be positive, got {pump_wavelength}"
        )));
    }
    let k = 2.0 * PI * SPEED_OF_LIGHT;
    let signal = 0.5 * (omega + k / pump_wavelength);
    if !(signal.is_finite() && signal > 0.0) {
        return Err(domain(format!(
            "difference frequency {omega:e} has no physical signal line"
        )));
    }
    Ok(k / signal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ps(x: f64) -> f64 {
        x * 1e-12
    }

    fn src10() -> BiphotonSource {
        BiphotonSource::degenerate_nm(10e-9).unwrap()
    }

    #[test]
    fn delta_is_root_two_sigma() {
        let s = src10();
        assert_eq!(s.delta_temporal(), SQRT_2 * s.sigma_spectral());
    }

    #[test]
    fn rejects_bad_sources() {
        assert!(BiphotonSource::degenerate(0.0).is_err());
        assert!(BiphotonSource::degenerate(-1.0).is_err());
        assert!(BiphotonSource::new(1e13, 800e-9, 810e-9, 405e-9).is_err());
        // 780 + 1/(1/405 - 1/780) is a valid non-degenerate split
        let idler = 1.0 / (1.0 / 405e-9 - 1.0 / 780e-9);
        assert!(BiphotonSource::new(1e13, 780e-9, idler, 405e-9).is_ok());
    }

    #[test]
    fn rejects_bad_profiles() {
        assert!(DelayProfile::new(vec![]).is_err());
        assert!(DelayProfile::new(vec![Layer::new(-1e-15, 1.0)]).is_err());
        assert!(DelayProfile::new(vec![Layer::new(1e-13, 0.5), Layer::new(1e-13, 0.5)]).is_err());
        assert!(DelayProfile::new(vec![Layer::new(2e-13, 0.5), Layer::new(1e-13, 0.5)]).is_err());
        assert!(DelayProfile::new(vec![Layer::new(1e-13, 0.6), Layer::new(2e-13, 0.5)]).is_err());
        assert!(DelayProfile::new(vec![Layer::new(1e-13, 0.0), Layer::new(2e-13, 1.0)]).is_err());
        let p =
            DelayProfile::normalized(vec![Layer::new(2e-13, 3.0), Layer::new(1e-13, 1.0)]).unwrap();
        assert_eq!(p.layers()[0].tau, 1e-13);
        assert_relative_eq!(p.layers()[0].weight, 0.25);
    }

    #[test]
    fn temporal_modes_examples() {
        let s = src10();
        let (f_s, f_i) = s.temporal_modes(&DelayProfile::single(0.0).unwrap(), 0.0);
        assert_eq!(f_s, 1.0);
        assert_eq!(f_i, 2.0);

        let far = DelayProfile::single(1000.0 / s.delta_temporal()).unwrap();
        let (_, f_i) = s.temporal_modes(&far, 0.0);
        assert!((f_i - 1.0).abs() <= 1e-12);

        let tau = ps(0.267);
        let p = DelayProfile::single(tau).unwrap();
        let (_, f_i) = s.temporal_modes(&p, -tau / 2.0);
        let d = s.delta_temporal();
        assert_relative_eq!(
            f_i,
            2.0 * (-d * d * tau * tau / 8.0).exp(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn cross_correlation_examples() {
        let s = src10();
        let tau = 50.0 / s.delta_temporal();
        let p = DelayProfile::single(tau).unwrap();
        assert!((s.cross_correlation(&p, 0.0) - 1.0).abs() <= 1e-12);
        assert!((s.cross_correlation(&p, tau) - 0.5).abs() <= 1e-9);
    }

    /// Trapezoid-rule evaluation of the symmetrized correlation integral
    /// `(∫f_s(t)f_i(t+T)dt + ∫f_i(t)f_s(t+T)dt)/2` for modes of bandwidth
    /// `mode_delta`, divided by the main-peak coefficient `∫f_s(t)²dt`.
    fn ccf_by_integration(mode_delta: f64, profile: &DelayProfile, lag: f64) -> f64 {
        let d2 = mode_delta * mode_delta;
        let g = |x: f64| (-0.5 * d2 * x * x).exp();
        let f_i = |t: f64| {
            g(t) + profile
                .layers()
                .iter()
                .map(|l| l.weight * g(t + l.tau))
                .sum::<f64>()
        };
        let lo = -10.0 / mode_delta - profile.max_tau() - lag.abs();
        let hi = 10.0 / mode_delta + lag.abs();
        let h = 0.02 / mode_delta;
        let n = ((hi - lo) / h).ceil() as usize;
        let h = (hi - lo) / n as f64;
        let trap = |f: &dyn Fn(f64) -> f64| {
            let inner: f64 = (1..n).map(|k| f(lo + k as f64 * h)).sum();
            h * (inner + 0.5 * (f(lo) + f(hi)))
        };
        let cross = 0.5 * (trap(&|t| g(t) * f_i(t + lag)) + trap(&|t| f_i(t) * g(t + lag)));
        cross / trap(&|t| g(t) * g(t))
    }

    #[test]
    fn closed_form_ccf_matches_integrated_modes_of_twice_the_bandwidth() {
        // exp(-aT²/2) is the correlation of exp(-at²); the closed form's
        // exp(-Δ²T²) therefore comes from modes exp(-(2Δ)²t²/2).
        let s = src10();
        let d = s.delta_temporal();
        for profile in [
            DelayProfile::single(ps(0.120)).unwrap(),
            DelayProfile::single(ps(0.020)).unwrap(),
            DelayProfile::new(vec![Layer::new(ps(0.120), 0.5), Layer::new(ps(0.267), 0.5)])
                .unwrap(),
        ] {
            for k in -40..=40 {
                let lag = k as f64 * 0.1 * profile.max_tau().max(1.0 / d) / 4.0;
                let oracle = ccf_by_integration(2.0 * d, &profile, lag);
                let closed = s.cross_correlation(&profile, lag);
                assert!(
                    (oracle - closed).abs() <= 1e-6,
                    "T={lag:e}: {oracle} vs {closed}"
                );
            }
        }
    }

    #[test]
    fn same_bandwidth_modes_give_a_correlation_of_half_the_bandwidth() {
        let s = src10();
        let d = s.delta_temporal();
        let profile = DelayProfile::single(ps(0.267)).unwrap();
        let half = BiphotonSource::degenerate(s.sigma_spectral() / 2.0).unwrap();
        let mut worst_same = 0.0f64;
        for k in -30..=30 {
            let lag = k as f64 * ps(0.02);
            let oracle = ccf_by_integration(d, &profile, lag);
            assert!((oracle - half.cross_correlation(&profile, lag)).abs() <= 1e-6);
            worst_same = worst_same.max((oracle - s.cross_correlation(&profile, lag)).abs());
        }
        assert!(worst_same > 0.1);
    }

    #[test]
    fn jsi_is_zero_at_line_center() {
        let s = BiphotonSource::default();
        let cfg = ForwardModelConfig::default();
        for tau in [0.0, 0.12, 0.2, 0.267, 0.364] {
            let p = DelayProfile::single(ps(tau)).unwrap();
            assert_eq!(s.joint_spectral_intensity(&p, &cfg, 0.0), 0.0);
        }
    }

    #[test]
    fn jsi_zero_spacing_is_two_pi_over_tau() {
        let s = BiphotonSource::default();
        let tau = ps(0.120);
        let p = DelayProfile::single(tau).unwrap();
        let cfg = ForwardModelConfig::default();
        let period = 2.0 * PI / tau;
        assert_relative_eq!(period, 5.236e13, max_relative = 1e-3);
        for k in -3..=3 {
            let w = k as f64 * period;
            assert!(s.joint_spectral_intensity(&p, &cfg, w) <= 1e-12 * s.envelope_pdf(w));
            let crest = w + 0.5 * period;
            assert!(s.joint_spectral_intensity(&p, &cfg, crest) > 0.99 * s.envelope_pdf(crest));
        }
    }

    #[test]
    fn jsi_is_linear_in_layers() {
        let s = BiphotonSource::default();
        let cfg = ForwardModelConfig::new(0.3, FringeSign::Plus);
        let (t1, t2) = (ps(0.120), ps(0.267));
        let two = DelayProfile::new(vec![Layer::new(t1, 0.5), Layer::new(t2, 0.5)]).unwrap();
        let one = DelayProfile::single(t1).unwrap();
        let other = DelayProfile::single(t2).unwrap();
        let span = 12.0 * s.sigma_spectral();
        for k in 0..4096 {
            let w = -span + (k as f64 + 0.5) * 2.0 * span / 4096.0;
            let lhs = s.joint_spectral_intensity(&two, &cfg, w);
            let rhs = 0.5 * s.joint_spectral_intensity(&one, &cfg, w)
                + 0.5 * s.joint_spectral_intensity(&other, &cfg, w);
            assert!((lhs - rhs).abs() <= 1e-12 * s.envelope_pdf(0.0));
        }
    }

    #[test]
    fn envelope_has_unit_area() {
        let s = src10();
        let half = 20.0 * s.sigma_spectral();
        let n = 20_000;
        let h = 2.0 * half / n as f64;
        let area: f64 = (0..=n)
            .map(|k| {
                let w = if k == 0 || k == n { 0.5 } else { 1.0 };
                w * s.envelope_pdf(-half + k as f64 * h)
            })
            .sum::<f64>()
            * h;
        assert!((area - 1.0).abs() <= 1e-9);
        assert_eq!(s.envelope_norm(0.0), 1.0);
    }

    #[test]
    fn bandwidth_conversion() {
        let ten = bandwidth_nm_to_rads(10e-9, 810e-9).unwrap();
        assert_relative_eq!(ten, 2.8726e13, max_relative = 1e-3);
        assert_eq!(bandwidth_nm_to_rads(0.0, 810e-9).unwrap(), 0.0);
        assert_eq!(bandwidth_nm_to_rads(20e-9, 810e-9).unwrap(), 2.0 * ten);
        assert!(bandwidth_nm_to_rads(-1e-9, 810e-9).is_err());
        assert!(bandwidth_nm_to_rads(1e-9, 0.0).is_err());
    }

    #[test]
    fn wavelength_roundtrip() {
        assert!(
            wavelength_to_difference_frequency(810e-9, 405e-9)
                .unwrap()
                .abs()
                < 1e2
        );
        for nm in [770.0, 790.5, 810.0, 833.3, 850.0] {
            let w = wavelength_to_difference_frequency(nm * 1e-9, 405e-9).unwrap();
            let back = difference_frequency_to_wavelength(w, 405e-9).unwrap();
            assert_relative_eq!(back, nm * 1e-9, max_relative = 1e-12);
        }
    }

    proptest::proptest! {
        #[test]
        fn ccf_is_even(tau_fs in 0.0f64..800.0, lag_fs in -1500.0f64..1500.0, w in 0.05f64..0.95) {
            let s = src10();
            let p = DelayProfile::new(vec![
                Layer::new(tau_fs * 1e-15, w),
                Layer::new(tau_fs * 1e-15 + 3e-14, 1.0 - w),
            ]).unwrap();
            let a = s.cross_correlation(&p, lag_fs * 1e-15);
            let b = s.cross_correlation(&p, -lag_fs * 1e-15);
            proptest::prop_assert_eq!(a, b);
        }

        #[test]
        fn jsi_is_nonnegative(tau_fs in 0.0f64..800.0, omega in -4e14f64..4e14, phi in -7.0f64..7.0, minus in proptest::bool::ANY) {
            let s = src10();
            let p = DelayProfile::new(vec![Layer::new(tau_fs * 1e-15, 0.3), Layer::new(tau_fs * 1e-15 + 5e-14, 0.7)]).unwrap();
            let sign = if minus { FringeSign::Minus } else { FringeSign::Plus };
            proptest::prop_assert!(s.joint_spectral_intensity(&p, &ForwardModelConfig::new(phi, sign), omega) >= 0.0);
        }
    }
}
