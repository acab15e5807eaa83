//! Hong–Ou–Mandel interferometer with spectrally resolved detection.
//!
//! Two outcome models are provided:
//!
//! * [`Variant::PaperEq16`] evaluates the three-outcome loss model (both
//!   detectors click, one clicks, none clicks) independently at every grid
//!   frequency, with the envelope taken as the peak-one `exp(-ω²/8σ²)` so
//!   each frequency is a proper trinomial.
//! * [`Variant::TwoPort`] is a single distribution over all outcomes:
//!   anti-bunched and bunched pairs per frequency bin, plus aggregate
//!   single-click `2γ(1-γ)` and no-click `γ²` events. Each photon survives
//!   independently with probability `1-γ`. This is the default generative
//!   model for sampling and likelihood fitting.
//!
//! The coincidence fringe in both is `1 - s·α·Σ a_k cos(ωτ_k + φ)` with `s`
//! and `φ` from [`ForwardModelConfig`]. The default (`s = +1`) puts the
//! HOM dip at `ω = 0`; [`ForwardModelConfig::three_outcome_printed`] gives
//! the `1 + α cos(ωτ)` form.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_distr::{Binomial, Distribution};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::biphoton::{BiphotonSource, DelayProfile, ForwardModelConfig};
use crate::error::{domain, input, Result};
use crate::spectral::{FrequencyGrid, PatternKind, SpectralPattern};

/// Pump linewidth used by [`JointAmplitude::from_source`], relative to `σ`.
/// Small enough that the pump is monochromatic for every quantity computed
/// here.
pub const DEFAULT_PUMP_LINEWIDTH: f64 = 1e-4;

/// Joint spectral amplitude `f(ω_s, ω_i)`: Gaussian of RMS width `2σ` in the
/// difference frequency and of the pump linewidth in the sum frequency,
/// normalized so `∫∫|f|² dω_s dω_i = 1`.
///
/// With the symmetry flag set, the difference-frequency part is the
/// normalized sum of lobes at `±(ω_s0 - ω_i0)` so that
/// `f(ω₁, ω₂) = f(ω₂, ω₁)`; for a degenerate source this is the plain
/// Gaussian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointAmplitude {
    pub sigma: f64,
    pub pump_frequency: f64,
    pub center_difference: f64,
    pub pump_linewidth: f64,
    pub symmetric: bool,
}

impl JointAmplitude {
    pub fn from_source(source: &BiphotonSource, symmetric: bool) -> Self {
        Self {
            sigma: source.sigma_spectral(),
            pump_frequency: source.pump_frequency(),
            center_difference: source.center_difference_frequency(),
            pump_linewidth: DEFAULT_PUMP_LINEWIDTH * source.sigma_spectral(),
            symmetric,
        }
    }

    fn sqrt_normal(x: f64, s: f64) -> f64 {
        ((-(x * x) / (4.0 * s * s)).exp()) / ((2.0 * PI).sqrt() * s).sqrt()
    }

    /// Overlap `exp(-Ω₀²/8σ²)` of the two symmetrized lobes.
    pub fn lobe_overlap(&self) -> f64 {
        let d = self.center_difference;
        (-(d * d) / (8.0 * self.sigma * self.sigma)).exp()
    }

    /// Amplitude as a function of difference and sum-minus-pump frequency.
    pub fn eval_rotated(&self, difference: f64, sum_offset: f64) -> f64 {
        let s = 2.0 * self.sigma;
        let d = self.center_difference;
        let diff = if self.symmetric {
            (Self::sqrt_normal(difference - d, s) + Self::sqrt_normal(difference + d, s))
                / (2.0 * (1.0 + self.lobe_overlap())).sqrt()
        } else {
            Self::sqrt_normal(difference - d, s)
        };
        SQRT_2 * diff * Self::sqrt_normal(sum_offset, self.pump_linewidth)
    }

    pub fn eval(&self, omega_s: f64, omega_i: f64) -> f64 {
        self.eval_rotated(omega_s - omega_i, omega_s + omega_i - self.pump_frequency)
    }
}

/// Anti-bunched term `½[f(ω_s,ω_i) - f(ω_i,ω_s) e^{-i(ω_s-ω_i)τ}]` of the
/// beam-splitter output; its squared modulus integrates to the coincidence
/// probability.
pub fn antibunch_amplitude(f: &JointAmplitude, tau: f64, omega_s: f64, omega_i: f64) -> Complex64 {
    let direct = Complex64::new(f.eval(omega_s, omega_i), 0.0);
    let swapped = f.eval(omega_i, omega_s) * Complex64::from_polar(1.0, -(omega_s - omega_i) * tau);
    0.5 * (direct - swapped)
}

/// Normalized coincidence probability of the symmetric Gaussian pair.
///
/// For a degenerate source this is `(1 - exp(-2σ²τ²))/2`; a non-degenerate
/// symmetric pair adds a beat at the center difference frequency.
pub fn coincidence_probability(source: &BiphotonSource, tau: f64) -> f64 {
    let sigma = source.sigma_spectral();
    let envelope = (-2.0 * sigma * sigma * tau * tau).exp();
    let d = source.center_difference_frequency();
    if d == 0.0 {
        return 0.5 * (1.0 - envelope);
    }
    let overlap = (-(d * d) / (8.0 * sigma * sigma)).exp();
    0.5 * (1.0 - envelope * ((d * tau).cos() + overlap) / (1.0 + overlap))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    PaperEq16,
    #[default]
    TwoPort,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::PaperEq16 => "paper-eq16",
            Variant::TwoPort => "two-port",
        })
    }
}

impl std::str::FromStr for Variant {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper-eq16" => Ok(Variant::PaperEq16),
            "two-port" => Ok(Variant::TwoPort),
            other => Err(domain(format!(
                "unknown variant {other:?} (paper-eq16 | two-port)"
            ))),
        }
    }
}

/// Loss, visibility, trial count and spectral binning of a measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionModel {
    gamma: f64,
    alpha: f64,
    n_trials: u64,
    grid: FrequencyGrid,
    variant: Variant,
}

impl DetectionModel {
    pub fn new(
        gamma: f64,
        alpha: f64,
        n_trials: u64,
        grid: FrequencyGrid,
        variant: Variant,
    ) -> Result<Self> {
        if !(0.0..1.0).contains(&gamma) {
            return Err(domain(format!("loss must lie in [0, 1), got {gamma}")));
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(domain(format!(
                "visibility must lie in [0, 1], got {alpha}"
            )));
        }
        if n_trials == 0 {
            return Err(domain("trial count must be at least 1"));
        }
        Ok(Self {
            gamma,
            alpha,
            n_trials,
            grid,
            variant,
        })
    }

    /// Lossless, unit-visibility two-port model on the default grid.
    pub fn ideal(source: &BiphotonSource, n_trials: u64) -> Self {
        Self::new(
            0.0,
            1.0,
            n_trials,
            FrequencyGrid::default_for(source),
            Variant::TwoPort,
        )
        .expect("ideal model is valid")
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn n_trials(&self) -> u64 {
        self.n_trials
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn with_variant(&self, variant: Variant) -> Self {
        Self {
            variant,
            ..self.clone()
        }
    }

    pub fn with_n_trials(&self, n_trials: u64) -> Result<Self> {
        Self::new(
            self.gamma,
            self.alpha,
            n_trials,
            self.grid.clone(),
            self.variant,
        )
    }

    /// Both photons survive.
    pub fn pair_survival(&self) -> f64 {
        (1.0 - self.gamma) * (1.0 - self.gamma)
    }
}

/// Outcome probabilities or counts, shaped by variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "kebab-case")]
pub enum Outcomes<T> {
    /// Independent trinomial at each frequency.
    PaperEq16 {
        coincidence: Vec<T>,
        single: Vec<T>,
        none: Vec<T>,
    },
    /// One distribution over every bin of both ports plus two aggregates.
    TwoPort {
        antibunched: Vec<T>,
        bunched: Vec<T>,
        single: T,
        none: T,
    },
}

impl<T: Copy> Outcomes<T> {
    pub fn variant(&self) -> Variant {
        match self {
            Outcomes::PaperEq16 { .. } => Variant::PaperEq16,
            Outcomes::TwoPort { .. } => Variant::TwoPort,
        }
    }

    /// Per-bin coincidence (anti-bunched) entries.
    pub fn coincidence(&self) -> &[T] {
        match self {
            Outcomes::PaperEq16 { coincidence, .. } => coincidence,
            Outcomes::TwoPort { antibunched, .. } => antibunched,
        }
    }

    /// Every entry in a fixed order: per-bin vectors first, then aggregates.
    pub fn flatten(&self) -> Vec<T> {
        match self {
            Outcomes::PaperEq16 {
                coincidence,
                single,
                none,
            } => coincidence
                .iter()
                .chain(single)
                .chain(none)
                .copied()
                .collect(),
            Outcomes::TwoPort {
                antibunched,
                bunched,
                single,
                none,
            } => antibunched
                .iter()
                .chain(bunched)
                .copied()
                .chain([*single, *none])
                .collect(),
        }
    }
}

/// Outcome probabilities on a grid, optionally with sampled counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeTable {
    grid: FrequencyGrid,
    probabilities: Outcomes<f64>,
    counts: Option<Outcomes<u64>>,
}

impl OutcomeTable {
    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn variant(&self) -> Variant {
        self.probabilities.variant()
    }

    pub fn probabilities(&self) -> &Outcomes<f64> {
        &self.probabilities
    }

    pub fn counts(&self) -> Option<&Outcomes<u64>> {
        self.counts.as_ref()
    }

    /// Attaches externally observed counts (e.g. read from a file) to the
    /// table; the shape must match the probabilities.
    pub fn with_counts(mut self, counts: Outcomes<u64>) -> Result<Self> {
        let n = self.grid.n_bins();
        let ok = match (&self.probabilities, &counts) {
            (
                Outcomes::TwoPort { .. },
                Outcomes::TwoPort {
                    antibunched,
                    bunched,
                    ..
                },
            ) => antibunched.len() == n && bunched.len() == n,
            (
                Outcomes::PaperEq16 { .. },
                Outcomes::PaperEq16 {
                    coincidence,
                    single,
                    none,
                },
            ) => coincidence.len() == n && single.len() == n && none.len() == n,
            _ => false,
        };
        if !ok {
            return Err(input(
                "counts do not match the outcome table's variant or grid",
            ));
        }
        self.counts = Some(counts);
        Ok(self)
    }

    pub fn total_counts(&self) -> u64 {
        self.counts.as_ref().map_or(0, |c| c.flatten().iter().sum())
    }

    /// Coincidence counts (or, without counts, probabilities) as a spectrum.
    pub fn coincidence_spectrum(&self) -> SpectralPattern {
        let (values, kind) = match &self.counts {
            Some(c) => (
                c.coincidence().iter().map(|&v| v as f64).collect(),
                PatternKind::Counts,
            ),
            None => (
                self.probabilities.coincidence().to_vec(),
                PatternKind::IdealDensity,
            ),
        };
        SpectralPattern::new(self.grid.clone(), values, kind).expect("table entries are valid")
    }
}

/// Mass of a centered normal with RMS width `s` between `lo` and `hi`.
pub(crate) fn normal_mass(lo: f64, hi: f64, s: f64) -> f64 {
    let z = |x: f64| x / (s * SQRT_2);
    if lo >= 0.0 {
        0.5 * (libm::erfc(z(lo)) - libm::erfc(z(hi)))
    } else if hi <= 0.0 {
        0.5 * (libm::erfc(-z(hi)) - libm::erfc(-z(lo)))
    } else {
        1.0 - 0.5 * (libm::erfc(-z(lo)) + libm::erfc(z(hi)))
    }
}

/// Envelope mass per bin, renormalized to sum to one over the grid.
pub fn envelope_bins(source: &BiphotonSource, grid: &FrequencyGrid) -> Vec<f64> {
    let s = 2.0 * source.sigma_spectral();
    let raw: Vec<f64> = (0..grid.n_bins())
        .map(|k| {
            let (lo, hi) = grid.bin_edges(k);
            normal_mass(lo, hi, s)
        })
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|m| m / total).collect()
}

/// Precomputed per-bin pieces of an outcome model; evaluates the
/// probabilities for any delay profile.
#[derive(Debug, Clone)]
pub struct OutcomeModel {
    variant: Variant,
    gamma: f64,
    alpha: f64,
    cfg: ForwardModelConfig,
    omegas: Vec<f64>,
    envelope: Vec<f64>,
}

impl OutcomeModel {
    pub fn new(model: &DetectionModel, source: &BiphotonSource, cfg: &ForwardModelConfig) -> Self {
        let omegas = model.grid.values();
        let envelope = match model.variant {
            Variant::TwoPort => envelope_bins(source, &model.grid),
            Variant::PaperEq16 => omegas.iter().map(|&w| source.envelope_norm(w)).collect(),
        };
        Self {
            variant: model.variant,
            gamma: model.gamma,
            alpha: model.alpha,
            cfg: *cfg,
            omegas,
            envelope,
        }
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    /// Per-bin envelope: bin mass for two-port, peak-one density otherwise.
    pub fn envelope(&self) -> &[f64] {
        &self.envelope
    }

    pub fn config(&self) -> &ForwardModelConfig {
        &self.cfg
    }

    /// `1 - s·α·Σ a_k cos(ω_j τ_k + φ)` for bin `j`, from a fringe value.
    fn coincidence_factor(&self, fringe: f64) -> f64 {
        1.0 - self.cfg.fringe_sign.value() * self.alpha * fringe
    }

    /// Probabilities for the given layers. `layers` may be any
    /// `(τ, a)` pairs; weights are not required to be normalized here.
    pub fn probabilities(&self, layers: &[(f64, f64)]) -> Outcomes<f64> {
        let k = (1.0 - self.gamma) * (1.0 - self.gamma);
        let g = self.gamma;
        let phi = self.cfg.phi;
        let factors = self.omegas.iter().map(|&w| {
            let fringe: f64 = layers
                .iter()
                .map(|&(tau, a)| a * (w * tau + phi).cos())
                .sum();
            self.coincidence_factor(fringe)
        });
        match self.variant {
            Variant::TwoPort => {
                let (antibunched, bunched) = factors
                    .zip(&self.envelope)
                    .map(|(c, e)| (0.5 * k * e * c, 0.5 * k * e * (2.0 - c)))
                    .unzip();
                Outcomes::TwoPort {
                    antibunched,
                    bunched,
                    single: 2.0 * g * (1.0 - g),
                    none: g * g,
                }
            }
            Variant::PaperEq16 => {
                let n = self.omegas.len();
                let base = 2.0 * (1.0 + g) / (1.0 - g);
                let (coincidence, single) = factors
                    .zip(&self.envelope)
                    .map(|(c, e)| (0.5 * k * e * c, 0.5 * k * (base - e * c)))
                    .unzip();
                Outcomes::PaperEq16 {
                    coincidence,
                    single,
                    none: vec![g * g; n],
                }
            }
        }
    }
}

/// Outcome probabilities of `model` for a sample described by `profile`.
pub fn outcome_probabilities(
    model: &DetectionModel,
    source: &BiphotonSource,
    profile: &DelayProfile,
    cfg: &ForwardModelConfig,
) -> OutcomeTable {
    let layers: Vec<(f64, f64)> = profile.layers().iter().map(|l| (l.tau, l.weight)).collect();
    OutcomeTable {
        grid: model.grid.clone(),
        probabilities: OutcomeModel::new(model, source, cfg).probabilities(&layers),
        counts: None,
    }
}

/// Draws `n` trials over `probs` by sequential binomial splitting: cell `k`
/// receives `Binomial(n_left, p_k / mass_left)`, the last cell the rest.
fn split_multinomial(n: u64, probs: &[f64], rng: &mut Xoshiro256PlusPlus) -> Vec<u64> {
    let mut counts = vec![0u64; probs.len()];
    let mut left = n;
    let mut mass: f64 = probs.iter().sum();
    for (k, &p) in probs.iter().enumerate() {
        if left == 0 {
            break;
        }
        if k + 1 == probs.len() {
            counts[k] = left;
            break;
        }
        let q = if mass > 0.0 {
            (p / mass).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let draw = if q >= 1.0 {
            left
        } else if q <= 0.0 {
            0
        } else {
            Binomial::new(left, q)
                .expect("q lies in (0, 1)")
                .sample(rng)
        };
        counts[k] = draw;
        left -= draw;
        mass -= p;
    }
    counts
}

/// Samples outcome counts for `n_trials` trials.
///
/// Two-port tables get one multinomial draw across all cells in the order of
/// [`Outcomes::flatten`]. Three-outcome tables get an independent
/// `n_trials`-trial trinomial per bin, in bin order. The generator is
/// xoshiro256++ seeded through SplitMix64, so a seed fixes the result.
pub fn sample_counts(table: &OutcomeTable, n_trials: u64, seed: u64) -> Result<OutcomeTable> {
    if n_trials == 0 {
        return Err(input("trial count must be at least 1"));
    }
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let counts = match &table.probabilities {
        Outcomes::TwoPort { antibunched, .. } => {
            let n = antibunched.len();
            let flat = split_multinomial(n_trials, &table.probabilities.flatten(), &mut rng);
            Outcomes::TwoPort {
                antibunched: flat[..n].to_vec(),
                bunched: flat[n..2 * n].to_vec(),
                single: flat[2 * n],
                none: flat[2 * n + 1],
            }
        }
        Outcomes::PaperEq16 {
            coincidence,
            single,
            none,
        } => {
            n_trials
                .checked_mul(coincidence.len() as u64)
                .ok_or_else(|| input("total trial count overflows the count type"))?;
            let mut c = Vec::with_capacity(coincidence.len());
            let mut s = Vec::with_capacity(coincidence.len());
            let mut z = Vec::with_capacity(coincidence.len());
            for j in 0..coincidence.len() {
                let draw =
                    split_multinomial(n_trials, &[coincidence[j], single[j], none[j]], &mut rng);
                c.push(draw[0]);
                s.push(draw[1]);
                z.push(draw[2]);
            }
            Outcomes::PaperEq16 {
                coincidence: c,
                single: s,
                none: z,
            }
        }
    };
    Ok(OutcomeTable {
        counts: Some(counts),
        ..table.clone()
    })
}
