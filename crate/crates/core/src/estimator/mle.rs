//! Maximum-likelihood refinement of layer delays and weights from counts.

use serde::{Deserialize, Serialize};

use super::optimize::{invert, nelder_mead};
use super::peaks::{extract_delays, PeakReport};
use crate::biphoton::{BiphotonSource, ForwardModelConfig};
use crate::error::{config, input, Result};
use crate::hom::{DetectionModel, OutcomeModel, OutcomeTable, Outcomes, Variant};

/// Weights below this are reported as unidentified layers.
pub const NEAR_ZERO_WEIGHT: f64 = 0.01;
pub const MAX_LAYERS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MleOptions {
    /// Half-width of the coarse delay grid, in temporal grid steps.
    pub grid_half_width_steps: f64,
    pub grid_points: usize,
    /// Local search stops when the simplex is smaller than this many `1/Δ`.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self {
            grid_half_width_steps: 10.0,
            grid_points: 21,
            tolerance: 1e-4,
            max_iterations: 500,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FittedLayer {
    pub tau_hat: f64,
    pub a_hat: f64,
    pub tau_stderr: f64,
    pub a_stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MleResult {
    /// Sorted by delay.
    pub layers: Vec<FittedLayer>,
    pub log_likelihood: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Some fitted weight is below [`NEAR_ZERO_WEIGHT`].
    pub near_zero_weight: bool,
}

/// Multinomial log-likelihood `Σ n log p` restricted to the cells that
/// depend on the layers, plus the constant aggregate terms.
pub struct LogLikelihood {
    variant: Variant,
    alpha_signed: f64,
    phi: f64,
    // (ω, coincidence count, complementary count, log of the cell prefactor,
    // envelope) for bins with any counts.
    bins: Vec<(f64, f64, f64, f64, f64)>,
    // Two-port: K/2. Three-outcome: K/2 and the single-click base.
    half_k: f64,
    base: f64,
    constant: f64,
}

fn n_log_p(n: f64, p: f64) -> f64 {
    if n == 0.0 {
        0.0
    } else if p > 0.0 {
        n * p.ln()
    } else {
        f64::NEG_INFINITY
    }
}

impl LogLikelihood {
    pub fn new(
        counts: &OutcomeTable,
        model: &DetectionModel,
        source: &BiphotonSource,
        cfg: &ForwardModelConfig,
    ) -> Result<Self> {
        if counts.grid() != model.grid() {
            return Err(config(
                "count table and detection model use different grids",
            ));
        }
        let observed = counts
            .counts()
            .ok_or_else(|| input("outcome table carries no counts"))?;
        if observed.variant() != model.variant() {
            return Err(input(format!(
                "counts follow the {} variant but the model is {}",
                observed.variant(),
                model.variant()
            )));
        }
        if counts.total_counts() == 0 {
            return Err(input("count table is empty; the likelihood has no mass"));
        }
        let om = OutcomeModel::new(model, source, cfg);
        let gamma = model.gamma();
        let half_k = 0.5 * model.pair_survival();
        let base = 2.0 * (1.0 + gamma) / (1.0 - gamma);
        let mut bins = Vec::new();
        let constant = match observed {
            Outcomes::TwoPort {
                antibunched,
                bunched,
                single,
                none,
            } => {
                for (j, (&na, &nb)) in antibunched.iter().zip(bunched).enumerate() {
                    if na + nb > 0 {
                        let e = om.envelope()[j];
                        bins.push((om.omegas()[j], na as f64, nb as f64, (half_k * e).ln(), e));
                    }
                }
                n_log_p(*single as f64, 2.0 * gamma * (1.0 - gamma))
                    + n_log_p(*none as f64, gamma * gamma)
            }
            Outcomes::PaperEq16 {
                coincidence,
                single,
                none,
            } => {
                for (j, (&n2, &n1)) in coincidence.iter().zip(single).enumerate() {
                    if n2 + n1 > 0 {
                        let e = om.envelope()[j];
                        bins.push((om.omegas()[j], n2 as f64, n1 as f64, (half_k * e).ln(), e));
                    }
                }
                none.iter().map(|&n| n_log_p(n as f64, gamma * gamma)).sum()
            }
        };
        Ok(Self {
            variant: model.variant(),
            alpha_signed: cfg.fringe_sign.value() * model.alpha(),
            phi: cfg.phi,
            bins,
            half_k,
            base,
            constant,
        })
    }

    /// Log-likelihood of `(τ, a)` layers.
    pub fn eval(&self, layers: &[(f64, f64)]) -> f64 {
        let mut total = self.constant;
        for &(w, n_c, n_o, log_pre, e) in &self.bins {
            let fringe: f64 = layers
                .iter()
                .map(|&(tau, a)| a * (w * tau + self.phi).cos())
                .sum();
            let c = 1.0 - self.alpha_signed * fringe;
            let (log_c, log_o) = match self.variant {
                Variant::TwoPort => (log_pre + c.ln(), log_pre + (2.0 - c).ln()),
                Variant::PaperEq16 => (log_pre + c.ln(), (self.half_k * (self.base - e * c)).ln()),
            };
            if n_c > 0.0 {
                total += if c > 0.0 {
                    n_c * log_c
                } else {
                    f64::NEG_INFINITY
                };
            }
            if n_o > 0.0 {
                total += if log_o.is_nan() {
                    f64::NEG_INFINITY
                } else {
                    n_o * log_o
                };
            }
        }
        total
    }
}

/// Softmax weights from `k - 1` free logits (the last logit is fixed at 0).
fn weights(logits: &[f64]) -> Vec<f64> {
    let top = logits.iter().fold(0.0f64, |m, &u| m.max(u));
    let exps: Vec<f64> = logits
        .iter()
        .map(|u| (u - top).exp())
        .chain([(-top).exp()])
        .collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Parameter vector `[τ_1 Δ, …, τ_k Δ, u_1, …, u_{k-1}]` to layers.
fn unpack(x: &[f64], k: usize, delta: f64) -> Vec<(f64, f64)> {
    let a = weights(&x[k..]);
    x[..k].iter().zip(a).map(|(&t, a)| (t / delta, a)).collect()
}

fn initial_layers(report: &PeakReport, k: usize, step: f64, t_max: f64) -> Vec<(f64, f64)> {
    let found = report.strongest(k);
    if found.is_empty() {
        return (1..=k)
            .map(|i| (i as f64 * 0.5 * t_max / (k + 1) as f64, 1.0 / k as f64))
            .collect();
    }
    let mut layers: Vec<(f64, f64)> = found.iter().map(|d| (d.tau_hat, d.weight_hat)).collect();
    // Unresolved layers start just beside the strongest peak and share its
    // weight.
    let anchor = layers
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let mut extra = 1.0;
    while layers.len() < k {
        let (tau, a) = layers[anchor];
        layers[anchor].1 = 0.5 * a;
        layers.push((tau + 2.0 * extra * step, 0.5 * a));
        extra += 1.0;
    }
    let total: f64 = layers.iter().map(|l| l.1).sum();
    layers.into_iter().map(|(t, a)| (t, a / total)).collect()
}

/// Fits `k_layers` delays and weights to observed counts by maximizing the
/// multinomial likelihood of `model`.
///
/// The search starts from `init`, or from [`extract_delays`] on the
/// coincidence counts, scans a coarse grid around it and then refines with a
/// Nelder–Mead simplex. Weights are parameterized by a softmax so they
/// always sum to one. Standard errors come from the inverse of the
/// finite-difference observed information.
pub fn mle_fit(
    counts: &OutcomeTable,
    model: &DetectionModel,
    source: &BiphotonSource,
    cfg: &ForwardModelConfig,
    k_layers: usize,
    init: Option<&PeakReport>,
) -> Result<MleResult> {
    mle_fit_with(
        counts,
        model,
        source,
        cfg,
        k_layers,
        init,
        &MleOptions::default(),
    )
}

pub fn mle_fit_with(
    counts: &OutcomeTable,
    model: &DetectionModel,
    source: &BiphotonSource,
    cfg: &ForwardModelConfig,
    k_layers: usize,
    init: Option<&PeakReport>,
    options: &MleOptions,
) -> Result<MleResult> {
    if !(1..=MAX_LAYERS).contains(&k_layers) {
        return Err(input(format!(
            "layer count must lie in 1..={MAX_LAYERS}, got {k_layers}"
        )));
    }
    let ll = LogLikelihood::new(counts, model, source, cfg)?;
    let k = k_layers;
    let delta = source.delta_temporal();
    let temporal = counts.grid().conjugate();
    let step = temporal.step();

    let owned;
    let report = match init {
        Some(r) => r,
        None => {
            owned = extract_delays(&counts.coincidence_spectrum(), source).unwrap_or(PeakReport {
                delays: Vec::new(),
                ambiguity_flag: true,
                grid_resolution: step,
            });
            &owned
        }
    };
    let start = initial_layers(report, k, step, temporal.t_max());

    let objective = |x: &[f64]| {
        if x[..k].iter().any(|&t| t < 0.0) {
            return f64::INFINITY;
        }
        -ll.eval(&unpack(x, k, delta))
    };

    let mut x: Vec<f64> = start.iter().map(|l| l.0 * delta).collect();
    let last = start[k - 1].1;
    x.extend(
        start[..k - 1]
            .iter()
            .map(|l| (l.1 / last).ln().clamp(-20.0, 20.0)),
    );

    // Coarse grid: joint over delays when small enough, then per logit.
    let offsets: Vec<f64> = (0..options.grid_points)
        .map(|m| {
            let half = (options.grid_points - 1) as f64 / 2.0;
            if half == 0.0 {
                0.0
            } else {
                (m as f64 - half) / half * options.grid_half_width_steps * step * delta
            }
        })
        .collect();
    let mut best = objective(&x);
    if offsets.len().pow(k as u32) <= 10_000 {
        let center = x.clone();
        let mut idx = vec![0usize; k];
        loop {
            let mut trial = center.clone();
            for i in 0..k {
                trial[i] += offsets[idx[i]];
            }
            let v = objective(&trial);
            if v < best {
                best = v;
                x = trial;
            }
            let mut i = 0;
            while i < k {
                idx[i] += 1;
                if idx[i] < offsets.len() {
                    break;
                }
                idx[i] = 0;
                i += 1;
            }
            if i == k {
                break;
            }
        }
    } else {
        for i in 0..k {
            let center = x[i];
            for &o in &offsets {
                let mut trial = x.clone();
                trial[i] = center + o;
                let v = objective(&trial);
                if v < best {
                    best = v;
                    x = trial;
                }
            }
        }
    }
    for i in k..2 * k - 1 {
        let center = x[i];
        for m in 0..options.grid_points {
            let mut trial = x.clone();
            trial[i] = center + 6.0 * (m as f64 / (options.grid_points.max(2) - 1) as f64 - 0.5);
            let v = objective(&trial);
            if v < best {
                best = v;
                x = trial;
            }
        }
    }

    let mut steps = vec![step * delta; k];
    steps.extend(vec![0.5; k - 1]);
    let mut fit = nelder_mead(
        objective,
        &x,
        &steps,
        options.tolerance,
        options.max_iterations,
    );
    // One restart guards against a collapsed simplex.
    let remaining = options.max_iterations - fit.iterations;
    if fit.converged && remaining > 0 {
        let small: Vec<f64> = steps.iter().map(|s| 0.1 * s).collect();
        let again = nelder_mead(objective, &fit.x, &small, options.tolerance, remaining);
        fit = super::optimize::Minimum {
            iterations: fit.iterations + again.iterations,
            converged: again.converged,
            ..if again.value <= fit.value { again } else { fit }
        };
    }

    let (tau_err, a_err) = standard_errors(&objective, &fit.x, k, delta);
    let mut layers: Vec<FittedLayer> = unpack(&fit.x, k, delta)
        .into_iter()
        .enumerate()
        .map(|(i, (tau_hat, a_hat))| FittedLayer {
            tau_hat,
            a_hat,
            tau_stderr: tau_err[i],
            a_stderr: a_err[i],
        })
        .collect();
    layers.sort_by(|a, b| a.tau_hat.total_cmp(&b.tau_hat));
    let near_zero_weight = layers.iter().any(|l| l.a_hat < NEAR_ZERO_WEIGHT);
    Ok(MleResult {
        layers,
        log_likelihood: -fit.value,
        converged: fit.converged,
        iterations: fit.iterations,
        near_zero_weight,
    })
}

/// Standard errors of delays and weights from the central-difference
/// Hessian of the negative log-likelihood at `x`. Entries are NaN when the
/// observed information is not invertible.
fn standard_errors<F: Fn(&[f64]) -> f64>(
    f: &F,
    x: &[f64],
    k: usize,
    delta: f64,
) -> (Vec<f64>, Vec<f64>) {
    let n = x.len();
    // Delays are in units of 1/Δ, so one step size suits every parameter.
    let h = vec![1e-3; n];
    let at = |moves: &[(usize, f64)]| {
        let mut y = x.to_vec();
        for &(i, d) in moves {
            y[i] += d;
        }
        f(&y)
    };
    let f0 = f(x);
    let mut hess = vec![vec![0.0; n]; n];
    for i in 0..n {
        hess[i][i] = (at(&[(i, h[i])]) - 2.0 * f0 + at(&[(i, -h[i])])) / (h[i] * h[i]);
        for j in 0..i {
            let v = (at(&[(i, h[i]), (j, h[j])])
                - at(&[(i, h[i]), (j, -h[j])])
                - at(&[(i, -h[i]), (j, h[j])])
                + at(&[(i, -h[i]), (j, -h[j])]))
                / (4.0 * h[i] * h[j]);
            hess[i][j] = v;
            hess[j][i] = v;
        }
    }
    let nan = (vec![f64::NAN; k], vec![f64::NAN; k]);
    if hess.iter().flatten().any(|v| !v.is_finite()) {
        return nan;
    }
    let Some(cov) = invert(&hess) else {
        return nan;
    };
    let tau_err = (0..k)
        .map(|i| {
            if cov[i][i] > 0.0 {
                cov[i][i].sqrt() / delta
            } else {
                f64::NAN
            }
        })
        .collect();
    // Delta method through the softmax: ∂a_i/∂u_j = a_i(δ_ij - a_j).
    let a = weights(&x[k..]);
    let jac = |i: usize, j: usize| a[i] * (f64::from(i == j) - a[j]);
    let a_err = (0..k)
        .map(|i| {
            let mut var = 0.0;
            for p in 0..k - 1 {
                for q in 0..k - 1 {
                    var += jac(i, p) * cov[k + p][k + q] * jac(i, q);
                }
            }
            if var >= 0.0 {
                var.sqrt()
            } else {
                f64::NAN
            }
        })
        .collect();
    (tau_err, a_err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::biphoton::{DelayProfile, Layer};
    use crate::hom::{outcome_probabilities, sample_counts};

    fn fit_single(n: u64, seed: u64) -> (MleResult, f64) {
        let source = BiphotonSource::degenerate_nm(10e-9).unwrap();
        let model = DetectionModel::ideal(&source, n);
        let cfg = ForwardModelConfig::default();
        let profile = DelayProfile::single(0.267e-12).unwrap();
        let table = outcome_probabilities(&model, &source, &profile, &cfg);
        let counts = sample_counts(&table, n, seed).unwrap();
        let crb = 0.5 / (source.sigma_spectral() * (n as f64).sqrt());
        (
            mle_fit(&counts, &model, &source, &cfg, 1, None).unwrap(),
            crb,
        )
    }

    #[test]
    fn softmax_weights_sum_to_one() {
        for logits in [vec![], vec![0.3], vec![-2.0, 5.0, 700.0]] {
            let a = weights(&logits);
            assert_eq!(a.len(), logits.len() + 1);
            assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn single_layer_fit_lands_near_truth() {
        let (fit, crb) = fit_single(100_000, 3);
        assert!(fit.converged);
        assert_eq!(fit.layers.len(), 1);
        assert_eq!(fit.layers[0].a_hat, 1.0);
        assert!((fit.layers[0].tau_hat - 0.267e-12).abs() < 6.0 * crb);
        // Observed information is close to N·4σ².
        let ratio = fit.layers[0].tau_stderr / crb;
        assert!((0.8..1.25).contains(&ratio), "stderr/crb = {ratio}");
        assert!(fit.log_likelihood.is_finite());
    }

    #[test]
    fn likelihood_peaks_at_the_truth() {
        let source = BiphotonSource::degenerate_nm(10e-9).unwrap();
        let model = DetectionModel::ideal(&source, 1_000_000);
        let cfg = ForwardModelConfig::default();
        let profile =
            DelayProfile::new(vec![Layer::new(0.12e-12, 0.5), Layer::new(0.267e-12, 0.5)]).unwrap();
        let table = outcome_probabilities(&model, &source, &profile, &cfg);
        let counts = sample_counts(&table, 1_000_000, 11).unwrap();
        let ll = LogLikelihood::new(&counts, &model, &source, &cfg).unwrap();
        let truth = ll.eval(&[(0.12e-12, 0.5), (0.267e-12, 0.5)]);
        assert!(truth > ll.eval(&[(0.125e-12, 0.5), (0.267e-12, 0.5)]));
        assert!(truth > ll.eval(&[(0.12e-12, 0.6), (0.267e-12, 0.4)]));
    }

    #[test]
    fn three_outcome_counts_are_fitted_too() {
        let source = BiphotonSource::degenerate_nm(10e-9).unwrap();
        let model = DetectionModel::ideal(&source, 1000).with_variant(Variant::PaperEq16);
        let cfg = ForwardModelConfig::three_outcome_printed();
        let profile = DelayProfile::single(0.364e-12).unwrap();
        let table = outcome_probabilities(&model, &source, &profile, &cfg);
        let counts = sample_counts(&table, 1000, 5).unwrap();
        let fit = mle_fit(&counts, &model, &source, &cfg, 1, None).unwrap();
        assert!((fit.layers[0].tau_hat - 0.364e-12).abs() < 1e-15);
    }

    #[test]
    fn rejects_empty_and_mismatched_inputs() {
        let source = BiphotonSource::degenerate_nm(10e-9).unwrap();
        let model = DetectionModel::ideal(&source, 10);
        let cfg = ForwardModelConfig::default();
        let table =
            outcome_probabilities(&model, &source, &DelayProfile::single(1e-13).unwrap(), &cfg);
        assert!(matches!(
            mle_fit(&table, &model, &source, &cfg, 1, None),
            Err(crate::Error::Input(_))
        ));
        let n = model.grid().n_bins();
        let zero = table
            .clone()
            .with_counts(Outcomes::TwoPort {
                antibunched: vec![0; n],
                bunched: vec![0; n],
                single: 0,
                none: 0,
            })
            .unwrap();
        assert!(matches!(
            mle_fit(&zero, &model, &source, &cfg, 1, None),
            Err(crate::Error::Input(_))
        ));
        let counts = sample_counts(&table, 10, 1).unwrap();
        assert!(mle_fit(&counts, &model, &source, &cfg, 0, None).is_err());
        assert!(mle_fit(&counts, &model, &source, &cfg, 5, None).is_err());
        let other = model.with_variant(Variant::PaperEq16);
        assert!(mle_fit(&counts, &other, &source, &cfg, 1, None).is_err());
    }
}
