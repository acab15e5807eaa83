//! Delay extraction by Fourier inversion of a measured spectrum.

use serde::{Deserialize, Serialize};

use crate::biphoton::BiphotonSource;
use crate::error::{Error, Result};
use crate::spectral::{inverse_qwkt_windowed, SpectralPattern, Window};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakOptions {
    /// Minimum side-peak height relative to the main peak.
    pub threshold: f64,
    /// Minimum separation between reported peaks, in temporal grid steps.
    pub min_separation_steps: usize,
    /// Side peaks closer to zero delay than this many `1/Δ` overlap the
    /// main peak.
    pub overlap_widths: f64,
    pub window: Window,
}

impl Default for PeakOptions {
    fn default() -> Self {
        Self {
            threshold: 0.02,
            min_separation_steps: 2,
            overlap_widths: 3.0,
            window: Window::None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecoveredDelay {
    pub tau_hat: f64,
    pub weight_hat: f64,
    /// Side-peak height relative to the main peak.
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakReport {
    /// Sorted by delay.
    pub delays: Vec<RecoveredDelay>,
    pub ambiguity_flag: bool,
    pub grid_resolution: f64,
}

impl PeakReport {
    /// The `k` strongest delays, re-sorted by delay.
    pub fn strongest(&self, k: usize) -> Vec<RecoveredDelay> {
        let mut by_height = self.delays.clone();
        by_height.sort_by(|a, b| b.height.total_cmp(&a.height));
        by_height.truncate(k);
        by_height.sort_by(|a, b| a.tau_hat.total_cmp(&b.tau_hat));
        by_height
    }
}

/// Vertex of the parabola through `(−1, l_m)`, `(0, l_0)`, `(1, l_p)`:
/// returns `(offset, value)`.
fn parabola_vertex(l_m: f64, l_0: f64, l_p: f64) -> (f64, f64) {
    let curvature = l_m - 2.0 * l_0 + l_p;
    if curvature >= 0.0 {
        return (0.0, l_0);
    }
    let offset = (0.5 * (l_m - l_p) / curvature).clamp(-0.5, 0.5);
    (offset, l_0 - 0.25 * (l_m - l_p) * offset)
}

/// Peak position and height from three samples around a local maximum.
/// The parabola is fitted to log-magnitudes, which is exact for a Gaussian
/// peak; if a sample is not positive, it falls back to the magnitudes.
fn interpolate_peak(m: f64, c: f64, p: f64) -> (f64, f64) {
    if m > 0.0 && c > 0.0 && p > 0.0 {
        let (offset, value) = parabola_vertex(m.ln(), c.ln(), p.ln());
        (offset, value.exp())
    } else {
        parabola_vertex(m, c, p)
    }
}

/// Recovers sample delays from a spectrum.
///
/// The spectrum is inverted to `R(T)`; local maxima of `|R|` at positive
/// delay above `threshold × main peak` are reported, refined by Gaussian
/// interpolation. Each side peak of relative height `h` corresponds to a
/// layer of weight `2h`; weights are renormalized to sum to one.
pub fn extract_delays(spectrum: &SpectralPattern, source: &BiphotonSource) -> Result<PeakReport> {
    extract_delays_with(spectrum, source, &PeakOptions::default())
}

pub fn extract_delays_with(
    spectrum: &SpectralPattern,
    source: &BiphotonSource,
    options: &PeakOptions,
) -> Result<PeakReport> {
    let r = inverse_qwkt_windowed(spectrum, options.window);
    let mag = r.magnitudes();
    let grid = r.grid();
    let step = grid.step();
    let n = mag.len();
    // Samples at ±step/2 straddle zero delay.
    let right = n / 2;
    let left = right - 1;

    let argmax = mag
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(j, _)| j)
        .unwrap_or(right);
    if mag[argmax] <= 0.0 || grid.value(argmax).abs() > 2.0 * step {
        return Err(Error::MalformedSpectrum(format!(
            "largest correlation sample is at {:e} s, not within two grid steps of zero",
            grid.value(argmax)
        )));
    }

    // The main peak is centered on zero by construction: fit a
    // log-parabola in T² through the symmetric sample pairs.
    let inner = 0.5 * (mag[left] + mag[right]);
    let outer = 0.5 * (mag[left - 1] + mag[right + 1]);
    let main = if inner > 0.0 && outer > 0.0 && outer < inner {
        let (l1, l3) = (inner.ln(), outer.ln());
        (l1 + (l1 - l3) / 8.0).exp()
    } else {
        mag[argmax]
    };

    let threshold = options.threshold * main;
    let mut candidates: Vec<(usize, f64, f64)> = Vec::new();
    for j in right + 1..n - 1 {
        if mag[j] > mag[j - 1] && mag[j] >= mag[j + 1] && mag[j] >= threshold {
            let (offset, height) = interpolate_peak(mag[j - 1], mag[j], mag[j + 1]);
            candidates.push((j, grid.value(j) + offset * step, height));
        }
    }
    candidates.sort_by(|a, b| b.2.total_cmp(&a.2));
    let mut kept: Vec<(usize, f64, f64)> = Vec::new();
    for c in candidates {
        if kept
            .iter()
            .all(|k| k.0.abs_diff(c.0) >= options.min_separation_steps)
        {
            kept.push(c);
        }
    }
    kept.sort_by(|a, b| a.1.total_cmp(&b.1));

    let total: f64 = kept.iter().map(|k| 2.0 * k.2 / main).sum();
    let delays: Vec<RecoveredDelay> = kept
        .iter()
        .map(|&(_, tau_hat, height)| RecoveredDelay {
            tau_hat,
            weight_hat: 2.0 * height / main / total,
            height: height / main,
        })
        .collect();

    let overlap = options.overlap_widths / source.delta_temporal();
    let crowded = delays
        .windows(2)
        .any(|w| w[1].tau_hat - w[0].tau_hat < options.min_separation_steps as f64 * step);
    let ambiguity_flag = crowded || delays.iter().any(|d| d.tau_hat < overlap);

    Ok(PeakReport {
        delays,
        ambiguity_flag,
        grid_resolution: step,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::biphoton::{DelayProfile, ForwardModelConfig, Layer};
    use crate::spectral::FrequencyGrid;

    fn spectrum(source: &BiphotonSource, layers: &[(f64, f64)]) -> SpectralPattern {
        let profile =
            DelayProfile::new(layers.iter().map(|&(t, a)| Layer::new(t, a)).collect()).unwrap();
        let grid = FrequencyGrid::default_for(source);
        SpectralPattern::from_model(source, &profile, &ForwardModelConfig::default(), &grid)
    }

    #[test]
    fn single_delay_within_one_step() {
        let source = BiphotonSource::default();
        let r = extract_delays(&spectrum(&source, &[(0.364e-12, 1.0)]), &source).unwrap();
        assert_eq!(r.delays.len(), 1);
        assert!((r.delays[0].tau_hat - 0.364e-12).abs() <= r.grid_resolution);
        assert!((r.delays[0].weight_hat - 1.0).abs() < 1e-12);
        assert!((r.delays[0].height - 0.5).abs() < 0.02);
        assert!(!r.ambiguity_flag);
    }

    #[test]
    fn two_delays_and_their_weights() {
        let source = BiphotonSource::default();
        let r = extract_delays(
            &spectrum(&source, &[(0.12e-12, 0.5), (0.267e-12, 0.5)]),
            &source,
        )
        .unwrap();
        assert_eq!(r.delays.len(), 2);
        for (d, tau) in r.delays.iter().zip([0.12e-12, 0.267e-12]) {
            assert!((d.tau_hat - tau).abs() <= r.grid_resolution);
            assert!((d.weight_hat - 0.5).abs() <= 0.05);
        }
        let unequal = extract_delays(
            &spectrum(&source, &[(0.1e-12, 0.3), (0.4e-12, 0.7)]),
            &source,
        )
        .unwrap();
        assert!((unequal.delays[0].weight_hat - 0.3).abs() <= 0.05);
    }

    #[test]
    fn overlapping_peak_is_flagged() {
        let source = BiphotonSource::default();
        let near = 2.0 / source.delta_temporal();
        let r = extract_delays(&spectrum(&source, &[(near, 1.0)]), &source).unwrap();
        assert!(r.ambiguity_flag);
    }

    #[test]
    fn plain_envelope_has_no_side_peaks() {
        let source = BiphotonSource::default();
        let grid = FrequencyGrid::default_for(&source);
        let values = grid
            .values()
            .iter()
            .map(|&w| source.envelope_pdf(w))
            .collect();
        let s =
            SpectralPattern::new(grid, values, crate::spectral::PatternKind::IdealDensity).unwrap();
        let r = extract_delays(&s, &source).unwrap();
        assert!(r.delays.is_empty() && !r.ambiguity_flag);
    }

    #[test]
    fn missing_main_peak_is_malformed() {
        let source = BiphotonSource::default();
        let grid = FrequencyGrid::default_for(&source);
        let zero = SpectralPattern::new(
            grid.clone(),
            vec![0.0; grid.n_bins()],
            crate::spectral::PatternKind::IdealDensity,
        )
        .unwrap();
        assert!(matches!(
            extract_delays(&zero, &source),
            Err(Error::MalformedSpectrum(_))
        ));
    }

    #[test]
    fn strongest_keeps_delay_order() {
        let r = PeakReport {
            delays: vec![
                RecoveredDelay {
                    tau_hat: 1.0,
                    weight_hat: 0.2,
                    height: 0.1,
                },
                RecoveredDelay {
                    tau_hat: 2.0,
                    weight_hat: 0.5,
                    height: 0.25,
                },
                RecoveredDelay {
                    tau_hat: 3.0,
                    weight_hat: 0.3,
                    height: 0.15,
                },
            ],
            ambiguity_flag: false,
            grid_resolution: 0.1,
        };
        let s: Vec<f64> = r.strongest(2).iter().map(|d| d.tau_hat).collect();
        assert_eq!(s, vec![2.0, 3.0]);
    }
}
