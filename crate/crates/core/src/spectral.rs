//! Discrete grids and the Fourier pair linking the cross-correlation `R(T)`
//! to the joint spectral intensity `F(ω)`:
//!
//! ```text
//! F(ω) = (1/2π) ∫ R(T) e^{+iωT} dT        R(T) = ∫ F(ω) e^{-iωT} dω
//! ```
//!
//! Both grids are uniform with bin centers placed symmetrically about zero
//! (no sample sits at the origin), and are Nyquist-paired:
//! `dω · dT = 2π / N`. On such a pair the midpoint sums of the two
//! integrals are exact inverses of each other, so a round trip is the
//! identity up to rounding.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::biphoton::{BiphotonSource, DelayProfile, ForwardModelConfig};
use crate::error::{config, input, Result};

/// Default frequency window in units of the envelope width `2σ`.
pub const DEFAULT_WINDOW_WIDTHS: f64 = 6.0;
pub const DEFAULT_BINS: usize = 4096;
pub const MIN_BINS: usize = 16;

/// Relative imaginary residue tolerated when a transform output is
/// declared real.
pub const REAL_RESIDUE_TOL: f64 = 1e-9;

/// Negative excursions of a transformed density, relative to its peak, that
/// are attributed to aliasing at the window edge and clamped to zero.
pub const NEGATIVE_CLAMP_TOL: f64 = 1e-6;

/// Bin centers `ω_k = (k - (N-1)/2)·dω`, `k = 0..N`, over `[-ω_max, ω_max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    omega_max: f64,
    n_bins: usize,
}

impl FrequencyGrid {
    pub fn new(omega_max: f64, n_bins: usize) -> Result<Self> {
        if !(omega_max.is_finite() && omega_max > 0.0) {
            return Err(config(format!(
                "frequency half-width must be positive, got {omega_max}"
            )));
        }
        if n_bins < MIN_BINS || !n_bins.is_multiple_of(2) {
            return Err(config(format!(
                "frequency grid needs an even bin count >= {MIN_BINS}, got {n_bins}"
            )));
        }
        Ok(Self { omega_max, n_bins })
    }

    /// `±6·(2σ)` with 4096 bins.
    pub fn default_for(source: &BiphotonSource) -> Self {
        Self::new(
            DEFAULT_WINDOW_WIDTHS * 2.0 * source.sigma_spectral(),
            DEFAULT_BINS,
        )
        .expect("default grid is valid")
    }

    /// Recovers the grid from a list of bin centers, which must be uniform
    /// and symmetric about zero to within `rel_tol` of a bin width.
    pub fn from_centers(centers: &[f64], rel_tol: f64) -> Result<Self> {
        let n = centers.len();
        if n < MIN_BINS || !n.is_multiple_of(2) {
            return Err(config(format!(
                "frequency grid needs an even bin count >= {MIN_BINS}, got {n}"
            )));
        }
        let step = (centers[n - 1] - centers[0]) / (n - 1) as f64;
        let grid = Self::new(0.5 * step * n as f64, n)?;
        for (k, &w) in centers.iter().enumerate() {
            if (w - grid.value(k)).abs() > rel_tol * step {
                return Err(config(format!(
                    "bin {k} at {w:e} rad/s is off the uniform symmetric grid"
                )));
            }
        }
        Ok(grid)
    }

    pub fn omega_min(&self) -> f64 {
        -self.omega_max
    }

    pub fn omega_max(&self) -> f64 {
        self.omega_max
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn step(&self) -> f64 {
        2.0 * self.omega_max / self.n_bins as f64
    }

    pub fn value(&self, k: usize) -> f64 {
        (k as f64 - 0.5 * (self.n_bins as f64 - 1.0)) * self.step()
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.n_bins).map(|k| self.value(k)).collect()
    }

    /// Edges `(lo, hi)` of bin `k`.
    pub fn bin_edges(&self, k: usize) -> (f64, f64) {
        let lo = -self.omega_max + k as f64 * self.step();
        (lo, lo + self.step())
    }

    /// The Nyquist-paired temporal grid.
    pub fn conjugate(&self) -> TemporalGrid {
        TemporalGrid {
            step: 2.0 * PI / (self.n_bins as f64 * self.step()),
            n_bins: self.n_bins,
        }
    }
}

/// Relative-delay grid conjugate to a [`FrequencyGrid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemporalGrid {
    step: f64,
    n_bins: usize,
}

impl TemporalGrid {
    pub fn t_max(&self) -> f64 {
        0.5 * self.step * self.n_bins as f64
    }

    pub fn t_min(&self) -> f64 {
        -self.t_max()
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn value(&self, j: usize) -> f64 {
        (j as f64 - 0.5 * (self.n_bins as f64 - 1.0)) * self.step
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.n_bins).map(|j| self.value(j)).collect()
    }

    /// The frequency grid this one is paired with.
    pub fn conjugate(&self) -> FrequencyGrid {
        FrequencyGrid {
            omega_max: PI / self.step,
            n_bins: self.n_bins,
        }
    }

    fn is_paired_with(&self, grid: &FrequencyGrid) -> bool {
        self.n_bins == grid.n_bins
            && ((self.step * grid.step() * self.n_bins as f64) / (2.0 * PI) - 1.0).abs() < 1e-12
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PatternKind {
    IdealDensity,
    Counts,
}

/// Sampled joint spectral intensity on a difference-frequency grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralPattern {
    grid: FrequencyGrid,
    intensity: Vec<f64>,
    kind: PatternKind,
}

impl SpectralPattern {
    pub fn new(grid: FrequencyGrid, intensity: Vec<f64>, kind: PatternKind) -> Result<Self> {
        if intensity.len() != grid.n_bins() {
            return Err(input(format!(
                "{} intensity values for a {}-bin grid",
                intensity.len(),
                grid.n_bins()
            )));
        }
        if let Some(k) = intensity.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(input(format!(
                "bin {k} has invalid intensity {}",
                intensity[k]
            )));
        }
        if kind == PatternKind::Counts {
            if let Some(k) = intensity.iter().position(|v| v.fract() != 0.0) {
                return Err(input(format!(
                    "bin {k}: counts must be integers, got {}",
                    intensity[k]
                )));
            }
        }
        Ok(Self {
            grid,
            intensity,
            kind,
        })
    }

    /// Samples the closed-form joint spectral intensity at the bin centers.
    pub fn from_model(
        source: &BiphotonSource,
        profile: &DelayProfile,
        cfg: &ForwardModelConfig,
        grid: &FrequencyGrid,
    ) -> Self {
        let intensity = grid
            .values()
            .into_iter()
            .map(|w| source.joint_spectral_intensity(profile, cfg, w))
            .collect();
        Self {
            grid: grid.clone(),
            intensity,
            kind: PatternKind::IdealDensity,
        }
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn intensity(&self) -> &[f64] {
        &self.intensity
    }

    pub fn kind(&self) -> PatternKind {
        self.kind
    }
}

/// Sampled cross-correlation on a relative-delay grid. Values are complex;
/// they are real (to rounding) whenever the spectrum they came from is
/// symmetric in `ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalCorrelation {
    grid: TemporalGrid,
    values: Vec<Complex64>,
}

impl TemporalCorrelation {
    pub fn new(grid: TemporalGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n_bins() {
            return Err(input(format!(
                "{} correlation values for a {}-bin grid",
                values.len(),
                grid.n_bins()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_real(grid: TemporalGrid, values: Vec<f64>) -> Result<Self> {
        Self::new(
            grid,
            values.into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
        )
    }

    /// Samples the closed-form cross-correlation, scaled by `scale`.
    pub fn from_model(
        source: &BiphotonSource,
        profile: &DelayProfile,
        grid: &TemporalGrid,
        scale: f64,
    ) -> Self {
        let values = grid
            .values()
            .into_iter()
            .map(|t| Complex64::new(scale * source.cross_correlation(profile, t), 0.0))
            .collect();
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn grid(&self) -> &TemporalGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn real_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    /// `max |Im| / max |·|`, zero for an all-zero correlation.
    pub fn imag_residue(&self) -> f64 {
        relative_imag_residue(&self.values)
    }
}

fn relative_imag_residue(values: &[Complex64]) -> f64 {
    let scale = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    values.iter().map(|v| v.im.abs()).fold(0.0, f64::max) / scale
}

/// Optional taper applied to a spectrum before inversion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Window {
    #[default]
    None,
    Hann,
}

impl Window {
    fn weight(self, k: usize, n: usize) -> f64 {
        match self {
            Window::None => 1.0,
            Window::Hann => 0.5 * (1.0 - (2.0 * PI * (k as f64 + 0.5) / n as f64).cos()),
        }
    }
}

/// Transform machinery for one Nyquist-paired grid couple.
///
/// With `c = (N-1)/2`, `ω_k T_j = (2π/N)(k-c)(j-c)`, so each midpoint sum is
/// a length-`N` DFT between a pre-twiddle `e^{∓2πicj/N}` and a post-twiddle
/// `e^{±2πi(c²-ck)/N}`. Plans are shared read-only; every call allocates its
/// own scratch.
#[derive(Clone)]
pub struct QwktPair {
    frequency: FrequencyGrid,
    temporal: TemporalGrid,
    fft_forward: Arc<dyn Fft<f64>>,
    fft_inverse: Arc<dyn Fft<f64>>,
    pre: Vec<Complex64>,
    post: Vec<Complex64>,
}

impl std::fmt::Debug for QwktPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("QwktPair")
            .field("frequency", &self.frequency)
            .field("temporal", &self.temporal)
            .finish()
    }
}

impl QwktPair {
    pub fn new(frequency: &FrequencyGrid) -> Self {
        let n = frequency.n_bins();
        let mut planner = FftPlanner::new();
        let c = 0.5 * (n as f64 - 1.0);
        let nf = n as f64;
        // c·j and c·(c-k) are exact multiples of 1/4, so reducing them
        // modulo N before scaling keeps the phases accurate.
        let phase = |m: f64| Complex64::from_polar(1.0, 2.0 * PI * m.rem_euclid(nf) / nf);
        Self {
            frequency: frequency.clone(),
            temporal: frequency.conjugate(),
            fft_forward: planner.plan_fft_forward(n),
            fft_inverse: planner.plan_fft_inverse(n),
            pre: (0..n).map(|j| phase(c * j as f64)).collect(),
            post: (0..n).map(|k| phase(c * (c - k as f64))).collect(),
        }
    }

    pub fn frequency_grid(&self) -> &FrequencyGrid {
        &self.frequency
    }

    pub fn temporal_grid(&self) -> &TemporalGrid {
        &self.temporal
    }

    /// `F_k = (dT/2π) Σ_j R_j e^{+iω_k T_j}`.
    pub fn forward(&self, r: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(r.len(), self.pre.len(), "sample count does not match grid");
        let mut buf: Vec<Complex64> = r.iter().zip(&self.pre).map(|(x, p)| x * p.conj()).collect();
        self.fft_inverse.process(&mut buf);
        let scale = self.temporal.step() / (2.0 * PI);
        buf.iter()
            .zip(&self.post)
            .map(|(x, p)| x * p * scale)
            .collect()
    }

    /// `R_j = dω Σ_k F_k e^{-iω_k T_j}`.
    pub fn inverse(&self, f: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(f.len(), self.pre.len(), "sample count does not match grid");
        let mut buf: Vec<Complex64> = f.iter().zip(&self.pre).map(|(x, p)| x * p).collect();
        self.fft_forward.process(&mut buf);
        let scale = self.frequency.step();
        buf.iter()
            .zip(&self.post)
            .map(|(x, p)| x * p.conj() * scale)
            .collect()
    }
}

/// Transforms a correlation into a spectral density on `grid`, which must be
/// the correlation grid's conjugate. The result must be real to
/// [`REAL_RESIDUE_TOL`] and nonnegative to [`NEGATIVE_CLAMP_TOL`] of its
/// peak; residues below those are dropped.
pub fn forward_qwkt(r: &TemporalCorrelation, grid: &FrequencyGrid) -> Result<SpectralPattern> {
    if !r.grid().is_paired_with(grid) {
        return Err(config(
            "temporal grid is not Nyquist-paired with the frequency grid",
        ));
    }
    let spectrum = QwktPair::new(grid).forward(r.values());
    let residue = relative_imag_residue(&spectrum);
    if residue > REAL_RESIDUE_TOL {
        return Err(input(format!(
            "transform is not real (imaginary residue {residue:e}); use QwktPair for complex data"
        )));
    }
    let peak = spectrum.iter().map(|v| v.re.abs()).fold(0.0, f64::max);
    let mut intensity = Vec::with_capacity(spectrum.len());
    for (k, v) in spectrum.iter().enumerate() {
        if v.re < -NEGATIVE_CLAMP_TOL * peak {
            return Err(input(format!(
                "transform is negative at bin {k} ({:e})",
                v.re
            )));
        }
        intensity.push(v.re.max(0.0));
    }
    SpectralPattern::new(grid.clone(), intensity, PatternKind::IdealDensity)
}

/// Transforms a spectrum into its cross-correlation on the conjugate grid.
pub fn inverse_qwkt(f: &SpectralPattern) -> TemporalCorrelation {
    inverse_qwkt_windowed(f, Window::None)
}

pub fn inverse_qwkt_windowed(f: &SpectralPattern, window: Window) -> TemporalCorrelation {
    let n = f.grid().n_bins();
    let data: Vec<Complex64> = f
        .intensity()
        .iter()
        .enumerate()
        .map(|(k, &v)| Complex64::new(v * window.weight(k, n), 0.0))
        .collect();
    let pair = QwktPair::new(f.grid());
    let values = pair.inverse(&data);
    TemporalCorrelation {
        grid: pair.temporal_grid().clone(),
        values,
    }
}

/// Autocorrelation and power spectrum of a sampled real time series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassicalWkt {
    pub sample_rate: f64,
    /// Lags in seconds, `-(n-1)..=(n-1)` samples.
    pub lags: Vec<f64>,
    /// Biased estimate `R[k] = (1/n) Σ_t x[t] x[t+k]`.
    pub autocorrelation: Vec<f64>,
    /// Frequencies `m·f_s/n` in Hz, ascending, centered on zero.
    pub frequencies: Vec<f64>,
    /// `P(f) = Σ_k R[k] e^{-2πifk/f_s} / f_s`.
    pub power: Vec<f64>,
    /// Largest `|Im P| / max |P|` seen before taking the real part.
    pub imag_residue: f64,
}

impl ClassicalWkt {
    /// Evaluates the power spectrum at an arbitrary frequency directly from
    /// the autocorrelation. Periodic in `f` with period `f_s`.
    pub fn power_at(&self, f: f64) -> f64 {
        let n = self.autocorrelation.len().div_ceil(2);
        let zero = n - 1;
        let mut acc = self.autocorrelation[zero];
        for k in 1..n {
            let arg = 2.0 * PI * (f / self.sample_rate) * k as f64;
            acc += 2.0 * self.autocorrelation[zero + k] * arg.cos();
        }
        acc / self.sample_rate
    }
}

pub fn classical_wkt(x: &[f64], sample_rate: f64) -> Result<ClassicalWkt> {
    let n = x.len();
    if n < MIN_BINS {
        return Err(input(format!(
            "time series needs at least {MIN_BINS} samples, got {n}"
        )));
    }
    if let Some(k) = x.iter().position(|v| !v.is_finite()) {
        return Err(input(format!("sample {k} is not finite")));
    }
    if !(sample_rate.is_finite() && sample_rate > 0.0) {
        return Err(input(format!(
            "sample rate must be positive, got {sample_rate}"
        )));
    }
    let mut planner = FftPlanner::new();

    // Lag sums via a zero-padded circular correlation.
    let m = (2 * n).next_power_of_two();
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    buf.resize(m, Complex64::new(0.0, 0.0));
    planner.plan_fft_forward(m).process(&mut buf);
    for v in &mut buf {
        *v = Complex64::new(v.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(m).process(&mut buf);
    let norm = 1.0 / (n as f64 * m as f64);
    let mut autocorrelation = Vec::with_capacity(2 * n - 1);
    for k in (1..n).rev() {
        autocorrelation.push(buf[k].re * norm);
    }
    autocorrelation.extend(buf[..n].iter().map(|v| v.re * norm));
    let lags = (0..2 * n - 1)
        .map(|i| (i as f64 - (n - 1) as f64) / sample_rate)
        .collect();

    // P on the n-point grid: fold the lags modulo n, then one DFT.
    let zero = n - 1;
    let mut folded = vec![Complex64::new(0.0, 0.0); n];
    for (i, &r) in autocorrelation.iter().enumerate() {
        let lag = i as i64 - zero as i64;
        folded[lag.rem_euclid(n as i64) as usize] += r;
    }
    planner.plan_fft_forward(n).process(&mut folded);
    let imag_residue = relative_imag_residue(&folded);
    let half = n / 2;
    let mut frequencies = Vec::with_capacity(n);
    let mut power = Vec::with_capacity(n);
    for i in 0..n {
        let m = i as i64 - half as i64;
        frequencies.push(m as f64 * sample_rate / n as f64);
        power.push(folded[m.rem_euclid(n as i64) as usize].re / sample_rate);
    }
    Ok(ClassicalWkt {
        sample_rate,
        lags,
        autocorrelation,
        frequencies,
        power,
        imag_residue,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::biphoton::{Layer, CCF_TO_JSI_SCALE};

    fn src10() -> BiphotonSource {
        BiphotonSource::degenerate_nm(10e-9).unwrap()
    }

    #[test]
    fn grid_invariants() {
        assert!(FrequencyGrid::new(1.0, 15).is_err());
        assert!(FrequencyGrid::new(1.0, 17).is_err());
        assert!(FrequencyGrid::new(0.0, 16).is_err());
        let g = FrequencyGrid::new(3.0, 16).unwrap();
        let v = g.values();
        for k in 0..16 {
            assert!((v[k] + v[15 - k]).abs() < 1e-15);
        }
        assert!((v[1] - v[0] - g.step()).abs() < 1e-15);
        let t = g.conjugate();
        assert!((g.step() * t.step() - 2.0 * PI / 16.0).abs() < 1e-15);
        assert_eq!(t.conjugate(), g);
        let back = FrequencyGrid::from_centers(&v, 1e-9).unwrap();
        assert_eq!(back.n_bins(), 16);
        assert!((back.omega_max() - 3.0).abs() < 1e-14);
        let mut skewed = v.clone();
        skewed[3] += 0.1 * g.step();
        assert!(FrequencyGrid::from_centers(&skewed, 1e-6).is_err());
    }

    #[test]
    fn gaussian_pair() {
        let s = src10();
        let grid = FrequencyGrid::default_for(&s);
        let d = s.delta_temporal();
        let r = TemporalCorrelation::from_real(
            grid.conjugate(),
            grid.conjugate()
                .values()
                .iter()
                .map(|t| (-d * d * t * t).exp())
                .collect(),
        )
        .unwrap();
        let f = forward_qwkt(&r, &grid).unwrap();
        let peak = s.envelope_pdf(0.0);
        for (w, v) in grid.values().iter().zip(f.intensity()) {
            assert!((v - s.envelope_pdf(*w)).abs() <= 1e-6 * peak);
        }
    }

    #[test]
    fn ccf_transforms_to_the_correlation_matched_jsi() {
        let s = src10();
        let grid = FrequencyGrid::default_for(&s);
        let p = DelayProfile::single(0.267e-12).unwrap();
        let r = TemporalCorrelation::from_model(&s, &p, &grid.conjugate(), CCF_TO_JSI_SCALE);
        let f = forward_qwkt(&r, &grid).unwrap();
        let expected =
            SpectralPattern::from_model(&s, &p, &ForwardModelConfig::correlation_matched(), &grid);
        let peak = expected.intensity().iter().cloned().fold(0.0, f64::max);
        for (a, b) in f.intensity().iter().zip(expected.intensity()) {
            assert!((a - b).abs() <= 1e-6 * peak);
        }
    }

    #[test]
    fn zero_in_zero_out() {
        let grid = FrequencyGrid::new(1e14, 64).unwrap();
        let r = TemporalCorrelation::from_real(grid.conjugate(), vec![0.0; 64]).unwrap();
        let f = forward_qwkt(&r, &grid).unwrap();
        assert!(f.intensity().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn forward_rejects_unpaired_grids() {
        let grid = FrequencyGrid::new(1e14, 64).unwrap();
        let other = FrequencyGrid::new(2e14, 64).unwrap();
        let r = TemporalCorrelation::from_real(other.conjugate(), vec![0.0; 64]).unwrap();
        assert!(matches!(
            forward_qwkt(&r, &grid),
            Err(crate::Error::Config(_))
        ));
    }

    #[test]
    fn inverse_of_plain_envelope_has_one_peak() {
        let s = BiphotonSource::default();
        let grid = FrequencyGrid::default_for(&s);
        let f = SpectralPattern::new(
            grid.clone(),
            grid.values().iter().map(|&w| s.envelope_pdf(w)).collect(),
            PatternKind::IdealDensity,
        )
        .unwrap();
        let r = inverse_qwkt(&f);
        let mag = r.magnitudes();
        let main = mag.iter().cloned().fold(0.0, f64::max);
        let t = r.grid().values();
        let d = s.delta_temporal();
        for (tj, m) in t.iter().zip(&mag) {
            if tj.abs() > 6.0 / d {
                assert!(*m <= 1e-6 * main);
            }
        }
        assert!(r.imag_residue() <= REAL_RESIDUE_TOL);
    }

    #[test]
    fn inverse_shows_side_peaks_at_the_delay() {
        let s = src10();
        let grid = FrequencyGrid::default_for(&s);
        let tau = 0.267e-12;
        let p = DelayProfile::single(tau).unwrap();
        let r = inverse_qwkt(&SpectralPattern::from_model(
            &s,
            &p,
            &ForwardModelConfig::default(),
            &grid,
        ));
        let mag = r.magnitudes();
        let t = r.grid().values();
        let dt = r.grid().step();
        let is_local_max = |j: usize| mag[j] > mag[j - 1] && mag[j] >= mag[j + 1];
        for target in [tau, -tau] {
            let j = t
                .iter()
                .position(|&x| (x - target).abs() <= 0.5 * dt + 1e-30)
                .unwrap();
            let found = (j - 1..=j + 1).any(is_local_max);
            assert!(found, "no local maximum near {target:e}");
        }
    }

    #[test]
    fn parseval_for_the_printed_convention() {
        let s = src10();
        let grid = FrequencyGrid::default_for(&s);
        let p =
            DelayProfile::new(vec![Layer::new(1.2e-13, 0.3), Layer::new(3.1e-13, 0.7)]).unwrap();
        let r = TemporalCorrelation::from_model(&s, &p, &grid.conjugate(), 1.0);
        let f = QwktPair::new(&grid).forward(r.values());
        let lhs: f64 =
            r.values().iter().map(|v| v.norm_sqr()).sum::<f64>() * grid.conjugate().step();
        let rhs: f64 = 2.0 * PI * f.iter().map(|v| v.norm_sqr()).sum::<f64>() * grid.step();
        assert!((lhs - rhs).abs() <= 1e-6 * lhs);
    }

    #[test]
    fn hann_window_is_symmetric() {
        let n = 32;
        for k in 0..n {
            assert!((Window::Hann.weight(k, n) - Window::Hann.weight(n - 1 - k, n)).abs() < 1e-15);
        }
    }

    fn lag_sum(x: &[f64], k: usize) -> f64 {
        x.iter().zip(&x[k..]).map(|(a, b)| a * b).sum::<f64>() / x.len() as f64
    }

    #[test]
    fn classical_autocorrelation_matches_lag_sum() {
        let x: Vec<f64> = (0..37)
            .map(|i| ((i * 7919) % 101) as f64 / 50.0 - 1.0)
            .collect();
        let w = classical_wkt(&x, 3.0).unwrap();
        let zero = x.len() - 1;
        for k in 0..x.len() {
            let oracle = lag_sum(&x, k);
            assert!((w.autocorrelation[zero + k] - oracle).abs() < 1e-12);
            assert!((w.autocorrelation[zero - k] - oracle).abs() < 1e-12);
        }
        assert!(w
            .power
            .iter()
            .all(|&p| p >= -1e-9 * w.power.iter().cloned().fold(0.0, f64::max)));
        assert!(w.imag_residue <= 1e-9);
    }

    #[test]
    fn classical_cosine_peaks_at_its_frequency() {
        let (n, fs) = (256, 1000.0);
        let f0 = 8.0 * fs / n as f64;
        let x: Vec<f64> = (0..n)
            .map(|i| (2.0 * PI * f0 * i as f64 / fs).cos())
            .collect();
        let w = classical_wkt(&x, fs).unwrap();
        let mut sorted = w.power.clone();
        sorted.sort_by(f64::total_cmp);
        let background = sorted[n / 2].abs().max(f64::MIN_POSITIVE);
        for target in [f0, -f0] {
            let k = w
                .frequencies
                .iter()
                .position(|&f| (f - target).abs() < 1e-9)
                .unwrap();
            assert!(w.power[k] / background >= 1e3);
            assert_eq!(sorted[n - 1], w.power[k]);
        }
    }

    #[test]
    fn classical_constant_is_triangular_with_dc_power() {
        let n = 64;
        let c = 1.5;
        let w = classical_wkt(&vec![c; n], 1.0).unwrap();
        for (i, r) in w.autocorrelation.iter().enumerate() {
            let k = (i as f64 - (n - 1) as f64).abs();
            assert!((r - c * c * (n as f64 - k) / n as f64).abs() < 1e-12);
        }
        let dc = w.frequencies.iter().position(|&f| f == 0.0).unwrap();
        let total: f64 = w.power.iter().map(|p| p.abs()).sum();
        assert!(w.power[dc] >= (1.0 - 1e-12) * total);
    }

    #[test]
    fn classical_spectrum_is_periodic_in_sample_rate() {
        let x: Vec<f64> = (0..50)
            .map(|i| ((i * 2654435761u64 as usize) % 97) as f64)
            .collect();
        let fs = 20.0;
        let w = classical_wkt(&x, fs).unwrap();
        for f in [0.0, 1.3, 4.7, -8.2] {
            let (a, b) = (w.power_at(f), w.power_at(f + fs));
            assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
        }
        for (f, p) in w.frequencies.iter().zip(&w.power) {
            assert!((w.power_at(*f) - p).abs() <= 1e-9 * p.abs().max(1.0));
        }
    }

    #[test]
    fn classical_rejects_short_series() {
        assert!(classical_wkt(&[1.0; 15], 1.0).is_err());
        assert!(classical_wkt(&[1.0; 16], 1.0).is_ok());
    }
}
