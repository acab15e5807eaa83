//! Command-line flags.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qwkt_core::hom::Variant;
use qwkt_core::spectral::Window;

use crate::axis::parse_count;

#[derive(Debug, Parser)]
#[command(
    name = "qwkt",
    version,
    about = "Spectrally resolved two-photon interference: simulate spectra, recover layer delays, and bound their precision"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate an ideal or sampled coincidence spectrum.
    Simulate(SimulateArgs),
    /// Recover delays from a spectrum file.
    Estimate(EstimateArgs),
    /// Tabulate Fisher information and Cramér–Rao bounds over a parameter grid.
    Fisher(FisherArgs),
    /// Like `fisher`, plus per-line monotonicity metadata as JSON.
    Sweep(FisherArgs),
    /// Classical Wiener–Khinchin demonstration on a synthetic time series.
    WktDemo(WktArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    TwoPort,
    PaperEq16,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::TwoPort => Variant::TwoPort,
            VariantArg::PaperEq16 => Variant::PaperEq16,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WindowArg {
    None,
    Hann,
}

impl From<WindowArg> for Window {
    fn from(w: WindowArg) -> Self {
        match w {
            WindowArg::None => Window::None,
            WindowArg::Hann => Window::Hann,
        }
    }
}

/// Photon-pair source. Wavelengths in nm, bandwidth as RMS width in nm
/// about the signal line.
#[derive(Debug, Clone, Args)]
pub struct SourceArgs {
    /// Single-photon bandwidth in nm.
    #[arg(long, default_value_t = 20.0, allow_negative_numbers = true)]
    pub sigma_nm: f64,
    /// Signal center wavelength in nm.
    #[arg(long, default_value_t = 810.0, allow_negative_numbers = true)]
    pub signal_nm: f64,
    /// Idler center wavelength in nm.
    #[arg(long, default_value_t = 810.0, allow_negative_numbers = true)]
    pub idler_nm: f64,
    /// Pump wavelength in nm.
    #[arg(long, default_value_t = 405.0, allow_negative_numbers = true)]
    pub pump_nm: f64,
}

/// Loss, visibility and fringe convention.
#[derive(Debug, Clone, Args)]
pub struct DetectorArgs {
    /// Per-photon loss probability.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub gamma: f64,
    /// Fringe visibility.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = VariantArg::TwoPort)]
    pub variant: VariantArg,
    /// Fringe phase in radians.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub phi: f64,
    /// Sign in front of the fringe term: +1 puts a dip at zero frequency.
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    pub fringe_sign: i32,
    /// Frequency bins across ±6 envelope widths.
    #[arg(long, default_value_t = 4096)]
    pub bins: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub detector: DetectorArgs,
    /// Single-layer delay in ps.
    #[arg(
        long,
        conflicts_with = "layers",
        required_unless_present = "layers",
        allow_negative_numbers = true
    )]
    pub tau_ps: Option<f64>,
    /// Layers as `delay_ps:weight` pairs, e.g. `0.120:0.5,0.267:0.5`.
    #[arg(long)]
    pub layers: Option<String>,
    /// Write outcome probabilities instead of sampled counts.
    #[arg(long, conflicts_with = "trials")]
    pub ideal: bool,
    /// Number of trials to sample (accepts `1e6`).
    #[arg(long, value_parser = parse_count)]
    pub trials: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, short, default_value = "spectrum.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct EstimateArgs {
    /// Spectrum file to analyse.
    pub input: PathBuf,
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub detector: DetectorArgs,
    /// Refine the peak estimates by maximum likelihood.
    #[arg(long)]
    pub mle: bool,
    /// Number of layers to fit.
    #[arg(long, default_value_t = 1, requires = "mle")]
    pub layers: usize,
    /// Side-peak threshold relative to the main peak.
    #[arg(long, default_value_t = 0.02)]
    pub threshold: f64,
    /// Minimum peak separation in temporal grid steps.
    #[arg(long, default_value_t = 2)]
    pub min_separation: usize,
    #[arg(long, value_enum, default_value_t = WindowArg::None)]
    pub window: WindowArg,
    /// Trials behind the spectrum, for the bounds; defaults to the file's
    /// `trials` entry, then its total counts, then 1.
    #[arg(long, value_parser = parse_count)]
    pub trials: Option<u64>,
    #[arg(long, short, default_value = "estimate.json")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct FisherArgs {
    #[arg(long, value_enum, default_value_t = VariantArg::TwoPort)]
    pub variant: VariantArg,
    /// Bandwidth axis: value, list `a,b` or range `start:stop:count`, in nm
    /// (or with a `rad/s` suffix).
    #[arg(long, default_value = "20")]
    pub sigma_nm: String,
    /// Delay axis with unit suffix `ps`, `fs` or `s`.
    #[arg(long, default_value = "0.01:2:50ps")]
    pub tau_axis: String,
    /// Loss axis.
    #[arg(long, default_value = "0")]
    pub gamma: String,
    /// Visibility axis.
    #[arg(long, default_value = "1")]
    pub alpha: String,
    /// Line center for nm bandwidths, in nm.
    #[arg(long, default_value_t = 810.0)]
    pub center_nm: f64,
    /// Trials for the Cramér–Rao bound (accepts `1e6`).
    #[arg(long, value_parser = parse_count, default_value = "10000")]
    pub trials: u64,
    /// Worker threads; overrides QWKT_THREADS.
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, short, default_value = "fisher.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Waveform {
    Cosine,
    GaussianPulse,
    TwoPulse,
    Constant,
}

#[derive(Debug, Clone, Args)]
pub struct WktArgs {
    #[arg(long, value_enum, default_value_t = Waveform::Cosine)]
    pub waveform: Waveform,
    #[arg(long, default_value_t = 1024)]
    pub samples: usize,
    /// Sample rate in Hz.
    #[arg(long, default_value_t = 1000.0)]
    pub sample_rate: f64,
    /// Cosine frequency in Hz.
    #[arg(long, default_value_t = 50.0)]
    pub frequency: f64,
    /// Pulse RMS width in s.
    #[arg(long, default_value_t = 0.005)]
    pub width: f64,
    /// Pulse separation in s.
    #[arg(long, default_value_t = 0.1)]
    pub delay: f64,
    /// Output prefix: writes `<prefix>_signal.csv`, `<prefix>_autocorrelation.csv`
    /// and `<prefix>_power.csv`.
    #[arg(long, short, default_value = "wkt")]
    pub out: PathBuf,
}
