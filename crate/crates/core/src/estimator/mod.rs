//! Delay inference: peak extraction, likelihood fitting and precision bounds.

mod fisher;
mod mle;
mod optimize;
mod peaks;
mod sweep;

pub use fisher::{
    fisher_information, quantum_fisher_information, FisherReport, QfiReport, FISHER_REL_TOL,
    FISHER_WINDOW_WIDTHS,
};
pub use mle::{
    mle_fit, mle_fit_with, FittedLayer, LogLikelihood, MleOptions, MleResult, MAX_LAYERS,
    NEAR_ZERO_WEIGHT,
};
pub use peaks::{extract_delays, extract_delays_with, PeakOptions, PeakReport, RecoveredDelay};
pub use sweep::{
    classify, sweep, Axis, LineTrend, SweepAxes, SweepCell, SweepTable, Trend, MAX_AXIS_POINTS,
    TREND_REL_TOL,
};
