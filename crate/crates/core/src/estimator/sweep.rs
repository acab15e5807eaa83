//! Fisher information over a Cartesian grid of source and detector settings.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fisher::{fisher_information, FisherReport};
use crate::biphoton::BiphotonSource;
use crate::error::{domain, input, Result};
use crate::hom::{DetectionModel, Variant};
use crate::spectral::FrequencyGrid;

pub const MAX_AXIS_POINTS: usize = 256;
/// Neighboring values closer than this, relative to the largest magnitude
/// on the line, count as equal when classifying trends.
pub const TREND_REL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Axis {
    Sigma,
    Tau,
    Gamma,
    Alpha,
}

impl Axis {
    pub const ALL: [Axis; 4] = [Axis::Sigma, Axis::Tau, Axis::Gamma, Axis::Alpha];

    fn index(self) -> usize {
        self as usize
    }
}

/// Values along each axis. σ in rad/s, τ in seconds.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepAxes {
    pub sigma: Vec<f64>,
    pub tau: Vec<f64>,
    pub gamma: Vec<f64>,
    pub alpha: Vec<f64>,
}

impl SweepAxes {
    pub fn axis(&self, axis: Axis) -> &[f64] {
        match axis {
            Axis::Sigma => &self.sigma,
            Axis::Tau => &self.tau,
            Axis::Gamma => &self.gamma,
            Axis::Alpha => &self.alpha,
        }
    }

    fn lens(&self) -> [usize; 4] {
        Axis::ALL.map(|a| self.axis(a).len())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Trend {
    Increasing,
    NonDecreasing,
    Decreasing,
    NonIncreasing,
    Constant,
    Mixed,
    /// Some cell on the line failed.
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub sigma: f64,
    pub tau: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub result: std::result::Result<FisherReport, String>,
}

/// Trend of `G` along one axis with the other three held at the given
/// indices (`None` marks the varying axis; order σ, τ, γ, α).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineTrend {
    pub axis: Axis,
    pub fixed: [Option<usize>; 4],
    pub trend: Trend,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub variant: Variant,
    pub n_trials: u64,
    /// Row-major with α varying fastest, then γ, τ, σ.
    pub cells: Vec<SweepCell>,
    pub trends: Vec<LineTrend>,
}

impl SweepTable {
    pub fn succeeded(&self) -> usize {
        self.cells.iter().filter(|c| c.result.is_ok()).count()
    }
}

pub fn classify(values: &[Option<f64>]) -> Trend {
    let Some(values) = values.iter().copied().collect::<Option<Vec<f64>>>() else {
        return Trend::Undetermined;
    };
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let (mut up, mut down, mut flat) = (false, false, false);
    for w in values.windows(2) {
        let d = w[1] - w[0];
        if d.abs() <= TREND_REL_TOL * scale {
            flat = true;
        } else if d > 0.0 {
            up = true;
        } else {
            down = true;
        }
    }
    match (up, down, flat) {
        (true, true, _) => Trend::Mixed,
        (true, false, false) => Trend::Increasing,
        (true, false, true) => Trend::NonDecreasing,
        (false, true, false) => Trend::Decreasing,
        (false, true, true) => Trend::NonIncreasing,
        (false, false, _) => Trend::Constant,
    }
}

fn evaluate(variant: Variant, n_trials: u64, p: [f64; 4]) -> Result<FisherReport> {
    let [sigma, tau, gamma, alpha] = p;
    let source = BiphotonSource::degenerate(sigma)?;
    let model = DetectionModel::new(
        gamma,
        alpha,
        n_trials,
        FrequencyGrid::default_for(&source),
        variant,
    )?;
    fisher_information(&source, tau, &model)
}

/// Evaluates [`fisher_information`] on every combination of axis values,
/// for a degenerate source at the default wavelengths.
///
/// Cells run in parallel, on at most `threads` workers when given. Failed
/// cells keep their error message and do not stop the sweep. The result
/// does not depend on evaluation order.
pub fn sweep(
    axes: &SweepAxes,
    variant: Variant,
    n_trials: u64,
    threads: Option<usize>,
) -> Result<SweepTable> {
    for axis in Axis::ALL {
        let values = axes.axis(axis);
        if values.len() > MAX_AXIS_POINTS {
            return Err(input(format!(
                "{axis:?} axis has {} points; at most {MAX_AXIS_POINTS} are allowed",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(domain(format!(
                "{axis:?} axis contains a non-finite value {v}"
            )));
        }
    }
    if n_trials == 0 {
        return Err(domain("trial count must be at least 1"));
    }
    let lens = axes.lens();
    let total: usize = lens.iter().product();
    let point = |flat: usize| -> [usize; 4] {
        let mut idx = [0; 4];
        let mut rest = flat;
        for a in (0..4).rev() {
            idx[a] = rest % lens[a];
            rest /= lens[a];
        }
        idx
    };
    let run = || -> Vec<SweepCell> {
        (0..total)
            .into_par_iter()
            .map(|flat| {
                let idx = point(flat);
                let p = [0, 1, 2, 3].map(|a| axes.axis(Axis::ALL[a])[idx[a]]);
                SweepCell {
                    sigma: p[0],
                    tau: p[1],
                    gamma: p[2],
                    alpha: p[3],
                    result: evaluate(variant, n_trials, p).map_err(|e| e.to_string()),
                }
            })
            .collect()
    };
    let cells = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| crate::error::config(format!("cannot start worker pool: {e}")))?
            .install(run),
        None => run(),
    };

    let strides: [usize; 4] = [lens[1] * lens[2] * lens[3], lens[2] * lens[3], lens[3], 1];
    let mut trends = Vec::new();
    for axis in Axis::ALL {
        let a = axis.index();
        if lens[a] < 2 {
            continue;
        }
        for flat in 0..total {
            let idx = point(flat);
            if idx[a] != 0 {
                continue;
            }
            let values: Vec<Option<f64>> = (0..lens[a])
                .map(|i| {
                    cells[flat + i * strides[a]]
                        .result
                        .as_ref()
                        .ok()
                        .map(|r| r.g_omega)
                })
                .collect();
            let mut fixed = idx.map(Some);
            fixed[a] = None;
            trends.push(LineTrend {
                axis,
                fixed,
                trend: classify(&values),
            });
        }
    }
    Ok(SweepTable {
        variant,
        n_trials,
        cells,
        trends,
    })
}
