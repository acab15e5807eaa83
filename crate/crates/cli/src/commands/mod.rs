//! One module per subcommand, plus the model builders they share.

pub mod estimate;
pub mod fisher;
pub mod simulate;
pub mod wkt;

use qwkt_core::biphoton::{bandwidth_nm_to_rads, BiphotonSource, ForwardModelConfig, FringeSign};
use qwkt_core::hom::{DetectionModel, Variant};
use qwkt_core::spectral::{FrequencyGrid, DEFAULT_WINDOW_WIDTHS};
use serde_json::{json, Value};

use crate::cli::{DetectorArgs, SourceArgs};
use crate::error::{CliError, CliResult};

fn field(name: &str) -> impl Fn(qwkt_core::Error) -> CliError + '_ {
    move |e| CliError::Config(format!("--{name}: {e}"))
}

pub(crate) fn build_source(args: &SourceArgs) -> CliResult<BiphotonSource> {
    let sigma = bandwidth_nm_to_rads(args.sigma_nm / 1e9, args.signal_nm / 1e9)
        .map_err(field("sigma-nm"))?;
    if sigma == 0.0 {
        return Err(CliError::Config(
            "--sigma-nm: bandwidth must be positive".into(),
        ));
    }
    BiphotonSource::new(
        sigma,
        args.signal_nm / 1e9,
        args.idler_nm / 1e9,
        args.pump_nm / 1e9,
    )
    .map_err(field("signal-nm/--idler-nm/--pump-nm"))
}

pub(crate) fn source_json(source: &BiphotonSource) -> Value {
    json!({
        "sigma_rad_per_s": source.sigma_spectral(),
        "delta_rad_per_s": source.delta_temporal(),
        "signal_wavelength_m": source.center_wavelength_signal(),
        "idler_wavelength_m": source.center_wavelength_idler(),
        "pump_wavelength_m": source.pump_wavelength(),
    })
}

pub(crate) fn build_cfg(args: &DetectorArgs) -> CliResult<ForwardModelConfig> {
    if !args.phi.is_finite() {
        return Err(CliError::Config("--phi: phase must be finite".into()));
    }
    let sign = FringeSign::from_value(args.fringe_sign).map_err(field("fringe-sign"))?;
    Ok(ForwardModelConfig::new(args.phi, sign))
}

pub(crate) fn build_grid(args: &DetectorArgs, source: &BiphotonSource) -> CliResult<FrequencyGrid> {
    FrequencyGrid::new(
        DEFAULT_WINDOW_WIDTHS * 2.0 * source.sigma_spectral(),
        args.bins,
    )
    .map_err(field("bins"))
}

pub(crate) fn build_model(
    args: &DetectorArgs,
    grid: FrequencyGrid,
    n_trials: u64,
    variant: Variant,
) -> CliResult<DetectionModel> {
    DetectionModel::new(args.gamma, args.alpha, n_trials, grid, variant)
        .map_err(field("gamma/--alpha/--trials"))
}

pub(crate) fn detector_json(
    args: &DetectorArgs,
    variant: Variant,
    cfg: &ForwardModelConfig,
) -> Value {
    json!({
        "gamma": args.gamma,
        "alpha": args.alpha,
        "variant": variant.to_string(),
        "phi_rad": cfg.phi,
        "fringe_sign": args.fringe_sign,
        "bins": args.bins,
    })
}
