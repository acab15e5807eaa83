use std::time::Instant;

use qwkt_core::biphoton::{DelayProfile, Layer};
use qwkt_core::hom::{outcome_probabilities, sample_counts, Outcomes};
use serde_json::json;

use super::{build_cfg, build_grid, build_model, build_source, detector_json, source_json};
use crate::cli::SimulateArgs;
use crate::error::{CliError, CliResult};
use crate::manifest::RunManifest;
use crate::spectrum_file::{Abscissa, Columns, SpectrumFile};

/// Parses `delay_ps:weight` pairs separated by commas.
pub fn parse_layers(spec: &str) -> CliResult<DelayProfile> {
    let bad = |msg: String| CliError::Config(format!("--layers: {msg}"));
    let layers = spec
        .split(',')
        .map(|pair| {
            let (tau, weight) = pair
                .split_once(':')
                .ok_or_else(|| bad(format!("{pair:?} is not delay_ps:weight")))?;
            let num = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| bad(format!("{s:?} is not a number")))
            };
            Ok(Layer::new(num(tau)? / 1e12, num(weight)?))
        })
        .collect::<CliResult<Vec<_>>>()?;
    DelayProfile::new(layers).map_err(|e| bad(e.to_string()))
}

pub fn run(args: &SimulateArgs) -> CliResult<()> {
    let started = Instant::now();
    let source = build_source(&args.source)?;
    let cfg = build_cfg(&args.detector)?;
    let variant = args.detector.variant.into();
    let profile = match (&args.layers, args.tau_ps) {
        (Some(spec), _) => parse_layers(spec)?,
        (None, Some(tau)) => DelayProfile::single(tau / 1e12)
            .map_err(|e| CliError::Config(format!("--tau-ps: {e}")))?,
        (None, None) => {
            return Err(CliError::Config(
                "one of --tau-ps or --layers is required".into(),
            ))
        }
    };
    let grid = build_grid(&args.detector, &source)?;
    let model = build_model(
        &args.detector,
        grid.clone(),
        args.trials.unwrap_or(1),
        variant,
    )?;
    let table = outcome_probabilities(&model, &source, &profile, &cfg);

    let file = match args.trials {
        None => SpectrumFile::new(
            Abscissa::OmegaRadPerS,
            grid.values(),
            Columns::Intensity(table.probabilities().coincidence().to_vec()),
        ),
        Some(n) => {
            let sampled = sample_counts(&table, n, args.seed)
                .map_err(|e| CliError::Config(format!("--trials: {e}")))?;
            let file = match sampled.counts().expect("sampled table has counts") {
                Outcomes::TwoPort {
                    antibunched,
                    bunched,
                    single,
                    none,
                } => SpectrumFile::new(
                    Abscissa::OmegaRadPerS,
                    grid.values(),
                    Columns::TwoPort {
                        antibunched: antibunched.clone(),
                        bunched: bunched.clone(),
                    },
                )
                .with_meta("single_click", single)
                .with_meta("no_click", none),
                Outcomes::PaperEq16 {
                    coincidence,
                    single,
                    none,
                } => SpectrumFile::new(
                    Abscissa::OmegaRadPerS,
                    grid.values(),
                    Columns::ThreeOutcome {
                        coincidence: coincidence.clone(),
                        single: single.clone(),
                        none: none.clone(),
                    },
                ),
            };
            file.with_meta("trials", n).with_meta("seed", args.seed)
        }
    }
    .with_meta("variant", variant)
    .with_meta("units", "omega in rad/s; inputs given in nm and ps");

    let layers: Vec<_> = profile
        .layers()
        .iter()
        .map(|l| json!({ "tau_s": l.tau, "weight": l.weight }))
        .collect();
    let config = json!({
        "source": source_json(&source),
        "detector": detector_json(&args.detector, variant, &cfg),
        "layers": layers,
        "mode": if args.trials.is_some() { "counts" } else { "ideal" },
        "trials": args.trials,
        "seed": args.trials.map(|_| args.seed),
    });
    let mut manifest = RunManifest::new("simulate", config, args.trials.map(|_| args.seed));
    manifest.emit(&args.out, file.to_csv().as_bytes())?;
    manifest.finish(&args.out, started)
}
