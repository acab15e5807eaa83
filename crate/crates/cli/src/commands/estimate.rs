use std::time::Instant;

use qwkt_core::biphoton::DelayProfile;
use qwkt_core::estimator::{
    extract_delays_with, fisher_information, mle_fit, quantum_fisher_information, MleResult,
    PeakOptions, PeakReport,
};
use qwkt_core::hom::{outcome_probabilities, Outcomes, Variant};
use qwkt_core::spectral::inverse_qwkt_windowed;
use serde_json::{json, Value};

use super::{build_cfg, build_model, build_source, detector_json, source_json};
use crate::cli::EstimateArgs;
use crate::error::{CliError, CliResult};
use crate::manifest::{FileDigest, RunManifest};
use crate::output::{num, sibling};
use crate::spectrum_file::{Abscissa, Columns, SpectrumFile};

struct Outcome {
    peaks: Option<PeakReport>,
    mle: Option<MleResult>,
    bounds: Option<Value>,
}

pub fn run(args: &EstimateArgs) -> CliResult<()> {
    let started = Instant::now();
    let source = build_source(&args.source)?;
    let cfg = build_cfg(&args.detector)?;
    if !(args.threshold.is_finite() && args.threshold > 0.0) {
        return Err(CliError::Config("--threshold: must be positive".into()));
    }
    if args.mle && !(1..=qwkt_core::estimator::MAX_LAYERS).contains(&args.layers) {
        return Err(CliError::Config(format!(
            "--layers: must lie in 1..={}",
            qwkt_core::estimator::MAX_LAYERS
        )));
    }

    let bytes = std::fs::read(&args.input)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", args.input.display())))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| CliError::Input(format!("{} is not UTF-8 text", args.input.display())))?;
    let file = SpectrumFile::parse(&text)?;
    let pattern = file.to_pattern(source.pump_wavelength())?;

    // The columns fix the outcome model when they carry per-port counts.
    let variant = match file.columns {
        Columns::TwoPort { .. } => Variant::TwoPort,
        Columns::ThreeOutcome { .. } => Variant::PaperEq16,
        _ => args.detector.variant.into(),
    };
    let trials = match (args.trials, file.meta("trials")) {
        (Some(n), _) => n,
        (None, Some(t)) => t
            .parse()
            .map_err(|_| CliError::Input(format!("metadata trials={t:?} is not a count")))?,
        (None, None) if file.columns.is_counts() => {
            (file.columns.primary().iter().sum::<f64>() as u64).max(1)
        }
        (None, None) => 1,
    };

    let options = PeakOptions {
        threshold: args.threshold,
        min_separation_steps: args.min_separation,
        window: args.window.into(),
        ..PeakOptions::default()
    };
    let mut outcome = Outcome {
        peaks: None,
        mle: None,
        bounds: None,
    };
    let result = (|| -> CliResult<()> {
        let peaks =
            extract_delays_with(&pattern, &source, &options).map_err(CliError::estimation)?;
        outcome.peaks = Some(peaks.clone());

        if args.mle {
            let (grid, counts) = file.outcome_counts()?;
            let n = match &counts {
                Outcomes::TwoPort { .. } => counts.flatten().iter().sum::<u64>().max(1),
                Outcomes::PaperEq16 {
                    coincidence,
                    single,
                    none,
                } => (coincidence[0] + single[0] + none[0]).max(1),
            };
            let model = build_model(&args.detector, grid, n, variant)?;
            let zero = DelayProfile::single(0.0).expect("zero delay is valid");
            let table = outcome_probabilities(&model, &source, &zero, &cfg)
                .with_counts(counts)
                .map_err(|e| CliError::Input(e.to_string()))?;
            let init = (!peaks.delays.is_empty()).then_some(&peaks);
            let fit = mle_fit(&table, &model, &source, &cfg, args.layers, init)
                .map_err(CliError::estimation)?;
            outcome.mle = Some(fit);
        }

        let model = build_model(&args.detector, pattern.grid().clone(), trials, variant)?;
        let taus: Vec<f64> = match &outcome.mle {
            Some(fit) => fit.layers.iter().map(|l| l.tau_hat).collect(),
            None => peaks.delays.iter().map(|d| d.tau_hat).collect(),
        };
        let per_delay = taus
            .iter()
            .map(|&tau| {
                let r = fisher_information(&source, tau, &model).map_err(CliError::estimation)?;
                Ok(json!({ "tau_s": tau, "g_omega_per_s2": r.g_omega, "crb_s": r.crb }))
            })
            .collect::<CliResult<Vec<_>>>()?;
        let q = quantum_fisher_information(&source, trials).map_err(CliError::estimation)?;
        outcome.bounds = Some(json!({
            "trials": trials,
            "variant": variant.to_string(),
            "qfi_per_s2": q.q,
            "qcrb_s": q.qcrb,
            "per_delay": per_delay,
        }));
        Ok(())
    })();

    let temporal = pattern.grid().conjugate();
    let report = json!({
        "schema_version": crate::SCHEMA_VERSION,
        "status": if result.is_ok() { "ok" } else { "error" },
        "error": result.as_ref().err().map(|e| e.to_string()),
        "input": {
            "path": args.input.display().to_string(),
            "abscissa": match file.abscissa { Abscissa::OmegaRadPerS => "omega_rad_per_s", Abscissa::WavelengthNm => "wavelength_nm" },
            "resampled": file.uniform_grid().is_none(),
        },
        "grid": {
            "bins": pattern.grid().n_bins(),
            "omega_max_rad_per_s": pattern.grid().omega_max(),
            "temporal_step_s": temporal.step(),
            "t_max_s": temporal.t_max(),
        },
        "peaks": outcome.peaks,
        "mle": outcome.mle,
        "bounds": outcome.bounds,
    });

    let r = inverse_qwkt_windowed(&pattern, args.window.into());
    let mut csv = format!(
        "# schema_version={}\n# units=delay in s\ndelay_s,real,imag,magnitude\n",
        crate::SCHEMA_VERSION
    );
    for (j, v) in r.values().iter().enumerate() {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            num(r.grid().value(j)),
            num(v.re),
            num(v.im),
            num(v.norm())
        ));
    }

    let config = json!({
        "input": args.input.display().to_string(),
        "source": source_json(&source),
        "detector": detector_json(&args.detector, variant, &cfg),
        "mle": args.mle,
        "layers": args.mle.then_some(args.layers),
        "threshold": args.threshold,
        "min_separation_steps": args.min_separation,
        "window": format!("{:?}", args.window).to_lowercase(),
        "trials": trials,
    });
    let mut manifest = RunManifest::new("estimate", config, None);
    manifest.inputs.push(FileDigest::of(&args.input, &bytes));
    let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    manifest.emit(&args.out, text.as_bytes())?;
    manifest.emit(&sibling(&args.out, ".correlation.csv"), csv.as_bytes())?;
    manifest.finish(&args.out, started)?;
    result
}
