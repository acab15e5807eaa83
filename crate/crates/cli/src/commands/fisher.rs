use std::time::Instant;

use qwkt_core::estimator::{sweep, SweepAxes};
use qwkt_core::hom::Variant;
use serde_json::json;

use crate::axis::{parse_axis, Quantity};
use crate::cli::FisherArgs;
use crate::error::{CliError, CliResult};
use crate::manifest::RunManifest;
use crate::output::{num, sibling};

/// Worker cap from `--threads`, else from the environment.
fn thread_cap(flag: Option<usize>) -> CliResult<Option<usize>> {
    if let Some(n) = flag {
        return if n == 0 {
            Err(CliError::Config("--threads: must be at least 1".into()))
        } else {
            Ok(Some(n))
        };
    }
    match std::env::var(crate::THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Config(format!(
                "{}: {v:?} is not a positive integer",
                crate::THREADS_ENV
            ))),
        },
        Err(_) => Ok(None),
    }
}

fn axis(name: &str, spec: &str, q: Quantity) -> CliResult<Vec<f64>> {
    parse_axis(spec, q).map_err(|e| CliError::Config(format!("--{name}: {e}")))
}

pub fn run(args: &FisherArgs, with_trends: bool) -> CliResult<()> {
    let started = Instant::now();
    let variant: Variant = args.variant.into();
    let axes = SweepAxes {
        sigma: axis(
            "sigma-nm",
            &args.sigma_nm,
            Quantity::Bandwidth {
                center: args.center_nm / 1e9,
            },
        )?,
        tau: axis("tau-axis", &args.tau_axis, Quantity::Delay)?,
        gamma: axis("gamma", &args.gamma, Quantity::Dimensionless)?,
        alpha: axis("alpha", &args.alpha, Quantity::Dimensionless)?,
    };
    let threads = thread_cap(args.threads)?;
    let table =
        sweep(&axes, variant, args.trials, threads).map_err(|e| CliError::Config(e.to_string()))?;

    let mut csv = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::Config(format!("cannot format table: {e}"));
    csv.write_record([
        "sigma_rad_per_s",
        "tau_s",
        "gamma",
        "alpha",
        "variant",
        "g_omega_per_s2",
        "crb_s",
        "error",
    ])
    .map_err(fail)?;
    for c in &table.cells {
        let (g, crb, err) = match &c.result {
            Ok(r) => (num(r.g_omega), num(r.crb), String::new()),
            Err(e) => (String::new(), String::new(), e.clone()),
        };
        csv.write_record([
            num(c.sigma),
            num(c.tau),
            num(c.gamma),
            num(c.alpha),
            variant.to_string(),
            g,
            crb,
            err,
        ])
        .map_err(fail)?;
    }
    let body = csv
        .into_inner()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let mut out = format!(
        "# schema_version={}\n# trials={}\n# units=sigma in rad/s, tau in s, g_omega in 1/s^2, crb in s\n",
        crate::SCHEMA_VERSION,
        args.trials
    )
    .into_bytes();
    out.extend(body);

    let config = json!({
        "variant": variant.to_string(),
        "axes": {
            "sigma_rad_per_s": axes.sigma,
            "tau_s": axes.tau,
            "gamma": axes.gamma,
            "alpha": axes.alpha,
        },
        "center_wavelength_m": args.center_nm / 1e9,
        "trials": args.trials,
        "threads": threads,
    });
    let mut manifest = RunManifest::new(if with_trends { "sweep" } else { "fisher" }, config, None);
    manifest.emit(&args.out, &out)?;
    if with_trends {
        let trends = json!({
            "schema_version": crate::SCHEMA_VERSION,
            "variant": variant.to_string(),
            "trials": args.trials,
            "cells": table.cells.len(),
            "succeeded": table.succeeded(),
            "axis_order": ["sigma", "tau", "gamma", "alpha"],
            "trends": table.trends,
        });
        let text = serde_json::to_string_pretty(&trends).expect("trends serialize") + "\n";
        manifest.emit(&sibling(&args.out, ".trends.json"), text.as_bytes())?;
    }
    manifest.finish(&args.out, started)?;
    if !table.cells.is_empty() && table.succeeded() == 0 {
        return Err(CliError::Estimation(
            "every cell of the sweep failed".into(),
        ));
    }
    Ok(())
}
