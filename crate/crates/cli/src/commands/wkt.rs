use std::time::Instant;

use qwkt_core::spectral::classical_wkt;
use serde_json::json;

use crate::cli::{Waveform, WktArgs};
use crate::error::{CliError, CliResult};
use crate::manifest::RunManifest;
use crate::output::{num, sibling};

/// Samples of the requested waveform at `t_k = k/f_s`.
pub fn waveform(args: &WktArgs) -> Vec<f64> {
    let n = args.samples;
    let center = 0.5 * n as f64 / args.sample_rate;
    let pulse = |t: f64| (-(t * t) / (2.0 * args.width * args.width)).exp();
    (0..n)
        .map(|k| {
            let t = k as f64 / args.sample_rate;
            match args.waveform {
                Waveform::Cosine => (2.0 * std::f64::consts::PI * args.frequency * t).cos(),
                Waveform::GaussianPulse => pulse(t - center),
                Waveform::TwoPulse => {
                    pulse(t - center + 0.5 * args.delay) + pulse(t - center - 0.5 * args.delay)
                }
                Waveform::Constant => 1.0,
            }
        })
        .collect()
}

fn table(header: &str, x: &[f64], y: &[f64]) -> String {
    let mut out = format!("# schema_version={}\n{header}\n", crate::SCHEMA_VERSION);
    for (a, b) in x.iter().zip(y) {
        out.push_str(&format!("{},{}\n", num(*a), num(*b)));
    }
    out
}

pub fn run(args: &WktArgs) -> CliResult<()> {
    let started = Instant::now();
    for (name, v) in [
        ("sample-rate", args.sample_rate),
        ("width", args.width),
        ("delay", args.delay),
    ] {
        if !(v.is_finite() && v > 0.0) {
            return Err(CliError::Config(format!("--{name}: must be positive")));
        }
    }
    if !args.frequency.is_finite() {
        return Err(CliError::Config("--frequency: must be finite".into()));
    }
    let x = waveform(args);
    let wkt = classical_wkt(&x, args.sample_rate)
        .map_err(|e| CliError::Config(format!("--samples: {e}")))?;
    let times: Vec<f64> = (0..x.len()).map(|k| k as f64 / args.sample_rate).collect();

    let config = json!({
        "waveform": format!("{:?}", args.waveform),
        "samples": args.samples,
        "sample_rate_hz": args.sample_rate,
        "frequency_hz": args.frequency,
        "width_s": args.width,
        "delay_s": args.delay,
    });
    let mut manifest = RunManifest::new("wkt-demo", config, None);
    manifest.emit(
        &sibling(&args.out, "_signal.csv"),
        table("t_s,x", &times, &x).as_bytes(),
    )?;
    manifest.emit(
        &sibling(&args.out, "_autocorrelation.csv"),
        table("lag_s,r", &wkt.lags, &wkt.autocorrelation).as_bytes(),
    )?;
    manifest.emit(
        &sibling(&args.out, "_power.csv"),
        table("f_hz,p", &wkt.frequencies, &wkt.power).as_bytes(),
    )?;
    manifest.finish(&args.out, started)
}
