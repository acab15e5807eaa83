//! Parsing of axis specifications such as `0.01:2:50ps` or `1,0.9`.

use crate::error::{CliError, CliResult};

/// Unit family accepted by an axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Quantity {
    /// Seconds; accepts `s`, `ps`, `fs`. Bare numbers are picoseconds.
    Delay,
    /// Bandwidth; accepts `nm` (about `center`) and `rad/s`. Bare numbers
    /// are nanometres.
    Bandwidth {
        center: f64,
    },
    Dimensionless,
}

fn scale(quantity: Quantity, unit: &str) -> CliResult<Box<dyn Fn(f64) -> CliResult<f64>>> {
    let bad = |u: &str| CliError::Config(format!("unit {u:?} does not fit a {quantity:?} axis"));
    Ok(match (quantity, unit) {
        (Quantity::Delay, "" | "ps") => Box::new(|v| Ok(v / 1e12)),
        (Quantity::Delay, "fs") => Box::new(|v| Ok(v / 1e15)),
        (Quantity::Delay, "s") => Box::new(Ok),
        (Quantity::Bandwidth { center }, "" | "nm") => Box::new(move |v| {
            qwkt_core::biphoton::bandwidth_nm_to_rads(v / 1e9, center).map_err(CliError::config)
        }),
        (Quantity::Bandwidth { .. }, "rad/s") => Box::new(Ok),
        (Quantity::Dimensionless, "") => Box::new(Ok),
        (_, u) => return Err(bad(u)),
    })
}

fn number(s: &str) -> CliResult<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("{s:?} is not a number")))?;
    if !v.is_finite() {
        return Err(CliError::Config(format!("{s:?} is not finite")));
    }
    Ok(v)
}

/// Parses `start:stop:count[unit]` (inclusive, evenly spaced), a comma list
/// `a,b,c[unit]` or a single value, returning SI values.
pub fn parse_axis(spec: &str, quantity: Quantity) -> CliResult<Vec<f64>> {
    let spec = spec.trim();
    let split = spec
        .rfind(|c: char| c.is_ascii_digit() || c == '.')
        .map_or(0, |i| i + 1);
    let (body, unit) = spec.split_at(split);
    let to_si = scale(quantity, unit.trim())?;
    let raw: Vec<f64> = if body.contains(':') {
        let parts: Vec<&str> = body.split(':').collect();
        let [start, stop, count] = parts[..] else {
            return Err(CliError::Config(format!(
                "axis {spec:?} must look like start:stop:count"
            )));
        };
        let (start, stop) = (number(start)?, number(stop)?);
        let count: usize = count
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("axis {spec:?} has a non-integer count")))?;
        match count {
            0 => Vec::new(),
            1 => vec![start],
            n => (0..n)
                .map(|i| start + (stop - start) * i as f64 / (n - 1) as f64)
                .collect(),
        }
    } else if body.is_empty() {
        return Err(CliError::Config(format!("axis {spec:?} has no values")));
    } else {
        body.split(',').map(number).collect::<CliResult<_>>()?
    };
    raw.into_iter().map(to_si).collect()
}

/// Parses a trial count written as an integer or in exponent form (`1e6`).
pub fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    let v: f64 = s.parse().map_err(|_| format!("{s:?} is not a count"))?;
    if v.is_finite() && v >= 0.0 && v.fract() == 0.0 && v <= u64::MAX as f64 {
        Ok(v as u64)
    } else {
        Err(format!("{s:?} is not a whole number of trials"))
    }
}
