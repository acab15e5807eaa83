//! CSV spectrum files.
//!
//! ```text
//! # schema_version=1
//! # kind=counts
//! # variant=two-port
//! omega_rad_per_s,counts,bunched
//! -3.4471199999999998e14,0,1
//! ```
//!
//! Lines starting with `#` carry `key=value` metadata; the first other line
//! is the header. The abscissa is `omega_rad_per_s` (difference frequency)
//! or `wavelength_nm` (signal wavelength), strictly increasing. Value
//! columns are `intensity`, `counts`, `counts,bunched` (two-port) or
//! `counts,single,none` (three-outcome).

use std::collections::BTreeMap;
use std::f64::consts::PI;

use qwkt_core::biphoton::{wavelength_to_difference_frequency, SPEED_OF_LIGHT};
use qwkt_core::hom::Outcomes;
use qwkt_core::spectral::{FrequencyGrid, PatternKind, SpectralPattern, MIN_BINS};

use crate::error::{CliError, CliResult};
use crate::output::num;

pub const SCHEMA_VERSION: u32 = 1;
/// Relative tolerance, in bin widths, for accepting stored frequencies as
/// the bin centers of a uniform symmetric grid.
const GRID_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Abscissa {
    OmegaRadPerS,
    WavelengthNm,
}

impl Abscissa {
    fn header(self) -> &'static str {
        match self {
            Abscissa::OmegaRadPerS => "omega_rad_per_s",
            Abscissa::WavelengthNm => "wavelength_nm",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Columns {
    Intensity(Vec<f64>),
    Counts(Vec<u64>),
    TwoPort {
        antibunched: Vec<u64>,
        bunched: Vec<u64>,
    },
    ThreeOutcome {
        coincidence: Vec<u64>,
        single: Vec<u64>,
        none: Vec<u64>,
    },
}

impl Columns {
    fn names(&self) -> &'static [&'static str] {
        match self {
            Columns::Intensity(_) => &["intensity"],
            Columns::Counts(_) => &["counts"],
            Columns::TwoPort { .. } => &["counts", "bunched"],
            Columns::ThreeOutcome { .. } => &["counts", "single", "none"],
        }
    }

    /// The coincidence column as reals.
    pub fn primary(&self) -> Vec<f64> {
        match self {
            Columns::Intensity(v) => v.clone(),
            Columns::Counts(v)
            | Columns::TwoPort { antibunched: v, .. }
            | Columns::ThreeOutcome { coincidence: v, .. } => v.iter().map(|&c| c as f64).collect(),
        }
    }

    pub fn is_counts(&self) -> bool {
        !matches!(self, Columns::Intensity(_))
    }

    fn row(&self, i: usize) -> Vec<String> {
        match self {
            Columns::Intensity(v) => vec![num(v[i])],
            Columns::Counts(v) => vec![v[i].to_string()],
            Columns::TwoPort {
                antibunched,
                bunched,
            } => vec![antibunched[i].to_string(), bunched[i].to_string()],
            Columns::ThreeOutcome {
                coincidence,
                single,
                none,
            } => {
                vec![
                    coincidence[i].to_string(),
                    single[i].to_string(),
                    none[i].to_string(),
                ]
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumFile {
    pub abscissa: Abscissa,
    pub x: Vec<f64>,
    pub columns: Columns,
    pub metadata: BTreeMap<String, String>,
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

fn parse_count(field: &str, line: usize) -> CliResult<u64> {
    if let Ok(n) = field.parse::<u64>() {
        return Ok(n);
    }
    match field.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.fract() == 0.0 && v < u64::MAX as f64 => Ok(v as u64),
        _ => Err(bad(format!(
            "line {line}: {field:?} is not a nonnegative integer count"
        ))),
    }
}

fn parse_real(field: &str, line: usize) -> CliResult<f64> {
    field
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| bad(format!("line {line}: {field:?} is not a finite number")))
}

impl SpectrumFile {
    pub fn new(abscissa: Abscissa, x: Vec<f64>, columns: Columns) -> Self {
        let mut metadata = BTreeMap::new();
        metadata.insert("schema_version".to_string(), SCHEMA_VERSION.to_string());
        metadata.insert(
            "kind".to_string(),
            if columns.is_counts() {
                "counts"
            } else {
                "ideal"
            }
            .to_string(),
        );
        Self {
            abscissa,
            x,
            columns,
            metadata,
        }
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.insert(key.to_string(), value.to_string());
        self
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata.get(key).map(String::as_str)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            out.push_str(&format!("# {k}={v}\n"));
        }
        out.push_str(self.abscissa.header());
        for name in self.columns.names() {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for (i, &x) in self.x.iter().enumerate() {
            out.push_str(&num(x));
            for field in self.columns.row(i) {
                out.push(',');
                out.push_str(&field);
            }
            out.push('\n');
        }
        out
    }

    /// Parses and validates a spectrum file. Every violation is an input
    /// error.
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut metadata = BTreeMap::new();
        for line in text.lines() {
            if let Some(rest) = line.trim_start().strip_prefix('#') {
                if let Some((k, v)) = rest.split_once('=') {
                    metadata.insert(k.trim().to_string(), v.trim().to_string());
                }
            }
        }
        if let Some(v) = metadata.get("schema_version") {
            if v != &SCHEMA_VERSION.to_string() {
                return Err(bad(format!("unsupported schema_version {v}")));
            }
        }

        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let header: Vec<String> = reader
            .headers()
            .map_err(|e| bad(format!("unreadable header: {e}")))?
            .iter()
            .map(str::to_string)
            .collect();
        let Some((first, values)) = header.split_first() else {
            return Err(bad("file is empty"));
        };
        let abscissa = match first.as_str() {
            "omega_rad_per_s" => Abscissa::OmegaRadPerS,
            "wavelength_nm" => Abscissa::WavelengthNm,
            "" => return Err(bad("file is empty")),
            other => return Err(bad(format!("unknown abscissa column {other:?}"))),
        };
        let names: Vec<&str> = values.iter().map(String::as_str).collect();
        let width = names.len() + 1;

        let mut x = Vec::new();
        let mut real = Vec::new();
        let mut ints: Vec<Vec<u64>> = vec![Vec::new(); names.len()];
        let counts = match names[..] {
            ["intensity"] => false,
            ["counts"] | ["counts", "bunched"] | ["counts", "single", "none"] => true,
            _ => return Err(bad(format!("unknown value columns {names:?}"))),
        };
        for (i, record) in reader.records().enumerate() {
            let line = i + 2;
            let record = record.map_err(|e| bad(format!("line {line}: {e}")))?;
            if record.len() != width {
                return Err(bad(format!(
                    "line {line}: expected {width} fields, got {}",
                    record.len()
                )));
            }
            x.push(parse_real(&record[0], line)?);
            if counts {
                for (col, field) in ints.iter_mut().zip(record.iter().skip(1)) {
                    col.push(parse_count(field, line)?);
                }
            } else {
                let v = parse_real(&record[1], line)?;
                if v < 0.0 {
                    return Err(bad(format!("line {line}: intensity {v} is negative")));
                }
                real.push(v);
            }
        }
        if x.is_empty() {
            return Err(bad("file has no data rows"));
        }
        if let Some(i) = x.windows(2).position(|w| w[1] <= w[0]) {
            return Err(bad(format!(
                "abscissa is not strictly increasing at data row {}",
                i + 2
            )));
        }
        if abscissa == Abscissa::WavelengthNm && x[0] <= 0.0 {
            return Err(bad("wavelengths must be positive"));
        }
        let columns = match (counts, ints.len()) {
            (false, _) => Columns::Intensity(real),
            (true, 1) => Columns::Counts(ints.remove(0)),
            (true, 2) => Columns::TwoPort {
                bunched: ints.remove(1),
                antibunched: ints.remove(0),
            },
            _ => Columns::ThreeOutcome {
                none: ints.remove(2),
                single: ints.remove(1),
                coincidence: ints.remove(0),
            },
        };
        Ok(Self {
            abscissa,
            x,
            columns,
            metadata,
        })
    }

    /// The exact uniform symmetric grid the frequencies sit on, if any.
    pub fn uniform_grid(&self) -> Option<FrequencyGrid> {
        match self.abscissa {
            Abscissa::OmegaRadPerS => FrequencyGrid::from_centers(&self.x, GRID_TOL).ok(),
            Abscissa::WavelengthNm => None,
        }
    }

    /// The coincidence spectrum on a uniform symmetric difference-frequency
    /// grid.
    ///
    /// Files already on such a grid are used as stored. Otherwise the
    /// values are treated as samples of a density, converted from
    /// wavelength with the Jacobian `|dλ/dω| = λ²/(4πc)`, and linearly
    /// interpolated onto a grid spanning the data, zero outside it.
    pub fn to_pattern(&self, pump_wavelength: f64) -> CliResult<SpectralPattern> {
        let kind = if self.columns.is_counts() {
            PatternKind::Counts
        } else {
            PatternKind::IdealDensity
        };
        if let Some(grid) = self.uniform_grid() {
            return SpectralPattern::new(grid, self.columns.primary(), kind)
                .map_err(|e| bad(e.to_string()));
        }
        let values = self.columns.primary();
        let mut samples: Vec<(f64, f64)> = match self.abscissa {
            Abscissa::OmegaRadPerS => self.x.iter().copied().zip(values).collect(),
            Abscissa::WavelengthNm => self
                .x
                .iter()
                .zip(values)
                .map(|(&nm, v)| {
                    let lambda = nm / 1e9;
                    let w = wavelength_to_difference_frequency(lambda, pump_wavelength)
                        .map_err(|e| bad(e.to_string()))?;
                    Ok((w, v * lambda * lambda / (4.0 * PI * SPEED_OF_LIGHT)))
                })
                .collect::<CliResult<_>>()?,
        };
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        resample(&samples)
    }

    /// Per-bin counts for likelihood fitting; needs a uniform frequency grid
    /// and per-port or per-outcome columns.
    pub fn outcome_counts(&self) -> CliResult<(FrequencyGrid, Outcomes<u64>)> {
        let grid = self.uniform_grid().ok_or_else(|| {
            bad("likelihood fitting needs counts on a uniform symmetric omega_rad_per_s grid")
        })?;
        let aggregate =
            |key: &str| -> CliResult<u64> { self.meta(key).map_or(Ok(0), |v| parse_count(v, 0)) };
        let outcomes = match &self.columns {
            Columns::TwoPort {
                antibunched,
                bunched,
            } => Outcomes::TwoPort {
                antibunched: antibunched.clone(),
                bunched: bunched.clone(),
                single: aggregate("single_click")?,
                none: aggregate("no_click")?,
            },
            Columns::ThreeOutcome {
                coincidence,
                single,
                none,
            } => Outcomes::PaperEq16 {
                coincidence: coincidence.clone(),
                single: single.clone(),
                none: none.clone(),
            },
            _ => {
                return Err(bad(
                    "likelihood fitting needs counts,bunched or counts,single,none columns",
                ))
            }
        };
        Ok((grid, outcomes))
    }
}

fn resample(samples: &[(f64, f64)]) -> CliResult<SpectralPattern> {
    let reach = samples.iter().fold(0.0f64, |m, s| m.max(s.0.abs()));
    if reach.is_nan() || reach <= 0.0 || samples.len() < 2 {
        return Err(bad("spectrum needs at least two distinct frequencies"));
    }
    let n = samples.len().max(MIN_BINS).div_ceil(2) * 2;
    let grid = FrequencyGrid::new(reach, n).map_err(|e| bad(e.to_string()))?;
    let values = grid
        .values()
        .into_iter()
        .map(|w| {
            let i = samples.partition_point(|s| s.0 < w);
            if i == 0 || i == samples.len() {
                return 0.0;
            }
            let (a, b) = (samples[i - 1], samples[i]);
            a.1 + (b.1 - a.1) * (w - a.0) / (b.0 - a.0)
        })
        .collect();
    SpectralPattern::new(grid, values, PatternKind::IdealDensity).map_err(|e| bad(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SpectrumFile {
        let grid = FrequencyGrid::new(3e14, 16).unwrap();
        let x = grid.values();
        let ab: Vec<u64> = (0..16).map(|i| i * 7).collect();
        let bu: Vec<u64> = (0..16).map(|i| 100 - i).collect();
        SpectrumFile::new(
            Abscissa::OmegaRadPerS,
            x,
            Columns::TwoPort {
                antibunched: ab,
                bunched: bu,
            },
        )
        .with_meta("single_click", 12)
        .with_meta("no_click", 3)
    }

    #[test]
    fn write_then_read_is_lossless() {
        let f = sample();
        assert_eq!(SpectrumFile::parse(&f.to_csv()).unwrap(), f);
        let x: Vec<f64> = (0..20).map(|i| 0.1 * i as f64 + 1.0 / 3.0).collect();
        let y: Vec<f64> = x.iter().map(|v| v.sin().abs() * 1e-17).collect();
        let g = SpectrumFile::new(Abscissa::WavelengthNm, x, Columns::Intensity(y));
        assert_eq!(SpectrumFile::parse(&g.to_csv()).unwrap(), g);
    }

    #[test]
    fn counts_for_fitting() {
        let (grid, outcomes) = sample().outcome_counts().unwrap();
        assert_eq!(grid.n_bins(), 16);
        let Outcomes::TwoPort { single, none, .. } = outcomes else {
            panic!()
        };
        assert_eq!((single, none), (12, 3));
    }

    #[test]
    fn schema_violations() {
        let cases = [
            "",
            "# only a comment\n",
            "omega_rad_per_s,intensity\n",
            "time,intensity\n1,2\n",
            "omega_rad_per_s,intensity\n2,1\n1,1\n",
            "omega_rad_per_s,intensity\n1,1\n1,1\n",
            "omega_rad_per_s,intensity\n1,-1\n2,1\n",
            "omega_rad_per_s,counts\n1,1.5\n2,1\n",
            "omega_rad_per_s,counts\n1,-2\n2,1\n",
            "omega_rad_per_s,intensity\n1,nan\n2,1\n",
            "omega_rad_per_s,intensity\n1\n",
            "# schema_version=2\nomega_rad_per_s,intensity\n1,1\n2,1\n",
        ];
        for text in cases {
            assert!(
                matches!(SpectrumFile::parse(text), Err(CliError::Input(_))),
                "{text:?}"
            );
        }
    }

    #[test]
    fn wavelength_files_map_onto_a_symmetric_grid() {
        // A flat density in wavelength becomes λ²/(4πc) in frequency.
        let x: Vec<f64> = (0..101).map(|i| 790.0 + 0.4 * i as f64).collect();
        let f = SpectrumFile::new(
            Abscissa::WavelengthNm,
            x,
            Columns::Intensity(vec![1.0; 101]),
        );
        let p = f.to_pattern(405e-9).unwrap();
        let grid = p.grid();
        assert_eq!(grid.n_bins() % 2, 0);
        let mid = grid.n_bins() / 2;
        let expected = (810e-9f64).powi(2) / (4.0 * PI * SPEED_OF_LIGHT);
        assert!((p.intensity()[mid] / expected - 1.0).abs() < 0.01);
    }
}
