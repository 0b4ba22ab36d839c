//! File formats: power-law mixes as JSON, sampled functions as two-column CSV, and the
//! fixed float formatting used by every CSV the crate writes.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::funcspace::{Interpolation, PowerLawMix, SampledFunction};
use crate::scalar::Scalar;

/// 17 significant digits in scientific notation, `.` as separator. Negative zero prints
/// as zero.
pub fn format_float<T: Scalar>(x: T) -> String {
    let x = x.to_f64().unwrap_or(f64::NAN);
    if x == 0.0 {
        format!("{:.16e}", 0.0)
    } else if x.is_nan() {
        "NaN".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// Writes `bytes` to a temporary file next to `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error.to_string()))?;
    Ok(())
}

pub fn parse_power_law_json<T: Scalar + serde::de::DeserializeOwned>(text: &str) -> Result<PowerLawMix<T>> {
    serde_json::from_str(text).map_err(|e| {
        // Exponent violations surface through serde as custom errors; keep them as
        // domain errors so callers can tell them apart from malformed JSON.
        let msg = e.to_string();
        if let Some(rest) = msg.strip_prefix("domain error: ") {
            Error::Domain(rest.to_string())
        } else {
            Error::Parse(msg)
        }
    })
}

pub fn read_power_law_json<T: Scalar + serde::de::DeserializeOwned>(path: &Path) -> Result<PowerLawMix<T>> {
    parse_power_law_json(&fs::read_to_string(path)?)
}

pub fn power_law_to_json<T: Scalar + serde::Serialize>(mix: &PowerLawMix<T>) -> Result<String> {
    serde_json::to_string_pretty(mix).map_err(|e| Error::Parse(e.to_string()))
}

/// Reads a sampled function from CSV text with a header row. The first column is `t`, the
/// second the value; further columns are ignored, so transform output can be read back.
pub fn parse_sampled_csv<T: Scalar>(text: &str, interpolation: Interpolation) -> Result<SampledFunction<T>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut grid = Vec::new();
    let mut values = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse(e.to_string()))?;
        if record.len() < 2 {
            return Err(Error::Parse(format!("row {}: expected at least two columns", line + 2)));
        }
        let num = |i: usize| -> Result<T> {
            let x: f64 = record[i]
                .parse()
                .map_err(|e| Error::Parse(format!("row {}: {:?}: {e}", line + 2, &record[i])))?;
            Ok(T::lit(x))
        };
        grid.push(num(0)?);
        values.push(num(1)?);
    }
    SampledFunction::new(grid, values, interpolation)
}

pub fn read_sampled_csv<T: Scalar>(path: &Path, interpolation: Interpolation) -> Result<SampledFunction<T>> {
    parse_sampled_csv(&fs::read_to_string(path)?, interpolation)
}

pub fn sampled_to_csv<T: Scalar>(f: &SampledFunction<T>) -> String {
    let mut out = String::from("t,value\n");
    for (t, v) in f.grid().iter().zip(f.values()) {
        out.push_str(&format_float(*t));
        out.push(',');
        out.push_str(&format_float(*v));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn float_format_is_fixed_width_scientific() {
        assert_eq!(format_float(1.0_f64), "1.0000000000000000e0");
        assert_eq!(format_float(-0.125_f64), "-1.2500000000000000e-1");
        assert_eq!(format_float(f64::NAN), "NaN");
        assert_eq!(format_float(-0.0_f64), format_float(0.0_f64));
    }

    #[test]
    fn csv_reader_ignores_extra_columns() {
        let text = "t,g,g_prime,error_estimate\n1,2,0,0\n2,3,0,0\n3,4,0,0\n4,5,0,0\n";
        let f: SampledFunction<f64> = parse_sampled_csv(text, Interpolation::Linear).unwrap();
        assert_eq!(f.values(), &[2.0, 3.0, 4.0, 5.0]);
    }

    #[test]
    fn csv_errors() {
        assert!(parse_sampled_csv::<f64>("t,value\n1,x\n", Interpolation::Linear).is_err());
        assert!(parse_sampled_csv::<f64>("t,value\n1\n2\n", Interpolation::Linear).is_err());
        assert!(parse_sampled_csv::<f64>("t,value\n2,1\n1,1\n", Interpolation::Linear).is_err());
    }

    #[test]
    fn json_errors_are_classified() {
        assert!(matches!(parse_power_law_json::<f64>("{"), Err(Error::Parse(_))));
        let e = parse_power_law_json::<f64>(r#"{"terms":[{"c":1,"beta":-1.5}]}"#).unwrap_err();
        assert!(matches!(e, Error::Domain(_)), "{e:?}");
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.csv");
        write_atomic(&p, b"first").unwrap();
        write_atomic(&p, b"second").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "second");
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_lossless(vals in prop::collection::vec(-1e6f64..1e6, 4..20)) {
            let grid: Vec<f64> = (1..=vals.len()).map(|i| i as f64 * 0.37).collect();
            let f = SampledFunction::new(grid, vals, Interpolation::Cubic).unwrap();
            let back: SampledFunction<f64> = parse_sampled_csv(&sampled_to_csv(&f), Interpolation::Cubic).unwrap();
            prop_assert_eq!(back.grid(), f.grid());
            prop_assert_eq!(back.values(), f.values());
        }
    }
}
