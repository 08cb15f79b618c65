//! JSON and CSV writers for experiment outputs.
//!
//! Both formats round-trip losslessly: floats print in shortest-roundtrip
//! form and field order is fixed, so parse-then-re-emit is byte-identical.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::experiments::{RunResult, SeriesEntry};

/// CSV header shared by the sweep experiments.
pub const CSV_HEADER: &str = "theta,T,fidelity_sim,fidelity_pred,q_estimate";

fn fmt_opt(value: Option<f64>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

/// Flat CSV of a series; absent fields stay empty.
pub fn series_to_csv(series: &[SeriesEntry]) -> String {
    let mut out = String::with_capacity(64 * (series.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for e in series {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_opt(e.theta),
            e.applications,
            e.fidelity_sim,
            e.fidelity_pred,
            fmt_opt(e.q_estimate),
        );
    }
    out
}

/// Parses the flat CSV back into series entries (empty fields -> None).
pub fn series_from_csv(text: &str) -> Result<Vec<SeriesEntry>> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    if header != CSV_HEADER {
        return Err(crate::error::Error::InvalidInput(format!(
            "unexpected CSV header '{header}'"
        )));
    }
    let mut entries = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(crate::error::Error::InvalidInput(format!(
                "expected 5 CSV fields, got {}",
                fields.len()
            )));
        }
        let opt = |s: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                Ok(Some(s.parse::<f64>().map_err(|e| {
                    crate::error::Error::InvalidInput(format!("bad float '{s}': {e}"))
                })?))
            }
        };
        entries.push(SeriesEntry {
            theta: opt(fields[0])?,
            applications: fields[1].parse().map_err(|e| {
                crate::error::Error::InvalidInput(format!("bad count '{}': {e}", fields[1]))
            })?,
            fidelity_sim: fields[2].parse().map_err(|e| {
                crate::error::Error::InvalidInput(format!("bad float '{}': {e}", fields[2]))
            })?,
            fidelity_pred: fields[3].parse().map_err(|e| {
                crate::error::Error::InvalidInput(format!("bad float '{}': {e}", fields[3]))
            })?,
            q_estimate: opt(fields[4])?,
            binomial_sigma: None,
        });
    }
    Ok(entries)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn write_run(prefix: &Path, result: &RunResult) -> Result<(std::path::PathBuf, std::path::PathBuf)> {
    let json_path = prefix.with_extension("json");
    let csv_path = prefix.with_extension("csv");
    write_json(&json_path, result)?;
    if let Some(parent) = csv_path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(&csv_path, series_to_csv(&result.series))?;
    Ok((json_path, csv_path))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_series() -> Vec<SeriesEntry> {
        vec![
            SeriesEntry {
                theta: Some(std::f64::consts::FRAC_PI_4),
                applications: 1,
                fidelity_sim: 0.75,
                fidelity_pred: 0.75,
                q_estimate: Some(0.6387),
                binomial_sigma: None,
            },
            SeriesEntry {
                theta: None,
                applications: 2,
                fidelity_sim: 0.875,
                fidelity_pred: 0.8750000000000002,
                q_estimate: None,
                binomial_sigma: None,
            },
        ]
    }

    #[test]
    fn csv_roundtrip_is_byte_identical() {
        let text = series_to_csv(&sample_series());
        let parsed = series_from_csv(&text).unwrap();
        let again = series_to_csv(&parsed);
        assert_eq!(text, again);
    }

    #[test]
    fn csv_header_is_stable() {
        let text = series_to_csv(&[]);
        assert_eq!(text, format!("{CSV_HEADER}\n"));
    }
}
