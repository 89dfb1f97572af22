use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

use super::SweepResult;

pub const CSV_HEADER: &str = "axis_name,axis_value,scheme,trials,mean_rate,std_rate,ci95";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
    /// Whitespace-separated blocks, one per scheme, separated by two blank lines.
    PlotData,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
            OutputFormat::PlotData => "dat",
        }
    }
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "plotdata" | "plot" | "dat" => Ok(OutputFormat::PlotData),
            other => Err(Error::InvalidConfig(format!("unknown format {other:?}"))),
        }
    }
}

fn csv(result: &SweepResult) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &result.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            result.axis_name, r.axis_value, r.scheme, r.trials, r.mean_rate, r.std_rate, r.ci95
        );
    }
    out
}

fn plotdata(result: &SweepResult) -> String {
    let mut out = String::new();
    for (i, scheme) in result.schemes().into_iter().enumerate() {
        if i > 0 {
            out.push_str("\n\n");
        }
        let _ = writeln!(out, "# scheme {scheme}");
        let _ = writeln!(out, "# {} mean_rate std_rate ci95 trials", result.axis_name);
        for r in result.rows.iter().filter(|r| r.scheme == scheme) {
            let _ = writeln!(
                out,
                "{} {} {} {} {}",
                r.axis_value, r.mean_rate, r.std_rate, r.ci95, r.trials
            );
        }
    }
    out
}

pub fn render(result: &SweepResult, format: OutputFormat) -> Result<String> {
    Ok(match format {
        OutputFormat::Csv => csv(result),
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(result)?;
            s.push('\n');
            s
        }
        OutputFormat::PlotData => plotdata(result),
    })
}

/// Writes one rendering of `result` to `path`.
pub fn emit(result: &SweepResult, format: OutputFormat, path: &Path) -> Result<()> {
    let text = render(result, format)?;
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driver::Scheme;
    use crate::harness::{Provenance, RateMetric, SweepRow};

    fn result(schemes: &[Scheme]) -> SweepResult {
        SweepResult {
            axis_name: "snr_db".into(),
            metric: RateMetric::Full,
            rows: schemes
                .iter()
                .flat_map(|&scheme| {
                    [0.0, 5.0].map(|axis_value| SweepRow {
                        axis_value,
                        scheme,
                        trials: 3,
                        mean_rate: 1.25 + axis_value,
                        std_rate: 0.1,
                        ci95: 0.1131,
                        min_rate: 1.0,
                        max_rate: 7.0,
                    })
                })
                .collect(),
            trials: vec![],
            excluded: 0,
            attempted: 6,
            provenance: Provenance {
                config_hash: "ab".into(),
                master_seed: 1,
                code_version: "0.1.0".into(),
            },
        }
    }

    #[test]
    fn empty_result_is_header_only() {
        assert_eq!(render(&result(&[]), OutputFormat::Csv).unwrap(), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn csv_row_layout() {
        let text = render(&result(&[Scheme::SicMa]), OutputFormat::Csv).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[1], "snr_db,0,SIC-MA,3,1.25,0.1,0.1131");
    }

    #[test]
    fn plotdata_has_one_block_per_scheme() {
        let text = render(&result(&[Scheme::SicFpa, Scheme::SicMa, Scheme::USicMa]), OutputFormat::PlotData).unwrap();
        assert_eq!(text.split("\n\n\n").count(), 3);
        assert_eq!(text.matches("# scheme").count(), 3);
    }

    #[test]
    fn json_round_trip_is_byte_identical() {
        let r = result(&[Scheme::SicFpa, Scheme::USicFpa]);
        let first = render(&r, OutputFormat::Json).unwrap();
        let parsed: SweepResult = serde_json::from_str(&first).unwrap();
        assert_eq!(parsed, r);
        assert_eq!(render(&parsed, OutputFormat::Json).unwrap(), first);
    }

    #[test]
    fn emit_reports_target_path() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        std::fs::write(&blocker, "x").unwrap();
        let target = blocker.join("out.csv");
        let err = emit(&result(&[]), OutputFormat::Csv, &target).unwrap_err();
        assert!(err.to_string().contains("file"), "{err}");
    }
}
