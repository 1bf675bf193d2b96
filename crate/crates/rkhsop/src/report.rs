//! Structured experiment reports: a line-oriented text document holding an
//! experiment's name, every parameter needed to re-run it, and its numeric
//! results (value lists, coefficient vectors, grid evaluations).
//!
//! Format, version 1:
//!
//! ```text
//! rkhsop report v1
//! experiment = mercer
//!
//! [parameters]
//! key = value
//!
//! [array name]
//! <row of whitespace-separated floats>
//! ```
//!
//! Floats are serialized at 17 significant digits, which round-trips every
//! IEEE double exactly: a report re-read from disk carries bitwise the same
//! numbers that were written, and its parameters suffice to reproduce the
//! run.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

const HEADER: &str = "rkhsop report v1";

/// A named, ordered collection of parameters and numeric arrays produced by
/// one experiment run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    experiment: String,
    parameters: Vec<(String, String)>,
    arrays: Vec<(String, Vec<Vec<f64>>)>,
}

impl ExperimentReport {
    pub fn new(experiment: impl Into<String>) -> Self {
        ExperimentReport {
            experiment: experiment.into(),
            parameters: Vec::new(),
            arrays: Vec::new(),
        }
    }

    pub fn experiment(&self) -> &str {
        &self.experiment
    }

    /// Sets a parameter, replacing any previous value for the key.
    pub fn set_param(&mut self, key: &str, value: impl std::fmt::Display) {
        let rendered = value.to_string();
        if let Some(slot) = self.parameters.iter_mut().find(|(k, _)| k == key) {
            slot.1 = rendered;
        } else {
            self.parameters.push((key.to_string(), rendered));
        }
    }

    /// Sets a float parameter at full precision (17 significant digits).
    pub fn set_param_f64(&mut self, key: &str, value: f64) {
        self.set_param(key, format_float(value));
    }

    pub fn param(&self, key: &str) -> Option<&str> {
        self.parameters
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn param_f64(&self, key: &str) -> Result<f64> {
        self.required(key)?.parse().map_err(|_| {
            Error::ReportFormat {
                line: 0,
                message: format!("parameter `{key}` is not a float"),
            }
        })
    }

    pub fn param_usize(&self, key: &str) -> Result<usize> {
        self.required(key)?.parse().map_err(|_| {
            Error::ReportFormat {
                line: 0,
                message: format!("parameter `{key}` is not an integer"),
            }
        })
    }

    pub fn param_u64(&self, key: &str) -> Result<u64> {
        self.required(key)?.parse().map_err(|_| {
            Error::ReportFormat {
                line: 0,
                message: format!("parameter `{key}` is not an integer"),
            }
        })
    }

    fn required(&self, key: &str) -> Result<&str> {
        self.param(key).ok_or_else(|| Error::ReportFormat {
            line: 0,
            message: format!("missing parameter `{key}`"),
        })
    }

    /// Appends or replaces a named numeric array. Rows may differ in length
    /// (value lists use one entry per row, grid evaluations several columns).
    pub fn set_array(&mut self, name: &str, rows: Vec<Vec<f64>>) {
        if let Some(slot) = self.arrays.iter_mut().find(|(n, _)| n == name) {
            slot.1 = rows;
        } else {
            self.arrays.push((name.to_string(), rows));
        }
    }

    /// Convenience for one-column arrays (value lists).
    pub fn set_scalars(&mut self, name: &str, values: &[f64]) {
        self.set_array(name, values.iter().map(|&v| vec![v]).collect());
    }

    pub fn array(&self, name: &str) -> Option<&[Vec<f64>]> {
        self.arrays
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, rows)| rows.as_slice())
    }

    /// The flattened entries of a one-column array.
    pub fn scalars(&self, name: &str) -> Result<Vec<f64>> {
        let rows = self.array(name).ok_or_else(|| Error::ReportFormat {
            line: 0,
            message: format!("missing array `{name}`"),
        })?;
        rows.iter()
            .map(|row| {
                if row.len() == 1 {
                    Ok(row[0])
                } else {
                    Err(Error::ReportFormat {
                        line: 0,
                        message: format!("array `{name}` is not one-column"),
                    })
                }
            })
            .collect()
    }

    pub fn array_names(&self) -> impl Iterator<Item = &str> {
        self.arrays.iter().map(|(n, _)| n.as_str())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{HEADER}");
        let _ = writeln!(out, "experiment = {}", self.experiment);
        let _ = writeln!(out);
        let _ = writeln!(out, "[parameters]");
        for (k, v) in &self.parameters {
            let _ = writeln!(out, "{k} = {v}");
        }
        for (name, rows) in &self.arrays {
            let _ = writeln!(out);
            let _ = writeln!(out, "[array {name}]");
            for row in rows {
                let mut first = true;
                for &v in row {
                    if !first {
                        out.push(' ');
                    }
                    first = false;
                    out.push_str(&format_float(v));
                }
                out.push('\n');
            }
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, first) = lines.next().ok_or_else(|| Error::ReportFormat {
            line: 1,
            message: "empty report".into(),
        })?;
        if first.trim() != HEADER {
            return Err(Error::ReportFormat {
                line: 1,
                message: format!("expected header `{HEADER}`"),
            });
        }
        let (_, second) = lines.next().ok_or_else(|| Error::ReportFormat {
            line: 2,
            message: "missing experiment line".into(),
        })?;
        let experiment = second
            .trim()
            .strip_prefix("experiment = ")
            .ok_or_else(|| Error::ReportFormat {
                line: 2,
                message: "expected `experiment = <name>`".into(),
            })?
            .to_string();

        #[derive(PartialEq)]
        enum Section {
            None,
            Parameters,
            Array,
        }
        let mut report = ExperimentReport::new(experiment);
        let mut section = Section::None;
        for (idx, raw) in lines {
            let lineno = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if line == "[parameters]" {
                section = Section::Parameters;
                continue;
            }
            if let Some(name) = line.strip_prefix("[array ").and_then(|r| r.strip_suffix(']')) {
                if name.is_empty() || report.array(name).is_some() {
                    return Err(Error::ReportFormat {
                        line: lineno,
                        message: format!("bad or duplicate array heading `{line}`"),
                    });
                }
                report.arrays.push((name.to_string(), Vec::new()));
                section = Section::Array;
                continue;
            }
            if line.starts_with('[') {
                return Err(Error::ReportFormat {
                    line: lineno,
                    message: format!("unknown section heading `{line}`"),
                });
            }
            match section {
                Section::None => {
                    return Err(Error::ReportFormat {
                        line: lineno,
                        message: "content before the first section heading".into(),
                    });
                }
                Section::Parameters => {
                    let (key, value) = line.split_once(" = ").ok_or_else(|| {
                        Error::ReportFormat {
                            line: lineno,
                            message: "expected `key = value`".into(),
                        }
                    })?;
                    if report.param(key).is_some() {
                        return Err(Error::ReportFormat {
                            line: lineno,
                            message: format!("duplicate parameter `{key}`"),
                        });
                    }
                    report
                        .parameters
                        .push((key.to_string(), value.to_string()));
                }
                Section::Array => {
                    let row: Vec<f64> = line
                        .split_whitespace()
                        .map(|tok| {
                            tok.parse::<f64>().map_err(|_| Error::ReportFormat {
                                line: lineno,
                                message: format!("bad float `{tok}`"),
                            })
                        })
                        .collect::<Result<_>>()?;
                    report
                        .arrays
                        .last_mut()
                        .expect("array section implies an open array")
                        .1
                        .push(row);
                }
            }
        }
        Ok(report)
    }
}

/// 17 significant digits: enough to reproduce any f64 bit pattern on parse.
fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ExperimentReport {
        let mut r = ExperimentReport::new("mercer");
        r.set_param("kernel", "polynomial(2,1)");
        r.set_param("m", 5000);
        r.set_param("seed", 42u64);
        r.set_param_f64("epsilon", 1e-6);
        r.set_scalars("eigenvalues", &[5.7295, 3.5556, 2.6667]);
        r.set_array(
            "grid e1",
            vec![vec![-2.0, -2.0, 0.333], vec![-1.9, -2.0, 0.41]],
        );
        r
    }

    #[test]
    fn render_parse_round_trip() {
        let r = sample();
        let parsed = ExperimentReport::parse(&r.render()).unwrap();
        assert_eq!(r, parsed);
    }

    #[test]
    fn floats_round_trip_bitwise() {
        let values = [
            std::f64::consts::PI,
            1.0 / 3.0,
            -5.7295e300,
            2.2250738585072014e-308,
            -0.0,
            1.0 + f64::EPSILON,
        ];
        let mut r = ExperimentReport::new("probe");
        r.set_scalars("values", &values);
        let parsed = ExperimentReport::parse(&r.render()).unwrap();
        let back = parsed.scalars("values").unwrap();
        for (a, b) in values.iter().zip(&back) {
            assert_eq!(a.to_bits(), b.to_bits(), "{a} did not round-trip");
        }
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.txt");
        let r = sample();
        r.write(&path).unwrap();
        assert_eq!(ExperimentReport::read(&path).unwrap(), r);
    }

    #[test]
    fn param_accessors() {
        let r = sample();
        assert_eq!(r.param("kernel"), Some("polynomial(2,1)"));
        assert_eq!(r.param_usize("m").unwrap(), 5000);
        assert_eq!(r.param_u64("seed").unwrap(), 42);
        assert_eq!(r.param_f64("epsilon").unwrap(), 1e-6);
        assert!(r.param("absent").is_none());
        assert!(r.param_f64("kernel").is_err());
        assert!(r.param_usize("missing").is_err());
    }

    #[test]
    fn set_param_replaces() {
        let mut r = ExperimentReport::new("x");
        r.set_param("a", 1);
        r.set_param("a", 2);
        assert_eq!(r.param("a"), Some("2"));
        let parsed = ExperimentReport::parse(&r.render()).unwrap();
        assert_eq!(parsed.param("a"), Some("2"));
    }

    #[test]
    fn parse_rejects_bad_header() {
        assert!(matches!(
            ExperimentReport::parse("nope\n"),
            Err(Error::ReportFormat { line: 1, .. })
        ));
    }

    #[test]
    fn parse_rejects_bad_float_with_line_number() {
        let text = format!(
            "{HEADER}\nexperiment = t\n\n[array v]\n1.0 oops\n"
        );
        match ExperimentReport::parse(&text) {
            Err(Error::ReportFormat { line, message }) => {
                assert_eq!(line, 5);
                assert!(message.contains("oops"));
            }
            other => panic!("expected parse failure, got {other:?}"),
        }
    }

    #[test]
    fn parse_rejects_duplicates() {
        let text = format!(
            "{HEADER}\nexperiment = t\n\n[parameters]\na = 1\na = 2\n"
        );
        assert!(matches!(
            ExperimentReport::parse(&text),
            Err(Error::ReportFormat { line: 6, .. })
        ));
        let text = format!(
            "{HEADER}\nexperiment = t\n\n[array v]\n1.0\n\n[array v]\n2.0\n"
        );
        assert!(ExperimentReport::parse(&text).is_err());
    }

    #[test]
    fn parse_rejects_unknown_section() {
        let text = format!("{HEADER}\nexperiment = t\n\n[mystery]\n");
        assert!(matches!(
            ExperimentReport::parse(&text),
            Err(Error::ReportFormat { line: 4, .. })
        ));
    }

    #[test]
    fn scalars_rejects_multicolumn() {
        let r = sample();
        assert!(r.scalars("grid e1").is_err());
        assert_eq!(r.scalars("eigenvalues").unwrap().len(), 3);
    }
}
