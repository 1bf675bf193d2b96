//! Datasets: dense point collections and their CSV representation.
//!
//! A dataset is an m×d matrix of finite reals, one observation per row. The
//! CSV format is UTF-8 with a header row naming the columns `x1,...,xd` (or
//! `y1,...,yd` for the paired file of a two-sample command), decimal points,
//! and comma separators.

use std::path::Path;

use ndarray::prelude::*;

use crate::error::{Error, Result};

/// An immutable collection of m points in d dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSet {
    points: Array2<f64>,
}

impl DataSet {
    /// Wraps an m×d matrix of points. Requires m ≥ 1, d ≥ 1, all finite.
    pub fn new(points: Array2<f64>) -> Result<Self> {
        if points.nrows() == 0 {
            return Err(Error::EmptyInput("dataset has no rows"));
        }
        if points.ncols() == 0 {
            return Err(Error::EmptyInput("dataset has no columns"));
        }
        if points.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidKernelParameter(
                "dataset contains a non-finite entry".into(),
            ));
        }
        Ok(DataSet { points })
    }

    /// Builds a dataset from rows given as slices, all of equal length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyInput("dataset has no rows"));
        }
        let d = rows[0].len();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != d {
                return Err(Error::DimensionMismatch {
                    context: "dataset row length",
                    left: d,
                    right: rows[i].len(),
                });
            }
        }
        let mut points = Array2::zeros((rows.len(), d));
        for (i, r) in rows.iter().enumerate() {
            for (j, v) in r.iter().enumerate() {
                points[[i, j]] = *v;
            }
        }
        DataSet::new(points)
    }

    /// Number of observations (rows).
    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    /// Always false: construction rejects empty datasets.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Point dimension (columns).
    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    /// The i-th observation as a slice.
    pub fn point(&self, i: usize) -> &[f64] {
        self.points.row(i).to_slice().expect("rows are contiguous")
    }

    /// The full point matrix.
    pub fn points(&self) -> &Array2<f64> {
        &self.points
    }

    /// Reads a dataset from CSV. `column_prefix` is the expected header
    /// letter (`'x'` or `'y'`); the header must be exactly
    /// `<prefix>1,...,<prefix>d`. Errors carry the 1-based line number.
    pub fn read_csv(path: &Path, column_prefix: char) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let display = path.display().to_string();
        let mut lines = text.lines().enumerate();

        let (_, header) = lines.next().ok_or_else(|| Error::CsvFormat {
            path: display.clone(),
            line: 1,
            message: "file is empty".into(),
        })?;
        let columns: Vec<&str> = header.split(',').map(str::trim).collect();
        for (j, name) in columns.iter().enumerate() {
            let expected = format!("{}{}", column_prefix, j + 1);
            if *name != expected {
                return Err(Error::CsvFormat {
                    path: display,
                    line: 1,
                    message: format!("expected header column `{expected}`, found `{name}`"),
                });
            }
        }
        let d = columns.len();

        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (idx, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != d {
                return Err(Error::CsvFormat {
                    path: display,
                    line: idx + 1,
                    message: format!("expected {d} fields, found {}", fields.len()),
                });
            }
            let mut row = Vec::with_capacity(d);
            for field in fields {
                let value: f64 = field.parse().map_err(|_| Error::CsvFormat {
                    path: display.clone(),
                    line: idx + 1,
                    message: format!("cannot parse `{field}` as a number"),
                })?;
                row.push(value);
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::CsvFormat {
                path: display,
                line: 1,
                message: "no data rows".into(),
            });
        }
        DataSet::from_rows(&rows)
    }

    /// Writes the dataset as CSV with header `<prefix>1,...,<prefix>d`.
    /// Values are serialized at 17 significant digits so they round-trip.
    pub fn write_csv(&self, path: &Path, column_prefix: char) -> Result<()> {
        let mut writer = csv::Writer::from_path(path).map_err(csv_io_error)?;
        let header: Vec<String> = (1..=self.dim())
            .map(|j| format!("{column_prefix}{j}"))
            .collect();
        writer.write_record(&header).map_err(csv_io_error)?;
        for i in 0..self.len() {
            let record: Vec<String> = self
                .point(i)
                .iter()
                .map(|v| format!("{v:.16e}"))
                .collect();
            writer.write_record(&record).map_err(csv_io_error)?;
        }
        writer.flush()?;
        Ok(())
    }
}

fn csv_io_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            format!("csv: {other:?}"),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_nonfinite() {
        assert!(DataSet::new(Array2::zeros((0, 2))).is_err());
        assert!(DataSet::new(Array2::zeros((2, 0))).is_err());
        assert!(DataSet::new(arr2(&[[1.0, f64::NAN]])).is_err());
    }

    #[test]
    fn from_rows_checks_lengths() {
        assert!(DataSet::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
        let d = DataSet::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.dim(), 2);
        assert_eq!(d.point(1), &[3.0, 4.0]);
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("points.csv");
        let d = DataSet::from_rows(&[vec![1.5, -2.25], vec![0.1, 1e-17]]).unwrap();
        d.write_csv(&path, 'x').unwrap();
        let back = DataSet::read_csv(&path, 'x').unwrap();
        assert_eq!(d, back);
    }

    #[test]
    fn csv_errors_name_the_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "x1,x2\n1.0,2.0\n3.0,oops\n").unwrap();
        match DataSet::read_csv(&path, 'x') {
            Err(Error::CsvFormat { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected CSV error, got {other:?}"),
        }
    }

    #[test]
    fn csv_rejects_wrong_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("hdr.csv");
        std::fs::write(&path, "a1,a2\n1.0,2.0\n").unwrap();
        match DataSet::read_csv(&path, 'x') {
            Err(Error::CsvFormat { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected CSV error, got {other:?}"),
        }
    }

    #[test]
    fn csv_rejects_ragged_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ragged.csv");
        std::fs::write(&path, "x1,x2\n1.0,2.0\n3.0\n").unwrap();
        match DataSet::read_csv(&path, 'x') {
            Err(Error::CsvFormat { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected CSV error, got {other:?}"),
        }
    }
}
