//! Column-wise comparison of two CSV traces.

use std::path::Path;

use crate::error::{CliError, CliResult};

/// Numeric table read from a CSV file with a header row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn read(path: &Path) -> CliResult<Self> {
        let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
        let header: Vec<String> = r
            .headers()
            .map_err(|e| csv_error(path, e))?
            .iter()
            .map(str::to_owned)
            .collect();
        let mut rows = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| csv_error(path, e))?;
            let row = rec
                .iter()
                .zip(&header)
                .map(|(f, h)| {
                    f.trim().parse::<f64>().map_err(|_| {
                        CliError::Validation(format!(
                            "{}: row {}, column `{h}`: `{f}` is not a number",
                            path.display(),
                            i + 1
                        ))
                    })
                })
                .collect::<CliResult<Vec<f64>>>()?;
            rows.push(row);
        }
        Ok(Self { header, rows })
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => CliError::Io {
            path: path.to_owned(),
            source,
        },
        other => CliError::Validation(format!("{}: {other:?}", path.display())),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnReport {
    pub column: String,
    pub max_abs: f64,
    pub rms: f64,
    /// Row (0-based, data rows only) of the largest deviation.
    pub at_row: usize,
    pub at_t: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub columns: Vec<ColumnReport>,
    /// `b` was linearly interpolated onto the time grid of `a`.
    pub interpolated: bool,
}

impl Comparison {
    pub fn worst(&self) -> f64 {
        self.columns.iter().map(|c| c.max_abs).fold(0.0, f64::max)
    }
}

const TIME: &str = "t";

/// Compares `columns` of two tables (all shared columns but time when
/// empty). Rows are matched on the `t` column when both have one.
pub fn compare(a: &Table, b: &Table, columns: &[String]) -> CliResult<Comparison> {
    let names: Vec<String> = if columns.is_empty() {
        a.header
            .iter()
            .filter(|h| *h != TIME && b.header.contains(h))
            .cloned()
            .collect()
    } else {
        columns.to_vec()
    };
    if names.is_empty() {
        return Err(CliError::Validation("no shared columns to compare".into()));
    }
    let times = match (a.column(TIME), b.column(TIME)) {
        (Some(ta), Some(tb)) => Some((ta, tb)),
        _ => None,
    };
    let aligned = match &times {
        Some((ta, tb)) => {
            ta.len() == tb.len() && ta.iter().zip(tb).all(|(x, y)| (x - y).abs() <= 1e-9 * (1.0 + x.abs()))
        }
        None => a.rows.len() == b.rows.len(),
    };
    if !aligned && times.is_none() {
        return Err(CliError::Validation(format!(
            "row counts differ ({} vs {}) and there is no `t` column to align on",
            a.rows.len(),
            b.rows.len()
        )));
    }
    let mut reports = Vec::new();
    for name in &names {
        let missing = |which| CliError::Validation(format!("column `{name}` missing from {which}"));
        let ca = a.column(name).ok_or_else(|| missing("the first file"))?;
        let cb = b.column(name).ok_or_else(|| missing("the second file"))?;
        let cb = match (&times, aligned) {
            (_, true) => cb,
            (Some((ta, tb)), false) => interpolate(tb, &cb, ta)?,
            (None, false) => unreachable!("rejected above"),
        };
        let (mut max_abs, mut at_row, mut sq) = (0.0, 0, 0.0);
        for (i, (x, y)) in ca.iter().zip(&cb).enumerate() {
            let d = (x - y).abs();
            // NaN in either file counts as the worst possible mismatch
            let d = if d.is_nan() && !(x.is_nan() && y.is_nan()) {
                f64::INFINITY
            } else if d.is_nan() {
                0.0
            } else {
                d
            };
            sq += d * d;
            if d > max_abs {
                max_abs = d;
                at_row = i;
            }
        }
        reports.push(ColumnReport {
            column: name.clone(),
            max_abs,
            rms: (sq / ca.len().max(1) as f64).sqrt(),
            at_row,
            at_t: times.as_ref().map(|(ta, _)| ta[at_row]),
        });
    }
    Ok(Comparison {
        columns: reports,
        interpolated: !aligned,
    })
}

/// Linear interpolation of `(x, y)` at `at`; `x` must increase and cover `at`.
fn interpolate(x: &[f64], y: &[f64], at: &[f64]) -> CliResult<Vec<f64>> {
    if x.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::Validation(
            "second file's `t` column is not increasing".into(),
        ));
    }
    at.iter()
        .map(|t| {
            let j = x.partition_point(|v| v <= t);
            if j == 0 || (j == x.len() && *t > x[x.len() - 1]) {
                return Err(CliError::Validation(format!(
                    "t = {t} outside the second file's time range"
                )));
            }
            let j = j.min(x.len() - 1);
            let i = j - 1;
            if x[j] == *t {
                return Ok(y[j]);
            }
            let f = (t - x[i]) / (x[j] - x[i]);
            Ok(y[i] + f * (y[j] - y[i]))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(header: &[&str], rows: Vec<Vec<f64>>) -> Table {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows,
        }
    }

    #[test]
    fn identical_tables_agree_exactly() {
        let a = table(&["t", "x"], vec![vec![0.0, 1.0], vec![1.0, 2.0]]);
        let c = compare(&a, &a, &[]).unwrap();
        assert_eq!(c.worst(), 0.0);
        assert!(!c.interpolated);
    }

    #[test]
    fn locates_the_largest_deviation() {
        let a = table(&["t", "x"], vec![vec![0.0, 1.0], vec![1.0, 2.0], vec![2.0, 3.0]]);
        let mut b = a.clone();
        b.rows[1][1] += 0.5;
        let c = compare(&a, &b, &["x".into()]).unwrap();
        assert_eq!(c.columns[0].max_abs, 0.5);
        assert_eq!(c.columns[0].at_row, 1);
        assert_eq!(c.columns[0].at_t, Some(1.0));
        assert!((c.columns[0].rms - (0.25f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn interpolates_onto_the_first_grid() {
        let a = table(&["t", "x"], vec![vec![0.0, 0.0], vec![0.5, 0.5], vec![1.0, 1.0]]);
        let b = table(&["t", "x"], vec![vec![0.0, 0.0], vec![1.0, 1.0]]);
        let c = compare(&a, &b, &[]).unwrap();
        assert!(c.interpolated);
        assert!(c.worst() < 1e-15);
    }

    #[test]
    fn missing_column_is_a_usage_error() {
        let a = table(&["t", "x"], vec![vec![0.0, 0.0]]);
        let e = compare(&a, &a, &["y".into()]).unwrap_err();
        assert_eq!(e.exit_code(), 1);
    }
}
