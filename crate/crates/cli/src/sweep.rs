//! `key=a:b:n` and `key=v1,v2,...` sweeps over config keys.

use std::f64::consts::PI;

use crate::config::{Scenario, SweepConfig};
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    /// Dotted path into the config tree.
    pub path: Vec<String>,
    pub values: Vec<f64>,
}

impl Sweep {
    pub fn key(&self) -> String {
        self.path.join(".")
    }

    /// Parses the command-line form.
    pub fn parse(spec: &str, scenario: Scenario) -> CliResult<Self> {
        let (key, rhs) = spec
            .split_once('=')
            .ok_or_else(|| CliError::Validation(format!("sweep `{spec}`: expected key=a:b:n or key=v1,v2")))?;
        let values = if rhs.contains(':') {
            parse_range(rhs)?
        } else {
            rhs.split(',').map(parse_number).collect::<CliResult<_>>()?
        };
        Self::new(key, values, scenario)
    }

    pub fn from_config(c: &SweepConfig, scenario: Scenario) -> CliResult<Self> {
        let values = match (&c.range, &c.values) {
            (Some(r), None) => parse_range(r)?,
            (None, Some(v)) => v.clone(),
            _ => {
                return Err(CliError::Validation(
                    "sweep: give exactly one of `range` and `values`".into(),
                ))
            }
        };
        Self::new(&c.key, values, scenario)
    }

    fn new(key: &str, values: Vec<f64>, scenario: Scenario) -> CliResult<Self> {
        let key = key.trim();
        if key.is_empty() || key.split('.').any(str::is_empty) {
            return Err(CliError::Validation(format!("sweep key `{key}` is malformed")));
        }
        if values.is_empty() {
            return Err(CliError::Validation(format!("sweep over `{key}` has no points")));
        }
        let mut path: Vec<String> = key.split('.').map(str::to_owned).collect();
        if path.len() == 1 {
            path.insert(0, scenario.block().to_owned());
        }
        Ok(Self { path, values })
    }

    /// Copy of `tree` with the swept key set to `value`. Integer keys stay
    /// integers so counts such as `fock_dim` can be swept.
    pub fn apply(&self, tree: &toml::Value, value: f64) -> CliResult<toml::Value> {
        let mut out = tree.clone();
        let (last, parents) = self.path.split_last().expect("non-empty path");
        let mut node = &mut out;
        for p in parents {
            let table = node
                .as_table_mut()
                .ok_or_else(|| CliError::Validation(format!("sweep key `{}`: `{p}` is not a table", self.key())))?;
            node = table
                .entry(p.clone())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        }
        let table = node
            .as_table_mut()
            .ok_or_else(|| CliError::Validation(format!("sweep key `{}` does not name a table entry", self.key())))?;
        let new = match table.get(last) {
            Some(toml::Value::Integer(_)) => {
                if value.fract() != 0.0 {
                    return Err(CliError::Validation(format!(
                        "sweep key `{}` takes integers, got {value}",
                        self.key()
                    )));
                }
                toml::Value::Integer(value as i64)
            }
            _ => toml::Value::Float(value),
        };
        table.insert(last.clone(), new);
        Ok(out)
    }
}

/// Inclusive linear range `a:b:n`.
pub fn parse_range(spec: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [a, b, n] = parts[..] else {
        return Err(CliError::Validation(format!("range `{spec}`: expected a:b:n")));
    };
    let (a, b) = (parse_number(a)?, parse_number(b)?);
    let n: usize = n
        .trim()
        .parse()
        .map_err(|_| CliError::Validation(format!("range `{spec}`: point count `{n}` is not a positive integer")))?;
    match n {
        0 => Err(CliError::Validation(format!("range `{spec}`: need at least one point"))),
        1 => Ok(vec![a]),
        _ => Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()),
    }
}

/// A float, optionally written with `pi`: `pi`, `-pi/2`, `2pi`, `0.5*pi`.
pub fn parse_number(s: &str) -> CliResult<f64> {
    let bad = || CliError::Validation(format!("`{s}` is not a number"));
    let t = s.trim().to_ascii_lowercase();
    let Some(pos) = t.find("pi") else {
        return t.parse().map_err(|_| bad());
    };
    let (head, tail) = (t[..pos].trim_end_matches('*').trim(), t[pos + 2..].trim());
    let factor = match head {
        "" | "+" => 1.0,
        "-" => -1.0,
        h => h.parse::<f64>().map_err(|_| bad())?,
    };
    let divisor = match tail.strip_prefix('/') {
        Some(d) => d.trim().parse::<f64>().map_err(|_| bad())?,
        None if tail.is_empty() => 1.0,
        None => return Err(bad()),
    };
    Ok(factor * PI / divisor)
}
