//! Scenario preparation (validation) and execution.
//!
//! `prepare` builds every library object a run needs, so a bad parameter is
//! reported before any output is written. `execute` only does numerics.

mod dephasing;
mod oracle;
mod oscillator;
mod spinboson;
mod sudden;

use std::collections::BTreeMap;

use recoherence::bath::{small_cutoff_asymptote, spectral_integral, DECOHERENCE_NORMALIZATION};
use recoherence::oscillator::RenormalizationCoefficients;
use recoherence::BathSpec;

use crate::config::{RunConfig, Scenario};
use crate::error::{invalid, CliResult};

/// One output file, held in memory until the run succeeds.
#[derive(Debug, Clone)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn from_writer(name: &str, write: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Self {
        let mut bytes = Vec::new();
        write(&mut bytes).expect("writing to memory cannot fail");
        Self {
            name: name.to_owned(),
            bytes,
        }
    }

    /// CSV built row by row through the `csv` writer.
    pub fn csv(name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Self {
        Self::from_writer(name, |buf| {
            let mut w = csv::Writer::from_writer(buf);
            w.write_record(header)?;
            for r in rows {
                w.write_record(&r)?;
            }
            w.flush()
        })
    }
}

/// Full-precision float text; round-trips exactly.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}

/// Scalar results of a run, keyed by name.
pub type Summary = BTreeMap<String, f64>;

#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub summary: Summary,
    /// Numerical-health figures for the manifest.
    pub diagnostics: Summary,
}

/// Validated inputs, ready to run.
pub enum Prepared {
    Dephasing(dephasing::Plan),
    Oscillator(oscillator::Plan),
    SpinBoson(spinboson::Plan),
    Sudden(sudden::Plan),
    Oracle(oracle::Plan),
}

pub fn prepare(cfg: &RunConfig) -> CliResult<Prepared> {
    if !(cfg.sample_dt > 0.0) {
        return Err(crate::error::CliError::Validation("sample_dt must be positive".into()));
    }
    Ok(match cfg.scenario {
        Scenario::Dephasing => Prepared::Dephasing(dephasing::Plan::new(cfg)?),
        Scenario::Oscillator => Prepared::Oscillator(oscillator::Plan::new(cfg)?),
        Scenario::Spinboson => Prepared::SpinBoson(spinboson::Plan::new(cfg)?),
        Scenario::Sudden => Prepared::Sudden(sudden::Plan::new(cfg)?),
        Scenario::OracleCompare => Prepared::Oracle(oracle::Plan::new(cfg)?),
    })
}

pub fn execute(plan: &Prepared) -> CliResult<Outcome> {
    match plan {
        Prepared::Dephasing(p) => p.run(),
        Prepared::Oscillator(p) => p.run(),
        Prepared::SpinBoson(p) => p.run(),
        Prepared::Sudden(p) => p.run(),
        Prepared::Oracle(p) => p.run(),
    }
}

/// Quadrature figures of the continuum bath, shared by every scenario.
pub fn bath_diagnostics(bath: &BathSpec<f64>) -> CliResult<Summary> {
    let r = spectral_integral(bath, 1e-10).map_err(invalid("spectral integral"))?;
    let k = RenormalizationCoefficients::new(bath).map_err(invalid("mass integral"))?;
    let mut d = Summary::new();
    d.insert("decoherence_normalization".into(), DECOHERENCE_NORMALIZATION);
    d.insert("spectral_integral".into(), r.d);
    d.insert("spectral_quadrature_error".into(), r.quadrature_error);
    d.insert(
        "spectral_to_asymptote".into(),
        r.d / small_cutoff_asymptote(bath.mass(), bath.cutoff()),
    );
    d.insert("mass_integral".into(), k.mass_integral);
    d.insert("mass_quadrature_error".into(), k.quadrature_error);
    Ok(d)
}
