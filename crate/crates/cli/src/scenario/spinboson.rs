use recoherence::bath::spectral_integral;
use recoherence::bloch::entropy_of_length;
use recoherence::spin_boson::{entropy_cycle_stats, renormalized_splitting, run_adiabatic, SpinBosonSpec};
use recoherence::{BathSpec, CouplingSchedule};

use super::{bath_diagnostics, Artifact, Outcome};
use crate::config::{bloch, RunConfig};
use crate::error::{invalid, numerical, CliError, CliResult};

pub struct Plan {
    bath: BathSpec<f64>,
    spec: SpinBosonSpec<f64>,
    sample_dt: f64,
}

impl Plan {
    pub fn new(cfg: &RunConfig) -> CliResult<Self> {
        let c = &cfg.spinboson;
        let bath = cfg.bath.build()?;
        let schedule = match &cfg.schedule {
            Some(s) => s.build()?,
            None => {
                if !(c.target_overlap > 0.0 && c.target_overlap <= 1.0) {
                    return Err(CliError::Validation(
                        "spinboson.target_overlap must lie in (0, 1]".into(),
                    ));
                }
                let eps = spectral_integral(&bath, 1e-10)
                    .and_then(|r| r.eps_for_overlap(c.target_overlap))
                    .map_err(invalid("spinboson.target_overlap"))?;
                CouplingSchedule::constant(eps, c.duration).map_err(invalid("spinboson.duration"))?
            }
        };
        let rho0 = bloch(c.initial, "spinboson.initial")?;
        let spec = SpinBosonSpec::from_bloch(c.omega, bath.clone(), schedule, &rho0).map_err(invalid("spinboson"))?;
        Ok(Self {
            bath,
            spec,
            sample_dt: cfg.sample_dt,
        })
    }

    pub fn run(&self) -> CliResult<Outcome> {
        let mut out = Outcome {
            diagnostics: bath_diagnostics(&self.bath)?,
            ..Outcome::default()
        };
        let tr = run_adiabatic(&self.spec, self.sample_dt).map_err(numerical("spin-boson trace"))?;
        out.artifacts
            .push(Artifact::from_writer("trace.csv", |buf| tr.write_csv(buf)));
        let end = self.spec.schedule.duration();
        let s = &mut out.summary;
        s.insert(
            "splitting_final".into(),
            renormalized_splitting(&self.spec, end).map_err(numerical("renormalized splitting"))?,
        );
        let j = self.spec.overlap(end).map_err(numerical("dressed overlap"))?;
        s.insert("overlap_final".into(), j);
        s.insert("entropy_of_overlap".into(), entropy_of_length(j));
        // too short a run for a full turn is not an error, just no period
        match entropy_cycle_stats(&tr) {
            Ok(c) => {
                s.insert("entropy_min".into(), c.s_min);
                s.insert("entropy_max".into(), c.s_max);
                s.insert("period".into(), c.period);
            }
            Err(e) => log::warn!("no cycle statistics: {e}"),
        }
        Ok(out)
    }
}
