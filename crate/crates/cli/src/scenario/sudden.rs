use recoherence::bath::spectral_integral;
use recoherence::sudden::{
    apply_sudden_rotation, write_sweep_csv, BranchEvolution, RotationEvent, SuddenSetup, SweepRow,
};
use recoherence::BathSpec;

use super::{bath_diagnostics, Artifact, Outcome};
use crate::config::{bloch, EvolutionChoice, RunConfig};
use crate::error::{invalid, numerical, CliError, CliResult};

pub struct Plan {
    bath: BathSpec<f64>,
    setup: SuddenSetup<f64>,
    event: RotationEvent<f64>,
    t_final: f64,
}

impl Plan {
    pub fn new(cfg: &RunConfig) -> CliResult<Self> {
        let c = &cfg.sudden;
        let bath = cfg.bath.build()?;
        let eps = match c.eps {
            Some(e) => e,
            None => spectral_integral(&bath, 1e-10)
                .and_then(|r| r.eps_for_overlap(c.target_overlap))
                .map_err(invalid("sudden.target_overlap"))?,
        };
        let evolution = match c.evolution {
            EvolutionChoice::Ideal => BranchEvolution::Ideal,
            EvolutionChoice::Dynamic => {
                if !(c.ramp > 0.0 && c.dt > 0.0) {
                    return Err(CliError::Validation("sudden: ramp and dt must be positive".into()));
                }
                BranchEvolution::Dynamic { ramp: c.ramp, dt: c.dt }
            }
        };
        if !(c.t_final > c.t0) {
            return Err(CliError::Validation("sudden.t_final must come after t0".into()));
        }
        let event = RotationEvent::new(c.theta, c.t0).map_err(invalid("sudden"))?;
        Ok(Self {
            setup: SuddenSetup {
                bath: bath.clone(),
                eps,
                rho0: bloch(c.initial, "sudden.initial")?,
                evolution,
            },
            bath,
            event,
            t_final: c.t_final,
        })
    }

    pub fn run(&self) -> CliResult<Outcome> {
        let mut out = Outcome {
            diagnostics: bath_diagnostics(&self.bath)?,
            ..Outcome::default()
        };
        let o = apply_sudden_rotation(&self.setup, &self.event, self.t_final).map_err(numerical("sudden rotation"))?;
        let row = SweepRow {
            theta: self.event.theta,
            rho: o.bloch_final.rho,
            real_loss_factor: o.real_loss_factor,
            formula_discrepancy: o.formula_discrepancy,
        };
        out.artifacts.push(Artifact::from_writer("rotation.csv", |buf| {
            write_sweep_csv(&[row], buf)
        }));
        let s = &mut out.summary;
        s.insert("theta".into(), self.event.theta);
        for (i, r) in o.bloch_final.rho.iter().enumerate() {
            s.insert(format!("rho{}", i + 1), *r);
        }
        s.insert("length".into(), o.bloch_final.length());
        if let Some(f) = o.real_loss_factor {
            s.insert("real_loss_factor".into(), f);
        }
        s.insert("overlap_at_flip".into(), o.j_t0);
        s.insert("overlap_at_flip_pow4".into(), o.j_t0.powi(4));
        s.insert("closed_form_discrepancy".into(), o.formula_discrepancy);
        s.insert("closed_form_flagged".into(), f64::from(u8::from(o.formula_flagged)));
        out.diagnostics.insert("coupling_before_flip".into(), self.setup.eps);
        Ok(out)
    }
}
