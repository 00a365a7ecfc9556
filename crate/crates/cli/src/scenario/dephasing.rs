use recoherence::bath::adiabaticity_metric;
use recoherence::dephasing::{
    run_analytic, run_ode_oracle_with, run_sudden_decouple_with, OdeOptions, SuddenDecoupling,
};
use recoherence::{BathSpec, BlochState, CouplingSchedule, DephasingTrace, Integrator};

use super::{bath_diagnostics, Artifact, Outcome};
use crate::config::{bloch, IntegratorChoice, RunConfig};
use crate::error::{invalid, numerical, CliError, CliResult};

pub struct Plan {
    bath: BathSpec<f64>,
    schedule: CouplingSchedule<f64>,
    rho0: BlochState<f64>,
    analytic: bool,
    oracle: Option<OdeOptions<f64>>,
    decouple: Option<SuddenDecoupling<f64>>,
    sample_dt: f64,
}

fn default_schedule() -> CouplingSchedule<f64> {
    CouplingSchedule::starting_at(0.0)
        .smooth_ramp(15.0, 2.0)
        .hold(10.0)
        .smooth_ramp(15.0, 0.0)
        .build()
        .expect("fixed schedule is valid")
}

impl Plan {
    pub fn new(cfg: &RunConfig) -> CliResult<Self> {
        let c = &cfg.dephasing;
        let bath = cfg.bath.build()?;
        let rho0 = bloch(c.initial, "dephasing.initial")?;
        if !(c.oracle_dt > 0.0) {
            return Err(CliError::Validation("dephasing.oracle_dt must be positive".into()));
        }
        let integrator = match c.integrator {
            IntegratorChoice::Exact => Integrator::Exact,
            IntegratorChoice::Rk4 => Integrator::Rk4,
        };
        let options = OdeOptions::new(c.oracle_dt)
            .sampled_every(cfg.sample_dt)
            .with_integrator(integrator);
        if let Some(d) = &c.decouple {
            if cfg.schedule.is_some() {
                return Err(CliError::Validation(
                    "dephasing.decouple builds its own schedule; drop [schedule]".into(),
                ));
            }
            let mut run = SuddenDecoupling::new(&bath, d.eps_max, d.t_hold, d.t_after);
            run.dt = c.oracle_dt;
            run.sample_dt = cfg.sample_dt;
            match (d.recouple_ramp, d.recouple_hold) {
                (Some(r), Some(h)) => run = run.with_recoupling(r, h),
                (None, None) => {}
                _ => {
                    return Err(CliError::Validation(
                        "dephasing.decouple: give both recouple_ramp and recouple_hold or neither".into(),
                    ))
                }
            }
            let schedule = run.schedule().map_err(invalid("dephasing.decouple"))?;
            return Ok(Self {
                bath,
                schedule,
                rho0,
                analytic: false,
                oracle: None,
                decouple: Some(run),
                sample_dt: cfg.sample_dt,
            });
        }
        let schedule = match &cfg.schedule {
            Some(s) => s.build()?,
            None => default_schedule(),
        };
        if !c.analytic && !c.oracle {
            return Err(CliError::Validation(
                "dephasing: enable at least one of analytic and oracle".into(),
            ));
        }
        if c.analytic && schedule.has_steps() {
            return Err(CliError::Validation(
                "dephasing: the closed form needs a step-free schedule; set analytic = false".into(),
            ));
        }
        Ok(Self {
            bath,
            schedule,
            rho0,
            analytic: c.analytic,
            oracle: c.oracle.then_some(options),
            decouple: None,
            sample_dt: cfg.sample_dt,
        })
    }

    pub fn run(&self) -> CliResult<Outcome> {
        let mut out = Outcome {
            diagnostics: bath_diagnostics(&self.bath)?,
            ..Outcome::default()
        };
        let metric = adiabaticity_metric(&self.bath, &self.schedule).map_err(numerical("adiabaticity metric"))?;
        out.diagnostics.insert("adiabaticity_metric".into(), metric);
        out.diagnostics
            .insert("grid_modes".into(), self.bath.grid().len() as f64);

        if let Some(cfg) = &self.decouple {
            let r = run_sudden_decouple_with(&self.bath, cfg, &self.rho0).map_err(numerical("sudden decoupling"))?;
            out.artifacts.push(trace_artifact("trace.csv", &r.trace));
            let s = &mut out.summary;
            s.insert("step_time".into(), r.step_time);
            s.insert("abs_j_at_step".into(), r.j_at_step);
            s.insert("abs_j_post_min".into(), r.post_min);
            s.insert("abs_j_post_max".into(), r.post_max);
            s.insert("abs_j_final".into(), r.final_abs_j);
            if let Some(m) = r.recoupled_max {
                s.insert("abs_j_recoupled_max".into(), m);
            }
            return Ok(out);
        }

        let analytic = self
            .analytic
            .then(|| run_analytic(&self.bath, &self.schedule, &self.rho0, self.sample_dt))
            .transpose()
            .map_err(numerical("analytic trace"))?;
        let oracle = self
            .oracle
            .as_ref()
            .map(|o| run_ode_oracle_with(&self.bath, &self.schedule, &self.rho0, o))
            .transpose()
            .map_err(numerical("mode-resolved trace"))?;
        if let Some(a) = &analytic {
            out.artifacts.push(trace_artifact("analytic.csv", a));
        }
        if let Some(o) = &oracle {
            out.artifacts.push(trace_artifact("oracle.csv", o));
        }
        let main = oracle.as_ref().or(analytic.as_ref()).expect("at least one trace");
        let last = main.last().expect("non-empty trace");
        let s = &mut out.summary;
        s.insert(
            "final_deviation".into(),
            (last.state.vector() - self.rho0.vector()).norm(),
        );
        s.insert(
            "abs_j_min".into(),
            main.abs_j().into_iter().fold(f64::INFINITY, f64::min),
        );
        s.insert("abs_j_final".into(), last.j.norm());
        s.insert("spectral_to_asymptote".into(), out.diagnostics["spectral_to_asymptote"]);
        if let (Some(a), Some(o)) = (&analytic, &oracle) {
            let gap = a
                .samples
                .iter()
                .zip(&o.samples)
                .map(|(x, y)| (x.j - y.j).norm())
                .fold(0.0, f64::max);
            s.insert("max_abs_j_gap".into(), gap);
        }
        Ok(out)
    }
}

fn trace_artifact(name: &str, t: &DephasingTrace<f64>) -> Artifact {
    Artifact::from_writer(name, |buf| t.write_csv(buf))
}
