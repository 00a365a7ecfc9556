use std::f64::consts::TAU;

use num_complex::Complex64;
use recoherence::oscillator::{
    evolve_reduced, forcing_diagnostic, fringe_visibility, recombination_time, renormalization, write_diagonal_csv,
    GaussianPacket, OscillatorSpec, PositionDensityMatrix, PositionGrid,
};
use recoherence::{BathSpec, CouplingSchedule};

use super::{bath_diagnostics, num, Artifact, Outcome};
use crate::config::RunConfig;
use crate::error::{invalid, numerical, CliError, CliResult};

pub struct Plan {
    bath: BathSpec<f64>,
    spec: OscillatorSpec<f64>,
    schedule: CouplingSchedule<f64>,
    times: Vec<f64>,
    pair: Option<(usize, usize)>,
    write_matrix: bool,
}

impl Plan {
    pub fn new(cfg: &RunConfig) -> CliResult<Self> {
        let c = &cfg.oscillator;
        let bath = cfg.bath.build()?;
        let packets = c
            .packets
            .iter()
            .enumerate()
            .map(|(i, p)| {
                GaussianPacket::new(p.center, p.momentum, p.width, Complex64::new(p.weight[0], p.weight[1]))
                    .map_err(|e| CliError::Validation(format!("oscillator.packets[{i}]: {e}")))
            })
            .collect::<CliResult<Vec<_>>>()?;
        let grid = PositionGrid::new(c.grid.q_min, c.grid.q_max, c.grid.points).map_err(invalid("oscillator.grid"))?;
        let spec = OscillatorSpec::new(c.omega, packets, grid).map_err(invalid("oscillator"))?;
        let schedule = match &cfg.schedule {
            Some(s) => s.build()?,
            None => CouplingSchedule::constant(c.eps, TAU / c.omega).map_err(invalid("oscillator.eps"))?,
        };
        if schedule.has_steps() {
            return Err(CliError::Validation("oscillator: schedule must be step-free".into()));
        }
        if let Some(t) = c.times.iter().find(|t| !(**t >= 0.0 && **t <= schedule.duration())) {
            return Err(CliError::Validation(format!(
                "oscillator.times: {t} outside [0, {}]",
                schedule.duration()
            )));
        }
        let n = spec.packets().len();
        let pair = match c.recombine[..] {
            [] => None,
            [a, b] if a < n && b < n && a != b => Some((a, b)),
            _ => {
                return Err(CliError::Validation(format!(
                    "oscillator.recombine: need two distinct packet indices below {n}"
                )))
            }
        };
        Ok(Self {
            bath,
            spec,
            schedule,
            times: c.times.clone(),
            pair,
            write_matrix: c.write_matrix,
        })
    }

    pub fn run(&self) -> CliResult<Outcome> {
        let mut out = Outcome {
            diagnostics: bath_diagnostics(&self.bath)?,
            ..Outcome::default()
        };
        let eps = self.schedule.max_eps();
        let omega = self.spec.omega();
        let r = renormalization(&self.bath, eps, omega).map_err(numerical("renormalization"))?;
        let s = &mut out.summary;
        s.insert("mass_factor".into(), r.mass_factor);
        s.insert("omega_tilde".into(), r.omega_tilde);
        s.insert("kernel_coeff".into(), r.kernel_coeff);

        let mut times = self.times.clone();
        if let Some((a, b)) = self.pair {
            let p = self.spec.packets();
            let sep = p[a].center - p[b].center;
            s.insert("kernel_separation".into(), r.kernel_coeff * sep * sep);
            let t = recombination_time(&self.spec, &self.bath, &self.schedule, a, b)
                .map_err(numerical("recombination time"))?;
            s.insert("recombination_time".into(), t);
            times.push(t);
            // the same packets with the coupling switched off, as reference
            let bare = CouplingSchedule::constant(0.0, TAU / omega).map_err(numerical("reference schedule"))?;
            let tb = recombination_time(&self.spec, &self.bath, &bare, a, b).map_err(numerical("reference"))?;
            let vb =
                fringe_visibility(&evolve_reduced(&self.spec, &self.bath, &bare, tb).map_err(numerical("reference"))?);
            s.insert("reference_recombination_time".into(), tb);
            s.insert("reference_visibility".into(), vb.value);
        }
        let q2 = self
            .spec
            .packets()
            .iter()
            .map(|p| p.width * p.width + p.center * p.center)
            .fold(0.0, f64::max);
        // advisory only: outside its own validity range the estimate is skipped
        if let Ok(f) = forcing_diagnostic(&self.bath, eps, omega, q2) {
            out.diagnostics.insert("forcing_relative".into(), f.relative);
            out.diagnostics.insert("forcing_bound".into(), f.bound);
        }

        let frames = times
            .iter()
            .map(|t| evolve_reduced(&self.spec, &self.bath, &self.schedule, *t))
            .collect::<recoherence::Result<Vec<PositionDensityMatrix<f64>>>>()
            .map_err(numerical("reduced density matrix"))?;
        let vis: Vec<_> = frames.iter().map(fringe_visibility).collect();
        if let (Some(_), Some(v)) = (self.pair, vis.last()) {
            out.summary.insert("recombined_visibility".into(), v.value);
            out.summary
                .insert("recombined_fringes".into(), f64::from(u8::from(v.fringes)));
        }
        if let Some(v) = vis.first() {
            out.summary.insert("initial_visibility".into(), v.value);
        }
        out.diagnostics.insert(
            "max_hermiticity_defect".into(),
            frames.iter().map(|f| f.hermiticity_defect()).fold(0.0, f64::max),
        );
        out.artifacts.push(Artifact::from_writer("diagonal.csv", |buf| {
            write_diagonal_csv(&frames, buf)
        }));
        out.artifacts.push(Artifact::csv(
            "visibility.csv",
            &["t", "visibility", "fringes", "trace"],
            frames.iter().zip(&vis).map(|(f, v)| {
                vec![
                    num(f.time),
                    num(v.value),
                    u8::from(v.fringes).to_string(),
                    num(f.trace()),
                ]
            }),
        ));
        if self.write_matrix {
            for (i, f) in frames.iter().enumerate() {
                out.artifacts
                    .push(Artifact::from_writer(&format!("matrix_{i:03}.csv"), |buf| {
                        f.write_matrix_csv(buf)
                    }));
            }
        }
        Ok(out)
    }
}
