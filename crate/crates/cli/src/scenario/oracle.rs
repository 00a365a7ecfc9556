use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use recoherence::bath::{ModeGrid, SegmentShape, DECOHERENCE_NORMALIZATION};
use recoherence::dephasing::{run_ode_oracle_with, OdeOptions};
use recoherence::fock::{
    calibrate_normalization, coherent_product, evolve, inner_product, surrogate_modes, OracleConfig, OracleTrace,
};
use recoherence::spin_boson::zero_crossings;
use recoherence::{pairwise_log_overlap, BathSpec, BlochState, Branch, BranchAmplitudes, CouplingSchedule};

use super::{bath_diagnostics, num, Artifact, Outcome};
use crate::config::{bloch, CalibrationConfig, OracleTask, RunConfig};
use crate::error::{invalid, numerical, CliError, CliResult};

pub enum Plan {
    Evolve {
        task: OracleTask,
        bath: BathSpec<f64>,
        cfg: Box<OracleConfig<f64>>,
        rho0: BlochState<f64>,
        sample_dt: f64,
        /// Bath restricted to the oracle's modes, for the mode-equation match.
        matched: Option<BathSpec<f64>>,
        recurrence_time: Option<f64>,
    },
    Calibrate(CalibrationConfig),
    Overlaps {
        pairs: usize,
        max_modes: usize,
        fock_dim: usize,
        seed: u64,
    },
}

fn default_schedule() -> CouplingSchedule<f64> {
    CouplingSchedule::starting_at(0.0)
        .smooth_ramp(10.0, 1.0)
        .hold(5.0)
        .smooth_ramp(10.0, 0.0)
        .build()
        .expect("fixed schedule is valid")
}

impl Plan {
    pub fn new(run: &RunConfig) -> CliResult<Self> {
        let c = &run.oracle;
        match c.task {
            OracleTask::Calibrate => {
                let k = &c.calibration;
                if !(k.mode_freq > 0.0 && k.coupling > 0.0 && k.eps > 0.0) || !(2..=32).contains(&k.fock_dim) {
                    return Err(CliError::Validation(
                        "oracle.calibration: frequency, coupling and eps must be positive, fock_dim in 2..=32".into(),
                    ));
                }
                return Ok(Plan::Calibrate(k.clone()));
            }
            OracleTask::Overlaps => {
                if c.pairs == 0 || !(1..=4).contains(&c.max_modes) || !(2..=64).contains(&c.fock_dim) {
                    return Err(CliError::Validation(
                        "oracle: overlaps need pairs > 0, max_modes in 1..=4, fock_dim in 2..=64".into(),
                    ));
                }
                return Ok(Plan::Overlaps {
                    pairs: c.pairs,
                    max_modes: c.max_modes,
                    fock_dim: c.fock_dim,
                    seed: run.seed,
                });
            }
            _ => {}
        }
        let bath = run.bath.build()?;
        let mut matched = None;
        let mut recurrence_time = None;
        let (freqs, couplings) = match (&c.freqs, &c.couplings, &c.momenta, c.surrogate) {
            (Some(f), Some(h), None, None) => {
                if f.len() != h.len() {
                    return Err(CliError::Validation(
                        "oracle: freqs and couplings differ in length".into(),
                    ));
                }
                (f.clone(), h.clone())
            }
            (None, None, Some(k), None) => {
                let w = c.weights.clone().unwrap_or_else(|| vec![1.0; k.len()]);
                let grid = ModeGrid::from_nodes(k.clone(), w.clone()).map_err(invalid("oracle.momenta"))?;
                let b = BathSpec::with_modes(bath.mass(), bath.cutoff(), grid).map_err(invalid("oracle.momenta"))?;
                let f = k.iter().map(|k| b.omega(*k)).collect();
                let h = k.iter().zip(&w).map(|(k, w)| b.coupling(*k) * w.sqrt()).collect();
                matched = Some(b);
                (f, h)
            }
            (None, None, None, n) => {
                let m = surrogate_modes(&bath, n.unwrap_or(3), run.seed).map_err(invalid("oracle.surrogate"))?;
                recurrence_time = Some(m.recurrence_time);
                (m.freqs, m.couplings)
            }
            _ => {
                return Err(CliError::Validation(
                    "oracle: give one of freqs+couplings, momenta or surrogate".into(),
                ))
            }
        };
        if c.task == OracleTask::OdeMatch && matched.is_none() {
            return Err(CliError::Validation("oracle: ode-match needs explicit momenta".into()));
        }
        let schedule = match &run.schedule {
            Some(s) => s.build()?,
            None => default_schedule(),
        };
        let w_max = freqs.iter().copied().fold(0.0, f64::max);
        let cfg = OracleConfig {
            fock_dim: c.fock_dim,
            dt: c.dt.unwrap_or(0.02 / w_max),
            mode_freqs: freqs,
            mode_couplings: couplings,
            schedule,
            omega: c.omega,
        };
        cfg.validate().map_err(invalid("oracle"))?;
        if c.task == OracleTask::Renormalization {
            let last = cfg.schedule.segments().last().expect("non-empty schedule");
            if !(c.omega > 0.0) || last.shape != SegmentShape::Plateau {
                return Err(CliError::Validation(
                    "oracle: renormalization needs omega > 0 and a schedule ending on a hold".into(),
                ));
            }
        }
        Ok(Plan::Evolve {
            task: c.task,
            bath,
            cfg: Box::new(cfg),
            rho0: bloch(c.initial, "oracle.initial")?,
            sample_dt: run.sample_dt,
            matched,
            recurrence_time,
        })
    }

    pub fn run(&self) -> CliResult<Outcome> {
        match self {
            Plan::Calibrate(k) => calibrate(k),
            Plan::Overlaps {
                pairs,
                max_modes,
                fock_dim,
                seed,
            } => overlaps(*pairs, *max_modes, *fock_dim, *seed),
            Plan::Evolve {
                task,
                bath,
                cfg,
                rho0,
                sample_dt,
                matched,
                recurrence_time,
            } => {
                let mut out = Outcome {
                    diagnostics: bath_diagnostics(bath)?,
                    ..Outcome::default()
                };
                if let Some(t) = recurrence_time {
                    out.diagnostics.insert("recurrence_time".into(), *t);
                }
                out.diagnostics
                    .insert("field_dimension".into(), cfg.field_dimension() as f64);
                out.diagnostics.insert("dt".into(), cfg.dt);
                let tr = evolve(cfg, rho0, *sample_dt).map_err(numerical("Fock evolution"))?;
                record_health(&mut out, &tr);
                out.artifacts.push(trace_artifact("fock.csv", &tr));
                let last = tr.samples.last().expect("non-empty trace");
                let s = &mut out.summary;
                s.insert("final_deviation".into(), (last.vector() - rho0.vector()).norm());
                s.insert(
                    "transverse_min".into(),
                    tr.samples
                        .iter()
                        .map(|x| x.transverse_length())
                        .fold(f64::INFINITY, f64::min),
                );
                s.insert(
                    "predicted_overlap_peak".into(),
                    cfg.dressed_overlap(cfg.schedule.max_eps()),
                );
                match task {
                    OracleTask::OdeMatch => {
                        let b = matched.as_ref().expect("validated");
                        ode_match(&mut out, b, cfg, rho0, *sample_dt, &tr)?
                    }
                    OracleTask::Renormalization => renormalization(&mut out, cfg, *sample_dt, &tr)?,
                    _ => {}
                }
                Ok(out)
            }
        }
    }
}

fn record_health(out: &mut Outcome, tr: &OracleTrace<f64>) {
    let d = &mut out.diagnostics;
    let leak = d.entry("max_leakage".into()).or_insert(0.0);
    *leak = leak.max(tr.max_leakage);
    let drift = d.entry("max_norm_drift".into()).or_insert(0.0);
    *drift = drift.max(tr.max_norm_drift);
}

fn trace_artifact(name: &str, tr: &OracleTrace<f64>) -> Artifact {
    Artifact::csv(
        name,
        &["t", "rho1", "rho2", "rho3", "transverse"],
        tr.samples.iter().map(|x| {
            vec![
                num(x.time),
                num(x.rho[0]),
                num(x.rho[1]),
                num(x.rho[2]),
                num(x.transverse_length()),
            ]
        }),
    )
}

fn ode_match(
    out: &mut Outcome,
    bath: &BathSpec<f64>,
    cfg: &OracleConfig<f64>,
    rho0: &BlochState<f64>,
    sample_dt: f64,
    fock: &OracleTrace<f64>,
) -> CliResult<()> {
    let opts = OdeOptions::new(cfg.dt).sampled_every(sample_dt);
    let ode = run_ode_oracle_with(bath, &cfg.schedule, rho0, &opts).map_err(numerical("mode equations"))?;
    out.artifacts
        .push(Artifact::from_writer("ode.csv", |buf| ode.write_csv(buf)));
    let mut worst: f64 = 0.0;
    for f in &fock.samples {
        let o = ode.nearest(f.time).expect("non-empty trace");
        if (o.t - f.time).abs() > 1e-9 * (1.0 + f.time) {
            return Err(CliError::Numerical(format!(
                "sample grids disagree near t = {}",
                f.time
            )));
        }
        worst = worst.max((f.transverse_coherence() - o.state.transverse_coherence()).norm());
    }
    out.summary.insert("max_transverse_gap".into(), worst);
    Ok(())
}

/// Dressed overlap from a tunneling-free transverse run, then the `ρ₃`
/// oscillation frequency on the final plateau of the configured run.
fn renormalization(out: &mut Outcome, cfg: &OracleConfig<f64>, sample_dt: f64, tr: &OracleTrace<f64>) -> CliResult<()> {
    let frozen = OracleConfig {
        omega: 0.0,
        ..cfg.clone()
    };
    let dressing = evolve(&frozen, &BlochState::transverse(), sample_dt).map_err(numerical("dressing run"))?;
    record_health(out, &dressing);
    let j = dressing.samples.last().expect("non-empty trace").transverse_length();
    let plateau = cfg.schedule.segments().last().expect("non-empty schedule").start;
    let (t, r3): (Vec<f64>, Vec<f64>) = tr
        .samples
        .iter()
        .filter(|x| x.time >= plateau)
        .map(|x| (x.time, x.rho[2]))
        .unzip();
    let c = zero_crossings(&t, &r3);
    if c.len() < 3 {
        return Err(CliError::Numerical(format!(
            "only {} zero crossings of rho3 on the plateau; lengthen the hold",
            c.len()
        )));
    }
    let n = c.len() - 1;
    let freq = std::f64::consts::PI * n as f64 / (c[n] - c[0]);
    let s = &mut out.summary;
    s.insert("overlap_measured".into(), j);
    s.insert("rho3_frequency".into(), freq);
    s.insert("renormalized_splitting".into(), cfg.omega * j);
    s.insert("relative_error".into(), (freq / (cfg.omega * j) - 1.0).abs());
    s.insert("period".into(), TAU / freq);
    Ok(())
}

fn calibrate(k: &CalibrationConfig) -> CliResult<Outcome> {
    let c = calibrate_normalization(k.mode_freq, k.coupling, k.eps, k.fock_dim).map_err(numerical("calibration"))?;
    let residual = (c.c - DECOHERENCE_NORMALIZATION).abs();
    println!(
        "calibrated c = {:.8} (built-in {DECOHERENCE_NORMALIZATION}), residual {residual:.3e}",
        c.c
    );
    let mut out = Outcome::default();
    out.summary.insert("calibrated_c".into(), c.c);
    out.summary.insert("calibration_residual".into(), residual);
    out.summary.insert("transverse".into(), c.transverse);
    out.summary.insert("predicted_exponent".into(), c.predicted_exponent);
    out.diagnostics.insert("max_leakage".into(), c.max_leakage);
    out.artifacts.push(Artifact::csv(
        "calibration.csv",
        &[
            "mode_freq",
            "coupling",
            "eps",
            "fock_dim",
            "transverse",
            "c",
            "residual",
        ],
        [vec![
            num(k.mode_freq),
            num(k.coupling),
            num(k.eps),
            k.fock_dim.to_string(),
            num(c.transverse),
            num(c.c),
            num(residual),
        ]],
    ));
    Ok(out)
}

/// Seeded random coherent pairs with `|α| ≤ 1` on up to `max_modes` modes.
fn overlaps(pairs: usize, max_modes: usize, fock_dim: usize, seed: u64) -> CliResult<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(pairs);
    let mut worst: f64 = 0.0;
    for i in 0..pairs {
        let n = rng.gen_range(1..=max_modes);
        let mut draw = || Complex64::from_polar(rng.gen_range(0.0..=1.0), rng.gen_range(0.0..TAU));
        let a: Vec<Complex64> = (0..n).map(|_| draw()).collect();
        let b: Vec<Complex64> = (0..n).map(|_| draw()).collect();
        let grid = ModeGrid::from_nodes((0..n).map(|k| k as f64).collect(), vec![1.0; n]).map_err(numerical("grid"))?;
        let x = BranchAmplitudes::new(a.clone(), grid.id(), Branch::Plus).map_err(numerical("amplitudes"))?;
        let y = BranchAmplitudes::new(b.clone(), grid.id(), Branch::Minus).map_err(numerical("amplitudes"))?;
        let closed = pairwise_log_overlap(&x, &y, grid.weights())
            .map_err(numerical("overlap"))?
            .j();
        let fock = inner_product(&coherent_product(&a, fock_dim), &coherent_product(&b, fock_dim));
        let diff = (closed - fock).norm();
        worst = worst.max(diff);
        rows.push(vec![
            i.to_string(),
            n.to_string(),
            num(closed.re),
            num(closed.im),
            num(fock.re),
            num(fock.im),
            num(diff),
        ]);
    }
    let mut out = Outcome::default();
    out.summary.insert("max_overlap_gap".into(), worst);
    out.artifacts.push(Artifact::csv(
        "overlaps.csv",
        &[
            "pair",
            "modes",
            "closed_re",
            "closed_im",
            "fock_re",
            "fock_im",
            "abs_diff",
        ],
        rows,
    ));
    Ok(out)
}
