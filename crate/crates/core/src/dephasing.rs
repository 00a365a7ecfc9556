//! Pure dephasing of a spin coupled through σ₃ to the bath.
//!
//! σ₃ commutes with the Hamiltonian, so ρ₃ is conserved and the transverse
//! part is multiplied by the overlap `J = ⟨ψ₊|ψ₋⟩` of the two field branches.

use std::io::{self, Write};

use num_complex::Complex;

use crate::bath::{
    default_tolerance, segment_adiabaticity, spectral_integral, BathSpec, CouplingSchedule, SpectralReport,
};
use crate::bloch::{entropy_of_length, BlochState};
use crate::coherent::Branch;
use crate::error::{Error, Result};
use crate::forced::{propagate, BranchState, ForcedModes, Integrator};
use crate::num::{from_usize, lit, to_f64, Real};

/// One row of a trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSample<T> {
    pub t: T,
    pub state: BlochState<T>,
    pub j: Complex<T>,
    pub adiabaticity: T,
    pub entropy: T,
    /// Accumulated tunneling angle, present for spin-boson runs.
    pub theta_r: Option<T>,
}

/// Time series of spin states with their branch overlap.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DephasingTrace<T> {
    pub samples: Vec<TraceSample<T>>,
}

impl<T: Real> DephasingTrace<T> {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn last(&self) -> Option<&TraceSample<T>> {
        self.samples.last()
    }

    pub fn times(&self) -> Vec<T> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn abs_j(&self) -> Vec<T> {
        self.samples.iter().map(|s| s.j.norm()).collect()
    }

    /// Sample closest to `t`.
    pub fn nearest(&self, t: T) -> Option<&TraceSample<T>> {
        self.samples.iter().min_by(|a, b| {
            (a.t - t)
                .abs()
                .partial_cmp(&(b.t - t).abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    }

    /// CSV with header
    /// `t,rho1,rho2,rho3,reJ,imJ,absJ,entropy,adiabaticity[,theta_R]`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let with_theta = self.samples.iter().any(|s| s.theta_r.is_some());
        write!(w, "t,rho1,rho2,rho3,reJ,imJ,absJ,entropy,adiabaticity")?;
        if with_theta {
            write!(w, ",theta_R")?;
        }
        writeln!(w)?;
        for s in &self.samples {
            let [r1, r2, r3] = s.state.rho;
            write!(
                w,
                "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
                to_f64(s.t),
                to_f64(r1),
                to_f64(r2),
                to_f64(r3),
                to_f64(s.j.re),
                to_f64(s.j.im),
                to_f64(s.j.norm()),
                to_f64(s.entropy),
                to_f64(s.adiabaticity)
            )?;
            if with_theta {
                write!(w, ",{:e}", to_f64(s.theta_r.unwrap_or_else(T::nan)))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Sample instants `0, dt, 2dt, …` closed by `total`.
pub fn sample_times<T: Real>(total: T, dt: T) -> Result<Vec<T>> {
    if !(dt > T::zero()) || !dt.is_finite() {
        return Err(Error::InvalidParameter("sample interval must be positive".into()));
    }
    let n = (total / dt - lit(1e-9)).ceil().to_usize().unwrap_or(0);
    let mut out: Vec<T> = (0..n).map(|i| from_usize::<T>(i) * dt).collect();
    out.push(total);
    Ok(out)
}

/// Builds a trace row from the initial state and the overlap at time `t`.
pub fn dephased<T: Real>(rho0: &BlochState<T>, t: T, j: Complex<T>, adiabaticity: T) -> Result<TraceSample<T>> {
    let perp = rho0.transverse_coherence() * j;
    let state = BlochState::new([perp.re, perp.im, rho0.rho[2]], t)?;
    Ok(TraceSample {
        t,
        state,
        j,
        adiabaticity,
        entropy: entropy_of_length(state.length()),
        theta_r: None,
    })
}

fn local_metric<T: Real>(report: &SpectralReport<T>, bath: &BathSpec<T>, s: &CouplingSchedule<T>, t: T) -> T {
    s.segment_index(t)
        .map(|i| segment_adiabaticity(&s.segments()[i], report.phi2, bath.mass()))
        .unwrap_or_else(|_| T::nan())
}

/// Adiabatic closed form: `J(t) = exp(-c ε(t)² D)`.
pub fn run_analytic<T: Real>(
    bath: &BathSpec<T>,
    s: &CouplingSchedule<T>,
    rho0: &BlochState<T>,
    sample_dt: T,
) -> Result<DephasingTrace<T>> {
    if s.has_steps() {
        return Err(Error::Schedule(
            "closed form needs a step-free schedule; use the sudden-decoupling run".into(),
        ));
    }
    let report = spectral_integral(bath, default_tolerance())?;
    let mut samples = Vec::new();
    for t in sample_times(s.duration(), sample_dt)? {
        let eps = s.eval(t)?.eps;
        let j = Complex::new(report.overlap(eps), T::zero());
        samples.push(dephased(rho0, t, j, local_metric(&report, bath, s, t))?);
    }
    Ok(DephasingTrace { samples })
}

/// Step and sampling choices for the mode-resolved run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions<T> {
    pub dt: T,
    pub sample_dt: T,
    pub integrator: Integrator,
}

impl<T: Real> OdeOptions<T> {
    pub fn new(dt: T) -> Self {
        Self {
            dt,
            sample_dt: dt,
            integrator: Integrator::Exact,
        }
    }

    pub fn sampled_every(mut self, sample_dt: T) -> Self {
        self.sample_dt = sample_dt;
        self
    }

    pub fn with_integrator(mut self, integrator: Integrator) -> Self {
        self.integrator = integrator;
        self
    }
}

/// Mode-resolved evolution of both field branches; valid for any schedule.
///
/// Only the `+` branch is integrated: the `−` branch is its exact mirror
/// image (same phase, negated amplitudes).
pub fn run_ode_oracle<T: Real>(
    bath: &BathSpec<T>,
    s: &CouplingSchedule<T>,
    rho0: &BlochState<T>,
    dt: T,
) -> Result<DephasingTrace<T>> {
    run_ode_oracle_with(bath, s, rho0, &OdeOptions::new(dt))
}

pub fn run_ode_oracle_with<T: Real>(
    bath: &BathSpec<T>,
    s: &CouplingSchedule<T>,
    rho0: &BlochState<T>,
    opts: &OdeOptions<T>,
) -> Result<DephasingTrace<T>> {
    let mut times = sample_times(s.duration(), opts.sample_dt)?;
    for seg in s.segments().iter().filter(|g| g.is_step()) {
        times.push(seg.start);
    }
    times.sort_by(|a, b| a.partial_cmp(b).expect("finite sample times"));
    times.dedup_by(|a, b| (*a - *b).abs() <= lit::<T>(1e-12) * (T::one() + b.abs()));
    run_oracle_at(bath, s, rho0, opts, &times)
}

fn run_oracle_at<T: Real>(
    bath: &BathSpec<T>,
    s: &CouplingSchedule<T>,
    rho0: &BlochState<T>,
    opts: &OdeOptions<T>,
    times: &[T],
) -> Result<DephasingTrace<T>> {
    let report = spectral_integral(bath, default_tolerance())?;
    let modes = ForcedModes::new(bath);
    let eps0 = s.initial_eps();
    if eps0 > T::zero() {
        log::warn!(
            "schedule starts at ε = {}; field starts in the dressed vacuum",
            to_f64(eps0)
        );
    }
    let mut states = vec![BranchState {
        branch: Branch::Plus,
        gamma: modes.adiabatic(eps0, Branch::Plus),
        phase: T::zero(),
    }];
    let mut samples = Vec::with_capacity(times.len());
    propagate(&modes, s, opts.dt, opts.integrator, &mut states, times, |_, t, st| {
        let plus = &st[0];
        let minus = BranchState {
            branch: Branch::Minus,
            gamma: plus.gamma.iter().map(|g| -*g).collect(),
            phase: plus.phase,
        };
        let j = modes.overlap(plus, &minus)?.j();
        samples.push(dephased(rho0, t, j, local_metric(&report, bath, s, t))?);
        Ok(())
    })?;
    Ok(DephasingTrace { samples })
}

/// Protocol of a sudden-decoupling run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuddenDecoupling<T> {
    pub eps_max: T,
    /// Duration of the smooth switch-on.
    pub ramp: T,
    pub t_hold: T,
    /// Free evolution after the coupling is switched off.
    pub t_after: T,
    pub recouple: Option<Recoupling<T>>,
    pub dt: T,
    pub sample_dt: T,
}

/// Attempt to undo the loss by switching the coupling back on and off slowly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Recoupling<T> {
    pub ramp: T,
    pub hold: T,
}

impl<T: Real> SuddenDecoupling<T> {
    /// Defaults scaled to the bath: ramps of `40/m`, steps of `0.01/m`.
    pub fn new(bath: &BathSpec<T>, eps_max: T, t_hold: T, t_after: T) -> Self {
        let m = bath.mass();
        Self {
            eps_max,
            ramp: lit::<T>(40.0) / m,
            t_hold,
            t_after,
            recouple: None,
            dt: lit::<T>(0.01) / m,
            sample_dt: lit::<T>(0.1) / m,
        }
    }

    pub fn with_recoupling(mut self, ramp: T, hold: T) -> Self {
        self.recouple = Some(Recoupling { ramp, hold });
        self
    }

    pub fn step_time(&self) -> T {
        self.ramp + self.t_hold
    }

    pub fn schedule(&self) -> Result<CouplingSchedule<T>> {
        if !(self.t_after > T::zero()) {
            return Err(Error::InvalidParameter(
                "free evolution after the step must be positive".into(),
            ));
        }
        if !(self.eps_max > T::zero()) {
            // nothing to switch off: plain zero coupling over the same window
            return CouplingSchedule::constant(T::zero(), self.step_time() + self.t_after + self.recouple_time());
        }
        let mut b = CouplingSchedule::starting_at(T::zero())
            .smooth_ramp(self.ramp, self.eps_max)
            .hold(self.t_hold)
            .step(T::zero())
            .hold(self.t_after);
        if let Some(r) = self.recouple {
            b = b
                .smooth_ramp(r.ramp, self.eps_max)
                .hold(r.hold)
                .smooth_ramp(r.ramp, T::zero());
        }
        b.build()
    }

    fn recouple_time(&self) -> T {
        self.recouple.map(|r| r.ramp + r.ramp + r.hold).unwrap_or_else(T::zero)
    }
}

/// Trace of a sudden-decoupling run with post-step statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct SuddenDecouplingReport<T> {
    pub trace: DephasingTrace<T>,
    pub step_time: T,
    pub j_at_step: T,
    /// min/max |J| over the free window after the step.
    pub post_min: T,
    pub post_max: T,
    /// Largest |J| reached while re-coupled and after switching off again.
    pub recoupled_max: Option<T>,
    pub final_abs_j: T,
}

/// Ramp up, hold, switch off instantly, then evolve freely.
pub fn run_sudden_decouple<T: Real>(
    bath: &BathSpec<T>,
    eps_max: T,
    t_hold: T,
    t_after: T,
    rho0: &BlochState<T>,
) -> Result<SuddenDecouplingReport<T>> {
    run_sudden_decouple_with(bath, &SuddenDecoupling::new(bath, eps_max, t_hold, t_after), rho0)
}

pub fn run_sudden_decouple_with<T: Real>(
    bath: &BathSpec<T>,
    cfg: &SuddenDecoupling<T>,
    rho0: &BlochState<T>,
) -> Result<SuddenDecouplingReport<T>> {
    let s = cfg.schedule()?;
    let opts = OdeOptions::new(cfg.dt).sampled_every(cfg.sample_dt);
    let trace = run_ode_oracle_with(bath, &s, rho0, &opts)?;
    let t0 = cfg.step_time();
    let t1 = t0 + cfg.t_after;
    let tiny = lit::<T>(1e-9) * (T::one() + t1);
    let j_at_step = trace
        .nearest(t0)
        .map(|x| x.j.norm())
        .ok_or_else(|| Error::Domain("empty trace".into()))?;
    let window = trace
        .samples
        .iter()
        .filter(|x| x.t >= t0 - tiny && x.t <= t1 + tiny)
        .map(|x| x.j.norm());
    let (post_min, post_max) = window.fold((T::infinity(), T::neg_infinity()), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let recoupled_max = cfg.recouple.map(|_| {
        trace
            .samples
            .iter()
            .filter(|x| x.t > t1 + tiny)
            .map(|x| x.j.norm())
            .fold(T::zero(), T::max)
    });
    let final_abs_j = trace.last().map(|x| x.j.norm()).unwrap_or_else(T::one);
    Ok(SuddenDecouplingReport {
        trace,
        step_time: t0,
        j_at_step,
        post_min,
        post_max,
        recoupled_max,
        final_abs_j,
    })
}
