//! Tunneling spin `½Ωσ₁` dressed by the bath through σ₃.
//!
//! To lowest order in Ω the dressed ground doublet is split by `ΩJ(t)`, so the
//! spin rotates as a free spin with frequency `ΩJ` while its transverse
//! components stay multiplied by `J`.

use num_complex::Complex;

use crate::bath::{
    default_tolerance, segment_adiabaticity, spectral_integral, BathSpec, CouplingSchedule, SpectralReport,
};
use crate::bloch::{entropy_of_length, BlochState};
use crate::dephasing::{sample_times, DephasingTrace, TraceSample};
use crate::error::{Error, Result};
use crate::num::{lit, to_f64, Real};

/// Largest Ω/m accepted; above `OMEGA_RATIO_WARN` a warning is logged.
pub const OMEGA_RATIO_MAX: f64 = 0.2;
pub const OMEGA_RATIO_WARN: f64 = 0.05;

/// Tunneling spin on a bath, driven by a coupling schedule.
#[derive(Debug, Clone)]
pub struct SpinBosonSpec<T> {
    pub omega: T,
    pub bath: BathSpec<T>,
    pub schedule: CouplingSchedule<T>,
    pub c_plus: Complex<T>,
    pub c_minus: Complex<T>,
    report: SpectralReport<T>,
}

impl<T: Real> SpinBosonSpec<T> {
    pub fn new(
        omega: T,
        bath: BathSpec<T>,
        schedule: CouplingSchedule<T>,
        c_plus: Complex<T>,
        c_minus: Complex<T>,
    ) -> Result<Self> {
        if !(omega > T::zero()) || !omega.is_finite() {
            return Err(Error::InvalidParameter("tunneling frequency must be positive".into()));
        }
        let ratio = omega / bath.mass();
        if ratio > lit(OMEGA_RATIO_MAX) {
            return Err(Error::InvalidParameter(format!(
                "Ω/m = {} exceeds {OMEGA_RATIO_MAX}; the dressed-doublet picture does not apply",
                to_f64(ratio)
            )));
        }
        if ratio > lit(OMEGA_RATIO_WARN) {
            log::warn!(
                "Ω/m = {} is above {OMEGA_RATIO_WARN}; corrections of order Ω/m may be visible",
                to_f64(ratio)
            );
        }
        let norm = c_plus.norm_sqr() + c_minus.norm_sqr();
        if (norm - T::one()).abs() > lit(1e-12) {
            return Err(Error::InvalidParameter(format!(
                "|c₊|² + |c₋|² = {} instead of 1",
                to_f64(norm)
            )));
        }
        let report = spectral_integral(&bath, default_tolerance())?;
        Ok(Self {
            omega,
            bath,
            schedule,
            c_plus,
            c_minus,
            report,
        })
    }

    /// Starts from the bare spin state `rho0`; its amplitudes are only
    /// needed through the Bloch vector.
    pub fn from_bloch(
        omega: T,
        bath: BathSpec<T>,
        schedule: CouplingSchedule<T>,
        rho0: &BlochState<T>,
    ) -> Result<Self> {
        let (cp, cm) = rho0.pure_amplitudes()?;
        Self::new(omega, bath, schedule, cp, cm)
    }

    pub fn report(&self) -> &SpectralReport<T> {
        &self.report
    }

    pub fn initial_state(&self) -> Result<BlochState<T>> {
        BlochState::from_amplitudes(self.c_plus, self.c_minus)
    }

    /// Dressed overlap `J(t)`.
    pub fn overlap(&self, t: T) -> Result<T> {
        Ok(self.report.overlap(self.schedule.eval(t)?.eps))
    }
}

/// Half the dressed splitting, `½ΩJ(t)`.
pub fn renormalized_splitting<T: Real>(spec: &SpinBosonSpec<T>, t: T) -> Result<T> {
    Ok(lit::<T>(0.5) * spec.omega * spec.overlap(t)?)
}

/// Bloch components of the free spin after rotating by `theta` about axis 1.
pub fn free_rotation<T: Real>(rho0: &[T; 3], theta: T) -> [T; 3] {
    let (s, c) = theta.sin_cos();
    [rho0[0], rho0[1] * c + rho0[2] * s, rho0[2] * c - rho0[1] * s]
}

/// Adiabatic evolution sampled every `sample_dt`.
pub fn run_adiabatic<T: Real>(spec: &SpinBosonSpec<T>, sample_dt: T) -> Result<DephasingTrace<T>> {
    let s = &spec.schedule;
    if s.has_steps() {
        return Err(Error::Schedule("adiabatic evolution needs a step-free schedule".into()));
    }
    let times = sample_times(s.duration(), sample_dt)?;
    let js: Vec<T> = times.iter().map(|t| spec.overlap(*t)).collect::<Result<_>>()?;
    let jmax = js.iter().fold(T::zero(), |m, j| m.max(*j));
    if spec.omega * jmax * sample_dt > lit::<T>(0.1) * (T::one() + lit::<T>(1e-9)) {
        return Err(Error::InvalidParameter(format!(
            "Ω·J·sample_dt = {} must not exceed 0.1",
            to_f64(spec.omega * jmax * sample_dt)
        )));
    }
    let rho0 = spec.initial_state()?;
    let half = lit::<T>(0.5);
    let mut theta = T::zero();
    let mut samples = Vec::with_capacity(times.len());
    for i in 0..times.len() {
        if i > 0 {
            theta = theta + half * spec.omega * (js[i] + js[i - 1]) * (times[i] - times[i - 1]);
        }
        let j = js[i];
        let free = free_rotation(&rho0.rho, theta);
        let state = BlochState::new([j * free[0], j * free[1], free[2]], times[i])?;
        let seg = s.segment_index(times[i])?;
        samples.push(TraceSample {
            t: times[i],
            state,
            j: Complex::new(j, T::zero()),
            adiabaticity: segment_adiabaticity(&s.segments()[seg], spec.report.phi2, spec.bath.mass()),
            entropy: entropy_of_length(state.length()),
            theta_r: Some(theta),
        });
    }
    Ok(DephasingTrace { samples })
}

/// Entropy extremes and rotation period of a trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleStats<T> {
    pub s_min: T,
    pub s_max: T,
    pub period: T,
}

/// Crossing times of zero by `values`, linearly interpolated.
pub fn zero_crossings<T: Real>(times: &[T], values: &[T]) -> Vec<T> {
    let mut out = Vec::new();
    for i in 1..values.len().min(times.len()) {
        let (a, b) = (values[i - 1], values[i]);
        if (a < T::zero() && b >= T::zero()) || (a > T::zero() && b <= T::zero()) {
            let f = a / (a - b);
            out.push(times[i - 1] + f * (times[i] - times[i - 1]));
        }
    }
    out
}

/// Entropy range and the rotation period, measured from the zero crossings
/// of whichever of ρ₂, ρ₃ swings wider.
pub fn entropy_cycle_stats<T: Real>(trace: &DephasingTrace<T>) -> Result<CycleStats<T>> {
    if trace.samples.len() < 3 {
        return Err(Error::Domain("trace too short for cycle statistics".into()));
    }
    let (s_min, s_max) = trace
        .samples
        .iter()
        .fold((T::infinity(), T::neg_infinity()), |(lo, hi), x| {
            (lo.min(x.entropy), hi.max(x.entropy))
        });
    let times = trace.times();
    let r2: Vec<T> = trace.samples.iter().map(|x| x.state.rho[1]).collect();
    let r3: Vec<T> = trace.samples.iter().map(|x| x.state.rho[2]).collect();
    let swing = |v: &[T]| {
        let (lo, hi) = v.iter().fold((T::infinity(), T::neg_infinity()), |(lo, hi), x| {
            (lo.min(*x), hi.max(*x))
        });
        hi - lo
    };
    let component = if swing(&r3) >= swing(&r2) { &r3 } else { &r2 };
    // both components circle the origin of the 2-3 plane
    let crossings = zero_crossings(&times, component);
    if crossings.len() < 3 {
        return Err(Error::Domain(format!(
            "trace too short: {} zero crossings, need a full rotation period",
            crossings.len()
        )));
    }
    let n = crossings.len() - 1;
    let period = lit::<T>(2.0) * (crossings[n] - crossings[0]) / T::from_usize(n).unwrap();
    Ok(CycleStats { s_min, s_max, period })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch::entropy_of_length;

    fn spec(eps: f64, total: f64, rho0: BlochState<f64>) -> SpinBosonSpec<f64> {
        let bath = BathSpec::<f64>::new(10.0, 0.01).unwrap();
        let s = CouplingSchedule::<f64>::constant(eps, total).unwrap();
        SpinBosonSpec::from_bloch(0.5, bath, s, &rho0).unwrap()
    }

    #[test]
    fn bare_splitting_is_half_omega() {
        let sp = spec(0.0, 10.0, BlochState::up());
        assert_eq!(renormalized_splitting(&sp, 3.0).unwrap(), 0.25);
    }

    #[test]
    fn splitting_for_j_tenth() {
        let bath = BathSpec::<f64>::new(10.0, 0.01).unwrap();
        let eps = spectral_integral(&bath, 1e-10).unwrap().eps_for_overlap(0.1).unwrap();
        let sp = spec(eps, 10.0, BlochState::up());
        assert!((renormalized_splitting(&sp, 1.0).unwrap() - 0.5 / 20.0).abs() < 1e-12);
    }

    #[test]
    fn free_rabi_rotation() {
        let sp = spec(0.0, 20.0, BlochState::up());
        let tr = run_adiabatic(&sp, 0.05).unwrap();
        for x in &tr.samples {
            let th = 0.5 * x.t;
            assert!((x.state.rho[2] - th.cos()).abs() < 1e-10);
            assert!((x.state.rho[1] - th.sin()).abs() < 1e-10);
        }
        let st = entropy_cycle_stats(&tr).unwrap();
        assert!(st.s_max < 1e-12);
        assert!((st.period - 4.0 * std::f64::consts::PI).abs() < 1e-2);
    }

    #[test]
    fn quarter_turn_leaves_transverse_j() {
        let rot = free_rotation(&[0.0, 0.0, 1.0], std::f64::consts::FRAC_PI_2);
        assert!((rot[1] - 1.0).abs() < 1e-15 && rot[2].abs() < 1e-15);
        assert!((entropy_of_length(0.1f64) - 0.688_138_8).abs() < 1e-6);
    }

    #[test]
    fn rejects_fast_tunneling() {
        let bath = BathSpec::<f64>::new(10.0, 0.01).unwrap();
        let s = CouplingSchedule::<f64>::constant(0.0, 1.0).unwrap();
        assert!(SpinBosonSpec::from_bloch(3.0, bath, s, &BlochState::up()).is_err());
    }

    #[test]
    fn short_trace_is_a_domain_error() {
        let sp = spec(0.0, 2.0, BlochState::up());
        let tr = run_adiabatic(&sp, 0.05).unwrap();
        assert!(matches!(entropy_cycle_stats(&tr), Err(Error::Domain(_))));
    }
}
