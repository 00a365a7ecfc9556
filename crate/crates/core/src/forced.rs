//! Exact branch dynamics of linearly forced bath modes.
//!
//! On the σ₃ = s branch every mode obeys
//! `i dγ_k/dt = ω_k γ_k - i s ε(t) q_k` with `q_k = ĥ(k) √(ω_k/2)`,
//! and the branch accumulates the c-number phase
//! `dχ/dt = s ε(t) Σ_k w_k q_k Im γ_k`. Energies common to both branches
//! are dropped. For constant ε the stationary solution is the dressed
//! vacuum `γ_k = i s ε ĥ(k) / √(2ω_k)`.

use num_complex::Complex;

use crate::bath::{BathSpec, CouplingSchedule, GridId, ModeGrid};
use crate::coherent::{pairwise_log_overlap, Branch, BranchAmplitudes, OverlapFactor};
use crate::error::{Error, Result};
use crate::num::{cis_neg, cplx, lit, to_f64, Real};

/// Time-stepping method for the branch amplitudes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Integrator {
    /// Closed-form propagation with ε linear inside each step. Exact for
    /// piecewise-linear schedules, unconditionally stable.
    #[default]
    Exact,
    /// Classic fourth-order Runge–Kutta; needs `dt ≤ 0.1/ω_max`.
    Rk4,
}

/// Field state of one branch: amplitudes plus accumulated phase.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchState<T> {
    pub branch: Branch,
    pub gamma: Vec<Complex<T>>,
    pub phase: T,
}

impl<T: Real> BranchState<T> {
    pub fn vacuum(n: usize, branch: Branch) -> Self {
        Self {
            branch,
            gamma: vec![Complex::new(T::zero(), T::zero()); n],
            phase: T::zero(),
        }
    }

    pub fn from_amplitudes(a: &BranchAmplitudes<T>) -> Self {
        Self {
            branch: a.branch(),
            gamma: a.amplitudes().to_vec(),
            phase: T::zero(),
        }
    }

    pub fn amplitudes(&self, grid: GridId) -> Result<BranchAmplitudes<T>> {
        BranchAmplitudes::new(self.gamma.clone(), grid, self.branch)
    }
}

/// Static data of the forced modes on a bath grid.
#[derive(Debug, Clone)]
pub struct ForcedModes<T> {
    omega: Vec<T>,
    q: Vec<T>,
    weights: Vec<T>,
    grid: GridId,
}

#[derive(Debug, Clone)]
struct StepCache<T> {
    h: T,
    rot: Vec<Complex<T>>,
    i0: Vec<Complex<T>>,
    i1: Vec<Complex<T>>,
}

impl<T: Real> ForcedModes<T> {
    pub fn new(bath: &BathSpec<T>) -> Self {
        let grid: &ModeGrid<T> = bath.grid();
        let omega = bath.omegas();
        let half = lit::<T>(0.5);
        let q = grid
            .k()
            .iter()
            .zip(&omega)
            .map(|(k, w)| bath.coupling(*k) * (half * *w).sqrt())
            .collect();
        Self {
            omega,
            q,
            weights: grid.weights().to_vec(),
            grid: grid.id(),
        }
    }

    /// Modes given directly by frequency, forcing strength and weight.
    pub fn from_parts(omega: Vec<T>, q: Vec<T>, weights: Vec<T>, grid: GridId) -> Result<Self> {
        if omega.len() != q.len() || omega.len() != weights.len() {
            return Err(Error::Shape("mode parts differ in length".into()));
        }
        if omega.iter().any(|w| !(*w > T::zero())) {
            return Err(Error::InvalidParameter("mode frequencies must be positive".into()));
        }
        Ok(Self {
            omega,
            q,
            weights,
            grid,
        })
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    pub fn omegas(&self) -> &[T] {
        &self.omega
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn grid(&self) -> GridId {
        self.grid
    }

    pub fn omega_max(&self) -> T {
        self.omega.iter().fold(T::zero(), |m, w| m.max(*w))
    }

    /// Stationary amplitudes at constant coupling.
    pub fn adiabatic(&self, eps: T, branch: Branch) -> Vec<Complex<T>> {
        let s = branch.sign::<T>();
        self.q
            .iter()
            .zip(&self.omega)
            .map(|(q, w)| cplx(T::zero(), s * eps * *q / *w))
            .collect()
    }

    /// Log-overlap `ln⟨a|b⟩` including the branch phases.
    pub fn overlap(&self, a: &BranchState<T>, b: &BranchState<T>) -> Result<OverlapFactor<T>> {
        let fa = a.amplitudes(self.grid)?;
        let fb = b.amplitudes(self.grid)?;
        Ok(pairwise_log_overlap(&fa, &fb, &self.weights)?.with_phase(b.phase - a.phase))
    }

    fn cache(&self, h: T) -> StepCache<T> {
        let small = lit::<T>(1e-4);
        let i = cplx(T::zero(), T::one());
        let n = self.omega.len();
        let mut rot = Vec::with_capacity(n);
        let mut i0 = Vec::with_capacity(n);
        let mut i1 = Vec::with_capacity(n);
        let (two, three, six, eight, tf) = (
            lit::<T>(2.0),
            lit::<T>(3.0),
            lit::<T>(6.0),
            lit::<T>(8.0),
            lit::<T>(24.0),
        );
        for w in &self.omega {
            let x = *w * h;
            let e = cis_neg(x);
            rot.push(e);
            if x.abs() < small {
                let h2 = h * h;
                let h3 = h2 * h;
                let h4 = h3 * h;
                let w2 = *w * *w;
                i0.push(cplx(h - w2 * h3 / six, -*w * h2 / two + w2 * *w * h4 / tf));
                i1.push(cplx(h2 / two - w2 * h4 / eight, -*w * h3 / three));
            } else {
                let iw = i * *w;
                let a0 = (Complex::new(T::one(), T::zero()) - e) / iw;
                i0.push(a0);
                i1.push(e * h / (-iw) + a0 / iw);
            }
        }
        StepCache { h, rot, i0, i1 }
    }

    /// Advances one branch by `h` with ε going linearly from `e0` to `e1`.
    fn step_exact(&self, st: &mut BranchState<T>, e0: T, e1: T, c: &StepCache<T>) {
        let s = st.branch.sign::<T>();
        let h = c.h;
        let slope = (e1 - e0) / h;
        let (half, third) = (lit::<T>(0.5), T::one() / lit::<T>(3.0));
        let mut dchi = T::zero();
        for j in 0..self.omega.len() {
            let w = self.omega[j];
            let sq = s * self.q[j];
            // forcing p(τ) = -i s q ε(τ) = P0 + P1 τ
            let p0 = cplx(T::zero(), -sq * e0);
            let p1 = cplx(T::zero(), -sq * slope);
            let cc = -p1 / w;
            let bb = (cplx(-cc.im, cc.re) - p0) / w;
            let aa = st.gamma[j] - bb;
            let g1 = aa * c.rot[j] + bb + cc * h;
            // ∫ (s q ε(τ)) γ(τ) dτ
            let ea = sq * e0;
            let eb = sq * slope;
            let integral = aa * (c.i0[j] * ea + c.i1[j] * eb)
                + (bb * h + cc * (half * h * h)) * ea
                + (bb * (half * h * h) + cc * (third * h * h * h)) * eb;
            dchi = dchi + self.weights[j] * integral.im;
            st.gamma[j] = g1;
        }
        st.phase = st.phase + dchi;
    }

    fn rhs(&self, s: T, eps: T, gamma: &[Complex<T>], out: &mut [Complex<T>]) -> T {
        let mut dchi = T::zero();
        for j in 0..gamma.len() {
            let w = self.omega[j];
            let g = gamma[j];
            // -iωγ - s ε q
            out[j] = cplx(w * g.im - s * eps * self.q[j], -w * g.re);
            dchi = dchi + self.weights[j] * s * eps * self.q[j] * g.im;
        }
        dchi
    }

    fn step_rk4(&self, st: &mut BranchState<T>, e0: T, e1: T, h: T, scratch: &mut Rk4Scratch<T>) {
        let s = st.branch.sign::<T>();
        let half = lit::<T>(0.5);
        let em = half * (e0 + e1);
        let n = st.gamma.len();
        let Rk4Scratch { k1, k2, k3, k4, tmp } = scratch;
        let c1 = self.rhs(s, e0, &st.gamma, k1);
        for j in 0..n {
            tmp[j] = st.gamma[j] + k1[j] * (half * h);
        }
        let c2 = self.rhs(s, em, tmp, k2);
        for j in 0..n {
            tmp[j] = st.gamma[j] + k2[j] * (half * h);
        }
        let c3 = self.rhs(s, em, tmp, k3);
        for j in 0..n {
            tmp[j] = st.gamma[j] + k3[j] * h;
        }
        let c4 = self.rhs(s, e1, tmp, k4);
        let sixth = h / lit::<T>(6.0);
        let two = lit::<T>(2.0);
        for j in 0..n {
            st.gamma[j] = st.gamma[j] + (k1[j] + k2[j] * two + k3[j] * two + k4[j]) * sixth;
        }
        st.phase = st.phase + (c1 + two * c2 + two * c3 + c4) * sixth;
    }
}

#[derive(Debug, Clone)]
struct Rk4Scratch<T> {
    k1: Vec<Complex<T>>,
    k2: Vec<Complex<T>>,
    k3: Vec<Complex<T>>,
    k4: Vec<Complex<T>>,
    tmp: Vec<Complex<T>>,
}

impl<T: Real> Rk4Scratch<T> {
    fn new(n: usize) -> Self {
        let z = vec![Complex::new(T::zero(), T::zero()); n];
        Self {
            k1: z.clone(),
            k2: z.clone(),
            k3: z.clone(),
            tmp: z.clone(),
            k4: z,
        }
    }
}

/// Evolves branch states through a schedule, calling `on_sample` at each of
/// the (sorted) `sample_times` with the states at that instant.
///
/// Steps in the schedule leave the amplitudes untouched: only the forcing
/// changes across a zero-duration jump.
pub fn propagate<T, F>(
    modes: &ForcedModes<T>,
    schedule: &CouplingSchedule<T>,
    dt: T,
    integrator: Integrator,
    states: &mut [BranchState<T>],
    sample_times: &[T],
    mut on_sample: F,
) -> Result<()>
where
    T: Real,
    F: FnMut(usize, T, &[BranchState<T>]) -> Result<()>,
{
    if states.iter().any(|s| s.gamma.len() != modes.len()) {
        return Err(Error::Shape("branch state does not match the mode set".into()));
    }
    if sample_times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter("sample times must be sorted".into()));
    }
    let total = schedule.duration();
    let tiny = lit::<T>(1e-12) * (T::one() + total);
    if sample_times.iter().any(|t| *t < -tiny || *t > total + tiny) {
        return Err(Error::Domain("sample time outside the schedule".into()));
    }
    if integrator == Integrator::Rk4 {
        let limit = lit::<T>(0.1) / modes.omega_max();
        if dt > limit * (T::one() + lit(1e-9)) {
            return Err(Error::InvalidParameter(format!(
                "RK4 needs dt ≤ 0.1/ω_max = {:e}, got {:e}",
                to_f64(limit),
                to_f64(dt)
            )));
        }
    }

    // amplitude ceiling for the instability check
    let dressed = modes.adiabatic(schedule.max_eps(), Branch::Plus);
    let ceiling: Vec<Vec<T>> = states
        .iter()
        .map(|s| {
            s.gamma
                .iter()
                .zip(&dressed)
                .map(|(g, d)| lit::<T>(10.0) * g.norm().max(d.norm()) + T::epsilon())
                .collect()
        })
        .collect();

    let grid = schedule.grid(dt)?;
    let mut cache: Option<StepCache<T>> = None;
    let mut scratch = Rk4Scratch::new(modes.len());
    let mut next_sample = 0;
    let mut t = T::zero();

    for (i, &seg_idx) in grid.segment.iter().enumerate() {
        let seg = &schedule.segments()[seg_idx];
        let b = grid.nodes[i + 1];
        t = grid.nodes[i];
        loop {
            while next_sample < sample_times.len() && sample_times[next_sample] <= t + tiny {
                on_sample(next_sample, t, states)?;
                next_sample += 1;
            }
            let target = if next_sample < sample_times.len() && sample_times[next_sample] < b - tiny {
                sample_times[next_sample]
            } else {
                b
            };
            let h = target - t;
            if h > T::zero() {
                let (e0, e1) = (seg.eps_at(t), seg.eps_at(target));
                match integrator {
                    Integrator::Exact => {
                        let fresh = match &cache {
                            Some(c) => c.h != h,
                            None => true,
                        };
                        if fresh {
                            cache = Some(modes.cache(h));
                        }
                        let c = cache.as_ref().expect("cache filled above");
                        for st in states.iter_mut() {
                            modes.step_exact(st, e0, e1, c);
                        }
                    }
                    Integrator::Rk4 => {
                        for st in states.iter_mut() {
                            modes.step_rk4(st, e0, e1, h, &mut scratch);
                        }
                    }
                }
                for (st, ceil) in states.iter().zip(&ceiling) {
                    let bad = st
                        .gamma
                        .iter()
                        .zip(ceil)
                        .any(|(g, c)| !(g.norm() <= *c) || !g.re.is_finite());
                    if bad {
                        return Err(Error::Integration {
                            t: to_f64(target),
                            reason: "mode amplitude exceeded ten times its dressed value".into(),
                        });
                    }
                }
            }
            t = target;
            if target == b {
                break;
            }
        }
    }
    while next_sample < sample_times.len() {
        on_sample(next_sample, t, states)?;
        next_sample += 1;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bath() -> BathSpec<f64> {
        BathSpec::<f64>::new(10.0, 0.1).unwrap()
    }

    #[test]
    fn constant_coupling_keeps_dressed_state() {
        let b = bath();
        let modes = ForcedModes::new(&b);
        let sched = CouplingSchedule::<f64>::constant(1.0, 5.0).unwrap();
        let mut st = vec![BranchState {
            branch: Branch::Plus,
            gamma: modes.adiabatic(1.0, Branch::Plus),
            phase: 0.0,
        }];
        let start = st[0].gamma.clone();
        propagate(&modes, &sched, 0.05, Integrator::Exact, &mut st, &[], |_, _, _| Ok(())).unwrap();
        for (a, b) in st[0].gamma.iter().zip(&start) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn free_evolution_rotates() {
        let modes = ForcedModes::from_parts(vec![2.0], vec![1.0], vec![1.0], GridId(0)).unwrap();
        let sched = CouplingSchedule::<f64>::constant(0.0, 1.0).unwrap();
        let mut st = vec![BranchState {
            branch: Branch::Plus,
            gamma: vec![Complex::new(1.0, 0.0)],
            phase: 0.0,
        }];
        propagate(&modes, &sched, 0.1, Integrator::Exact, &mut st, &[], |_, _, _| Ok(())).unwrap();
        assert!((st[0].gamma[0] - Complex::new(2f64.cos(), -2f64.sin())).norm() < 1e-13);
    }

    #[test]
    fn exact_and_rk4_agree_on_a_ramp() {
        let modes = ForcedModes::from_parts(vec![3.0, 7.0], vec![0.8, 1.3], vec![0.5, 0.25], GridId(1)).unwrap();
        let sched = CouplingSchedule::<f64>::starting_at(0.0)
            .smooth_ramp(2.0, 1.5)
            .hold(0.5)
            .linear_ramp(1.0, 0.2)
            .build()
            .unwrap();
        let run = |integrator, dt| {
            let mut st = vec![
                BranchState::vacuum(2, Branch::Plus),
                BranchState::vacuum(2, Branch::Minus),
            ];
            propagate(&modes, &sched, dt, integrator, &mut st, &[], |_, _, _| Ok(())).unwrap();
            st
        };
        let a = run(Integrator::Exact, 1e-3);
        let b = run(Integrator::Rk4, 1e-3);
        for (x, y) in a.iter().zip(&b) {
            for (g, h) in x.gamma.iter().zip(&y.gamma) {
                assert!((g - h).norm() < 1e-8, "{g} vs {h}");
            }
            assert!((x.phase - y.phase).abs() < 1e-8);
        }
    }

    #[test]
    fn rk4_enforces_step_limit() {
        let modes = ForcedModes::from_parts(vec![30.0], vec![1.0], vec![1.0], GridId(0)).unwrap();
        let sched = CouplingSchedule::<f64>::constant(0.0, 1.0).unwrap();
        let mut st = vec![BranchState::vacuum(1, Branch::Plus)];
        let r = propagate(&modes, &sched, 0.01, Integrator::Rk4, &mut st, &[], |_, _, _| Ok(()));
        assert!(matches!(r, Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn samples_are_delivered_in_order() {
        let b = bath();
        let modes = ForcedModes::new(&b);
        let sched = CouplingSchedule::<f64>::starting_at(0.0)
            .linear_ramp(1.0, 1.0)
            .step(0.0)
            .hold(1.0)
            .build()
            .unwrap();
        let times = [0.0, 0.25, 1.0, 1.33, 2.0];
        let mut seen = Vec::new();
        let mut st = vec![BranchState::vacuum(modes.len(), Branch::Plus)];
        propagate(&modes, &sched, 0.1, Integrator::Exact, &mut st, &times, |i, t, _| {
            seen.push((i, t));
            Ok(())
        })
        .unwrap();
        assert_eq!(seen.len(), times.len());
        for (i, t) in seen {
            assert!((t - times[i]).abs() < 1e-12);
        }
    }
}
