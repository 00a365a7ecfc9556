//! Brute-force spin ⊗ truncated Fock space evolution.
//!
//! A handful of modes with frequencies `ω_j` couple to the spin through
//! `½(π_j - ε(t) h_j σ₃)² + ½ω_j² φ_j²`, plus the tunneling term `½Ωσ₁`.
//! Dropping the c-number `½ε²h²`, the coupling is `-ε h_j σ₃ π_j`; its
//! dressed vacuum is the coherent state `α_j = i s ε h_j / √(2ω_j)`.
//!
//! Each step is a Strang splitting: half a free-field and tunneling step
//! around a full coupling step at the midpoint coupling. The coupling factor
//! is exponentiated exactly per mode from the eigenbasis of the truncated
//! momentum quadrature.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex;
use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bath::{default_tolerance, spectral_integral, BathSpec, CouplingSchedule};
use crate::bloch::BlochState;
use crate::error::{Error, Result};
use crate::num::{cplx, from_usize, lit, to_f64, Real};

/// Largest total Hilbert-space dimension accepted.
pub const MAX_DIMENSION: usize = 1 << 16;
/// Largest `dt·max ω_j` accepted.
pub const MAX_PHASE_STEP: f64 = 0.05;
/// Norm drift that invalidates a run.
pub const NORM_TOLERANCE: f64 = 1e-6;
/// Population allowed in the top Fock level of any mode.
pub const LEAKAGE_TOLERANCE: f64 = 1e-4;

/// Few-mode bath, truncation, time step, schedule and tunneling.
#[derive(Debug, Clone)]
pub struct OracleConfig<T> {
    pub fock_dim: usize,
    pub mode_freqs: Vec<T>,
    pub mode_couplings: Vec<T>,
    pub dt: T,
    pub schedule: CouplingSchedule<T>,
    pub omega: T,
}

impl<T: Real> OracleConfig<T> {
    pub fn n_modes(&self) -> usize {
        self.mode_freqs.len()
    }

    /// Dimension of the field factor, `d^n`.
    pub fn field_dimension(&self) -> usize {
        self.fock_dim.pow(self.n_modes() as u32)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_modes();
        if !(1..=4).contains(&n) {
            return Err(Error::InvalidParameter(format!("{n} modes; the oracle takes 1 to 4")));
        }
        if self.mode_couplings.len() != n {
            return Err(Error::Shape(format!(
                "{} couplings for {n} modes",
                self.mode_couplings.len()
            )));
        }
        if !(2..=32).contains(&self.fock_dim) {
            return Err(Error::InvalidParameter(format!(
                "Fock truncation {} out of range",
                self.fock_dim
            )));
        }
        let total = (self.fock_dim as u128).pow(n as u32) * 2;
        if total > MAX_DIMENSION as u128 {
            return Err(Error::InvalidParameter(format!(
                "dimension {total} exceeds {MAX_DIMENSION}"
            )));
        }
        if self.mode_freqs.iter().any(|w| !(*w > T::zero()) || !w.is_finite())
            || self.mode_couplings.iter().any(|h| !h.is_finite())
        {
            return Err(Error::InvalidParameter(
                "mode frequencies must be positive and couplings finite".into(),
            ));
        }
        if !(self.omega >= T::zero()) || !self.omega.is_finite() {
            return Err(Error::InvalidParameter(
                "tunneling frequency must be non-negative".into(),
            ));
        }
        let wmax = self.mode_freqs.iter().fold(T::zero(), |m, w| m.max(*w));
        if !(self.dt > T::zero()) || self.dt * wmax > lit::<T>(MAX_PHASE_STEP) * (T::one() + lit::<T>(1e-12)) {
            return Err(Error::InvalidParameter(format!(
                "dt·ω_max = {} must lie in (0, {MAX_PHASE_STEP}]",
                to_f64(self.dt * wmax)
            )));
        }
        Ok(())
    }

    /// Dressed overlap `exp(-ε² Σ h_j²/ω_j)` of an untruncated field.
    pub fn dressed_overlap(&self, eps: T) -> T {
        let s: T = self
            .mode_freqs
            .iter()
            .zip(&self.mode_couplings)
            .map(|(w, h)| *h * *h / *w)
            .sum();
        (-eps * eps * s).exp()
    }
}

/// Amplitudes over spin ⊗ modes; spin is the slowest index, `+` first.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState<T> {
    pub amplitudes: Vec<Complex<T>>,
    pub fock_dim: usize,
    pub n_modes: usize,
    pub time: T,
}

impl<T: Real> FockState<T> {
    /// Spin state times the field vacuum.
    pub fn vacuum(spin: &BlochState<T>, fock_dim: usize, n_modes: usize) -> Result<Self> {
        let (cp, cm) = spin.pure_amplitudes()?;
        let field = fock_dim.pow(n_modes as u32);
        let mut amplitudes = vec![cplx(T::zero(), T::zero()); 2 * field];
        amplitudes[0] = cp;
        amplitudes[field] = cm;
        Ok(Self {
            amplitudes,
            fock_dim,
            n_modes,
            time: T::zero(),
        })
    }

    /// `c₊|+⟩⊗|α₊⟩ + c₋|−⟩⊗|α₋⟩` with truncated product coherent states.
    pub fn from_branches(
        c_plus: Complex<T>,
        c_minus: Complex<T>,
        alpha_plus: &[Complex<T>],
        alpha_minus: &[Complex<T>],
        fock_dim: usize,
    ) -> Result<Self> {
        if alpha_plus.len() != alpha_minus.len() || alpha_plus.is_empty() {
            return Err(Error::Shape("branches need the same non-zero number of modes".into()));
        }
        let plus = coherent_product(alpha_plus, fock_dim);
        let minus = coherent_product(alpha_minus, fock_dim);
        let mut amplitudes: Vec<_> = plus.iter().map(|a| *a * c_plus).collect();
        amplitudes.extend(minus.iter().map(|a| *a * c_minus));
        Ok(Self {
            amplitudes,
            fock_dim,
            n_modes: alpha_plus.len(),
            time: T::zero(),
        })
    }

    pub fn field_dimension(&self) -> usize {
        self.amplitudes.len() / 2
    }

    pub fn norm_sqr(&self) -> T {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Population in the top Fock level, maximized over modes.
    pub fn leakage(&self) -> T {
        let d = self.fock_dim;
        let field = self.field_dimension();
        let mut worst = T::zero();
        for j in 0..self.n_modes {
            let stride = d.pow((self.n_modes - 1 - j) as u32);
            let mut p = T::zero();
            for (idx, a) in self.amplitudes.iter().enumerate() {
                if ((idx % field) / stride) % d == d - 1 {
                    p = p + a.norm_sqr();
                }
            }
            worst = worst.max(p);
        }
        worst
    }
}

/// Truncated coherent state `e^{-|α|²/2} Σ_{n<d} αⁿ/√n! |n⟩`.
pub fn coherent_fock_vector<T: Real>(alpha: Complex<T>, d: usize) -> Vec<Complex<T>> {
    let mut out = Vec::with_capacity(d);
    let mut c = cplx((-lit::<T>(0.5) * alpha.norm_sqr()).exp(), T::zero());
    for n in 0..d {
        out.push(c);
        c = c * alpha / from_usize::<T>(n + 1).sqrt();
    }
    out
}

/// Kronecker product of per-mode truncated coherent states, first mode slowest.
pub fn coherent_product<T: Real>(alphas: &[Complex<T>], d: usize) -> Vec<Complex<T>> {
    let mut out = vec![cplx(T::one(), T::zero())];
    for a in alphas {
        let v = coherent_fock_vector(*a, d);
        out = out.iter().flat_map(|x| v.iter().map(move |y| *x * *y)).collect();
    }
    out
}

/// `⟨a|b⟩` of two vectors.
pub fn inner_product<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    a.iter()
        .zip(b)
        .fold(cplx(T::zero(), T::zero()), |s, (x, y)| s + x.conj() * *y)
}

/// Reduced spin state; the field indices are summed over.
pub fn partial_trace_spin<T: Real>(state: &FockState<T>) -> Result<BlochState<T>> {
    let field = state.field_dimension();
    let (up, down) = state.amplitudes.split_at(field);
    let p_up: T = up.iter().map(|a| a.norm_sqr()).sum();
    let p_down: T = down.iter().map(|a| a.norm_sqr()).sum();
    let off = up
        .iter()
        .zip(down)
        .fold(cplx(T::zero(), T::zero()), |s, (u, v)| s + *u * v.conj());
    let two = lit::<T>(2.0);
    BlochState::new([two * off.re, -two * off.im, p_up - p_down], state.time)
}

/// Eigenbasis of the truncated `(a + a†)/√2`.
fn quadrature_eigen(d: usize) -> (Vec<f64>, DMatrix<f64>) {
    let mut x = DMatrix::<f64>::zeros(d, d);
    for n in 1..d {
        let v = (n as f64 / 2.0).sqrt();
        x[(n - 1, n)] = v;
        x[(n, n - 1)] = v;
    }
    let eig = SymmetricEigen::new(x);
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

/// `exp(i c P)` for the truncated `P = i(a† - a)/√2`, row-major.
///
/// `P = U X U†` with `U = diag(iⁿ)`, so only the real quadrature `X` is
/// diagonalized.
fn momentum_exponential<T: Real>(c: T, lambda: &[f64], vecs: &DMatrix<f64>) -> Vec<Complex<T>> {
    let d = lambda.len();
    let phases: Vec<Complex<f64>> = lambda.iter().map(|l| Complex::from_polar(1.0, to_f64(c) * l)).collect();
    let ipow = |n: usize| match n % 4 {
        0 => Complex::new(1.0, 0.0),
        1 => Complex::new(0.0, 1.0),
        2 => Complex::new(-1.0, 0.0),
        _ => Complex::new(0.0, -1.0),
    };
    let mut out = Vec::with_capacity(d * d);
    for r in 0..d {
        for col in 0..d {
            let mut s = Complex::new(0.0, 0.0);
            for k in 0..d {
                s += phases[k] * vecs[(r, k)] * vecs[(col, k)];
            }
            let v = ipow(r) * s * ipow(col).conj();
            out.push(cplx(lit::<T>(v.re), lit::<T>(v.im)));
        }
    }
    out
}

/// Applies a d×d row-major matrix along mode `j` of one spin block.
fn apply_on_mode<T: Real>(block: &mut [Complex<T>], d: usize, stride: usize, u: &[Complex<T>], buf: &mut [Complex<T>]) {
    let span = stride * d;
    for outer in (0..block.len()).step_by(span) {
        for inner in 0..stride {
            let base = outer + inner;
            for r in 0..d {
                buf[r] = block[base + r * stride];
            }
            for r in 0..d {
                let row = &u[r * d..(r + 1) * d];
                block[base + r * stride] = row
                    .iter()
                    .zip(buf.iter())
                    .fold(cplx(T::zero(), T::zero()), |s, (m, v)| s + *m * *v);
            }
        }
    }
}

/// Bloch trace with the truncation health of the run.
#[derive(Debug, Clone)]
pub struct OracleTrace<T> {
    pub samples: Vec<BlochState<T>>,
    pub max_leakage: T,
    pub max_norm_drift: T,
    pub steps: usize,
    pub final_state: FockState<T>,
}

impl<T: Real> OracleTrace<T> {
    pub fn times(&self) -> Vec<T> {
        self.samples.iter().map(|s| s.time).collect()
    }
}

/// Evolution from the spin state `initial_spin` times the field vacuum.
pub fn evolve<T: Real>(cfg: &OracleConfig<T>, initial_spin: &BlochState<T>, sample_dt: T) -> Result<OracleTrace<T>> {
    cfg.validate()?;
    let state = FockState::vacuum(initial_spin, cfg.fock_dim, cfg.n_modes())?;
    evolve_state(cfg, state, sample_dt)
}

/// Evolution of an arbitrary initial state over the whole schedule.
pub fn evolve_state<T: Real>(cfg: &OracleConfig<T>, mut state: FockState<T>, sample_dt: T) -> Result<OracleTrace<T>> {
    cfg.validate()?;
    let d = cfg.fock_dim;
    let n = cfg.n_modes();
    let field = cfg.field_dimension();
    if state.fock_dim != d || state.n_modes != n || state.amplitudes.len() != 2 * field {
        return Err(Error::Shape("initial state does not match the oracle layout".into()));
    }
    if !(sample_dt > T::zero()) {
        return Err(Error::InvalidParameter("sample interval must be positive".into()));
    }
    let total = cfg.schedule.duration();
    let steps = (total / cfg.dt - lit(1e-9)).ceil().to_usize().unwrap_or(0).max(1);
    let h = total / from_usize::<T>(steps);
    let every = (sample_dt / h).round().to_usize().unwrap_or(1).max(1);
    let half = lit::<T>(0.5);

    // free field and tunneling half steps
    let mut energies = vec![T::zero(); field];
    for (idx, e) in energies.iter_mut().enumerate() {
        let mut rest = idx;
        for j in (0..n).rev() {
            *e = *e + cfg.mode_freqs[j] * from_usize::<T>(rest % d);
            rest /= d;
        }
    }
    let free: Vec<Complex<T>> = energies
        .iter()
        .map(|e| {
            let x = *e * half * h;
            cplx(x.cos(), -x.sin())
        })
        .collect();
    let (ts, tc) = (half * cfg.omega * half * h).sin_cos();
    let (lambda, vecs) = quadrature_eigen(d);
    let strides: Vec<usize> = (0..n).map(|j| d.pow((n - 1 - j) as u32)).collect();

    let mut buf = vec![cplx(T::zero(), T::zero()); d];
    let mut samples = vec![partial_trace_spin(&state)?];
    let mut max_leakage = state.leakage();
    let mut max_drift = T::zero();
    let norm0 = state.norm_sqr();

    let half_step = |st: &mut FockState<T>| {
        let (up, down) = st.amplitudes.split_at_mut(field);
        for i in 0..field {
            let (u, v) = (up[i] * free[i], down[i] * free[i]);
            up[i] = u * tc - cplx(T::zero(), ts) * v;
            down[i] = v * tc - cplx(T::zero(), ts) * u;
        }
    };

    for step in 0..steps {
        let t0 = h * from_usize::<T>(step);
        half_step(&mut state);
        let eps = cfg.schedule.eps(t0 + half * h);
        if eps != T::zero() {
            let (up, down) = state.amplitudes.split_at_mut(field);
            for ((&g, &w), &stride) in cfg.mode_couplings.iter().zip(&cfg.mode_freqs).zip(&strides) {
                // -ε h σ₃ π with π = √ω P gives exp(+i s ε h √ω P dt)
                let c = eps * g * w.sqrt() * h;
                let u_plus = momentum_exponential(c, &lambda, &vecs);
                let u_minus = momentum_exponential(-c, &lambda, &vecs);
                apply_on_mode(up, d, stride, &u_plus, &mut buf);
                apply_on_mode(down, d, stride, &u_minus, &mut buf);
            }
        }
        half_step(&mut state);
        state.time = t0 + h;

        let drift = (state.norm_sqr() - norm0).abs();
        max_drift = max_drift.max(drift);
        if drift > lit(NORM_TOLERANCE) {
            return Err(Error::OracleInvalid {
                t: to_f64(state.time),
                reason: format!("norm drifted by {:e}", to_f64(drift)),
            });
        }
        let leak = state.leakage();
        max_leakage = max_leakage.max(leak);
        if leak > lit(LEAKAGE_TOLERANCE) {
            return Err(Error::OracleInvalid {
                t: to_f64(state.time),
                reason: format!("top Fock level holds {:e}; raise the truncation", to_f64(leak)),
            });
        }
        if (step + 1) % every == 0 || step + 1 == steps {
            samples.push(partial_trace_spin(&state)?);
        }
    }
    Ok(OracleTrace {
        samples,
        max_leakage,
        max_norm_drift: max_drift,
        steps,
        final_state: state,
    })
}

/// Few modes standing in for the continuum.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateModes<T> {
    pub freqs: Vec<T>,
    pub couplings: Vec<T>,
    /// `2π` over the smallest frequency spacing; beyond it the modes rephase.
    pub recurrence_time: T,
}

/// Draws `n` momenta with density `∝ ĥ(k)²/ω_k` from the bath grid and
/// gives each mode an equal share of `Σ h²/ω = D`, so the dressed overlap
/// of the surrogate equals the continuum one.
pub fn surrogate_modes<T: Real>(bath: &BathSpec<T>, n: usize, seed: u64) -> Result<SurrogateModes<T>> {
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one surrogate mode".into()));
    }
    let grid = bath.grid();
    let density: Vec<f64> = grid
        .k()
        .iter()
        .zip(grid.weights())
        .map(|(k, w)| to_f64(*w * bath.coupling(*k).powi(2) / bath.omega(*k)))
        .collect();
    let pick = WeightedIndex::new(&density).map_err(|e| Error::InvalidParameter(format!("mode density: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut freqs: Vec<T> = (0..n).map(|_| bath.omega(grid.k()[pick.sample(&mut rng)])).collect();
    freqs.sort_by(|a, b| a.partial_cmp(b).expect("finite frequencies"));
    let d = spectral_integral(bath, default_tolerance())?.d;
    let share = d / from_usize::<T>(n);
    let couplings = freqs.iter().map(|w| (*w * share).sqrt()).collect();
    let gap = freqs
        .windows(2)
        .map(|p| p[1] - p[0])
        .fold(T::infinity(), |m, g| m.min(g));
    let recurrence_time = if gap > T::zero() && gap.is_finite() {
        lit::<T>(2.0) * T::PI() / gap
    } else {
        T::infinity()
    };
    Ok(SurrogateModes {
        freqs,
        couplings,
        recurrence_time,
    })
}

/// Measured normalization of the dephasing exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration<T> {
    /// `c` in `ln J = -c ε² h²/ω`.
    pub c: T,
    pub transverse: T,
    pub predicted_exponent: T,
    pub max_leakage: T,
}

/// Ramps a single mode slowly to `eps` with a transverse spin and no
/// tunneling, then reads off the suppression of the transverse coherence.
pub fn calibrate_normalization<T: Real>(omega_mode: T, coupling: T, eps: T, fock_dim: usize) -> Result<Calibration<T>> {
    let ramp = lit::<T>(200.0) / omega_mode;
    let schedule = CouplingSchedule::starting_at(T::zero())
        .smooth_ramp(ramp, eps)
        .hold(lit::<T>(4.0) / omega_mode)
        .build()?;
    let cfg = OracleConfig {
        fock_dim,
        mode_freqs: vec![omega_mode],
        mode_couplings: vec![coupling],
        dt: lit::<T>(0.02) / omega_mode,
        schedule,
        omega: T::zero(),
    };
    let tr = evolve(&cfg, &BlochState::transverse(), ramp)?;
    let last = tr.samples.last().expect("oracle returns samples");
    let transverse = last.transverse_length();
    let predicted_exponent = eps * eps * coupling * coupling / omega_mode;
    Ok(Calibration {
        c: -transverse.ln() / predicted_exponent,
        transverse,
        predicted_exponent,
        max_leakage: tr.max_leakage,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::ModeGrid;
    use crate::coherent::{pairwise_log_overlap, Branch, BranchAmplitudes};

    fn config(omega: f64, eps: f64, total: f64) -> OracleConfig<f64> {
        OracleConfig {
            fock_dim: 8,
            mode_freqs: vec![20.0, 30.0],
            mode_couplings: vec![1.0, 1.5],
            dt: 1e-3,
            schedule: CouplingSchedule::<f64>::constant(eps, total).unwrap(),
            omega,
        }
    }

    #[test]
    fn decoupled_spin_is_frozen() {
        let s = BlochState::<f64>::new([0.6, 0.0, 0.8], 0.0).unwrap();
        let tr = evolve(&config(0.0, 0.0, 1.0), &s, 0.1).unwrap();
        for x in &tr.samples {
            assert!((x.vector() - s.vector()).norm() < 1e-12);
        }
        assert!(tr.max_leakage < 1e-30);
    }

    #[test]
    fn decoupled_rabi_rotation() {
        let tr = evolve(&config(1.0, 0.0, 6.0), &BlochState::up(), 0.5).unwrap();
        for x in &tr.samples {
            assert!((x.rho[2] - x.time.cos()).abs() < 1e-6, "{x:?}");
        }
    }

    #[test]
    fn partial_trace_of_products_and_entangled_states() {
        let s = BlochState::<f64>::new([0.0, -0.6, 0.8], 0.0).unwrap();
        let st = FockState::vacuum(&s, 4, 2).unwrap();
        assert!((partial_trace_spin(&st).unwrap().vector() - s.vector()).norm() < 1e-15);
        let mut bell = FockState::vacuum(&BlochState::up(), 4, 1).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        bell.amplitudes[0] = Complex::new(r, 0.0);
        bell.amplitudes[4 + 1] = Complex::new(r, 0.0);
        assert!(partial_trace_spin(&bell).unwrap().length() < 1e-15);
    }

    #[test]
    fn branch_state_coherence_matches_closed_form() {
        let alpha = vec![Complex::new(0.0, 0.4), Complex::new(0.2, -0.3)];
        let minus: Vec<_> = alpha.iter().map(|a| -*a).collect();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let c = Complex::new(r, 0.0);
        let st = FockState::from_branches(c, c, &alpha, &minus, 24).unwrap();
        let g = ModeGrid::<f64>::from_nodes(vec![0.0, 1.0], vec![1.0, 1.0]).unwrap();
        let a = BranchAmplitudes::new(alpha, g.id(), Branch::Plus).unwrap();
        let j = pairwise_log_overlap(&a, &a.negated(), g.weights()).unwrap().abs_j();
        let b = partial_trace_spin(&st).unwrap();
        assert!((b.transverse_length() - j).abs() < 1e-12);
    }

    #[test]
    fn sigma3_is_conserved_without_tunneling() {
        let s = BlochState::<f64>::new([0.6, 0.0, 0.8], 0.0).unwrap();
        let sched = CouplingSchedule::<f64>::starting_at(0.0)
            .smooth_ramp(1.0, 1.0)
            .build()
            .unwrap();
        let cfg = OracleConfig {
            schedule: sched,
            ..config(0.0, 0.0, 1.0)
        };
        let tr = evolve(&cfg, &s, 0.1).unwrap();
        assert!(tr.samples.iter().all(|x| (x.rho[2] - 0.8).abs() < 1e-10));
        assert!(tr.max_norm_drift < 1e-10);
    }

    #[test]
    fn rejects_coarse_step() {
        let cfg = OracleConfig {
            dt: 0.01,
            ..config(0.0, 0.0, 1.0)
        };
        assert!(matches!(cfg.validate(), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn leakage_is_reported() {
        let cfg = OracleConfig {
            fock_dim: 4,
            mode_couplings: vec![30.0, 30.0],
            ..config(0.0, 1.0, 0.2)
        };
        assert!(matches!(
            evolve(&cfg, &BlochState::transverse(), 0.1),
            Err(Error::OracleInvalid { .. })
        ));
    }

    #[test]
    fn calibration_recovers_unit_normalization() {
        let cal = calibrate_normalization(5.0f64, 1.0, 1.2, 16).unwrap();
        assert!((cal.c - 1.0).abs() < 1e-4, "{cal:?}");
    }

    #[test]
    fn surrogate_is_reproducible() {
        let bath = BathSpec::<f64>::new(10.0, 0.1).unwrap();
        let a = surrogate_modes(&bath, 3, 7).unwrap();
        assert_eq!(a, surrogate_modes(&bath, 3, 7).unwrap());
        let d = spectral_integral(&bath, 1e-10).unwrap().d;
        let s: f64 = a.freqs.iter().zip(&a.couplings).map(|(w, h)| h * h / w).sum();
        assert!((s - d).abs() < 1e-12 * d);
        assert!(a.freqs.iter().all(|w| *w >= 10.0));
    }
}
