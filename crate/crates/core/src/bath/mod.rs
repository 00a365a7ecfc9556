//! Massive 1-D scalar bath: coupling profile, dispersion, spectral integrals
//! and coupling schedules.

mod grid;
mod schedule;

pub use grid::{GridId, GridSpec, ModeGrid};
pub use schedule::{CouplingSchedule, ScheduleBuilder, ScheduleGrid, ScheduleSample, Segment, SegmentShape};

use crate::error::{Error, Result};
use crate::num::{lit, Real};
use crate::quadrature::{integrate_adaptive, Integral};

/// Constant `c` in `ln J = -c ε² D`.
///
/// Fixed by the single-mode Fock-space calibration run
/// (`fock::calibrate_normalization`), which measures it at 1 within
/// truncation error.
pub const DECOHERENCE_NORMALIZATION: f64 = 1.0;

/// Fourier-space shape ĥ(k) of the coupling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum CouplingProfile {
    /// ĥ(k) = exp(-Γ|k|/2).
    #[default]
    Exponential,
}

impl CouplingProfile {
    pub fn amplitude<T: Real>(self, k: T, cutoff: T) -> T {
        match self {
            CouplingProfile::Exponential => (-lit::<T>(0.5) * cutoff * k.abs()).exp(),
        }
    }

    /// `∫ ĥ(k)² dk` over the full line.
    pub fn norm_sqr<T: Real>(self, cutoff: T) -> T {
        match self {
            CouplingProfile::Exponential => lit::<T>(2.0) / cutoff,
        }
    }

    /// Largest |k| at which ĥ(k)² still exceeds `suppression`.
    pub fn extent<T: Real>(self, cutoff: T, suppression: f64) -> T {
        match self {
            CouplingProfile::Exponential => -lit::<T>(suppression.ln()) / cutoff,
        }
    }
}

/// Bath of mass `m` coupled through a profile with cutoff length `Γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct BathSpec<T> {
    mass: T,
    cutoff: T,
    profile: CouplingProfile,
    grid: ModeGrid<T>,
}

impl<T: Real> BathSpec<T> {
    /// Exponential profile with the default mode grid.
    pub fn new(mass: T, cutoff: T) -> Result<Self> {
        Self::with_grid(mass, cutoff, &GridSpec::default())
    }

    pub fn with_grid(mass: T, cutoff: T, spec: &GridSpec) -> Result<Self> {
        Self::check(mass, cutoff)?;
        let profile = CouplingProfile::Exponential;
        let k_max = profile.extent(cutoff, spec.suppression);
        let grid = ModeGrid::gauss_legendre(mass, k_max, spec)?;
        Ok(Self {
            mass,
            cutoff,
            profile,
            grid,
        })
    }

    /// Bath on a caller-supplied mode grid.
    pub fn with_modes(mass: T, cutoff: T, grid: ModeGrid<T>) -> Result<Self> {
        Self::check(mass, cutoff)?;
        Ok(Self {
            mass,
            cutoff,
            profile: CouplingProfile::Exponential,
            grid,
        })
    }

    fn check(mass: T, cutoff: T) -> Result<()> {
        if !(mass > T::zero()) || !mass.is_finite() {
            return Err(Error::InvalidParameter("bath mass must be positive".into()));
        }
        if !(cutoff > T::zero()) || !cutoff.is_finite() {
            return Err(Error::InvalidParameter("cutoff length must be positive".into()));
        }
        Ok(())
    }

    pub fn mass(&self) -> T {
        self.mass
    }

    pub fn cutoff(&self) -> T {
        self.cutoff
    }

    pub fn profile(&self) -> CouplingProfile {
        self.profile
    }

    pub fn grid(&self) -> &ModeGrid<T> {
        &self.grid
    }

    /// ĥ(k).
    pub fn coupling(&self, k: T) -> T {
        self.profile.amplitude(k, self.cutoff)
    }

    /// ω_k = √(k² + m²).
    pub fn omega(&self, k: T) -> T {
        k.hypot(self.mass)
    }

    /// ω_k on every grid node.
    pub fn omegas(&self) -> Vec<T> {
        self.grid.k().iter().map(|k| self.omega(*k)).collect()
    }

    /// ĥ(k) on every grid node.
    pub fn couplings(&self) -> Vec<T> {
        self.grid.k().iter().map(|k| self.coupling(*k)).collect()
    }

    /// `2 ∫_0^∞ ĥ(k)² g(k) dk` for an even, bounded, non-increasing `g`.
    ///
    /// The upper limit is pushed out until the remaining tail, bounded by
    /// `2 e^{-ΓK} g(K) / Γ`, is below a tenth of `tol`.
    pub fn line_integral<F: Fn(T) -> T>(&self, g: F, tol: T) -> Result<Integral<T>> {
        if !(tol > T::zero()) {
            return Err(Error::InvalidParameter("tolerance must be positive".into()));
        }
        let two = lit::<T>(2.0);
        let tail = |k: T| two * (-self.cutoff * k).exp() * g(k).abs() / self.cutoff;
        let mut upper = lit::<T>(10.0) / self.cutoff;
        while tail(upper) > lit::<T>(0.1) * tol {
            upper = upper + upper;
        }
        let first = self.mass.min(T::one() / self.cutoff);
        let mut edges = vec![T::zero()];
        let mut e = first;
        while e < upper {
            edges.push(e);
            e = e + e;
        }
        edges.push(upper);
        let inner = integrate_adaptive(
            |k: T| two * self.coupling(k).powi(2) * g(k),
            &edges,
            lit::<T>(0.9) * tol,
            4000,
        )?;
        Ok(Integral {
            value: inner.value,
            error: inner.error + tail(upper),
            evaluations: inner.evaluations,
        })
    }
}

/// `D = ∫ ĥ(k)²/ω_k dk` over the full line, the field variance and the
/// quadrature error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralReport<T> {
    pub d: T,
    /// ⟨Φ(0)²⟩ of the smeared field, `D / 2`.
    pub phi2: T,
    pub quadrature_error: T,
}

impl<T: Real> SpectralReport<T> {
    /// `ln J = -c ε² D`.
    pub fn exponent(&self, eps: T) -> T {
        -lit::<T>(DECOHERENCE_NORMALIZATION) * eps * eps * self.d
    }

    /// Branch overlap `J = exp(-c ε² D)`.
    pub fn overlap(&self, eps: T) -> T {
        self.exponent(eps).exp()
    }

    /// Coupling at which `J` reaches `target` (0 < target ≤ 1).
    pub fn eps_for_overlap(&self, target: T) -> Result<T> {
        if !(target > T::zero() && target <= T::one()) {
            return Err(Error::Domain("target overlap must lie in (0, 1]".into()));
        }
        Ok((-target.ln() / (lit::<T>(DECOHERENCE_NORMALIZATION) * self.d)).sqrt())
    }
}

/// Tolerance used when callers do not pick one.
pub fn default_tolerance<T: Real>() -> T {
    lit::<T>(1e-10).max(T::epsilon() * lit(1e4))
}

/// Adaptive evaluation of D and ⟨Φ²⟩.
pub fn spectral_integral<T: Real>(bath: &BathSpec<T>, tol: T) -> Result<SpectralReport<T>> {
    let m = bath.mass();
    let r = bath.line_integral(|k| T::one() / k.hypot(m), tol)?;
    Ok(SpectralReport {
        d: r.value,
        phi2: lit::<T>(0.5) * r.value,
        quadrature_error: r.error,
    })
}

/// `ln J` for a constant coupling `eps`.
pub fn decoherence_exponent<T: Real>(bath: &BathSpec<T>, eps: T) -> Result<T> {
    if !(eps >= T::zero()) {
        return Err(Error::InvalidParameter("coupling must be non-negative".into()));
    }
    if eps == T::zero() {
        return Ok(T::zero());
    }
    Ok(spectral_integral(bath, default_tolerance())?.exponent(eps))
}

/// Small-Γm asymptote `2(ln(2/(Γm)) - γ_E)` of D.
pub fn small_cutoff_asymptote<T: Real>(mass: T, cutoff: T) -> T {
    lit::<T>(2.0) * ((lit::<T>(2.0) / (cutoff * mass)).ln() - lit(crate::num::EULER_GAMMA))
}

/// Neglected-term estimate of one segment: `max|ε̇|² · duration · ⟨Φ²⟩ / m`.
pub fn segment_adiabaticity<T: Real>(segment: &Segment<T>, phi2: T, mass: T) -> T {
    if segment.is_step() {
        return T::infinity();
    }
    let rate = segment.max_rate();
    rate * rate * segment.duration() * phi2 / mass
}

/// Largest segment estimate over a schedule; infinite if it has steps.
pub fn adiabaticity_metric<T: Real>(bath: &BathSpec<T>, s: &CouplingSchedule<T>) -> Result<T> {
    if s.has_steps() {
        return Ok(T::infinity());
    }
    let report = spectral_integral(bath, default_tolerance())?;
    Ok(metric_from_report(&report, bath.mass(), s))
}

pub(crate) fn metric_from_report<T: Real>(report: &SpectralReport<T>, mass: T, s: &CouplingSchedule<T>) -> T {
    s.segments()
        .iter()
        .map(|seg| segment_adiabaticity(seg, report.phi2, mass))
        .fold(T::zero(), T::max)
}
