//! Qubit states as Bloch vectors.

use nalgebra::{Matrix2, Vector3};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::num::{lit, to_f64, Real};

/// Slack allowed on |ρ⃗| ≤ 1.
pub const BLOCH_SLACK: f64 = 1e-9;

/// Spin state `½(1 + ρ⃗·σ⃗)` at a given time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochState<T> {
    pub rho: [T; 3],
    pub time: T,
}

impl<T: Real> BlochState<T> {
    pub fn new(rho: [T; 3], time: T) -> Result<Self> {
        if rho.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain("Bloch components must be finite".into()));
        }
        let s = Self { rho, time };
        if s.length() > T::one() + lit(BLOCH_SLACK) {
            return Err(Error::Domain(format!(
                "Bloch vector length {} exceeds 1",
                to_f64(s.length())
            )));
        }
        Ok(s)
    }

    /// `ρ⃗ = (1, 0, 0)`: equal superposition of the σ₃ eigenstates.
    pub fn transverse() -> Self {
        Self {
            rho: [T::one(), T::zero(), T::zero()],
            time: T::zero(),
        }
    }

    /// σ₃ = +1 eigenstate.
    pub fn up() -> Self {
        Self {
            rho: [T::zero(), T::zero(), T::one()],
            time: T::zero(),
        }
    }

    /// Pure state `c₊|+⟩ + c₋|−⟩` in the σ₃ basis.
    pub fn from_amplitudes(c_plus: Complex<T>, c_minus: Complex<T>) -> Result<Self> {
        let norm = c_plus.norm_sqr() + c_minus.norm_sqr();
        if (norm - T::one()).abs() > lit(1e-12) {
            return Err(Error::InvalidParameter(format!(
                "amplitudes normalized to {} instead of 1",
                to_f64(norm)
            )));
        }
        let rho12 = c_plus * c_minus.conj();
        let two = lit::<T>(2.0);
        Self::new(
            [two * rho12.re, -two * rho12.im, c_plus.norm_sqr() - c_minus.norm_sqr()],
            T::zero(),
        )
    }

    /// Amplitudes `(c₊, c₋)` of a pure state, with `c₊` real and non-negative.
    pub fn pure_amplitudes(&self) -> Result<(Complex<T>, Complex<T>)> {
        if (self.length() - T::one()).abs() > lit(1e-9) {
            return Err(Error::InvalidParameter("amplitudes exist only for a pure state".into()));
        }
        let half = lit::<T>(0.5);
        let [r1, r2, r3] = self.rho;
        let cp = (half * (T::one() + r3)).max(T::zero()).sqrt();
        // ρ₁ - iρ₂ = 2 c₊ c₋*
        let cm = if cp > lit(1e-12) {
            Complex::new(r1, r2) / (lit::<T>(2.0) * cp)
        } else {
            Complex::new((half * (T::one() - r3)).max(T::zero()).sqrt(), T::zero())
        };
        Ok((Complex::new(cp, T::zero()), cm))
    }

    /// State from a 2×2 density matrix in the σ₃ basis.
    pub fn from_density(rho: &Matrix2<Complex<T>>, time: T) -> Result<Self> {
        let two = lit::<T>(2.0);
        let off = rho[(0, 1)];
        Self::new([two * off.re, -two * off.im, (rho[(0, 0)] - rho[(1, 1)]).re], time)
    }

    pub fn at(mut self, time: T) -> Self {
        self.time = time;
        self
    }

    pub fn vector(&self) -> Vector3<T> {
        Vector3::new(self.rho[0], self.rho[1], self.rho[2])
    }

    pub fn length(&self) -> T {
        (self.rho[0] * self.rho[0] + self.rho[1] * self.rho[1] + self.rho[2] * self.rho[2]).sqrt()
    }

    /// `ρ₁ + iρ₂`, the complex conjugate of `2ρ_{+-}`.
    pub fn transverse_coherence(&self) -> Complex<T> {
        Complex::new(self.rho[0], self.rho[1])
    }

    pub fn transverse_length(&self) -> T {
        self.rho[0].hypot(self.rho[1])
    }

    /// `½(1 + ρ⃗·σ⃗)` in the σ₃ basis.
    pub fn density_matrix(&self) -> Matrix2<Complex<T>> {
        let half = lit::<T>(0.5);
        let [r1, r2, r3] = self.rho;
        Matrix2::new(
            Complex::new(half * (T::one() + r3), T::zero()),
            Complex::new(half * r1, -half * r2),
            Complex::new(half * r1, half * r2),
            Complex::new(half * (T::one() - r3), T::zero()),
        )
    }

    /// Eigenvalues `(1 ± |ρ⃗|)/2`, larger first.
    pub fn eigenvalues(&self) -> (T, T) {
        let half = lit::<T>(0.5);
        let r = self.length().min(T::one());
        (half * (T::one() + r), half * (T::one() - r))
    }

    /// Von Neumann entropy in nats.
    pub fn entropy(&self) -> T {
        entropy_of_length(self.length())
    }
}

/// Entropy of a qubit whose Bloch vector has length `r`.
pub fn entropy_of_length<T: Real>(r: T) -> T {
    let half = lit::<T>(0.5);
    let r = r.max(T::zero()).min(T::one());
    let term = |p: T| if p > T::zero() { -p * p.ln() } else { T::zero() };
    term(half * (T::one() + r)) + term(half * (T::one() - r))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_matrix_round_trip() {
        let s = BlochState::<f64>::new([0.3, -0.4, 0.5], 0.0).unwrap();
        let m = s.density_matrix();
        assert!(((m[(0, 0)] + m[(1, 1)]).re - 1.0).abs() < 1e-15);
        let back = BlochState::from_density(&m, 0.0).unwrap();
        for i in 0..3 {
            assert!((back.rho[i] - s.rho[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn amplitudes_map_to_bloch_axes() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let x = BlochState::from_amplitudes(Complex::new(h, 0.0), Complex::new(h, 0.0)).unwrap();
        assert!((x.rho[0] - 1.0).abs() < 1e-15);
        let y = BlochState::from_amplitudes(Complex::new(h, 0.0), Complex::new(0.0, h)).unwrap();
        assert!((y.rho[1] - 1.0).abs() < 1e-15);
        let z = BlochState::from_amplitudes(Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)).unwrap();
        assert_eq!(z.rho, [0.0, 0.0, 1.0]);
    }

    #[test]
    fn entropy_limits() {
        assert_eq!(BlochState::<f64>::up().entropy(), 0.0);
        let mixed = BlochState::<f64>::new([0.0, 0.0, 0.0], 0.0).unwrap();
        assert!((mixed.entropy() - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn rejects_unphysical_vectors() {
        assert!(BlochState::<f64>::new([1.0, 0.1, 0.0], 0.0).is_err());
        assert!(BlochState::<f64>::new([f64::NAN, 0.0, 0.0], 0.0).is_err());
        assert!(BlochState::from_amplitudes(Complex::new(1.0, 0.0), Complex::new(1.0, 0.0)).is_err());
    }
}
