//! Multi-mode coherent-state bookkeeping.
//!
//! Amplitudes are density-normalized: for a grid with weights `w_k`, the
//! sum `Σ w_k |α_k|²` approximates `∫ |α(k)|² dk`. Overlaps are accumulated
//! in log space so that strongly coupled runs do not underflow.

use num_complex::Complex;

use crate::bath::{BathSpec, GridId, ModeGrid};
use crate::error::{Error, Result};
use crate::num::{cis_neg, cplx, lit, Real};

/// Which σ₃ eigenvalue a field branch is attached to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign<T: Real>(self) -> T {
        match self {
            Branch::Plus => T::one(),
            Branch::Minus => -T::one(),
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Branch::Plus => Branch::Minus,
            Branch::Minus => Branch::Plus,
        }
    }

    pub fn from_sign<T: Real>(s: T) -> Self {
        if s < T::zero() {
            Branch::Minus
        } else {
            Branch::Plus
        }
    }
}

/// Coherent amplitudes of one field branch on a specific mode grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchAmplitudes<T> {
    amplitudes: Vec<Complex<T>>,
    grid: GridId,
    branch: Branch,
}

impl<T: Real> BranchAmplitudes<T> {
    pub fn new(amplitudes: Vec<Complex<T>>, grid: GridId, branch: Branch) -> Result<Self> {
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::Domain("coherent amplitudes must be finite".into()));
        }
        Ok(Self {
            amplitudes,
            grid,
            branch,
        })
    }

    /// Field vacuum on `grid`.
    pub fn vacuum(grid: &ModeGrid<T>, branch: Branch) -> Self {
        Self {
            amplitudes: vec![Complex::new(T::zero(), T::zero()); grid.len()],
            grid: grid.id(),
            branch,
        }
    }

    /// Checks that the list length matches the grid it claims to live on.
    pub fn on_grid(self, grid: &ModeGrid<T>) -> Result<Self> {
        if self.grid != grid.id() || self.amplitudes.len() != grid.len() {
            return Err(Error::Shape(format!(
                "amplitudes ({} entries, grid {}) do not live on grid {} of {} modes",
                self.amplitudes.len(),
                self.grid,
                grid.id(),
                grid.len()
            )));
        }
        Ok(self)
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    pub fn grid(&self) -> GridId {
        self.grid
    }

    pub fn branch(&self) -> Branch {
        self.branch
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn relabel(mut self, branch: Branch) -> Self {
        self.branch = branch;
        self
    }

    /// Elementwise negation with the opposite branch label.
    pub fn negated(&self) -> Self {
        Self {
            amplitudes: self.amplitudes.iter().map(|a| -*a).collect(),
            grid: self.grid,
            branch: self.branch.flip(),
        }
    }

    /// `Σ w_k |α_k|²`.
    pub fn norm_sqr(&self, weights: &[T]) -> Result<T> {
        check_len(self.amplitudes.len(), weights.len())?;
        Ok(self
            .amplitudes
            .iter()
            .zip(weights)
            .map(|(a, w)| *w * a.norm_sqr())
            .sum())
    }

    /// Free evolution over `dt`: `α_k → α_k e^{-iω_k dt}`.
    pub fn rotated(&self, omegas: &[T], dt: T) -> Result<Self> {
        check_len(self.amplitudes.len(), omegas.len())?;
        Ok(Self {
            amplitudes: self
                .amplitudes
                .iter()
                .zip(omegas)
                .map(|(a, w)| *a * cis_neg(*w * dt))
                .collect(),
            grid: self.grid,
            branch: self.branch,
        })
    }

    /// Weighted inner sum `Σ w_k α_k* β_k`.
    pub fn inner(&self, other: &Self, weights: &[T]) -> Result<Complex<T>> {
        same_grid(self, other, weights)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .zip(weights)
            .map(|((a, b), w)| a.conj() * b * *w)
            .fold(Complex::new(T::zero(), T::zero()), |s, v| s + v))
    }
}

fn check_len(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::Shape(format!("{a} amplitudes against {b} grid entries")));
    }
    Ok(())
}

fn same_grid<T: Real>(a: &BranchAmplitudes<T>, b: &BranchAmplitudes<T>, weights: &[T]) -> Result<()> {
    if a.grid != b.grid {
        return Err(Error::Shape(format!("grid {} against grid {}", a.grid, b.grid)));
    }
    check_len(a.len(), b.len())?;
    check_len(a.len(), weights.len())
}

/// `ln⟨a|b⟩` and the overlap it encodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapFactor<T> {
    pub log_overlap: Complex<T>,
}

impl<T: Real> OverlapFactor<T> {
    pub fn unity() -> Self {
        Self {
            log_overlap: Complex::new(T::zero(), T::zero()),
        }
    }

    /// Overlap `J = exp(log_overlap)`.
    pub fn j(&self) -> Complex<T> {
        self.log_overlap.exp()
    }

    pub fn abs_j(&self) -> T {
        self.log_overlap.re.exp()
    }

    /// Adds a relative phase `e^{iφ}`.
    pub fn with_phase(self, phase: T) -> Self {
        Self {
            log_overlap: self.log_overlap + cplx(T::zero(), phase),
        }
    }

    pub fn conj(self) -> Self {
        Self {
            log_overlap: self.log_overlap.conj(),
        }
    }

    /// Product of two overlaps.
    pub fn times(self, other: Self) -> Self {
        Self {
            log_overlap: self.log_overlap + other.log_overlap,
        }
    }
}

/// `ln⟨a|b⟩ = Σ_k w_k (a_k* b_k - (|a_k|² + |b_k|²)/2)`.
///
/// The real part is accumulated as `-½ Σ w |a - b|²`, which is the same sum
/// written so that it can never come out positive.
pub fn pairwise_log_overlap<T: Real>(
    a: &BranchAmplitudes<T>,
    b: &BranchAmplitudes<T>,
    weights: &[T],
) -> Result<OverlapFactor<T>> {
    same_grid(a, b, weights)?;
    let half = lit::<T>(0.5);
    let mut re = T::zero();
    let mut im = T::zero();
    for ((x, y), w) in a.amplitudes.iter().zip(&b.amplitudes).zip(weights) {
        re = re - half * *w * (*x - *y).norm_sqr();
        im = im + *w * (x.re * y.im - x.im * y.re);
    }
    Ok(OverlapFactor {
        log_overlap: cplx(re, im),
    })
}

/// Elementwise shift of the amplitudes.
pub fn displace<T: Real>(a: &BranchAmplitudes<T>, shift: &[Complex<T>]) -> Result<BranchAmplitudes<T>> {
    check_len(a.len(), shift.len())?;
    Ok(BranchAmplitudes {
        amplitudes: a.amplitudes.iter().zip(shift).map(|(x, s)| *x + *s).collect(),
        grid: a.grid,
        branch: a.branch,
    })
}

/// Dressed-vacuum amplitudes `α_k = ±i ε ĥ(k) / √(2ω_k)` at constant coupling.
pub fn adiabatic_branch_amplitudes<T: Real>(bath: &BathSpec<T>, eps: T, branch: Branch) -> Result<BranchAmplitudes<T>> {
    if !(eps >= T::zero()) {
        return Err(Error::InvalidParameter("coupling must be non-negative".into()));
    }
    let s = branch.sign::<T>();
    let two = lit::<T>(2.0);
    let amplitudes = bath
        .grid()
        .k()
        .iter()
        .map(|k| cplx(T::zero(), s * eps * bath.coupling(*k) / (two * bath.omega(*k)).sqrt()))
        .collect();
    Ok(BranchAmplitudes {
        amplitudes,
        grid: bath.grid().id(),
        branch,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::spectral_integral;

    fn single(a: Complex<f64>) -> (BranchAmplitudes<f64>, ModeGrid<f64>) {
        let g = ModeGrid::<f64>::from_nodes(vec![0.0], vec![1.0]).unwrap();
        (BranchAmplitudes::new(vec![a], g.id(), Branch::Plus).unwrap(), g)
    }

    #[test]
    fn identical_states_overlap_to_one() {
        let (a, g) = single(Complex::new(0.3, -0.7));
        let j = pairwise_log_overlap(&a, &a, g.weights()).unwrap();
        assert_eq!(j.log_overlap, Complex::new(0.0, 0.0));
        assert_eq!(j.j(), Complex::new(1.0, 0.0));
    }

    #[test]
    fn opposite_imaginary_amplitudes() {
        let (a, g) = single(Complex::new(0.0, 0.5));
        let b = a.negated();
        let j = pairwise_log_overlap(&a, &b, g.weights()).unwrap();
        assert!((j.log_overlap.re + 0.5).abs() < 1e-15);
        assert!(j.log_overlap.im.abs() < 1e-15);
        assert!((j.abs_j() - (-0.5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn displacement_round_trip() {
        let g = ModeGrid::<f64>::from_nodes(vec![-1.0, 0.0, 1.0], vec![0.5, 1.0, 0.5]).unwrap();
        let v = BranchAmplitudes::vacuum(&g, Branch::Plus);
        let shift = vec![Complex::new(0.1, 0.2), Complex::new(-0.3, 0.0), Complex::new(0.0, 0.4)];
        let back: Vec<_> = shift.iter().map(|s| -*s).collect();
        let moved = displace(&v, &shift).unwrap();
        assert_eq!(displace(&moved, &back).unwrap(), v);
        let j = pairwise_log_overlap(&moved, &v, g.weights()).unwrap();
        let want: f64 = shift
            .iter()
            .zip(g.weights())
            .map(|(s, w)| -0.5 * w * s.norm_sqr())
            .sum();
        assert!((j.log_overlap.re - want).abs() < 1e-15);
        assert!(displace(&v, &shift[..2]).is_err());
    }

    #[test]
    fn grid_mismatch_is_a_shape_error() {
        let g1 = ModeGrid::<f64>::from_nodes(vec![0.0], vec![1.0]).unwrap();
        let g2 = ModeGrid::<f64>::from_nodes(vec![0.0], vec![2.0]).unwrap();
        let a = BranchAmplitudes::vacuum(&g1, Branch::Plus);
        let b = BranchAmplitudes::vacuum(&g2, Branch::Plus);
        assert!(matches!(
            pairwise_log_overlap(&a, &b, g1.weights()),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn adiabatic_branches_reproduce_exponent() {
        let bath = BathSpec::<f64>::new(10.0, 0.01).unwrap();
        let p = adiabatic_branch_amplitudes(&bath, 1.0, Branch::Plus).unwrap();
        let m = adiabatic_branch_amplitudes(&bath, 1.0, Branch::Minus).unwrap();
        assert_eq!(m, p.negated());
        let j = pairwise_log_overlap(&p, &m, bath.grid().weights()).unwrap();
        let want = spectral_integral(&bath, 1e-10).unwrap().exponent(1.0);
        assert!((j.log_overlap.re - want).abs() < 1e-7 * want.abs());
        assert_eq!(j.log_overlap.im, 0.0);
        let zero = adiabatic_branch_amplitudes(&bath, 0.0, Branch::Plus).unwrap();
        assert!(zero.amplitudes().iter().all(|a| a.norm() == 0.0));
    }
}
