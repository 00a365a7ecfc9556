//! Harmonic oscillator linearly coupled to the bath.
//!
//! Eliminating the field dresses the oscillator in two ways. Its mass grows
//! to `M = 1 + ε²K` with `K = ∫ ĥ(k)²/(k²+m²) dk`, so it oscillates at
//! `Ω/√M`, and the reduced position density matrix picks up the Gaussian
//! factor `e^{-κ(q-q')²}` with `κ = (ε²/8) ∫ ĥ(k)² dk`. Both follow ε(t)
//! adiabatically, so separated packets look incoherent yet interfere in full
//! once they meet again.
//!
//! Packets are thawed Gaussians `c·exp(i[A(x-q)² + p(x-q) + γ])`; their
//! parameters are propagated exactly where the mass is constant and by RK4
//! where it changes.

use std::io::{self, Write};

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::bath::{default_tolerance, BathSpec, CouplingSchedule};
use crate::error::{Error, Result};
use crate::num::{cplx, from_usize, lit, to_f64, Real};

/// Integration steps per bare oscillation period.
pub const STEPS_PER_PERIOD: usize = 400;

/// Packets must sit this many widths inside the grid.
pub const COVERAGE_WIDTHS: f64 = 5.0;

/// Gaussian packet with centre, mean momentum, position spread and weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPacket<T> {
    pub center: T,
    pub momentum: T,
    pub width: T,
    pub weight: Complex<T>,
}

impl<T: Real> GaussianPacket<T> {
    pub fn new(center: T, momentum: T, width: T, weight: Complex<T>) -> Result<Self> {
        if !(width > T::zero()) || !center.is_finite() || !momentum.is_finite() {
            return Err(Error::InvalidParameter(
                "packet needs finite centre and momentum and a positive width".into(),
            ));
        }
        Ok(Self {
            center,
            momentum,
            width,
            weight,
        })
    }
}

/// Uniform position grid including both end points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionGrid<T> {
    pub q_min: T,
    pub q_max: T,
    pub points: usize,
}

impl<T: Real> PositionGrid<T> {
    pub fn new(q_min: T, q_max: T, points: usize) -> Result<Self> {
        if !(q_max > q_min) || points < 3 {
            return Err(Error::InvalidParameter(
                "grid needs q_max > q_min and at least 3 points".into(),
            ));
        }
        Ok(Self { q_min, q_max, points })
    }

    pub fn spacing(&self) -> T {
        (self.q_max - self.q_min) / from_usize::<T>(self.points - 1)
    }

    pub fn nodes(&self) -> Vec<T> {
        let h = self.spacing();
        (0..self.points).map(|i| self.q_min + h * from_usize::<T>(i)).collect()
    }

    fn covers(&self, center: T, width: T) -> bool {
        let pad = lit::<T>(COVERAGE_WIDTHS) * width;
        center - pad >= self.q_min && center + pad <= self.q_max
    }
}

/// Bare oscillator, initial packets and sampling grid.
#[derive(Debug, Clone, PartialEq)]
pub struct OscillatorSpec<T> {
    omega: T,
    packets: Vec<GaussianPacket<T>>,
    grid: PositionGrid<T>,
}

impl<T: Real> OscillatorSpec<T> {
    /// Validates coverage and rescales the weights to unit norm on the grid.
    pub fn new(omega: T, packets: Vec<GaussianPacket<T>>, grid: PositionGrid<T>) -> Result<Self> {
        if !(omega > T::zero()) || !omega.is_finite() {
            return Err(Error::InvalidParameter("oscillator frequency must be positive".into()));
        }
        if packets.is_empty() {
            return Err(Error::InvalidParameter("at least one packet is required".into()));
        }
        if let Some(p) = packets.iter().find(|p| !grid.covers(p.center, p.width)) {
            return Err(Error::Domain(format!(
                "grid [{}, {}] does not cover the packet at {} ± {} widths",
                to_f64(grid.q_min),
                to_f64(grid.q_max),
                to_f64(p.center),
                COVERAGE_WIDTHS
            )));
        }
        let mut spec = Self { omega, packets, grid };
        let states: Vec<_> = spec.packets.iter().map(PacketState::initial).collect();
        let psi = superpose(&spec, &states);
        let norm: T = psi.iter().map(|z| z.norm_sqr()).sum::<T>() * grid.spacing();
        if !(norm > T::zero()) {
            return Err(Error::InvalidParameter(
                "packet weights sum to a vanishing state".into(),
            ));
        }
        let scale = norm.sqrt().recip();
        for p in &mut spec.packets {
            p.weight = p.weight * scale;
        }
        Ok(spec)
    }

    pub fn omega(&self) -> T {
        self.omega
    }

    pub fn packets(&self) -> &[GaussianPacket<T>] {
        &self.packets
    }

    pub fn grid(&self) -> &PositionGrid<T> {
        &self.grid
    }
}

/// Mass factor, dressed frequency and kernel coefficient at one coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenormalizationReport<T> {
    pub mass_factor: T,
    pub omega_tilde: T,
    pub kernel_coeff: T,
}

/// Coupling-independent integrals behind [`RenormalizationReport`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenormalizationCoefficients<T> {
    /// `∫ ĥ(k)²/(k²+m²) dk`.
    pub mass_integral: T,
    /// `∫ ĥ(k)² dk`.
    pub profile_norm: T,
    pub quadrature_error: T,
}

impl<T: Real> RenormalizationCoefficients<T> {
    pub fn new(bath: &BathSpec<T>) -> Result<Self> {
        let tol = default_tolerance::<T>();
        let m2 = bath.mass() * bath.mass();
        let k = bath.line_integral(|k| (k * k + m2).recip(), tol)?;
        Ok(Self {
            mass_integral: k.value,
            profile_norm: bath.profile().norm_sqr(bath.cutoff()),
            quadrature_error: k.error,
        })
    }

    pub fn mass_factor(&self, eps: T) -> T {
        T::one() + eps * eps * self.mass_integral
    }

    pub fn kernel_coeff(&self, eps: T) -> T {
        eps * eps * self.profile_norm / lit::<T>(8.0)
    }

    pub fn at(&self, eps: T, omega: T) -> RenormalizationReport<T> {
        let mass_factor = self.mass_factor(eps);
        RenormalizationReport {
            mass_factor,
            omega_tilde: omega / mass_factor.sqrt(),
            kernel_coeff: self.kernel_coeff(eps),
        }
    }
}

/// Dressed mass, frequency and kernel coefficient for coupling `eps`.
pub fn renormalization<T: Real>(bath: &BathSpec<T>, eps: T, omega: T) -> Result<RenormalizationReport<T>> {
    if !(eps >= T::zero()) {
        return Err(Error::InvalidParameter("coupling must be non-negative".into()));
    }
    Ok(RenormalizationCoefficients::new(bath)?.at(eps, omega))
}

/// Thawed-Gaussian parameters of one packet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketState<T> {
    pub q: T,
    pub p: T,
    pub a: Complex<T>,
    pub gamma: Complex<T>,
    pub weight: Complex<T>,
}

impl<T: Real> PacketState<T> {
    pub fn initial(p: &GaussianPacket<T>) -> Self {
        let s2 = p.width * p.width;
        let four = lit::<T>(4.0);
        Self {
            q: p.center,
            p: p.momentum,
            a: cplx(T::zero(), (four * s2).recip()),
            gamma: cplx(T::zero(), (lit::<T>(2.0) * T::PI() * s2).ln() / four),
            weight: p.weight,
        }
    }

    /// Position spread `1/(2√Im A)`.
    pub fn width(&self) -> T {
        lit::<T>(0.5) / self.a.im.sqrt()
    }

    pub fn eval(&self, x: T) -> Complex<T> {
        let d = x - self.q;
        let arg = self.a * (d * d) + cplx(self.p * d, T::zero()) + self.gamma;
        self.weight * (cplx(T::zero(), T::one()) * arg).exp()
    }

    /// Exact step of length `h` at constant mass factor `mass`.
    fn exact_step(&mut self, omega: T, mass: T, h: T) {
        let w = omega / mass.sqrt();
        let mw = mass * w;
        let (s, c) = (w * h).sin_cos();
        let b = self.a * (lit::<T>(2.0) / mw);
        let z = b * s + c;
        let zdot = (b * c - s) * w;
        let (q0, p0) = (self.q, self.p);
        self.q = q0 * c + p0 * s / mw;
        self.p = p0 * c - mw * q0 * s;
        self.a = zdot / z * (mass / lit::<T>(2.0));
        let half = lit::<T>(0.5);
        self.gamma = self.gamma + cplx(T::zero(), half) * z.ln() + cplx(half * (self.p * self.q - p0 * q0), T::zero());
    }

    fn rates(&self, omega: T, mass: T) -> [Complex<T>; 4] {
        let half = lit::<T>(0.5);
        let w2 = omega * omega;
        let a = self.a;
        [
            cplx(self.p / mass, T::zero()),
            cplx(-w2 * self.q, T::zero()),
            a * a * (lit::<T>(-2.0) / mass) - cplx(half * w2, T::zero()),
            cplx(T::zero(), T::one()) * a / mass
                + cplx(half * self.p * self.p / mass - half * w2 * self.q * self.q, T::zero()),
        ]
    }

    fn shifted(&self, d: &[Complex<T>; 4], f: T) -> Self {
        Self {
            q: self.q + d[0].re * f,
            p: self.p + d[1].re * f,
            a: self.a + d[2] * f,
            gamma: self.gamma + d[3] * f,
            weight: self.weight,
        }
    }

    /// RK4 step with the mass factor sampled at start, middle and end.
    fn rk4_step(&mut self, omega: T, masses: [T; 3], h: T) {
        let half = lit::<T>(0.5);
        let k1 = self.rates(omega, masses[0]);
        let k2 = self.shifted(&k1, half * h).rates(omega, masses[1]);
        let k3 = self.shifted(&k2, half * h).rates(omega, masses[1]);
        let k4 = self.shifted(&k3, h).rates(omega, masses[2]);
        let sixth = h / lit::<T>(6.0);
        let two = lit::<T>(2.0);
        let comb = |i: usize| (k1[i] + k2[i] * two + k3[i] * two + k4[i]) * sixth;
        let (dq, dp, da, dg) = (comb(0), comb(1), comb(2), comb(3));
        self.q = self.q + dq.re;
        self.p = self.p + dp.re;
        self.a = self.a + da;
        self.gamma = self.gamma + dg;
    }
}

fn superpose<T: Real>(spec: &OscillatorSpec<T>, states: &[PacketState<T>]) -> Vec<Complex<T>> {
    spec.grid
        .nodes()
        .iter()
        .map(|x| states.iter().fold(cplx(T::zero(), T::zero()), |s, p| s + p.eval(*x)))
        .collect()
}

/// Packet parameters at time `t` under the dressed free evolution.
pub fn propagate_packets<T: Real>(
    spec: &OscillatorSpec<T>,
    coeffs: &RenormalizationCoefficients<T>,
    s: &CouplingSchedule<T>,
    t: T,
) -> Result<Vec<PacketState<T>>> {
    if s.has_steps() {
        return Err(Error::Schedule(
            "oscillator evolution needs a step-free schedule".into(),
        ));
    }
    if !(t >= T::zero()) || t > s.duration() {
        return Err(Error::Domain(format!(
            "time {} outside the schedule [0, {}]",
            to_f64(t),
            to_f64(s.duration())
        )));
    }
    let dt = lit::<T>(2.0) * T::PI() / (spec.omega * from_usize::<T>(STEPS_PER_PERIOD));
    let grid = s.grid(dt)?;
    let mut states: Vec<_> = spec.packets.iter().map(PacketState::initial).collect();
    let half = lit::<T>(0.5);
    for i in 0..grid.intervals() {
        let t0 = grid.nodes[i];
        if t0 >= t {
            break;
        }
        let t1 = grid.nodes[i + 1].min(t);
        let h = t1 - t0;
        let seg = &s.segments()[grid.segment[i]];
        if seg.eps_start == seg.eps_end {
            let mass = coeffs.mass_factor(seg.eps_start);
            states.iter_mut().for_each(|p| p.exact_step(spec.omega, mass, h));
        } else {
            let masses = [
                coeffs.mass_factor(seg.eps_at(t0)),
                coeffs.mass_factor(seg.eps_at(t0 + half * h)),
                coeffs.mass_factor(seg.eps_at(t1)),
            ];
            states.iter_mut().for_each(|p| p.rk4_step(spec.omega, masses, h));
        }
    }
    if let Some(p) = states.iter().find(|p| !spec.grid.covers(p.q, p.width())) {
        return Err(Error::Domain(format!(
            "packet at {} with width {} has left the grid by t = {}",
            to_f64(p.q),
            to_f64(p.width()),
            to_f64(t)
        )));
    }
    Ok(states)
}

/// ρ(q, q') on the position grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionDensityMatrix<T: Real> {
    pub q: Vec<T>,
    pub rho: DMatrix<Complex<T>>,
    pub time: T,
}

impl<T: Real> PositionDensityMatrix<T> {
    pub fn spacing(&self) -> T {
        self.q[1] - self.q[0]
    }

    /// Position distribution `P(q) = ρ(q, q)`.
    pub fn diagonal(&self) -> Vec<T> {
        (0..self.q.len()).map(|i| self.rho[(i, i)].re).collect()
    }

    /// Grid-weighted trace.
    pub fn trace(&self) -> T {
        self.diagonal().into_iter().sum::<T>() * self.spacing()
    }

    /// Largest `|ρ(q,q') - ρ(q',q)*|`.
    pub fn hermiticity_defect(&self) -> T {
        let n = self.q.len();
        let mut worst = T::zero();
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.rho[(i, j)] - self.rho[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Multiplies by `e^{-κ(q-q')²}` in place.
    pub fn apply_kernel(&mut self, kappa: T) {
        if kappa == T::zero() {
            return;
        }
        let n = self.q.len();
        for j in 0..n {
            for i in 0..n {
                let d = self.q[i] - self.q[j];
                self.rho[(i, j)] = self.rho[(i, j)] * (-kappa * d * d).exp();
            }
        }
    }

    /// Writes every matrix row as interleaved real and imaginary parts.
    pub fn write_matrix_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let n = self.q.len();
        for i in 0..n {
            let row: Vec<String> = (0..n)
                .map(|j| format!("{:e},{:e}", to_f64(self.rho[(i, j)].re), to_f64(self.rho[(i, j)].im)))
                .collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// `Σ_ab C_ab ψ_a ψ_b†` for packet wavefunctions on the grid.
fn density_from_packets<T: Real>(
    spec: &OscillatorSpec<T>,
    states: &[PacketState<T>],
    coherence: &DMatrix<T>,
    time: T,
) -> PositionDensityMatrix<T> {
    let q = spec.grid.nodes();
    let n = q.len();
    let waves: Vec<Vec<Complex<T>>> = states.iter().map(|p| q.iter().map(|x| p.eval(*x)).collect()).collect();
    let mut rho = DMatrix::from_element(n, n, cplx(T::zero(), T::zero()));
    let full = coherence.iter().all(|c| *c == T::one());
    if full {
        let psi: Vec<Complex<T>> = (0..n)
            .map(|i| waves.iter().fold(cplx(T::zero(), T::zero()), |s, w| s + w[i]))
            .collect();
        for j in 0..n {
            let cj = psi[j].conj();
            for i in 0..n {
                rho[(i, j)] = psi[i] * cj;
            }
        }
    } else {
        for (a, wa) in waves.iter().enumerate() {
            for (b, wb) in waves.iter().enumerate() {
                let c = coherence[(a, b)];
                if c == T::zero() {
                    continue;
                }
                for j in 0..n {
                    let cj = wb[j].conj() * c;
                    for i in 0..n {
                        rho[(i, j)] = rho[(i, j)] + wa[i] * cj;
                    }
                }
            }
        }
    }
    PositionDensityMatrix { q, rho, time }
}

/// Reduced density matrix at `t`: dressed free evolution times the kernel
/// evaluated at ε(t).
pub fn evolve_reduced<T: Real>(
    spec: &OscillatorSpec<T>,
    bath: &BathSpec<T>,
    s: &CouplingSchedule<T>,
    t: T,
) -> Result<PositionDensityMatrix<T>> {
    let coeffs = RenormalizationCoefficients::new(bath)?;
    let states = propagate_packets(spec, &coeffs, s, t)?;
    let n = states.len();
    let mut rho = density_from_packets(spec, &states, &DMatrix::from_element(n, n, T::one()), t);
    rho.apply_kernel(coeffs.kernel_coeff(s.eps(t)));
    Ok(rho)
}

/// Packet-pair factors `e^{-κ(q̄_a - q̄_b)²}` at time `t`.
pub fn packet_kernel<T: Real>(
    spec: &OscillatorSpec<T>,
    bath: &BathSpec<T>,
    s: &CouplingSchedule<T>,
    t: T,
) -> Result<DMatrix<T>> {
    let coeffs = RenormalizationCoefficients::new(bath)?;
    let states = propagate_packets(spec, &coeffs, s, t)?;
    let kappa = coeffs.kernel_coeff(s.eps(t));
    let n = states.len();
    Ok(DMatrix::from_fn(n, n, |a, b| {
        let d = states[a].q - states[b].q;
        (-kappa * d * d).exp()
    }))
}

/// Evolution in which inter-packet coherence is scaled by fixed factors
/// `coherence[(a, b)]` and no kernel is applied: the outcome if the
/// suppression were carried off for good instead of following ε.
pub fn evolve_with_packet_coherence<T: Real>(
    spec: &OscillatorSpec<T>,
    bath: &BathSpec<T>,
    s: &CouplingSchedule<T>,
    t: T,
    coherence: &DMatrix<T>,
) -> Result<PositionDensityMatrix<T>> {
    let n = spec.packets.len();
    if coherence.shape() != (n, n) {
        return Err(Error::Shape(format!(
            "coherence matrix is {:?}, expected {n}×{n}",
            coherence.shape()
        )));
    }
    let coeffs = RenormalizationCoefficients::new(bath)?;
    let states = propagate_packets(spec, &coeffs, s, t)?;
    Ok(density_from_packets(spec, &states, coherence, t))
}

/// First time the centres of packets `a` and `b` coincide.
pub fn recombination_time<T: Real>(
    spec: &OscillatorSpec<T>,
    bath: &BathSpec<T>,
    s: &CouplingSchedule<T>,
    a: usize,
    b: usize,
) -> Result<T> {
    let n = spec.packets.len();
    if a >= n || b >= n || a == b {
        return Err(Error::InvalidParameter(format!(
            "packet pair ({a}, {b}) invalid for {n} packets"
        )));
    }
    let coeffs = RenormalizationCoefficients::new(bath)?;
    let dt = lit::<T>(2.0) * T::PI() / (spec.omega * from_usize::<T>(STEPS_PER_PERIOD));
    let gap = |t: T| -> Result<T> {
        let st = propagate_packets(spec, &coeffs, s, t)?;
        Ok(st[a].q - st[b].q)
    };
    let mut t0 = T::zero();
    let mut g0 = gap(t0)?;
    while t0 < s.duration() {
        let t1 = (t0 + dt).min(s.duration());
        let g1 = gap(t1)?;
        if g1 == T::zero() {
            return Ok(t1);
        }
        if (g0 < T::zero()) != (g1 < T::zero()) && g0 != T::zero() {
            let (mut lo, mut hi, mut glo) = (t0, t1, g0);
            for _ in 0..60 {
                let mid = lit::<T>(0.5) * (lo + hi);
                let gm = gap(mid)?;
                if (gm < T::zero()) == (glo < T::zero()) {
                    lo = mid;
                    glo = gm;
                } else {
                    hi = mid;
                }
            }
            return Ok(lit::<T>(0.5) * (lo + hi));
        }
        t0 = t1;
        g0 = g1;
    }
    Err(Error::Domain("packet centres never meet within the schedule".into()))
}

/// Fringe contrast and whether fringes were found at all.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Visibility<T> {
    pub value: T,
    pub fringes: bool,
}

/// `(P_max - P_min)/(P_max + P_min)` around the strongest fringe within one
/// standard deviation of the mean position. Fewer than three maxima there
/// count as no fringes and give zero.
pub fn fringe_visibility<T: Real>(rho: &PositionDensityMatrix<T>) -> Visibility<T> {
    let none = Visibility {
        value: T::zero(),
        fringes: false,
    };
    let p = rho.diagonal();
    let q = &rho.q;
    let n = p.len();
    let total: T = p.iter().copied().sum();
    if !(total > T::zero()) {
        return none;
    }
    let mean = q.iter().zip(&p).map(|(x, w)| *x * *w).sum::<T>() / total;
    let var = q.iter().zip(&p).map(|(x, w)| (*x - mean) * (*x - mean) * *w).sum::<T>() / total;
    let sd = var.max(T::zero()).sqrt();
    let peak = p.iter().fold(T::zero(), |m, v| m.max(*v));
    let floor = peak * lit::<T>(1e-6);
    let maxima: Vec<usize> = (1..n - 1)
        .filter(|&i| (q[i] - mean).abs() <= sd && p[i] > floor && p[i] > p[i - 1] && p[i] >= p[i + 1])
        .collect();
    if maxima.len() < 3 {
        return none;
    }
    let top = maxima
        .iter()
        .copied()
        .fold(maxima[0], |b, i| if p[i] > p[b] { i } else { b });
    let mut l = top;
    while l > 0 && p[l - 1] <= p[l] {
        l -= 1;
    }
    let mut r = top;
    while r + 1 < n && p[r + 1] <= p[r] {
        r += 1;
    }
    let p_min = lit::<T>(0.5) * (p[l] + p[r]);
    let p_max = p[top];
    Visibility {
        value: (p_max - p_min) / (p_max + p_min),
        fringes: true,
    }
}

/// Size of the neglected field-driven motion relative to `⟨q²⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForcingDiagnostic<T> {
    /// `ε² ∫ ĥ² ω / (2M²(ω² - Ω̃²)²) dk`.
    pub delta_q2: T,
    pub relative: T,
    /// `Ω̃/m`.
    pub bound: T,
    pub within: bool,
}

/// Vacuum-driven spread of the oscillator compared with `q2`.
pub fn forcing_diagnostic<T: Real>(bath: &BathSpec<T>, eps: T, omega: T, q2: T) -> Result<ForcingDiagnostic<T>> {
    let r = renormalization(bath, eps, omega)?;
    if r.omega_tilde >= bath.mass() {
        return Err(Error::Domain("dressed frequency is not below the bath mass".into()));
    }
    let m2 = bath.mass() * bath.mass();
    let w2 = r.omega_tilde * r.omega_tilde;
    let two_mm = lit::<T>(2.0) * r.mass_factor * r.mass_factor;
    let integral = bath.line_integral(
        |k| {
            let e2 = k * k + m2;
            let d = e2 - w2;
            e2.sqrt() / (two_mm * d * d)
        },
        default_tolerance(),
    )?;
    let delta_q2 = eps * eps * integral.value;
    let relative = delta_q2 / q2;
    let bound = r.omega_tilde / bath.mass();
    Ok(ForcingDiagnostic {
        delta_q2,
        relative,
        bound,
        within: relative <= bound,
    })
}

/// Long-format CSV of `P(q)` for each matrix: `t,q,P`.
pub fn write_diagonal_csv<T: Real, W: Write>(frames: &[PositionDensityMatrix<T>], mut w: W) -> io::Result<()> {
    writeln!(w, "t,q,P")?;
    for f in frames {
        for (q, p) in f.q.iter().zip(f.diagonal()) {
            writeln!(w, "{:e},{:e},{:e}", to_f64(f.time), to_f64(*q), to_f64(p))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(center: f64, momentum: f64, width: f64, points: usize) -> OscillatorSpec<f64> {
        let one = Complex::new(1.0, 0.0);
        let packets = vec![
            GaussianPacket::new(-center, momentum, width, one).unwrap(),
            GaussianPacket::new(center, -momentum, width, one).unwrap(),
        ];
        OscillatorSpec::new(1.0, packets, PositionGrid::new(-12.0, 12.0, points).unwrap()).unwrap()
    }

    #[test]
    fn zero_coupling_is_bare() {
        let bath = BathSpec::<f64>::new(10.0, 0.1).unwrap();
        let r = renormalization(&bath, 0.0, 2.0).unwrap();
        assert_eq!((r.mass_factor, r.omega_tilde, r.kernel_coeff), (1.0, 2.0, 0.0));
        let c = RenormalizationCoefficients::new(&bath).unwrap();
        assert!((c.profile_norm - 20.0).abs() < 1e-8);
        let (a, b) = (c.at(0.3, 1.0), c.at(0.6, 1.0));
        assert!(((b.mass_factor - 1.0) / (a.mass_factor - 1.0) - 4.0).abs() < 1e-12);
        assert!((b.kernel_coeff / a.kernel_coeff - 4.0).abs() < 1e-12);
    }

    #[test]
    fn spec_normalizes_weights() {
        let s = pair(4.0, 0.0, 0.25, 1024);
        let states: Vec<_> = s.packets().iter().map(PacketState::initial).collect();
        let psi = superpose(&s, &states);
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>() * s.grid().spacing();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uncovered_packet_is_rejected() {
        let one = Complex::new(1.0, 0.0);
        let p = GaussianPacket::new(11.0, 0.0, 0.5, one).unwrap();
        let g = PositionGrid::new(-12.0, 12.0, 64).unwrap();
        assert!(matches!(OscillatorSpec::new(1.0, vec![p], g), Err(Error::Domain(_))));
    }

    #[test]
    fn exact_step_matches_rk4() {
        let p = GaussianPacket::<f64>::new(1.0, 0.5, 0.3, Complex::new(1.0, 0.0)).unwrap();
        let mut a = PacketState::initial(&p);
        let mut b = a;
        let h = 1e-3;
        for _ in 0..3000 {
            a.exact_step(1.3, 1.2, h);
            b.rk4_step(1.3, [1.2; 3], h);
        }
        assert!((a.q - b.q).abs() < 1e-10 && (a.p - b.p).abs() < 1e-10);
        assert!((a.a - b.a).norm() < 1e-10);
        assert!((a.gamma - b.gamma).norm() < 1e-9);
    }

    #[test]
    fn free_packet_follows_textbook_motion() {
        let spec = {
            let p = GaussianPacket::new(2.0, 1.0, 0.4, Complex::new(1.0, 0.0)).unwrap();
            OscillatorSpec::new(1.5, vec![p], PositionGrid::new(-12.0, 12.0, 256).unwrap()).unwrap()
        };
        let bath = BathSpec::<f64>::new(10.0, 0.1).unwrap();
        let c = RenormalizationCoefficients::new(&bath).unwrap();
        let sched = CouplingSchedule::<f64>::constant(0.0, 5.0).unwrap();
        let t = 3.7;
        let st = propagate_packets(&spec, &c, &sched, t).unwrap()[0];
        let w: f64 = 1.5;
        let (s, co) = (w * t).sin_cos();
        assert!((st.q - (2.0 * co + s / w)).abs() < 1e-10);
        let s0: f64 = 0.4;
        let width2 = s0 * s0 * co * co + s * s / (4.0 * s0 * s0 * w * w);
        assert!((st.width() - width2.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn opposite_kicks_meet_after_half_period() {
        let bath = BathSpec::<f64>::new(10.0, 0.1).unwrap();
        let s = pair(0.0, 3.0, 0.5, 512);
        let sched = CouplingSchedule::<f64>::constant(0.0, 5.0).unwrap();
        let c = RenormalizationCoefficients::new(&bath).unwrap();
        let st = propagate_packets(&s, &c, &sched, std::f64::consts::PI).unwrap();
        assert!((st[0].q - st[1].q).abs() < 1e-10);
        let rest = pair(4.0, 0.0, 0.25, 512);
        let t = recombination_time(&rest, &bath, &sched, 0, 1).unwrap();
        assert!((t - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
    }

    #[test]
    fn kernel_keeps_trace_and_hermiticity() {
        let bath = BathSpec::<f64>::new(10.0, 0.1).unwrap();
        let s = pair(4.0, 0.0, 0.25, 256);
        let sched = CouplingSchedule::<f64>::constant(0.5, 2.0).unwrap();
        let rho = evolve_reduced(&s, &bath, &sched, 1.0).unwrap();
        assert!((rho.trace() - 1.0).abs() < 1e-6);
        assert!(rho.hermiticity_defect() < 1e-10);
        assert!(rho.diagonal().iter().all(|p| *p >= -1e-10));
    }

    #[test]
    fn coherent_overlap_shows_full_fringes() {
        let bath = BathSpec::<f64>::new(10.0, 0.1).unwrap();
        let s = pair(4.0, 0.0, 0.25, 2048);
        let sched = CouplingSchedule::<f64>::constant(0.0, 3.0).unwrap();
        let rho = evolve_reduced(&s, &bath, &sched, std::f64::consts::FRAC_PI_2).unwrap();
        let v = fringe_visibility(&rho);
        assert!(v.fringes && v.value > 0.99, "{v:?}");
        let mixture = DMatrix::<f64>::identity(2, 2);
        let mixed = evolve_with_packet_coherence(&s, &bath, &sched, std::f64::consts::FRAC_PI_2, &mixture).unwrap();
        assert!((mixed.trace() - 1.0).abs() < 1e-6);
        assert!(fringe_visibility(&mixed).value <= 0.02);
        let apart = evolve_reduced(&s, &bath, &sched, 0.0).unwrap();
        assert!(fringe_visibility(&apart).value <= 0.01);
    }

    #[test]
    fn forcing_is_small_for_heavy_bath() {
        let bath = BathSpec::<f64>::new(100.0, 0.01).unwrap();
        let r = renormalization(&bath, 0.5, 1.0).unwrap();
        let q2 = 0.5 / (r.mass_factor * r.omega_tilde);
        let d = forcing_diagnostic(&bath, 0.5, 1.0, q2).unwrap();
        assert!(d.within && d.relative > 0.0, "{d:?}");
    }
}
