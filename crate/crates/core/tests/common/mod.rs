//! Reference integrals shared by the integration suites.

#![allow(dead_code)]

/// Composite Simpson rule with `n` (even) intervals.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    assert!(n.is_multiple_of(2));
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let x = a + h * i as f64;
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
    }
    s * h / 3.0
}

/// `2∫_0^∞ e^{-Γk}/√(k²+m²) dk` after `k = m sinh u`, which turns the
/// integrand into the smooth `e^{-Γm sinh u}`.
pub fn d_reference(mass: f64, cutoff: f64, n: usize) -> f64 {
    let a = cutoff * mass;
    let upper = (60.0 / a).asinh();
    2.0 * simpson(|u| (-a * u.sinh()).exp(), 0.0, upper, n)
}

/// `∫ e^{-Γ|k|}/(k²+m²) dk` over the line, after `k = m tan u`.
pub fn k_reference(mass: f64, cutoff: f64, n: usize) -> f64 {
    let a = cutoff * mass;
    let half_pi = std::f64::consts::FRAC_PI_2;
    2.0 / mass
        * simpson(
            |u| if u >= half_pi { 0.0 } else { (-a * u.tan()).exp() },
            0.0,
            half_pi,
            n,
        )
}

/// Per-mode Fock-series overlap `e^{-(|a|²+|b|²)/2} Σ_{n<d} (a* b)ⁿ/n!`.
pub fn fock_series_overlap(
    a: &[num_complex::Complex64],
    b: &[num_complex::Complex64],
    d: usize,
) -> num_complex::Complex64 {
    let mut total = num_complex::Complex64::new(1.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let z = x.conj() * y;
        let mut term = num_complex::Complex64::new(1.0, 0.0);
        let mut sum = term;
        for n in 1..d {
            term = term * z / n as f64;
            sum += term;
        }
        total *= sum * (-(x.norm_sqr() + y.norm_sqr()) / 2.0).exp();
    }
    total
}
