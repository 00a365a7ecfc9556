//! Quadrature kernels: globally adaptive Gauss–Kronrod (21 point) and
//! Gauss–Legendre node generation.

use crate::error::{Error, Result};
use crate::num::{lit, to_f64, Real};

// Kronrod abscissae for the 21-point rule; odd indices are the embedded
// 10-point Gauss abscissae. Values from QUADPACK qk21.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral<T> {
    pub value: T,
    pub error: T,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

fn gauss_kronrod_21<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> Panel<T> {
    let half = lit::<T>(0.5);
    let center = half * (a + b);
    let half_len = half * (b - a);
    let f_center = f(center);
    let mut kronrod = f_center * lit(WGK[10]);
    let mut gauss = T::zero();
    for j in 0..10 {
        let x = half_len * lit(XGK[j]);
        let sum = f(center - x) + f(center + x);
        kronrod = kronrod + sum * lit(WGK[j]);
        if j % 2 == 1 {
            gauss = gauss + sum * lit(WG[j / 2]);
        }
    }
    let value = kronrod * half_len;
    let raw = ((kronrod - gauss) * half_len).abs();
    // QUADPACK-style rescaling of the raw Gauss/Kronrod difference.
    let scaled = (lit::<T>(200.0) * raw).powf(lit(1.5));
    let error = if scaled < raw { scaled } else { raw };
    let floor = lit::<T>(50.0) * T::epsilon() * value.abs();
    Panel {
        a,
        b,
        value,
        error: if error > floor { error } else { floor },
    }
}

/// Globally adaptive Gauss–Kronrod integration over a union of panels.
///
/// `breakpoints` must be strictly increasing; each consecutive pair is an
/// initial panel. The panel with the largest error estimate is bisected until
/// the summed error falls below `tol` or `max_panels` is reached.
pub fn integrate_adaptive<T, F>(f: F, breakpoints: &[T], tol: T, max_panels: usize) -> Result<Integral<T>>
where
    T: Real,
    F: Fn(T) -> T,
{
    if breakpoints.len() < 2 {
        return Err(Error::InvalidParameter("need at least two breakpoints".into()));
    }
    if !(tol > T::zero()) {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }
    if breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter(
            "breakpoints must be strictly increasing".into(),
        ));
    }

    let mut panels: Vec<Panel<T>> = breakpoints
        .windows(2)
        .map(|w| gauss_kronrod_21(&f, w[0], w[1]))
        .collect();
    let mut evaluations = 21 * panels.len();

    loop {
        let error: T = panels.iter().map(|p| p.error).sum();
        if error <= tol {
            let value = panels.iter().map(|p| p.value).sum();
            return Ok(Integral {
                value,
                error,
                evaluations,
            });
        }
        if panels.len() >= max_panels {
            let value: T = panels.iter().map(|p| p.value).sum();
            return Err(Error::QuadratureFailure {
                estimate: to_f64(value),
                error: to_f64(error),
            });
        }
        let (worst, _) =
            panels.iter().enumerate().fold(
                (0, T::neg_infinity()),
                |acc, (i, p)| if p.error > acc.1 { (i, p.error) } else { acc },
            );
        let p = panels.swap_remove(worst);
        let mid = lit::<T>(0.5) * (p.a + p.b);
        if !(mid > p.a && mid < p.b) {
            // Interval cannot be split further in this precision.
            let value: T = panels.iter().map(|q| q.value).sum::<T>() + p.value;
            return Err(Error::QuadratureFailure {
                estimate: to_f64(value),
                error: to_f64(error),
            });
        }
        panels.push(gauss_kronrod_21(&f, p.a, mid));
        panels.push(gauss_kronrod_21(&f, mid, p.b));
        evaluations += 42;
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, computed in `f64` by
/// Newton iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_integrates_polynomials_exactly() {
        for n in 1..=12 {
            let (x, w) = gauss_legendre(n);
            assert!(x.windows(2).all(|p| p[1] > p[0]));
            for deg in 0..(2 * n) {
                let got: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(deg as i32)).sum();
                let want = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((got - want).abs() < 1e-13, "n={n} deg={deg} got={got}");
            }
        }
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        // ∫_0^1 1/sqrt(x) dx has an endpoint singularity.
        let r = integrate_adaptive(|x: f64| 1.0 / x.sqrt(), &[0.0, 1.0], 1e-9, 2000).unwrap();
        assert!((r.value - 2.0).abs() < 1e-8);
    }

    #[test]
    fn adaptive_reports_failure_with_best_estimate() {
        let err = integrate_adaptive(|x: f64| (1.0 / x).sin() / x, &[1e-6, 1.0], 1e-14, 4).unwrap_err();
        assert!(matches!(err, Error::QuadratureFailure { .. }));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(integrate_adaptive(|x: f64| x, &[1.0, 0.0], 1e-8, 10).is_err());
        assert!(integrate_adaptive(|x: f64| x, &[0.0, 1.0], 0.0, 10).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let r = integrate_adaptive(|x: f32| x.exp(), &[0.0f32, 1.0], 1e-4, 100).unwrap();
        assert!((r.value - (1f32.exp() - 1.0)).abs() < 1e-5);
    }
}
