//! Invariants checked over randomized inputs.

mod common;

use num_complex::Complex64;
use proptest::prelude::*;
use recoherence::bath::{default_tolerance, ModeGrid, SegmentShape};
use recoherence::dephasing::{run_analytic, run_ode_oracle_with, OdeOptions};
use recoherence::oscillator::{
    evolve_reduced, evolve_with_packet_coherence, forcing_diagnostic, fringe_visibility, renormalization,
    GaussianPacket, OscillatorSpec, PositionGrid,
};
use recoherence::spin_boson::{run_adiabatic, SpinBosonSpec};
use recoherence::sudden::{apply_sudden_rotation, BranchEvolution, RotationEvent, SuddenSetup};
use recoherence::{
    adiabaticity_metric, decoherence_exponent, pairwise_log_overlap, spectral_integral, BathSpec, BlochState, Branch,
    BranchAmplitudes, CouplingSchedule,
};

use common::d_reference;

fn amplitudes(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.5f64..1.5, -1.5f64..1.5).prop_map(|(r, i)| Complex64::new(r, i)), n)
}

fn unit_vector() -> impl Strategy<Value = [f64; 3]> {
    (0.0f64..std::f64::consts::PI, 0.0f64..std::f64::consts::TAU)
        .prop_map(|(th, ph)| [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn overlap_is_hermitian_and_bounded(a in amplitudes(4), b in amplitudes(4), w in prop::collection::vec(0.1f64..2.0, 4)) {
        let g = ModeGrid::from_nodes(vec![-1.0, 0.0, 1.0, 2.0], w).unwrap();
        let x = BranchAmplitudes::new(a, g.id(), Branch::Plus).unwrap();
        let y = BranchAmplitudes::new(b, g.id(), Branch::Minus).unwrap();
        let ab = pairwise_log_overlap(&x, &y, g.weights()).unwrap();
        let ba = pairwise_log_overlap(&y, &x, g.weights()).unwrap();
        prop_assert!((ab.log_overlap - ba.log_overlap.conj()).norm() < 1e-12);
        prop_assert!(ab.abs_j() <= 1.0 + 1e-15);
        let opp = pairwise_log_overlap(&x, &x.negated(), g.weights()).unwrap();
        prop_assert!(opp.log_overlap.im.abs() < 1e-12);
        prop_assert!(opp.j().re > 0.0);
    }

    #[test]
    fn exponent_is_negative_off_zero(eps in 0.0f64..3.0) {
        let bath = BathSpec::<f64>::new(10.0, 0.01).unwrap();
        let e = decoherence_exponent(&bath, eps).unwrap();
        prop_assert!(e <= 0.0);
        prop_assert_eq!(e == 0.0, eps == 0.0);
    }

    #[test]
    fn schedule_rate_integrates_to_jumps(
        durations in prop::collection::vec(0.5f64..10.0, 1..5),
        levels in prop::collection::vec(0.0f64..3.0, 5),
        smooth in prop::collection::vec(any::<bool>(), 5),
    ) {
        let mut b = CouplingSchedule::starting_at(levels[0]);
        for (i, d) in durations.iter().enumerate() {
            b = if smooth[i] { b.smooth_ramp(*d, levels[i + 1]) } else { b.linear_ramp(*d, levels[i + 1]) };
        }
        let s = b.build().unwrap();
        for seg in s.segments() {
            let n = 2000;
            let h = seg.duration() / n as f64;
            let mut acc = 0.0;
            for i in 0..n {
                let (t0, t1) = (seg.start + h * i as f64, seg.start + h * (i + 1) as f64);
                acc += 0.5 * h * (seg.rate_at(t0) + seg.rate_at(t1));
            }
            prop_assert!((acc - (seg.eps_end - seg.eps_start)).abs() < 1e-10, "{:?}: {}", seg.shape, acc);
        }
    }
}

#[test]
fn spectral_integral_decreases_in_cutoff_and_mass() {
    let masses: Vec<f64> = (0..10).map(|i| 0.5 + 0.7 * i as f64).collect();
    let cutoffs: Vec<f64> = (0..10).map(|i| 1e-3 * 2f64.powi(i)).collect();
    let d = |m: f64, g: f64| {
        spectral_integral(&BathSpec::<f64>::new(m, g).unwrap(), 1e-10)
            .unwrap()
            .d
    };
    for g in [1e-3, 0.1] {
        let v: Vec<f64> = masses.iter().map(|m| d(*m, g)).collect();
        assert!(v.windows(2).all(|p| p[1] < p[0]), "{v:?}");
    }
    for m in [1.0, 10.0] {
        let v: Vec<f64> = cutoffs.iter().map(|g| d(m, *g)).collect();
        assert!(v.windows(2).all(|p| p[1] < p[0]), "{v:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn adaptive_quadrature_agrees_with_simpson(log_gm in -4.0f64..1.0, mass in 0.5f64..20.0) {
        let cutoff = 10f64.powf(log_gm) / mass;
        let bath = BathSpec::<f64>::new(mass, cutoff).unwrap();
        let r = spectral_integral(&bath, default_tolerance()).unwrap();
        let reference = d_reference(mass, cutoff, 200_000);
        prop_assert!((r.d - reference).abs() <= r.quadrature_error + 1e-9 * reference, "{} vs {}", r.d, reference);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn analytic_and_mode_resolved_dephasing_agree(
        up in 8.0f64..30.0,
        down in 8.0f64..30.0,
        hold in 0.0f64..10.0,
        peak in 0.3f64..2.0,
        rho in unit_vector(),
    ) {
        let bath = BathSpec::<f64>::new(10.0, 0.01).unwrap();
        let s = CouplingSchedule::starting_at(0.0).smooth_ramp(up, peak).hold(hold).smooth_ramp(down, 0.0).build().unwrap();
        let rho0 = BlochState::new(rho, 0.0).unwrap();
        let a = run_analytic(&bath, &s, &rho0, 0.25).unwrap();
        let o = run_ode_oracle_with(&bath, &s, &rho0, &OdeOptions::new(0.01).sampled_every(0.25)).unwrap();
        let metric = adiabaticity_metric(&bath, &s).unwrap();
        prop_assert_eq!(a.samples.len(), o.samples.len());
        let len0 = rho0.length();
        for (x, y) in a.samples.iter().zip(&o.samples) {
            prop_assert!((x.j - y.j).norm() <= metric);
            for z in [x, y] {
                prop_assert!((z.state.rho[2] - rho[2]).abs() < 1e-12);
                prop_assert!(z.state.length() <= len0 + 1e-12);
            }
        }
    }

    #[test]
    fn spin_length_returns_each_half_turn(phi in 0.0f64..std::f64::consts::TAU, target in 0.05f64..0.9) {
        let bath = BathSpec::<f64>::new(10.0, 0.01).unwrap();
        let eps = spectral_integral(&bath, 1e-10).unwrap().eps_for_overlap(target).unwrap();
        let (omega, n) = (0.5, 64usize);
        let dt = std::f64::consts::PI / (omega * target * n as f64);
        let s = CouplingSchedule::constant(eps, 2.0 * n as f64 * dt + 1e-9).unwrap();
        let rho0 = BlochState::new([0.0, phi.sin(), phi.cos()], 0.0).unwrap();
        let tr = run_adiabatic(&SpinBosonSpec::from_bloch(omega, bath, s, &rho0).unwrap(), dt).unwrap();
        let l0 = tr.samples[0].state.length();
        for k in [n, 2 * n] {
            prop_assert!((tr.samples[k].state.length() - l0).abs() < 1e-9);
        }
        for x in &tr.samples {
            let r = x.state.rho;
            prop_assert!(r[0] * r[0] + r[1] * r[1] + r[2] * r[2] <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn visibility_ignores_global_phase(phase in 0.0f64..std::f64::consts::TAU) {
        let bath = BathSpec::<f64>::new(10.0, 0.1).unwrap();
        let s = CouplingSchedule::constant(0.5, 3.0).unwrap();
        let grid = PositionGrid::new(-12.0, 12.0, 512).unwrap();
        let make = |c: Complex64| {
            let p = vec![
                GaussianPacket::new(-4.0, 0.0, 0.25, c).unwrap(),
                GaussianPacket::new(4.0, 0.0, 0.25, c * Complex64::new(0.8, 0.3)).unwrap(),
            ];
            OscillatorSpec::new(1.0, p, grid).unwrap()
        };
        let t = 1.6;
        let v0 = fringe_visibility(&evolve_reduced(&make(Complex64::new(1.0, 0.0)), &bath, &s, t).unwrap());
        let v1 = fringe_visibility(&evolve_reduced(&make(Complex64::from_polar(1.0, phase)), &bath, &s, t).unwrap());
        prop_assert!(v0.fringes);
        prop_assert!((v0.value - v1.value).abs() < 1e-9);
    }
}

#[test]
fn kernel_keeps_trace_hermiticity_and_positivity() {
    let bath = BathSpec::<f64>::new(10.0, 0.1).unwrap();
    let s = CouplingSchedule::starting_at(0.0)
        .smooth_ramp(2.0, 0.8)
        .hold(1.0)
        .build()
        .unwrap();
    let p = vec![
        GaussianPacket::new(-3.0, 1.0, 0.4, Complex64::new(1.0, 0.0)).unwrap(),
        GaussianPacket::new(2.5, -0.5, 0.3, Complex64::new(0.2, 0.9)).unwrap(),
    ];
    let spec = OscillatorSpec::new(1.0, p, PositionGrid::new(-12.0, 12.0, 400).unwrap()).unwrap();
    for t in [0.0, 1.0, 2.5] {
        let rho = evolve_reduced(&spec, &bath, &s, t).unwrap();
        let n = spec.packets().len();
        let bare =
            evolve_with_packet_coherence(&spec, &bath, &s, t, &nalgebra::DMatrix::from_element(n, n, 1.0)).unwrap();
        assert!((rho.trace() - bare.trace()).abs() < 1e-14);
        assert!((rho.trace() - 1.0).abs() < 1e-6);
        assert!(rho.hermiticity_defect() < 1e-10);
        assert!(rho.diagonal().iter().all(|p| *p >= -1e-10));
    }
}

#[test]
fn forcing_stays_below_dressed_frequency_ratio() {
    for (mass, eps) in [(100.0, 0.5), (200.0, 1.0), (150.0, 2.0)] {
        let bath = BathSpec::<f64>::new(mass, 0.01).unwrap();
        let r = renormalization(&bath, eps, 1.0).unwrap();
        assert!(mass / r.omega_tilde >= 100.0);
        let q2 = 0.5 / (r.mass_factor * r.omega_tilde);
        let d = forcing_diagnostic(&bath, eps, 1.0, q2).unwrap();
        assert!(d.within, "{d:?}");
    }
}

#[test]
fn sudden_outcomes_are_physical_and_periodic() {
    let bath = BathSpec::<f64>::new(10.0, 0.01).unwrap();
    let eps = spectral_integral(&bath, 1e-10).unwrap().eps_for_overlap(0.4).unwrap();
    let states = [
        BlochState::transverse(),
        BlochState::up(),
        BlochState::new([0.0, 0.0, -1.0], 0.0).unwrap(),
        BlochState::new([0.3, -0.5, 0.4], 0.0).unwrap(),
        BlochState::new([0.0, 0.6, -0.8], 0.0).unwrap(),
    ];
    for rho0 in states {
        let setup = SuddenSetup {
            bath: bath.clone(),
            eps,
            rho0,
            evolution: BranchEvolution::Ideal,
        };
        for i in 0..36 {
            let theta = std::f64::consts::TAU * i as f64 / 36.0;
            let out = apply_sudden_rotation(&setup, &RotationEvent::new(theta, 0.0).unwrap(), 20.0).unwrap();
            let (lo, _) = out.bloch_final.eigenvalues();
            assert!(lo >= -1e-12, "θ = {theta}: eigenvalue {lo}");
            if rho0.rho[2] == 0.0 {
                let f = out.real_loss_factor.unwrap();
                assert!((0.0..=1.0 + 1e-9).contains(&f), "θ = {theta}: {f}");
            }
            assert!(out.overlap_table.rows.iter().all(|r| r.direct.norm() <= 1.0 + 1e-12));
            let again = apply_sudden_rotation(
                &setup,
                &RotationEvent::new(theta + std::f64::consts::TAU, 0.0).unwrap(),
                20.0,
            )
            .unwrap();
            assert!((again.bloch_final.vector() - out.bloch_final.vector()).norm() < 1e-12);
        }
    }
}

#[test]
fn segment_shapes_are_named() {
    let names = [
        SegmentShape::LinearRamp,
        SegmentShape::SmoothRamp,
        SegmentShape::Plateau,
        SegmentShape::Step,
    ]
    .map(SegmentShape::name);
    assert_eq!(names, ["linear-ramp", "smooth-ramp", "plateau", "step"]);
}

#[test]
fn eigenstate_flip_keeps_purity() {
    let bath = BathSpec::<f64>::new(10.0, 0.01).unwrap();
    let eps = spectral_integral(&bath, 1e-10).unwrap().eps_for_overlap(0.3).unwrap();
    for rho0 in [BlochState::up(), BlochState::new([0.0, 0.0, -1.0], 0.0).unwrap()] {
        let setup = SuddenSetup {
            bath: bath.clone(),
            eps,
            rho0,
            evolution: BranchEvolution::Ideal,
        };
        for theta in [0.0, std::f64::consts::PI] {
            let out = apply_sudden_rotation(&setup, &RotationEvent::new(theta, 0.0).unwrap(), 20.0).unwrap();
            assert!((out.bloch_final.length() - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn entropy_near_maximal_when_overlap_vanishes() {
    let bath = BathSpec::<f64>::new(10.0, 0.01).unwrap();
    let s = CouplingSchedule::constant(2.0, 1.0).unwrap();
    let tr = run_analytic(&bath, &s, &BlochState::transverse(), 0.5).unwrap();
    let last = tr.last().unwrap();
    assert!(last.j.norm() < 1e-6);
    assert!((last.entropy - std::f64::consts::LN_2).abs() < 1e-3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn fock_longitudinal_component_is_conserved_without_tunneling(
        rho in unit_vector(),
        peak in 0.2f64..1.5,
        h in prop::collection::vec(0.3f64..1.5, 2),
    ) {
        let schedule = CouplingSchedule::starting_at(0.0).smooth_ramp(2.0, peak).hold(1.0).build().unwrap();
        let cfg = recoherence::OracleConfig {
            fock_dim: 8,
            mode_freqs: vec![6.0, 9.0],
            mode_couplings: h,
            dt: 0.004,
            schedule,
            omega: 0.0,
        };
        let tr = recoherence::evolve_fock(&cfg, &BlochState::new(rho, 0.0).unwrap(), 0.5).unwrap();
        for s in &tr.samples {
            prop_assert!((s.rho[2] - rho[2]).abs() < 1e-10);
        }
    }
}
