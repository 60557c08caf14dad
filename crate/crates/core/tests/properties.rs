use deltaprime::ivp::{LinearOde, SolverConfig};
use deltaprime::profiles::{classify, named, DEFAULT_MOMENT_TOL};
use deltaprime::resonance::{self, ScanOptions};
use deltaprime::scattering::scatter;
use deltaprime::spectra::{eigen_limit, BoundaryCoupling, ConfiningPotential, SpectrumOptions};
use proptest::prelude::*;

fn profile_name() -> impl Strategy<Value = &'static str> {
    prop_oneof![Just("step"), Just("odd_cubic"), Just("asymmetric_bump"), Just("even_parabola")]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn flux_is_conserved(name in profile_name(), alpha in -80.0..80.0f64, le in -3.0..-0.5f64, k in 0.05..6.0f64) {
        let p = named(name).unwrap();
        let s = scatter(&p, alpha, 10f64.powf(le), k, &resonance::default_solver()).unwrap();
        prop_assert!(s.unitarity_defect().abs() < 1e-10);
    }

    #[test]
    fn propagators_are_unimodular(name in profile_name(), alpha in -50.0..50.0f64) {
        let p = named(name).unwrap();
        let ode = LinearOde::new(|x| alpha * p.evaluate(x)).with_breakpoints(p.breakpoints());
        let m = ode.propagator(-1.0, 1.0, &resonance::default_solver()).unwrap();
        prop_assert!((m.det() - 1.0).abs() < 1e-9 * m.0[0][0].abs().max(m.0[1][1].abs()).max(1.0));
    }

    #[test]
    fn scaling_scales_dipole_moment(name in profile_name(), c in -4.0..4.0f64) {
        let p = named(name).unwrap();
        let a = classify(&p, DEFAULT_MOMENT_TOL);
        let b = classify(&p.scaled(c), DEFAULT_MOMENT_TOL);
        prop_assert!((b.m1 - c * a.m1).abs() < 1e-12);
        prop_assert!((b.m0 - c * a.m0).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn theta_spectrum_is_bounded_by_split(theta in prop_oneof![-40.0..-0.05f64, 0.05..40.0f64]) {
        let u = ConfiningPotential::polynomial(&[0.0, 1.0, 1.0], 8.0).unwrap();
        let opts = SpectrumOptions::default();
        let s = eigen_limit(&u, &BoundaryCoupling::theta(theta).unwrap(), 3, &opts).unwrap();
        let split = eigen_limit(&u, &BoundaryCoupling::DirichletSplit, 3, &opts).unwrap();
        for (a, b) in s.eigenvalues.iter().zip(&split.eigenvalues) {
            prop_assert!(*a <= b + 1e-8);
        }
    }

    #[test]
    fn mirrored_problem_inverts_theta(theta in 0.1..10.0f64) {
        // U(x) -> U(-x) with θ -> 1/θ is a unitary equivalence
        let opts = SpectrumOptions::default();
        let u = ConfiningPotential::polynomial(&[0.0, 1.0, 1.0], 8.0).unwrap();
        let v = ConfiningPotential::polynomial(&[0.0, -1.0, 1.0], 8.0).unwrap();
        let a = eigen_limit(&u, &BoundaryCoupling::theta(theta).unwrap(), 3, &opts).unwrap();
        let b = eigen_limit(&v, &BoundaryCoupling::theta(1.0 / theta).unwrap(), 3, &opts).unwrap();
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            prop_assert!((x - y).abs() < 1e-7);
        }
    }
}

#[test]
fn reflected_profile_inverts_coupling() {
    let opts = ScanOptions::default();
    let p = named("asymmetric_bump").unwrap();
    let q = p.reflected();
    let a = resonance::resonance_scan(&p, -40.0, 40.0, &opts).unwrap();
    let b = resonance::resonance_scan(&q, -40.0, 40.0, &opts).unwrap();
    assert_eq!(a.points.len(), b.points.len());
    for (x, y) in a.points.iter().zip(&b.points) {
        assert!((x.alpha - y.alpha).abs() < 1e-9 * x.alpha.abs().max(1.0));
        assert!((x.theta * y.theta - 1.0).abs() < 1e-8);
    }
}

#[test]
fn solver_config_rejects_nonsense() {
    assert!(SolverConfig::with_tolerances(-1.0, 1e-12).validate().is_err());
    assert!(SolverConfig::with_tolerances(1e-10, 0.0).validate().is_err());
}
