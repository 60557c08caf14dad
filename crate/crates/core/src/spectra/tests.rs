use super::*;
use crate::profiles::named;

fn harmonic() -> ConfiningPotential {
    ConfiningPotential::polynomial(&[0.0, 0.0, 1.0], 8.0).unwrap()
}

fn shifted() -> ConfiningPotential {
    ConfiningPotential::polynomial(&[0.0, 1.0, 1.0], 8.0).unwrap()
}

/// Eigenvalues of the symmetric tridiagonal FD matrix of `-v'' + U v` on
/// `(lo, hi)` with Dirichlet ends, by Sturm-sequence bisection.
fn fd_eigenvalues(u: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize, count: usize) -> Vec<f64> {
    let h = (hi - lo) / n as f64;
    let diag: Vec<f64> = (1..n).map(|i| 2.0 / (h * h) + u(lo + i as f64 * h)).collect();
    let off = -1.0 / (h * h);
    let below = |x: f64| {
        let mut c = 0;
        let mut d = diag[0] - x;
        if d < 0.0 {
            c += 1;
        }
        for di in &diag[1..] {
            let prev = if d == 0.0 { 1e-300 } else { d };
            d = di - x - off * off / prev;
            if d < 0.0 {
                c += 1;
            }
        }
        c
    };
    (1..=count)
        .map(|k| {
            let (mut a, mut b) = (-100.0, 1000.0);
            for _ in 0..100 {
                let m = 0.5 * (a + b);
                if below(m) >= k {
                    b = m;
                } else {
                    a = m;
                }
            }
            0.5 * (a + b)
        })
        .collect()
}

/// Richardson-extrapolated FD eigenvalues.
fn fd_oracle(u: impl Fn(f64) -> f64 + Copy, lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let coarse = fd_eigenvalues(u, lo, hi, 8000, count);
    let fine = fd_eigenvalues(u, lo, hi, 16000, count);
    coarse.iter().zip(&fine).map(|(c, f)| (4.0 * f - c) / 3.0).collect()
}

#[test]
fn fd_oracle_reproduces_oscillator() {
    let ev = fd_oracle(|x| x * x, 0.0, 8.0, 3);
    for (e, exact) in ev.iter().zip([3.0, 7.0, 11.0]) {
        assert!((e - exact).abs() < 1e-6, "{e}");
    }
}

#[test]
fn full_line_oscillator() {
    let s = eigen_limit(&harmonic(), &BoundaryCoupling::theta(1.0).unwrap(), 5, &SpectrumOptions::default()).unwrap();
    for (k, e) in s.eigenvalues.iter().enumerate() {
        assert!((e - (2 * k + 1) as f64).abs() < 1e-6, "{k}: {e}");
    }
    assert_eq!(s.indices, vec![1, 2, 3, 4, 5]);
}

#[test]
fn dirichlet_split_half_oscillator() {
    let s = eigen_limit(&harmonic(), &BoundaryCoupling::DirichletSplit, 6, &SpectrumOptions::default()).unwrap();
    let expected = [3.0, 3.0, 7.0, 7.0, 11.0, 11.0];
    for (e, x) in s.eigenvalues.iter().zip(expected) {
        assert!((e - x).abs() < 1e-6, "{e}");
    }
    assert!(s.flags.iter().all(|f| *f == EigenFlag::NearDegenerate));
    assert!(s.support.contains(&Support::Left) && s.support.contains(&Support::Right));
}

#[test]
fn split_matches_finite_differences() {
    let u = shifted();
    let s = eigen_limit(&u, &BoundaryCoupling::DirichletSplit, 5, &SpectrumOptions::default()).unwrap();
    let mut oracle = fd_oracle(|x| x * x + x, -8.0, 0.0, 5);
    oracle.extend(fd_oracle(|x| x * x + x, 0.0, 8.0, 5));
    oracle.sort_by(f64::total_cmp);
    for (e, o) in s.eigenvalues.iter().zip(&oracle) {
        assert!((e - o).abs() < 1e-5, "{e} vs {o}");
    }
    assert!(s.flags.iter().all(|f| *f == EigenFlag::Ok));
}

#[test]
fn large_theta_approaches_dirichlet_neumann() {
    // θ → ∞ forces v(-0) → 0 and v'(+0) → 0
    let u = shifted();
    let opts = SpectrumOptions::default();
    let limit = eigen_limit(
        &u,
        &BoundaryCoupling::Separated {
            minus: [0.0, 1.0],
            plus: [1.0, 0.0],
        },
        4,
        &opts,
    )
    .unwrap();
    let mut prev = f64::INFINITY;
    for theta in [10.0, 100.0, 1000.0] {
        let s = eigen_limit(&u, &BoundaryCoupling::theta(theta).unwrap(), 4, &opts).unwrap();
        let gap = s
            .eigenvalues
            .iter()
            .zip(&limit.eigenvalues)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(gap < prev, "theta {theta}: {gap}");
        prev = gap;
    }
    assert!(prev < 1e-3);
}

#[test]
fn theta_levels_below_split_levels() {
    let u = harmonic();
    let opts = SpectrumOptions::default();
    let split = eigen_limit(&u, &BoundaryCoupling::DirichletSplit, 5, &opts).unwrap();
    let neumann = eigen_limit(
        &u,
        &BoundaryCoupling::Separated {
            minus: [1.0, 0.0],
            plus: [1.0, 0.0],
        },
        5,
        &opts,
    )
    .unwrap();
    for theta in [-35.9, -2.0, 0.5, 3.0, 10.0] {
        let s = eigen_limit(&u, &BoundaryCoupling::theta(theta).unwrap(), 5, &opts).unwrap();
        for k in 0..5 {
            assert!(s.eigenvalues[k] <= split.eigenvalues[k] + 1e-8, "theta {theta} k {k}");
            assert!(s.eigenvalues[k] >= neumann.eigenvalues[k] - 1e-8, "theta {theta} k {k}");
        }
    }
}

#[test]
fn kurasov_nizhnik_coupling_solves() {
    let u = harmonic();
    let opts = SpectrumOptions::default();
    for alpha in [-5.0, -1.0, 0.5, 1.0, 3.0, 2.0, -2.0] {
        let bc = BoundaryCoupling::kurasov_nizhnik(alpha);
        let s = eigen_limit(&u, &bc, 3, &opts).unwrap();
        assert_eq!(s.len(), 3);
        assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }
    let s = eigen_limit(&u, &BoundaryCoupling::kurasov_nizhnik(0.0), 3, &opts).unwrap();
    assert!((s.eigenvalues[0] - 1.0).abs() < 1e-6);
    // same diagonal coupling either way
    let t = (2.0 + 1.0) / (2.0 - 1.0);
    let a = eigen_limit(&u, &BoundaryCoupling::kurasov_nizhnik(1.0), 3, &opts).unwrap();
    let b = eigen_limit(&u, &BoundaryCoupling::theta(t).unwrap(), 3, &opts).unwrap();
    for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
        assert!((x - y).abs() < 1e-9);
    }
}

#[test]
fn connected_matrix_with_delta_coupling() {
    // attractive delta: v' jumps by c v with c < 0 gives one level below the oscillator ground state
    let u = harmonic();
    let opts = SpectrumOptions::default();
    let bc = BoundaryCoupling::connected(0.3, [[1.0, 0.0], [-2.0, 1.0]]).unwrap();
    let s = eigen_limit(&u, &bc, 3, &opts).unwrap();
    assert!(s.eigenvalues[0] < 1.0);
    // odd oscillator states do not see a delta at the origin
    assert!((s.eigenvalues[1] - 3.0).abs() < 1e-6, "{:?}", s.eigenvalues);
    assert!(BoundaryCoupling::connected(0.0, [[1.0, 1.0], [1.0, 1.0]]).is_err());
    assert!(BoundaryCoupling::connected(2.0, [[1.0, 0.0], [0.0, 1.0]]).is_err());
}

#[test]
fn eigenfunctions_are_normalized() {
    let u = harmonic();
    let opts = SpectrumOptions::default().with_eigenfunctions();
    for bc in [BoundaryCoupling::theta(-3.0).unwrap(), BoundaryCoupling::DirichletSplit] {
        let s = eigen_limit(&u, &bc, 3, &opts).unwrap();
        for e in s.eigenfunctions.as_ref().unwrap() {
            assert!((e.norm_squared() - 1.0).abs() < 1e-8);
        }
    }
    let s = eigen_limit(&u, &BoundaryCoupling::theta(-3.0).unwrap(), 1, &opts).unwrap();
    let t = s.eigenfunctions.unwrap()[0].trace;
    assert!((t.v_plus - (-3.0) * t.v_minus).abs() < 1e-7 * t.v_minus.abs().max(1e-3));
    assert!((-3.0 * t.dv_plus - t.dv_minus).abs() < 1e-6);
}

#[test]
fn ground_state_shape() {
    let u = harmonic();
    let opts = SpectrumOptions::default().with_eigenfunctions();
    let s = eigen_limit(&u, &BoundaryCoupling::theta(1.0).unwrap(), 1, &opts).unwrap();
    let e = &s.eigenfunctions.unwrap()[0];
    let c = std::f64::consts::PI.powf(-0.25);
    for (x, v) in e.points().step_by(997) {
        assert!((v.abs() - c * (-x * x / 2.0).exp()).abs() < 1e-6, "{x}: {v}");
    }
}

#[test]
fn unperturbed_equals_full_line() {
    let u = shifted();
    let opts = SpectrumOptions::default();
    let limit = eigen_limit(&u, &BoundaryCoupling::theta(1.0).unwrap(), 3, &opts).unwrap();
    let p = named("step").unwrap();
    for eps in [0.2, 0.05] {
        let s = eigen_perturbed(&u, &p, 0.0, eps, (1, 3), &opts).unwrap();
        for (a, b) in s.eigenvalues.iter().zip(&limit.eigenvalues) {
            assert!((a - b).abs() < 1e-8, "eps {eps}: {a} vs {b}");
        }
    }
}

#[test]
fn perturbed_counts_diving_levels() {
    let u = shifted();
    let p = named("step").unwrap();
    let cfg = SolverConfig::default();
    let n = rescaled_negative_count(&p, 5.0, 30.0, &cfg).unwrap();
    assert_eq!(n, 1);
    let eps = 0.05;
    let below = perturbed_count(&u, &p, 5.0, eps, -1.0, &cfg).unwrap();
    assert_eq!(below, n);
    let s = eigen_perturbed(&u, &p, 5.0, eps, (1, 2), &SpectrumOptions::default()).unwrap();
    assert!(s.eigenvalues[0] < -0.5 * 2.0 / (eps * eps));
    assert!(s.eigenvalues[1] > -1.0);
}

#[test]
fn truncation_is_detected() {
    let u = ConfiningPotential::polynomial(&[0.0, 0.0, 1.0], 4.0).unwrap();
    let err = eigen_limit(&u, &BoundaryCoupling::theta(1.0).unwrap(), 3, &SpectrumOptions::default());
    assert!(matches!(err, Err(Error::Truncation { .. })));
}

#[test]
fn doubling_radius_is_stable() {
    let opts = SpectrumOptions::default();
    let bc = BoundaryCoupling::theta(-2.5).unwrap();
    let a = eigen_limit(&shifted(), &bc, 3, &opts).unwrap();
    let b = eigen_limit(&shifted().with_radius(16.0).unwrap(), &bc, 3, &opts).unwrap();
    for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
        assert!((x - y).abs() < opts.eig_tol, "{x} vs {y}");
    }
}

#[test]
fn free_string() {
    let p = named("step").unwrap();
    let s = interval_spectrum(-1.0, 2.0, &p, 0.0, 0.01, 4, &SpectrumOptions::default()).unwrap();
    for (k, e) in s.eigenvalues.iter().enumerate() {
        let exact = (std::f64::consts::PI * (k + 1) as f64 / 3.0).powi(2);
        assert!((e - exact).abs() < 1e-8, "{e} vs {exact}");
    }
}

#[test]
fn limit_frequencies() {
    let pi = std::f64::consts::PI;
    let w = interval_limit_frequencies(-1.0, 1.0, 1.0, 6).unwrap();
    for (k, x) in w.iter().enumerate() {
        assert!((x - pi * (k + 1) as f64 / 2.0).abs() < 1e-12);
    }
    let theta: f64 = -35.9;
    let w = interval_limit_frequencies(-1.0, 2.0, theta, 8).unwrap();
    for x in &w {
        let (ca, cb) = ((-x).cos(), (2.0 * x).cos());
        assert!(limit_residual(-1.0, 2.0, theta, *x).abs() < 1e-14);
        if ca.abs() > 0.1 && cb.abs() > 0.1 {
            let r = (2.0 * x).tan() - theta * theta * (-x).tan();
            assert!(r.abs() <= 1e-9, "{x}: {r}");
        }
    }
    // large θ: Dirichlet on (a, 0), Neumann on (0, b)
    let w = interval_limit_frequencies(-1.0, 2.0, 1e4, 5).unwrap();
    let mut expected: Vec<f64> = (1..4).map(|k| pi * k as f64).chain((0..4).map(|k| (k as f64 + 0.5) * pi / 2.0)).collect();
    expected.sort_by(f64::total_cmp);
    for (x, e) in w.iter().zip(&expected) {
        assert!((x - e).abs() < 1e-6, "{x} vs {e}");
    }
    let split = interval_split_frequencies(-1.0, 2.0, 4).unwrap();
    assert_eq!(split, vec![pi / 2.0, pi, pi, 1.5 * pi]);
}

#[test]
fn corrector_vanishes_without_barrier() {
    let u = harmonic();
    let opts = SpectrumOptions::default().with_eigenfunctions();
    let s = eigen_limit(&u, &BoundaryCoupling::theta(1.0).unwrap(), 2, &opts).unwrap();
    let p = named("step").unwrap();
    let cfg = crate::resonance::default_solver();
    for (lambda, e) in s.eigenvalues.iter().zip(s.eigenfunctions.as_ref().unwrap()) {
        let l1 = corrector_lambda1(&u, &p, 0.0, *lambda, &e.trace, true, &cfg, 1e-9).unwrap();
        assert!(l1.abs() < 1e-7, "{l1}");
    }
    let err = corrector_lambda1(&u, &p, 0.0, 1.0, &s.eigenfunctions.unwrap()[0].trace, false, &cfg, 1e-9);
    assert!(matches!(err, Err(Error::Resonant { .. })));
}
