//! Plane-wave scattering through the squeezed barrier `α ε⁻² Ψ(x/ε)`.
//!
//! The incident wave `e^{ikx}` comes from the left; for `x < -ε` the
//! solution is `e^{ikx} + R e^{-ikx}` and for `x > ε` it is `T e^{ikx}`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ivp::{constant_propagator, LinearOde, PropagatorMatrix, SolverConfig};
use crate::profiles::Profile;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatteringResult {
    pub k: f64,
    pub eps: f64,
    pub alpha: f64,
    #[serde(rename = "R")]
    pub r: Complex64,
    #[serde(rename = "T")]
    pub t: Complex64,
}

impl ScatteringResult {
    pub fn reflectance(&self) -> f64 {
        self.r.norm_sqr()
    }

    pub fn transmittance(&self) -> f64 {
        self.t.norm_sqr()
    }

    /// `|R|² + |T|² - 1`.
    pub fn unitarity_defect(&self) -> f64 {
        self.reflectance() + self.transmittance() - 1.0
    }
}

fn check(eps: f64, k: f64) -> Result<()> {
    if !(eps > 0.0 && eps.is_finite() && k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidConfig(format!("scattering needs eps > 0 and k > 0 (eps = {eps}, k = {k})")));
    }
    Ok(())
}

/// Numerical amplitudes for an arbitrary profile. The propagator is computed
/// in `ξ = x/ε`, where the coefficient `αΨ(ξ) - ε²k²` stays bounded.
pub fn scatter(p: &Profile, alpha: f64, eps: f64, k: f64, cfg: &SolverConfig) -> Result<ScatteringResult> {
    check(eps, k)?;
    let shift = eps * eps * k * k;
    let ode = LinearOde::new(move |xi| alpha * p.evaluate(xi) - shift).with_breakpoints(p.breakpoints());
    let m = ode.propagator(-1.0, 1.0, cfg)?;
    solve_matching(&m, alpha, eps, k)
}

/// Closed-form amplitudes for the step profile with `α = κ²`.
pub fn step_scatter_exact(kappa: f64, eps: f64, k: f64) -> Result<ScatteringResult> {
    check(eps, k)?;
    let shift = eps * eps * k * k;
    let a2 = kappa * kappa;
    let left = constant_propagator(a2 - shift, 1.0);
    let right = constant_propagator(-a2 - shift, 1.0);
    solve_matching(&(right * left), a2, eps, k)
}

/// `4θ² / (1 + θ²)²`, the limit transmittance of an open barrier.
pub fn transmission_limit(theta: f64) -> f64 {
    if !theta.is_finite() {
        return 0.0;
    }
    if theta.abs() > 1e100 {
        return 4.0 / (theta * theta);
    }
    let t2 = theta * theta;
    4.0 * t2 / ((1.0 + t2) * (1.0 + t2))
}

/// Matches the plane-wave data across `[-ε, ε]` given the propagator `m` of
/// `(w, dw/dξ)` over `ξ ∈ [-1, 1]`.
fn solve_matching(m: &PropagatorMatrix, alpha: f64, eps: f64, k: f64) -> Result<ScatteringResult> {
    let [[m11, m12], [m21, m22]] = m.0;
    // physical transfer matrix for (y, y')
    let p = [[m11, eps * m12], [m21 / eps, m22]];
    let ik = Complex64::new(0.0, k);
    let phase = Complex64::new(0.0, k * eps).exp();
    let apply = |u: Complex64, du: Complex64| (p[0][0] * u + p[0][1] * du, p[1][0] * u + p[1][1] * du);
    let (a0, a1) = apply(1.0 / phase, ik / phase);
    let (b0, b1) = apply(phase, -ik * phase);
    let (c0, c1) = (phase, ik * phase);
    // R (P b) - T c = -P a
    let det = -b0 * c1 + c0 * b1;
    if !(det.norm() > 0.0) || !det.is_finite() {
        return Err(Error::Degenerate(format!("singular matching system at eps = {eps}, k = {k}")));
    }
    let r = (a0 * c1 - c0 * a1) / det;
    let t = (a0 * b1 - b0 * a1) / det;
    Ok(ScatteringResult { k, eps, alpha, r, t })
}

/// One row per `(α, ε, k)` triple, computed in parallel.
pub fn scatter_sweep(p: &Profile, points: &[(f64, f64, f64)], cfg: &SolverConfig) -> Result<Vec<ScatteringResult>> {
    points
        .par_iter()
        .map(|&(alpha, eps, k)| scatter(p, alpha, eps, k, cfg))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::{named, Segment};
    use crate::resonance;
    use approx::assert_relative_eq;

    fn cfg() -> SolverConfig {
        resonance::default_solver()
    }

    /// Textbook rectangular barrier of height `v` and width `l`, `E = k² < v`.
    fn barrier_transmittance(v: f64, l: f64, k: f64) -> f64 {
        let e = k * k;
        let q = (v - e).sqrt();
        1.0 / (1.0 + v * v * (q * l).sinh().powi(2) / (4.0 * e * (v - e)))
    }

    #[test]
    fn free_propagation() {
        let p = named("step").unwrap();
        let s = scatter(&p, 0.0, 0.1, 1.3, &cfg()).unwrap();
        assert!(s.r.norm() < 1e-12);
        assert!((s.t - 1.0).norm() < 1e-12);
    }

    #[test]
    fn rectangular_barrier() {
        let p = Profile::new(
            "box",
            vec![Segment {
                interval: [-1.0, 1.0],
                coeffs: vec![1.0],
            }],
        ).unwrap();
        for (alpha, eps, k) in [(4.0, 0.5, 1.0), (30.0, 0.2, 2.0), (15.0, 0.05, 3.0)] {
            let s = scatter(&p, alpha, eps, k, &cfg()).unwrap();
            let v = alpha / (eps * eps);
            assert_relative_eq!(s.transmittance(), barrier_transmittance(v, 2.0 * eps, k), max_relative = 1e-9);
        }
    }

    #[test]
    fn numerical_matches_exact_step() {
        let p = named("step").unwrap();
        let n = scatter(&p, 4.0, 0.05, 1.0, &cfg()).unwrap();
        let e = step_scatter_exact(2.0, 0.05, 1.0).unwrap();
        assert!((n.r - e.r).norm() < 1e-9);
        assert!((n.t - e.t).norm() < 1e-9);
    }

    #[test]
    fn low_energy_formula() {
        let kappa: f64 = 2.0;
        let h = resonance::step_h(kappa).unwrap();
        let k = 1.0;
        let mut scaled = Vec::new();
        for eps in [1e-2, 5e-3, 2.5e-3] {
            let s = step_scatter_exact(kappa, eps, k).unwrap();
            let z = Complex64::new(0.0, 2.0 * eps * k);
            let approx = z * (-z).exp() / ((z - h) * kappa.cos() * kappa.cosh());
            scaled.push((s.t - approx).norm() / (eps * k).powi(2));
        }
        assert!(scaled.iter().all(|c| *c < 10.0), "{scaled:?}");
        assert!(scaled.windows(2).all(|w| w[1] < w[0]), "{scaled:?}");
    }

    #[test]
    fn off_resonance_decay_constant() {
        let kappa: f64 = 2.0;
        let h = resonance::step_h(kappa).unwrap();
        let k = 1.5;
        let limit = 4.0 * k * k / (h * h * (kappa.cos() * kappa.cosh()).powi(2));
        let s = step_scatter_exact(kappa, 1e-4, k).unwrap();
        assert_relative_eq!(s.transmittance() / 1e-8, limit, max_relative = 1e-3);
    }

    #[test]
    fn resonant_plateau() {
        let p = named("step").unwrap();
        let a1 = resonance::refine(&p, 15.0, 16.0, &cfg()).unwrap();
        let kappa = a1.sqrt();
        let expected = 1.0 / (kappa.cos() * kappa.cosh()).powi(2);
        let theta = resonance::coupling_theta(&p, a1, &cfg(), 1e-9).unwrap();
        assert_relative_eq!(transmission_limit(theta), expected, max_relative = 1e-8);
        let s = step_scatter_exact(kappa, 1e-5, 1.0).unwrap();
        assert!((s.transmittance() - expected).abs() < 1e-3);
    }

    #[test]
    fn limit_law() {
        assert_eq!(transmission_limit(1.0), 1.0);
        assert_eq!(transmission_limit(-1.0), 1.0);
        assert_eq!(transmission_limit(f64::INFINITY), 0.0);
        assert!((transmission_limit(1e8) * 1e16 - 4.0).abs() < 1e-6);
        assert!((transmission_limit(-35.9) - 3.1e-3).abs() < 1e-4);
    }

    #[test]
    fn rejects_bad_input() {
        let p = named("step").unwrap();
        assert!(scatter(&p, 1.0, 0.0, 1.0, &cfg()).is_err());
        assert!(scatter(&p, 1.0, 0.1, -1.0, &cfg()).is_err());
    }

    #[test]
    fn limit_law_for_general_profiles() {
        // at an exact resonance the plateau is approached at rate ε²
        let opts = resonance::ScanOptions::default();
        let eps = [3e-2, 1e-2, 3e-3, 1e-3];
        for name in ["asymmetric_bump", "odd_cubic", "step"] {
            let p = named(name).unwrap();
            let scan = resonance::resonance_scan(&p, -30.0, 30.0, &opts).unwrap();
            let nonzero: Vec<_> = scan.points.iter().filter(|r| r.alpha != 0.0).collect();
            assert!(nonzero.len() >= 2, "{name}");
            for r in nonzero {
                let limit = transmission_limit(r.theta);
                let errs: Vec<f64> = eps
                    .iter()
                    .map(|&e| (scatter(&p, r.alpha, e, 1.0, &cfg()).unwrap().transmittance() - limit).abs())
                    .collect();
                assert!(errs[3] < 1e-6 * limit, "{name} {}: {errs:?}", r.alpha);
                let (order, _) = crate::experiments::loglog_fit(&eps, &errs).unwrap();
                assert!((order - 2.0).abs() < 0.2, "{name} alpha {}: error order {order}", r.alpha);
            }
        }
    }
}
