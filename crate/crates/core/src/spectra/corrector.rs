//! First-order eigenvalue corrector `λ^ε = λ + ε λ₁ + O(ε²)`.

use crate::error::{Error, Result};
use crate::ivp::{LinearOde, SolverConfig, StateVector};
use crate::profiles::Profile;
use crate::resonance;

use super::{BoundaryTrace, ConfiningPotential};

/// Share of the larger side below which a half of the trace counts as zero.
const ONE_SIDED_TOL: f64 = 1e-6;

/// `λ₁` for a limit eigenpair `(λ, v)` given the one-sided traces of the
/// unit-normalized `v` at the origin.
///
/// Closed barrier (`resonant = false`): `v` vanishes on one half-line.
/// With `w₁` solving `-w₁'' + αΨ w₁ = 0`, `w₁'(-1) = 0`, `w₁'(1) = v'(+0)`,
/// the corrector is `v'(+0) (v'(+0) - w₁(1))`; the other half-line is
/// handled by reflecting the problem.
///
/// Open barrier (`resonant = true`): with `W` the normalized resonant
/// solution, `θ = W(1)`, `Z` the solution with `Z(-1) = 0`, `Z'(-1) = 1`,
///
/// ```text
/// g₁ = v'(-0) Z(1) - v'(+0) - θ v'(-0)
/// h₁ = -(λ - U(0)) v(-0) ∫W² - θ v''(+0) - v''(-0)
/// λ₁ = v(-0) h₁ - v'(+0) g₁
/// ```
///
/// where `v''(±0) = (U(0) - λ) v(±0)`.
#[allow(clippy::too_many_arguments)]
pub fn corrector_lambda1(
    u: &ConfiningPotential,
    p: &Profile,
    alpha: f64,
    lambda: f64,
    v: &BoundaryTrace,
    resonant: bool,
    cfg: &SolverConfig,
    residual_tol: f64,
) -> Result<f64> {
    let residual = resonance::residual_of(p, alpha, cfg)?;
    if resonant {
        if residual > residual_tol {
            return Err(Error::NotResonant { alpha, residual });
        }
        open_branch(u.eval(0.0), p, alpha, lambda, v, cfg)
    } else {
        if residual <= residual_tol {
            return Err(Error::Resonant { alpha, residual });
        }
        let left = v.v_minus.abs().max(v.dv_minus.abs());
        let right = v.v_plus.abs().max(v.dv_plus.abs());
        if right <= ONE_SIDED_TOL * left {
            let mirrored = BoundaryTrace {
                v_minus: v.v_plus,
                v_plus: v.v_minus,
                dv_minus: -v.dv_plus,
                dv_plus: -v.dv_minus,
            };
            closed_branch(&p.reflected(), alpha, &mirrored, cfg)
        } else if left <= ONE_SIDED_TOL * right {
            closed_branch(p, alpha, v, cfg)
        } else {
            Err(Error::Precondition(
                "a closed-barrier limit eigenfunction must vanish on one half-line".into(),
            ))
        }
    }
}

fn closed_branch(p: &Profile, alpha: f64, v: &BoundaryTrace, cfg: &SolverConfig) -> Result<f64> {
    let (w1, dw1) = resonance::shoot(p, alpha, cfg)?;
    let d = v.dv_plus;
    let w1_end = d * w1 / dw1;
    Ok(d * (d - w1_end))
}

fn open_branch(u0: f64, p: &Profile, alpha: f64, lambda: f64, v: &BoundaryTrace, cfg: &SolverConfig) -> Result<f64> {
    let theta = resonance::coupling_theta(p, alpha, cfg, f64::INFINITY)?;
    let ode = LinearOde::new(move |xi| alpha * p.evaluate(xi)).with_breakpoints(p.breakpoints());
    let z1 = ode.integrate(-1.0, 1.0, StateVector::new(0.0, 1.0), cfg)?.u;
    let w2 = squared_norm(&ode, p, cfg)?;

    let ddv_minus = (u0 - lambda) * v.v_minus;
    let ddv_plus = (u0 - lambda) * v.v_plus;
    let g1 = v.dv_minus * z1 - v.dv_plus - theta * v.dv_minus;
    let h1 = -(lambda - u0) * v.v_minus * w2 - theta * ddv_plus - ddv_minus;
    Ok(v.v_minus * h1 - v.dv_plus * g1)
}

/// `∫₋₁¹ W²` by Simpson on each smooth piece of the profile.
fn squared_norm(ode: &LinearOde<'_>, p: &Profile, cfg: &SolverConfig) -> Result<f64> {
    let n = 400;
    let mut grid = Vec::new();
    let mut pieces = Vec::new();
    for seg in p.segments() {
        let [a, b] = seg.interval;
        let lo = grid.len().saturating_sub(1);
        for i in 0..=n {
            let x = if i == n { b } else { a + (b - a) * i as f64 / n as f64 };
            if grid.last() != Some(&x) {
                grid.push(x);
            }
        }
        pieces.push((lo, grid.len(), (b - a) / n as f64));
    }
    let states = ode.sample(-1.0, &grid, StateVector::new(1.0, 0.0), cfg)?;
    let mut total = 0.0;
    for (lo, hi, h) in pieces {
        let vals: Vec<f64> = states[lo..hi].iter().map(|s| s.u * s.u).collect();
        let mut s = vals[0] + vals[vals.len() - 1];
        for (i, v) in vals.iter().enumerate().take(vals.len() - 1).skip(1) {
            s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
        }
        total += s * h / 3.0;
    }
    Ok(total)
}
