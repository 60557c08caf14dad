//! The interval model: `-y'' + α ε⁻² Ψ(x/ε) y = λ y` on `(a, b)` with
//! Dirichlet ends, and its limit eigenfrequencies.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::profiles::Profile;
use crate::roots;

use super::shooting::{Middle, Setup};
use super::{assemble, solve_indices, Spectrum, SpectrumOptions, Support};

/// Lowest `count` nonnegative eigenvalues of the interval problem.
pub fn interval_spectrum(
    a: f64,
    b: f64,
    p: &Profile,
    alpha: f64,
    eps: f64,
    count: usize,
    opts: &SpectrumOptions,
) -> Result<Spectrum> {
    opts.validate()?;
    if !(a < -eps && -eps < eps && eps < b) {
        return Err(Error::InvalidConfig(format!("interval ({a}, {b}) must contain [-{eps}, {eps}]")));
    }
    if count == 0 {
        return Err(Error::InvalidConfig("count must be at least 1".into()));
    }
    let zero = |_: f64| 0.0;
    let setup = Setup::new(&zero, &[], a, b, Middle::Inner { p, alpha, eps });
    let negative = setup.count(0.0, &opts.cfg)?;
    let idx: Vec<usize> = (negative + 1..=negative + count).collect();
    let found = solve_indices(&setup, &idx, Support::Both, opts)?;
    Ok(assemble(found, opts.eig_tol, false, opts.eigenfunctions))
}

/// `sin bω cos aω - θ² sin aω cos bω`, the pole-free form of
/// `tan bω = θ² tan aω`, divided by `1 + θ²`.
pub fn limit_residual(a: f64, b: f64, theta: f64, omega: f64) -> f64 {
    let t2 = theta * theta;
    ((b * omega).sin() * (a * omega).cos() - t2 * (a * omega).sin() * (b * omega).cos()) / (1.0 + t2)
}

/// First `count` positive roots of `tan bω = θ² tan aω`.
pub fn interval_limit_frequencies(a: f64, b: f64, theta: f64, count: usize) -> Result<Vec<f64>> {
    if !(a < 0.0 && b > 0.0) || count == 0 || !theta.is_finite() || theta == 0.0 {
        return Err(Error::InvalidConfig(format!(
            "need a < 0 < b, count >= 1 and finite nonzero theta (a = {a}, b = {b}, theta = {theta})"
        )));
    }
    let f = |w: f64| Ok(limit_residual(a, b, theta, w));
    let step = PI / (64.0 * a.abs().max(b));
    let mut roots_found = Vec::with_capacity(count);
    let mut w0 = step;
    let mut f0 = limit_residual(a, b, theta, w0);
    while roots_found.len() < count {
        let w1 = w0 + step;
        let f1 = limit_residual(a, b, theta, w1);
        if f0 == 0.0 {
            roots_found.push(w0);
        } else if f0 * f1 < 0.0 {
            roots_found.push(roots::brent(f, w0, w1, 4.0 * f64::EPSILON * w1)?);
        }
        w0 = w1;
        f0 = f1;
    }
    Ok(roots_found)
}

/// First `count` roots of `tan aω · tan bω = 0`, i.e. the union of the two
/// Dirichlet half-interval spectra (coincidences kept twice).
pub fn interval_split_frequencies(a: f64, b: f64, count: usize) -> Result<Vec<f64>> {
    if !(a < 0.0 && b > 0.0) || count == 0 {
        return Err(Error::InvalidConfig(format!("need a < 0 < b and count >= 1 (a = {a}, b = {b})")));
    }
    let mut out: Vec<f64> = (1..=count)
        .flat_map(|k| [PI * k as f64 / a.abs(), PI * k as f64 / b])
        .collect();
    out.sort_by(f64::total_cmp);
    out.truncate(count);
    Ok(out)
}
