//! Resonance set and coupling function of a profile.
//!
//! `α` is resonant when the Neumann problem `-w'' + αΨw = 0`,
//! `w'(±1) = 0` has a nontrivial solution. Shooting from `w(-1) = 1`,
//! `w'(-1) = 0` turns this into the scalar miss function `D(α) = w'(1)`,
//! and the coupling function is `θ(α) = w(1) / w(-1)` at its roots.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ivp::{LinearOde, SolverConfig, StateVector};
use crate::profiles::Profile;
use crate::roots;

/// Solver settings for resonance work. Tighter than the generic default
/// because `|w(1)|` grows like `cosh √|α|` and the residual is judged
/// relative to it.
pub fn default_solver() -> SolverConfig {
    SolverConfig::with_tolerances(1e-12, 1e-14)
}

pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-9;
pub const DEFAULT_SCAN_STEP: f64 = 0.1;

/// A located resonance.
#[derive(Debug, Clone, Serialize)]
pub struct ResonancePoint {
    pub alpha: f64,
    pub theta: f64,
    /// `|w'(1)| / max(1, max|w|)` for the shot normalized by `w(-1) = 1`.
    pub residual: f64,
    /// `(xi, w(xi))` on a uniform grid of `[-1, 1]`, `w(-1) = 1`.
    #[serde(skip)]
    pub eigenfunction: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy)]
pub struct ScanOptions {
    pub scan_step: f64,
    pub residual_tol: f64,
    pub cfg: SolverConfig,
    /// Grid size of the exported eigenfunction.
    pub samples: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            scan_step: DEFAULT_SCAN_STEP,
            residual_tol: DEFAULT_RESIDUAL_TOL,
            cfg: default_solver(),
            samples: 201,
        }
    }
}

/// Outcome of [`resonance_scan`].
#[derive(Debug, Clone, Serialize)]
pub struct ResonanceScan {
    pub points: Vec<ResonancePoint>,
    /// Near-tangencies: `|D|` dipped below tolerance without a sign change.
    pub candidates: Vec<f64>,
    /// The scan grid and its halving found the same number of sign changes.
    pub rescan_consistent: bool,
}

impl ResonanceScan {
    pub fn alphas(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.alpha).collect()
    }
}

fn neumann_ode(p: &Profile, alpha: f64) -> LinearOde<'_> {
    LinearOde::new(move |xi| alpha * p.evaluate(xi)).with_breakpoints(p.breakpoints())
}

/// `(w(1), w'(1))` for `-w'' + αΨw = 0`, `w(-1) = 1`, `w'(-1) = 0`.
pub fn shoot(p: &Profile, alpha: f64, cfg: &SolverConfig) -> Result<(f64, f64)> {
    shoot_from(p, alpha, 1.0, cfg)
}

/// As [`shoot`] but starting from `w(-1) = c`.
pub fn shoot_from(p: &Profile, alpha: f64, c: f64, cfg: &SolverConfig) -> Result<(f64, f64)> {
    let end = neumann_ode(p, alpha).integrate(-1.0, 1.0, StateVector::new(c, 0.0), cfg)?;
    Ok((end.u, end.du))
}

/// The resonance miss function `D(α) = w'(1)`.
pub fn miss(p: &Profile, alpha: f64, cfg: &SolverConfig) -> Result<f64> {
    Ok(shoot(p, alpha, cfg)?.1)
}

/// Residual of a shot relative to the size of the solution.
pub fn residual_of(p: &Profile, alpha: f64, cfg: &SolverConfig) -> Result<f64> {
    let samples = shoot_samples(p, alpha, 65, cfg)?;
    let wmax = samples.iter().map(|s| s.u.abs()).fold(1.0, f64::max);
    Ok(samples.last().unwrap().du.abs() / wmax)
}

fn shoot_samples(p: &Profile, alpha: f64, n: usize, cfg: &SolverConfig) -> Result<Vec<StateVector>> {
    let grid: Vec<f64> = (0..n).map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64).collect();
    neumann_ode(p, alpha).sample(-1.0, &grid, StateVector::new(1.0, 0.0), cfg)
}

/// `θ(α) = w(1)/w(-1)` at a refined resonance.
pub fn coupling_theta(p: &Profile, alpha: f64, cfg: &SolverConfig, residual_tol: f64) -> Result<f64> {
    coupling_theta_normalized(p, alpha, 1.0, cfg, residual_tol)
}

/// [`coupling_theta`] computed from a shot with `w(-1) = c`.
pub fn coupling_theta_normalized(p: &Profile, alpha: f64, c: f64, cfg: &SolverConfig, residual_tol: f64) -> Result<f64> {
    if alpha == 0.0 {
        return Ok(1.0);
    }
    let residual = residual_of(p, alpha, cfg)?;
    if residual > residual_tol {
        return Err(Error::NotResonant { alpha, residual });
    }
    let (w1, _) = shoot_from(p, alpha, c, cfg)?;
    Ok(w1 / c)
}

/// Returns `Some(θ)` when `α` is resonant within `residual_tol`.
pub fn resonant_theta(p: &Profile, alpha: f64, cfg: &SolverConfig, residual_tol: f64) -> Result<Option<f64>> {
    match coupling_theta(p, alpha, cfg, residual_tol) {
        Ok(t) => Ok(Some(t)),
        Err(Error::NotResonant { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Refines a resonance from a bracket `[a, b]` with a sign change of `D`.
pub fn refine(p: &Profile, a: f64, b: f64, cfg: &SolverConfig) -> Result<f64> {
    let xtol = 4.0 * f64::EPSILON * a.abs().max(b.abs()).max(1.0);
    roots::brent(|alpha| miss(p, alpha, cfg), a, b, xtol)
}

/// Builds the full record for a resonance.
pub fn resonance_point(p: &Profile, alpha: f64, opts: &ScanOptions) -> Result<ResonancePoint> {
    let n = opts.samples.max(2);
    let states = shoot_samples(p, alpha, n, &opts.cfg)?;
    let wmax = states.iter().map(|s| s.u.abs()).fold(1.0, f64::max);
    let last = states.last().unwrap();
    let residual = if alpha == 0.0 { 0.0 } else { last.du.abs() / wmax };
    let eigenfunction = states
        .iter()
        .enumerate()
        .map(|(i, s)| (-1.0 + 2.0 * i as f64 / (n - 1) as f64, s.u))
        .collect();
    Ok(ResonancePoint {
        alpha,
        theta: if alpha == 0.0 { 1.0 } else { last.u },
        residual,
        eigenfunction,
    })
}

/// All roots of `D` in `[alpha_min, alpha_max]`.
///
/// `D` is tabulated on a grid of spacing `scan_step / 2`; the coarse grid
/// (every other node) is compared against it and disagreement in the
/// number of sign changes clears `rescan_consistent`. Brackets from the
/// fine grid are refined with Brent's method. `α = 0` is always reported
/// when inside the window: for profiles with `m0 = 0` it is a double root
/// of `D` and cannot be bracketed.
pub fn resonance_scan(p: &Profile, alpha_min: f64, alpha_max: f64, opts: &ScanOptions) -> Result<ResonanceScan> {
    if !(alpha_min < alpha_max) || opts.scan_step <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "resonance window [{alpha_min}, {alpha_max}] with step {}",
            opts.scan_step
        )));
    }
    let h = 0.5 * opts.scan_step;
    let n = ((alpha_max - alpha_min) / h).ceil() as usize;
    let grid: Vec<f64> = (0..=n)
        .map(|i| if i == n { alpha_max } else { alpha_min + i as f64 * h })
        .collect();
    let values: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&a| {
            let (w1, dw1) = shoot(p, a, &opts.cfg)?;
            Ok((dw1, dw1.abs() / w1.abs().max(1.0)))
        })
        .collect::<Result<_>>()?;
    let d: Vec<f64> = values.iter().map(|v| v.0).collect();

    let changes = |stride: usize| -> usize {
        let idx: Vec<usize> = (0..grid.len()).step_by(stride).collect();
        idx.windows(2)
            .filter(|w| d[w[0]] * d[w[1]] < 0.0)
            .count()
            + idx.iter().filter(|&&i| d[i] == 0.0 && grid[i] != 0.0).count()
    };
    let rescan_consistent = changes(2) == changes(1);

    let mut roots: Vec<f64> = Vec::new();
    for i in 0..grid.len() {
        if d[i] == 0.0 && grid[i] != 0.0 {
            roots.push(grid[i]);
        }
    }
    let brackets: Vec<(f64, f64)> = (0..grid.len() - 1)
        .filter(|&i| d[i] * d[i + 1] < 0.0)
        .map(|i| (grid[i], grid[i + 1]))
        .collect();
    let refined: Vec<f64> = brackets
        .par_iter()
        .map(|&(a, b)| refine(p, a, b, &opts.cfg))
        .collect::<Result<_>>()?;
    roots.extend(refined);

    let mut candidates = Vec::new();
    for i in 1..grid.len() - 1 {
        let (l, c, r) = (values[i - 1].1, values[i].1, values[i + 1].1);
        let tangency = c < l && c < r && d[i - 1] * d[i] > 0.0 && d[i] * d[i + 1] > 0.0;
        if tangency && c <= opts.residual_tol && grid[i].abs() > h {
            candidates.push(grid[i]);
        }
    }

    if alpha_min <= 0.0 && alpha_max >= 0.0 {
        roots.push(0.0);
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * a.abs().max(1.0));
    // a bracketed simple root at the origin (m0 != 0) is the same point
    for r in roots.iter_mut() {
        if r.abs() <= 1e-12 {
            *r = 0.0;
        }
    }
    roots.dedup();

    let points = roots
        .par_iter()
        .map(|&a| resonance_point(p, a, opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(ResonanceScan {
        points,
        candidates,
        rescan_consistent,
    })
}

/// The resonance closest to `alpha` within `half_width`, if any.
pub fn nearest_resonance(p: &Profile, alpha: f64, half_width: f64, opts: &ScanOptions) -> Result<Option<ResonancePoint>> {
    let scan = resonance_scan(p, alpha - half_width, alpha + half_width, opts)?;
    Ok(scan
        .points
        .into_iter()
        .min_by(|a, b| (a.alpha - alpha).abs().total_cmp(&(b.alpha - alpha).abs())))
}

/// `h(κ) = κ (tanh κ - tan κ)`: its positive roots give the positive
/// resonances `κ²` of the step profile.
pub fn step_h(kappa: f64) -> Result<f64> {
    let c = kappa.cos();
    if c.abs() < 1e-14 {
        return Err(Error::Pole { kappa });
    }
    Ok(kappa * (kappa.tanh() - kappa.sin() / c))
}

/// Closed-form coupling function of the step profile:
/// `cosh√α / cos√α` for `α ≥ 0`, `cos√-α / cosh√-α` for `α < 0`.
pub fn step_theta(alpha: f64) -> Result<f64> {
    if alpha >= 0.0 {
        let k = alpha.sqrt();
        let c = k.cos();
        if c.abs() < 1e-14 {
            return Err(Error::Pole { kappa: k });
        }
        Ok(k.cosh() / c)
    } else {
        let k = (-alpha).sqrt();
        Ok(k.cos() / k.cosh())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::named;

    /// Bisection oracle on `tanh κ - tan κ` in the branch `(mπ, mπ + π/2)`.
    fn kappa_root(m: usize) -> f64 {
        let g = |k: f64| k.tanh() - k.tan();
        let pi = std::f64::consts::PI;
        let (mut lo, mut hi) = (m as f64 * pi + 1e-9, m as f64 * pi + pi / 2.0 - 1e-9);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(lo) * g(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn oracle_roots() {
        let k1 = kappa_root(1);
        let k2 = kappa_root(2);
        assert!((k1 - 3.9266).abs() < 1e-4);
        assert!((k2 - 7.0686).abs() < 1e-4);
        assert!(step_h(k1).unwrap().abs() < 1e-8);
    }

    #[test]
    fn step_h_values() {
        assert_eq!(step_h(0.0).unwrap(), 0.0);
        let direct = 1f64.tanh() - 1f64.tan();
        assert!((step_h(1.0).unwrap() - direct).abs() < 1e-15);
        assert!((direct + 0.7958).abs() < 1e-4);
        assert!(matches!(step_h(std::f64::consts::FRAC_PI_2), Err(Error::Pole { .. })));
    }

    #[test]
    fn step_theta_values() {
        let k1 = kappa_root(1);
        let a1 = k1 * k1;
        assert_eq!(step_theta(0.0).unwrap(), 1.0);
        let tp = step_theta(a1).unwrap();
        let tm = step_theta(-a1).unwrap();
        assert!((tp + 35.9).abs() < 0.05, "{tp}");
        assert!((tm + 0.0279).abs() < 1e-4, "{tm}");
        assert!((tp * tm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn shot_at_zero_is_constant() {
        let p = named("asymmetric_bump").unwrap();
        let (w1, dw1) = shoot(&p, 0.0, &default_solver()).unwrap();
        assert_eq!((w1, dw1), (1.0, 0.0));
        assert_eq!(coupling_theta(&p, 0.0, &default_solver(), 1e-9).unwrap(), 1.0);
    }

    #[test]
    fn step_miss_sign_matches_closed_form() {
        // w'(1) = κ cosh κ cos κ (tanh κ - tan κ), the prefactor is positive
        // away from cos κ = 0, so compare sign(D) * sign(cos κ) with sign(h)
        let p = named("step").unwrap();
        let cfg = default_solver();
        let mut k = 0.05;
        while k < 1.5 * std::f64::consts::PI {
            let c = k.cos();
            if c.abs() > 1e-3 {
                let d = miss(&p, k * k, &cfg).unwrap();
                let h = step_h(k).unwrap();
                if h.abs() > 1e-6 {
                    assert_eq!((d * c).signum(), h.signum(), "kappa = {k}");
                }
            }
            k += 0.05;
        }
    }

    #[test]
    fn refined_first_resonance() {
        let p = named("step").unwrap();
        let cfg = default_solver();
        let k1 = kappa_root(1);
        let a = refine(&p, 15.0, 16.0, &cfg).unwrap();
        assert!((a - k1 * k1).abs() < 1e-8);
        assert!(miss(&p, a, &cfg).unwrap().abs() <= 1e-8);
        let theta = coupling_theta(&p, a, &cfg, DEFAULT_RESIDUAL_TOL).unwrap();
        let exact = step_theta(k1 * k1).unwrap();
        assert!(((theta - exact) / exact).abs() < 1e-6);
    }

    #[test]
    fn window_near_origin_has_only_zero() {
        let p = named("step").unwrap();
        let scan = resonance_scan(&p, -1.0, 1.0, &ScanOptions::default()).unwrap();
        assert_eq!(scan.alphas(), vec![0.0]);
        assert!(scan.candidates.is_empty());
        assert_eq!(scan.points[0].theta, 1.0);
    }

    #[test]
    fn non_resonant_theta_is_an_error() {
        let p = named("step").unwrap();
        let err = coupling_theta(&p, 5.0, &default_solver(), DEFAULT_RESIDUAL_TOL);
        assert!(matches!(err, Err(Error::NotResonant { .. })));
    }

    #[test]
    fn eigenfunction_normalization() {
        let p = named("step").unwrap();
        let scan = resonance_scan(&p, 10.0, 20.0, &ScanOptions::default()).unwrap();
        assert_eq!(scan.points.len(), 1);
        let pt = &scan.points[0];
        assert_eq!(pt.eigenfunction.first().unwrap(), &(-1.0, 1.0));
        let (xi, w) = *pt.eigenfunction.last().unwrap();
        assert_eq!(xi, 1.0);
        assert!((w - pt.theta).abs() < 1e-9 * pt.theta.abs());
    }

    #[test]
    fn m0_nonzero_origin_counted_once() {
        let p = named("even_parabola").unwrap();
        let opts = ScanOptions {
            scan_step: 0.13,
            ..ScanOptions::default()
        };
        let scan = resonance_scan(&p, -1.01, 1.0, &opts).unwrap();
        assert_eq!(scan.alphas(), vec![0.0]);
    }

    #[test]
    fn nearest_from_rounded_value() {
        let p = named("step").unwrap();
        let k1 = kappa_root(1);
        let r = nearest_resonance(&p, 15.418, 0.5, &ScanOptions::default()).unwrap().unwrap();
        assert!((r.alpha - k1 * k1).abs() < 1e-7);
        assert!(nearest_resonance(&p, 30.0, 1.0, &ScanOptions::default()).unwrap().is_none());
    }
}
