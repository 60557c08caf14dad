//! Eigenvalue problems for the perturbed operator, its limit operators
//! and the interval model, plus the first-order eigenvalue corrector.
//!
//! Whole-line problems are truncated to `[-R, R]` with Dirichlet walls.
//! Eigenvalues are indexed by a Prüfer-angle oscillation count and refined
//! on a two-sided Wronskian mismatch.

mod corrector;
mod interval;
mod shooting;

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ivp::{PropagatorMatrix, SolverConfig};
use crate::profiles::Profile;

pub use corrector::corrector_lambda1;
pub use interval::{interval_limit_frequencies, interval_spectrum, interval_split_frequencies, limit_residual};
use shooting::{Middle, Setup};

/// Required gap between the wall potential and any reported eigenvalue.
pub const TRUNCATION_MARGIN: f64 = 25.0;
pub const DEFAULT_EIG_TOL: f64 = 1e-8;
pub const DEFAULT_POINTS_PER_UNIT: usize = 2000;

/// Interface condition at the origin for the limit operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundaryCoupling {
    /// `v(-0) = v(+0) = 0`.
    DirichletSplit,
    /// `v(+0) = θ v(-0)`, `θ v'(+0) = v'(-0)`.
    ThetaCoupled { theta: f64 },
    /// `(v(+0), v'(+0)) = e^{iφ} C (v(-0), v'(-0))` with `det C = 1`.
    /// The phase is a gauge and does not change the spectrum.
    ConnectedMatrix { phi: f64, c: [[f64; 2]; 2] },
    /// `h1 v'(∓0) = h2 v(∓0)` separately on each side.
    Separated { minus: [f64; 2], plus: [f64; 2] },
}

impl BoundaryCoupling {
    pub fn theta(theta: f64) -> Result<Self> {
        let bc = BoundaryCoupling::ThetaCoupled { theta };
        bc.validate()?;
        Ok(bc)
    }

    pub fn connected(phi: f64, c: [[f64; 2]; 2]) -> Result<Self> {
        let bc = BoundaryCoupling::ConnectedMatrix { phi, c };
        bc.validate()?;
        Ok(bc)
    }

    /// The coupling `diag((2+α)/(2-α), (2-α)/(2+α))`, which degenerates into
    /// separated conditions at `α = ±2`.
    pub fn kurasov_nizhnik(alpha: f64) -> Self {
        if alpha == 2.0 {
            BoundaryCoupling::Separated {
                minus: [0.0, 1.0],
                plus: [1.0, 0.0],
            }
        } else if alpha == -2.0 {
            BoundaryCoupling::Separated {
                minus: [1.0, 0.0],
                plus: [0.0, 1.0],
            }
        } else {
            let t = (2.0 + alpha) / (2.0 - alpha);
            BoundaryCoupling::ConnectedMatrix {
                phi: 0.0,
                c: [[t, 0.0], [0.0, 1.0 / t]],
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            BoundaryCoupling::DirichletSplit => Ok(()),
            BoundaryCoupling::ThetaCoupled { theta } => {
                if theta.is_finite() && theta != 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidConfig(format!("coupling theta must be finite and nonzero, got {theta}")))
                }
            }
            BoundaryCoupling::ConnectedMatrix { phi, c } => {
                let det = c[0][0] * c[1][1] - c[0][1] * c[1][0];
                if !(phi.abs() <= std::f64::consts::FRAC_PI_2) {
                    return Err(Error::InvalidConfig(format!("phase {phi} outside [-pi/2, pi/2]")));
                }
                if (det - 1.0).abs() > 1e-12 || c.iter().flatten().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidConfig(format!("coupling matrix must have det 1, got {det}")));
                }
                Ok(())
            }
            BoundaryCoupling::Separated { minus, plus } => {
                for h in [minus, plus] {
                    if h.iter().any(|v| !v.is_finite()) || h[0] == 0.0 && h[1] == 0.0 {
                        return Err(Error::InvalidConfig(format!("separated condition {h:?} is not a projective pair")));
                    }
                }
                Ok(())
            }
        }
    }

    /// Transfer matrix of a connected coupling; `None` for separated ones.
    pub fn matrix(&self) -> Option<PropagatorMatrix> {
        match *self {
            BoundaryCoupling::ThetaCoupled { theta } => Some(PropagatorMatrix([[theta, 0.0], [0.0, 1.0 / theta]])),
            BoundaryCoupling::ConnectedMatrix { c, .. } => Some(PropagatorMatrix(c)),
            _ => None,
        }
    }

    fn separated(&self) -> Option<([f64; 2], [f64; 2])> {
        match *self {
            BoundaryCoupling::DirichletSplit => Some(([0.0, 1.0], [0.0, 1.0])),
            BoundaryCoupling::Separated { minus, plus } => Some((minus, plus)),
            _ => None,
        }
    }
}

type PotentialFn = dyn Fn(f64) -> f64 + Send + Sync;

/// A confining background potential `U` together with the truncation
/// radius of the computational domain.
#[derive(Clone)]
pub struct ConfiningPotential {
    u: Arc<PotentialFn>,
    radius: f64,
    label: String,
    breakpoints: Vec<f64>,
}

impl fmt::Debug for ConfiningPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConfiningPotential")
            .field("label", &self.label)
            .field("radius", &self.radius)
            .finish()
    }
}

impl ConfiningPotential {
    pub fn new(label: impl Into<String>, radius: f64, u: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidConfig(format!("truncation radius must be positive, got {radius}")));
        }
        Ok(ConfiningPotential {
            u: Arc::new(u),
            radius,
            label: label.into(),
            breakpoints: Vec::new(),
        })
    }

    /// `U(x) = Σ c_j x^j`.
    pub fn polynomial(coeffs: &[f64], radius: f64) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidConfig("potential coefficients must be finite and non-empty".into()));
        }
        let c = coeffs.to_vec();
        let label = poly_label(coeffs);
        Self::new(label, radius, move |x| c.iter().rev().fold(0.0, |acc, &cj| acc * x + cj))
    }

    /// Discontinuities of `U` that the integrator must stop at.
    pub fn with_breakpoints(mut self, breakpoints: Vec<f64>) -> Self {
        self.breakpoints = breakpoints;
        self
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.u)(x)
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Same potential on a different domain.
    pub fn with_radius(&self, radius: f64) -> Result<Self> {
        let mut out = Self::new(self.label.clone(), radius, |_| 0.0)?;
        out.u = self.u.clone();
        out.breakpoints = self.breakpoints.clone();
        Ok(out)
    }

    /// Smaller of the two wall values `U(±R)`.
    pub fn wall_value(&self) -> f64 {
        self.eval(-self.radius).min(self.eval(self.radius))
    }

    /// Approximate minimum of `U` on the domain.
    pub fn min_value(&self) -> f64 {
        let n = 4000;
        (0..=n)
            .map(|i| self.eval(-self.radius + 2.0 * self.radius * i as f64 / n as f64))
            .fold(f64::INFINITY, f64::min)
    }

    fn mirrored(&self) -> ConfiningPotential {
        let u = self.u.clone();
        ConfiningPotential {
            u: Arc::new(move |x| u(-x)),
            radius: self.radius,
            label: format!("{} (mirrored)", self.label),
            breakpoints: self.breakpoints.iter().map(|b| -b).rev().collect(),
        }
    }

    pub(crate) fn as_fn(&self) -> &PotentialFn {
        &*self.u
    }

    pub(crate) fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }
}

fn poly_label(coeffs: &[f64]) -> String {
    let terms: Vec<String> = coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != 0.0)
        .map(|(j, c)| match j {
            0 => format!("{c}"),
            1 => format!("{c}*x"),
            _ => format!("{c}*x^{j}"),
        })
        .collect();
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}

/// Where an eigenfunction lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Support {
    Both,
    /// The negative half-line (spectrum of the left problem).
    Left,
    /// The positive half-line.
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenFlag {
    Ok,
    /// Within `10·eig_tol` of another eigenvalue of a split problem.
    NearDegenerate,
}

/// One-sided values of an eigenfunction at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryTrace {
    pub v_minus: f64,
    pub v_plus: f64,
    pub dv_minus: f64,
    pub dv_plus: f64,
}

/// A sampled, unit-`L²` eigenfunction. Both halves include `x = 0`, with
/// the one-sided limits there.
#[derive(Debug, Clone, Serialize)]
pub struct EigenFunction {
    pub x_left: Vec<f64>,
    pub v_left: Vec<f64>,
    pub x_right: Vec<f64>,
    pub v_right: Vec<f64>,
    pub trace: BoundaryTrace,
}

impl EigenFunction {
    /// `∫ v²` by composite Simpson on each half.
    pub fn norm_squared(&self) -> f64 {
        simpson_sq(&self.x_left, &self.v_left, None) + simpson_sq(&self.x_right, &self.v_right, None)
    }

    /// `∫ (v - s w)²` where `s = ±1` maximizes the overlap. Requires the
    /// same grid.
    pub fn distance(&self, other: &EigenFunction) -> Result<f64> {
        if self.x_left.len() != other.x_left.len() || self.x_right.len() != other.x_right.len() {
            return Err(Error::Misalignment("eigenfunctions sampled on different grids".into()));
        }
        let overlap = simpson_prod(&self.x_left, &self.v_left, &other.v_left)
            + simpson_prod(&self.x_right, &self.v_right, &other.v_right);
        let s = if overlap < 0.0 { -1.0 } else { 1.0 };
        let d = simpson_sq(&self.x_left, &self.v_left, Some((&other.v_left, s)))
            + simpson_sq(&self.x_right, &self.v_right, Some((&other.v_right, s)));
        Ok(d.max(0.0).sqrt())
    }

    /// `(x, v)` pairs in ascending order; the origin appears twice.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.x_left
            .iter()
            .copied()
            .zip(self.v_left.iter().copied())
            .chain(self.x_right.iter().copied().zip(self.v_right.iter().copied()))
    }

    fn scale(&mut self, s: f64) {
        self.v_left.iter_mut().for_each(|v| *v *= s);
        self.v_right.iter_mut().for_each(|v| *v *= s);
        self.trace.v_minus *= s;
        self.trace.v_plus *= s;
        self.trace.dv_minus *= s;
        self.trace.dv_plus *= s;
    }

    fn mirrored(self) -> EigenFunction {
        let rev = |v: Vec<f64>| v.into_iter().rev().collect::<Vec<_>>();
        EigenFunction {
            x_left: rev(self.x_right.iter().map(|x| -x).collect()),
            v_left: rev(self.v_right),
            x_right: rev(self.x_left.iter().map(|x| -x).collect()),
            v_right: rev(self.v_left),
            trace: BoundaryTrace {
                v_minus: self.trace.v_plus,
                v_plus: self.trace.v_minus,
                dv_minus: -self.trace.dv_plus,
                dv_plus: -self.trace.dv_minus,
            },
        }
    }
}

/// Composite Simpson of `(v - s w)²` (or `v²`) on a uniform grid with an
/// even number of intervals.
fn simpson_sq(x: &[f64], v: &[f64], other: Option<(&[f64], f64)>) -> f64 {
    let f = |i: usize| match other {
        Some((w, s)) => {
            let d = v[i] - s * w[i];
            d * d
        }
        None => v[i] * v[i],
    };
    simpson(x, f)
}

fn simpson_prod(x: &[f64], v: &[f64], w: &[f64]) -> f64 {
    simpson(x, |i| v[i] * w[i])
}

fn simpson(x: &[f64], f: impl Fn(usize) -> f64) -> f64 {
    let n = x.len();
    if n < 2 {
        return 0.0;
    }
    let h = (x[n - 1] - x[0]).abs() / (n - 1) as f64;
    if (n - 1) % 2 == 1 {
        // trapezoid fallback for odd interval counts
        return h * ((0..n - 1).map(|i| 0.5 * (f(i) + f(i + 1))).sum::<f64>());
    }
    let mut s = f(0) + f(n - 1);
    for i in 1..n - 1 {
        s += if i % 2 == 1 { 4.0 * f(i) } else { 2.0 * f(i) };
    }
    s * h / 3.0
}

/// Ordered eigenvalues, optionally with sampled eigenfunctions.
#[derive(Debug, Clone, Serialize)]
pub struct Spectrum {
    /// 1-based positions in the full ordered spectrum of the problem.
    pub indices: Vec<usize>,
    pub eigenvalues: Vec<f64>,
    /// Normalized Wronskian mismatch at the refined eigenvalue.
    pub residuals: Vec<f64>,
    pub flags: Vec<EigenFlag>,
    pub support: Vec<Support>,
    #[serde(skip)]
    pub eigenfunctions: Option<Vec<EigenFunction>>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SpectrumOptions {
    pub cfg: SolverConfig,
    pub eig_tol: f64,
    pub eigenfunctions: bool,
    /// Grid intervals per unit length for sampled eigenfunctions.
    pub points_per_unit: usize,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions {
            cfg: SolverConfig::default(),
            eig_tol: DEFAULT_EIG_TOL,
            eigenfunctions: false,
            points_per_unit: DEFAULT_POINTS_PER_UNIT,
        }
    }
}

impl SpectrumOptions {
    pub fn with_eigenfunctions(mut self) -> Self {
        self.eigenfunctions = true;
        self
    }

    fn validate(&self) -> Result<()> {
        self.cfg.validate()?;
        if !(self.eig_tol > 0.0) || self.points_per_unit == 0 {
            return Err(Error::InvalidConfig("eig_tol and points_per_unit must be positive".into()));
        }
        Ok(())
    }

    fn xtol(&self, scale: f64) -> f64 {
        1e-4 * self.eig_tol * scale.abs().max(1.0)
    }
}

struct Found {
    index: usize,
    lambda: f64,
    residual: f64,
    support: Support,
    eigenfunction: Option<EigenFunction>,
}

fn solve_indices(setup: &Setup<'_>, indices: &[usize], support: Support, opts: &SpectrumOptions) -> Result<Vec<Found>> {
    indices
        .par_iter()
        .map(|&k| {
            let (lambda, residual) = setup.eigenvalue(k, opts)?;
            let eigenfunction = if opts.eigenfunctions {
                Some(setup.eigenfunction(lambda, opts)?)
            } else {
                None
            };
            Ok(Found {
                index: k,
                lambda,
                residual,
                support,
                eigenfunction,
            })
        })
        .collect()
}

fn assemble(mut found: Vec<Found>, eig_tol: f64, split: bool, with_fns: bool) -> Spectrum {
    found.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    let n = found.len();
    let mut flags = vec![EigenFlag::Ok; n];
    if split {
        for i in 1..n {
            if found[i].lambda - found[i - 1].lambda <= 10.0 * eig_tol {
                flags[i] = EigenFlag::NearDegenerate;
                flags[i - 1] = EigenFlag::NearDegenerate;
            }
        }
    }
    let mut spectrum = Spectrum {
        indices: Vec::with_capacity(n),
        eigenvalues: Vec::with_capacity(n),
        residuals: Vec::with_capacity(n),
        flags,
        support: Vec::with_capacity(n),
        eigenfunctions: with_fns.then(Vec::new),
    };
    for (pos, f) in found.into_iter().enumerate() {
        spectrum.indices.push(if split { pos + 1 } else { f.index });
        spectrum.eigenvalues.push(f.lambda);
        spectrum.residuals.push(f.residual);
        spectrum.support.push(f.support);
        if let (Some(list), Some(e)) = (spectrum.eigenfunctions.as_mut(), f.eigenfunction) {
            list.push(e);
        }
    }
    spectrum
}

fn check_truncation(spectrum: &Spectrum, wall: f64) -> Result<()> {
    for &lambda in &spectrum.eigenvalues {
        if lambda + TRUNCATION_MARGIN > wall {
            return Err(Error::Truncation {
                eigenvalue: lambda,
                wall,
                margin: TRUNCATION_MARGIN,
            });
        }
    }
    Ok(())
}

/// Lowest `k_max` eigenvalues of `-v'' + U v` on `[-R, R]` with the
/// interface condition `bc` at the origin.
pub fn eigen_limit(u: &ConfiningPotential, bc: &BoundaryCoupling, k_max: usize, opts: &SpectrumOptions) -> Result<Spectrum> {
    opts.validate()?;
    bc.validate()?;
    if k_max == 0 {
        return Err(Error::InvalidConfig("k_max must be at least 1".into()));
    }
    let r = u.radius();
    let spectrum = if let Some((minus, plus)) = bc.separated() {
        let left = Setup::new(u.as_fn(), u.breakpoints(), -r, r, Middle::Robin(minus));
        let mirrored = u.mirrored();
        let right = Setup::new(mirrored.as_fn(), mirrored.breakpoints(), -r, r, Middle::Robin([-plus[0], plus[1]]));
        let idx: Vec<usize> = (1..=k_max).collect();
        let (l, rr) = rayon::join(
            || solve_indices(&left, &idx, Support::Left, opts),
            || solve_indices(&right, &idx, Support::Right, opts),
        );
        let mut found = l?;
        let mut rfound = rr?;
        for f in rfound.iter_mut() {
            f.eigenfunction = f.eigenfunction.take().map(EigenFunction::mirrored);
        }
        found.append(&mut rfound);
        found.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
        found.truncate(k_max);
        assemble(found, opts.eig_tol, true, opts.eigenfunctions)
    } else {
        let c = bc.matrix().expect("connected coupling");
        let setup = Setup::new(u.as_fn(), u.breakpoints(), -r, r, Middle::Interface(c));
        let idx: Vec<usize> = (1..=k_max).collect();
        let found = solve_indices(&setup, &idx, Support::Both, opts)?;
        assemble(found, opts.eig_tol, false, opts.eigenfunctions)
    };
    check_truncation(&spectrum, u.wall_value())?;
    Ok(spectrum)
}

/// Eigenvalues `λ_k^ε`, `k_lo ≤ k ≤ k_hi` (1-based), of
/// `-y'' + (U + α ε⁻² Ψ(x/ε)) y` on `[-R, R]`.
pub fn eigen_perturbed(
    u: &ConfiningPotential,
    p: &Profile,
    alpha: f64,
    eps: f64,
    (k_lo, k_hi): (usize, usize),
    opts: &SpectrumOptions,
) -> Result<Spectrum> {
    opts.validate()?;
    if !(eps > 0.0 && eps < 1.0) || eps >= u.radius() {
        return Err(Error::InvalidConfig(format!("eps must lie in (0, 1) and inside the domain, got {eps}")));
    }
    if k_lo == 0 || k_hi < k_lo {
        return Err(Error::InvalidConfig(format!("invalid index range ({k_lo}, {k_hi})")));
    }
    let r = u.radius();
    let setup = Setup::new(u.as_fn(), u.breakpoints(), -r, r, Middle::Inner { p, alpha, eps });
    let idx: Vec<usize> = (k_lo..=k_hi).collect();
    let found = solve_indices(&setup, &idx, Support::Both, opts)?;
    let spectrum = assemble(found, opts.eig_tol, false, opts.eigenfunctions);
    // diving eigenvalues live inside the barrier and are not affected by the walls
    let bounded = Spectrum {
        eigenvalues: spectrum
            .eigenvalues
            .iter()
            .copied()
            .filter(|&l| l > u.min_value() - 1.0)
            .collect(),
        ..spectrum.clone()
    };
    check_truncation(&bounded, u.wall_value())?;
    Ok(spectrum)
}

/// Number of eigenvalues of the perturbed problem strictly below `lambda`.
pub fn perturbed_count(u: &ConfiningPotential, p: &Profile, alpha: f64, eps: f64, lambda: f64, cfg: &SolverConfig) -> Result<usize> {
    let r = u.radius();
    let setup = Setup::new(u.as_fn(), u.breakpoints(), -r, r, Middle::Inner { p, alpha, eps });
    setup.count(lambda, cfg)
}

/// Lowest eigenvalues of `-w'' + α Ψ(ξ) w` on `[-s, s]` with Dirichlet
/// ends: the rescaled problem whose negative eigenvalues `μ` govern the
/// diving spectrum, `λ^ε ≈ μ ε⁻²`.
pub fn rescaled_spectrum(p: &Profile, alpha: f64, s: f64, count: usize, opts: &SpectrumOptions) -> Result<Spectrum> {
    opts.validate()?;
    if !(s > 1.0) || count == 0 {
        return Err(Error::InvalidConfig(format!("rescaled problem needs s > 1 and count >= 1, got s = {s}")));
    }
    let zero = |_: f64| 0.0;
    let setup = Setup::new(&zero, &[], -s, s, Middle::Inner { p, alpha, eps: 1.0 });
    let idx: Vec<usize> = (1..=count).collect();
    let found = solve_indices(&setup, &idx, Support::Both, opts)?;
    Ok(assemble(found, opts.eig_tol, false, opts.eigenfunctions))
}

/// Number of negative eigenvalues of the rescaled problem on `[-s, s]`.
pub fn rescaled_negative_count(p: &Profile, alpha: f64, s: f64, cfg: &SolverConfig) -> Result<usize> {
    let zero = |_: f64| 0.0;
    let setup = Setup::new(&zero, &[], -s, s, Middle::Inner { p, alpha, eps: 1.0 });
    setup.count(0.0, cfg)
}

#[cfg(test)]
mod tests;
