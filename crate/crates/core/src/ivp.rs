//! Linear second-order initial value problems `-u'' + q(x) u = f(x)`.
//!
//! The first-order system `(u, u')` is advanced with the Dormand–Prince
//! 5(4) embedded pair. Breakpoints of `q` and `f` are hard step
//! boundaries, and stage abscissas are kept strictly inside the current
//! piece so a right-continuous coefficient never leaks across a jump.

use std::ops::{Add, Mul};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cauchy data `(u, u')` at a point.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StateVector<T = f64> {
    pub u: T,
    pub du: T,
}

impl<T> StateVector<T> {
    pub const fn new(u: T, du: T) -> Self {
        StateVector { u, du }
    }
}

impl StateVector<f64> {
    pub fn norm(&self) -> f64 {
        self.u.hypot(self.du)
    }

    fn is_finite(&self) -> bool {
        self.u.is_finite() && self.du.is_finite()
    }
}

/// 2×2 real transfer matrix carrying `(u, u')` from the start of an
/// interval to its end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagatorMatrix(pub [[f64; 2]; 2]);

impl PropagatorMatrix {
    pub const IDENTITY: PropagatorMatrix = PropagatorMatrix([[1.0, 0.0], [0.0, 1.0]]);

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn apply<T>(&self, s: StateVector<T>) -> StateVector<T>
    where
        T: Copy + Add<Output = T> + Mul<f64, Output = T>,
    {
        let m = &self.0;
        StateVector::new(s.u * m[0][0] + s.du * m[0][1], s.u * m[1][0] + s.du * m[1][1])
    }

    /// Inverse of a unimodular matrix (uses the actual determinant).
    pub fn inverse(&self) -> PropagatorMatrix {
        let m = &self.0;
        let d = self.det();
        PropagatorMatrix([[m[1][1] / d, -m[0][1] / d], [-m[1][0] / d, m[0][0] / d]])
    }

    pub fn max_abs_diff(&self, other: &PropagatorMatrix) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((self.0[i][j] - other.0[i][j]).abs());
            }
        }
        worst
    }
}

impl Mul for PropagatorMatrix {
    type Output = PropagatorMatrix;

    fn mul(self, rhs: PropagatorMatrix) -> PropagatorMatrix {
        let (a, b) = (&self.0, &rhs.0);
        let mut out = [[0.0; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        PropagatorMatrix(out)
    }
}

/// Tolerances and step limits for the adaptive integrator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Largest step; `None` means one hundredth of each integration interval.
    pub max_step: Option<f64>,
    pub min_step: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: None,
            min_step: 1e-13,
        }
    }
}

impl SolverConfig {
    pub fn with_tolerances(rel_tol: f64, abs_tol: f64) -> Self {
        SolverConfig {
            rel_tol,
            abs_tol,
            ..SolverConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.rel_tol > 0.0
            && self.abs_tol > 0.0
            && self.min_step > 0.0
            && self.max_step.is_none_or(|m| m > self.min_step);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("solver tolerances must be positive with min_step < max_step: {self:?}")))
        }
    }
}

/// `-u'' + q(x) u = f(x)` with piecewise-continuous data.
pub struct LinearOde<'a> {
    q: Box<dyn Fn(f64) -> f64 + Sync + 'a>,
    f: Option<Box<dyn Fn(f64) -> f64 + Sync + 'a>>,
    breakpoints: Vec<f64>,
}

/// What a trace observer sees after each accepted step.
#[derive(Debug, Clone, Copy)]
pub struct TracePoint {
    pub x: f64,
    pub state: StateVector,
    /// Natural log of the positive factor divided out of `state` so far.
    pub log_scale: f64,
}

/// Options for [`LinearOde::trace`].
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct TraceOptions {
    /// Divide the state by its norm whenever it exceeds `1e100`.
    pub renormalize: bool,
}

const RENORM_THRESHOLD: f64 = 1e100;

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b - b* (fifth minus fourth order weights)
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

type Pair = [f64; 2];

#[inline]
fn axpy(y: Pair, h: f64, terms: &[(f64, &Pair)]) -> Pair {
    let mut out = y;
    for (c, k) in terms {
        out[0] += h * c * k[0];
        out[1] += h * c * k[1];
    }
    out
}

impl<'a> LinearOde<'a> {
    pub fn new(q: impl Fn(f64) -> f64 + Sync + 'a) -> Self {
        LinearOde {
            q: Box::new(q),
            f: None,
            breakpoints: Vec::new(),
        }
    }

    pub fn with_forcing(mut self, f: impl Fn(f64) -> f64 + Sync + 'a) -> Self {
        self.f = Some(Box::new(f));
        self
    }

    pub fn with_breakpoints(mut self, breakpoints: impl IntoIterator<Item = f64>) -> Self {
        self.breakpoints.extend(breakpoints);
        self.breakpoints.sort_by(f64::total_cmp);
        self.breakpoints.dedup();
        self
    }

    #[inline]
    fn rhs(&self, x: f64, y: &Pair) -> Pair {
        let forcing = self.f.as_ref().map_or(0.0, |f| f(x));
        [y[1], (self.q)(x) * y[0] - forcing]
    }

    /// Solution `(u(b), u'(b))` of the Cauchy problem with data `init` at `a`.
    /// `b < a` integrates backwards.
    pub fn integrate(&self, a: f64, b: f64, init: StateVector, cfg: &SolverConfig) -> Result<StateVector> {
        self.trace(a, b, init, cfg, &[], TraceOptions::default(), |_| {})
    }

    /// Complex Cauchy data; `q` and `f` are real so the real and imaginary
    /// parts are advanced separately.
    pub fn integrate_complex(
        &self,
        a: f64,
        b: f64,
        init: StateVector<Complex64>,
        cfg: &SolverConfig,
    ) -> Result<StateVector<Complex64>> {
        let re = self.integrate(a, b, StateVector::new(init.u.re, init.du.re), cfg)?;
        let homogeneous = LinearOde {
            q: Box::new(|x| (self.q)(x)),
            f: None,
            breakpoints: self.breakpoints.clone(),
        };
        let im = homogeneous.integrate(a, b, StateVector::new(init.u.im, init.du.im), cfg)?;
        Ok(StateVector::new(Complex64::new(re.u, im.u), Complex64::new(re.du, im.du)))
    }

    /// Transfer matrix of the homogeneous equation over `(a, b)`.
    pub fn propagator(&self, a: f64, b: f64, cfg: &SolverConfig) -> Result<PropagatorMatrix> {
        let homogeneous = LinearOde {
            q: Box::new(|x| (self.q)(x)),
            f: None,
            breakpoints: self.breakpoints.clone(),
        };
        let c1 = homogeneous.integrate(a, b, StateVector::new(1.0, 0.0), cfg)?;
        let c2 = homogeneous.integrate(a, b, StateVector::new(0.0, 1.0), cfg)?;
        Ok(PropagatorMatrix([[c1.u, c2.u], [c1.du, c2.du]]))
    }

    /// States at the given points, which must be monotone in the direction
    /// of integration starting from `a`.
    pub fn sample(&self, a: f64, points: &[f64], init: StateVector, cfg: &SolverConfig) -> Result<Vec<StateVector>> {
        let Some(&b) = points.last() else {
            return Ok(Vec::new());
        };
        let mut out = Vec::with_capacity(points.len());
        let mut next = 0;
        while next < points.len() && points[next] == a {
            out.push(init);
            next += 1;
        }
        self.trace(a, b, init, cfg, points, TraceOptions::default(), |p| {
            while next < points.len() && points[next] == p.x {
                out.push(p.state);
                next += 1;
            }
        })?;
        if out.len() != points.len() {
            return Err(Error::InvalidConfig("sample points must be monotone from the start point".into()));
        }
        Ok(out)
    }

    /// Classical fixed-step RK4 with `steps` equal steps per piece between
    /// breakpoints. Used as the reference scheme for order checks.
    pub fn integrate_fixed(&self, a: f64, b: f64, init: StateVector, steps: usize) -> StateVector {
        let mut y = [init.u, init.du];
        for (lo, hi) in self.pieces(a, b, &[]) {
            let h = (hi - lo) / steps as f64;
            for i in 0..steps {
                let x = lo + i as f64 * h;
                let (xl, xh) = inner_bounds(lo, hi);
                let at = |t: f64| t.clamp(xl.min(xh), xl.max(xh));
                let k1 = self.rhs(at(x), &y);
                let k2 = self.rhs(at(x + 0.5 * h), &axpy(y, 0.5 * h, &[(1.0, &k1)]));
                let k3 = self.rhs(at(x + 0.5 * h), &axpy(y, 0.5 * h, &[(1.0, &k2)]));
                let k4 = self.rhs(at(x + h), &axpy(y, h, &[(1.0, &k3)]));
                y = axpy(y, h / 6.0, &[(1.0, &k1), (2.0, &k2), (2.0, &k3), (1.0, &k4)]);
            }
        }
        StateVector::new(y[0], y[1])
    }

    /// Subintervals of `(a, b)` cut at breakpoints and extra stops, ordered
    /// in the direction of integration.
    fn pieces(&self, a: f64, b: f64, stops: &[f64]) -> Vec<(f64, f64)> {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let mut cuts: Vec<f64> = self
            .breakpoints
            .iter()
            .chain(stops)
            .copied()
            .filter(|&c| c > lo && c < hi)
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        if a > b {
            cuts.reverse();
        }
        let mut out = Vec::with_capacity(cuts.len() + 1);
        let mut start = a;
        for c in cuts {
            out.push((start, c));
            start = c;
        }
        out.push((start, b));
        out
    }

    /// Integrates from `a` to `b`, calling `observer` after every accepted
    /// step. `stops` are forced step boundaries (sample points) and every
    /// stop reached is reported. Returns the final state, still divided by
    /// the accumulated scale when renormalization is on.
    pub(crate) fn trace(
        &self,
        a: f64,
        b: f64,
        init: StateVector,
        cfg: &SolverConfig,
        stops: &[f64],
        opts: TraceOptions,
        mut observer: impl FnMut(&TracePoint),
    ) -> Result<StateVector> {
        cfg.validate()?;
        if !init.is_finite() {
            return Err(Error::NonFinite { x: a });
        }
        let mut y = [init.u, init.du];
        let mut log_scale = 0.0;
        if a == b {
            return Ok(init);
        }
        let max_step = cfg.max_step.unwrap_or(1e-2 * (b - a).abs());
        let dir = (b - a).signum();
        let mut h_guess = max_step.min((b - a).abs());

        for (lo, hi) in self.pieces(a, b, stops) {
            let (xl, xh) = inner_bounds(lo, hi);
            let (clamp_lo, clamp_hi) = (xl.min(xh), xl.max(xh));
            let at = |t: f64| t.clamp(clamp_lo, clamp_hi);
            let mut x = lo;
            let mut k1 = self.rhs(at(x), &y);
            loop {
                let remaining = (hi - x) * dir;
                if remaining <= 0.0 {
                    break;
                }
                let mut h = h_guess.min(max_step);
                let last = h >= remaining * (1.0 - 1e-12);
                if last {
                    h = remaining;
                }
                let hs = h * dir;
                let k2 = self.rhs(at(x + C2 * hs), &axpy(y, hs, &[(A21, &k1)]));
                let k3 = self.rhs(at(x + C3 * hs), &axpy(y, hs, &[(A31, &k1), (A32, &k2)]));
                let k4 = self.rhs(at(x + C4 * hs), &axpy(y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
                let k5 = self.rhs(
                    at(x + C5 * hs),
                    &axpy(y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
                );
                let x_new = if last { hi } else { x + hs };
                let k6 = self.rhs(
                    at(x_new),
                    &axpy(y, hs, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
                );
                let y_new = axpy(y, hs, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
                let k7 = self.rhs(at(x_new), &y_new);

                let mut err = 0.0;
                for i in 0..2 {
                    let e = hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                    let sc = cfg.abs_tol + cfg.rel_tol * y[i].abs().max(y_new[i].abs());
                    err += (e / sc) * (e / sc);
                }
                let err = (err / 2.0).sqrt();
                if !err.is_finite() || !y_new[0].is_finite() || !y_new[1].is_finite() {
                    if h <= cfg.min_step {
                        return Err(Error::NonFinite { x });
                    }
                    h_guess = h * 0.2;
                    continue;
                }

                if err <= 1.0 {
                    x = x_new;
                    y = y_new;
                    k1 = k7;
                    if opts.renormalize {
                        let n = y[0].hypot(y[1]);
                        if n > RENORM_THRESHOLD {
                            y = [y[0] / n, y[1] / n];
                            k1 = [k1[0] / n, k1[1] / n];
                            log_scale += n.ln();
                        }
                    }
                    observer(&TracePoint {
                        x,
                        state: StateVector::new(y[0], y[1]),
                        log_scale,
                    });
                    let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                    if !last {
                        h_guess = h * fac;
                    }
                } else {
                    let fac = (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                    let h_new = h * fac;
                    if h_new < cfg.min_step && h_new < remaining {
                        return Err(Error::StepUnderflow { x, h: h_new });
                    }
                    h_guess = h_new;
                }
            }
        }
        Ok(StateVector::new(y[0], y[1]))
    }
}

/// Closest representable points strictly inside `(lo, hi)` (in either order).
fn inner_bounds(lo: f64, hi: f64) -> (f64, f64) {
    if lo < hi {
        (lo.next_up(), hi.next_down())
    } else {
        (lo.next_down(), hi.next_up())
    }
}

/// Free-function form of [`LinearOde::integrate`].
pub fn integrate(
    q: impl Fn(f64) -> f64 + Sync,
    f: impl Fn(f64) -> f64 + Sync,
    breakpoints: &[f64],
    (a, b): (f64, f64),
    init: StateVector,
    cfg: &SolverConfig,
) -> Result<StateVector> {
    LinearOde::new(q)
        .with_forcing(f)
        .with_breakpoints(breakpoints.iter().copied())
        .integrate(a, b, init, cfg)
}

/// Free-function form of [`LinearOde::propagator`].
pub fn propagator(
    q: impl Fn(f64) -> f64 + Sync,
    breakpoints: &[f64],
    (a, b): (f64, f64),
    cfg: &SolverConfig,
) -> Result<PropagatorMatrix> {
    LinearOde::new(q)
        .with_breakpoints(breakpoints.iter().copied())
        .propagator(a, b, cfg)
}

/// Exact transfer matrix of `u'' = c u` over a length `len` (any sign).
pub fn constant_propagator(c: f64, len: f64) -> PropagatorMatrix {
    let z = c * len * len;
    if z.abs() < 1e-8 {
        // Taylor through second order in z
        let s = len * (1.0 + z / 6.0 + z * z / 120.0);
        let cc = 1.0 + z / 2.0 + z * z / 24.0;
        let d = c * len * (1.0 + z / 6.0 + z * z / 120.0);
        return PropagatorMatrix([[cc, s], [d, cc]]);
    }
    if c > 0.0 {
        let k = c.sqrt();
        let (sh, ch) = ((k * len).sinh(), (k * len).cosh());
        PropagatorMatrix([[ch, sh / k], [k * sh, ch]])
    } else {
        let k = (-c).sqrt();
        let (s, co) = (k * len).sin_cos();
        PropagatorMatrix([[co, s / k], [-k * s, co]])
    }
}
