//! Shooting machinery shared by all eigenvalue problems.
//!
//! A problem lives on `[xl, xr]` with Dirichlet walls. The middle is either
//! an interface matrix at the origin, the squeezed barrier (integrated in
//! the stretched variable `ξ = x/ε`), or a Robin condition closing a
//! half-line problem on `[xl, 0]`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::ivp::{LinearOde, PropagatorMatrix, SolverConfig, StateVector, TraceOptions};
use crate::profiles::Profile;
use crate::roots;

use super::{BoundaryTrace, EigenFunction, SpectrumOptions};

pub(crate) type Coef<'a> = &'a (dyn Fn(f64) -> f64 + Send + Sync);

#[derive(Clone, Copy)]
pub(crate) enum Middle<'a> {
    Interface(PropagatorMatrix),
    Inner { p: &'a Profile, alpha: f64, eps: f64 },
    /// `h1 v'(0) = h2 v(0)`; the domain is `[xl, 0]`.
    Robin([f64; 2]),
}

pub(crate) struct Setup<'a> {
    u: Coef<'a>,
    u_breaks: &'a [f64],
    xl: f64,
    /// Right wall; for `Robin` only the extent of the zero half of sampled
    /// eigenfunctions.
    xr: f64,
    middle: Middle<'a>,
    umin: f64,
}

struct Region<'s> {
    ode: LinearOde<'s>,
    from: f64,
    to: f64,
    /// `dx/ds` for the region variable `s`.
    scale: f64,
}

enum Link<'s> {
    Region(Region<'s>),
    Map(PropagatorMatrix),
}

#[derive(Clone, Copy, PartialEq)]
enum Part {
    Full,
    Left,
    Right,
}

struct ChainEnd {
    state: StateVector,
    angle: f64,
    log_scale: f64,
}

struct Sample {
    u: f64,
    log_scale: f64,
}

fn cross(a: StateVector, b: StateVector) -> f64 {
    a.u * b.du - a.du * b.u
}

fn wrap_near(d: f64, center: f64) -> f64 {
    d - 2.0 * PI * ((d - center) / (2.0 * PI)).round()
}

impl<'a> Setup<'a> {
    pub(crate) fn new(u: Coef<'a>, u_breaks: &'a [f64], xl: f64, xr: f64, middle: Middle<'a>) -> Self {
        let hi = if matches!(middle, Middle::Robin(_)) { 0.0 } else { xr };
        let n = 2000;
        let umin = (0..=n)
            .map(|i| u(xl + (hi - xl) * i as f64 / n as f64))
            .fold(f64::INFINITY, f64::min);
        Setup {
            u,
            u_breaks,
            xl,
            xr,
            middle,
            umin,
        }
    }

    fn region_x(&self, lam: f64, from: f64, to: f64) -> Link<'a> {
        let u = self.u;
        Link::Region(Region {
            ode: LinearOde::new(move |x| u(x) - lam).with_breakpoints(self.u_breaks.iter().copied()),
            from,
            to,
            scale: 1.0,
        })
    }

    fn region_inner(&self, lam: f64, from: f64, to: f64) -> Link<'a> {
        let Middle::Inner { p, alpha, eps } = self.middle else {
            unreachable!("inner region without a barrier")
        };
        let u = self.u;
        let breaks = p
            .breakpoints()
            .into_iter()
            .chain(self.u_breaks.iter().map(|b| b / eps).filter(|b| b.abs() < 1.0));
        Link::Region(Region {
            ode: LinearOde::new(move |xi| eps * eps * (u(eps * xi) - lam) + alpha * p.evaluate(xi)).with_breakpoints(breaks),
            from,
            to,
            scale: eps,
        })
    }

    /// Links of a shot and, when a grid is given, the sample stops of each
    /// link in its own variable.
    fn chain(&self, lam: f64, part: Part, grid: Option<&[f64]>) -> (Vec<Link<'a>>, Vec<Vec<f64>>) {
        let mut links = Vec::new();
        let mut bounds: Vec<(f64, f64, f64)> = Vec::new();
        match (self.middle, part) {
            (Middle::Interface(c), Part::Full) => {
                links.push(self.region_x(lam, self.xl, 0.0));
                links.push(Link::Map(c));
                links.push(self.region_x(lam, 0.0, self.xr));
            }
            (Middle::Interface(_), Part::Left) | (Middle::Robin(_), _) => {
                links.push(self.region_x(lam, self.xl, 0.0));
            }
            (Middle::Interface(_), Part::Right) => {
                links.push(self.region_x(lam, self.xr, 0.0));
            }
            (Middle::Inner { eps, .. }, Part::Full) => {
                links.push(self.region_x(lam, self.xl, -eps));
                links.push(self.region_inner(lam, -1.0, 1.0));
                links.push(self.region_x(lam, eps, self.xr));
            }
            (Middle::Inner { eps, .. }, Part::Left) => {
                links.push(self.region_x(lam, self.xl, -eps));
                links.push(self.region_inner(lam, -1.0, 0.0));
            }
            (Middle::Inner { eps, .. }, Part::Right) => {
                links.push(self.region_x(lam, self.xr, eps));
                links.push(self.region_inner(lam, 1.0, 0.0));
            }
        }
        for l in &links {
            match l {
                Link::Region(r) => bounds.push((r.from, r.to, r.scale)),
                Link::Map(_) => bounds.push((f64::NAN, f64::NAN, 1.0)),
            }
        }
        let stops = match grid {
            None => vec![Vec::new(); links.len()],
            Some(points) => {
                // each grid point goes to the first region (in shot order) whose
                // physical span contains it
                let mut out = vec![Vec::new(); links.len()];
                let mut taken = vec![false; points.len()];
                for (li, &(from, to, scale)) in bounds.iter().enumerate() {
                    if from.is_nan() {
                        continue;
                    }
                    let (x0, x1) = (from * scale, to * scale);
                    let (lo, hi) = (x0.min(x1), x0.max(x1));
                    for (pi, &x) in points.iter().enumerate() {
                        if !taken[pi] && x >= lo && x <= hi {
                            taken[pi] = true;
                            out[li].push(x / scale);
                        }
                    }
                }
                out
            }
        };
        (links, stops)
    }

    /// Runs a chain from `init` (physical data at its start).
    fn run(
        links: &[Link<'_>],
        stops: &[Vec<f64>],
        init: StateVector,
        cfg: &SolverConfig,
        track_angle: bool,
        mut samples: Option<&mut Vec<Sample>>,
    ) -> Result<ChainEnd> {
        let mut phys = init;
        let mut angle = init.u.atan2(init.du);
        let mut log_total = 0.0;
        for (link, stop) in links.iter().zip(stops) {
            match link {
                Link::Map(c) => {
                    let next = c.apply(phys);
                    if track_angle {
                        let psi0 = c.0[0][1].atan2(c.0[1][1]);
                        let d = next.u.atan2(next.du) - angle;
                        angle += wrap_near(d, psi0);
                    }
                    phys = next;
                }
                Link::Region(r) => {
                    let s = r.scale;
                    let local = StateVector::new(phys.u, phys.du * s);
                    let mut next_stop = 0;
                    if let Some(out) = samples.as_deref_mut() {
                        while next_stop < stop.len() && stop[next_stop] == r.from {
                            out.push(Sample {
                                u: phys.u,
                                log_scale: log_total,
                            });
                            next_stop += 1;
                        }
                    }
                    let mut last_log = 0.0;
                    let base_log = log_total;
                    let end = r.ode.trace(
                        r.from,
                        r.to,
                        local,
                        cfg,
                        stop,
                        TraceOptions { renormalize: true },
                        |p| {
                            last_log = p.log_scale;
                            if track_angle {
                                let d = p.state.u.atan2(p.state.du / s) - angle;
                                angle += wrap_near(d, 0.0);
                            }
                            if let Some(out) = samples.as_deref_mut() {
                                while next_stop < stop.len() && stop[next_stop] == p.x {
                                    out.push(Sample {
                                        u: p.state.u,
                                        log_scale: base_log + p.log_scale,
                                    });
                                    next_stop += 1;
                                }
                            }
                        },
                    )?;
                    if next_stop != stop.len() && samples.is_some() {
                        return Err(Error::InvalidConfig("eigenfunction grid does not match the shot".into()));
                    }
                    log_total += last_log;
                    phys = StateVector::new(end.u, end.du / s);
                }
            }
        }
        Ok(ChainEnd {
            state: phys,
            angle,
            log_scale: log_total,
        })
    }

    /// Number of eigenvalues strictly below `lam`.
    pub(crate) fn count(&self, lam: f64, cfg: &SolverConfig) -> Result<usize> {
        let (links, stops) = self.chain(lam, Part::Full, None);
        let end = Self::run(&links, &stops, StateVector::new(0.0, 1.0), cfg, true, None)?;
        let phi = end.angle;
        let n = match self.middle {
            Middle::Robin(h) => {
                let mut target = h[0].atan2(h[1]).rem_euclid(PI);
                if target == 0.0 {
                    target = PI;
                }
                if phi <= target {
                    0
                } else {
                    ((phi - target) / PI).floor() as i64 + 1
                }
            }
            Middle::Interface(c) => (phi / PI).floor() as i64 - interface_base(&c),
            Middle::Inner { .. } => (phi / PI).floor() as i64,
        };
        Ok(n.max(0) as usize)
    }

    /// Normalized Wronskian mismatch; vanishes exactly at eigenvalues and
    /// changes sign across each simple one.
    pub(crate) fn mismatch(&self, lam: f64, cfg: &SolverConfig) -> Result<f64> {
        let (l, r) = self.ends(lam, cfg)?;
        Ok(match self.middle {
            Middle::Robin(h) => {
                (l.u * h[1] - l.du * h[0]) / (l.norm() * h[0].hypot(h[1]))
            }
            _ => {
                let r = r.expect("two-sided shot");
                cross(l, r) / (l.norm() * r.norm())
            }
        })
    }

    /// Left data at the matching point (after the interface map) and the
    /// right data there.
    fn ends(&self, lam: f64, cfg: &SolverConfig) -> Result<(StateVector, Option<StateVector>)> {
        let (ll, ls) = self.chain(lam, Part::Left, None);
        let left = Self::run(&ll, &ls, StateVector::new(0.0, 1.0), cfg, false, None)?.state;
        if let Middle::Robin(_) = self.middle {
            return Ok((left, None));
        }
        let (rl, rs) = self.chain(lam, Part::Right, None);
        let right = Self::run(&rl, &rs, StateVector::new(0.0, 1.0), cfg, false, None)?.state;
        let left = match self.middle {
            Middle::Interface(c) => c.apply(left),
            _ => left,
        };
        Ok((left, Some(right)))
    }

    /// A value below the whole spectrum (guaranteed for the barrier and
    /// Dirichlet cases, from the constant-potential bound states otherwise).
    fn floor(&self) -> f64 {
        match self.middle {
            Middle::Inner { p, alpha, eps } => self.umin - alpha.abs() * p.abs_bound() / (eps * eps) - 1.0,
            Middle::Interface(c) => {
                let m = c.0;
                let k = positive_roots(m[0][1], m[0][0] + m[1][1], m[1][0]);
                self.umin - 4.0 * (k * k + 1.0) - 10.0
            }
            Middle::Robin(h) => {
                let k = if h[0] != 0.0 { (h[1] / h[0]).max(0.0) } else { 0.0 };
                self.umin - 4.0 * (k * k + 1.0) - 10.0
            }
        }
    }

    /// The `k`-th eigenvalue (1-based) and its residual.
    pub(crate) fn eigenvalue(&self, k: usize, opts: &SpectrumOptions) -> Result<(f64, f64)> {
        let cfg = &opts.cfg;
        let floor = self.floor();
        let mut lo = (self.umin - 1.0).max(floor);
        let mut c_lo = self.count(lo, cfg)?;
        let mut w = 1.0f64;
        while c_lo >= k {
            if lo <= floor {
                return Err(Error::WindowExhausted(format!(
                    "{c_lo} eigenvalues below the lower bound {floor} while looking for index {k}"
                )));
            }
            lo = (lo - w).max(floor);
            w *= 4.0;
            c_lo = self.count(lo, cfg)?;
        }
        let mut hi = lo + 2.0;
        let mut c_hi = self.count(hi, cfg)?;
        let mut w = 2.0;
        let mut tries = 0;
        while c_hi < k {
            lo = hi;
            c_lo = c_hi;
            hi += w;
            w *= 2.0;
            c_hi = self.count(hi, cfg)?;
            tries += 1;
            if tries > 60 {
                return Err(Error::WindowExhausted(format!("no eigenvalue of index {k} below {hi}")));
            }
        }
        while !(c_lo + 1 == k && c_hi == k) {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi || hi - lo <= opts.xtol(hi) {
                return Err(Error::Degenerate(format!(
                    "eigenvalues {} and {} coincide near {mid}",
                    k.saturating_sub(1).max(c_lo + 1),
                    k
                )));
            }
            let c = self.count(mid, cfg)?;
            if c >= k {
                hi = mid;
                c_hi = c;
            } else {
                lo = mid;
                c_lo = c;
            }
        }
        let lam = roots::brent(|l| self.mismatch(l, cfg), lo, hi, opts.xtol(hi))?;
        let residual = self.mismatch(lam, cfg)?.abs();
        Ok((lam, residual))
    }

    fn grids(&self, ppu: usize) -> (Vec<f64>, Vec<f64>) {
        let side = |len: f64| -> Vec<f64> {
            let mut n = ((len * ppu as f64).ceil() as usize).max(2);
            n += n % 2;
            (0..=n).map(|i| if i == n { len } else { len * i as f64 / n as f64 }).collect()
        };
        let mut left: Vec<f64> = side(-self.xl).into_iter().map(|x| -x).collect();
        left.reverse();
        let right = side(self.xr);
        (left, right)
    }

    /// Unit-`L²` eigenfunction sampled on uniform half-grids.
    pub(crate) fn eigenfunction(&self, lam: f64, opts: &SpectrumOptions) -> Result<EigenFunction> {
        let cfg = &opts.cfg;
        let (x_left, x_right) = self.grids(opts.points_per_unit);

        let (ll, ls) = self.chain(lam, Part::Left, Some(&x_left));
        let mut left_samples = Vec::with_capacity(x_left.len());
        let left = Self::run(&ll, &ls, StateVector::new(0.0, 1.0), cfg, false, Some(&mut left_samples))?;

        let mut right_desc: Vec<f64> = x_right.clone();
        right_desc.reverse();
        let (target, right) = match self.middle {
            Middle::Robin(_) => (None, None),
            _ => {
                let (rl, rs) = self.chain(lam, Part::Right, Some(&right_desc));
                let mut samples = Vec::with_capacity(x_right.len());
                let end = Self::run(&rl, &rs, StateVector::new(0.0, 1.0), cfg, false, Some(&mut samples))?;
                let target = match self.middle {
                    Middle::Interface(c) => c.apply(left.state),
                    _ => left.state,
                };
                (Some(target), Some((end, samples)))
            }
        };

        let mut right_vals: Vec<(f64, f64)> = Vec::new();
        let mut plus = (0.0, 0.0, f64::NEG_INFINITY);
        if let (Some(t), Some((end, samples))) = (target, right) {
            let r = end.state;
            let s = (t.u * r.u + t.du * r.du) / (r.u * r.u + r.du * r.du);
            let shift = left.log_scale - end.log_scale;
            right_vals = samples.iter().rev().map(|smp| (s * smp.u, smp.log_scale + shift)).collect();
            plus = (s * r.u, s * r.du, end.log_scale + shift);
        }
        let left_vals: Vec<(f64, f64)> = left_samples.iter().map(|s| (s.u, s.log_scale)).collect();
        let reference = left_vals
            .iter()
            .chain(&right_vals)
            .map(|v| v.1)
            .chain([left.log_scale, plus.2])
            .fold(f64::NEG_INFINITY, f64::max);
        let expand = |(v, l): (f64, f64)| if l == f64::NEG_INFINITY { 0.0 } else { v * (l - reference).exp() };

        let v_left: Vec<f64> = left_vals.into_iter().map(expand).collect();
        let v_right: Vec<f64> = if right_vals.is_empty() {
            vec![0.0; x_right.len()]
        } else {
            right_vals.into_iter().map(expand).collect()
        };
        if v_left.len() != x_left.len() || v_right.len() != x_right.len() {
            return Err(Error::InvalidConfig("eigenfunction sampling lost grid points".into()));
        }
        let lscale = (left.log_scale - reference).exp();
        let pscale = if plus.2 == f64::NEG_INFINITY { 0.0 } else { (plus.2 - reference).exp() };
        let mut ef = EigenFunction {
            x_left,
            v_left,
            x_right,
            v_right,
            trace: BoundaryTrace {
                v_minus: left.state.u * lscale,
                dv_minus: left.state.du * lscale,
                v_plus: plus.0 * pscale,
                dv_plus: plus.1 * pscale,
            },
        };
        let n2 = ef.norm_squared();
        if !(n2 > 0.0 && n2.is_finite()) {
            return Err(Error::NonFinite { x: 0.0 });
        }
        ef.scale(1.0 / n2.sqrt());
        Ok(ef)
    }
}

/// Offset of the oscillation count produced by the interface map, read off
/// from where it sends the Dirichlet direction.
fn interface_base(c: &PropagatorMatrix) -> i64 {
    let (c12, c22) = (c.0[0][1], c.0[1][1]);
    if c12 == 0.0 {
        if c22 > 0.0 {
            0
        } else {
            1
        }
    } else if c12 > 0.0 {
        0
    } else {
        -1
    }
}

/// Largest positive root of `a k² + b k + c` (0 when none).
fn positive_roots(a: f64, b: f64, c: f64) -> f64 {
    let mut best: f64 = 0.0;
    if a == 0.0 {
        if b != 0.0 {
            best = best.max(-c / b);
        }
        return best;
    }
    let disc = b * b - 4.0 * a * c;
    if disc >= 0.0 {
        let s = disc.sqrt();
        best = best.max((-b + s) / (2.0 * a)).max((-b - s) / (2.0 * a));
    }
    best
}
