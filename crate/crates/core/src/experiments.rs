//! Studies built on the solvers: eigenvalue and eigenfunction convergence
//! along an ε ladder, the diving ground state, and the sign pattern of the
//! coupling function over the resonance set.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profiles::{classify, ClassKind, Profile, DEFAULT_MOMENT_TOL};
use crate::resonance::{self, ScanOptions};
use crate::spectra::{
    corrector_lambda1, eigen_limit, eigen_perturbed, perturbed_count, rescaled_negative_count, rescaled_spectrum,
    BoundaryCoupling, ConfiningPotential, EigenFlag, EigenFunction, SpectrumOptions,
};

/// Number of smallest-ε ladder points used by the fits.
pub const FIT_POINTS: usize = 4;

/// Least-squares line `y = slope x + intercept`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    let n = xs.len();
    if n < 2 || n != ys.len() {
        return Err(Error::InvalidConfig("a line fit needs at least two paired points".into()));
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Degenerate("line fit with identical abscissas".into()));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Fit of `log y = order · log x + log c`, returning `(order, c)`.
pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return Err(Error::Degenerate("log-log fit needs positive data".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let (order, b) = linear_fit(&lx, &ly)?;
    Ok((order, b.exp()))
}

fn check_ladder(ladder: &[f64], min_len: usize) -> Result<()> {
    if ladder.len() < min_len {
        return Err(Error::InvalidConfig(format!("the eps ladder needs at least {min_len} entries")));
    }
    if ladder.iter().any(|e| !(*e > 0.0 && *e < 1.0)) || ladder.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidConfig(format!("eps ladder must be strictly descending in (0, 1): {ladder:?}")));
    }
    Ok(())
}

/// Plain-text table mirroring one section of a JSON report.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &str, header: &[&str]) -> Self {
        Table {
            name: name.into(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// 17 significant digits in scientific notation.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// Writes `report` as pretty JSON.
pub fn write_json<T: Serialize>(report: &T, path: &Path) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut f, report)?;
    writeln!(f)?;
    Ok(())
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ConvergenceOptions {
    pub spectrum: SpectrumOptions,
    /// Solver used for the resonance decision and the corrector.
    pub resonance_cfg: crate::ivp::SolverConfig,
    pub residual_tol: f64,
    /// Half-width of the rescaled problem that counts diving levels.
    pub oracle_radius: f64,
    pub min_order: f64,
    /// Allowed relative growth between successive eigenfunction distances.
    pub monotone_slack: f64,
    pub corrector_rel_tol: f64,
}

impl Default for ConvergenceOptions {
    fn default() -> Self {
        ConvergenceOptions {
            spectrum: SpectrumOptions::default(),
            resonance_cfg: resonance::default_solver(),
            residual_tol: resonance::DEFAULT_RESIDUAL_TOL,
            oracle_radius: 30.0,
            min_order: 0.8,
            monotone_slack: 0.1,
            corrector_rel_tol: 0.05,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenRow {
    /// 1-based index in the limit spectrum.
    pub k: usize,
    pub lambda_limit: f64,
    /// `λ^ε_{k+N}` along the ladder.
    pub lambda_eps: Vec<f64>,
    pub errors: Vec<f64>,
    /// `true` when every error is at solver precision; no order is fitted.
    pub exact: bool,
    pub order: Option<f64>,
    pub constant: Option<f64>,
    /// Intercept of `(λ^ε - λ)/ε` against `ε`.
    pub slope: Option<f64>,
    pub corrector: Option<f64>,
    pub distances: Vec<f64>,
    pub distances_monotone: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdicts {
    pub order_ok: bool,
    pub distances_monotone: bool,
    /// Slope against corrector for the lowest row, when both exist.
    pub corrector_match: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub profile: String,
    pub potential: String,
    pub alpha: f64,
    pub resonant: bool,
    pub theta: Option<f64>,
    pub eps_ladder: Vec<f64>,
    /// Weakest negative level of the rescaled problem.
    pub mu_weakest: Option<f64>,
    pub diving_counts: Vec<usize>,
    pub rows: Vec<EigenRow>,
    pub verdicts: Verdicts,
}

impl ConvergenceReport {
    pub fn tables(&self) -> Vec<Table> {
        let mut eig = Table::new("eigenvalues", &["k", "eps", "lambda_eps", "lambda_limit", "error", "distance"]);
        let mut fit = Table::new("fits", &["k", "exact", "order", "constant", "slope", "corrector"]);
        for row in &self.rows {
            for (i, eps) in self.eps_ladder.iter().enumerate() {
                eig.rows.push(vec![
                    row.k.to_string(),
                    fmt_f64(*eps),
                    fmt_f64(row.lambda_eps[i]),
                    fmt_f64(row.lambda_limit),
                    fmt_f64(row.errors[i]),
                    fmt_f64(row.distances[i]),
                ]);
            }
            fit.rows.push(vec![
                row.k.to_string(),
                row.exact.to_string(),
                fmt_opt(row.order),
                fmt_opt(row.constant),
                fmt_opt(row.slope),
                fmt_opt(row.corrector),
            ]);
        }
        let mut diving = Table::new("diving_counts", &["eps", "count"]);
        for (eps, n) in self.eps_ladder.iter().zip(&self.diving_counts) {
            diving.rows.push(vec![fmt_f64(*eps), n.to_string()]);
        }
        vec![eig, fit, diving]
    }
}

/// Self-convergence of the bounded spectrum of the perturbed operator to
/// the limit operator along a descending ε ladder.
pub fn convergence_study(
    u: &ConfiningPotential,
    p: &Profile,
    alpha: f64,
    eps_ladder: &[f64],
    k_count: usize,
    opts: &ConvergenceOptions,
) -> Result<ConvergenceReport> {
    check_ladder(eps_ladder, FIT_POINTS)?;
    if k_count == 0 {
        return Err(Error::InvalidConfig("k_count must be at least 1".into()));
    }
    let spec_opts = opts.spectrum.with_eigenfunctions();
    let residual = resonance::residual_of(p, alpha, &opts.resonance_cfg)?;
    let resonant = residual <= opts.residual_tol;
    let theta = if resonant {
        Some(resonance::coupling_theta(p, alpha, &opts.resonance_cfg, opts.residual_tol)?)
    } else {
        None
    };
    let bc = match theta {
        Some(t) => BoundaryCoupling::theta(t)?,
        None => BoundaryCoupling::DirichletSplit,
    };
    let limit = eigen_limit(u, &bc, k_count + 1, &spec_opts)?;
    let limit_efs = limit.eigenfunctions.as_ref().expect("eigenfunctions requested");

    let (mu_weakest, diving_counts) = diving_counts(u, p, alpha, eps_ladder, opts)?;

    let perturbed = eps_ladder
        .par_iter()
        .zip(&diving_counts)
        .map(|(&eps, &n)| eigen_perturbed(u, p, alpha, eps, (n + 1, n + k_count), &spec_opts))
        .collect::<Result<Vec<_>>>()?;

    // each aligned eigenvalue must sit closest to its own limit level
    let finest = perturbed.last().expect("non-empty ladder");
    for (i, l) in finest.eigenvalues.iter().enumerate() {
        let nearest = limit
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - l).abs().total_cmp(&(b.1 - l).abs()))
            .map(|(j, _)| j)
            .expect("non-empty limit spectrum");
        let tied = (limit.eigenvalues[nearest] - limit.eigenvalues[i]).abs() <= 10.0 * opts.spectrum.eig_tol;
        if nearest != i && !tied {
            return Err(Error::Misalignment(format!(
                "perturbed level {l} at eps = {} is nearest to limit level {} instead of {}",
                eps_ladder[eps_ladder.len() - 1],
                nearest + 1,
                i + 1
            )));
        }
    }

    let exact_tol = 10.0 * opts.spectrum.eig_tol;
    let fit_from = eps_ladder.len() - FIT_POINTS;
    let rows = (0..k_count)
        .map(|i| {
            let lambda = limit.eigenvalues[i];
            let lambda_eps: Vec<f64> = perturbed.iter().map(|s| s.eigenvalues[i]).collect();
            let errors: Vec<f64> = lambda_eps.iter().map(|l| (l - lambda).abs()).collect();
            let exact = errors.iter().all(|e| *e <= exact_tol);
            let (order, constant) = if exact {
                (None, None)
            } else {
                let (o, c) = loglog_fit(&eps_ladder[fit_from..], &errors[fit_from..])?;
                (Some(o), Some(c))
            };
            let slope = if exact {
                None
            } else {
                let q: Vec<f64> = eps_ladder[fit_from..]
                    .iter()
                    .zip(&lambda_eps[fit_from..])
                    .map(|(e, l)| (l - lambda) / e)
                    .collect();
                Some(linear_fit(&eps_ladder[fit_from..], &q)?.1)
            };
            let corrector = if limit.flags[i] == EigenFlag::Ok {
                corrector_lambda1(
                    u,
                    p,
                    alpha,
                    lambda,
                    &limit_efs[i].trace,
                    resonant,
                    &opts.resonance_cfg,
                    opts.residual_tol,
                )
                .ok()
            } else {
                None
            };
            let distances = perturbed
                .iter()
                .map(|s| ef(s.eigenfunctions.as_ref(), i).distance(&limit_efs[i]))
                .collect::<Result<Vec<f64>>>()?;
            let distances_monotone = exact
                || distances
                    .windows(2)
                    .all(|w| w[1] <= (1.0 + opts.monotone_slack) * w[0] || w[1] <= exact_tol.sqrt());
            Ok(EigenRow {
                k: i + 1,
                lambda_limit: lambda,
                lambda_eps,
                errors,
                exact,
                order,
                constant,
                slope,
                corrector,
                distances,
                distances_monotone,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let verdicts = Verdicts {
        order_ok: rows.iter().all(|r| r.exact || r.order.is_some_and(|o| o >= opts.min_order)),
        distances_monotone: rows.iter().all(|r| r.distances_monotone),
        corrector_match: match (rows[0].slope, rows[0].corrector) {
            (Some(s), Some(c)) => Some((s - c).abs() <= opts.corrector_rel_tol * c.abs()),
            _ => None,
        },
    };
    Ok(ConvergenceReport {
        profile: p.label().to_string(),
        potential: u.label().to_string(),
        alpha,
        resonant,
        theta,
        eps_ladder: eps_ladder.to_vec(),
        mu_weakest,
        diving_counts,
        rows,
        verdicts,
    })
}

fn ef(efs: Option<&Vec<EigenFunction>>, i: usize) -> &EigenFunction {
    &efs.expect("eigenfunctions requested")[i]
}

/// Per-ε number of levels below `μ_N ε⁻² / 2`, where `μ_N` is the weakest
/// negative level of `-d²/dξ² + αΨ`. The count must be non-decreasing and
/// settle on the rescaled count before the last rung.
fn diving_counts(
    u: &ConfiningPotential,
    p: &Profile,
    alpha: f64,
    ladder: &[f64],
    opts: &ConvergenceOptions,
) -> Result<(Option<f64>, Vec<usize>)> {
    if alpha == 0.0 {
        return Ok((None, vec![0; ladder.len()]));
    }
    let cfg = &opts.spectrum.cfg;
    let n = rescaled_negative_count(p, alpha, opts.oracle_radius, cfg)?;
    if n == 0 {
        return Ok((None, vec![0; ladder.len()]));
    }
    let mu = rescaled_spectrum(p, alpha, opts.oracle_radius, n, &opts.spectrum)?.eigenvalues[n - 1];
    let counts = ladder
        .par_iter()
        .map(|&eps| perturbed_count(u, p, alpha, eps, 0.5 * mu / (eps * eps), cfg))
        .collect::<Result<Vec<_>>>()?;
    let m = counts.len();
    if counts.windows(2).any(|w| w[1] < w[0]) || counts[m - 1] != n || counts[m - 2] != n {
        return Err(Error::Misalignment(format!(
            "diving count {counts:?} does not settle on {n} along the ladder {ladder:?}"
        )));
    }
    Ok((Some(mu), counts))
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DivingOptions {
    pub spectrum: SpectrumOptions,
    pub oracle_radius: f64,
    pub rel_tol: f64,
}

impl Default for DivingOptions {
    fn default() -> Self {
        DivingOptions {
            spectrum: SpectrumOptions::default(),
            oracle_radius: 30.0,
            rel_tol: 0.02,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DivingRow {
    pub eps: f64,
    pub lambda1: f64,
    pub scaled: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DivingReport {
    pub profile: String,
    pub alpha: f64,
    /// Ground state of `-d²/dξ² + αΨ` on `[-S, S]`.
    pub mu: f64,
    pub oracle_radius: f64,
    pub rows: Vec<DivingRow>,
    /// Relative error at the smallest ε is within tolerance.
    pub converged: bool,
}

impl DivingReport {
    pub fn tables(&self) -> Vec<Table> {
        let mut t = Table::new("diving", &["eps", "lambda1", "eps2_lambda1", "mu", "rel_error"]);
        for r in &self.rows {
            t.rows.push(vec![
                fmt_f64(r.eps),
                fmt_f64(r.lambda1),
                fmt_f64(r.scaled),
                fmt_f64(self.mu),
                fmt_f64(r.rel_error),
            ]);
        }
        vec![t]
    }
}

/// `ε² λ₁^ε` along the ladder against the rescaled ground state `μ < 0`.
pub fn diving_study(
    u: &ConfiningPotential,
    p: &Profile,
    alpha: f64,
    eps_ladder: &[f64],
    opts: &DivingOptions,
) -> Result<DivingReport> {
    check_ladder(eps_ladder, 1)?;
    let class = classify(p, DEFAULT_MOMENT_TOL);
    if matches!(class.kind, ClassKind::General) {
        return Err(Error::Precondition(format!(
            "diving needs a zero-mean profile, m0 = {}",
            class.m0
        )));
    }
    if alpha == 0.0 {
        return Err(Error::Precondition("no diving levels at alpha = 0".into()));
    }
    let mu = rescaled_spectrum(p, alpha, opts.oracle_radius, 1, &opts.spectrum)?.eigenvalues[0];
    if !(mu < 0.0) {
        return Err(Error::Precondition(format!("rescaled ground state {mu} is not negative")));
    }
    let rows = eps_ladder
        .par_iter()
        .map(|&eps| {
            let l = eigen_perturbed(u, p, alpha, eps, (1, 1), &opts.spectrum)?.eigenvalues[0];
            let scaled = l * eps * eps;
            Ok(DivingRow {
                eps,
                lambda1: l,
                scaled,
                rel_error: ((scaled - mu) / mu).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let converged = rows.last().is_some_and(|r| r.rel_error <= opts.rel_tol);
    Ok(DivingReport {
        profile: p.label().to_string(),
        alpha,
        mu,
        oracle_radius: opts.oracle_radius,
        rows,
        converged,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Positive,
    Negative,
    Zero,
}

#[derive(Debug, Clone, Serialize)]
pub struct HypothesisRow {
    pub alpha: f64,
    pub theta: f64,
    pub abs_theta: f64,
    pub side: Side,
    /// `|θ| > 1` on the positive side, `|θ| < 1` on the negative side.
    pub satisfies: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileHypothesis {
    pub profile: String,
    pub rows: Vec<HypothesisRow>,
    pub positive: (usize, usize),
    pub negative: (usize, usize),
    pub all_satisfied: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvenCheck {
    pub profile: String,
    pub rows: Vec<HypothesisRow>,
    pub max_deviation: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct HypothesisReport {
    pub window: (f64, f64),
    pub profiles: Vec<ProfileHypothesis>,
    pub even: Option<EvenCheck>,
}

impl HypothesisReport {
    pub fn tables(&self) -> Vec<Table> {
        let mut t = Table::new("hypothesis", &["profile", "alpha", "theta", "abs_theta", "side", "satisfies"]);
        let side = |s: Side| match s {
            Side::Positive => "positive",
            Side::Negative => "negative",
            Side::Zero => "zero",
        };
        let rows = self
            .profiles
            .iter()
            .map(|p| (&p.profile, &p.rows))
            .chain(self.even.iter().map(|e| (&e.profile, &e.rows)));
        for (name, rows) in rows {
            for r in rows {
                t.rows.push(vec![
                    name.clone(),
                    fmt_f64(r.alpha),
                    fmt_f64(r.theta),
                    fmt_f64(r.abs_theta),
                    side(r.side).into(),
                    r.satisfies.map(|s| s.to_string()).unwrap_or_default(),
                ]);
            }
        }
        vec![t]
    }
}

/// Tolerance on `||θ| - 1|` for the even-profile check.
pub const EVEN_TOL: f64 = 1e-8;

fn rows_for(p: &Profile, window: (f64, f64), opts: &ScanOptions) -> Result<Vec<HypothesisRow>> {
    let scan = resonance::resonance_scan(p, window.0, window.1, opts)?;
    Ok(scan
        .points
        .iter()
        .map(|r| {
            let side = if r.alpha > 0.0 {
                Side::Positive
            } else if r.alpha < 0.0 {
                Side::Negative
            } else {
                Side::Zero
            };
            let a = r.theta.abs();
            let satisfies = match side {
                Side::Positive => Some(a > 1.0),
                Side::Negative => Some(a < 1.0),
                Side::Zero => None,
            };
            HypothesisRow {
                alpha: r.alpha,
                theta: r.theta,
                abs_theta: a,
                side,
                satisfies,
            }
        })
        .collect())
}

/// Coupling function over the resonances in `window` for each normalized
/// profile, plus the `|θ| = 1` check on an optional even profile.
pub fn hypothesis_scan(
    profiles: &[Profile],
    even: Option<&Profile>,
    window: (f64, f64),
    opts: &ScanOptions,
) -> Result<HypothesisReport> {
    for p in profiles {
        let c = classify(p, DEFAULT_MOMENT_TOL);
        if !c.is_normalized_delta_prime(DEFAULT_MOMENT_TOL) {
            return Err(Error::Precondition(format!(
                "profile {} is not normalized (m0 = {}, m1 = {})",
                p.label(),
                c.m0,
                c.m1
            )));
        }
    }
    let summaries = profiles
        .par_iter()
        .map(|p| {
            let rows = rows_for(p, window, opts)?;
            let tally = |side: Side| {
                let on: Vec<_> = rows.iter().filter(|r| r.side == side).collect();
                (on.len(), on.iter().filter(|r| r.satisfies == Some(true)).count())
            };
            let (positive, negative) = (tally(Side::Positive), tally(Side::Negative));
            Ok(ProfileHypothesis {
                profile: p.label().to_string(),
                all_satisfied: positive.0 == positive.1 && negative.0 == negative.1,
                positive,
                negative,
                rows,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let even = even
        .map(|p| {
            let rows = rows_for(p, window, opts)?;
            let max_deviation = rows.iter().map(|r| (r.abs_theta - 1.0).abs()).fold(0.0, f64::max);
            Ok::<_, Error>(EvenCheck {
                profile: p.label().to_string(),
                passed: !rows.is_empty() && max_deviation <= EVEN_TOL,
                max_deviation,
                rows,
            })
        })
        .transpose()?;
    Ok(HypothesisReport {
        window,
        profiles: summaries,
        even,
    })
}

/// `∫₀ʳ v² / ∫₋ᵣ⁰ v²` from a sampled eigenfunction, by the trapezoid rule
/// with linear interpolation at `±r`.
pub fn marginal_probability_ratio(v: &EigenFunction, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::InvalidConfig(format!("r must be positive, got {r}")));
    }
    let right = partial_square(&v.x_right, &v.v_right, 0.0, r);
    let left = partial_square(&v.x_left, &v.v_left, -r, 0.0);
    if !(left > 0.0) {
        return Err(Error::Degenerate("eigenfunction vanishes left of the origin".into()));
    }
    Ok(right / left)
}

fn partial_square(x: &[f64], v: &[f64], lo: f64, hi: f64) -> f64 {
    let mut total = 0.0;
    for i in 0..x.len().saturating_sub(1) {
        let (a, b) = (x[i].max(lo), x[i + 1].min(hi));
        if b <= a {
            continue;
        }
        let at = |t: f64| v[i] + (v[i + 1] - v[i]) * (t - x[i]) / (x[i + 1] - x[i]);
        let (fa, fb) = (at(a), at(b));
        total += 0.5 * (b - a) * (fa * fa + fb * fb);
    }
    total
}
