//! Command-line front end. Every run writes its tables to the output
//! directory together with a manifest that can be replayed.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, ErrorKind, Result};
use crate::experiments::{
    convergence_study, diving_study, fmt_f64, hypothesis_scan, write_json, ConvergenceOptions, DivingOptions, Table,
};
use crate::ivp::SolverConfig;
use crate::profiles::{builtin, classify, Profile, DEFAULT_MOMENT_TOL};
use crate::resonance::{self, ScanOptions};
use crate::scattering::{scatter_sweep, transmission_limit};
use crate::spectra::{
    eigen_limit, eigen_perturbed, interval_limit_frequencies, interval_spectrum, interval_split_frequencies,
    BoundaryCoupling, ConfiningPotential, Spectrum, SpectrumOptions,
};

/// Version of the manifest layout.
pub const MANIFEST_SCHEMA: u32 = 1;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_PRECONDITION: i32 = 4;

#[derive(Debug, Clone, Parser, Serialize, Deserialize)]
#[command(name = "deltaprime", version, about = "Squeezed delta'-like potentials: resonances, spectra, scattering")]
pub struct Cli {
    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    #[command(flatten)]
    pub tol: Tolerances,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct Tolerances {
    #[arg(long, global = true)]
    pub rel_tol: Option<f64>,
    #[arg(long, global = true)]
    pub abs_tol: Option<f64>,
    #[arg(long, global = true)]
    pub eig_tol: Option<f64>,
    #[arg(long, global = true)]
    pub residual_tol: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ProfileArgs {
    /// Builtin profile name.
    #[arg(long, default_value = "step")]
    pub profile: String,
    /// Profile JSON file; overrides `--profile`.
    #[arg(long)]
    pub profile_json: Option<PathBuf>,
    /// JSON parameters for the builtin, e.g. '{"scale": 2}'.
    #[arg(long)]
    pub profile_params: Option<String>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct PotentialArgs {
    /// Ascending polynomial coefficients of U.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0,1,1")]
    pub potential: Vec<f64>,
    /// Half-width of the computational domain.
    #[arg(long, default_value_t = 8.0)]
    pub radius: f64,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
pub enum Command {
    /// Scan for resonances in an alpha window.
    Resonances {
        #[command(flatten)]
        profile: ProfileArgs,
        #[arg(long, num_args = 2, allow_negative_numbers = true, default_values_t = [0.0, 60.0])]
        window: Vec<f64>,
        #[arg(long, default_value_t = resonance::DEFAULT_SCAN_STEP)]
        scan_step: f64,
    },
    /// Coupling function at the resonance nearest to alpha.
    Theta {
        #[command(flatten)]
        profile: ProfileArgs,
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
        /// Search half-width around alpha.
        #[arg(long, default_value_t = 0.5)]
        search: f64,
    },
    /// Limit or perturbed eigenvalues.
    Spectrum {
        #[command(flatten)]
        profile: ProfileArgs,
        #[command(flatten)]
        potential: PotentialArgs,
        /// `limit` or `perturbed`.
        #[arg(long, default_value = "limit")]
        mode: String,
        /// Limit coupling: split, resonant, kn, or theta:<value>.
        #[arg(long, default_value = "resonant")]
        coupling: String,
        #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
        alpha: f64,
        #[arg(long, default_value_t = 0.01)]
        eps: f64,
        /// First 1-based index (perturbed mode).
        #[arg(long, default_value_t = 1)]
        first: usize,
        #[arg(long, default_value_t = 5)]
        count: usize,
        /// Also write sampled eigenfunctions.
        #[arg(long)]
        eigenfunctions: bool,
    },
    /// Reflection and transmission amplitudes on an (alpha, eps, k) grid.
    Scatter {
        #[command(flatten)]
        profile: ProfileArgs,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        alpha: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        eps: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        k: Vec<f64>,
    },
    /// Dirichlet interval problem against its limit frequencies.
    Interval {
        #[command(flatten)]
        profile: ProfileArgs,
        #[arg(long, allow_negative_numbers = true, default_value_t = -1.0)]
        a: f64,
        #[arg(long, default_value_t = 2.0)]
        b: f64,
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
        #[arg(long, default_value_t = 1e-3)]
        eps: f64,
        #[arg(long, default_value_t = 6)]
        count: usize,
    },
    /// Eigenvalue and eigenfunction convergence along an eps ladder.
    Converge {
        #[command(flatten)]
        profile: ProfileArgs,
        #[command(flatten)]
        potential: PotentialArgs,
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
        #[arg(long, value_delimiter = ',', default_value = "0.04,0.02,0.01,0.005")]
        ladder: Vec<f64>,
        #[arg(long, default_value_t = 3)]
        count: usize,
    },
    /// Scaled ground state of the diving spectrum.
    Dive {
        #[command(flatten)]
        profile: ProfileArgs,
        #[command(flatten)]
        potential: PotentialArgs,
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.03,0.01")]
        ladder: Vec<f64>,
        #[arg(long, default_value_t = 30.0)]
        oracle_radius: f64,
    },
    /// Sign pattern of |theta| - 1 over the resonance set.
    Hypothesis {
        /// Normalized builtin profiles to scan.
        #[arg(long, value_delimiter = ',', default_value = "step,odd_cubic,asymmetric_bump")]
        profiles: Vec<String>,
        /// Even profile for the |theta| = 1 check; empty to skip.
        #[arg(long, default_value = "even_parabola")]
        even: String,
        #[arg(long, num_args = 2, allow_negative_numbers = true, default_values_t = [-60.0, 60.0])]
        window: Vec<f64>,
        #[arg(long, default_value_t = resonance::DEFAULT_SCAN_STEP)]
        scan_step: f64,
    },
    /// Moments and class of a profile.
    Classify {
        #[command(flatten)]
        profile: ProfileArgs,
    },
    /// Re-run the invocation recorded in a manifest.
    Replay {
        manifest: PathBuf,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Resonances { .. } => "resonances",
            Command::Theta { .. } => "theta",
            Command::Spectrum { .. } => "spectrum",
            Command::Scatter { .. } => "scatter",
            Command::Interval { .. } => "interval",
            Command::Converge { .. } => "converge",
            Command::Dive { .. } => "dive",
            Command::Hypothesis { .. } => "hypothesis",
            Command::Classify { .. } => "classify",
            Command::Replay { .. } => "replay",
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: u32,
    pub tool: String,
    pub version: String,
    pub invocation: Cli,
    pub outputs: Vec<PathBuf>,
    pub wall_time_s: f64,
}

/// Parses `argv` (including the program name), runs it and returns the
/// process exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { 0 };
        }
    };
    match with_thread_cap(|| execute(&cli)) {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e.kind() {
        ErrorKind::Config => EXIT_CONFIG,
        ErrorKind::Numerical => EXIT_NUMERICAL,
        ErrorKind::Precondition => EXIT_PRECONDITION,
    }
}

/// Runs `f` on a pool capped by `PB_THREADS` when it is set.
fn with_thread_cap<R: Send>(f: impl FnOnce() -> Result<R> + Send) -> Result<R> {
    match std::env::var("PB_THREADS") {
        Ok(v) => {
            let n: usize = v
                .trim()
                .parse()
                .ok()
                .filter(|n| *n > 0)
                .ok_or_else(|| Error::InvalidConfig(format!("PB_THREADS must be a positive integer, got {v:?}")))?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
            pool.install(f)
        }
        Err(_) => f(),
    }
}

/// Runs a parsed invocation and writes its manifest. Returns the files
/// written, manifest last.
pub fn execute(cli: &Cli) -> Result<Vec<PathBuf>> {
    if let Command::Replay { manifest } = &cli.command {
        let text = fs::read_to_string(manifest)?;
        let m: Manifest = serde_json::from_str(&text)?;
        if m.schema != MANIFEST_SCHEMA {
            return Err(Error::InvalidConfig(format!("unsupported manifest schema {}", m.schema)));
        }
        if m.version != env!("CARGO_PKG_VERSION") {
            eprintln!("warning: manifest written by version {}", m.version);
        }
        return execute(&m.invocation);
    }
    let start = Instant::now();
    fs::create_dir_all(&cli.out)?;
    let mut outputs = dispatch(cli)?;
    let manifest = Manifest {
        schema: MANIFEST_SCHEMA,
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        invocation: cli.clone(),
        outputs: outputs.clone(),
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    let path = cli.out.join(format!("{}.manifest.json", cli.command.name()));
    write_json(&manifest, &path)?;
    outputs.push(path);
    Ok(outputs)
}

fn solver(tol: &Tolerances, base: SolverConfig) -> Result<SolverConfig> {
    let mut cfg = base;
    if let Some(r) = tol.rel_tol {
        cfg.rel_tol = r;
    }
    if let Some(a) = tol.abs_tol {
        cfg.abs_tol = a;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn residual_tol(tol: &Tolerances) -> Result<f64> {
    let r = tol.residual_tol.unwrap_or(resonance::DEFAULT_RESIDUAL_TOL);
    if !(r > 0.0) {
        return Err(Error::InvalidConfig(format!("residual tolerance must be positive, got {r}")));
    }
    Ok(r)
}

fn spectrum_options(tol: &Tolerances) -> Result<SpectrumOptions> {
    let mut o = SpectrumOptions {
        cfg: solver(tol, SolverConfig::default())?,
        ..SpectrumOptions::default()
    };
    if let Some(e) = tol.eig_tol {
        if !(e > 0.0) {
            return Err(Error::InvalidConfig(format!("eig_tol must be positive, got {e}")));
        }
        o.eig_tol = e;
    }
    Ok(o)
}

fn scan_options(tol: &Tolerances, scan_step: f64) -> Result<ScanOptions> {
    Ok(ScanOptions {
        scan_step,
        residual_tol: residual_tol(tol)?,
        cfg: solver(tol, resonance::default_solver())?,
        ..ScanOptions::default()
    })
}

fn load_profile(a: &ProfileArgs) -> Result<Profile> {
    if let Some(path) = &a.profile_json {
        return Profile::from_json(&fs::read_to_string(path)?);
    }
    let params = match &a.profile_params {
        Some(s) => serde_json::from_str(s)?,
        None => serde_json::Value::Null,
    };
    builtin(&a.profile, &params)
}

fn load_potential(a: &PotentialArgs) -> Result<ConfiningPotential> {
    ConfiningPotential::polynomial(&a.potential, a.radius)
}

fn window(w: &[f64]) -> Result<(f64, f64)> {
    match w {
        [lo, hi] if lo < hi => Ok((*lo, *hi)),
        _ => Err(Error::InvalidConfig(format!("window must be two increasing numbers, got {w:?}"))),
    }
}

fn write_table(out: &Path, file: &str, t: &Table) -> Result<PathBuf> {
    let path = out.join(file);
    t.write_csv(&path)?;
    Ok(path)
}

fn write_tables(out: &Path, prefix: &str, tables: &[Table]) -> Result<Vec<PathBuf>> {
    tables
        .iter()
        .map(|t| write_table(out, &format!("{prefix}_{}.csv", t.name), t))
        .collect()
}

fn write_report<T: Serialize>(out: &Path, name: &str, report: &T) -> Result<PathBuf> {
    let path = out.join(format!("{name}.json"));
    write_json(report, &path)?;
    Ok(path)
}

fn spectrum_table(s: &Spectrum) -> Table {
    let mut t = Table {
        name: "spectrum".into(),
        header: ["index", "eigenvalue", "residual", "flag", "support"].map(String::from).to_vec(),
        rows: Vec::new(),
    };
    for i in 0..s.len() {
        t.rows.push(vec![
            s.indices[i].to_string(),
            fmt_f64(s.eigenvalues[i]),
            fmt_f64(s.residuals[i]),
            format!("{:?}", s.flags[i]),
            format!("{:?}", s.support[i]),
        ]);
    }
    t
}

fn dispatch(cli: &Cli) -> Result<Vec<PathBuf>> {
    let out = cli.out.as_path();
    let tol = &cli.tol;
    match &cli.command {
        Command::Resonances {
            profile,
            window: w,
            scan_step,
        } => {
            let p = load_profile(profile)?;
            let (lo, hi) = window(w)?;
            let scan = resonance::resonance_scan(&p, lo, hi, &scan_options(tol, *scan_step)?)?;
            let mut t = Table {
                name: "resonances".into(),
                header: ["alpha", "theta", "residual"].map(String::from).to_vec(),
                rows: Vec::new(),
            };
            for r in &scan.points {
                t.rows.push(vec![fmt_f64(r.alpha), fmt_f64(r.theta), fmt_f64(r.residual)]);
                println!("alpha = {:.10}  theta = {:.10e}", r.alpha, r.theta);
            }
            if !scan.rescan_consistent {
                eprintln!("warning: coarse and fine scan grids disagree; consider a smaller --scan-step");
            }
            for c in &scan.candidates {
                eprintln!("warning: possible tangential root near alpha = {c}");
            }
            Ok(vec![write_table(out, "resonances.csv", &t)?])
        }
        Command::Theta { profile, alpha, search } => {
            let p = load_profile(profile)?;
            let opts = scan_options(tol, resonance::DEFAULT_SCAN_STEP.min(*search))?;
            let found = resonance::nearest_resonance(&p, *alpha, *search, &opts)?;
            let report = match &found {
                Some(r) => json!({
                    "profile": p.label(),
                    "alpha_input": alpha,
                    "resonant": true,
                    "alpha": r.alpha,
                    "theta": r.theta,
                    "residual": r.residual,
                    "transmission_limit": transmission_limit(r.theta),
                }),
                None => json!({
                    "profile": p.label(),
                    "alpha_input": alpha,
                    "resonant": false,
                    "residual": resonance::residual_of(&p, *alpha, &opts.cfg)?,
                }),
            };
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(vec![write_report(out, "theta", &report)?])
        }
        Command::Spectrum {
            profile,
            potential,
            mode,
            coupling,
            alpha,
            eps,
            first,
            count,
            eigenfunctions,
        } => {
            let p = load_profile(profile)?;
            let u = load_potential(potential)?;
            let mut opts = spectrum_options(tol)?;
            opts.eigenfunctions = *eigenfunctions;
            let s = match mode.as_str() {
                "limit" => {
                    let bc = parse_coupling(coupling, &p, *alpha, tol)?;
                    eigen_limit(&u, &bc, *count, &opts)?
                }
                "perturbed" => {
                    if *count == 0 {
                        return Err(Error::InvalidConfig("count must be at least 1".into()));
                    }
                    eigen_perturbed(&u, &p, *alpha, *eps, (*first, first + count - 1), &opts)?
                }
                other => return Err(Error::InvalidConfig(format!("unknown mode {other:?}"))),
            };
            for (i, l) in s.indices.iter().zip(&s.eigenvalues) {
                println!("lambda_{i} = {l:.12}");
            }
            let mut files = vec![write_table(out, "spectrum.csv", &spectrum_table(&s))?];
            if let Some(efs) = &s.eigenfunctions {
                let mut t = Table {
                    name: "eigenfunctions".into(),
                    header: ["index", "x", "v"].map(String::from).to_vec(),
                    rows: Vec::new(),
                };
                for (idx, e) in s.indices.iter().zip(efs) {
                    for (x, v) in e.points() {
                        t.rows.push(vec![idx.to_string(), fmt_f64(x), fmt_f64(v)]);
                    }
                }
                files.push(write_table(out, "spectrum_eigenfunctions.csv", &t)?);
            }
            Ok(files)
        }
        Command::Scatter { profile, alpha, eps, k } => {
            let p = load_profile(profile)?;
            let cfg = solver(tol, resonance::default_solver())?;
            let grid: Vec<(f64, f64, f64)> = alpha
                .iter()
                .flat_map(|&a| eps.iter().flat_map(move |&e| k.iter().map(move |&k| (a, e, k))))
                .collect();
            let results = scatter_sweep(&p, &grid, &cfg)?;
            let mut t = Table {
                name: "scatter".into(),
                header: ["alpha", "eps", "k", "re_R", "im_R", "re_T", "im_T", "abs_T2"]
                    .map(String::from)
                    .to_vec(),
                rows: Vec::new(),
            };
            for r in &results {
                t.rows.push(
                    [r.alpha, r.eps, r.k, r.r.re, r.r.im, r.t.re, r.t.im, r.transmittance()]
                        .map(fmt_f64)
                        .to_vec(),
                );
            }
            if results.len() == 1 {
                let r = &results[0];
                println!("|R|^2 = {:.12e}  |T|^2 = {:.12e}", r.reflectance(), r.transmittance());
            } else {
                println!("{} scattering rows", results.len());
            }
            Ok(vec![write_table(out, "scatter.csv", &t)?])
        }
        Command::Interval {
            profile,
            a,
            b,
            alpha,
            eps,
            count,
        } => {
            let p = load_profile(profile)?;
            let opts = spectrum_options(tol)?;
            let rcfg = solver(tol, resonance::default_solver())?;
            let rtol = residual_tol(tol)?;
            let alpha = &snap_alpha(&p, *alpha, &rcfg, rtol)?;
            let theta = resonance::resonant_theta(&p, *alpha, &rcfg, rtol)?;
            let limit = match theta {
                Some(t) => interval_limit_frequencies(*a, *b, t, *count)?,
                None => interval_split_frequencies(*a, *b, *count)?,
            };
            let s = interval_spectrum(*a, *b, &p, *alpha, *eps, *count, &opts)?;
            let mut t = Table {
                name: "interval".into(),
                header: ["k", "lambda_eps", "omega_eps", "omega_limit", "abs_error"]
                    .map(String::from)
                    .to_vec(),
                rows: Vec::new(),
            };
            for (i, (l, w0)) in s.eigenvalues.iter().zip(&limit).enumerate() {
                let w = l.max(0.0).sqrt();
                t.rows.push(vec![
                    (i + 1).to_string(),
                    fmt_f64(*l),
                    fmt_f64(w),
                    fmt_f64(*w0),
                    fmt_f64((w - w0).abs()),
                ]);
                println!("omega_{} = {w:.10}  limit {w0:.10}", i + 1);
            }
            Ok(vec![write_table(out, "interval.csv", &t)?])
        }
        Command::Converge {
            profile,
            potential,
            alpha,
            ladder,
            count,
        } => {
            let p = load_profile(profile)?;
            let u = load_potential(potential)?;
            let opts = ConvergenceOptions {
                spectrum: spectrum_options(tol)?,
                resonance_cfg: solver(tol, resonance::default_solver())?,
                residual_tol: residual_tol(tol)?,
                ..ConvergenceOptions::default()
            };
            let alpha = snap_alpha(&p, *alpha, &opts.resonance_cfg, opts.residual_tol)?;
            let r = convergence_study(&u, &p, alpha, ladder, *count, &opts)?;
            for row in &r.rows {
                println!(
                    "k = {}  limit = {:.10}  order = {}  slope = {}  corrector = {}",
                    row.k,
                    row.lambda_limit,
                    show(row.order),
                    show(row.slope),
                    show(row.corrector)
                );
            }
            let mut files = vec![write_report(out, "converge", &r)?];
            files.extend(write_tables(out, "converge", &r.tables())?);
            Ok(files)
        }
        Command::Dive {
            profile,
            potential,
            alpha,
            ladder,
            oracle_radius,
        } => {
            let p = load_profile(profile)?;
            let u = load_potential(potential)?;
            let opts = DivingOptions {
                spectrum: spectrum_options(tol)?,
                oracle_radius: *oracle_radius,
                ..DivingOptions::default()
            };
            let r = diving_study(&u, &p, *alpha, ladder, &opts)?;
            println!("mu = {:.12}", r.mu);
            for row in &r.rows {
                println!("eps = {:e}  eps^2 lambda_1 = {:.12}  rel_error = {:.3e}", row.eps, row.scaled, row.rel_error);
            }
            let mut files = vec![write_report(out, "dive", &r)?];
            files.extend(write_tables(out, "dive", &r.tables())?);
            Ok(files)
        }
        Command::Hypothesis {
            profiles,
            even,
            window: w,
            scan_step,
        } => {
            let ps = profiles
                .iter()
                .map(|n| builtin(n, &serde_json::Value::Null))
                .collect::<Result<Vec<_>>>()?;
            let even = if even.is_empty() {
                None
            } else {
                Some(builtin(even, &serde_json::Value::Null)?)
            };
            let r = hypothesis_scan(&ps, even.as_ref(), window(w)?, &scan_options(tol, *scan_step)?)?;
            for p in &r.profiles {
                println!(
                    "{}: positive {}/{}  negative {}/{}",
                    p.profile, p.positive.1, p.positive.0, p.negative.1, p.negative.0
                );
            }
            if let Some(e) = &r.even {
                println!("{}: max ||theta| - 1| = {:.3e}", e.profile, e.max_deviation);
            }
            let mut files = vec![write_report(out, "hypothesis", &r)?];
            files.extend(write_tables(out, "hypothesis", &r.tables())?);
            Ok(files)
        }
        Command::Classify { profile } => {
            let p = load_profile(profile)?;
            let c = classify(&p, DEFAULT_MOMENT_TOL);
            println!("{}", serde_json::to_string(&c)?);
            Ok(vec![write_report(out, "classify", &c)?])
        }
        Command::Replay { .. } => unreachable!("handled by execute"),
    }
}

fn show(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.6}")).unwrap_or_else(|| "-".into())
}

/// Replaces a rounded resonant alpha by the refined one.
fn snap_alpha(p: &Profile, alpha: f64, cfg: &SolverConfig, residual_tol: f64) -> Result<f64> {
    if alpha == 0.0 || resonance::residual_of(p, alpha, cfg)? <= residual_tol {
        return Ok(alpha);
    }
    let opts = ScanOptions {
        scan_step: 0.01,
        residual_tol,
        cfg: *cfg,
        ..ScanOptions::default()
    };
    match resonance::nearest_resonance(p, alpha, 1e-2 * alpha.abs().max(1.0), &opts)? {
        Some(r) if (r.alpha - alpha).abs() <= 1e-3 * alpha.abs().max(1.0) => Ok(r.alpha),
        _ => Ok(alpha),
    }
}

fn parse_coupling(spec: &str, p: &Profile, alpha: f64, tol: &Tolerances) -> Result<BoundaryCoupling> {
    match spec {
        "split" => Ok(BoundaryCoupling::DirichletSplit),
        "kn" => Ok(BoundaryCoupling::kurasov_nizhnik(alpha)),
        "resonant" => {
            let cfg = solver(tol, resonance::default_solver())?;
            let rtol = residual_tol(tol)?;
            let alpha = snap_alpha(p, alpha, &cfg, rtol)?;
            match resonance::resonant_theta(p, alpha, &cfg, rtol)? {
                Some(t) => BoundaryCoupling::theta(t),
                None => Ok(BoundaryCoupling::DirichletSplit),
            }
        }
        other => match other.strip_prefix("theta:") {
            Some(v) => {
                let t: f64 = v
                    .parse()
                    .map_err(|_| Error::InvalidConfig(format!("bad theta value {v:?}")))?;
                BoundaryCoupling::theta(t)
            }
            None => Err(Error::InvalidConfig(format!(
                "unknown coupling {other:?}; use split, resonant, kn or theta:<value>"
            ))),
        },
    }
}
