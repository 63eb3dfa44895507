//! The `schw` command-line front end. Everything except process setup lives
//! here so the commands can be driven from tests.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Error;
use crate::fd_oracle::{richardson_eigenvalues, DEFAULT_GRID_INTERVALS};
use crate::geometry::{HorizonDistance, IsotropicRadius, SchwarzschildModel};
use crate::mode_odes::{cbar, psi_c, RiccatiProfile};
use crate::spectral::{
    eigenvalues_shooting, morse_index, stability_radius, stability_residual, Spectrum, Tolerances,
};
use crate::surfaces::{
    boundary_bound_check, default_rho_grid, log_rho_grid, make_cone, monotonicity_report, plane_through_origin,
    random_rotation, rotated_plane, LatitudeCircle, ParamSurface, QuadSpec,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

pub const DEFAULT_MASS: f64 = 1.0;

/// Eigenvalues below this size (in units of m⁻²) are compared absolutely.
pub const AGREEMENT_FLOOR: f64 = 1e-8;
pub const DEFAULT_ODE_TOL: f64 = 1e-10;
pub const DEFAULT_ROOT_TOL: f64 = 1e-12;
pub const DEFAULT_QUAD_TOL: f64 = 1e-8;

#[derive(Debug, Parser)]
#[command(name = "schw", version, about = "Numerical checks for minimal surfaces in the Riemannian Schwarzschild manifold")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// Mass parameter m ≥ 0 [default: 1]
    #[arg(long, global = true)]
    pub mass: Option<f64>,
    /// ODE integrator tolerance [default: 1e-10]
    #[arg(long, global = true)]
    pub ode_tol: Option<f64>,
    /// Root-finding tolerance [default: 1e-12]
    #[arg(long, global = true)]
    pub root_tol: Option<f64>,
    /// Quadrature tolerance [default: 1e-8]
    #[arg(long, global = true)]
    pub quad_tol: Option<f64>,
    /// Output format [default: table]
    #[arg(long, global = true, value_enum)]
    pub output: Option<OutputFormat>,
    /// Write output to this file instead of standard output
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// key=value file supplying defaults for the global options
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for randomised rotations [default: 0]
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Table,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Shooting,
    Fd,
    Both,
}

/// An outer radius given as a number or as the literal `R*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadiusArg {
    StabilityRadius,
    Value(f64),
}

fn parse_radius(s: &str) -> Result<RadiusArg, String> {
    if s.eq_ignore_ascii_case("r*") {
        return Ok(RadiusArg::StabilityRadius);
    }
    s.parse::<f64>()
        .map(RadiusArg::Value)
        .map_err(|_| format!("expected a number or R*, got `{s}`"))
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate isotropic radius, areal radius, horizon distance and static potential
    Geom {
        /// Largest horizon distance in the table
        #[arg(long, default_value_t = 1e4)]
        r_max: f64,
        /// Number of equally spaced distances, starting at 0
        #[arg(long, default_value_t = 21)]
        points: usize,
    },
    /// Radius of the maximal stable annulus of the plane through the origin
    StabilityRadius,
    /// Lowest eigenvalues of a Jacobi-operator mode
    Spectrum {
        #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
        k: i32,
        /// Outer isotropic radius, or `R*`
        #[arg(long = "R", value_parser = parse_radius)]
        outer: RadiusArg,
        #[arg(long, default_value_t = 3)]
        count: usize,
        #[arg(long, value_enum, default_value_t = Method::Shooting)]
        method: Method,
        /// Finite-difference intervals of the coarse grid (the fine grid doubles it)
        #[arg(long, default_value_t = DEFAULT_GRID_INTERVALS)]
        grid: usize,
    },
    /// Morse index of the plane through the origin truncated at radius R
    MorseIndex {
        /// Outer isotropic radius, or `R*` [default: 1000 m]
        #[arg(long = "R", value_parser = parse_radius)]
        outer: Option<RadiusArg>,
        #[arg(long, default_value_t = 5)]
        kmax: u32,
    },
    /// Monotonicity of μ(Σ∩B_ρ)/h(ρ)² on 40 log-spaced distances
    Monotonicity {
        /// plane | plane:rotated[:<seed>] | cone:<colatitude>
        #[arg(long, default_value = "plane")]
        surface: String,
        /// Largest horizon distance [default: 1000 m]
        #[arg(long)]
        rho_max: Option<f64>,
    },
    /// Compare the density at infinity with |∂Σ|/(4πm)
    BoundaryBound {
        #[arg(long, default_value = "plane")]
        surface: String,
        /// Largest horizon distance [default: 1000 m]
        #[arg(long)]
        rho_max: Option<f64>,
    },
    /// Trace ψ_c up to its singularity R_c
    Riccati {
        /// Family parameter [default: −8 − 4 log(m/2)]
        #[arg(long, allow_negative_numbers = true)]
        c: Option<f64>,
        /// Number of trace points
        #[arg(long, default_value_t = 41)]
        points: usize,
    },
}

/// Effective global settings after merging flags over the config file.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub mass: f64,
    pub ode_tol: f64,
    pub root_tol: f64,
    pub quad_tol: f64,
    pub output: OutputFormat,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    pub seed: u64,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Numerical(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) | Error::Precondition(_) => CliError::Usage(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn parse_config_file(text: &str) -> CliResult<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value", no + 1)))?;
        let key = key.trim().replace('-', "_");
        const KNOWN: [&str; 7] = ["mass", "ode_tol", "root_tol", "quad_tol", "output", "out", "seed"];
        if !KNOWN.contains(&key.as_str()) {
            return Err(CliError::Usage(format!("config line {}: unknown key `{key}`", no + 1)));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

fn config_value<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str) -> CliResult<Option<T>> {
    map.get(key)
        .map(|v| {
            v.parse::<T>()
                .map_err(|_| CliError::Usage(format!("config: bad value `{v}` for `{key}`")))
        })
        .transpose()
}

impl RunConfig {
    fn resolve(global: &GlobalArgs) -> CliResult<Self> {
        let file = match &global.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
                parse_config_file(&text)?
            }
            None => BTreeMap::new(),
        };
        let output = match (global.output, file.get("output")) {
            (Some(o), _) => o,
            (None, Some(v)) => OutputFormat::from_str(v, true)
                .map_err(|_| CliError::Usage(format!("config: bad value `{v}` for `output`")))?,
            (None, None) => OutputFormat::Table,
        };
        let cfg = RunConfig {
            mass: global.mass.or(config_value(&file, "mass")?).unwrap_or(DEFAULT_MASS),
            ode_tol: global.ode_tol.or(config_value(&file, "ode_tol")?).unwrap_or(DEFAULT_ODE_TOL),
            root_tol: global.root_tol.or(config_value(&file, "root_tol")?).unwrap_or(DEFAULT_ROOT_TOL),
            quad_tol: global.quad_tol.or(config_value(&file, "quad_tol")?).unwrap_or(DEFAULT_QUAD_TOL),
            output,
            out: global.out.clone().or(file.get("out").map(PathBuf::from)),
            seed: global.seed.or(config_value(&file, "seed")?).unwrap_or(0),
        };
        for (name, v) in [("ode-tol", cfg.ode_tol), ("root-tol", cfg.root_tol), ("quad-tol", cfg.quad_tol)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Usage(format!("--{name} must be positive, got {v}")));
            }
        }
        if !(cfg.mass >= 0.0 && cfg.mass.is_finite()) {
            return Err(CliError::Usage(format!("--mass must be ≥ 0, got {}", cfg.mass)));
        }
        Ok(cfg)
    }

    fn model(&self) -> SchwarzschildModel {
        SchwarzschildModel::new(self.mass).expect("mass validated")
    }

    fn quad(&self) -> QuadSpec {
        QuadSpec::new(self.quad_tol, self.root_tol)
    }
}

#[derive(Serialize)]
struct Provenance<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    mass: f64,
    ode_tol: f64,
    root_tol: f64,
    quad_tol: f64,
    seed: u64,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    provenance: Provenance<'a>,
    result: T,
}

/// Full-precision CSV number.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_row(out: &mut String, cells: &[String]) {
    out.push_str(&cells.join(","));
    out.push('\n');
}

struct Output {
    table: String,
    json: serde_json::Value,
    warnings: Vec<String>,
}

impl Output {
    fn new<T: Serialize>(table: String, value: &T) -> Self {
        Output {
            table,
            json: serde_json::to_value(value).expect("report types serialise"),
            warnings: Vec::new(),
        }
    }
}

#[derive(Serialize)]
struct GeomRow {
    rho_iso: f64,
    s: f64,
    r: f64,
    h: f64,
    f: f64,
}

fn cmd_geom(cfg: &RunConfig, r_max: f64, points: usize) -> CliResult<Output> {
    if !(r_max > 0.0 && r_max.is_finite()) || points < 2 {
        return Err(CliError::Usage(format!(
            "need --r-max > 0 and --points ≥ 2 (got {r_max}, {points})"
        )));
    }
    let model = cfg.model();
    let mut rows = Vec::with_capacity(points);
    for i in 0..points {
        let r = if i + 1 == points { r_max } else { r_max * i as f64 / (points - 1) as f64 };
        let rho = model.isotropic_from_distance(HorizonDistance(r), cfg.root_tol)?;
        rows.push(GeomRow {
            rho_iso: rho.0,
            s: model.areal_from_isotropic(rho)?.0,
            r,
            h: model.areal_from_distance(HorizonDistance(r), cfg.root_tol)?.0,
            f: model.static_potential(HorizonDistance(r))?,
        });
    }
    let mut t = String::from("rho_iso,s,r,h,f\n");
    for row in &rows {
        csv_row(&mut t, &[num(row.rho_iso), num(row.s), num(row.r), num(row.h), num(row.f)]);
    }
    Ok(Output::new(t, &rows))
}

#[derive(Serialize)]
struct StabilityReport {
    mass: f64,
    #[serde(rename = "R_star")]
    r_star: f64,
    ratio: f64,
    residual: f64,
}

fn cmd_stability(cfg: &RunConfig) -> CliResult<Output> {
    let model = cfg.model();
    let r = stability_radius(&model, cfg.root_tol)?.0;
    let rep = StabilityReport {
        mass: cfg.mass,
        r_star: r,
        ratio: r / cfg.mass,
        residual: stability_residual(&model, r),
    };
    let mut t = String::from("mass,R_star,ratio,residual\n");
    csv_row(&mut t, &[num(rep.mass), num(rep.r_star), num(rep.ratio), num(rep.residual)]);
    Ok(Output::new(t, &rep))
}

fn resolve_radius(cfg: &RunConfig, arg: RadiusArg) -> CliResult<f64> {
    match arg {
        RadiusArg::Value(v) => Ok(v),
        RadiusArg::StabilityRadius => Ok(stability_radius(&cfg.model(), cfg.root_tol)?.0),
    }
}

#[derive(Serialize)]
struct SpectrumReport {
    k: i32,
    outer_radius: f64,
    method: &'static str,
    shooting: Option<Spectrum>,
    finite_difference: Option<Spectrum>,
    /// `|λ_shooting − λ_fd| / max(|λ_shooting|, AGREEMENT_FLOOR·m⁻²)` per eigenvalue.
    agreement: Option<Vec<f64>>,
}

fn cmd_spectrum(cfg: &RunConfig, k: i32, outer: RadiusArg, count: usize, method: Method, grid: usize) -> CliResult<Output> {
    if count == 0 {
        return Err(CliError::Usage("--count must be at least 1".into()));
    }
    let model = cfg.model();
    let outer = resolve_radius(cfg, outer)?;
    let tols = Tolerances {
        ode_tol: cfg.ode_tol,
        eig_tol: cfg.root_tol,
    };
    let want_shoot = matches!(method, Method::Shooting | Method::Both);
    let want_fd = matches!(method, Method::Fd | Method::Both);
    let (shoot, fd) = rayon::join(
        || want_shoot.then(|| eigenvalues_shooting(&model, k, IsotropicRadius(outer), count, tols)).transpose(),
        || want_fd.then(|| richardson_eigenvalues(&model, k, IsotropicRadius(outer), grid, count)).transpose(),
    );
    let (shoot, fd) = (shoot?, fd?);
    let agreement = match (&shoot, &fd) {
        (Some(a), Some(b)) => Some(
            a.entries
                .iter()
                .zip(&b.entries)
                .map(|(x, y)| (x.lambda - y.lambda).abs() / x.lambda.abs().max(AGREEMENT_FLOOR / (cfg.mass * cfg.mass)))
                .collect::<Vec<_>>(),
        ),
        _ => None,
    };
    let mut t = String::new();
    match (&shoot, &fd, &agreement) {
        (Some(a), Some(b), Some(ag)) => {
            t.push_str("k,n,lambda_shooting,lambda_fd,lambda_scaled_shooting,agreement\n");
            for ((x, y), g) in a.entries.iter().zip(&b.entries).zip(ag) {
                csv_row(&mut t, &[k.to_string(), x.n.to_string(), num(x.lambda), num(y.lambda), num(x.lambda_scaled), num(*g)]);
            }
        }
        _ => {
            let s = shoot.as_ref().or(fd.as_ref()).expect("one method ran");
            t.push_str("k,n,lambda,lambda_scaled\n");
            for e in &s.entries {
                csv_row(&mut t, &[k.to_string(), e.n.to_string(), num(e.lambda), num(e.lambda_scaled)]);
            }
        }
    }
    let rep = SpectrumReport {
        k,
        outer_radius: outer,
        method: match method {
            Method::Shooting => "shooting",
            Method::Fd => "fd",
            Method::Both => "both",
        },
        shooting: shoot,
        finite_difference: fd,
        agreement,
    };
    Ok(Output::new(t, &rep))
}

fn cmd_morse(cfg: &RunConfig, outer: Option<RadiusArg>, kmax: u32) -> CliResult<Output> {
    let outer = match outer {
        Some(a) => resolve_radius(cfg, a)?,
        None => 1000.0 * cfg.mass,
    };
    let rep = morse_index(&cfg.model(), IsotropicRadius(outer), kmax, cfg.ode_tol)?;
    let mut t = String::new();
    let _ = writeln!(t, "# R={} morse_index={}", num(outer), rep.morse_index);
    t.push_str("k,negative_count\n");
    for (k, c) in &rep.per_mode_negative_counts {
        csv_row(&mut t, &[k.to_string(), c.to_string()]);
    }
    Ok(Output::new(t, &rep))
}

/// Parse `plane`, `plane:rotated[:<seed>]` or `cone:<colatitude>`. The flag
/// says whether the surface is minimal.
fn parse_surface(spec: &str, model: &SchwarzschildModel, default_seed: u64) -> CliResult<(ParamSurface, bool)> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || CliError::Usage(format!("unknown surface `{spec}` (expected plane, plane:rotated[:<seed>] or cone:<colatitude>)"));
    match parts.as_slice() {
        ["plane"] => Ok((plane_through_origin(model), true)),
        ["plane", "rotated"] | ["plane", "rotated", _] => {
            let seed = match parts.get(2) {
                Some(s) => s.parse::<u64>().map_err(|_| bad())?,
                None => default_seed,
            };
            let rot = random_rotation(&mut ChaCha8Rng::seed_from_u64(seed));
            Ok((rotated_plane(model, rot), true))
        }
        ["cone", theta] => {
            let theta: f64 = theta.parse().map_err(|_| bad())?;
            let curve = LatitudeCircle::new(theta)?;
            let minimal = (theta - FRAC_PI_2).abs() < 1e-12;
            Ok((make_cone(model, curve, f64::INFINITY)?, minimal))
        }
        _ => Err(bad()),
    }
}

fn non_minimal_warning(spec: &str) -> String {
    format!("warning: surface `{spec}` is not minimal; the monotonicity identity does not apply to it")
}

fn cmd_monotonicity(cfg: &RunConfig, spec: &str, rho_max: Option<f64>) -> CliResult<Output> {
    let model = cfg.model();
    let (surface, minimal) = parse_surface(spec, &model, cfg.seed)?;
    let rho_max = rho_max.unwrap_or(1000.0 * if model.is_flat() { 1.0 } else { cfg.mass });
    let grid = if !model.is_flat() && rho_max <= 1e-2 * cfg.mass {
        log_rho_grid(1e-3 * rho_max, rho_max, 40)?
    } else {
        default_rho_grid(&model, rho_max)?
    };
    let rep = monotonicity_report(&model, &surface, &grid, &cfg.quad())?;
    let mut t = String::new();
    let _ = writeln!(
        t,
        "# surface={spec} monotone={} max_backstep={} boundary_length={}",
        rep.monotone,
        num(rep.max_backstep),
        rep.boundary_length.map_or("none".to_string(), num)
    );
    t.push_str("rho,h,mu,ratio,defect,formula_residual,anchored_residual\n");
    // without a horizon the residual list starts at the second grid point
    let offset = rep.rhos.len() - rep.formula_residuals.len();
    for i in 0..rep.rhos.len() {
        let fr = i.checked_sub(offset).map_or(String::new(), |j| num(rep.formula_residuals[j]));
        let ar = rep.anchored_residuals.get(i).map_or(String::new(), |v| num(*v));
        csv_row(
            &mut t,
            &[num(rep.rhos[i]), num(rep.areal_radii[i]), num(rep.mu_values[i]), num(rep.ratios[i]), num(rep.defect_integrals[i]), fr, ar],
        );
    }
    let mut out = Output::new(t, &rep);
    if !minimal {
        out.warnings.push(non_minimal_warning(spec));
    }
    Ok(out)
}

fn cmd_boundary(cfg: &RunConfig, spec: &str, rho_max: Option<f64>) -> CliResult<Output> {
    let model = cfg.model();
    let (surface, minimal) = parse_surface(spec, &model, cfg.seed)?;
    let rho_max = rho_max.unwrap_or(1000.0 * cfg.mass);
    let rep = boundary_bound_check(&model, &surface, rho_max, &cfg.quad())?;
    let mut t = String::from("lhs,rhs,equality_defect,defect_truncated,tail_estimate,boundary_length,density_finite,bound_holds\n");
    csv_row(
        &mut t,
        &[
            num(rep.lhs),
            num(rep.rhs),
            num(rep.equality_defect),
            num(rep.defect_truncated),
            num(rep.tail_estimate),
            num(rep.boundary_length),
            rep.density.finite.to_string(),
            rep.bound_holds.to_string(),
        ],
    );
    let mut out = Output::new(t, &rep);
    if !minimal {
        out.warnings.push(non_minimal_warning(spec));
    }
    if let Some(d) = &rep.density.diagnostic {
        out.warnings.push(format!("warning: {d}"));
    }
    Ok(out)
}

#[derive(Serialize)]
struct RiccatiReport {
    c: f64,
    #[serde(rename = "R_c")]
    r_c: Option<f64>,
    r: Vec<f64>,
    psi_c: Vec<f64>,
}

fn cmd_riccati(cfg: &RunConfig, c: Option<f64>, points: usize) -> CliResult<Output> {
    if points < 2 {
        return Err(CliError::Usage("--points must be at least 2".into()));
    }
    let model = cfg.model();
    let c = match c {
        Some(c) => c,
        None => cbar(&model)?,
    };
    let profile = RiccatiProfile::new(&model, c, cfg.root_tol)?;
    let a = model.horizon_radius();
    // stop short of the singularity; without one, trace out to 20 m
    let end = profile.singularity.unwrap_or(40.0 * a);
    let n = points;
    let mut r = Vec::with_capacity(n);
    let mut psi = Vec::with_capacity(n);
    for i in 0..n {
        let x = a + (end - a) * i as f64 / n as f64;
        r.push(x);
        psi.push(psi_c(&model, c, IsotropicRadius(x))?);
    }
    let mut t = String::new();
    let _ = writeln!(t, "# c={} R_c={}", num(c), profile.singularity.map_or("none".to_string(), num));
    t.push_str("r,psi_c\n");
    for (x, p) in r.iter().zip(&psi) {
        csv_row(&mut t, &[num(*x), num(*p)]);
    }
    let rep = RiccatiReport {
        c,
        r_c: profile.singularity,
        r,
        psi_c: psi,
    };
    Ok(Output::new(t, &rep))
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Geom { .. } => "geom",
        Command::StabilityRadius => "stability-radius",
        Command::Spectrum { .. } => "spectrum",
        Command::MorseIndex { .. } => "morse-index",
        Command::Monotonicity { .. } => "monotonicity",
        Command::BoundaryBound { .. } => "boundary-bound",
        Command::Riccati { .. } => "riccati",
    }
}

fn dispatch(cfg: &RunConfig, command: &Command) -> CliResult<Output> {
    match command {
        Command::Geom { r_max, points } => cmd_geom(cfg, *r_max, *points),
        Command::StabilityRadius => cmd_stability(cfg),
        Command::Spectrum { k, outer, count, method, grid } => cmd_spectrum(cfg, *k, *outer, *count, *method, *grid),
        Command::MorseIndex { outer, kmax } => cmd_morse(cfg, *outer, *kmax),
        Command::Monotonicity { surface, rho_max } => cmd_monotonicity(cfg, surface, *rho_max),
        Command::BoundaryBound { surface, rho_max } => cmd_boundary(cfg, surface, *rho_max),
        Command::Riccati { c, points } => cmd_riccati(cfg, *c, *points),
    }
}

/// Cap rayon's global pool from `SCHW_THREADS` (0 or unset = automatic).
fn configure_threads() -> CliResult<()> {
    let Ok(v) = std::env::var("SCHW_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("SCHW_THREADS must be a non-negative integer, got `{v}`")))?;
    if n > 0 {
        // a pool that is already running keeps its size
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn execute(cli: &Cli) -> CliResult<(RunConfig, String, Vec<String>)> {
    configure_threads()?;
    let cfg = RunConfig::resolve(&cli.global)?;
    let out = dispatch(&cfg, &cli.command)?;
    let text = match cfg.output {
        OutputFormat::Table => out.table,
        OutputFormat::Json => {
            let env = Envelope {
                provenance: Provenance {
                    tool: "schw",
                    version: env!("CARGO_PKG_VERSION"),
                    command: command_name(&cli.command),
                    mass: cfg.mass,
                    ode_tol: cfg.ode_tol,
                    root_tol: cfg.root_tol,
                    quad_tol: cfg.quad_tol,
                    seed: cfg.seed,
                },
                result: out.json,
            };
            let mut s = serde_json::to_string_pretty(&env).expect("json");
            s.push('\n');
            s
        }
    };
    Ok((cfg, text, out.warnings))
}

/// Run the CLI on `args` (including the program name) and return the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let target: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    match execute(&cli) {
        Ok((cfg, text, warnings)) => {
            for w in warnings {
                let _ = writeln!(stderr, "{w}");
            }
            let written = match &cfg.out {
                Some(path) => std::fs::write(path, text.as_bytes())
                    .map_err(|e| format!("cannot write {}: {e}", path.display())),
                None => stdout.write_all(text.as_bytes()).map_err(|e| e.to_string()),
            };
            match written {
                Ok(()) => EXIT_OK,
                Err(msg) => {
                    let _ = writeln!(stderr, "error: {msg}");
                    EXIT_USAGE
                }
            }
        }
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Numerical(msg)) => {
            let _ = writeln!(stderr, "numerical failure: {msg}");
            EXIT_NUMERICAL
        }
    }
}
