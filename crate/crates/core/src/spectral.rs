//! Eigenvalues of the Jacobi operator of the plane through the origin,
//! truncated at isotropic radius `R` (free at the horizon, Dirichlet at `R`).
//!
//! Shooting works on the transformed radial shot of [`crate::mode_odes`]: for a
//! given `λ`, the number of sign changes of `v(·; λ)` inside `(m/2, R)` equals
//! the number of mode-`k` eigenvalues below `λ`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{IsotropicRadius, SchwarzschildModel};
use crate::mode_odes::{integrate_v, ModeParams, RadialSolution};
use crate::numerics::quad::GaussLegendre;
use crate::numerics::roots::brent;

/// Default eigenvalue bracket width, in units of m⁻².
pub const DEFAULT_EIG_TOL: f64 = 1e-10;

/// Initial half-width of the λ search bracket, in units of m⁻².
const INITIAL_BRACKET: f64 = 10.0;
const MAX_DOUBLINGS: usize = 60;

/// Relative size of `u(R)` accepted by [`rayleigh_quotient`].
pub const RAYLEIGH_BOUNDARY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumMethod {
    Shooting,
    FiniteDifference,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub ode_tol: f64,
    pub eig_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumEntry {
    pub k: i32,
    /// 1-based position within mode `k`.
    pub n: usize,
    /// Eigenvalue in 1/length².
    pub lambda: f64,
    /// Eigenvalue in units of m⁻².
    pub lambda_scaled: f64,
    /// `|v(R; λ)| / sup|v|` of the re-shot eigenfunction (shooting only).
    pub terminal_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    pub entries: Vec<SpectrumEntry>,
    pub method: SpectrumMethod,
    pub outer_radius: f64,
    pub settings: SolverSettings,
}

/// Numerical settings a [`Spectrum`] was produced with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverSettings {
    pub ode_tol: Option<f64>,
    pub eig_tol: f64,
    /// Grid intervals of the finest finite-difference solve.
    pub grid_intervals: Option<usize>,
    pub richardson: bool,
}

impl Spectrum {
    pub fn lambdas(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.lambda).collect()
    }

    pub fn negative_count(&self) -> usize {
        self.entries.iter().filter(|e| e.lambda < 0.0).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexReport {
    pub outer_radius: f64,
    pub per_mode_negative_counts: BTreeMap<i32, usize>,
    pub morse_index: usize,
}

fn check_outer(model: &SchwarzschildModel, outer: f64) -> Result<()> {
    model.require_horizon()?;
    if !(outer > model.horizon_radius()) || !outer.is_finite() {
        return Err(Error::Precondition(format!(
            "outer radius {outer} must exceed m/2 = {}",
            model.horizon_radius()
        )));
    }
    Ok(())
}

fn shoot(model: &SchwarzschildModel, k: i32, lambda: f64, outer: f64, ode_tol: f64) -> Result<RadialSolution> {
    integrate_v(&ModeParams::new(*model, k, lambda), outer, ode_tol)
}

/// Number of mode-`k` eigenvalues strictly below `lambda` on `Σ₀(R)`.
pub fn count_below(model: &SchwarzschildModel, k: i32, outer: f64, lambda: f64, ode_tol: f64) -> Result<usize> {
    check_outer(model, outer)?;
    Ok(shoot(model, k, lambda, outer, ode_tol)?.zeros_before(outer))
}

/// Number of negative eigenvalues of mode `k`: interior zeros of the `λ = 0` shot.
pub fn negative_count(model: &SchwarzschildModel, k: i32, outer: IsotropicRadius, ode_tol: f64) -> Result<usize> {
    count_below(model, k, outer.0, 0.0, ode_tol)
}

/// Lowest `how_many` eigenvalues of mode `k` by oscillation-count bisection
/// followed by Brent refinement of the terminal condition `v(R; λ) = 0`.
/// `eig_tol` is a bracket width in units of m⁻².
pub fn eigenvalues_shooting(
    model: &SchwarzschildModel,
    k: i32,
    outer: IsotropicRadius,
    how_many: usize,
    tolerances: Tolerances,
) -> Result<Spectrum> {
    let outer = outer.0;
    check_outer(model, outer)?;
    if how_many == 0 {
        return Err(Error::Precondition("how_many must be at least 1".into()));
    }
    let m = model.mass();
    let unit = 1.0 / (m * m);
    let ode_tol = tolerances.ode_tol;
    let count = |lambda: f64| -> Result<usize> { Ok(shoot(model, k, lambda, outer, ode_tol)?.zeros_before(outer)) };

    let mut entries = Vec::with_capacity(how_many);
    let mut lo_seed = -INITIAL_BRACKET * unit;
    for n in 1..=how_many {
        // establish count(lo) ≤ n−1 < n ≤ count(hi)
        let mut lo = lo_seed;
        let mut doublings = 0;
        while count(lo)? >= n {
            lo *= 2.0;
            doublings += 1;
            if doublings > MAX_DOUBLINGS {
                return Err(Error::Search(format!(
                    "k={k} n={n}: could not find a lower bracket (last λ = {lo:e})"
                )));
            }
        }
        let mut hi = entries
            .last()
            .map_or(INITIAL_BRACKET * unit, |e: &SpectrumEntry| e.lambda.abs().max(unit) * 2.0 + e.lambda);
        hi = hi.max(INITIAL_BRACKET * unit).max(lo + unit);
        doublings = 0;
        while count(hi)? < n {
            hi = hi.abs() * 2.0;
            doublings += 1;
            if doublings > MAX_DOUBLINGS {
                return Err(Error::Search(format!(
                    "k={k} n={n}: could not find an upper bracket (last λ = {hi:e})"
                )));
            }
        }
        while hi - lo > 1e-3 * unit.max(1e-3 * lo.abs().max(hi.abs())) {
            let mid = 0.5 * (lo + hi);
            if count(mid)? >= n {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let terminal = |lambda: f64| -> f64 {
            match shoot(model, k, lambda, outer, ode_tol) {
                Ok(sol) => {
                    let last = sol.nodes.last().expect("non-empty");
                    last.v / (last.v.abs() + m * last.v_prime.abs())
                }
                Err(_) => f64::NAN,
            }
        };
        let lambda = brent(terminal, lo, hi, tolerances.eig_tol * unit, 200)
            .map_err(|e| Error::Search(format!("k={k} n={n}: {e}")))?;
        let sol = shoot(model, k, lambda, outer, ode_tol)?;
        let residual = sol.terminal_value().abs() / sol.sup_abs_v();
        entries.push(SpectrumEntry {
            k,
            n,
            lambda,
            lambda_scaled: lambda * m * m,
            terminal_residual: Some(residual),
        });
        lo_seed = lambda.min(lo_seed);
    }
    Ok(Spectrum {
        entries,
        method: SpectrumMethod::Shooting,
        outer_radius: outer,
        settings: SolverSettings {
            ode_tol: Some(tolerances.ode_tol),
            eig_tol: tolerances.eig_tol,
            grid_intervals: None,
            richardson: false,
        },
    })
}

/// Morse index of `Σ₀(R)`: the sum of negative counts over `k ∈ {0, ±1, …, ±kmax}`.
pub fn morse_index(model: &SchwarzschildModel, outer: IsotropicRadius, kmax: u32, ode_tol: f64) -> Result<IndexReport> {
    check_outer(model, outer.0)?;
    if kmax < 1 {
        return Err(Error::Precondition("kmax must be at least 1".into()));
    }
    let counts: Vec<(i32, usize)> = (0..=kmax as i32)
        .into_par_iter()
        .map(|k| negative_count(model, k, outer, ode_tol).map(|c| (k, c)))
        .collect::<Result<_>>()?;
    let mut per_mode = BTreeMap::new();
    for (k, c) in counts {
        per_mode.insert(k, c);
        if k != 0 {
            per_mode.insert(-k, c);
        }
    }
    let morse_index = per_mode.values().sum();
    Ok(IndexReport {
        outer_radius: outer.0,
        per_mode_negative_counts: per_mode,
        morse_index,
    })
}

/// `½ log(2R/m) − (2R + m)/(2R − m)`, whose root is the maximal stable radius.
pub fn stability_residual(model: &SchwarzschildModel, outer: f64) -> f64 {
    let m = model.mass();
    0.5 * (2.0 * outer / m).ln() - (2.0 * outer + m) / (2.0 * outer - m)
}

/// Radius `R*` of the maximal stable annulus, the unique root of
/// `log √(2R/m) = (2R + m)/(2R − m)` on `(m/2, ∞)`; it lies in `[2m, 100m]`.
pub fn stability_radius(model: &SchwarzschildModel, tol: f64) -> Result<IsotropicRadius> {
    model.require_horizon()?;
    if !(tol > 0.0) {
        return Err(Error::Precondition(format!("tolerance must be positive, got {tol}")));
    }
    let m = model.mass();
    let (lo, hi) = (2.0 * m, 100.0 * m);
    let f = |r: f64| stability_residual(model, r);
    debug_assert!(f(lo) < 0.0 && f(hi) > 0.0);
    let root = brent(f, lo, hi, 1e-15 * m, 500)?;
    let res = f(root).abs();
    if res > tol {
        return Err(Error::Root(format!("stability residual {res:e} exceeds {tol:e}")));
    }
    Ok(IsotropicRadius(root))
}

/// A radial function sampled on `[m/2, R]`, optionally with its derivative.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialSamples {
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub du: Option<Vec<f64>>,
}

impl RadialSamples {
    pub fn from_fn<F: Fn(f64) -> f64>(a: f64, b: f64, n: usize, f: F) -> Self {
        let r: Vec<f64> = (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect();
        let u = r.iter().map(|&x| f(x)).collect();
        RadialSamples { r, u, du: None }
    }

    fn derivatives(&self) -> Vec<f64> {
        match &self.du {
            Some(d) => d.clone(),
            None => (0..self.r.len()).map(|i| five_point_derivative(&self.r, &self.u, i)).collect(),
        }
    }
}

/// Derivative at node `i` of the quartic through the five nearest samples.
fn five_point_derivative(x: &[f64], y: &[f64], i: usize) -> f64 {
    let n = x.len();
    let w = 5.min(n);
    let start = i.saturating_sub(w / 2).min(n - w);
    let idx: Vec<usize> = (start..start + w).collect();
    let xi = x[i];
    let mut d = 0.0;
    for &j in &idx {
        // derivative of the Lagrange basis polynomial ℓ_j at xi
        let mut dl = 0.0;
        for &p in &idx {
            if p == j {
                continue;
            }
            let mut term = 1.0 / (x[j] - x[p]);
            for &q in &idx {
                if q != j && q != p {
                    term *= (xi - x[q]) / (x[j] - x[q]);
                }
            }
            dl += term;
        }
        d += y[j] * dl;
    }
    d
}

fn hermite_eval(x0: f64, x1: f64, y0: f64, y1: f64, d0: f64, d1: f64, x: f64) -> (f64, f64) {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let v = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
        + (t3 - 2.0 * t2 + t) * h * d0
        + (-2.0 * t3 + 3.0 * t2) * y1
        + (t3 - t2) * h * d1;
    let dv = ((6.0 * t2 - 6.0 * t) * y0 + (-6.0 * t2 + 6.0 * t) * y1) / h
        + (3.0 * t2 - 4.0 * t + 1.0) * d0
        + (3.0 * t2 - 2.0 * t) * d1;
    (v, dv)
}

/// Rayleigh quotient of a radial test function on `Σ₀(R)`:
/// `∫(u′² − (m/r³)(1 + m/2r)⁻² u²) r dr / ∫ u² (1 + m/2r)⁴ r dr`.
/// The horizon term of the quadratic form vanishes since the horizon is totally geodesic.
pub fn rayleigh_quotient(model: &SchwarzschildModel, outer: IsotropicRadius, samples: &RadialSamples) -> Result<f64> {
    check_outer(model, outer.0)?;
    let RadialSamples { r, u, .. } = samples;
    if r.len() < 5 || r.len() != u.len() {
        return Err(Error::Precondition("need at least 5 matching samples".into()));
    }
    if r.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition("sample radii must be strictly increasing".into()));
    }
    let m = model.mass();
    let a = model.horizon_radius();
    if (r[0] - a).abs() > 1e-9 * m || (r[r.len() - 1] - outer.0).abs() > 1e-9 * outer.0 {
        return Err(Error::Precondition(format!(
            "samples must span [m/2, R] = [{a}, {}]",
            outer.0
        )));
    }
    let sup = u.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    if u[u.len() - 1].abs() > RAYLEIGH_BOUNDARY_TOL * sup {
        return Err(Error::Precondition(format!(
            "u(R) = {:e} does not vanish",
            u[u.len() - 1]
        )));
    }
    let du = samples.derivatives();
    let gl = GaussLegendre::new(16);
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..r.len() - 1 {
        for (x, w) in gl.mapped(r[i], r[i + 1]) {
            let (v, dv) = hermite_eval(r[i], r[i + 1], u[i], u[i + 1], du[i], du[i + 1], x);
            let root = model.conformal_root_unchecked(x);
            let potential = m / (x * x * x) / root;
            num += w * (dv * dv - potential * v * v) * x;
            den += w * v * v * root * root * x;
        }
    }
    Ok(num / den)
}

/// Re-shoot at `lambda` and return `u = v/√r` on `[m/2, R]`, normalised to unit
/// weighted norm with `u(m/2) > 0`.
pub fn eigenfunction(
    model: &SchwarzschildModel,
    k: i32,
    outer: IsotropicRadius,
    lambda: f64,
    ode_tol: f64,
) -> Result<RadialSamples> {
    check_outer(model, outer.0)?;
    let sol = shoot(model, k, lambda, outer.0, ode_tol)?;
    let top = sol.nodes.iter().map(|n| n.ln_scale).fold(f64::NEG_INFINITY, f64::max);
    let mut r = Vec::with_capacity(sol.nodes.len());
    let mut u = Vec::with_capacity(sol.nodes.len());
    let mut du = Vec::with_capacity(sol.nodes.len());
    for n in &sol.nodes {
        let s = (n.ln_scale - top).exp();
        let (v, dv) = (n.v * s, n.v_prime * s);
        let sq = n.r.sqrt();
        r.push(n.r);
        u.push(v / sq);
        du.push(dv / sq - 0.5 * v / (sq * n.r));
    }
    // weighted norm ∫ u² e^{2φ} r dr
    let gl = GaussLegendre::new(16);
    let mut norm2 = 0.0;
    for i in 0..r.len() - 1 {
        for (x, w) in gl.mapped(r[i], r[i + 1]) {
            let (v, _) = hermite_eval(r[i], r[i + 1], u[i], u[i + 1], du[i], du[i + 1], x);
            norm2 += w * v * v * model.conformal_factor_unchecked(x) * x;
        }
    }
    let scale = norm2.sqrt().recip() * u[0].signum();
    u.iter_mut().for_each(|x| *x *= scale);
    du.iter_mut().for_each(|x| *x *= scale);
    Ok(RadialSamples { r, u, du: Some(du) })
}
