//! Independent finite-volume discretisation of the radial mode problems,
//! used to cross-check the shooting solver.
//!
//! The mode-`k` problem in divergence form,
//! `(r u′)′ − (k²/r) u + r P(r) u = −λ w(r) u` with `P = (m/r³)(1 + m/2r)⁻²` and
//! `w = r (1 + m/2r)⁴`, is discretised on a uniform grid over `[m/2, R]`.
//! The horizon end is a half control volume (natural Neumann condition, no
//! ghost row needed); the node at `R` is eliminated (Dirichlet).

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{IsotropicRadius, SchwarzschildModel};
use crate::spectral::{SolverSettings, Spectrum, SpectrumEntry, SpectrumMethod};

pub const DEFAULT_GRID_INTERVALS: usize = 1024;
pub const MIN_GRID_INTERVALS: usize = 16;

/// Symmetric tridiagonal generalised eigenproblem `K u = λ M u` with diagonal `M`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteModeProblem {
    pub model: SchwarzschildModel,
    pub k: i32,
    pub outer_radius: f64,
    /// Number of grid intervals; there are `n` unknowns `u_0 … u_{n−1}`.
    pub n: usize,
    pub grid: Vec<f64>,
    pub stiffness_diag: Vec<f64>,
    /// `stiffness_off[i]` couples unknowns `i` and `i + 1`.
    pub stiffness_off: Vec<f64>,
    pub mass_weights: Vec<f64>,
}

impl DiscreteModeProblem {
    pub fn unknowns(&self) -> usize {
        self.stiffness_diag.len()
    }

    pub fn stiffness(&self, i: usize, j: usize) -> f64 {
        match i.abs_diff(j) {
            0 => self.stiffness_diag[i],
            1 => self.stiffness_off[i.min(j)],
            _ => 0.0,
        }
    }

    /// Diagonal and off-diagonal of `M^{-1/2} K M^{-1/2}`.
    fn reduced(&self) -> (Vec<f64>, Vec<f64>) {
        let d = self
            .stiffness_diag
            .iter()
            .zip(&self.mass_weights)
            .map(|(k, m)| k / m)
            .collect();
        let e = self
            .stiffness_off
            .iter()
            .enumerate()
            .map(|(i, k)| k / (self.mass_weights[i] * self.mass_weights[i + 1]).sqrt())
            .collect();
        (d, e)
    }
}

fn reaction(model: &SchwarzschildModel, k: i32, r: f64, with_potential: bool) -> f64 {
    let m = model.mass();
    let kk = f64::from(k * k);
    let pot = if with_potential {
        m / (r * r) / model.conformal_root_unchecked(r)
    } else {
        0.0
    };
    kk / r - pot
}

fn assemble_impl(model: &SchwarzschildModel, k: i32, outer: f64, n: usize, with_potential: bool) -> Result<DiscreteModeProblem> {
    let a = model.horizon_radius();
    if !(outer > a) || !outer.is_finite() {
        return Err(Error::Precondition(format!("outer radius {outer} must exceed {a}")));
    }
    if n < MIN_GRID_INTERVALS {
        return Err(Error::Precondition(format!(
            "grid needs at least {MIN_GRID_INTERVALS} intervals, got {n}"
        )));
    }
    if model.is_flat() && k != 0 {
        return Err(Error::Precondition(
            "flat disc problem is only supported for k = 0".into(),
        ));
    }
    let h = (outer - a) / n as f64;
    let grid: Vec<f64> = (0..=n).map(|i| a + h * i as f64).collect();
    let weight = |r: f64| r * model.conformal_factor_unchecked(r);
    let react = |r: f64| reaction(model, k, r, with_potential);

    let mut diag = Vec::with_capacity(n);
    let mut off = Vec::with_capacity(n - 1);
    let mut mass = Vec::with_capacity(n);
    for (i, &r) in grid.iter().enumerate().take(n) {
        let right = r + 0.5 * h;
        // control volume [r − h/2, r + h/2] ∩ [a, R], split into halves and
        // integrated by the midpoint rule on each half
        let (flux, mass_i, react_i) = if i == 0 {
            let q = r + 0.25 * h;
            (right / h, 0.5 * h * weight(q), 0.5 * h * react(q))
        } else {
            let (ql, qr) = (r - 0.25 * h, r + 0.25 * h);
            (
                (r - 0.5 * h + right) / h,
                0.5 * h * (weight(ql) + weight(qr)),
                0.5 * h * (react(ql) + react(qr)),
            )
        };
        diag.push(flux + react_i);
        mass.push(mass_i);
        if i + 1 < n {
            off.push(-right / h);
        }
    }
    Ok(DiscreteModeProblem {
        model: *model,
        k,
        outer_radius: outer,
        n,
        grid,
        stiffness_diag: diag,
        stiffness_off: off,
        mass_weights: mass,
    })
}

/// Assemble the discrete mode-`k` problem on `n` uniform intervals of `[m/2, R]`.
pub fn assemble(model: &SchwarzschildModel, k: i32, outer: IsotropicRadius, n: usize) -> Result<DiscreteModeProblem> {
    assemble_impl(model, k, outer.0, n, true)
}

/// Number of eigenvalues of the tridiagonal matrix `(d, e)` below `x`.
fn sturm_count(d: &[f64], e: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..d.len() {
        let coupling = if i == 0 { 0.0 } else { e[i - 1] * e[i - 1] / q };
        q = d[i] - x - coupling;
        if q == 0.0 {
            q = -f64::EPSILON * (d[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn gershgorin(d: &[f64], e: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..d.len() {
        let radius = if i > 0 { e[i - 1].abs() } else { 0.0 } + e.get(i).map_or(0.0, |x| x.abs());
        lo = lo.min(d[i] - radius);
        hi = hi.max(d[i] + radius);
    }
    (lo, hi)
}

fn bisect_eigenvalue(d: &[f64], e: &[f64], index: usize, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
            break;
        }
        if sturm_count(d, e, mid) > index {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn lowest_raw(problem: &DiscreteModeProblem, how_many: usize) -> Result<Vec<f64>> {
    if how_many == 0 || how_many >= problem.unknowns() {
        return Err(Error::Domain(format!(
            "how_many = {how_many} must lie in 1..{}",
            problem.unknowns()
        )));
    }
    let (d, e) = problem.reduced();
    let (lo, hi) = gershgorin(&d, &e);
    Ok((0..how_many)
        .into_par_iter()
        .map(|j| bisect_eigenvalue(&d, &e, j, lo, hi))
        .collect())
}

fn spectrum_from(problem: &DiscreteModeProblem, lambdas: Vec<f64>, richardson: bool) -> Spectrum {
    let m2 = problem.model.mass().powi(2);
    Spectrum {
        entries: lambdas
            .into_iter()
            .enumerate()
            .map(|(i, lambda)| SpectrumEntry {
                k: problem.k,
                n: i + 1,
                lambda,
                lambda_scaled: lambda * m2,
                terminal_residual: None,
            })
            .collect(),
        method: SpectrumMethod::FiniteDifference,
        outer_radius: problem.outer_radius,
        settings: SolverSettings {
            ode_tol: None,
            eig_tol: 4.0 * f64::EPSILON,
            grid_intervals: Some(problem.n),
            richardson,
        },
    }
}

/// Lowest `how_many` eigenvalues by Sturm-sequence bisection on the
/// congruence-reduced standard problem.
pub fn lowest_eigenvalues(problem: &DiscreteModeProblem, how_many: usize) -> Result<Spectrum> {
    let lambdas = lowest_raw(problem, how_many)?;
    Ok(spectrum_from(problem, lambdas, false))
}

/// Number of negative eigenvalues of the discrete problem (Sylvester inertia of `K`).
pub fn negative_count(problem: &DiscreteModeProblem) -> usize {
    sturm_count(&problem.stiffness_diag, &problem.stiffness_off, 0.0)
}

/// Solve on `n` and `2n` intervals and combine as `(4 λ(2n) − λ(n)) / 3`.
pub fn richardson_eigenvalues(
    model: &SchwarzschildModel,
    k: i32,
    outer: IsotropicRadius,
    n: usize,
    how_many: usize,
) -> Result<Spectrum> {
    let (coarse, fine) = rayon::join(
        || assemble(model, k, outer, n).and_then(|p| lowest_raw(&p, how_many)),
        || assemble(model, k, outer, 2 * n),
    );
    let coarse = coarse?;
    let fine_problem = fine?;
    let fine = lowest_raw(&fine_problem, how_many)?;
    let lambdas = coarse
        .iter()
        .zip(&fine)
        .map(|(c, f)| (4.0 * f - c) / 3.0)
        .collect();
    Ok(spectrum_from(&fine_problem, lambdas, true))
}
