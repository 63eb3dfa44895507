//! Monotonicity of `μ(Σ∩B_ρ)/h(ρ)²`, density at infinity, and the
//! boundary-length bound `|∂Σ| ≤ 4πm Θ(Σ)`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use super::integrals::{ball_integrals, cone_reference_area, BallIntegrals, QuadSpec};
use super::{boundary_length, ParamSurface};
use crate::error::{Error, Result};
use crate::geometry::{HorizonDistance, SchwarzschildModel};

/// Relative disagreement between successive density extrapolates above which
/// the density is reported as not finite.
pub const DENSITY_CHANGE_TOL: f64 = 1e-3;

/// Slack allowed in `Θ ≥ |∂Σ|/(4πm)`.
pub const BOUND_TOL: f64 = 1e-6;

const DENSITY_POINTS: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub rhos: Vec<f64>,
    pub areal_radii: Vec<f64>,
    pub mu_values: Vec<f64>,
    /// `μ(Σ∩B_ρ)/h(ρ)²`.
    pub ratios: Vec<f64>,
    /// Cumulative `∫_{Σ∩B_ρ} (f/h²)|∂_r^⊥|²`.
    pub defect_integrals: Vec<f64>,
    /// `|∂Σ|`; absent without a horizon.
    pub boundary_length: Option<f64>,
    pub monotone: bool,
    /// Largest decrease between consecutive ratios (0 when non-decreasing).
    pub max_backstep: f64,
    /// Monotonicity-formula residual for consecutive pairs `(σ, ρ)`; with a
    /// horizon the first pair is `(0, ρ₀)`.
    pub formula_residuals: Vec<f64>,
    /// Residual for every pair `(0, ρ)`; empty without a horizon.
    pub anchored_residuals: Vec<f64>,
}

/// `n` log-spaced horizon distances from `lo` to `hi`.
pub fn log_rho_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<HorizonDistance>> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) || n < 2 {
        return Err(Error::Precondition(format!("bad ρ grid [{lo}, {hi}] with {n} points")));
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..n)
        .map(|i| {
            if i + 1 == n {
                HorizonDistance(hi)
            } else {
                HorizonDistance((a + (b - a) * i as f64 / (n - 1) as f64).exp())
            }
        })
        .collect())
}

/// 40 log-spaced distances from `10⁻² m` (or `10⁻⁵ ρ_max` when flat) to `ρ_max`.
pub fn default_rho_grid(model: &SchwarzschildModel, rho_max: f64) -> Result<Vec<HorizonDistance>> {
    let lo = if model.is_flat() { 1e-5 * rho_max } else { 1e-2 * model.mass() };
    log_rho_grid(lo, rho_max, 40)
}

fn integrals_on_grid(
    model: &SchwarzschildModel,
    surface: &ParamSurface,
    rhos: &[HorizonDistance],
    quad: &QuadSpec,
) -> Result<Vec<BallIntegrals>> {
    rhos.par_iter().map(|&r| ball_integrals(model, surface, r, quad)).collect()
}

/// Ratios `μ/h²` on `rho_grid` and the residuals of
/// `μ_ρ/h_ρ² = μ_σ/h_σ² + ∫_{Σ_ρ∖Σ_σ}(f/h²)|∂_r^⊥|² + m(1/h_σ² − 1/h_ρ²)|∂Σ|`.
///
/// The identity presumes a free-boundary minimal surface; that is not checked.
pub fn monotonicity_report(
    model: &SchwarzschildModel,
    surface: &ParamSurface,
    rho_grid: &[HorizonDistance],
    quad: &QuadSpec,
) -> Result<MonotonicityReport> {
    if rho_grid.is_empty() || rho_grid[0].0 <= 0.0 || rho_grid.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::Precondition("ρ grid must be positive and strictly increasing".into()));
    }
    let data = integrals_on_grid(model, surface, rho_grid, quad)?;
    let m = model.mass();
    let boundary = if model.is_flat() || !surface.free_boundary() {
        None
    } else {
        Some(boundary_length(model, surface)?)
    };
    let bl = boundary.unwrap_or(0.0);

    let ratios: Vec<f64> = data.iter().map(|d| d.mu / (d.areal_radius * d.areal_radius)).collect();
    let max_ratio = ratios.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let max_backstep = ratios.windows(2).map(|w| (w[0] - w[1]).max(0.0)).fold(0.0, f64::max);

    // (ratio, cumulative defect, h) at the horizon when there is one
    let horizon = (!model.is_flat()).then_some((0.0, 0.0, 2.0 * m));
    let point = |i: usize| (ratios[i], data[i].defect, data[i].areal_radius);
    let residual = |(rs, ds, hs): (f64, f64, f64), (rr, dr, hr): (f64, f64, f64)| {
        rr - (rs + (dr - ds) + m * (1.0 / (hs * hs) - 1.0 / (hr * hr)) * bl)
    };

    let mut formula_residuals = Vec::with_capacity(rho_grid.len());
    if let Some(h0) = horizon {
        formula_residuals.push(residual(h0, point(0)));
    }
    for i in 1..rho_grid.len() {
        formula_residuals.push(residual(point(i - 1), point(i)));
    }
    let anchored_residuals = match horizon {
        Some(h0) => (0..rho_grid.len()).map(|i| residual(h0, point(i))).collect(),
        None => Vec::new(),
    };

    Ok(MonotonicityReport {
        rhos: rho_grid.iter().map(|r| r.0).collect(),
        areal_radii: data.iter().map(|d| d.areal_radius).collect(),
        mu_values: data.iter().map(|d| d.mu).collect(),
        defect_integrals: data.iter().map(|d| d.defect).collect(),
        monotone: max_backstep <= quad.rel_tol * max_ratio.max(1.0),
        ratios,
        boundary_length: boundary,
        max_backstep,
        formula_residuals,
        anchored_residuals,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityEstimate {
    pub rhos: Vec<f64>,
    /// `area(Σ∩B_ρ) / area(C∩B_ρ)` with `C` a great-circle cone.
    pub ratios: Vec<f64>,
    /// Extrapolation to `1/h = 0` through the three largest radii.
    pub extrapolated: f64,
    /// The same extrapolation one step earlier in the sequence.
    pub previous_extrapolate: f64,
    pub raw_tail: f64,
    pub finite: bool,
    pub diagnostic: Option<String>,
}

/// Value at `x = 0` of the parabola through three points.
pub(super) fn extrapolate_to_zero(p: &[(f64, f64)]) -> f64 {
    let mut acc = 0.0;
    for (i, &(xi, yi)) in p.iter().enumerate() {
        let mut l = 1.0;
        for (j, &(xj, _)) in p.iter().enumerate() {
            if i != j {
                l *= -xj / (xi - xj);
            }
        }
        acc += yi * l;
    }
    acc
}

/// Density at infinity `Θ = lim area(Σ∩B_ρ)/area(C∩B_ρ)`, from ratios at
/// `ρ_max/32, ρ_max/16, …, ρ_max` extrapolated in `1/h(ρ)`.
pub fn density_at_infinity(
    model: &SchwarzschildModel,
    surface: &ParamSurface,
    rho_max: f64,
    quad: &QuadSpec,
) -> Result<DensityEstimate> {
    let floor = if model.is_flat() { 0.0 } else { 10.0 * model.mass() };
    if !(rho_max > floor) || !rho_max.is_finite() {
        return Err(Error::Precondition(format!(
            "ρ_max = {rho_max} must be finite and exceed {floor}"
        )));
    }
    let rhos: Vec<HorizonDistance> = (0..DENSITY_POINTS)
        .map(|j| HorizonDistance(rho_max * 0.5f64.powi((DENSITY_POINTS - 1 - j) as i32)))
        .collect();
    let pairs: Vec<(f64, f64)> = rhos
        .par_iter()
        .map(|&r| -> Result<(f64, f64)> {
            let d = ball_integrals(model, surface, r, quad)?;
            let reference = cone_reference_area(model, r, quad)?;
            Ok((1.0 / d.areal_radius, d.area / reference))
        })
        .collect::<Result<_>>()?;
    let n = pairs.len();
    let extrapolated = extrapolate_to_zero(&pairs[n - 3..]);
    let previous_extrapolate = extrapolate_to_zero(&pairs[n - 4..n - 1]);
    let change = (extrapolated - previous_extrapolate).abs();
    let finite = extrapolated.is_finite() && change <= DENSITY_CHANGE_TOL * extrapolated.abs().max(1.0);
    Ok(DensityEstimate {
        rhos: rhos.iter().map(|r| r.0).collect(),
        ratios: pairs.iter().map(|p| p.1).collect(),
        extrapolated,
        previous_extrapolate,
        raw_tail: pairs[n - 1].1,
        finite,
        diagnostic: (!finite).then(|| format!("no finite density detected (extrapolates differ by {change:e})")),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryBoundReport {
    /// Density estimate Θ.
    pub lhs: f64,
    /// `|∂Σ|/(4πm)`.
    pub rhs: f64,
    /// `(1/π)∫_Σ (f/h²)|∂_r^⊥|²`: truncated part plus tail estimate.
    pub equality_defect: f64,
    pub defect_truncated: f64,
    /// Contribution beyond `ρ_max`, from the monotonicity identity.
    pub tail_estimate: f64,
    pub boundary_length: f64,
    pub rho_max: f64,
    pub bound_holds: bool,
    pub density: DensityEstimate,
}

/// Check `Θ(Σ) = |∂Σ|/(4πm) + (1/π)∫_Σ (f/h²)|∂_r^⊥|²` and the resulting bound
/// `Θ ≥ |∂Σ|/(4πm)` for a free-boundary minimal surface of finite density.
///
/// The defect is integrated over `Σ∩B_{ρ_max}`; the remainder is estimated as
/// `(πΘ − μ/h² − m|∂Σ|/h²)/π` at `ρ_max`, which the monotonicity identity
/// equates with the tail of the defect integral.
pub fn boundary_bound_check(
    model: &SchwarzschildModel,
    surface: &ParamSurface,
    rho_max: f64,
    quad: &QuadSpec,
) -> Result<BoundaryBoundReport> {
    model.require_horizon()?;
    let bl = boundary_length(model, surface)?;
    let density = density_at_infinity(model, surface, rho_max, quad)?;
    let m = model.mass();
    let outer = ball_integrals(model, surface, HorizonDistance(rho_max), quad)?;
    let h2 = outer.areal_radius * outer.areal_radius;
    let theta = density.extrapolated;
    let defect_truncated = outer.defect / PI;
    let tail_estimate = (PI * theta - outer.mu / h2 - m * bl / h2) / PI;
    let rhs = bl / (4.0 * PI * m);
    Ok(BoundaryBoundReport {
        lhs: theta,
        rhs,
        equality_defect: defect_truncated + tail_estimate.max(0.0),
        defect_truncated,
        tail_estimate,
        boundary_length: bl,
        rho_max,
        bound_holds: theta >= rhs - BOUND_TOL * rhs.max(1.0),
        density,
    })
}
