//! Parametrised surfaces in the Schwarzschild exterior: cones over spherical
//! curves (the plane through the origin among them), general charts, and the
//! integrals entering the monotonicity formula and the boundary-length bound.
//!
//! The metric is conformally flat, so angles are Euclidean and areas pick up
//! the factor `e^{2φ} = (1 + m/2|x|)⁴`.

mod curves;
mod integrals;
mod reports;

use std::sync::Arc;

use nalgebra::{Rotation3, Vector3};

use crate::error::{Error, Result};
use crate::geometry::{HorizonDistance, IsotropicRadius, SchwarzschildModel};
use crate::numerics::quad::adaptive_composite;

pub use curves::{check_curve, random_rotation, FnCurve, GreatCircle, LatitudeCircle, SphereCurve, CURVE_TOL};
pub use integrals::{ball_integrals, cone_reference_area, mu_integral, BallIntegrals, QuadSpec};
pub use reports::{
    boundary_bound_check, default_rho_grid, density_at_infinity, log_rho_grid, monotonicity_report,
    BoundaryBoundReport, DensityEstimate, MonotonicityReport, BOUND_TOL, DENSITY_CHANGE_TOL,
};

use curves::SharedCurve;

/// A map `(t, s) ↦ x` on `[t₀, t₁] × [0, S)`, periodic in `s`.
///
/// Charts are evaluated concurrently and must be `Send + Sync`. The default
/// [`Chart::partials`] samples the chart slightly beyond `t`'s range.
pub trait Chart: Send + Sync + std::fmt::Debug {
    fn point(&self, t: f64, s: f64) -> Vector3<f64>;

    /// `(t₀, t₁)`; `t₁` may be infinite.
    fn t_range(&self) -> (f64, f64);

    fn s_period(&self) -> f64;

    /// `(∂x/∂t, ∂x/∂s)` by 4th-order central differences.
    fn partials(&self, t: f64, s: f64) -> (Vector3<f64>, Vector3<f64>) {
        let (t0, t1) = self.t_range();
        let span = if t1.is_finite() { t1 - t0 } else { 0.0 };
        let mut ht = 1e-5 * t.abs().max(t0.abs()).max(span.min(t.abs().max(1.0)));
        if ht == 0.0 {
            ht = 1e-5;
        }
        let hs = 1e-5 * self.s_period();
        let dt = (self.point(t - 2.0 * ht, s) - 8.0 * self.point(t - ht, s) + 8.0 * self.point(t + ht, s)
            - self.point(t + 2.0 * ht, s))
            / (12.0 * ht);
        let ds = (self.point(t, s - 2.0 * hs) - 8.0 * self.point(t, s - hs) + 8.0 * self.point(t, s + hs)
            - self.point(t, s + 2.0 * hs))
            / (12.0 * hs);
        (dt, ds)
    }
}

/// A chart given by a closure.
pub struct FnChart<F> {
    f: F,
    t_range: (f64, f64),
    s_period: f64,
}

impl<F> FnChart<F>
where
    F: Fn(f64, f64) -> Vector3<f64> + Send + Sync,
{
    pub fn new(f: F, t_range: (f64, f64), s_period: f64) -> Self {
        FnChart { f, t_range, s_period }
    }
}

impl<F> std::fmt::Debug for FnChart<F> {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fm.debug_struct("FnChart")
            .field("t_range", &self.t_range)
            .field("s_period", &self.s_period)
            .finish()
    }
}

impl<F> Chart for FnChart<F>
where
    F: Fn(f64, f64) -> Vector3<f64> + Send + Sync,
{
    fn point(&self, t: f64, s: f64) -> Vector3<f64> {
        (self.f)(t, s)
    }

    fn t_range(&self) -> (f64, f64) {
        self.t_range
    }

    fn s_period(&self) -> f64 {
        self.s_period
    }
}

/// `(t, s) ↦ t·α(s)`.
#[derive(Debug, Clone)]
struct ConeChart {
    curve: SharedCurve,
    t0: f64,
    t1: f64,
}

impl Chart for ConeChart {
    fn point(&self, t: f64, s: f64) -> Vector3<f64> {
        t * self.curve.alpha(s)
    }

    fn t_range(&self) -> (f64, f64) {
        (self.t0, self.t1)
    }

    fn s_period(&self) -> f64 {
        self.curve.length()
    }

    fn partials(&self, t: f64, s: f64) -> (Vector3<f64>, Vector3<f64>) {
        let (d1, _) = self.curve.derivatives(s);
        (self.curve.alpha(s), t * d1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SurfaceKind {
    ConeOverCurve,
    PlaneThroughOrigin,
    General,
}

/// A parametrised surface. Cones keep their generating curve so that integrals
/// reduce to one dimension.
#[derive(Debug, Clone)]
pub struct ParamSurface {
    chart: Arc<dyn Chart>,
    free_boundary: bool,
    kind: SurfaceKind,
    cone: Option<SharedCurve>,
}

impl ParamSurface {
    /// Wrap a user chart. With `free_boundary`, the `t = t₀` edge must lie on
    /// the horizon. Embeddedness and minimality are the caller's responsibility.
    pub fn general(model: &SchwarzschildModel, chart: Arc<dyn Chart>, free_boundary: bool) -> Result<Self> {
        let (t0, t1) = chart.t_range();
        let period = chart.s_period();
        if !(t1 > t0) || !t0.is_finite() || !(period > 0.0 && period.is_finite()) {
            return Err(Error::Precondition(format!(
                "invalid chart domain [{t0}, {t1}] × [0, {period})"
            )));
        }
        let a = model.horizon_radius();
        let t_top = if t1.is_finite() { t1 } else { t0 + t0.abs().max(1.0) };
        for i in 0..32 {
            let s = period * i as f64 / 32.0;
            for j in 0..=4 {
                let t = t0 + (t_top - t0) * j as f64 / 4.0;
                let r = chart.point(t, s).norm();
                if r < a * (1.0 - 1e-10) {
                    return Err(Error::Geometry(format!("chart point at (t={t}, s={s}) lies inside the horizon")));
                }
            }
            if free_boundary {
                let r = chart.point(t0, s).norm();
                if (r - a).abs() > 1e-10 * a.max(f64::MIN_POSITIVE) {
                    return Err(Error::Geometry(format!(
                        "edge point at s = {s} has |x| = {r}, not on the horizon {a}"
                    )));
                }
            }
        }
        Ok(ParamSurface {
            chart,
            free_boundary,
            kind: SurfaceKind::General,
            cone: None,
        })
    }

    pub fn chart(&self) -> &dyn Chart {
        self.chart.as_ref()
    }

    pub fn kind(&self) -> SurfaceKind {
        self.kind
    }

    pub fn free_boundary(&self) -> bool {
        self.free_boundary
    }

    /// The generating curve when the surface is a cone.
    pub fn cone_curve(&self) -> Option<&dyn SphereCurve> {
        self.cone.as_deref()
    }

    /// The same surface without the cone shortcut, so every integral goes
    /// through the two-dimensional chart quadrature.
    pub fn without_fast_path(&self) -> Self {
        ParamSurface {
            cone: None,
            ..self.clone()
        }
    }

    pub fn point(&self, t: f64, s: f64) -> Vector3<f64> {
        self.chart.point(t, s)
    }
}

/// The cone `{t α(s) : m/2 ≤ t ≤ t_max}`; `t_max` may be infinite.
pub fn make_cone<C: SphereCurve + 'static>(model: &SchwarzschildModel, curve: C, t_max: f64) -> Result<ParamSurface> {
    let t0 = model.horizon_radius();
    if !(t_max > t0) {
        return Err(Error::Precondition(format!("t_max = {t_max} must exceed m/2 = {t0}")));
    }
    check_curve(&curve, 64)?;
    let kind = if curve.is_great_circle() {
        SurfaceKind::PlaneThroughOrigin
    } else {
        SurfaceKind::ConeOverCurve
    };
    let curve: SharedCurve = Arc::new(curve);
    Ok(ParamSurface {
        chart: Arc::new(ConeChart {
            curve: curve.clone(),
            t0,
            t1: t_max,
        }),
        free_boundary: true,
        kind,
        cone: Some(curve),
    })
}

/// The coordinate plane `x₃ = 0` outside the horizon.
pub fn plane_through_origin(model: &SchwarzschildModel) -> ParamSurface {
    rotated_plane(model, Rotation3::identity())
}

/// A plane through the origin with unit normal `rotation · e₃`.
pub fn rotated_plane(model: &SchwarzschildModel, rotation: Rotation3<f64>) -> ParamSurface {
    make_cone(model, GreatCircle::rotated(rotation), f64::INFINITY).expect("great circles are valid cones")
}

/// Mean curvature of the cone over `curve` at `t α(s)`:
/// `(α × α″)·α′ / (t e^{φ(t)})`.
pub fn cone_mean_curvature(model: &SchwarzschildModel, curve: &dyn SphereCurve, t: IsotropicRadius, s: f64) -> Result<f64> {
    let t = model.check_isotropic(t.0)?;
    if t == 0.0 {
        return Err(Error::domain("cone vertex has no tangent plane"));
    }
    let a = curve.alpha(s);
    let (d1, d2) = curve.derivatives(s);
    Ok(a.cross(&d2).dot(&d1) / (t * model.conformal_root_unchecked(t)))
}

/// `|∂_r^⊥|²`: the squared component of the unit radial field normal to the
/// surface at chart point `(t, s)`, in `[0, 1]`.
pub fn radial_normal_component(model: &SchwarzschildModel, surface: &ParamSurface, t: f64, s: f64) -> Result<f64> {
    let x = surface.point(t, s);
    let r = model.check_isotropic(x.norm())?;
    if r == 0.0 {
        return Err(Error::Geometry("radial direction undefined at the origin".into()));
    }
    let (xt, xs) = surface.chart.partials(t, s);
    normal_component(&x, &xt, &xs)
        .ok_or_else(|| Error::Geometry(format!("tangent plane degenerates at (t={t}, s={s})")))
}

pub(crate) fn normal_component(x: &Vector3<f64>, xt: &Vector3<f64>, xs: &Vector3<f64>) -> Option<f64> {
    let n = xt.cross(xs);
    let jac = n.norm();
    if !(jac > 1e-12 * xt.norm() * xs.norm()) {
        return None;
    }
    let c = x.dot(&n) / (x.norm() * jac);
    Some((c * c).min(1.0))
}

/// g-length of the horizon edge `t = t₀`.
pub fn boundary_length(model: &SchwarzschildModel, surface: &ParamSurface) -> Result<f64> {
    if !surface.free_boundary {
        return Err(Error::Precondition("surface has no free boundary on the horizon".into()));
    }
    if model.is_flat() {
        return Err(Error::Precondition("boundary length needs a horizon (m > 0)".into()));
    }
    let a = model.horizon_radius();
    if let Some(curve) = &surface.cone {
        // e^{φ(m/2)} = 4
        return Ok(4.0 * a * curve.length());
    }
    let chart = surface.chart();
    let (t0, _) = chart.t_range();
    let rule = integrals::gl32();
    let (len, change, ok) = adaptive_composite(rule, 0.0, chart.s_period(), 1e-12, 0.0, 4, 1 << 12, |s| {
        let x = chart.point(t0, s);
        let (_, xs) = chart.partials(t0, s);
        model.conformal_root_unchecked(x.norm()) * xs.norm()
    });
    if !ok {
        return Err(Error::Accuracy { tol: 1e-12, change });
    }
    Ok(len)
}

/// Membership test for `B_a`, the points within horizon distance `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallFilter {
    pub model: SchwarzschildModel,
    pub radius: HorizonDistance,
}

impl BallFilter {
    pub fn new(model: SchwarzschildModel, radius: HorizonDistance) -> Result<Self> {
        if !(radius.0 >= 0.0) {
            return Err(Error::domain(format!("ball radius must be ≥ 0, got {}", radius.0)));
        }
        Ok(BallFilter { model, radius })
    }

    pub fn contains(&self, point: &Vector3<f64>) -> Result<bool> {
        let d = self.model.distance_from_isotropic(IsotropicRadius(point.norm()))?;
        Ok(d.0 <= self.radius.0)
    }
}

#[cfg(test)]
mod tests;
