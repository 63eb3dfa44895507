//! Integrals over `Σ ∩ B_ρ`: the f-weighted area μ, the plain area, and the
//! radial-normal defect `∫ (f/h²)|∂_r^⊥|²`.

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::Serialize;

use super::{normal_component, ParamSurface};
use crate::error::{Error, Result};
use crate::geometry::{HorizonDistance, SchwarzschildModel};
use crate::numerics::quad::GaussLegendre;
use crate::numerics::roots::brent;

pub(crate) fn gl32() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(32))
}

/// Quadrature settings for surface integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadSpec {
    /// Relative tolerance for cone integrals.
    pub rel_tol: f64,
    /// Relative tolerance for two-dimensional chart integrals.
    pub general_rel_tol: f64,
    /// Tolerance passed to `h(ρ)` inversion.
    pub root_tol: f64,
    /// Maximum number of panel doublings.
    pub max_refinements: u32,
}

impl QuadSpec {
    pub fn new(rel_tol: f64, root_tol: f64) -> Self {
        QuadSpec {
            rel_tol,
            general_rel_tol: rel_tol.max(1e-6),
            root_tol,
            max_refinements: 10,
        }
    }
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec::new(1e-8, 1e-12)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BallIntegrals {
    pub rho: f64,
    /// Areal radius `h(ρ)` of the bounding sphere.
    pub areal_radius: f64,
    /// Isotropic radius of the bounding sphere.
    pub clip_radius: f64,
    /// `μ(Σ ∩ B_ρ) = ∫ f dA`.
    pub mu: f64,
    pub area: f64,
    /// `∫ (f/h²)|∂_r^⊥|² dA`.
    pub defect: f64,
}

/// Breakpoints on `[a, b]` halving towards `a` down to panels of size `scale`.
fn graded_breaks(a: f64, b: f64, scale: f64) -> Vec<f64> {
    let w = b - a;
    let levels = if scale > 0.0 && w > scale {
        ((w / scale).log2().ceil() as i32).clamp(0, 60)
    } else {
        0
    };
    let mut v = Vec::with_capacity(levels as usize + 2);
    v.push(a);
    for k in (1..=levels).rev() {
        v.push(a + w * 0.5f64.powi(k));
    }
    v.push(b);
    v
}

/// Integrate a vector-valued function over graded panels, each split into `sub` pieces.
fn graded_sum<const N: usize>(breaks: &[f64], sub: usize, f: &mut impl FnMut(f64) -> [f64; N]) -> [f64; N] {
    let rule = gl32();
    let mut acc = [0.0; N];
    for w in breaks.windows(2) {
        let step = (w[1] - w[0]) / sub as f64;
        for j in 0..sub {
            let (lo, hi) = (w[0] + step * j as f64, w[0] + step * (j + 1) as f64);
            for (x, wt) in rule.mapped(lo, hi) {
                let v = f(x);
                for i in 0..N {
                    acc[i] += wt * v[i];
                }
            }
        }
    }
    acc
}

fn converged(prev: f64, next: f64, tol: f64, floor: f64) -> bool {
    (next - prev).abs() <= tol * next.abs().max(floor)
}

/// `(h(ρ), isotropic radius)` of the sphere at horizon distance ρ.
fn sphere_at(model: &SchwarzschildModel, rho: HorizonDistance, quad: &QuadSpec) -> Result<(f64, f64)> {
    let h = model.areal_from_distance(rho, quad.root_tol)?;
    let t = model.isotropic_from_areal(h)?;
    Ok((h.0, t.0))
}

/// One-dimensional graded integral in the isotropic radius over `[m/2, t]`,
/// refined until every component has converged.
fn radial_integral<const N: usize>(
    model: &SchwarzschildModel,
    t: f64,
    tol: f64,
    quad: &QuadSpec,
    mut f: impl FnMut(f64) -> [f64; N],
) -> Result<[f64; N]> {
    let a = model.horizon_radius();
    if t <= a {
        return Ok([0.0; N]);
    }
    let scale = if model.is_flat() { t } else { model.mass() };
    let breaks = graded_breaks(a, t, scale);
    let mut sub = 1;
    let mut prev = graded_sum(&breaks, sub, &mut f);
    let mut change = f64::INFINITY;
    for _ in 0..quad.max_refinements {
        sub *= 2;
        let next = graded_sum(&breaks, sub, &mut f);
        if (0..N).all(|i| converged(prev[i], next[i], tol, 0.0)) {
            return Ok(next);
        }
        change = (0..N).map(|i| (next[i] - prev[i]).abs()).fold(0.0, f64::max);
        prev = next;
    }
    Err(Error::Accuracy { tol, change })
}

/// `area(C ∩ B_ρ) = 2π ∫₀^ρ h(r) dr` for a great-circle cone `C`, evaluated in
/// the isotropic radius (`dr = e^{φ} dt`, `h = t e^{φ}`).
pub fn cone_reference_area(model: &SchwarzschildModel, rho: HorizonDistance, quad: &QuadSpec) -> Result<f64> {
    if !(rho.0 >= 0.0) {
        return Err(Error::domain(format!("ρ must be ≥ 0, got {}", rho.0)));
    }
    let (_, t) = sphere_at(model, rho, quad)?;
    let [v] = radial_integral(model, t, quad.rel_tol, quad, |x| [model.conformal_factor_unchecked(x) * x])?;
    Ok(std::f64::consts::TAU * v)
}

/// μ, area and radial-normal defect of `Σ ∩ B_ρ`.
pub fn ball_integrals(
    model: &SchwarzschildModel,
    surface: &ParamSurface,
    rho: HorizonDistance,
    quad: &QuadSpec,
) -> Result<BallIntegrals> {
    if !(rho.0 >= 0.0) || !rho.0.is_finite() {
        return Err(Error::domain(format!("ρ must be finite and ≥ 0, got {}", rho.0)));
    }
    let (h, t_rho) = sphere_at(model, rho, quad)?;
    let mut out = BallIntegrals {
        rho: rho.0,
        areal_radius: h,
        clip_radius: t_rho,
        mu: 0.0,
        area: 0.0,
        defect: 0.0,
    };
    if rho.0 == 0.0 {
        return Ok(out);
    }
    if let Some(curve) = surface.cone_curve() {
        // the radial field is tangent to cones, so the defect vanishes
        let (_, t1) = surface.chart().t_range();
        let t = t_rho.min(t1);
        let [mu, area] = radial_integral(model, t, quad.rel_tol, quad, |x| {
            let dens = model.conformal_factor_unchecked(x) * x;
            [model.static_potential_iso_unchecked(x) * dens, dens]
        })?;
        let l = curve.length();
        out.mu = l * mu;
        out.area = l * area;
        return Ok(out);
    }
    let [mu, area, defect] = chart_integrals(model, surface, t_rho, h, quad)?;
    out.mu = mu;
    out.area = area;
    out.defect = defect;
    Ok(out)
}

/// `μ(Σ ∩ B_ρ) = ∫_{Σ∩B_ρ} f dA_g`.
pub fn mu_integral(model: &SchwarzschildModel, surface: &ParamSurface, rho: HorizonDistance, quad: &QuadSpec) -> Result<f64> {
    Ok(ball_integrals(model, surface, rho, quad)?.mu)
}

/// Largest chart parameter `t` on the slice `s` with `|x(t, s)| ≤ t_rho`,
/// assuming `|x|` increases along the slice.
fn clip_slice(surface: &ParamSurface, s: f64, t_rho: f64, scale: f64) -> Result<f64> {
    let chart = surface.chart();
    let (t0, t1) = chart.t_range();
    let g = |t: f64| chart.point(t, s).norm() - t_rho;
    if g(t0) >= 0.0 {
        return Ok(t0);
    }
    let mut hi = t1;
    if !hi.is_finite() {
        hi = t0 + scale.max(t0.abs());
        let mut guard = 0;
        while g(hi) < 0.0 {
            hi = t0 + 2.0 * (hi - t0);
            guard += 1;
            if guard > 200 {
                return Err(Error::Geometry(format!("slice s = {s} never leaves the ball")));
            }
        }
    } else if g(hi) <= 0.0 {
        return Ok(hi);
    }
    brent(g, t0, hi, 1e-15 * hi.abs().max(scale), 300)
}

fn chart_integrals(
    model: &SchwarzschildModel,
    surface: &ParamSurface,
    t_rho: f64,
    h_rho: f64,
    quad: &QuadSpec,
) -> Result<[f64; 3]> {
    let chart = surface.chart();
    let (t0, _) = chart.t_range();
    let period = chart.s_period();
    let m = model.mass();
    let scale = if model.is_flat() { t_rho } else { m };
    let rule = gl32();

    let integrand = |t: f64, s: f64| -> [f64; 3] {
        let x = chart.point(t, s);
        let r = x.norm();
        let (xt, xs) = chart.partials(t, s);
        let jac = xt.cross(&xs).norm();
        if jac == 0.0 || r == 0.0 {
            return [0.0; 3];
        }
        let da = model.conformal_factor_unchecked(r) * jac;
        let f = model.static_potential_iso_unchecked(r);
        let h = r * model.conformal_root_unchecked(r);
        let normal = normal_component(&x, &xt, &xs).unwrap_or(0.0);
        [f * da, da, f / (h * h) * normal * da]
    };

    let level = |panels: usize, sub: usize| -> Result<[f64; 3]> {
        let nodes: Vec<(f64, f64)> = (0..panels)
            .flat_map(|p| {
                let (lo, hi) = (period * p as f64 / panels as f64, period * (p + 1) as f64 / panels as f64);
                rule.mapped(lo, hi).collect::<Vec<_>>()
            })
            .collect();
        let slices: Vec<[f64; 3]> = nodes
            .par_iter()
            .map(|&(s, w)| {
                let t_end = clip_slice(surface, s, t_rho, scale)?;
                if t_end <= t0 {
                    return Ok([0.0; 3]);
                }
                let breaks = graded_breaks(t0, t_end, scale);
                let v = graded_sum(&breaks, sub, &mut |t| integrand(t, s));
                Ok([w * v[0], w * v[1], w * v[2]])
            })
            .collect::<Result<_>>()?;
        let mut acc = [0.0; 3];
        for v in slices {
            for i in 0..3 {
                acc[i] += v[i];
            }
        }
        Ok(acc)
    };

    let tol = quad.general_rel_tol;
    let (mut panels, mut sub) = (4, 1);
    let mut prev = level(panels, sub)?;
    let mut change = f64::INFINITY;
    for _ in 0..quad.max_refinements.min(6) {
        panels *= 2;
        sub *= 2;
        let next = level(panels, sub)?;
        // the defect is judged on the scale of the ratio μ/h² it is compared with
        let defect_floor = next[0] / (h_rho * h_rho);
        if converged(prev[0], next[0], tol, 0.0)
            && converged(prev[1], next[1], tol, 0.0)
            && converged(prev[2], next[2], tol, defect_floor)
        {
            return Ok(next);
        }
        change = (next[0] - prev[0]).abs();
        prev = next;
    }
    Err(Error::Accuracy { tol, change })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_breaks_cover_interval() {
        let b = graded_breaks(1.0, 1001.0, 2.0);
        assert_eq!(b[0], 1.0);
        assert_eq!(*b.last().unwrap(), 1001.0);
        assert!(b.windows(2).all(|w| w[1] > w[0]));
        assert!(b[1] - b[0] <= 2.0);
        assert_eq!(graded_breaks(0.0, 1.0, 2.0), vec![0.0, 1.0]);
    }
}
