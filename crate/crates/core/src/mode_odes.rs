//! Separated radial equations for the Jacobi operator of the horizon-orthogonal
//! plane, their closed-form solutions, and the Riccati comparison functions.
//!
//! For Fourier mode `k` and eigenvalue parameter `λ`, the transformed radial
//! unknown `v = √r · u_k` satisfies `v″ + Q(r) v = 0` on `[m/2, ∞)` with
//! `v(m/2) = 1`, `v′(m/2) = 1/m`. Here `r` is the isotropic radius and `λ` is
//! in raw units of 1/length².

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{IsotropicRadius, SchwarzschildModel};
use crate::numerics::ode::{hermite, Dopri5, Node};
use crate::numerics::roots::brent;

/// Default local error tolerance for the radial shots.
pub const DEFAULT_ODE_TOL: f64 = 1e-10;

/// Parameters of one separated mode problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeParams {
    pub model: SchwarzschildModel,
    pub k: i32,
    /// Eigenvalue parameter in 1/length².
    pub lambda: f64,
}

impl ModeParams {
    pub fn new(model: SchwarzschildModel, k: i32, lambda: f64) -> Self {
        ModeParams { model, k, lambda }
    }

    /// λ given in units of m⁻², converted to raw units.
    pub fn with_scaled_lambda(model: SchwarzschildModel, k: i32, lambda_m2: f64) -> Self {
        let m = model.mass();
        ModeParams { model, k, lambda: lambda_m2 / (m * m) }
    }
}

/// `Q(r) = 1/4r² − k²/r² + (m/r³)(1 + m/2r)⁻² + λ(1 + m/2r)⁴`.
pub fn v_coefficient(params: &ModeParams, r: IsotropicRadius) -> Result<f64> {
    let r = params.model.check_isotropic(r.0)?;
    Ok(coefficient(params, r))
}

fn coefficient(params: &ModeParams, r: f64) -> f64 {
    let m = params.model.mass();
    let k2 = f64::from(params.k) * f64::from(params.k);
    let root = params.model.conformal_root_unchecked(r);
    let r2 = r * r;
    (0.25 - k2) / r2 + m / (r2 * r) / root + params.lambda * root * root
}

/// A sample of the shot `v` with its derivative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialNode {
    pub r: f64,
    pub v: f64,
    pub v_prime: f64,
    /// The true values are `(v, v_prime) · exp(ln_scale)`; non-zero only
    /// for strongly growing shots.
    pub ln_scale: f64,
}

/// Trajectory of the radial shot from the horizon to `r_max`.
#[derive(Debug, Clone, Serialize)]
pub struct RadialSolution {
    pub params: ModeParams,
    pub nodes: Vec<RadialNode>,
    pub zero_crossings: Vec<f64>,
    pub tol: f64,
}

impl RadialSolution {
    pub fn r_max(&self) -> f64 {
        self.nodes.last().map_or(f64::NAN, |n| n.r)
    }

    fn as_ode_node(n: &RadialNode) -> Node {
        Node {
            x: n.r,
            y: [n.v, n.v_prime],
            dy: [n.v_prime, 0.0],
            ln_scale: n.ln_scale,
        }
    }

    fn segment(&self, r: f64) -> Option<usize> {
        if r < self.nodes[0].r || r > self.r_max() {
            return None;
        }
        let idx = self.nodes.partition_point(|n| n.r <= r);
        Some(idx.clamp(1, self.nodes.len() - 1) - 1)
    }

    /// Dense-output value of `(v, v′)` at `r` and the log scale it is expressed in.
    pub fn eval_scaled(&self, r: f64) -> Option<(f64, f64, f64)> {
        let i = self.segment(r)?;
        let a = &self.nodes[i];
        let b = &self.nodes[i + 1];
        let (v, dv) = self.hermite_pair(a, b, r);
        Some((v, dv, a.ln_scale))
    }

    fn hermite_pair(&self, a: &RadialNode, b: &RadialNode, r: f64) -> (f64, f64) {
        // v″ = −Q v supplies the derivative of v′ for the second component
        let na = Node {
            dy: [a.v_prime, -coefficient(&self.params, a.r) * a.v],
            ..Self::as_ode_node(a)
        };
        let nb = Node {
            dy: [b.v_prime, -coefficient(&self.params, b.r) * b.v],
            ..Self::as_ode_node(b)
        };
        let (v, _) = hermite(&na, &nb, 0, r);
        let (dv, _) = hermite(&na, &nb, 1, r);
        (v, dv)
    }

    /// True value of `v` at `r` (may overflow for very large log scales).
    pub fn v_at(&self, r: f64) -> Option<f64> {
        self.eval_scaled(r).map(|(v, _, ln)| v * ln.exp())
    }

    pub fn v_prime_at(&self, r: f64) -> Option<f64> {
        self.eval_scaled(r).map(|(_, dv, ln)| dv * ln.exp())
    }

    /// Riccati variable `γ = v′/v`, undefined at zeros of `v`.
    pub fn gamma_at(&self, r: f64) -> Option<f64> {
        self.eval_scaled(r).map(|(v, dv, _)| dv / v)
    }

    /// Number of zero crossings strictly inside `(m/2, r_end)`.
    pub fn zeros_before(&self, r_end: f64) -> usize {
        self.zero_crossings.iter().filter(|&&z| z < r_end).count()
    }

    /// Largest |v| over the nodes, on the true scale. Only meaningful when no rescaling happened.
    pub fn sup_abs_v(&self) -> f64 {
        self.nodes
            .iter()
            .map(|n| n.v.abs() * n.ln_scale.exp())
            .fold(0.0, f64::max)
    }

    /// Value of `v` at the last node, on the true scale.
    pub fn terminal_value(&self) -> f64 {
        let n = self.nodes.last().expect("non-empty trajectory");
        n.v * n.ln_scale.exp()
    }

    /// `ln|v|` at every node, skipping none.
    pub fn ln_abs_v(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().map(|n| (n.r, n.v.abs().ln() + n.ln_scale))
    }
}

/// Shoot `v″ + Q v = 0` from `(v, v′)(m/2) = (1, 1/m)` to `r_max`, recording
/// every accepted step and the refined sign changes of `v`.
pub fn integrate_v(params: &ModeParams, r_max: f64, tol: f64) -> Result<RadialSolution> {
    params.model.require_horizon()?;
    let m = params.model.mass();
    let r0 = params.model.horizon_radius();
    if !(r_max > r0) {
        return Err(Error::Precondition(format!("r_max = {r_max} must exceed m/2 = {r0}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Precondition(format!("tolerance must be positive, got {tol}")));
    }
    let mut solver = Dopri5::linear(tol);
    solver.h_init = 1e-3 * m;
    let p = *params;
    let raw = solver.integrate(
        move |r, y| [y[1], -coefficient(&p, r) * y[0]],
        r0,
        [1.0, 1.0 / m],
        r_max,
    )?;
    let nodes: Vec<RadialNode> = raw
        .iter()
        .map(|n| RadialNode {
            r: n.x,
            v: n.y[0],
            v_prime: n.y[1],
            ln_scale: n.ln_scale,
        })
        .collect();
    let mut sol = RadialSolution {
        params: *params,
        nodes,
        zero_crossings: Vec::new(),
        tol,
    };
    sol.zero_crossings = locate_zeros(&sol, tol * m)?;
    Ok(sol)
}

fn locate_zeros(sol: &RadialSolution, width: f64) -> Result<Vec<f64>> {
    let mut zeros = Vec::new();
    let nodes = &sol.nodes;
    let mut last_sign = nodes[0].v.signum();
    let mut last_idx = 0usize;
    for j in 1..nodes.len() {
        let v = nodes[j].v;
        if v == 0.0 {
            continue;
        }
        let sign = v.signum();
        if sign != last_sign {
            let z = if j - last_idx > 1 {
                // an exact zero sits on the node(s) in between
                nodes[last_idx + 1].r
            } else {
                refine_zero(sol, &nodes[j - 1], &nodes[j], width)?
            };
            zeros.push(z);
            last_sign = sign;
        }
        last_idx = j;
    }
    Ok(zeros)
}

fn refine_zero(sol: &RadialSolution, a: &RadialNode, b: &RadialNode, width: f64) -> Result<f64> {
    let (mut lo, mut hi) = (a.r, b.r);
    let va = a.v;
    while hi - lo > width {
        let mid = 0.5 * (lo + hi);
        let (vm, _) = sol.hermite_pair(a, b, mid);
        if vm == 0.0 {
            return Ok(mid);
        }
        if vm.signum() == va.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mid = 0.5 * (lo + hi);
    let (vm, dvm) = sol.hermite_pair(a, b, mid);
    let polished = mid - vm / dvm;
    if dvm != 0.0 && polished >= a.r && polished <= b.r && (polished - mid).abs() <= width {
        Ok(polished)
    } else {
        Ok(mid)
    }
}

/// `v₀(r) = √(2r/m)(1 − (2r−m)/(2r+m) · log √(2r/m))`, the `k = 0`, `λ = 0` shot.
pub fn closed_form_v0(model: &SchwarzschildModel, r: IsotropicRadius) -> Result<f64> {
    model.require_horizon()?;
    let r = model.check_isotropic(r.0)?;
    let m = model.mass();
    let x = 2.0 * r / m;
    Ok(x.sqrt() * (1.0 - (2.0 * r - m) / (2.0 * r + m) * 0.5 * x.ln()))
}

/// Derivative of [`closed_form_v0`] in `r`.
pub fn closed_form_v0_prime(model: &SchwarzschildModel, r: IsotropicRadius) -> Result<f64> {
    model.require_horizon()?;
    let r = model.check_isotropic(r.0)?;
    let m = model.mass();
    let x = 2.0 * r / m;
    let q = (x - 1.0) / (x + 1.0);
    let dq = 2.0 / ((x + 1.0) * (x + 1.0));
    let l = 0.5 * x.ln();
    // d/dx [√x (1 − q l)] then chain rule dx/dr = 2/m
    let d = 0.5 / x.sqrt() * (1.0 - q * l) + x.sqrt() * (-(dq * l) - q * 0.5 / x);
    Ok(d * 2.0 / m)
}

fn barrier_exponent(k: i32) -> Result<f64> {
    if k == 0 {
        return Err(Error::domain("the barrier needs k ≠ 0"));
    }
    let k2 = f64::from(k) * f64::from(k);
    Ok((4.0 * k2 - 2.0).sqrt())
}

/// Comparison function `ψ(r) = (1/2r)(1 − a(2/(1 + (2r/m)^a) − 1))`, `a = √(4k² − 2)`,
/// solving `ψ′ + ψ² = (k² − 3/4)/r²` with `ψ(m/2) = 1/m`.
pub fn barrier_psi_k(model: &SchwarzschildModel, k: i32, r: IsotropicRadius) -> Result<f64> {
    model.require_horizon()?;
    let a = barrier_exponent(k)?;
    let r = model.check_isotropic(r.0)?;
    let x = 2.0 * r / model.mass();
    // 2/(1 + x^a) − 1 = (1 − x^a)/(1 + x^a) = −tanh(a ln x / 2)
    let bracket = -(0.5 * a * x.ln()).tanh();
    Ok((1.0 - a * bracket) / (2.0 * r))
}

/// `ln` of the lower envelope `exp(∫_{m/2}^r ψ)`, which in closed form is
/// `((1 − a)/2) ln x + ln((1 + x^a)/2)` with `x = 2r/m`.
pub fn barrier_ln_envelope(model: &SchwarzschildModel, k: i32, r: IsotropicRadius) -> Result<f64> {
    model.require_horizon()?;
    let a = barrier_exponent(k)?;
    let r = model.check_isotropic(r.0)?;
    let lx = (2.0 * r / model.mass()).ln();
    // ln(1 + x^a) computed stably for large a ln x
    let al = a * lx;
    let ln_one_plus = if al > 0.0 {
        al + (-al).exp().ln_1p()
    } else {
        al.exp().ln_1p()
    };
    Ok(0.5 * (1.0 - a) * lx + ln_one_plus - std::f64::consts::LN_2)
}

/// Smallest value over the trajectory of `ln v − ln E_k`, where `E_k` is the
/// barrier envelope. The comparison argument makes this non-negative; any
/// non-positive `v` yields `-inf`.
pub fn barrier_margin(sol: &RadialSolution) -> Result<f64> {
    let k = sol.params.k;
    let mut min_margin = f64::INFINITY;
    for n in &sol.nodes {
        if n.v <= 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        let ln_v = n.v.ln() + n.ln_scale;
        let ln_e = barrier_ln_envelope(&sol.params.model, k, IsotropicRadius(n.r))?;
        min_margin = min_margin.min(ln_v - ln_e);
    }
    Ok(min_margin)
}

/// Parameter `c̄ = −8 − 4 log(m/2)` selecting `ψ_c(m/2) = 1/m`.
pub fn cbar(model: &SchwarzschildModel) -> Result<f64> {
    model.require_horizon()?;
    Ok(-8.0 - 4.0 * (0.5 * model.mass()).ln())
}

/// Riccati profile of the family `ψ_c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiccatiProfile {
    pub c: f64,
    pub singularity: Option<f64>,
}

impl RiccatiProfile {
    pub fn new(model: &SchwarzschildModel, c: f64, tol: f64) -> Result<Self> {
        let singularity = match singularity_r_c(model, c, tol) {
            Ok(r) => Some(r.0),
            Err(Error::NoSingularity { .. }) => None,
            Err(e) => return Err(e),
        };
        Ok(RiccatiProfile { c, singularity })
    }
}

fn psi_c_parts(m: f64, c: f64, r: f64) -> (f64, f64, f64) {
    let l = 4.0 * r.ln() + c + 8.0;
    let num = 4.0 * r * m * l + 16.0 * r * r - 4.0 * m * m;
    let d1 = r * (4.0 * r * r - m * m) * l;
    let d2 = 8.0 * r * (2.0 * r + m) * (2.0 * r + m);
    (num, d1 - d2, d1.abs() + d2.abs())
}

/// Relative cancellation level of the `ψ_c` denominator below which it is treated as singular.
pub const PSI_C_SINGULAR_THRESHOLD: f64 = 1e-9;

/// `ψ_c(r) = 1/2r + (4rm(4 log r + c + 8) + 16r² − 4m²) / (r(4r² − m²)(4 log r + c + 8) − 8r(2r + m)²)`,
/// a solution of the `k = 0`, `λ = 0` Riccati equation. `log r` acts on the
/// raw numeric value of `r`, so `c` is tied to the length unit of `m`.
pub fn psi_c(model: &SchwarzschildModel, c: f64, r: IsotropicRadius) -> Result<f64> {
    model.require_horizon()?;
    let r = model.check_isotropic(r.0)?;
    let (num, den, scale) = psi_c_parts(model.mass(), c, r);
    if den.abs() < PSI_C_SINGULAR_THRESHOLD * scale {
        let r_c = singularity_r_c(model, c, 1e-14).map(|x| x.0).unwrap_or(f64::NAN);
        return Err(Error::Singularity { r, r_c });
    }
    Ok(0.5 / r + num / den)
}

/// Normalised singularity relation `(2R − m)(4 log R + 8 + c) / (8(2R + m)) − 1`.
pub fn singularity_residual(model: &SchwarzschildModel, c: f64, r: f64) -> f64 {
    let m = model.mass();
    (2.0 * r - m) * (4.0 * r.ln() + 8.0 + c) / (8.0 * (2.0 * r + m)) - 1.0
}

/// The unique `R_c > m/2` with `(2R_c − m)(4 log R_c + 8 + c) = 8(2R_c + m)`.
pub fn singularity_r_c(model: &SchwarzschildModel, c: f64, tol: f64) -> Result<IsotropicRadius> {
    model.require_horizon()?;
    if !(tol > 0.0) || !c.is_finite() {
        return Err(Error::Precondition(format!("need finite c and tol > 0 (c={c}, tol={tol})")));
    }
    let m = model.mass();
    let g = |r: f64| singularity_residual(model, c, r);
    let lo = 0.5 * m;
    let mut hi = 2.0 * m;
    let mut doublings = 0;
    while g(hi) <= 0.0 {
        hi *= 2.0;
        doublings += 1;
        if doublings > 1000 || !hi.is_finite() {
            return Err(Error::NoSingularity { c });
        }
    }
    let root = brent(g, lo, hi, 1e-15 * hi, 500)?;
    if g(root).abs() > tol {
        return Err(Error::Root(format!(
            "R_c residual {:e} exceeds tolerance {tol:e}",
            g(root).abs()
        )));
    }
    Ok(IsotropicRadius(root))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m2() -> SchwarzschildModel {
        SchwarzschildModel::new(2.0).unwrap()
    }

    const R_STAR_M2: f64 = 11.016_093_846_685_423; // 40-digit root, m = 2

    /// Five-point central difference.
    fn d5<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
        (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
    }

    fn d5_second<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
        (-f(x - 2.0 * h) + 16.0 * f(x - h) - 30.0 * f(x) + 16.0 * f(x + h) - f(x + 2.0 * h))
            / (12.0 * h * h)
    }

    #[test]
    fn coefficient_examples() {
        let m = m2();
        let q = |k, l| v_coefficient(&ModeParams::new(m, k, l), IsotropicRadius(1.0)).unwrap();
        assert!((q(0, 0.0) - 0.75).abs() < 1e-15);
        assert!((q(1, 0.0) + 0.25).abs() < 1e-15);
        assert!((q(0, -0.1) + 0.85).abs() < 1e-14);
    }

    #[test]
    fn closed_form_examples() {
        let m = m2();
        assert_eq!(closed_form_v0(&m, IsotropicRadius(1.0)).unwrap(), 1.0);
        assert!(closed_form_v0(&m, IsotropicRadius(R_STAR_M2)).unwrap().abs() < 1e-8);
        assert!(closed_form_v0(&m, IsotropicRadius(50.0)).unwrap() < 0.0);
        let d0 = closed_form_v0_prime(&m, IsotropicRadius(1.0)).unwrap();
        assert!((d0 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn closed_form_derivative_matches_differences() {
        let m = m2();
        for r in [1.5, 4.0, 11.0, 40.0] {
            let fd = d5(|x| closed_form_v0(&m, IsotropicRadius(x)).unwrap(), r, 1e-3);
            let an = closed_form_v0_prime(&m, IsotropicRadius(r)).unwrap();
            assert!((fd - an).abs() < 1e-10, "r={r}");
        }
    }

    #[test]
    fn closed_forms_solve_their_equations() {
        let m = m2();
        let h = 1e-4 * m.mass();
        let p0 = ModeParams::new(m, 0, 0.0);
        let q0 = |r: f64| coefficient(&p0, r);
        let mut grid = Vec::new();
        let mut r = 1.01;
        while r < 50.0 {
            grid.push(r);
            r *= 1.07;
        }
        let cb = cbar(&m).unwrap();
        for &r in &grid {
            let v = |x: f64| closed_form_v0(&m, IsotropicRadius(x)).unwrap();
            let res = d5_second(v, r, h) + q0(r) * v(r);
            assert!(res.abs() < 1e-6, "v0 residual {res} at r={r}");
            if (r - R_STAR_M2).abs() > 0.05 {
                let g = |x: f64| psi_c(&m, cb, IsotropicRadius(x)).unwrap();
                let res = d5(g, r, h) + g(r) * g(r) + q0(r);
                assert!(res.abs() < 1e-6, "psi_cbar residual {res} at r={r}");
            }
            for k in 1..=3 {
                let b = |x: f64| barrier_psi_k(&m, k, IsotropicRadius(x)).unwrap();
                let rhs = (f64::from(k * k) - 0.75) / (r * r);
                let res = d5(b, r, h) + b(r) * b(r) - rhs;
                assert!(res.abs() < 1e-6, "barrier k={k} residual {res} at r={r}");
            }
        }
    }

    #[test]
    fn barrier_examples() {
        let m = m2();
        assert!((barrier_psi_k(&m, 1, IsotropicRadius(1.0)).unwrap() - 0.5).abs() < 1e-15);
        assert!((barrier_psi_k(&m, 3, IsotropicRadius(1.0)).unwrap() - 0.5).abs() < 1e-15);
        let r = 1e6;
        let psi = barrier_psi_k(&m, 1, IsotropicRadius(r)).unwrap();
        let limit = (1.0 + 2f64.sqrt()) / (2.0 * r);
        assert!(psi > 0.0 && ((psi - limit) / limit).abs() < 1e-7);
        assert!(matches!(
            barrier_psi_k(&m, 0, IsotropicRadius(1.0)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn envelope_is_the_integral_of_the_barrier() {
        use crate::numerics::quad::GaussLegendre;
        let m = m2();
        let gl = GaussLegendre::new(32);
        for k in [1, 2, 3] {
            for r in [1.5, 7.0, 300.0] {
                let integral = gl.composite(1.0, r, 64, |x| barrier_psi_k(&m, k, IsotropicRadius(x)).unwrap());
                let ln_e = barrier_ln_envelope(&m, k, IsotropicRadius(r)).unwrap();
                assert!((integral - ln_e).abs() < 1e-10, "k={k} r={r}: {integral} vs {ln_e}");
            }
        }
        assert_eq!(barrier_ln_envelope(&m, 2, IsotropicRadius(1.0)).unwrap(), 0.0);
    }

    #[test]
    fn cbar_examples() {
        assert_eq!(cbar(&m2()).unwrap(), -8.0);
        let me = SchwarzschildModel::new(2.0 * std::f64::consts::E).unwrap();
        assert!((cbar(&me).unwrap() + 12.0).abs() < 1e-14);
        let m1 = SchwarzschildModel::new(1.0).unwrap();
        assert!((cbar(&m1).unwrap() + 5.227_411_277_760_219).abs() < 1e-12);
        assert!(cbar(&SchwarzschildModel::flat()).is_err());
    }

    #[test]
    fn psi_c_examples() {
        let m = m2();
        assert!((psi_c(&m, -8.0, IsotropicRadius(1.0)).unwrap() - 0.5).abs() < 1e-15);
        match psi_c(&m, -8.0, IsotropicRadius(R_STAR_M2)) {
            Err(Error::Singularity { r_c, .. }) => assert!((r_c - R_STAR_M2).abs() < 1e-9),
            other => panic!("expected singularity, got {other:?}"),
        }
    }

    #[test]
    fn psi_c_matches_integrated_riccati() {
        // independent route: integrate γ′ = −γ² − Q from (m/2, 1/m)
        let m = m2();
        let p = ModeParams::new(m, 0, 0.0);
        let nodes = Dopri5::new(1e-12)
            .integrate(|r, y| [-y[0] * y[0] - coefficient(&p, r), 0.0], 1.0, [0.5, 0.0], 2.0)
            .unwrap();
        let gamma = nodes.last().unwrap().y[0];
        let psi = psi_c(&m, -8.0, IsotropicRadius(2.0)).unwrap();
        assert!(((gamma - psi) / psi).abs() < 1e-6, "{gamma} vs {psi}");
    }

    #[test]
    fn r_c_examples_and_ordering() {
        let m = m2();
        let base = singularity_r_c(&m, -8.0, 1e-12).unwrap().0;
        assert!((base - R_STAR_M2).abs() < 1e-9 * R_STAR_M2);
        let left = singularity_r_c(&m, -20.0, 1e-12).unwrap().0;
        let right = singularity_r_c(&m, 0.0, 1e-12).unwrap().0;
        assert!(left > base && base > right);
        let mut prev = f64::INFINITY;
        for c in [-60.0, -30.0, -10.0, -8.0, -2.0, 0.0, 10.0, 100.0] {
            let r = singularity_r_c(&m, c, 1e-12).unwrap().0;
            assert!(r < prev, "R_c not decreasing at c={c}");
            assert!(r > 1.0);
            prev = r;
        }
    }

    #[test]
    fn r_c_is_a_single_sign_change_of_the_denominator() {
        let m = m2();
        for c in [-20.0, -8.0, 0.0] {
            let rc = singularity_r_c(&m, c, 1e-12).unwrap().0;
            let mut changes = 0;
            let mut r = 0.5 * m.mass();
            let mut prev = psi_c_parts(m.mass(), c, r).1.signum();
            while r < 1e4 {
                r *= 1.001;
                let s = psi_c_parts(m.mass(), c, r).1.signum();
                if s != prev {
                    changes += 1;
                    assert!((r - rc).abs() < 2e-3 * rc);
                }
                prev = s;
            }
            assert_eq!(changes, 1, "c={c}");
        }
    }

    #[test]
    fn shot_matches_closed_form() {
        let m = m2();
        let sol = integrate_v(&ModeParams::new(m, 0, 0.0), 50.0, 1e-11).unwrap();
        let sup = sol
            .nodes
            .iter()
            .map(|n| closed_form_v0(&m, IsotropicRadius(n.r)).unwrap().abs())
            .fold(0.0, f64::max);
        let err = sol
            .nodes
            .iter()
            .map(|n| (n.v - closed_form_v0(&m, IsotropicRadius(n.r)).unwrap()).abs())
            .fold(0.0, f64::max);
        assert!(err / sup < 1e-8, "relative sup error {}", err / sup);
        assert_eq!(sol.zero_crossings.len(), 1);
        assert!((sol.zero_crossings[0] - R_STAR_M2).abs() < 1e-8);
        assert_eq!(sol.nodes[0].v, 1.0);
        assert_eq!(sol.nodes[0].v_prime, 0.5);
    }

    #[test]
    fn riccati_reconstruction_matches_psi_cbar() {
        let m = m2();
        let sol = integrate_v(&ModeParams::new(m, 0, 0.0), 30.0, 1e-11).unwrap();
        assert_eq!(sol.gamma_at(1.0).unwrap(), 0.5);
        let cb = cbar(&m).unwrap();
        for r in [1.2, 2.0, 5.0, 9.0, 13.0, 25.0] {
            let g = sol.gamma_at(r).unwrap();
            let psi = psi_c(&m, cb, IsotropicRadius(r)).unwrap();
            assert!(((g - psi) / psi).abs() < 1e-6, "r={r}: {g} vs {psi}");
        }
    }

    #[test]
    fn nonzero_modes_have_no_zero_and_dominate_envelope() {
        let m = m2();
        let sol = integrate_v(&ModeParams::with_scaled_lambda(m, 1, -1.0), 2000.0, 1e-10).unwrap();
        assert!(sol.zero_crossings.is_empty());
        assert!(barrier_margin(&sol).unwrap() > -1e-8);
    }

    #[test]
    fn zeros_are_transversal() {
        let m = m2();
        let sol = integrate_v(&ModeParams::with_scaled_lambda(m, 0, 0.5), 40.0, 1e-10).unwrap();
        assert!(sol.zero_crossings.len() >= 2);
        for &z in &sol.zero_crossings {
            assert!(sol.v_at(z).unwrap().abs() < 1e-8);
            let dz = sol.v_prime_at(z).unwrap().abs();
            let i = sol.segment(z).unwrap();
            let sup = sol.nodes[i].v_prime.abs().max(sol.nodes[i + 1].v_prime.abs());
            assert!(dz >= 1e-3 * sup);
        }
    }

    #[test]
    fn rejects_flat_model_and_bad_range() {
        let flat = SchwarzschildModel::flat();
        assert!(integrate_v(&ModeParams::new(flat, 0, 0.0), 10.0, 1e-8).is_err());
        assert!(integrate_v(&ModeParams::new(m2(), 0, 0.0), 0.5, 1e-8).is_err());
    }
}
