//! The Riemannian Schwarzschild exterior in its three radial presentations:
//! isotropic (conformally flat), areal, and geodesic distance to the horizon.
//!
//! The metric is `(1 + m/2ρ)^4 δ` on `{|x| ≥ m/2}`. In areal form it reads
//! `ds²/(1 − 2m/s) + s² g_S²`, and in distance form `dr² + h(r)² g_S²`,
//! where `h` inverts the distance map `r(s)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::roots::safeguarded_newton;

/// Default relative tolerance for the distance-to-areal inversion.
pub const DEFAULT_ROOT_TOL: f64 = 1e-12;

/// Below this areal excess (in units of m) the distance map uses its series.
const NEAR_HORIZON_EXCESS: f64 = 1e-8;

/// Relative slack admitted when checking that a radius sits outside the horizon.
const HORIZON_SLACK: f64 = 1e-13;

/// Euclidean radius |x| in the conformally flat chart.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct IsotropicRadius(pub f64);

/// Radius `s` for which the coordinate sphere has area 4πs².
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct ArealRadius(pub f64);

/// Geodesic distance to the horizon.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct HorizonDistance(pub f64);

/// Schwarzschild exterior of mass `m`. `m = 0` is admitted as flat space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchwarzschildModel {
    mass: f64,
}

impl SchwarzschildModel {
    pub fn new(mass: f64) -> Result<Self> {
        if !mass.is_finite() || mass < 0.0 {
            return Err(Error::domain(format!("mass must be finite and non-negative, got {mass}")));
        }
        Ok(SchwarzschildModel { mass })
    }

    /// Flat space, the `m = 0` degeneration.
    pub fn flat() -> Self {
        SchwarzschildModel { mass: 0.0 }
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn is_flat(&self) -> bool {
        self.mass == 0.0
    }

    /// Isotropic radius of the horizon, m/2.
    pub fn horizon_radius(&self) -> f64 {
        0.5 * self.mass
    }

    /// Errors unless the model has a horizon (m > 0).
    pub fn require_horizon(&self) -> Result<()> {
        if self.mass > 0.0 {
            Ok(())
        } else {
            Err(Error::domain("operation references the horizon and needs m > 0"))
        }
    }

    pub(crate) fn check_isotropic(&self, rho: f64) -> Result<f64> {
        let h = self.horizon_radius();
        if !rho.is_finite() || rho < h * (1.0 - HORIZON_SLACK) || (h == 0.0 && rho < 0.0) {
            return Err(Error::domain(format!(
                "isotropic radius {rho} lies inside the horizon (m/2 = {h})"
            )));
        }
        Ok(rho.max(h))
    }

    fn check_areal(&self, s: f64) -> Result<f64> {
        let lo = 2.0 * self.mass;
        if !s.is_finite() || s < lo * (1.0 - HORIZON_SLACK) || (lo == 0.0 && s < 0.0) {
            return Err(Error::domain(format!("areal radius {s} is below 2m = {lo}")));
        }
        Ok(s.max(lo))
    }

    /// `e^{φ} = (1 + m/2ρ)²`, the square root of the conformal factor.
    pub fn conformal_root(&self, rho: IsotropicRadius) -> Result<f64> {
        let rho = self.check_isotropic(rho.0)?;
        Ok(self.conformal_root_unchecked(rho))
    }

    /// Conformal factor `e^{2φ} = (1 + m/2ρ)⁴` multiplying the flat metric.
    pub fn conformal_factor(&self, rho: IsotropicRadius) -> Result<f64> {
        let rho = self.check_isotropic(rho.0)?;
        Ok(self.conformal_factor_unchecked(rho))
    }

    pub(crate) fn conformal_root_unchecked(&self, rho: f64) -> f64 {
        if self.mass == 0.0 {
            return 1.0;
        }
        let a = 1.0 + self.mass / (2.0 * rho);
        a * a
    }

    pub(crate) fn conformal_factor_unchecked(&self, rho: f64) -> f64 {
        let r = self.conformal_root_unchecked(rho);
        r * r
    }

    /// `s = ρ (1 + m/2ρ)²`.
    pub fn areal_from_isotropic(&self, rho: IsotropicRadius) -> Result<ArealRadius> {
        let rho = self.check_isotropic(rho.0)?;
        Ok(ArealRadius(rho * self.conformal_root_unchecked(rho)))
    }

    /// `s − 2m = (ρ − m/2)²/ρ`, evaluated without cancellation.
    pub fn areal_excess_from_isotropic(&self, rho: IsotropicRadius) -> Result<f64> {
        let rho = self.check_isotropic(rho.0)?;
        if rho == 0.0 {
            return Ok(0.0);
        }
        let d = rho - self.horizon_radius();
        Ok(d * d / rho)
    }

    /// Exterior branch of the inverse: `ρ = ((s − m) + √(s(s − 2m)))/2`.
    pub fn isotropic_from_areal(&self, s: ArealRadius) -> Result<IsotropicRadius> {
        let s = self.check_areal(s.0)?;
        let m = self.mass;
        let disc = (s * (s - 2.0 * m)).max(0.0);
        Ok(IsotropicRadius(0.5 * ((s - m) + disc.sqrt())))
    }

    /// Distance to the horizon, `r(s) = s√(1−2m/s) + m log((1+√(1−2m/s))/(1−√(1−2m/s)))`.
    pub fn distance_from_areal(&self, s: ArealRadius) -> Result<HorizonDistance> {
        let s = self.check_areal(s.0)?;
        Ok(HorizonDistance(self.distance_unchecked(s)))
    }

    fn distance_unchecked(&self, s: f64) -> f64 {
        let m = self.mass;
        if m == 0.0 {
            return s;
        }
        let excess = s - 2.0 * m;
        if excess < NEAR_HORIZON_EXCESS * m {
            // r = 2√(2mε)(1 + ε/12m + O(ε²))
            return 2.0 * (2.0 * m * excess).sqrt() * (1.0 + excess / (12.0 * m));
        }
        let w = (excess / s).sqrt();
        // log((1+w)/(1−w)) = 2 atanh(w)
        s * w + 2.0 * m * w.atanh()
    }

    /// `h(r)`: the areal radius at distance `r` from the horizon, found by a
    /// Newton–bisection hybrid on the monotone distance map. The returned value
    /// satisfies `|r(h) − r| ≤ tol · max(r, m)`.
    pub fn areal_from_distance(&self, r: HorizonDistance, tol: f64) -> Result<ArealRadius> {
        let r = r.0;
        if !r.is_finite() || r < 0.0 {
            return Err(Error::domain(format!("horizon distance must be ≥ 0, got {r}")));
        }
        if !(tol > 0.0) {
            return Err(Error::domain(format!("tolerance must be positive, got {tol}")));
        }
        let m = self.mass;
        if m == 0.0 {
            return Ok(ArealRadius(r));
        }
        if r == 0.0 {
            return Ok(ArealRadius(2.0 * m));
        }
        let lo = 2.0 * m;
        let mut hi = 2.0 * m + r + 2.0 * m * (1.0 + r / m).ln().max(0.0);
        let mut guard = 0;
        while self.distance_unchecked(hi) < r {
            hi = 2.0 * m + 2.0 * (hi - 2.0 * m);
            guard += 1;
            if guard > 200 {
                return Err(Error::Root(format!("could not bracket h({r})")));
            }
        }
        let ftol = tol * r.max(m);
        let s = safeguarded_newton(
            |s| {
                let excess = (s - 2.0 * m).max(0.0);
                let slope = if excess > 0.0 {
                    (s / excess).sqrt()
                } else {
                    f64::INFINITY
                };
                (self.distance_unchecked(s) - r, slope)
            },
            lo,
            hi,
            ftol,
            500,
        )?;
        Ok(ArealRadius(s))
    }

    /// Static potential `f = h′(r) = √(1 − 2m/h(r))`.
    pub fn static_potential(&self, r: HorizonDistance) -> Result<f64> {
        let h = self.areal_from_distance(r, DEFAULT_ROOT_TOL)?.0;
        if h == 0.0 {
            return Ok(1.0);
        }
        Ok(((h - 2.0 * self.mass).max(0.0) / h).sqrt())
    }

    /// The static potential at a point of isotropic radius ρ,
    /// `(1 − m/2ρ)/(1 + m/2ρ)`, which equals `√(1 − 2m/s(ρ))`.
    pub fn static_potential_at_isotropic(&self, rho: IsotropicRadius) -> Result<f64> {
        let rho = self.check_isotropic(rho.0)?;
        Ok(self.static_potential_iso_unchecked(rho))
    }

    pub(crate) fn static_potential_iso_unchecked(&self, rho: f64) -> f64 {
        if self.mass == 0.0 {
            return 1.0;
        }
        let a = self.mass / (2.0 * rho);
        ((1.0 - a) / (1.0 + a)).max(0.0)
    }

    /// Horizon distance of a point given by its isotropic radius.
    pub fn distance_from_isotropic(&self, rho: IsotropicRadius) -> Result<HorizonDistance> {
        let s = self.areal_from_isotropic(rho)?;
        self.distance_from_areal(s)
    }

    /// Isotropic radius of the sphere at horizon distance `r`.
    pub fn isotropic_from_distance(&self, r: HorizonDistance, tol: f64) -> Result<IsotropicRadius> {
        let s = self.areal_from_distance(r, tol)?;
        self.isotropic_from_areal(s)
    }
}
