//! Arc-length parametrised curves on the unit sphere.

use std::f64::consts::TAU;
use std::sync::Arc;

use nalgebra::{Quaternion, Rotation3, UnitQuaternion, Vector3};
use rand::Rng;

use crate::error::{Error, Result};

/// Tolerance on `|α| = 1`, `|α′| = 1` and `α·α′ = 0`.
pub const CURVE_TOL: f64 = 1e-8;

/// A closed curve `α` on the unit sphere, parametrised by arc length with period
/// [`SphereCurve::length`]. Implementations must be safe to evaluate concurrently.
pub trait SphereCurve: Send + Sync + std::fmt::Debug {
    fn alpha(&self, s: f64) -> Vector3<f64>;

    fn length(&self) -> f64;

    /// `(α′(s), α″(s))`; the default uses 4th-order central differences.
    fn derivatives(&self, s: f64) -> (Vector3<f64>, Vector3<f64>) {
        let l = self.length();
        let h1 = 1e-4 * l;
        let d1 = (self.alpha(s - 2.0 * h1) - 8.0 * self.alpha(s - h1) + 8.0 * self.alpha(s + h1)
            - self.alpha(s + 2.0 * h1))
            / (12.0 * h1);
        let h2 = 1e-3 * l;
        let d2 = (-self.alpha(s - 2.0 * h2) + 16.0 * self.alpha(s - h2) - 30.0 * self.alpha(s)
            + 16.0 * self.alpha(s + h2)
            - self.alpha(s + 2.0 * h2))
            / (12.0 * h2 * h2);
        (d1, d2)
    }

    /// Whether the curve is known to be a great circle (the cone is then a plane).
    fn is_great_circle(&self) -> bool {
        false
    }
}

/// Great circle `R·(cos s, sin s, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreatCircle {
    pub rotation: Rotation3<f64>,
}

impl GreatCircle {
    pub fn equatorial() -> Self {
        GreatCircle {
            rotation: Rotation3::identity(),
        }
    }

    pub fn rotated(rotation: Rotation3<f64>) -> Self {
        GreatCircle { rotation }
    }
}

impl SphereCurve for GreatCircle {
    fn alpha(&self, s: f64) -> Vector3<f64> {
        self.rotation * Vector3::new(s.cos(), s.sin(), 0.0)
    }

    fn length(&self) -> f64 {
        TAU
    }

    fn derivatives(&self, s: f64) -> (Vector3<f64>, Vector3<f64>) {
        let (sn, c) = s.sin_cos();
        (
            self.rotation * Vector3::new(-sn, c, 0.0),
            self.rotation * Vector3::new(-c, -sn, 0.0),
        )
    }

    fn is_great_circle(&self) -> bool {
        true
    }
}

/// Circle at colatitude `θ₀` about the (rotated) x₃-axis, of length `2π sin θ₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatitudeCircle {
    pub colatitude: f64,
    pub rotation: Rotation3<f64>,
}

impl LatitudeCircle {
    pub fn new(colatitude: f64) -> Result<Self> {
        Self::rotated(colatitude, Rotation3::identity())
    }

    pub fn rotated(colatitude: f64, rotation: Rotation3<f64>) -> Result<Self> {
        if !(colatitude > 0.0 && colatitude < std::f64::consts::PI) {
            return Err(Error::Precondition(format!(
                "colatitude must lie in (0, π), got {colatitude}"
            )));
        }
        Ok(LatitudeCircle { colatitude, rotation })
    }
}

impl SphereCurve for LatitudeCircle {
    fn alpha(&self, s: f64) -> Vector3<f64> {
        let (st, ct) = self.colatitude.sin_cos();
        let (sn, c) = (s / st).sin_cos();
        self.rotation * Vector3::new(st * c, st * sn, ct)
    }

    fn length(&self) -> f64 {
        TAU * self.colatitude.sin()
    }

    fn derivatives(&self, s: f64) -> (Vector3<f64>, Vector3<f64>) {
        let st = self.colatitude.sin();
        let (sn, c) = (s / st).sin_cos();
        (
            self.rotation * Vector3::new(-sn, c, 0.0),
            self.rotation * Vector3::new(-c, -sn, 0.0) / st,
        )
    }

    fn is_great_circle(&self) -> bool {
        (self.colatitude - std::f64::consts::FRAC_PI_2).abs() < 1e-15
    }
}

/// A user-supplied curve; derivatives come from finite differences.
pub struct FnCurve<F> {
    f: F,
    length: f64,
}

impl<F> FnCurve<F>
where
    F: Fn(f64) -> Vector3<f64> + Send + Sync,
{
    pub fn new(f: F, length: f64) -> Self {
        FnCurve { f, length }
    }
}

impl<F> std::fmt::Debug for FnCurve<F> {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fm.debug_struct("FnCurve").field("length", &self.length).finish()
    }
}

impl<F> SphereCurve for FnCurve<F>
where
    F: Fn(f64) -> Vector3<f64> + Send + Sync,
{
    fn alpha(&self, s: f64) -> Vector3<f64> {
        (self.f)(s)
    }

    fn length(&self) -> f64 {
        self.length
    }
}

/// Check unit length, unit speed and orthogonality on `samples` points.
pub fn check_curve(curve: &dyn SphereCurve, samples: usize) -> Result<()> {
    let l = curve.length();
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::Geometry(format!("curve length must be positive, got {l}")));
    }
    for i in 0..samples {
        let s = l * i as f64 / samples as f64;
        let a = curve.alpha(s);
        let (d1, _) = curve.derivatives(s);
        let bad = (a.norm() - 1.0).abs() > CURVE_TOL
            || (d1.norm() - 1.0).abs() > CURVE_TOL
            || a.dot(&d1).abs() > CURVE_TOL;
        if bad {
            return Err(Error::Geometry(format!(
                "curve is not a unit-speed spherical curve at s = {s}"
            )));
        }
    }
    Ok(())
}

/// Uniformly distributed rotation (Shoemake's quaternion construction).
pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R) -> Rotation3<f64> {
    let (u1, u2, u3): (f64, f64, f64) = (rng.gen(), rng.gen(), rng.gen());
    let (a, b) = ((1.0 - u1).sqrt(), u1.sqrt());
    let q = Quaternion::new(
        b * (TAU * u3).cos(),
        a * (TAU * u2).sin(),
        a * (TAU * u2).cos(),
        b * (TAU * u3).sin(),
    );
    UnitQuaternion::from_quaternion(q).to_rotation_matrix()
}

pub(crate) type SharedCurve = Arc<dyn SphereCurve>;

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn builtin_derivatives_match_finite_differences() {
        #[derive(Debug)]
        struct Fd<C>(C);
        impl<C: SphereCurve> SphereCurve for Fd<C> {
            fn alpha(&self, s: f64) -> Vector3<f64> {
                self.0.alpha(s)
            }
            fn length(&self) -> f64 {
                self.0.length()
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let lat = LatitudeCircle::rotated(1.0, random_rotation(&mut rng)).unwrap();
        for s in [0.0, 0.7, 3.0] {
            let (a1, a2) = lat.derivatives(s);
            let (b1, b2) = Fd(lat).derivatives(s);
            assert!((a1 - b1).norm() < 1e-10);
            assert!((a2 - b2).norm() < 1e-8);
        }
    }

    #[test]
    fn checks_accept_builtins_and_reject_bad_curves() {
        check_curve(&GreatCircle::equatorial(), 64).unwrap();
        check_curve(&LatitudeCircle::new(0.3).unwrap(), 64).unwrap();
        // wrong speed: parameter is not arc length
        let bad = FnCurve::new(|s: f64| Vector3::new((2.0 * s).cos(), (2.0 * s).sin(), 0.0), TAU);
        assert!(check_curve(&bad, 16).is_err());
        assert!(LatitudeCircle::new(0.0).is_err());
    }

    #[test]
    fn random_rotations_are_orthogonal_and_seeded() {
        let r1 = random_rotation(&mut ChaCha8Rng::seed_from_u64(9));
        let r2 = random_rotation(&mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(r1, r2);
        let m = r1.matrix();
        assert!((m.transpose() * m - nalgebra::Matrix3::identity()).norm() < 1e-14);
        assert!((m.determinant() - 1.0).abs() < 1e-14);
    }
}
