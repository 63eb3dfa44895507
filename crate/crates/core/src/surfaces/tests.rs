use std::f64::consts::{FRAC_PI_3, FRAC_PI_6, PI, TAU};
use std::sync::Arc;

use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;

fn m2() -> SchwarzschildModel {
    SchwarzschildModel::new(2.0).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn plane_mu(model: &SchwarzschildModel, rho: f64) -> f64 {
    let h = model.areal_from_distance(HorizonDistance(rho), 1e-13).unwrap().0;
    PI * (h * h - 4.0 * model.mass() * model.mass())
}

/// Flat graph `x₃ = c` over the plane, through the default finite-difference partials.
fn flat_graph(c: f64) -> ParamSurface {
    let chart = FnChart::new(move |t: f64, s: f64| Vector3::new(t * s.cos(), t * s.sin(), c), (0.0, f64::INFINITY), TAU);
    ParamSurface::general(&SchwarzschildModel::flat(), Arc::new(chart), false).unwrap()
}

/// The plane `x₃ = 0` through a closure chart with a rotation applied.
fn plane_chart(model: &SchwarzschildModel, rotation: Rotation3<f64>) -> ParamSurface {
    let a = model.horizon_radius();
    let chart = FnChart::new(
        move |t: f64, s: f64| rotation * Vector3::new(t * s.cos(), t * s.sin(), 0.0),
        (a, f64::INFINITY),
        TAU,
    );
    ParamSurface::general(model, Arc::new(chart), true).unwrap()
}

#[test]
fn make_cone_kinds_and_preconditions() {
    let m = m2();
    let p = plane_through_origin(&m);
    assert_eq!(p.kind(), SurfaceKind::PlaneThroughOrigin);
    assert!(p.free_boundary());
    let c = make_cone(&m, LatitudeCircle::new(FRAC_PI_3).unwrap(), 50.0).unwrap();
    assert_eq!(c.kind(), SurfaceKind::ConeOverCurve);
    for s in [0.0, 1.0, 4.0] {
        assert!(rel(c.point(1.0, s).norm(), 1.0) < 1e-15);
    }
    assert!(make_cone(&m, GreatCircle::equatorial(), 1.0).is_err());
}

#[test]
fn general_chart_checks_free_boundary_edge() {
    let m = m2();
    let off = FnChart::new(|t: f64, s: f64| Vector3::new(t * s.cos(), t * s.sin(), 0.0), (1.5, 10.0), TAU);
    assert!(matches!(
        ParamSurface::general(&m, Arc::new(off), true),
        Err(Error::Geometry(_))
    ));
    let inside = FnChart::new(|t: f64, s: f64| Vector3::new(t * s.cos(), t * s.sin(), 0.0), (0.5, 10.0), TAU);
    assert!(ParamSurface::general(&m, Arc::new(inside), false).is_err());
}

#[test]
fn cone_mean_curvature_examples() {
    let m = m2();
    let g = GreatCircle::equatorial();
    for (t, s) in [(1.0, 0.0), (3.0, 2.0), (100.0, 5.0)] {
        assert!(cone_mean_curvature(&m, &g, IsotropicRadius(t), s).unwrap().abs() < 1e-15);
    }
    let lat = LatitudeCircle::new(FRAC_PI_3).unwrap();
    let h = cone_mean_curvature(&m, &lat, IsotropicRadius(2.0), 0.3).unwrap();
    let expected = -1.0 / FRAC_PI_3.tan() / (2.0 * 2.25);
    assert!(rel(h, expected) < 1e-14, "{h} vs {expected}");
    // decays like 1/t
    let far = cone_mean_curvature(&m, &lat, IsotropicRadius(1e6), 0.3).unwrap();
    assert!(rel(far * 1e6, -1.0 / FRAC_PI_3.tan()) < 1e-5);
    assert!(cone_mean_curvature(&m, &lat, IsotropicRadius(0.5), 0.0).is_err());
}

#[test]
fn cone_dichotomy_under_random_rotations() {
    let m = m2();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let t_max = 50.0;
    for _ in 0..10 {
        let g = GreatCircle::rotated(random_rotation(&mut rng));
        for i in 0..16 {
            let s = TAU * i as f64 / 16.0;
            for t in [1.0, 7.0, t_max] {
                assert!(cone_mean_curvature(&m, &g, IsotropicRadius(t), s).unwrap().abs() <= 1e-10);
            }
        }
    }
    for theta in [FRAC_PI_6, FRAC_PI_3, 4.0 * PI / 9.0] {
        let lat = LatitudeCircle::rotated(theta, random_rotation(&mut rng)).unwrap();
        let floor = 1.0 / theta.tan() / (t_max * m.conformal_root(IsotropicRadius(t_max)).unwrap());
        for i in 0..16 {
            let s = lat.length() * i as f64 / 16.0;
            for t in [1.0, 7.0, t_max] {
                let h = cone_mean_curvature(&m, &lat, IsotropicRadius(t), s).unwrap().abs();
                let expected = 1.0 / theta.tan() / (t * m.conformal_root(IsotropicRadius(t)).unwrap());
                assert!(rel(h, expected) < 1e-8);
                assert!(h >= floor - 1e-8);
            }
        }
    }
}

#[test]
fn radial_normal_component_examples() {
    let m = m2();
    let cone = make_cone(&m, LatitudeCircle::new(0.4).unwrap(), 100.0).unwrap();
    assert!(radial_normal_component(&m, &cone, 3.0, 0.2).unwrap() < 1e-28);
    // plane x₁ = 3 at its closest point: normal is radial
    let wall = FnChart::new(|t: f64, s: f64| Vector3::new(3.0, t, s), (-5.0, 5.0), 10.0);
    let wall = ParamSurface::general(&m, Arc::new(wall), false).unwrap();
    assert!((radial_normal_component(&m, &wall, 0.0, 0.0).unwrap() - 1.0).abs() < 1e-15);
    // flat graph x₃ = c: (x̂·e₃)² = c²/(t² + c²)
    let flat = SchwarzschildModel::flat();
    let c = 0.7;
    let g = flat_graph(c);
    for t in [0.1, 1.0, 5.0] {
        let v = radial_normal_component(&flat, &g, t, 1.3).unwrap();
        assert!((v - c * c / (t * t + c * c)).abs() < 1e-10);
    }
    let pinch = FnChart::new(|t: f64, _s: f64| Vector3::new(t, 0.0, 1.0), (0.0, 1.0), 1.0);
    let pinch = ParamSurface::general(&flat, Arc::new(pinch), false).unwrap();
    assert!(matches!(
        radial_normal_component(&flat, &pinch, 0.5, 0.5),
        Err(Error::Geometry(_))
    ));
}

#[test]
fn boundary_length_examples() {
    let m = m2();
    assert!(rel(boundary_length(&m, &plane_through_origin(&m)).unwrap(), 8.0 * PI) < 1e-15);
    let one = SchwarzschildModel::new(1.0).unwrap();
    assert!(rel(boundary_length(&one, &plane_through_origin(&one)).unwrap(), 4.0 * PI) < 1e-15);
    let lat = make_cone(&m, LatitudeCircle::new(0.5).unwrap(), 10.0).unwrap();
    assert!(rel(boundary_length(&m, &lat).unwrap(), 8.0 * PI * 0.5f64.sin()) < 1e-14);
    let general = plane_chart(&m, Rotation3::identity());
    assert!(rel(boundary_length(&m, &general).unwrap(), 8.0 * PI) < 1e-10);
    assert!(boundary_length(&SchwarzschildModel::flat(), &plane_through_origin(&SchwarzschildModel::flat())).is_err());
    assert!(boundary_length(&SchwarzschildModel::flat(), &flat_graph(1.0)).is_err());
}

#[test]
fn ball_filter_examples() {
    let m = m2();
    let horizon = Vector3::new(0.0, 1.0, 0.0);
    assert!(BallFilter::new(m, HorizonDistance(0.0)).unwrap().contains(&horizon).unwrap());
    let p = Vector3::new(0.0, 0.0, 100.0);
    let a = m.distance_from_isotropic(IsotropicRadius(100.0)).unwrap();
    assert!(BallFilter::new(m, a).unwrap().contains(&p).unwrap());
    assert!(!BallFilter::new(m, HorizonDistance(0.0)).unwrap().contains(&p).unwrap());
    assert!(BallFilter::new(m, HorizonDistance(1.0)).unwrap().contains(&Vector3::new(0.1, 0.0, 0.0)).is_err());
    assert!(BallFilter::new(m, HorizonDistance(-1.0)).is_err());
}

#[test]
fn mu_integral_examples() {
    let m = m2();
    let q = QuadSpec::default();
    let plane = plane_through_origin(&m);
    let lat = make_cone(&m, LatitudeCircle::new(0.9).unwrap(), f64::INFINITY).unwrap();
    for rho in [0.02, 0.5, 3.0, 40.0, 2000.0] {
        let mu = mu_integral(&m, &plane, HorizonDistance(rho), &q).unwrap();
        assert!(rel(mu, plane_mu(&m, rho)) < 1e-10, "ρ={rho}");
        let cone_mu = mu_integral(&m, &lat, HorizonDistance(rho), &q).unwrap();
        assert!(rel(cone_mu, 0.9f64.sin() * mu) < 1e-13);
    }
    assert_eq!(mu_integral(&m, &plane, HorizonDistance(0.0), &q).unwrap(), 0.0);
    assert!(mu_integral(&m, &plane, HorizonDistance(-1.0), &q).is_err());
}

#[test]
fn truncated_cone_stops_at_t_max() {
    let m = m2();
    let q = QuadSpec::default();
    let cone = make_cone(&m, GreatCircle::equatorial(), 5.0).unwrap();
    let rho_at_5 = m.distance_from_isotropic(IsotropicRadius(5.0)).unwrap().0;
    let full = mu_integral(&m, &cone, HorizonDistance(rho_at_5), &q).unwrap();
    let beyond = mu_integral(&m, &cone, HorizonDistance(10.0 * rho_at_5), &q).unwrap();
    assert!(rel(beyond, full) < 1e-11);
}

#[test]
fn general_chart_matches_cone_fast_path() {
    let m = m2();
    let q = QuadSpec::default();
    let fast = plane_through_origin(&m);
    let slow = plane_chart(&m, Rotation3::identity());
    for rho in [0.3, 10.0, 200.0] {
        let a = ball_integrals(&m, &fast, HorizonDistance(rho), &q).unwrap();
        let b = ball_integrals(&m, &slow, HorizonDistance(rho), &q).unwrap();
        assert!(rel(b.mu, a.mu) < 1e-6, "ρ={rho}: {} vs {}", b.mu, a.mu);
        assert!(rel(b.area, a.area) < 1e-6);
        assert!(b.defect.abs() < 1e-12);
    }
}

#[test]
fn flat_graph_integrals_match_closed_forms() {
    let flat = SchwarzschildModel::flat();
    let q = QuadSpec::default();
    let c = 1.0;
    let g = flat_graph(c);
    assert_eq!(mu_integral(&flat, &g, HorizonDistance(0.5), &q).unwrap(), 0.0);
    for rho in [1.5, 4.0, 30.0] {
        let b = ball_integrals(&flat, &g, HorizonDistance(rho), &q).unwrap();
        assert!(rel(b.mu, PI * (rho * rho - c * c)) < 1e-6);
        assert!(rel(b.defect, PI * (1.0 - c * c / (rho * rho))) < 1e-6);
    }
    let grid = log_rho_grid(1.5, 30.0, 5).unwrap();
    let rep = monotonicity_report(&flat, &g, &grid, &q).unwrap();
    assert!(rep.boundary_length.is_none() && rep.anchored_residuals.is_empty());
    assert_eq!(rep.formula_residuals.len(), 4);
    assert!(rep.formula_residuals.iter().all(|r| r.abs() < 1e-5), "{:?}", rep.formula_residuals);
}

#[test]
fn plane_monotonicity_report() {
    let m = m2();
    let q = QuadSpec::default();
    let grid = default_rho_grid(&m, 1000.0 * m.mass()).unwrap();
    let rep = monotonicity_report(&m, &plane_through_origin(&m), &grid, &q).unwrap();
    assert_eq!(rep.ratios.len(), 40);
    for (ratio, h) in rep.ratios.iter().zip(&rep.areal_radii) {
        let expected = PI * (1.0 - 4.0 * m.mass() * m.mass() / (h * h));
        assert!(rel(*ratio, expected) < 1e-8);
    }
    assert!(rep.ratios.windows(2).all(|w| w[1] > w[0]));
    assert!(rep.monotone && rep.max_backstep == 0.0);
    assert!(rep.anchored_residuals.iter().all(|r| r.abs() <= 1e-8));
    assert!(rep.formula_residuals.iter().all(|r| r.abs() <= 1e-8));
    assert!(rel(*rep.ratios.last().unwrap(), PI) < 1e-4);
}

#[test]
fn flat_plane_ratio_is_pi() {
    let flat = SchwarzschildModel::flat();
    let grid = default_rho_grid(&flat, 100.0).unwrap();
    let rep = monotonicity_report(&flat, &plane_through_origin(&flat), &grid, &QuadSpec::default()).unwrap();
    assert!(rep.ratios.iter().all(|r| rel(*r, PI) < 1e-13));
    assert!(rep.monotone);
}

#[test]
fn density_examples() {
    let m = m2();
    let q = QuadSpec::default();
    let d = density_at_infinity(&m, &plane_through_origin(&m), 2000.0, &q).unwrap();
    assert!(d.finite && (d.extrapolated - 1.0).abs() < 1e-10);
    let theta0 = 0.6;
    let cone = make_cone(&m, LatitudeCircle::new(theta0).unwrap(), f64::INFINITY).unwrap();
    let d = density_at_infinity(&m, &cone, 2000.0, &q).unwrap();
    assert!(rel(d.extrapolated, theta0.sin()) < 1e-10);
    let flat = SchwarzschildModel::flat();
    let d = density_at_infinity(&flat, &plane_through_origin(&flat), 100.0, &q).unwrap();
    assert!((d.extrapolated - 1.0).abs() < 1e-12);
    assert!(density_at_infinity(&m, &cone, 5.0, &q).is_err());
}

#[test]
fn extrapolation_is_exact_for_quadratics() {
    let pts: Vec<(f64, f64)> = [0.1, 0.2, 0.4].iter().map(|&x| (x, 3.0 - 2.0 * x + 5.0 * x * x)).collect();
    assert!((reports::extrapolate_to_zero(&pts) - 3.0).abs() < 1e-13);
}

#[test]
fn plane_boundary_bound_is_equality() {
    let m = m2();
    let rep = boundary_bound_check(&m, &plane_through_origin(&m), 2000.0, &QuadSpec::default()).unwrap();
    assert!((rep.lhs - 1.0).abs() < 1e-10 && (rep.rhs - 1.0).abs() < 1e-15);
    assert!(rep.equality_defect.abs() <= 1e-6);
    assert!(rel(rep.boundary_length, 4.0 * PI * m.mass() * rep.lhs) < 1e-10);
    assert!(rep.bound_holds);
    assert!(boundary_bound_check(&SchwarzschildModel::flat(), &plane_through_origin(&SchwarzschildModel::flat()), 100.0, &QuadSpec::default()).is_err());
}

#[test]
fn rotation_invariance_fast_and_general_paths() {
    let m = m2();
    let q = QuadSpec::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let base = boundary_bound_check(&m, &plane_through_origin(&m), 500.0, &q).unwrap();
    let base_lat = make_cone(&m, LatitudeCircle::new(1.1).unwrap(), 80.0).unwrap();
    for _ in 0..3 {
        let rot = random_rotation(&mut rng);
        let r = boundary_bound_check(&m, &rotated_plane(&m, rot), 500.0, &q).unwrap();
        assert!(rel(r.lhs, base.lhs) < 1e-9 && rel(r.boundary_length, base.boundary_length) < 1e-9);
        let lat = make_cone(&m, LatitudeCircle::rotated(1.1, rot).unwrap(), 80.0).unwrap();
        for rho in [1.0, 50.0] {
            let a = ball_integrals(&m, &base_lat, HorizonDistance(rho), &q).unwrap();
            let b = ball_integrals(&m, &lat, HorizonDistance(rho), &q).unwrap();
            assert!(rel(b.mu, a.mu) < 1e-9 && rel(b.area, a.area) < 1e-9);
        }
    }
    // forced two-dimensional quadrature on rotated copies
    let plain = plane_chart(&m, Rotation3::identity());
    let rot = random_rotation(&mut rng);
    let turned = plane_chart(&m, rot);
    for rho in [2.0, 60.0] {
        let a = ball_integrals(&m, &plain, HorizonDistance(rho), &q).unwrap();
        let b = ball_integrals(&m, &turned, HorizonDistance(rho), &q).unwrap();
        assert!(rel(b.mu, a.mu) < 1e-9 && rel(b.area, a.area) < 1e-9, "{a:?} {b:?}");
    }
    assert!(rel(boundary_length(&m, &turned).unwrap(), boundary_length(&m, &plain).unwrap()) < 1e-9);
    let slow_lat = make_cone(&m, LatitudeCircle::rotated(1.1, rot).unwrap(), 80.0).unwrap().without_fast_path();
    let a = ball_integrals(&m, &base_lat, HorizonDistance(20.0), &q).unwrap();
    let b = ball_integrals(&m, &slow_lat, HorizonDistance(20.0), &q).unwrap();
    assert!(rel(b.mu, a.mu) < 1e-6);
}
