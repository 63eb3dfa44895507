//! C ABI over `schwarzschild-core`.
//!
//! Every function returns a [`SchwStatus`]; results go through out-pointers.
//! Models, surfaces and reports are opaque heap handles released with the
//! matching `*_free` function. On failure, [`schw_last_error_message`] returns
//! a description valid until the next failing call on the same thread.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use schwarzschild_core::fd_oracle;
use schwarzschild_core::mode_odes;
use schwarzschild_core::spectral::{self, Tolerances};
use schwarzschild_core::surfaces::{self, MonotonicityReport, ParamSurface, QuadSpec};
use schwarzschild_core::{ArealRadius, Error, HorizonDistance, IsotropicRadius, SchwarzschildModel};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchwStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Integration = 3,
    Singularity = 4,
    NoSingularity = 5,
    Search = 6,
    Accuracy = 7,
    Precondition = 8,
    Geometry = 9,
    Root = 10,
    BufferTooSmall = 11,
    Panic = 12,
}

impl From<&Error> for SchwStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Domain(_) => SchwStatus::Domain,
            Error::Integration { .. } => SchwStatus::Integration,
            Error::Singularity { .. } => SchwStatus::Singularity,
            Error::NoSingularity { .. } => SchwStatus::NoSingularity,
            Error::Search(_) => SchwStatus::Search,
            Error::Accuracy { .. } => SchwStatus::Accuracy,
            Error::Precondition(_) => SchwStatus::Precondition,
            Error::Geometry(_) => SchwStatus::Geometry,
            Error::Root(_) => SchwStatus::Root,
        }
    }
}

/// Opaque Schwarzschild model.
pub struct SchwModel(SchwarzschildModel);

/// Opaque surface.
pub struct SchwSurface(ParamSurface);

/// Opaque monotonicity report.
pub struct SchwMonotonicityReport(MonotonicityReport);

/// Outcome of the boundary-length bound check.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SchwBoundaryBound {
    /// Density at infinity.
    pub lhs: f64,
    /// Boundary length divided by 4πm.
    pub rhs: f64,
    pub equality_defect: f64,
    pub boundary_length: f64,
    pub bound_holds: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Fail(SchwStatus);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        set_error(&e.to_string());
        Fail(SchwStatus::from(&e))
    }
}

fn null(what: &str) -> Fail {
    set_error(&format!("null pointer: {what}"));
    Fail(SchwStatus::NullPointer)
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SchwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SchwStatus::Ok,
        Ok(Err(Fail(s))) => s,
        Err(_) => {
            set_error("internal panic");
            SchwStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write<T>(p: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(value);
    Ok(())
}

/// Description of the last failure on this thread (empty if none).
#[no_mangle]
pub extern "C" fn schw_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn schw_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Create a model of mass `mass ≥ 0` (0 gives flat space).
#[no_mangle]
pub unsafe extern "C" fn schw_model_new(mass: f64, out: *mut *mut SchwModel) -> SchwStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let m = SchwarzschildModel::new(mass)?;
        write(out, Box::into_raw(Box::new(SchwModel(m))), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn schw_model_free(model: *mut SchwModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Areal radius at isotropic radius `rho`.
#[no_mangle]
pub unsafe extern "C" fn schw_areal_from_isotropic(model: *const SchwModel, rho: f64, out: *mut f64) -> SchwStatus {
    guard(|| {
        let m = deref(model, "model")?;
        write(out, m.0.areal_from_isotropic(IsotropicRadius(rho))?.0, "out")
    })
}

/// Isotropic radius at areal radius `s`.
#[no_mangle]
pub unsafe extern "C" fn schw_isotropic_from_areal(model: *const SchwModel, s: f64, out: *mut f64) -> SchwStatus {
    guard(|| {
        let m = deref(model, "model")?;
        write(out, m.0.isotropic_from_areal(ArealRadius(s))?.0, "out")
    })
}

/// Distance to the horizon at areal radius `s`.
#[no_mangle]
pub unsafe extern "C" fn schw_distance_from_areal(model: *const SchwModel, s: f64, out: *mut f64) -> SchwStatus {
    guard(|| {
        let m = deref(model, "model")?;
        write(out, m.0.distance_from_areal(ArealRadius(s))?.0, "out")
    })
}

/// Areal radius `h(r)` at horizon distance `r`.
#[no_mangle]
pub unsafe extern "C" fn schw_areal_from_distance(model: *const SchwModel, r: f64, tol: f64, out: *mut f64) -> SchwStatus {
    guard(|| {
        let m = deref(model, "model")?;
        write(out, m.0.areal_from_distance(HorizonDistance(r), tol)?.0, "out")
    })
}

/// Static potential `f = h′(r)` at horizon distance `r`.
#[no_mangle]
pub unsafe extern "C" fn schw_static_potential(model: *const SchwModel, r: f64, out: *mut f64) -> SchwStatus {
    guard(|| {
        let m = deref(model, "model")?;
        write(out, m.0.static_potential(HorizonDistance(r))?, "out")
    })
}

/// Radius of the maximal stable annulus of the plane through the origin.
#[no_mangle]
pub unsafe extern "C" fn schw_stability_radius(model: *const SchwModel, tol: f64, out: *mut f64) -> SchwStatus {
    guard(|| {
        let m = deref(model, "model")?;
        write(out, spectral::stability_radius(&m.0, tol)?.0, "out")
    })
}

/// Closed-form radial Jacobi field `v₀(r)`.
#[no_mangle]
pub unsafe extern "C" fn schw_closed_form_v0(model: *const SchwModel, r: f64, out: *mut f64) -> SchwStatus {
    guard(|| {
        let m = deref(model, "model")?;
        write(out, mode_odes::closed_form_v0(&m.0, IsotropicRadius(r))?, "out")
    })
}

/// Singular radius `R_c` of the Riccati profile with parameter `c`.
#[no_mangle]
pub unsafe extern "C" fn schw_singularity_radius(model: *const SchwModel, c: f64, tol: f64, out: *mut f64) -> SchwStatus {
    guard(|| {
        let m = deref(model, "model")?;
        write(out, mode_odes::singularity_r_c(&m.0, c, tol)?.0, "out")
    })
}

/// Number of negative eigenvalues of mode `k` on the plane truncated at `outer_radius`.
#[no_mangle]
pub unsafe extern "C" fn schw_negative_count(
    model: *const SchwModel,
    k: i32,
    outer_radius: f64,
    ode_tol: f64,
    out: *mut usize,
) -> SchwStatus {
    guard(|| {
        let m = deref(model, "model")?;
        write(out, spectral::negative_count(&m.0, k, IsotropicRadius(outer_radius), ode_tol)?, "out")
    })
}

/// Morse index of the plane truncated at `outer_radius`, summing modes `|k| ≤ kmax`.
#[no_mangle]
pub unsafe extern "C" fn schw_morse_index(
    model: *const SchwModel,
    outer_radius: f64,
    kmax: u32,
    ode_tol: f64,
    out: *mut usize,
) -> SchwStatus {
    guard(|| {
        let m = deref(model, "model")?;
        let rep = spectral::morse_index(&m.0, IsotropicRadius(outer_radius), kmax, ode_tol)?;
        write(out, rep.morse_index, "out")
    })
}

unsafe fn fill(out: *mut f64, len: usize, values: &[f64]) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    if len < values.len() {
        set_error(&format!("buffer holds {len} values, {} needed", values.len()));
        return Err(Fail(SchwStatus::BufferTooSmall));
    }
    std::slice::from_raw_parts_mut(out, values.len()).copy_from_slice(values);
    Ok(())
}

/// Lowest `count` eigenvalues of mode `k` by shooting, written to `out[0..count]`.
#[no_mangle]
pub unsafe extern "C" fn schw_eigenvalues_shooting(
    model: *const SchwModel,
    k: i32,
    outer_radius: f64,
    count: usize,
    ode_tol: f64,
    eig_tol: f64,
    out: *mut f64,
) -> SchwStatus {
    guard(|| {
        let m = deref(model, "model")?;
        let spec = spectral::eigenvalues_shooting(&m.0, k, IsotropicRadius(outer_radius), count, Tolerances { ode_tol, eig_tol })?;
        fill(out, count, &spec.lambdas())
    })
}

/// Lowest `count` eigenvalues of mode `k` from the finite-difference solver on
/// `intervals` and `2·intervals` grid intervals, Richardson-combined.
#[no_mangle]
pub unsafe extern "C" fn schw_eigenvalues_fd(
    model: *const SchwModel,
    k: i32,
    outer_radius: f64,
    intervals: usize,
    count: usize,
    out: *mut f64,
) -> SchwStatus {
    guard(|| {
        let m = deref(model, "model")?;
        let spec = fd_oracle::richardson_eigenvalues(&m.0, k, IsotropicRadius(outer_radius), intervals, count)?;
        fill(out, count, &spec.lambdas())
    })
}

unsafe fn emit_surface(out: *mut *mut SchwSurface, s: ParamSurface) -> Result<(), Fail> {
    write(out, Box::into_raw(Box::new(SchwSurface(s))), "out")
}

/// The plane through the origin, `x₃ = 0`.
#[no_mangle]
pub unsafe extern "C" fn schw_surface_plane(model: *const SchwModel, out: *mut *mut SchwSurface) -> SchwStatus {
    guard(|| {
        let m = deref(model, "model")?;
        emit_surface(out, surfaces::plane_through_origin(&m.0))
    })
}

/// A plane through the origin turned by a rotation drawn from `seed`.
#[no_mangle]
pub unsafe extern "C" fn schw_surface_rotated_plane(model: *const SchwModel, seed: u64, out: *mut *mut SchwSurface) -> SchwStatus {
    guard(|| {
        let m = deref(model, "model")?;
        let rot = surfaces::random_rotation(&mut ChaCha8Rng::seed_from_u64(seed));
        emit_surface(out, surfaces::rotated_plane(&m.0, rot))
    })
}

/// Cone over the circle of colatitude `colatitude`, cut at isotropic radius
/// `t_max` (may be infinite).
#[no_mangle]
pub unsafe extern "C" fn schw_surface_latitude_cone(
    model: *const SchwModel,
    colatitude: f64,
    t_max: f64,
    out: *mut *mut SchwSurface,
) -> SchwStatus {
    guard(|| {
        let m = deref(model, "model")?;
        let curve = surfaces::LatitudeCircle::new(colatitude)?;
        emit_surface(out, surfaces::make_cone(&m.0, curve, t_max)?)
    })
}

#[no_mangle]
pub unsafe extern "C" fn schw_surface_free(surface: *mut SchwSurface) {
    if !surface.is_null() {
        drop(Box::from_raw(surface));
    }
}

/// f-weighted area of the surface inside the ball of horizon distance `rho`.
#[no_mangle]
pub unsafe extern "C" fn schw_mu_integral(
    model: *const SchwModel,
    surface: *const SchwSurface,
    rho: f64,
    quad_tol: f64,
    out: *mut f64,
) -> SchwStatus {
    guard(|| {
        let m = deref(model, "model")?;
        let s = deref(surface, "surface")?;
        let q = QuadSpec::new(quad_tol, 1e-12);
        write(out, surfaces::mu_integral(&m.0, &s.0, HorizonDistance(rho), &q)?, "out")
    })
}

/// Length of the surface's boundary on the horizon.
#[no_mangle]
pub unsafe extern "C" fn schw_boundary_length(model: *const SchwModel, surface: *const SchwSurface, out: *mut f64) -> SchwStatus {
    guard(|| {
        let m = deref(model, "model")?;
        let s = deref(surface, "surface")?;
        write(out, surfaces::boundary_length(&m.0, &s.0)?, "out")
    })
}

/// Monotonicity report on 40 log-spaced distances up to `rho_max`.
#[no_mangle]
pub unsafe extern "C" fn schw_monotonicity_report(
    model: *const SchwModel,
    surface: *const SchwSurface,
    rho_max: f64,
    quad_tol: f64,
    out: *mut *mut SchwMonotonicityReport,
) -> SchwStatus {
    guard(|| {
        let m = deref(model, "model")?;
        let s = deref(surface, "surface")?;
        let grid = surfaces::default_rho_grid(&m.0, rho_max)?;
        let rep = surfaces::monotonicity_report(&m.0, &s.0, &grid, &QuadSpec::new(quad_tol, 1e-12))?;
        write(out, Box::into_raw(Box::new(SchwMonotonicityReport(rep))), "out")
    })
}

/// Number of grid points in a report.
#[no_mangle]
pub unsafe extern "C" fn schw_report_len(report: *const SchwMonotonicityReport, out: *mut usize) -> SchwStatus {
    guard(|| write(out, deref(report, "report")?.0.rhos.len(), "out"))
}

/// Copy the horizon distances of the grid into `out[0..len]`.
#[no_mangle]
pub unsafe extern "C" fn schw_report_rhos(report: *const SchwMonotonicityReport, out: *mut f64, len: usize) -> SchwStatus {
    guard(|| fill(out, len, &deref(report, "report")?.0.rhos))
}

/// Copy the ratios `μ/h²` into `out[0..len]`.
#[no_mangle]
pub unsafe extern "C" fn schw_report_ratios(report: *const SchwMonotonicityReport, out: *mut f64, len: usize) -> SchwStatus {
    guard(|| fill(out, len, &deref(report, "report")?.0.ratios))
}

/// Whether the ratios are non-decreasing, and the largest identity residual.
#[no_mangle]
pub unsafe extern "C" fn schw_report_summary(
    report: *const SchwMonotonicityReport,
    monotone: *mut bool,
    max_residual: *mut f64,
) -> SchwStatus {
    guard(|| {
        let r = &deref(report, "report")?.0;
        let worst = r
            .formula_residuals
            .iter()
            .chain(&r.anchored_residuals)
            .fold(0.0f64, |a, x| a.max(x.abs()));
        write(monotone, r.monotone, "monotone")?;
        write(max_residual, worst, "max_residual")
    })
}

#[no_mangle]
pub unsafe extern "C" fn schw_report_free(report: *mut SchwMonotonicityReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Density at infinity against `|∂Σ|/(4πm)`, with the defect of the identity.
#[no_mangle]
pub unsafe extern "C" fn schw_boundary_bound_check(
    model: *const SchwModel,
    surface: *const SchwSurface,
    rho_max: f64,
    quad_tol: f64,
    out: *mut SchwBoundaryBound,
) -> SchwStatus {
    guard(|| {
        let m = deref(model, "model")?;
        let s = deref(surface, "surface")?;
        let rep = surfaces::boundary_bound_check(&m.0, &s.0, rho_max, &QuadSpec::new(quad_tol, 1e-12))?;
        write(
            out,
            SchwBoundaryBound {
                lhs: rep.lhs,
                rhs: rep.rhs,
                equality_defect: rep.equality_defect,
                boundary_length: rep.boundary_length,
                bound_holds: rep.bound_holds,
            },
            "out",
        )
    })
}
