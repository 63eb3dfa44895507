#ifndef SCHWARZSCHILD_H
#define SCHWARZSCHILD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum SchwStatus {
  SCHW_STATUS_OK = 0,
  SCHW_STATUS_NULL_POINTER = 1,
  SCHW_STATUS_DOMAIN = 2,
  SCHW_STATUS_INTEGRATION = 3,
  SCHW_STATUS_SINGULARITY = 4,
  SCHW_STATUS_NO_SINGULARITY = 5,
  SCHW_STATUS_SEARCH = 6,
  SCHW_STATUS_ACCURACY = 7,
  SCHW_STATUS_PRECONDITION = 8,
  SCHW_STATUS_GEOMETRY = 9,
  SCHW_STATUS_ROOT = 10,
  SCHW_STATUS_BUFFER_TOO_SMALL = 11,
  SCHW_STATUS_PANIC = 12,
} SchwStatus;

/**
 * Opaque Schwarzschild model.
 */
typedef struct SchwModel SchwModel;

/**
 * Opaque monotonicity report.
 */
typedef struct SchwMonotonicityReport SchwMonotonicityReport;

/**
 * Opaque surface.
 */
typedef struct SchwSurface SchwSurface;

/**
 * Outcome of the boundary-length bound check.
 */
typedef struct SchwBoundaryBound {
  /**
   * Density at infinity.
   */
  double lhs;
  /**
   * Boundary length divided by 4πm.
   */
  double rhs;
  double equality_defect;
  double boundary_length;
  bool bound_holds;
} SchwBoundaryBound;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Description of the last failure on this thread (empty if none).
 */
const char *schw_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *schw_version(void);

/**
 * Create a model of mass `mass ≥ 0` (0 gives flat space).
 */
enum SchwStatus schw_model_new(double mass, struct SchwModel **out);

void schw_model_free(struct SchwModel *model);

/**
 * Areal radius at isotropic radius `rho`.
 */
enum SchwStatus schw_areal_from_isotropic(const struct SchwModel *model, double rho, double *out);

/**
 * Isotropic radius at areal radius `s`.
 */
enum SchwStatus schw_isotropic_from_areal(const struct SchwModel *model, double s, double *out);

/**
 * Distance to the horizon at areal radius `s`.
 */
enum SchwStatus schw_distance_from_areal(const struct SchwModel *model, double s, double *out);

/**
 * Areal radius `h(r)` at horizon distance `r`.
 */
enum SchwStatus schw_areal_from_distance(const struct SchwModel *model,
                                         double r,
                                         double tol,
                                         double *out);

/**
 * Static potential `f = h′(r)` at horizon distance `r`.
 */
enum SchwStatus schw_static_potential(const struct SchwModel *model, double r, double *out);

/**
 * Radius of the maximal stable annulus of the plane through the origin.
 */
enum SchwStatus schw_stability_radius(const struct SchwModel *model, double tol, double *out);

/**
 * Closed-form radial Jacobi field `v₀(r)`.
 */
enum SchwStatus schw_closed_form_v0(const struct SchwModel *model, double r, double *out);

/**
 * Singular radius `R_c` of the Riccati profile with parameter `c`.
 */
enum SchwStatus schw_singularity_radius(const struct SchwModel *model,
                                        double c,
                                        double tol,
                                        double *out);

/**
 * Number of negative eigenvalues of mode `k` on the plane truncated at `outer_radius`.
 */
enum SchwStatus schw_negative_count(const struct SchwModel *model,
                                    int32_t k,
                                    double outer_radius,
                                    double ode_tol,
                                    size_t *out);

/**
 * Morse index of the plane truncated at `outer_radius`, summing modes `|k| ≤ kmax`.
 */
enum SchwStatus schw_morse_index(const struct SchwModel *model,
                                 double outer_radius,
                                 uint32_t kmax,
                                 double ode_tol,
                                 size_t *out);

/**
 * Lowest `count` eigenvalues of mode `k` by shooting, written to `out[0..count]`.
 */
enum SchwStatus schw_eigenvalues_shooting(const struct SchwModel *model,
                                          int32_t k,
                                          double outer_radius,
                                          size_t count,
                                          double ode_tol,
                                          double eig_tol,
                                          double *out);

/**
 * Lowest `count` eigenvalues of mode `k` from the finite-difference solver on
 * `intervals` and `2·intervals` grid intervals, Richardson-combined.
 */
enum SchwStatus schw_eigenvalues_fd(const struct SchwModel *model,
                                    int32_t k,
                                    double outer_radius,
                                    size_t intervals,
                                    size_t count,
                                    double *out);

/**
 * The plane through the origin, `x₃ = 0`.
 */
enum SchwStatus schw_surface_plane(const struct SchwModel *model, struct SchwSurface **out);

/**
 * A plane through the origin turned by a rotation drawn from `seed`.
 */
enum SchwStatus schw_surface_rotated_plane(const struct SchwModel *model,
                                           uint64_t seed,
                                           struct SchwSurface **out);

/**
 * Cone over the circle of colatitude `colatitude`, cut at isotropic radius
 * `t_max` (may be infinite).
 */
enum SchwStatus schw_surface_latitude_cone(const struct SchwModel *model,
                                           double colatitude,
                                           double t_max,
                                           struct SchwSurface **out);

void schw_surface_free(struct SchwSurface *surface);

/**
 * f-weighted area of the surface inside the ball of horizon distance `rho`.
 */
enum SchwStatus schw_mu_integral(const struct SchwModel *model,
                                 const struct SchwSurface *surface,
                                 double rho,
                                 double quad_tol,
                                 double *out);

/**
 * Length of the surface's boundary on the horizon.
 */
enum SchwStatus schw_boundary_length(const struct SchwModel *model,
                                     const struct SchwSurface *surface,
                                     double *out);

/**
 * Monotonicity report on 40 log-spaced distances up to `rho_max`.
 */
enum SchwStatus schw_monotonicity_report(const struct SchwModel *model,
                                         const struct SchwSurface *surface,
                                         double rho_max,
                                         double quad_tol,
                                         struct SchwMonotonicityReport **out);

/**
 * Number of grid points in a report.
 */
enum SchwStatus schw_report_len(const struct SchwMonotonicityReport *report, size_t *out);

/**
 * Copy the horizon distances of the grid into `out[0..len]`.
 */
enum SchwStatus schw_report_rhos(const struct SchwMonotonicityReport *report,
                                 double *out,
                                 size_t len);

/**
 * Copy the ratios `μ/h²` into `out[0..len]`.
 */
enum SchwStatus schw_report_ratios(const struct SchwMonotonicityReport *report,
                                   double *out,
                                   size_t len);

/**
 * Whether the ratios are non-decreasing, and the largest identity residual.
 */
enum SchwStatus schw_report_summary(const struct SchwMonotonicityReport *report,
                                    bool *monotone,
                                    double *max_residual);

void schw_report_free(struct SchwMonotonicityReport *report);

/**
 * Density at infinity against `|∂Σ|/(4πm)`, with the defect of the identity.
 */
enum SchwStatus schw_boundary_bound_check(const struct SchwModel *model,
                                          const struct SchwSurface *surface,
                                          double rho_max,
                                          double quad_tol,
                                          struct SchwBoundaryBound *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SCHWARZSCHILD_H */
