#ifndef SLESIGMA_H
#define SLESIGMA_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SlesPhase {
  SLES_PHASE_THIN = 0,
  SLES_PHASE_SWALLOWING = 1,
  SLES_PHASE_HITTING = 2,
  SLES_PHASE_DENSE = 3,
  SLES_PHASE_BOUNDARY_INDETERMINATE = 4,
} SlesPhase;

// Hull side selector for [`sles_hull_cloud`].
typedef enum SlesSide {
  SLES_SIDE_LEFT = 0,
  SLES_SIDE_RIGHT = 1,
} SlesSide;

typedef enum SlesStatus {
  SLES_STATUS_OK = 0,
  SLES_STATUS_NULL_POINTER = 1,
  SLES_STATUS_INVALID_COVARIANCE = 2,
  SLES_STATUS_INVALID_ARGUMENT = 3,
  SLES_STATUS_ON_SLIT = 4,
  SLES_STATUS_QUADRATURE = 5,
  SLES_STATUS_UNSUPPORTED = 6,
  SLES_STATUS_NO_CONVERGENCE = 7,
  SLES_STATUS_INCONSISTENT = 8,
  SLES_STATUS_IO = 9,
  SLES_STATUS_PARSE = 10,
  SLES_STATUS_BUFFER_TOO_SMALL = 11,
  SLES_STATUS_PANIC = 12,
} SlesStatus;

// Opaque hull point cloud.
typedef struct SlesCloud SlesCloud;

// Opaque stationary density.
typedef struct SlesDensity SlesDensity;

// Opaque driving path.
typedef struct SlesPath SlesPath;

// Phase integrals and the label derived from their signs.
typedef struct SlesPhaseReport {
  double i;
  double ii;
  double err_i;
  double err_ii;
  double tol_i;
  double tol_ii;
  enum SlesPhase label;
} SlesPhaseReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *sles_version(void);

// Copies the calling thread's last error message into `buf` (NUL
// terminated, truncated to `len`). Returns the full message length in bytes
// excluding the terminator, or 0 when there is no error.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t sles_last_error_message(char *buf, size_t len);

// Samples a driver with covariance `(a, b, c)`, `n` steps over `horizon`,
// from stream `stream` of master seed `master`.
//
// # Safety
// `out` must be a valid pointer to a handle slot.
enum SlesStatus sles_path_sample(double a,
                                 double b,
                                 double c,
                                 size_t n,
                                 double horizon,
                                 uint64_t master,
                                 uint64_t stream,
                                 struct SlesPath **out);

// A driver with all increments zero.
//
// # Safety
// `out` must be a valid pointer to a handle slot.
enum SlesStatus sles_path_zero(size_t n, double horizon, struct SlesPath **out);

// A driver from `n` increments given as separate real and imaginary arrays.
//
// # Safety
// `re` and `im` must point to `n` readable doubles; `out` must be valid.
enum SlesStatus sles_path_from_increments(double horizon,
                                          const double *re,
                                          const double *im,
                                          size_t n,
                                          struct SlesPath **out);

// Number of increments, or 0 for a null handle.
//
// # Safety
// `path` must be null or a live handle.
size_t sles_path_len(const struct SlesPath *path);

// # Safety
// `path` must be null or a handle not yet freed.
void sles_path_free(struct SlesPath *path);

// Pushes `z = re + i·im` through the full composition; on a slit hit the
// result is NaN.
//
// # Safety
// `path` must be a live handle; `out_re`, `out_im` must be writable.
enum SlesStatus sles_forward_map(const struct SlesPath *path,
                                 double re,
                                 double im,
                                 double *out_re,
                                 double *out_im);

// Hull samples of `path` at probe radius `epsilon`.
//
// # Safety
// `path` must be a live handle; `out` must be valid.
enum SlesStatus sles_hull_cloud(const struct SlesPath *path,
                                double epsilon,
                                enum SlesSide side,
                                struct SlesCloud **out);

// # Safety
// `cloud` must be null or a live handle.
size_t sles_cloud_len(const struct SlesCloud *cloud);

// Copies points into `re`, `im` and `t_added` (each may be null), `len`
// entries each. Fails with `BufferTooSmall` if `len` is short.
//
// # Safety
// Non-null buffers must hold `len` writable doubles.
enum SlesStatus sles_cloud_points(const struct SlesCloud *cloud,
                                  double *re,
                                  double *im,
                                  double *t_added,
                                  size_t len);

// # Safety
// `cloud` must be null or a handle not yet freed.
void sles_cloud_free(struct SlesCloud *cloud);

// Stationary angular density of `(a, b, c)` on an `m`-cell grid of `[0, 2π]`.
//
// # Safety
// `out` must be valid.
enum SlesStatus sles_density(double a, double b, double c, size_t m, struct SlesDensity **out);

// Number of grid nodes (`m + 1`), or 0 for a null handle.
//
// # Safety
// `density` must be null or a live handle.
size_t sles_density_len(const struct SlesDensity *density);

// Copies grid nodes and values into `u` and `p` (each may be null).
//
// # Safety
// Non-null buffers must hold `len` writable doubles.
enum SlesStatus sles_density_values(const struct SlesDensity *density,
                                    double *u,
                                    double *p,
                                    size_t len);

// Interpolated density at angle `u`; NaN for a null handle.
//
// # Safety
// `density` must be null or a live handle.
double sles_density_value_at(const struct SlesDensity *density, double u);

// # Safety
// `density` must be null or a handle not yet freed.
void sles_density_free(struct SlesDensity *density);

// Phase integrals and label of `(a, b, c)`. A `tol_zero` that is not
// positive selects the error-derived tolerances.
//
// # Safety
// `out` must be writable.
enum SlesStatus sles_phase_classify(double a,
                                    double b,
                                    double c,
                                    double tol_zero,
                                    struct SlesPhaseReport *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SLESIGMA_H */
