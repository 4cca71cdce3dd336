#ifndef NVLAB_H
#define NVLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NvFamily {
  NV_FAMILY_Q1AB = 0,
  NV_FAMILY_Q2C = 1,
  NV_FAMILY_QN0 = 2,
} NvFamily;

typedef enum NvRegion {
  NV_REGION_FULL = 0,
  NV_REGION_INSIDE = 1,
  NV_REGION_OUTSIDE = 2,
  NV_REGION_LARGE_FREQ = 3,
} NvRegion;

typedef enum NvStatus {
  NV_STATUS_OK = 0,
  NV_STATUS_NULL_POINTER = 1,
  NV_STATUS_INVALID_ARGUMENT = 2,
  NV_STATUS_DOMAIN = 3,
  NV_STATUS_RESOLUTION_INSUFFICIENT = 4,
  NV_STATUS_OVERFLOW = 5,
  NV_STATUS_BLOWUP_REACHED = 6,
  NV_STATUS_INSTABILITY = 7,
  NV_STATUS_IO = 8,
  NV_STATUS_FORMAT = 9,
  NV_STATUS_PANIC = 10,
} NvStatus;

/**
 * A sampled field `N x N`, row-major.
 */
typedef struct NvField NvField;

/**
 * A running simulation.
 */
typedef struct NvSimulation NvSimulation;

/**
 * The six critical points and their distances.
 */
typedef struct NvStationaryPoints {
  /**
   * Case number 1..4.
   */
  uint8_t case_number;
  double lambda_re[6];
  double lambda_im[6];
  double omega;
  double phi;
  double omega1;
  double omega2;
} NvStationaryPoints;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread, NUL terminated and truncated to `len`.
 * Returns the full message length in bytes, without the terminator.
 *
 * # Safety
 * `buf` must be NULL or point to `len` writable bytes.
 */
size_t nv_last_error_message(char *buf, size_t len);

/**
 * # Safety
 * `out` must be NULL or valid for writes.
 */
enum NvStatus nv_stationary_points(double u_re, double u_im, struct NvStationaryPoints *out);

/**
 * `I(t, u)` over `region`. `cutoff_r` is only read for the large-frequency region.
 *
 * # Safety
 * The output pointers must be NULL or valid for writes; all three must be non-NULL.
 */
enum NvStatus nv_integral(double alpha,
                          double beta,
                          double energy,
                          double u_re,
                          double u_im,
                          double t,
                          enum NvRegion region,
                          double cutoff_r,
                          double *out_re,
                          double *out_im,
                          double *out_err);

/**
 * `int v dx dy` of a closed-form solution. `p0, p1` are `(a, b)`, `(c, _)` or `(n, _)`.
 *
 * # Safety
 * `out` must be NULL or valid for writes.
 */
enum NvStatus nv_solution_mass(enum NvFamily family, double p0, double p1, double t, double *out);

/**
 * A field from `n * n` row-major samples.
 *
 * # Safety
 * `values` must point to `n * n` readable doubles; `out` must be valid for writes.
 */
enum NvStatus nv_field_new(const double *values,
                           uint32_t n,
                           double half_length,
                           double energy,
                           double time,
                           struct NvField **out);

/**
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be valid for writes.
 */
enum NvStatus nv_field_read_snapshot(const char *path, struct NvField **out);

/**
 * # Safety
 * `field` must come from this library; `path` must be a NUL-terminated string.
 */
enum NvStatus nv_field_write_snapshot(const struct NvField *field, const char *path);

/**
 * Grid size `N`, or 0 for NULL.
 *
 * # Safety
 * `field` must be NULL or come from this library.
 */
uint32_t nv_field_size(const struct NvField *field);

/**
 * Copies the `N * N` samples into `buf`, which holds `len` doubles.
 *
 * # Safety
 * `field` must come from this library; `buf` must point to `len` writable doubles.
 */
enum NvStatus nv_field_values(const struct NvField *field, double *buf, size_t len);

/**
 * # Safety
 * `field` must be NULL or come from this library, and must not be used afterwards.
 */
void nv_field_free(struct NvField *field);

/**
 * Starts a simulation from `field` with step `dt` (2/3 dealiasing, integrating-factor RK4).
 *
 * # Safety
 * `field` must come from this library; `out` must be valid for writes.
 */
enum NvStatus nv_simulation_new(const struct NvField *field,
                                double dt,
                                bool dealias,
                                struct NvSimulation **out);

/**
 * Advances `steps` steps.
 *
 * # Safety
 * `sim` must come from this library.
 */
enum NvStatus nv_simulation_step(struct NvSimulation *sim, uint32_t steps);

/**
 * Current time, mass, `L^2` norm and maximum modulus.
 *
 * # Safety
 * `sim` must come from this library; `out` must point to 4 writable doubles.
 */
enum NvStatus nv_simulation_observe(struct NvSimulation *sim, double *out);

/**
 * The current state as a new field.
 *
 * # Safety
 * `sim` must come from this library; `out` must be valid for writes.
 */
enum NvStatus nv_simulation_state(struct NvSimulation *sim, struct NvField **out);

/**
 * # Safety
 * `sim` must be NULL or come from this library, and must not be used afterwards.
 */
void nv_simulation_free(struct NvSimulation *sim);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* NVLAB_H */
