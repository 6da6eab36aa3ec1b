#ifndef GAUSS_SEMIGROUP_H
#define GAUSS_SEMIGROUP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/*
 Values accepted by the `kind` argument of [`gs_cone_contains`].
 */
typedef enum GsConeKind {
  GS_CONE_KIND_PARABOLIC_GAUSSIAN = 0,
  GS_CONE_KIND_GAUSSIAN = 1,
  GS_CONE_KIND_TRUNCATED_PARABOLIC = 2,
} GsConeKind;

/*
 Values accepted by the `route` argument of [`gs_ou_apply`].
 */
typedef enum GsOuRoute {
  GS_OU_ROUTE_AUTO = 0,
  GS_OU_ROUTE_KERNEL = 1,
  GS_OU_ROUTE_CHANGE_OF_VAR = 2,
  GS_OU_ROUTE_SPECTRAL = 3,
} GsOuRoute;

/*
 Values accepted by the `route` argument of [`gs_poisson_apply`].
 */
typedef enum GsPoissonRoute {
  GS_POISSON_ROUTE_AUTO = 0,
  GS_POISSON_ROUTE_KERNEL = 1,
  GS_POISSON_ROUTE_SUBORDINATION = 2,
  GS_POISSON_ROUTE_SPECTRAL = 3,
} GsPoissonRoute;

typedef enum GsStatus {
  GS_STATUS_OK = 0,
  GS_STATUS_NULL_POINTER = 1,
  GS_STATUS_INVALID_ARGUMENT = 2,
  GS_STATUS_NON_FINITE = 3,
  GS_STATUS_CONFIG = 4,
  GS_STATUS_IO = 5,
  GS_STATUS_UTF8 = 6,
  GS_STATUS_PANIC = 7,
} GsStatus;

/*
 Quadrature settings.
 */
typedef struct GsConfig GsConfig;

/*
 A function on `R^d`, either a catalog entry or a Hermite series.
 */
typedef struct GsFunction GsFunction;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or null. The pointer is
 valid until the next failing call on the same thread.
 */
const char *gs_last_error_message(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *gs_version(void);

/*
 New config with default quadrature settings. Free with [`gs_config_free`].
 */
struct GsConfig *gs_config_new(void);

/*
 # Safety
 `cfg` is null or a pointer from [`gs_config_new`] not yet freed.
 */
void gs_config_free(struct GsConfig *cfg);

/*
 Sets the Gauss-Hermite nodes per axis.

 # Safety
 `cfg` is a live handle from [`gs_config_new`].
 */
enum GsStatus gs_config_set_gh_nodes(struct GsConfig *cfg, size_t nodes);

/*
 Sets the seed used by Monte Carlo fallbacks.

 # Safety
 `cfg` is a live handle from [`gs_config_new`].
 */
enum GsStatus gs_config_set_seed(struct GsConfig *cfg, uint64_t seed);

/*
 Catalog entry `name` in dimension `dim`.

 # Safety
 `name` is a NUL-terminated string, `cfg` a live config handle and `result`
 a writable pointer. On success `*result` owns a handle to be released with
 [`gs_function_free`].
 */
enum GsStatus gs_function_catalog(size_t dim,
                                  const char *name,
                                  const struct GsConfig *cfg,
                                  struct GsFunction **result);

/*
 Hermite series `sum_k coeffs[k] h_{beta_k}` with `beta_k` stored row-major
 in `betas[k * dim .. (k + 1) * dim]`.

 # Safety
 `betas` holds `count * dim` values, `coeffs` holds `count` values and
 `result` is writable.
 */
enum GsStatus gs_function_series(size_t dim,
                                 const uint32_t *betas,
                                 const double *coeffs,
                                 size_t count,
                                 struct GsFunction **result);

/*
 # Safety
 `f` is null or a handle not yet freed.
 */
void gs_function_free(struct GsFunction *f);

/*
 # Safety
 `f` is a live handle, `x` holds `dim` values and `result` is writable.
 */
enum GsStatus gs_function_eval(const struct GsFunction *f,
                               const double *x,
                               size_t dim,
                               double *result);

/*
 Normalized Hermite polynomial `h_beta(x)`.

 # Safety
 `beta` and `x` hold `dim` values each and `result` is writable.
 */
enum GsStatus gs_hermite_eval(const uint32_t *beta, const double *x, size_t dim, double *result);

/*
 Ornstein-Uhlenbeck `T_t f(x)`; `route` takes a [`GsOuRoute`] value.

 # Safety
 `f` and `cfg` are live handles, `x` holds `dim` values and `result` is
 writable.
 */
enum GsStatus gs_ou_apply(const struct GsFunction *f,
                          const struct GsConfig *cfg,
                          const double *x,
                          size_t dim,
                          double t,
                          int route,
                          double *result);

/*
 Poisson-Hermite `P_t f(x)`; `route` takes a [`GsPoissonRoute`] value.

 # Safety
 As for [`gs_ou_apply`].
 */
enum GsStatus gs_poisson_apply(const struct GsFunction *f,
                               const struct GsConfig *cfg,
                               const double *x,
                               size_t dim,
                               double t,
                               int route,
                               double *result);

/*
 Whether `(y, t)` lies in the cone of `kind` (a [`GsConeKind`] value)
 with vertex `apex`.

 # Safety
 `apex` and `y` hold `dim` values each and `result` is writable.
 */
enum GsStatus gs_cone_contains(int kind,
                               const double *apex,
                               const double *y,
                               size_t dim,
                               double t,
                               bool *result);

/*
 Density of `gamma_d` at `x`; NaN when `x` is null with `dim > 0`.

 # Safety
 `x` holds `dim` values.
 */
double gs_gaussian_density(const double *x, size_t dim);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GAUSS_SEMIGROUP_H */
