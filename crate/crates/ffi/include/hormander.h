#ifndef HORMANDER_H
#define HORMANDER_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HmStatus {
  HM_STATUS_OK = 0,
  HM_STATUS_NULL_POINTER = 1,
  HM_STATUS_INVALID_UTF8 = 2,
  HM_STATUS_DOMAIN = 3,
  HM_STATUS_POLE = 4,
  HM_STATUS_RESOLUTION = 5,
  HM_STATUS_INPUT = 6,
  HM_STATUS_COVERAGE = 7,
  HM_STATUS_NOT_SECTORIAL = 8,
  HM_STATUS_SINGULAR = 9,
  HM_STATUS_CONTOUR = 10,
  HM_STATUS_SEARCH = 11,
  HM_STATUS_SCHEMA = 12,
  HM_STATUS_CONFIG = 13,
  HM_STATUS_IO = 14,
  HM_STATUS_BUFFER_TOO_SMALL = 15,
  HM_STATUS_NOT_FOUND = 16,
  HM_STATUS_PANIC = 99,
} HmStatus;

// Sectorial matrix operator.
typedef struct HmOperator HmOperator;

// Result of the condition-equivalence suite.
typedef struct HmReport HmReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. Valid until
// the next failing call on the same thread.
const char *hm_last_error(void);

// Library version as a static NUL-terminated string.
const char *hm_version(void);

// Complex Gamma function.
//
// # Safety
// `out_re` and `out_im` must be valid for writes.
enum HmStatus hm_gamma(double re, double im, double *out_re, double *out_im);

// Builds an operator from a preset such as `diag:(1,2,4)`.
//
// # Safety
// `spec` must be a NUL-terminated string and `out` valid for writes.
enum HmStatus hm_operator_preset(const char *spec, struct HmOperator **out);

// Builds an operator from a row-major complex matrix given as interleaved
// `(re, im)` pairs, `2 n²` doubles.
//
// # Safety
// `data` must point to `2 n²` doubles and `out` be valid for writes.
enum HmStatus hm_operator_from_matrix(size_t n, const double *data, struct HmOperator **out);

// # Safety
// `op` must come from this library and not be used afterwards.
void hm_operator_free(struct HmOperator *op);

// Dimension after range reduction; 0 for a null handle.
//
// # Safety
// `op` must be null or a live handle.
size_t hm_operator_dim(const struct HmOperator *op);

// `A^{it}` written row-major as interleaved `(re, im)` pairs into `out`,
// which must hold `cap ≥ 2 dim²` doubles.
//
// # Safety
// `op` must be a live handle and `out` valid for `cap` writes.
enum HmStatus hm_imaginary_power(const struct HmOperator *op, double t, double *out, size_t cap);

// Evaluates conditions (1)-(8) on `ℓ^p` with default grids.
//
// # Safety
// `op` must be a live handle and `out` valid for writes.
enum HmStatus hm_equivalence_report(const struct HmOperator *op,
                                    double p,
                                    double alpha,
                                    double beta,
                                    struct HmReport **out);

// Value of a condition (`"c1"` … `"c8"`) in a report.
//
// # Safety
// `report` must be a live handle, `condition` a NUL-terminated string and
// `out` valid for writes.
enum HmStatus hm_report_value(const struct HmReport *report, const char *condition, double *out);

// Number of asserted checks of the report that failed.
//
// # Safety
// `report` must be null or a live handle.
size_t hm_report_failures(const struct HmReport *report);

// # Safety
// `report` must come from this library and not be used afterwards.
void hm_report_free(struct HmReport *report);

// Runs a JSON config (the CLI's `run`); `out_dir` may be null to keep the
// config's directory. `passed` receives 1 when no asserted check failed.
//
// # Safety
// String arguments must be NUL-terminated; `passed` valid for writes.
enum HmStatus hm_run(const char *config_json, const char *out_dir, int32_t *passed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HORMANDER_H */
