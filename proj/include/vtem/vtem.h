/* C interface to the V-truncated Euler-Maruyama library.
 *
 * All entry points return a vtem_status; VTEM_OK is 0. On failure,
 * vtem_last_error() describes the problem for the calling thread. Handles
 * are opaque and freed with their *_close function. The library is
 * thread-safe as long as each handle is used from one thread at a time.
 */
#ifndef VTEM_H
#define VTEM_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct vtem_model vtem_model;
typedef struct vtem_report vtem_report;

typedef int32_t vtem_status;

enum {
  VTEM_OK = 0,
  VTEM_ERR_CONFIG = 1,     /* invalid configuration or arguments */
  VTEM_ERR_VALIDATION = 2, /* a model validator failed */
  VTEM_ERR_NUMERIC = 3,    /* non-finite value where finiteness is guaranteed */
  VTEM_ERR_DOMAIN = 4,     /* input outside the mathematical domain */
  VTEM_ERR_POLICY = 5,     /* step size or parameter violates the policy */
};

const char* vtem_last_error(void);
const char* vtem_version(void);

/* ---- models ---------------------------------------------------------- */

int vtem_model_count(void);
const char* vtem_model_name(int index);

/* Open a built-in model by name ("planar-quartic", "scalar-cubic",
 * "duffing-vdp"). */
vtem_status vtem_model_open(const char* name, vtem_model** out);

/* Scalar cubic model with explicit rho, x0 and delta_star. */
vtem_status vtem_model_open_scalar_cubic(double rho, double x0,
                                         double delta_star, vtem_model** out);

/* Built-in model with optional overrides. Pass NaN (rho, delta_star) or
 * NULL (x0) to keep a default. rho applies to scalar-cubic only. */
vtem_status vtem_model_open_custom(const char* name, double rho,
                                   const double* x0, int x0_len,
                                   double delta_star, vtem_model** out);

/* Build a model from a polynomial description (one `name = polynomial`
 * assignment per line or semicolon-separated). */
vtem_status vtem_model_parse(const char* text, vtem_model** out);

void vtem_model_close(vtem_model* model);

vtem_status vtem_model_state_dim(const vtem_model* model, int* out);
vtem_status vtem_model_noise_dim(const vtem_model* model, int* out);
vtem_status vtem_model_delta_star(const vtem_model* model, double* out);
vtem_status vtem_model_default_x0(const vtem_model* model, double* x0, int len);
vtem_status vtem_model_label(const vtem_model* model, const char** out);

/* ---- point operations ------------------------------------------------ */

vtem_status vtem_generator(const vtem_model* model, const double* x, int len,
                           double* out);
vtem_status vtem_generator_power(const vtem_model* model, const double* x,
                                 int len, double rho, double* out);
vtem_status vtem_truncation_radius(const vtem_model* model, double dt,
                                   double* out);
vtem_status vtem_truncate(const vtem_model* model, double dt, const double* x,
                          int len, double* out);

/* ---- validation ------------------------------------------------------ */

/* Runs every validator on the default sample box. On success *out holds a
 * report with columns (check_index, violations); vtem_report_summary_count
 * exposes per-check names. passed receives 1/0. */
vtem_status vtem_model_validate(const vtem_model* model, int* passed,
                                char** text_report);
void vtem_string_free(char* text);

/* ---- experiments ------------------------------------------------------ */

/* One simulated path written as CSV rows (step, t, y_1..y_d, v, truncated).
 * scheme: 0 truncated EM, 1 classical EM. */
vtem_status vtem_run_path(const vtem_model* model, int scheme, double dt,
                          double horizon, const double* x0, int x0_len,
                          uint64_t seed, int64_t path_id, vtem_report** out);

/* Coupled strong-error study over dt_list against a reference at dt_ref. */
vtem_status vtem_run_converge(const vtem_model* model, const double* dt_list,
                              int dt_count, double dt_ref, double horizon,
                              double q, int64_t paths, uint64_t seed,
                              int workers, int with_u_metric,
                              vtem_report** out);

/* sup_k mean V^rho(Y_k) per dt. */
vtem_status vtem_run_moments(const vtem_model* model, double rho,
                             const double* dt_list, int dt_count,
                             double horizon, int64_t paths, uint64_t seed,
                             int workers, vtem_report** out);

/* Paired truncated/classical stability runs on shared noise. */
vtem_status vtem_run_stability(const vtem_model* model, double dt,
                               double horizon, int64_t paths, uint64_t seed,
                               double threshold, int workers,
                               vtem_report** out);

/* ---- reports ---------------------------------------------------------- */

int32_t vtem_report_columns(const vtem_report* report);
const char* vtem_report_column_name(const vtem_report* report, int32_t col);
int64_t vtem_report_rows(const vtem_report* report);
vtem_status vtem_report_value(const vtem_report* report, int64_t row,
                              int32_t col, double* out);

/* Named summary scalars (fitted slopes, fractions, radii, ...). */
int32_t vtem_report_summary_count(const vtem_report* report);
const char* vtem_report_summary_name(const vtem_report* report, int32_t index);
vtem_status vtem_report_summary_value(const vtem_report* report,
                                      const char* name, double* out);

/* Serializes the table with 17 significant digits per value. */
vtem_status vtem_report_write_csv(const vtem_report* report, const char* path);
vtem_status vtem_report_csv_string(const vtem_report* report, char** out);

void vtem_report_close(vtem_report* report);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* VTEM_H */
