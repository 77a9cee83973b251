/* C interface to the DCPS posterior-sampling library.
 *
 * All functions return DCPS_OK (0) on success or a nonzero status code; the
 * per-thread message from dcps_last_error() describes the most recent
 * failure. Objects are opaque handles created and released by their
 * dcps_*_create / dcps_*_free pairs. Buffers are row-major double arrays
 * owned by the caller.
 */
#ifndef DCPS_C_H
#define DCPS_C_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define DCPS_API __declspec(dllexport)
#else
#define DCPS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

enum dcps_status {
  DCPS_OK = 0,
  DCPS_ERR_INVALID_ARGUMENT = 1,
  DCPS_ERR_IO = 2,
  DCPS_ERR_NUMERIC = 3,
  DCPS_ERR_UNKNOWN = 4
};

typedef struct dcps_schedule dcps_schedule;
typedef struct dcps_mixture dcps_mixture;
typedef struct dcps_measurement dcps_measurement;
typedef struct dcps_posterior dcps_posterior;

/* Message for the most recent failure on this thread; empty string if none. */
DCPS_API const char* dcps_last_error(void);

/* --- noise schedules -------------------------------------------------- */

DCPS_API dcps_schedule* dcps_schedule_linear_beta(int n, double beta_min,
                                                  double beta_max);
/* alpha_bar holds n+1 values, alpha_bar[0] == 1. */
DCPS_API dcps_schedule* dcps_schedule_create(const double* alpha_bar, int n);
DCPS_API void dcps_schedule_free(dcps_schedule* s);
DCPS_API int dcps_schedule_steps(const dcps_schedule* s);
/* out must hold n+1 doubles. */
DCPS_API int dcps_schedule_alpha_bar(const dcps_schedule* s, double* out);

/* --- mixtures and measurements ---------------------------------------- */

DCPS_API dcps_mixture* dcps_mixture_create(int n_components, int dim,
                                           const double* means,
                                           const double* log_weights);
DCPS_API void dcps_mixture_free(dcps_mixture* m);
DCPS_API int dcps_mixture_sample(const dcps_mixture* m, int n_samples,
                                 uint64_t seed, double* out);

DCPS_API dcps_measurement* dcps_measurement_create(int obs_dim, int dim,
                                                   const double* A,
                                                   const double* y,
                                                   double sigma_y);
DCPS_API void dcps_measurement_free(dcps_measurement* m);

/* Closed-form posterior of a unit-covariance mixture prior under a linear
 * Gaussian observation. */
DCPS_API dcps_posterior* dcps_posterior_create(const dcps_mixture* prior,
                                               const dcps_measurement* mm);
DCPS_API void dcps_posterior_free(dcps_posterior* p);
DCPS_API int dcps_posterior_sample(const dcps_posterior* p, int n_samples,
                                   uint64_t seed, double* out);
DCPS_API int dcps_posterior_log_pdf(const dcps_posterior* p, const double* x,
                                    double* out);

/* --- samplers ---------------------------------------------------------- */

/* method: "dcps", "dps" or "pigdm"; options_json carries the method's
 * parameters (may be "" or "{}" for defaults). Draws n_samples posterior
 * samples into out (n_samples x dim, row-major). A sample that diverged is
 * returned as a row of NaN; *n_failed (optional) reports how many. */
DCPS_API int dcps_run_sampler(const char* method, const char* options_json,
                              const dcps_schedule* schedule,
                              const dcps_mixture* prior,
                              const dcps_measurement* mm, int n_samples,
                              uint64_t seed, double* out, int* n_failed);

/* --- evaluation --------------------------------------------------------- */

/* Sliced Wasserstein distance between two equal-size sample sets
 * (n x dim row-major). order is 1 or 2. */
DCPS_API int dcps_sliced_wasserstein(const double* x, const double* y, int n,
                                     int dim, int n_slices, int order,
                                     uint64_t seed, double* out);

/* --- experiment harness ------------------------------------------------- */

/* config_json is the experiment description (see README). master_seed < 0
 * keeps the seed from the config. jobs <= 0 uses DCPS_JOBS or 1. */
DCPS_API int dcps_run_experiment(const char* config_json, const char* out_dir,
                                 int64_t master_seed, int jobs);

/* Markdown table for a completed experiment directory. Caller frees the
 * returned string with dcps_string_free; NULL on error. */
DCPS_API char* dcps_render_table(const char* in_dir);

/* Contraction sweep; returns the CSV text (caller frees). options_json may
 * select {"grid":int,"x_per_cell":int,"n_samples":int,"seed":int}. */
DCPS_API char* dcps_propcheck(const char* options_json);

/* Scatter plot (SVG) of stored samples for one algorithm of a completed
 * experiment: reads <in_dir>/<dims>/<rep>/<algorithm>.bin and reference.bin.
 * dims_dir may be NULL to pick the first dims directory; replicate < 0
 * picks replicate 0. */
DCPS_API int dcps_emit_scatter(const char* in_dir, const char* dims_dir,
                               int replicate, const char* algorithm,
                               const char* out_path);

DCPS_API void dcps_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* DCPS_C_H */
