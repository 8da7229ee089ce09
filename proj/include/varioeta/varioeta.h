/*
 * C interface to the varioeta library.
 *
 * Objects are opaque handles created by *_create / *_run functions and
 * released with the matching *_destroy. Every fallible call returns a
 * ve_status; on failure ve_last_error() describes the problem for the
 * calling thread until its next failing call.
 */
#ifndef VARIOETA_VARIOETA_H
#define VARIOETA_VARIOETA_H

#include <stddef.h>
#include <stdint.h>

#if defined(VARIOETA_BUILDING_LIBRARY)
#define VE_API __attribute__((visibility("default")))
#else
#define VE_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ve_status {
  VE_OK = 0,
  VE_ERR_INVALID_ARGUMENT = 1,
  VE_ERR_DIMENSION_MISMATCH = 2,
  VE_ERR_NON_FINITE = 3,
  VE_ERR_UNDEFINED = 4,
  VE_ERR_DOMAIN = 5,
  VE_ERR_CONVERGENCE = 6,
  VE_ERR_DIVERGENCE = 7,
  VE_ERR_IO = 8,
  VE_ERR_INTERNAL = 9
} ve_status;

VE_API const char* ve_version(void);
VE_API const char* ve_status_string(ve_status status);
VE_API const char* ve_last_error(void);

/* ------------------------------------------------------------ moments */

typedef struct ve_accumulator ve_accumulator;

/* dim = 0 lets the first absorbed sample fix the dimension. */
VE_API ve_status ve_accumulator_create(size_t dim, ve_accumulator** out);
VE_API void ve_accumulator_destroy(ve_accumulator* acc);
VE_API ve_status ve_accumulator_absorb(ve_accumulator* acc, const double* gradient, size_t dim);
VE_API ve_status ve_accumulator_count(const ve_accumulator* acc, uint64_t* out);
/* Each writes dim values; dim must equal the accumulator's dimension. */
VE_API ve_status ve_accumulator_mean(const ve_accumulator* acc, double* out, size_t dim);
VE_API ve_status ve_accumulator_sample_variance(const ve_accumulator* acc, double* out, size_t dim);
VE_API ve_status ve_accumulator_population_variance(const ve_accumulator* acc, double* out, size_t dim);

/* sample_variance may be NULL; when it is not, length must be >= 2. */
VE_API ve_status ve_direct_moments(const double* history, size_t length, double* mean, double* sample_variance,
                                   double* population_variance);
VE_API ve_status ve_f_ratio(const double* history, size_t length, double* out);
VE_API ve_status ve_expected_perturbation(const double* history, size_t length, double eta, double* out);

/* -------------------------------------------------------- asymptotics */

typedef struct ve_complex {
  double re;
  double im;
} ve_complex;

/* Evaluators signal failure by returning a non-finite value. */
typedef ve_complex (*ve_evaluator_fn)(ve_complex z, void* user_data);

typedef struct ve_hankel_path {
  double truncation;
  double axis_offset;
  size_t arc_nodes;
  size_t leg_nodes;
  double tolerance;
} ve_hankel_path;

VE_API void ve_hankel_path_default(ve_hankel_path* path);

VE_API ve_status ve_asymptotic_variance(uint64_t n, double* out);
/* path may be NULL for the defaults. printed_exponent != 0 integrates
 * (-t)^(+s) instead of (-t)^(-s). */
VE_API ve_status ve_reciprocal_gamma_hankel(double s, const ve_hankel_path* path, int printed_exponent, double* out);
VE_API ve_status ve_gaussian_gf_eval(ve_complex z, double mu, double sigma, ve_complex* out);
/* on_cut may be NULL. */
VE_API ve_status ve_sigma2_closed_form(ve_complex z, ve_complex* out, int* on_cut);
VE_API ve_status ve_sigma2_ode_solution(ve_complex z, double c, double d, ve_complex* out);
VE_API ve_status ve_ode_residual(ve_evaluator_fn f, void* user_data, ve_complex z, double h, ve_complex* out);
/* imag_residual may be NULL. */
VE_API ve_status ve_cauchy_coefficient(ve_evaluator_fn f, void* user_data, unsigned n, double radius, size_t nodes,
                                       double* out, double* imag_residual);

/* --------------------------------------------------------- objectives */

typedef struct ve_objective ve_objective;

/* center may be NULL for the origin. */
VE_API ve_status ve_objective_quadratic(const double* lambdas, const double* center, size_t dim, double noise_scale,
                                        uint64_t dataset_size, uint64_t seed, ve_objective** out);
VE_API ve_status ve_objective_rosenbrock(ve_objective** out);
VE_API ve_status ve_objective_least_squares(size_t dim, uint64_t dataset_size, uint64_t seed, double noise,
                                            ve_objective** out);
VE_API void ve_objective_destroy(ve_objective* objective);
VE_API size_t ve_objective_dimension(const ve_objective* objective);
VE_API uint64_t ve_objective_dataset_size(const ve_objective* objective);
VE_API ve_status ve_objective_eval(const ve_objective* objective, const double* w, size_t dim, uint64_t pattern,
                                   double* out);
VE_API ve_status ve_objective_grad(const ve_objective* objective, const double* w, size_t dim, uint64_t pattern,
                                   double* out);
VE_API ve_status ve_objective_total_error(const ve_objective* objective, const double* w, size_t dim, double* out);
VE_API ve_status ve_fd_gradient(const ve_objective* objective, const double* w, size_t dim, uint64_t pattern,
                                double h, double* out);
VE_API ve_status ve_fd_hessian_diag(const ve_objective* objective, const double* w, size_t dim, double h,
                                    double* out);

/* ---------------------------------------------------------- optimizer */

typedef enum ve_method { VE_METHOD_SGD = 0, VE_METHOD_VARIOETA = 1 } ve_method;
typedef enum ve_variance_mode { VE_VARIANCE_RECURSIVE = 0, VE_VARIANCE_ASYMPTOTIC = 1 } ve_variance_mode;

typedef struct ve_method_config {
  ve_method method;
  ve_variance_mode variance_mode;
  double eta;
  double phi;
  uint64_t batch_size;
  double max_step; /* <= 0 disables the cap */
} ve_method_config;

VE_API void ve_method_config_default(ve_method_config* config);

typedef struct ve_trajectory_record {
  uint64_t step;
  double error;
  double w_norm;
  double update_norm;
} ve_trajectory_record;

/* One update of w (length dim) from batch_rows gradients stored row-major.
 * update_out (may be NULL) receives the applied update. */
VE_API ve_status ve_optimizer_step(const ve_method_config* config, double* w, size_t dim, const double* batch,
                                   size_t batch_rows, double* update_out);

typedef struct ve_run ve_run;

VE_API ve_status ve_optimizer_run(const ve_objective* objective, const ve_method_config* config,
                                  const double* initial_w, size_t dim, uint64_t steps, uint64_t seed,
                                  uint64_t record_every, ve_run** out);
VE_API void ve_run_destroy(ve_run* run);
VE_API size_t ve_run_record_count(const ve_run* run);
VE_API ve_status ve_run_record(const ve_run* run, size_t index, ve_trajectory_record* out);
VE_API ve_status ve_run_final_w(const ve_run* run, double* out, size_t dim);
/* Returns 1 and fills step (may be NULL) when the run diverged. */
VE_API int ve_run_diverged(const ve_run* run, uint64_t* step);

/* ------------------------------------------------------------ harness */

typedef struct ve_report ve_report;

typedef struct ve_fig2_params {
  const uint64_t* n_values; /* NULL or n_count == 0: default grid */
  size_t n_count;
  uint64_t trials;
  uint64_t seed;
  unsigned threads; /* 0: one per hardware thread */
} ve_fig2_params;

typedef struct ve_fig2_record {
  uint64_t n;
  uint64_t trials;
  double empirical_var;
  double asymptotic;
  double abs_error;
  double oracle_var;
} ve_fig2_record;

typedef enum ve_problem {
  VE_PROBLEM_QUADRATIC = 0,
  VE_PROBLEM_ROSENBROCK = 1,
  VE_PROBLEM_LEAST_SQUARES = 2
} ve_problem;

typedef struct ve_problem_spec {
  ve_problem kind;
  size_t dim;
  uint64_t dataset_size; /* 0: max(2000, 10 * largest batch) */
  double noise;
  uint64_t data_seed;
} ve_problem_spec;

VE_API void ve_problem_spec_default(ve_problem_spec* spec);

typedef struct ve_bench_params {
  ve_problem_spec problem;
  const char* const* method_names; /* sgd, varioeta, varioeta-asymptotic, sgd-rescaled */
  size_t method_count;
  ve_method_config base; /* eta, phi, batch_size, max_step shared by all methods */
  uint64_t steps;
  uint64_t seed;
  uint64_t record_every;
  int include_timing;
} ve_bench_params;

typedef struct ve_compare_params {
  ve_problem_spec problem;
  ve_method_config base;
  uint64_t steps;
  uint64_t seed;
  unsigned repeats;
  int include_timing;
} ve_compare_params;

VE_API ve_status ve_fig2_run(const ve_fig2_params* params, ve_report** out);
VE_API ve_status ve_bench_run(const ve_bench_params* params, ve_report** out);
VE_API ve_status ve_compare_run(const ve_compare_params* params, ve_report** out);
VE_API ve_status ve_gamma_check(const ve_hankel_path* path, int printed_exponent, ve_report** out);
VE_API ve_status ve_gf_check(ve_report** out);
VE_API ve_status ve_validate(int printed_exponent, ve_report** out);

VE_API void ve_report_destroy(ve_report* report);
/* CSV text owned by the report. */
VE_API const char* ve_report_csv(const ve_report* report);
VE_API ve_status ve_report_write_csv(const ve_report* report, const char* path);
VE_API size_t ve_report_row_count(const ve_report* report);
/* 1 when no check row failed; always 1 for non-check reports. */
VE_API int ve_report_passed(const ve_report* report);
/* Human-readable summary owned by the report. */
VE_API const char* ve_report_summary(const ve_report* report);
VE_API size_t ve_report_warning_count(const ve_report* report);
VE_API const char* ve_report_warning(const ve_report* report, size_t index);
/* Only for reports produced by ve_fig2_run. */
VE_API ve_status ve_report_fig2_record(const ve_report* report, size_t index, ve_fig2_record* out);

#ifdef __cplusplus
}
#endif

#endif /* VARIOETA_VARIOETA_H */
