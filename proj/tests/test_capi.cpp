// Exercises the shared library through the C header only.
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "varioeta/varioeta.h"

namespace {

ve_complex geometric(ve_complex z, void*) {
  // 1 / (1 - z)
  const double re = 1.0 - z.re, im = -z.im;
  const double d = re * re + im * im;
  return {re / d, -im / d};
}

ve_complex log_solution(ve_complex z, void* user) {
  ve_complex out{};
  ve_sigma2_ode_solution(z, *static_cast<double*>(user), 0.0, &out);
  return out;
}

ve_complex broken(ve_complex, void*) { return {NAN, 0.0}; }

}  // namespace

TEST_CASE("status strings and last error") {
  CHECK(std::string(ve_status_string(VE_OK)) == "ok");
  CHECK(std::strlen(ve_version()) > 0);
  double out = 0.0;
  CHECK(ve_asymptotic_variance(0, &out) == VE_ERR_INVALID_ARGUMENT);
  CHECK(std::strlen(ve_last_error()) > 0);
  CHECK(ve_asymptotic_variance(10, nullptr) == VE_ERR_INVALID_ARGUMENT);
}

TEST_CASE("accumulator handle") {
  ve_accumulator* acc = nullptr;
  REQUIRE(ve_accumulator_create(1, &acc) == VE_OK);
  double m = 0.0;
  CHECK(ve_accumulator_mean(acc, &m, 1) == VE_ERR_UNDEFINED);
  for (double g : {1.0, 2.0, 3.0}) REQUIRE(ve_accumulator_absorb(acc, &g, 1) == VE_OK);
  const double two[2] = {1.0, 2.0};
  CHECK(ve_accumulator_absorb(acc, two, 2) == VE_ERR_DIMENSION_MISMATCH);
  const double nan = NAN;
  CHECK(ve_accumulator_absorb(acc, &nan, 1) == VE_ERR_NON_FINITE);
  uint64_t count = 0;
  CHECK(ve_accumulator_count(acc, &count) == VE_OK);
  CHECK(count == 3);
  double v = 0.0, pv = 0.0;
  CHECK(ve_accumulator_mean(acc, &m, 1) == VE_OK);
  CHECK(ve_accumulator_sample_variance(acc, &v, 1) == VE_OK);
  CHECK(ve_accumulator_population_variance(acc, &pv, 1) == VE_OK);
  CHECK(m == doctest::Approx(2.0));
  CHECK(v == doctest::Approx(1.0));
  CHECK(pv == doctest::Approx(2.0 / 3.0));
  ve_accumulator_destroy(acc);
  ve_accumulator_destroy(nullptr);
  CHECK(ve_accumulator_count(nullptr, &count) == VE_ERR_INVALID_ARGUMENT);
}

TEST_CASE("moments free functions") {
  const double h[2] = {1.0, -1.0};
  double f = -1.0;
  CHECK(ve_f_ratio(h, 2, &f) == VE_OK);
  CHECK(f == 0.0);
  const double zeros[2] = {0.0, 0.0};
  CHECK(ve_f_ratio(zeros, 2, &f) == VE_ERR_UNDEFINED);
  const double h2[2] = {1.0, 3.0};
  double mean = 0, sv = 0, pv = 0, p = 0;
  CHECK(ve_direct_moments(h2, 2, &mean, &sv, &pv) == VE_OK);
  CHECK(mean == 2.0);
  CHECK(sv == 2.0);
  CHECK(pv == 1.0);
  CHECK(ve_expected_perturbation(h2, 2, 0.1, &p) == VE_OK);
  CHECK(p == doctest::Approx(-0.2));
}

TEST_CASE("asymptotics through callbacks") {
  double c = 0.0;
  CHECK(ve_cauchy_coefficient(geometric, nullptr, 5, 0.5, 512, &c, nullptr) == VE_OK);
  CHECK(c == doctest::Approx(1.0).epsilon(1e-12));
  double gamma = 0.5772156649015329;
  for (unsigned n = 1; n <= 20; ++n) {
    CHECK(ve_cauchy_coefficient(log_solution, &gamma, n, 0.6, 512, &c, nullptr) == VE_OK);
    CHECK(std::abs(c - gamma / n) < 1e-8);
  }
  CHECK(ve_cauchy_coefficient(broken, nullptr, 1, 0.5, 512, &c, nullptr) == VE_ERR_NON_FINITE);

  ve_complex r{};
  CHECK(ve_ode_residual(log_solution, &gamma, {0.2, 0.1}, 1e-3, &r) == VE_OK);
  CHECK(std::hypot(r.re, r.im) < 1e-6);

  ve_complex v{};
  int on_cut = 0;
  CHECK(ve_sigma2_closed_form({0.5, 0.0}, &v, &on_cut) == VE_OK);
  CHECK(on_cut == 1);
  CHECK(ve_sigma2_closed_form({1.0, 0.0}, &v, nullptr) == VE_ERR_DOMAIN);

  double g = 0.0;
  CHECK(ve_reciprocal_gamma_hankel(0.5, nullptr, 0, &g) == VE_OK);
  CHECK(std::abs(g - 0.5641895835477563) < 1e-6);
  ve_hankel_path path;
  ve_hankel_path_default(&path);
  CHECK(path.truncation == 40.0);
  path.axis_offset = 5.0;
  CHECK(ve_reciprocal_gamma_hankel(0.5, &path, 0, &g) == VE_ERR_INVALID_ARGUMENT);

  ve_complex e{};
  CHECK(ve_gaussian_gf_eval({0.0, 0.0}, 1.0, 1.0, &e) == VE_OK);
  CHECK(e.re == 1.0);
}

TEST_CASE("objective handles and gradient check") {
  ve_objective* q = nullptr;
  const double lambdas[2] = {3.0, 5.0};
  REQUIRE(ve_objective_quadratic(lambdas, nullptr, 2, 0.0, 4, 1, &q) == VE_OK);
  CHECK(ve_objective_dimension(q) == 2);
  CHECK(ve_objective_dataset_size(q) == 4);
  const double w[2] = {1.0, 1.0};
  double e = 0.0, g[2], fd[2], h[2];
  CHECK(ve_objective_eval(q, w, 2, 0, &e) == VE_OK);
  CHECK(e == doctest::Approx(4.0));
  CHECK(ve_objective_grad(q, w, 2, 0, g) == VE_OK);
  CHECK(ve_fd_gradient(q, w, 2, 0, 1e-6, fd) == VE_OK);
  CHECK(ve_fd_hessian_diag(q, w, 2, 1e-4, h) == VE_OK);
  for (int i = 0; i < 2; ++i) {
    CHECK(std::abs(g[i] - fd[i]) < 1e-8);
    CHECK(std::abs(h[i] - lambdas[i]) < 1e-5);
  }
  CHECK(ve_objective_eval(q, w, 3, 0, &e) == VE_ERR_DIMENSION_MISMATCH);
  CHECK(ve_objective_eval(q, w, 2, 4, &e) == VE_ERR_INVALID_ARGUMENT);
  ve_objective_destroy(q);

  ve_objective* r = nullptr;
  REQUIRE(ve_objective_rosenbrock(&r) == VE_OK);
  CHECK(ve_objective_total_error(r, w, 2, &e) == VE_OK);
  CHECK(e == 0.0);
  ve_objective_destroy(r);

  ve_objective* ls = nullptr;
  CHECK(ve_objective_least_squares(0, 10, 1, 0.1, &ls) == VE_ERR_INVALID_ARGUMENT);
  CHECK(ls == nullptr);
}

TEST_CASE("optimizer step and run") {
  ve_method_config cfg;
  ve_method_config_default(&cfg);
  CHECK(cfg.method == VE_METHOD_VARIOETA);
  CHECK(cfg.phi == 1e-6);
  cfg.eta = 0.1;
  cfg.phi = 0.0;
  cfg.batch_size = 2;
  double w = 0.0, update = 0.0;
  const double batch[2] = {1.0, 3.0};
  CHECK(ve_optimizer_step(&cfg, &w, 1, batch, 2, &update) == VE_OK);
  CHECK(w == doctest::Approx(-0.1 * 2.0 / std::sqrt(2.0)));
  CHECK(update == w);
  const double flat[2] = {2.0, 2.0};
  CHECK(ve_optimizer_step(&cfg, &w, 1, flat, 2, nullptr) == VE_ERR_DOMAIN);

  ve_objective* q = nullptr;
  const double lambdas[3] = {1.0, 2.0, 4.0};
  REQUIRE(ve_objective_quadratic(lambdas, nullptr, 3, 1.0, 1000, 7, &q) == VE_OK);
  ve_method_config_default(&cfg);
  cfg.eta = 0.01;
  cfg.batch_size = 16;
  const double w0[3] = {3.0, 3.0, 3.0};
  ve_run* run = nullptr;
  REQUIRE(ve_optimizer_run(q, &cfg, w0, 3, 200, 42, 50, &run) == VE_OK);
  CHECK(ve_run_record_count(run) == 5);
  ve_trajectory_record first{}, last{};
  CHECK(ve_run_record(run, 0, &first) == VE_OK);
  CHECK(ve_run_record(run, 4, &last) == VE_OK);
  CHECK(ve_run_record(run, 5, &last) == VE_ERR_INVALID_ARGUMENT);
  CHECK(last.step == 200);
  CHECK(last.error < first.error);
  double final_w[3];
  CHECK(ve_run_final_w(run, final_w, 3) == VE_OK);
  CHECK(ve_run_diverged(run, nullptr) == 0);
  ve_run_destroy(run);
  ve_objective_destroy(q);
}

TEST_CASE("harness reports") {
  const uint64_t ns[1] = {100};
  ve_fig2_params fp{ns, 1, 2000, 3, 2};
  ve_report* report = nullptr;
  REQUIRE(ve_fig2_run(&fp, &report) == VE_OK);
  CHECK(ve_report_row_count(report) == 1);
  ve_fig2_record rec{};
  CHECK(ve_report_fig2_record(report, 0, &rec) == VE_OK);
  CHECK(rec.n == 100);
  CHECK(rec.abs_error == std::abs(rec.empirical_var - rec.asymptotic));
  CHECK(std::string(ve_report_csv(report)).rfind("n,trials,empirical_var", 0) == 0);
  CHECK(ve_report_write_csv(report, "/nonexistent-dir/x.csv") == VE_ERR_IO);
  ve_report_destroy(report);

  const uint64_t bad[1] = {1};
  fp.n_values = bad;
  report = nullptr;
  CHECK(ve_fig2_run(&fp, &report) == VE_ERR_INVALID_ARGUMENT);
  CHECK(report == nullptr);

  ve_bench_params bp{};
  ve_problem_spec_default(&bp.problem);
  ve_method_config_default(&bp.base);
  const char* names[2] = {"sgd", "varioeta"};
  bp.method_names = names;
  bp.method_count = 2;
  bp.steps = 0;
  bp.seed = 1;
  bp.record_every = 1;
  REQUIRE(ve_bench_run(&bp, &report) == VE_OK);
  CHECK(std::string(ve_report_csv(report)) == "method,step,error,wall_time\n");
  ve_report_destroy(report);
  const char* unknown[1] = {"adam"};
  bp.method_names = unknown;
  bp.method_count = 1;
  CHECK(ve_bench_run(&bp, &report) == VE_ERR_INVALID_ARGUMENT);

  REQUIRE(ve_validate(0, &report) == VE_OK);
  CHECK(ve_report_passed(report) == 1);
  CHECK(std::strlen(ve_report_summary(report)) > 0);
  ve_report_destroy(report);
  REQUIRE(ve_gamma_check(nullptr, 1, &report) == VE_OK);
  CHECK(ve_report_passed(report) == 0);
  ve_report_destroy(report);
}
