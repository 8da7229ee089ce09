#include "varioeta/varioeta.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "varioeta/asymptotics.hpp"
#include "varioeta/error.hpp"
#include "varioeta/harness.hpp"
#include "varioeta/moments.hpp"
#include "varioeta/objectives.hpp"
#include "varioeta/optimizer.hpp"

struct ve_accumulator {
  varioeta::MomentAccumulator acc;
};

struct ve_objective {
  std::shared_ptr<const varioeta::Objective> objective;
};

struct ve_run {
  varioeta::RunResult result;
};

struct ve_report {
  std::string csv;
  std::string summary;
  std::vector<std::string> warnings;
  bool passed = true;
  std::size_t rows = 0;
  std::vector<varioeta::Fig2Record> fig2;
};

namespace {

using varioeta::Error;
using varioeta::ErrorCode;

thread_local std::string g_last_error;

ve_status status_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return VE_ERR_INVALID_ARGUMENT;
    case ErrorCode::dimension_mismatch: return VE_ERR_DIMENSION_MISMATCH;
    case ErrorCode::non_finite: return VE_ERR_NON_FINITE;
    case ErrorCode::undefined: return VE_ERR_UNDEFINED;
    case ErrorCode::domain: return VE_ERR_DOMAIN;
    case ErrorCode::convergence: return VE_ERR_CONVERGENCE;
    case ErrorCode::divergence: return VE_ERR_DIVERGENCE;
    case ErrorCode::io: return VE_ERR_IO;
  }
  return VE_ERR_INTERNAL;
}

ve_status fail(ve_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

// Runs body, translating exceptions into status codes.
template <typename F>
ve_status guarded(F&& body) noexcept {
  try {
    body();
    return VE_OK;
  } catch (const Error& e) {
    return fail(status_of(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(VE_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(VE_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(VE_ERR_INTERNAL, "unknown exception");
  }
}

void require(bool condition, const char* message) {
  if (!condition) throw Error(ErrorCode::invalid_argument, message);
}

std::span<const double> view(const double* data, std::size_t n) {
  require(data != nullptr || n == 0, "null array");
  return {data, n};
}

varioeta::Complex to_cpp(ve_complex z) { return {z.re, z.im}; }
ve_complex to_c(varioeta::Complex z) { return {z.real(), z.imag()}; }

varioeta::Evaluator wrap(ve_evaluator_fn f, void* user) {
  require(f != nullptr, "null evaluator");
  return [f, user](varioeta::Complex z) { return to_cpp(f(to_c(z), user)); };
}

varioeta::HankelPath to_cpp(const ve_hankel_path* path) {
  varioeta::HankelPath out;
  if (path != nullptr) {
    out.truncation = path->truncation;
    out.axis_offset = path->axis_offset;
    out.arc_nodes = path->arc_nodes;
    out.leg_nodes = path->leg_nodes;
    out.tolerance = path->tolerance;
  }
  return out;
}

varioeta::VarioEtaConfig to_cpp_config(const ve_method_config& c) {
  varioeta::VarioEtaConfig out;
  out.eta = c.eta;
  out.phi = c.phi;
  out.batch_size = static_cast<std::size_t>(c.batch_size);
  out.variance_mode =
      c.variance_mode == VE_VARIANCE_ASYMPTOTIC ? varioeta::VarianceMode::asymptotic : varioeta::VarianceMode::recursive;
  if (c.max_step > 0.0) out.max_step = c.max_step;
  return out;
}

varioeta::MethodConfig to_cpp(const ve_method_config& c) {
  return {c.method == VE_METHOD_SGD ? varioeta::Method::sgd : varioeta::Method::varioeta, to_cpp_config(c)};
}

varioeta::ProblemSpec to_cpp(const ve_problem_spec& p) {
  varioeta::ProblemSpec out;
  switch (p.kind) {
    case VE_PROBLEM_QUADRATIC: out.kind = varioeta::Problem::quadratic; break;
    case VE_PROBLEM_ROSENBROCK: out.kind = varioeta::Problem::rosenbrock; break;
    case VE_PROBLEM_LEAST_SQUARES: out.kind = varioeta::Problem::least_squares; break;
    default: throw Error(ErrorCode::invalid_argument, "unknown problem kind");
  }
  out.dim = p.dim;
  out.dataset_size = static_cast<std::size_t>(p.dataset_size);
  out.noise = p.noise;
  out.data_seed = p.data_seed;
  return out;
}

const varioeta::Objective& deref(const ve_objective* o) {
  require(o != nullptr && o->objective != nullptr, "null objective");
  return *o->objective;
}

template <typename Range>
void copy_out(const Range& values, double* out, std::size_t dim) {
  require(out != nullptr, "null output array");
  if (dim != values.size()) throw Error(ErrorCode::dimension_mismatch, "output array has wrong dimension");
  std::copy(values.begin(), values.end(), out);
}

void check_dim(const varioeta::Objective& o, std::size_t dim) {
  if (dim != o.dimension()) throw Error(ErrorCode::dimension_mismatch, "parameter vector has wrong dimension");
}

std::string check_summary(const varioeta::CheckReport& report) {
  // Passing rows live in the CSV; only failures and informational rows are echoed.
  std::string out;
  for (const auto& r : report.rows) {
    if (r.status == varioeta::CheckStatus::pass) continue;
    out += std::string(varioeta::to_string(r.status)) + "  " + r.check + " [" + r.parameter +
           "] expected=" + varioeta::format_real(r.expected) + " observed=" + varioeta::format_real(r.observed) +
           " abs_error=" + varioeta::format_real(r.abs_error) + "\n";
  }
  out += std::to_string(report.rows.size()) + " checks, " + std::to_string(report.failures()) + " failed\n";
  return out;
}

ve_report* check_report(const varioeta::CheckReport& report) {
  auto out = std::make_unique<ve_report>();
  out->csv = varioeta::check_table(report).to_string();
  out->summary = check_summary(report);
  out->passed = report.passed();
  out->rows = report.rows.size();
  return out.release();
}

}  // namespace

extern "C" {

const char* ve_version(void) { return "0.1.0"; }

const char* ve_status_string(ve_status status) {
  switch (status) {
    case VE_OK: return "ok";
    case VE_ERR_INVALID_ARGUMENT: return "invalid argument";
    case VE_ERR_DIMENSION_MISMATCH: return "dimension mismatch";
    case VE_ERR_NON_FINITE: return "non-finite value";
    case VE_ERR_UNDEFINED: return "undefined statistic";
    case VE_ERR_DOMAIN: return "domain error";
    case VE_ERR_CONVERGENCE: return "quadrature did not converge";
    case VE_ERR_DIVERGENCE: return "optimization diverged";
    case VE_ERR_IO: return "i/o error";
    case VE_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* ve_last_error(void) { return g_last_error.c_str(); }

// ---------------------------------------------------------------- moments

ve_status ve_accumulator_create(size_t dim, ve_accumulator** out) {
  return guarded([&] {
    require(out != nullptr, "null output handle");
    *out = new ve_accumulator{dim == 0 ? varioeta::MomentAccumulator() : varioeta::MomentAccumulator(dim)};
  });
}

void ve_accumulator_destroy(ve_accumulator* acc) { delete acc; }

ve_status ve_accumulator_absorb(ve_accumulator* acc, const double* gradient, size_t dim) {
  return guarded([&] {
    require(acc != nullptr, "null accumulator");
    acc->acc.absorb(view(gradient, dim));
  });
}

ve_status ve_accumulator_count(const ve_accumulator* acc, uint64_t* out) {
  return guarded([&] {
    require(acc != nullptr && out != nullptr, "null argument");
    *out = acc->acc.count();
  });
}

ve_status ve_accumulator_mean(const ve_accumulator* acc, double* out, size_t dim) {
  return guarded([&] {
    require(acc != nullptr, "null accumulator");
    copy_out(acc->acc.mean(), out, dim);
  });
}

ve_status ve_accumulator_sample_variance(const ve_accumulator* acc, double* out, size_t dim) {
  return guarded([&] {
    require(acc != nullptr, "null accumulator");
    copy_out(acc->acc.sample_variance(), out, dim);
  });
}

ve_status ve_accumulator_population_variance(const ve_accumulator* acc, double* out, size_t dim) {
  return guarded([&] {
    require(acc != nullptr, "null accumulator");
    copy_out(acc->acc.population_variance(), out, dim);
  });
}

ve_status ve_direct_moments(const double* history, size_t length, double* mean, double* sample_variance,
                            double* population_variance) {
  return guarded([&] {
    const auto m = varioeta::direct_moments(view(history, length));
    if (sample_variance != nullptr && !m.sample_variance) {
      throw Error(ErrorCode::undefined, "sample variance needs at least two samples");
    }
    if (mean != nullptr) *mean = m.mean;
    if (sample_variance != nullptr) *sample_variance = *m.sample_variance;
    if (population_variance != nullptr) *population_variance = m.population_variance;
  });
}

ve_status ve_f_ratio(const double* history, size_t length, double* out) {
  return guarded([&] {
    require(out != nullptr, "null output");
    *out = varioeta::f_ratio(view(history, length));
  });
}

ve_status ve_expected_perturbation(const double* history, size_t length, double eta, double* out) {
  return guarded([&] {
    require(out != nullptr, "null output");
    *out = varioeta::expected_perturbation(view(history, length), eta);
  });
}

// ------------------------------------------------------------ asymptotics

void ve_hankel_path_default(ve_hankel_path* path) {
  if (path == nullptr) return;
  const varioeta::HankelPath d;
  *path = {d.truncation, d.axis_offset, d.arc_nodes, d.leg_nodes, d.tolerance};
}

ve_status ve_asymptotic_variance(uint64_t n, double* out) {
  return guarded([&] {
    require(out != nullptr, "null output");
    *out = varioeta::asymptotic_variance(n);
  });
}

ve_status ve_reciprocal_gamma_hankel(double s, const ve_hankel_path* path, int printed_exponent, double* out) {
  return guarded([&] {
    require(out != nullptr, "null output");
    *out = varioeta::reciprocal_gamma_hankel(
        s, to_cpp(path), printed_exponent ? varioeta::HankelExponent::printed : varioeta::HankelExponent::standard);
  });
}

ve_status ve_gaussian_gf_eval(ve_complex z, double mu, double sigma, ve_complex* out) {
  return guarded([&] {
    require(out != nullptr, "null output");
    *out = to_c(varioeta::gaussian_gf_eval(to_cpp(z), mu, sigma));
  });
}

ve_status ve_sigma2_closed_form(ve_complex z, ve_complex* out, int* on_cut) {
  return guarded([&] {
    require(out != nullptr, "null output");
    const auto v = varioeta::sigma2_closed_form(to_cpp(z));
    *out = to_c(v.value);
    if (on_cut != nullptr) *on_cut = v.on_cut ? 1 : 0;
  });
}

ve_status ve_sigma2_ode_solution(ve_complex z, double c, double d, ve_complex* out) {
  return guarded([&] {
    require(out != nullptr, "null output");
    *out = to_c(varioeta::sigma2_ode_solution(to_cpp(z), c, d));
  });
}

ve_status ve_ode_residual(ve_evaluator_fn f, void* user_data, ve_complex z, double h, ve_complex* out) {
  return guarded([&] {
    require(out != nullptr, "null output");
    *out = to_c(varioeta::ode_residual(wrap(f, user_data), to_cpp(z), h));
  });
}

ve_status ve_cauchy_coefficient(ve_evaluator_fn f, void* user_data, unsigned n, double radius, size_t nodes,
                                double* out, double* imag_residual) {
  return guarded([&] {
    require(out != nullptr, "null output");
    const auto r = varioeta::cauchy_coefficient(wrap(f, user_data), n, {radius, nodes});
    *out = r.value;
    if (imag_residual != nullptr) *imag_residual = r.imag_residual;
  });
}

// ------------------------------------------------------------- objectives

ve_status ve_objective_quadratic(const double* lambdas, const double* center, size_t dim, double noise_scale,
                                 uint64_t dataset_size, uint64_t seed, ve_objective** out) {
  return guarded([&] {
    require(out != nullptr, "null output handle");
    const auto l = view(lambdas, dim);
    std::vector<double> c = center != nullptr ? std::vector<double>(center, center + dim) : std::vector<double>(dim);
    *out = new ve_objective{varioeta::make_quadratic(std::vector<double>(l.begin(), l.end()), std::move(c),
                                                     noise_scale, static_cast<std::size_t>(dataset_size), seed)};
  });
}

ve_status ve_objective_rosenbrock(ve_objective** out) {
  return guarded([&] {
    require(out != nullptr, "null output handle");
    *out = new ve_objective{varioeta::make_rosenbrock()};
  });
}

ve_status ve_objective_least_squares(size_t dim, uint64_t dataset_size, uint64_t seed, double noise,
                                     ve_objective** out) {
  return guarded([&] {
    require(out != nullptr, "null output handle");
    *out = new ve_objective{varioeta::make_least_squares(dim, static_cast<std::size_t>(dataset_size), seed, noise)};
  });
}

void ve_objective_destroy(ve_objective* objective) { delete objective; }

size_t ve_objective_dimension(const ve_objective* objective) {
  return objective != nullptr && objective->objective ? objective->objective->dimension() : 0;
}

uint64_t ve_objective_dataset_size(const ve_objective* objective) {
  return objective != nullptr && objective->objective ? objective->objective->dataset_size() : 0;
}

ve_status ve_objective_eval(const ve_objective* objective, const double* w, size_t dim, uint64_t pattern,
                            double* out) {
  return guarded([&] {
    require(out != nullptr, "null output");
    const auto& o = deref(objective);
    check_dim(o, dim);
    *out = o.eval(view(w, dim), static_cast<std::size_t>(pattern));
  });
}

ve_status ve_objective_grad(const ve_objective* objective, const double* w, size_t dim, uint64_t pattern,
                            double* out) {
  return guarded([&] {
    const auto& o = deref(objective);
    check_dim(o, dim);
    copy_out(o.grad(view(w, dim), static_cast<std::size_t>(pattern)), out, dim);
  });
}

ve_status ve_objective_total_error(const ve_objective* objective, const double* w, size_t dim, double* out) {
  return guarded([&] {
    require(out != nullptr, "null output");
    const auto& o = deref(objective);
    check_dim(o, dim);
    *out = o.total_error(view(w, dim));
  });
}

ve_status ve_fd_gradient(const ve_objective* objective, const double* w, size_t dim, uint64_t pattern, double h,
                         double* out) {
  return guarded([&] {
    const auto& o = deref(objective);
    check_dim(o, dim);
    copy_out(varioeta::fd_gradient(o, view(w, dim), static_cast<std::size_t>(pattern), h), out, dim);
  });
}

ve_status ve_fd_hessian_diag(const ve_objective* objective, const double* w, size_t dim, double h, double* out) {
  return guarded([&] {
    const auto& o = deref(objective);
    check_dim(o, dim);
    copy_out(varioeta::fd_hessian_diag(o, view(w, dim), h), out, dim);
  });
}

// -------------------------------------------------------------- optimizer

void ve_method_config_default(ve_method_config* config) {
  if (config == nullptr) return;
  const varioeta::VarioEtaConfig d;
  *config = {VE_METHOD_VARIOETA, VE_VARIANCE_RECURSIVE, d.eta, d.phi, d.batch_size, 0.0};
}

ve_status ve_optimizer_step(const ve_method_config* config, double* w, size_t dim, const double* batch,
                            size_t batch_rows, double* update_out) {
  return guarded([&] {
    require(config != nullptr && w != nullptr, "null argument");
    const auto method = to_cpp(*config);
    varioeta::GradientBatch g(batch_rows, dim);
    const auto flat = view(batch, batch_rows * dim);
    for (std::size_t r = 0; r < batch_rows; ++r) {
      std::copy(flat.begin() + static_cast<std::ptrdiff_t>(r * dim),
                flat.begin() + static_cast<std::ptrdiff_t>((r + 1) * dim), g.row(r).begin());
    }
    varioeta::OptimizerState state{std::vector<double>(w, w + dim), 0, std::vector<double>(dim, 0.0)};
    state = method.method == varioeta::Method::sgd
                ? varioeta::sgd_step(std::move(state), method.config.eta, g, method.config.max_step)
                : varioeta::varioeta_step(std::move(state), method.config, g);
    std::copy(state.w.begin(), state.w.end(), w);
    if (update_out != nullptr) std::copy(state.last_update.begin(), state.last_update.end(), update_out);
  });
}

ve_status ve_optimizer_run(const ve_objective* objective, const ve_method_config* config, const double* initial_w,
                           size_t dim, uint64_t steps, uint64_t seed, uint64_t record_every, ve_run** out) {
  return guarded([&] {
    require(config != nullptr && out != nullptr, "null argument");
    const auto& o = deref(objective);
    check_dim(o, dim);
    auto result = varioeta::run(o, to_cpp(*config), view(initial_w, dim), static_cast<std::size_t>(steps), seed,
                                static_cast<std::size_t>(record_every));
    *out = new ve_run{std::move(result)};
  });
}

void ve_run_destroy(ve_run* run) { delete run; }

size_t ve_run_record_count(const ve_run* run) { return run != nullptr ? run->result.records.size() : 0; }

ve_status ve_run_record(const ve_run* run, size_t index, ve_trajectory_record* out) {
  return guarded([&] {
    require(run != nullptr && out != nullptr, "null argument");
    require(index < run->result.records.size(), "record index out of range");
    const auto& r = run->result.records[index];
    *out = {r.step, r.error, r.w_norm, r.update_norm};
  });
}

ve_status ve_run_final_w(const ve_run* run, double* out, size_t dim) {
  return guarded([&] {
    require(run != nullptr, "null run");
    copy_out(run->result.final_state.w, out, dim);
  });
}

int ve_run_diverged(const ve_run* run, uint64_t* step) {
  if (run == nullptr || !run->result.divergence) return 0;
  if (step != nullptr) *step = run->result.divergence->step;
  return 1;
}

// ---------------------------------------------------------------- harness

void ve_problem_spec_default(ve_problem_spec* spec) {
  if (spec == nullptr) return;
  const varioeta::ProblemSpec d;
  *spec = {VE_PROBLEM_QUADRATIC, d.dim, d.dataset_size, d.noise, d.data_seed};
}

ve_status ve_fig2_run(const ve_fig2_params* params, ve_report** out) {
  return guarded([&] {
    require(params != nullptr && out != nullptr, "null argument");
    varioeta::Fig2Options options;
    if (params->n_values != nullptr && params->n_count > 0) {
      options.n_values.assign(params->n_values, params->n_values + params->n_count);
    }
    options.trials = params->trials;
    options.seed = params->seed;
    options.threads = params->threads;
    auto report = std::make_unique<ve_report>();
    report->fig2 = varioeta::fig2_experiment(options);
    report->csv = varioeta::fig2_table(report->fig2).to_string();
    report->rows = report->fig2.size();
    for (const auto& r : report->fig2) {
      report->summary += "n=" + std::to_string(r.n) + " empirical_var=" + varioeta::format_real(r.empirical_var) +
                         " asymptotic=" + varioeta::format_real(r.asymptotic) +
                         " abs_error=" + varioeta::format_real(r.abs_error) +
                         " oracle_var=" + varioeta::format_real(r.oracle_var) + "\n";
    }
    *out = report.release();
  });
}

ve_status ve_bench_run(const ve_bench_params* params, ve_report** out) {
  return guarded([&] {
    require(params != nullptr && out != nullptr, "null argument");
    require(params->method_names != nullptr && params->method_count > 0, "bench needs at least one method");
    const auto base = to_cpp_config(params->base);
    std::vector<varioeta::MethodSpec> methods;
    for (std::size_t k = 0; k < params->method_count; ++k) {
      require(params->method_names[k] != nullptr, "null method name");
      methods.push_back(varioeta::method_from_name(params->method_names[k], base));
    }
    const auto result = varioeta::bench_run(to_cpp(params->problem), methods, static_cast<std::size_t>(params->steps),
                                            params->seed, static_cast<std::size_t>(params->record_every));
    auto report = std::make_unique<ve_report>();
    report->csv = varioeta::bench_table(result, params->include_timing != 0).to_string();
    report->rows = result.records.size();
    report->warnings = result.warnings;
    for (const auto& m : methods) {
      const varioeta::BenchRecord* last = nullptr;
      for (const auto& r : result.records) {
        if (r.method == m.tag) last = &r;
      }
      if (last != nullptr) {
        report->summary += m.tag + ": step " + std::to_string(last->step) +
                           " error=" + varioeta::format_real(last->error) + "\n";
      }
    }
    *out = report.release();
  });
}

ve_status ve_compare_run(const ve_compare_params* params, ve_report** out) {
  return guarded([&] {
    require(params != nullptr && out != nullptr, "null argument");
    const auto result = varioeta::mode_compare(to_cpp(params->problem), to_cpp_config(params->base),
                                               static_cast<std::size_t>(params->steps), params->seed, params->repeats);
    auto report = std::make_unique<ve_report>();
    report->csv = varioeta::compare_table(result, params->include_timing != 0).to_string();
    report->rows = 2;
    report->warnings = result.warnings;
    for (const auto* s : {&result.recursive, &result.asymptotic}) {
      report->summary += std::string(varioeta::to_string(s->mode)) +
                         ": per_step_seconds=" + varioeta::format_real(s->per_step_seconds) +
                         " final_error=" + varioeta::format_real(s->final_error) + "\n";
    }
    *out = report.release();
  });
}

ve_status ve_gamma_check(const ve_hankel_path* path, int printed_exponent, ve_report** out) {
  return guarded([&] {
    require(out != nullptr, "null output handle");
    *out = check_report(varioeta::gamma_check(
        to_cpp(path), printed_exponent ? varioeta::HankelExponent::printed : varioeta::HankelExponent::standard));
  });
}

ve_status ve_gf_check(ve_report** out) {
  return guarded([&] {
    require(out != nullptr, "null output handle");
    *out = check_report(varioeta::gf_check());
  });
}

ve_status ve_validate(int printed_exponent, ve_report** out) {
  return guarded([&] {
    require(out != nullptr, "null output handle");
    *out = check_report(varioeta::validate_suite(printed_exponent ? varioeta::HankelExponent::printed
                                                                  : varioeta::HankelExponent::standard));
  });
}

void ve_report_destroy(ve_report* report) { delete report; }

const char* ve_report_csv(const ve_report* report) { return report != nullptr ? report->csv.c_str() : ""; }

ve_status ve_report_write_csv(const ve_report* report, const char* path) {
  return guarded([&] {
    require(report != nullptr && path != nullptr, "null argument");
    std::FILE* file = std::fopen(path, "wb");
    if (file == nullptr) throw Error(ErrorCode::io, std::string("cannot open '") + path + "' for writing");
    const std::size_t written = std::fwrite(report->csv.data(), 1, report->csv.size(), file);
    const bool closed = std::fclose(file) == 0;
    if (written != report->csv.size() || !closed) throw Error(ErrorCode::io, std::string("failed writing '") + path + "'");
  });
}

size_t ve_report_row_count(const ve_report* report) { return report != nullptr ? report->rows : 0; }

int ve_report_passed(const ve_report* report) { return report != nullptr && report->passed ? 1 : 0; }

const char* ve_report_summary(const ve_report* report) { return report != nullptr ? report->summary.c_str() : ""; }

size_t ve_report_warning_count(const ve_report* report) { return report != nullptr ? report->warnings.size() : 0; }

const char* ve_report_warning(const ve_report* report, size_t index) {
  if (report == nullptr || index >= report->warnings.size()) return nullptr;
  return report->warnings[index].c_str();
}

ve_status ve_report_fig2_record(const ve_report* report, size_t index, ve_fig2_record* out) {
  return guarded([&] {
    require(report != nullptr && out != nullptr, "null argument");
    require(index < report->fig2.size(), "fig2 record index out of range");
    const auto& r = report->fig2[index];
    *out = {r.n, r.trials, r.empirical_var, r.asymptotic, r.abs_error, r.oracle_var};
  });
}

}  // extern "C"
