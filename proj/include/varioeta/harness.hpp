#pragma once

// Experiments behind the command-line tool: the averaged-uniform variance
// study, optimizer benchmarks, variance-mode comparison and the numerical
// check suites.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "varioeta/asymptotics.hpp"
#include "varioeta/csv.hpp"
#include "varioeta/objectives.hpp"
#include "varioeta/optimizer.hpp"

namespace varioeta {

// ------------------------------------------------------------------ fig2

struct Fig2Record {
  std::uint64_t n = 0;
  std::uint64_t trials = 0;
  double empirical_var = 0.0;  // sample variance of the trial averages
  double asymptotic = 0.0;     // asymptotic_variance(n)
  double abs_error = 0.0;      // |empirical_var - asymptotic|
  double oracle_var = 0.0;     // 1 / (12 n)
};

inline const std::vector<std::uint64_t> kFig2DefaultGrid{500, 1000, 5000, 10000, 49500, 100000, 1000000};

struct Fig2Options {
  std::vector<std::uint64_t> n_values = kFig2DefaultGrid;
  std::uint64_t trials = 100000;
  std::uint64_t seed = 42;
  unsigned threads = 0;  // 0: one per hardware thread
};

/// Key of the uniform stream behind one trial: derive_key(derive_key(seed, n), trial).
std::uint64_t fig2_trial_key(std::uint64_t seed, std::uint64_t n, std::uint64_t trial) noexcept;

/// Average of n uniform[0, 1) variates for one trial.
double fig2_trial_average(std::uint64_t seed, std::uint64_t n, std::uint64_t trial) noexcept;

/// Requires n >= 2 for every grid point and trials >= 1000. The result does
/// not depend on the thread count.
std::vector<Fig2Record> fig2_experiment(const Fig2Options& options);

CsvTable fig2_table(std::span<const Fig2Record> records);

// --------------------------------------------------------------- problems

enum class Problem { quadratic, rosenbrock, least_squares };

const char* to_string(Problem problem) noexcept;
std::optional<Problem> parse_problem(std::string_view name) noexcept;

struct ProblemSpec {
  Problem kind = Problem::quadratic;
  std::size_t dim = 4;
  std::size_t dataset_size = 0;  // 0: max(2000, 10 * largest batch); Rosenbrock always has 1
  double noise = 1.0;
  std::uint64_t data_seed = 7;
};

struct ProblemInstance {
  std::shared_ptr<const Objective> objective;
  std::vector<double> initial_w;
};

ProblemInstance make_problem(const ProblemSpec& spec, std::size_t largest_batch);

/// Warning text when batch > dataset / 10 (stochastic approximation wants
/// M >> N); ErrorCode::invalid_argument when batch > dataset.
std::optional<std::string> robbins_monro_check(std::size_t batch_size, std::size_t dataset_size);

// ------------------------------------------------------------------ bench

struct MethodSpec {
  std::string tag;
  MethodConfig method;
};

/// Named methods: "sgd", "varioeta" (recursive variance),
/// "varioeta-asymptotic", and "sgd-rescaled" (SGD with rate
/// eta / (sqrt(v_N) + phi), the exact counterpart of varioeta-asymptotic).
MethodSpec method_from_name(std::string_view name, const VarioEtaConfig& base);

struct BenchRecord {
  std::string method;
  std::size_t step = 0;
  double error = 0.0;
  double wall_time = 0.0;
};

struct BenchResult {
  std::vector<BenchRecord> records;
  std::vector<std::string> warnings;
  std::vector<std::pair<std::string, Divergence>> divergences;
};

/// Every method sees the same batch sequence (same seed). A diverging method
/// is reported and the remaining methods still run. Zero steps yields no
/// records.
BenchResult bench_run(const ProblemSpec& problem, std::span<const MethodSpec> methods, std::size_t steps,
                      std::uint64_t seed, std::size_t record_every = 1);

/// wall_time is written as 0 when include_timing is false.
CsvTable bench_table(const BenchResult& result, bool include_timing = true);

// ---------------------------------------------------------------- compare

struct ModeSummary {
  VarianceMode mode = VarianceMode::recursive;
  std::size_t steps = 0;
  std::size_t batch_size = 0;
  double per_step_seconds = 0.0;  // best of the repeats
  double final_error = 0.0;
  std::uint64_t batch_fingerprint = 0;
};

struct CompareResult {
  ModeSummary recursive;
  ModeSummary asymptotic;
  std::vector<std::string> warnings;
};

CompareResult mode_compare(const ProblemSpec& problem, const VarioEtaConfig& config, std::size_t steps,
                           std::uint64_t seed, unsigned repeats = 3);

CsvTable compare_table(const CompareResult& result, bool include_timing = true);

// ----------------------------------------------------------------- checks

enum class CheckStatus { pass, fail, info };

const char* to_string(CheckStatus status) noexcept;

struct CheckRow {
  std::string check;
  std::string parameter;
  double expected = 0.0;
  double observed = 0.0;
  double abs_error = 0.0;
  double tolerance = 0.0;
  CheckStatus status = CheckStatus::pass;
};

struct CheckReport {
  std::vector<CheckRow> rows;

  /// Adds a row that passes when |observed - expected| <= tolerance.
  void expect_near(std::string check, std::string parameter, double expected, double observed, double tolerance);
  void inform(std::string check, std::string parameter, double expected, double observed);
  void append(const CheckReport& other);

  bool passed() const noexcept;
  std::size_t failures() const noexcept;
};

/// 1/Gamma(s) at s = 0, 0.5, 1, 2, 3 and stability under doubling T and
/// halving delta.
CheckReport gamma_check(const HankelPath& path = {}, HankelExponent exponent = HankelExponent::standard);

/// Cauchy coefficient extraction, ODE residuals and asymptotic-variance
/// properties. The closed-form residual row is informational.
CheckReport gf_check();

/// Recursive-vs-direct moments and f ratio bounds on seeded random data.
CheckReport moments_check(std::uint64_t seed = 2024);

CheckReport validate_suite(HankelExponent exponent = HankelExponent::standard);

CsvTable check_table(const CheckReport& report);

}  // namespace varioeta
