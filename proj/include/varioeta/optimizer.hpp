#pragma once

// Vario-eta and plain SGD update rules, the optimization loop, and the
// second-order expected-error estimators.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "varioeta/moments.hpp"
#include "varioeta/objectives.hpp"
#include "varioeta/rng.hpp"

namespace varioeta {

enum class VarianceMode {
  recursive,   // batch sample standard deviation per coordinate
  asymptotic,  // sqrt(asymptotic_variance(N)) for every coordinate
};

const char* to_string(VarianceMode mode) noexcept;

struct VarioEtaConfig {
  double eta = 0.01;
  double phi = 1e-6;
  VarianceMode variance_mode = VarianceMode::recursive;
  std::size_t batch_size = 32;
  std::optional<double> max_step;  // sup-norm cap on each update

  /// Throws ErrorCode::invalid_argument for an unusable configuration.
  void validate() const;

  /// The per-coordinate denominator used in asymptotic mode.
  double asymptotic_scale() const;
};

struct OptimizerState {
  std::vector<double> w;
  std::size_t step_count = 0;
  std::vector<double> last_update;
};

struct TrajectoryRecord {
  std::size_t step = 0;
  double error = 0.0;
  double w_norm = 0.0;
  double update_norm = 0.0;
};

/// N per-pattern gradients stored row-major.
class GradientBatch {
 public:
  GradientBatch() = default;
  GradientBatch(std::size_t rows, std::size_t dimension);
  static GradientBatch from_samples(std::span<const GradientSample> samples);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t dimension() const noexcept { return dimension_; }
  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * dimension_, dimension_}; }
  std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * dimension_, dimension_}; }

  /// Plain column means.
  std::vector<double> mean() const;

 private:
  std::size_t rows_ = 0;
  std::size_t dimension_ = 0;
  std::vector<double> data_;
};

/// One vario-eta update: dw_i = -eta * mean_i / (s_i + phi), where s_i is the
/// batch sample standard deviation (recursive mode) or the asymptotic scale.
OptimizerState varioeta_step(OptimizerState state, const VarioEtaConfig& config, const GradientBatch& batch);
OptimizerState varioeta_step(OptimizerState state, const VarioEtaConfig& config,
                             std::span<const GradientSample> batch);

/// dw = -eta * mean gradient, optionally capped in sup-norm.
OptimizerState sgd_step(OptimizerState state, double eta, const GradientBatch& batch,
                        std::optional<double> max_step = std::nullopt);
OptimizerState sgd_step(OptimizerState state, double eta, std::span<const GradientSample> batch,
                        std::optional<double> max_step = std::nullopt);

enum class Method { sgd, varioeta };

/// SGD uses eta, batch_size and max_step from the config.
struct MethodConfig {
  Method method = Method::varioeta;
  VarioEtaConfig config;
};

struct Divergence {
  std::size_t step = 0;
  std::string message;
};

struct RunResult {
  std::vector<TrajectoryRecord> records;
  std::vector<double> record_seconds;  // wall time since start, per record
  OptimizerState final_state;
  std::optional<Divergence> divergence;
  std::uint64_t batch_fingerprint = 0;  // hash of every pattern index drawn
  double seconds = 0.0;
};

/// Samples N of the M patterns per step without replacement, reshuffling
/// the dataset at each epoch boundary.
class BatchSampler {
 public:
  BatchSampler(std::size_t dataset_size, std::size_t batch_size, std::uint64_t seed);
  std::span<const std::size_t> next();

 private:
  void reshuffle();

  RngStream rng_;
  std::size_t batch_size_;
  std::vector<std::size_t> order_;
  std::size_t cursor_;
};

/// Runs `steps` updates from initial_w. Records are taken at step 0, every
/// record_every steps and at the final step. Deterministic given seed.
RunResult run(const Objective& objective, const MethodConfig& method, std::span<const double> initial_w,
              std::size_t steps, std::uint64_t seed, std::size_t record_every = 1);

/// Default second-derivative step for the expected-error estimators.
inline constexpr double kExpectedErrorFdStep = 1e-5;

/// E(w) + (eta^2 / 2) sum_i sigma2_i d2E/dw_i^2.
double expected_error_simple(const Objective& objective, std::span<const double> w, double eta,
                             std::span<const double> sigma2, double fd_step = kExpectedErrorFdStep);

/// Second-order expansion of the mean error over the given perturbations:
/// E(w) + sum_i <dw_i> dE/dw_i + 1/2 sum_i <dw_i^2> d2E/dw_i^2
///      + sum_{i<j} <dw_i dw_j> d2E/dw_i dw_j,
/// with raw empirical moments and central-difference derivatives.
double expected_error_full(const Objective& objective, std::span<const double> w,
                           std::span<const std::vector<double>> perturbations,
                           double fd_step = kExpectedErrorFdStep);

}  // namespace varioeta
