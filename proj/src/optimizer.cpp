#include "varioeta/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "varioeta/asymptotics.hpp"
#include "varioeta/error.hpp"

namespace varioeta {

namespace {

double l2_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

void apply_update(OptimizerState& state, std::vector<double> update, std::optional<double> max_step) {
  if (max_step) {
    double sup = 0.0;
    for (double d : update) sup = std::max(sup, std::abs(d));
    if (sup > *max_step) {
      const double shrink = *max_step / sup;
      for (double& d : update) d *= shrink;
    }
  }
  for (std::size_t i = 0; i < update.size(); ++i) {
    if (!std::isfinite(update[i]) || !std::isfinite(state.w[i] + update[i])) {
      throw Error(ErrorCode::non_finite, "update produced a non-finite parameter");
    }
  }
  for (std::size_t i = 0; i < update.size(); ++i) state.w[i] += update[i];
  state.last_update = std::move(update);
  ++state.step_count;
}

void check_batch(const OptimizerState& state, const GradientBatch& batch, std::size_t expected_rows) {
  if (batch.rows() != expected_rows) {
    throw Error(ErrorCode::invalid_argument, "batch has " + std::to_string(batch.rows()) + " gradients, expected " +
                                                 std::to_string(expected_rows));
  }
  if (batch.dimension() != state.w.size()) {
    throw Error(ErrorCode::dimension_mismatch, "gradient dimension does not match the parameter vector");
  }
  for (std::size_t r = 0; r < batch.rows(); ++r) {
    for (double g : batch.row(r)) {
      if (!std::isfinite(g)) throw Error(ErrorCode::non_finite, "batch contains a non-finite gradient");
    }
  }
}

}  // namespace

const char* to_string(VarianceMode mode) noexcept {
  return mode == VarianceMode::recursive ? "recursive" : "asymptotic";
}

void VarioEtaConfig::validate() const {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw Error(ErrorCode::invalid_argument, "eta must be positive");
  if (!(phi >= 0.0) || !std::isfinite(phi)) throw Error(ErrorCode::invalid_argument, "phi must be non-negative");
  if (batch_size < 1) throw Error(ErrorCode::invalid_argument, "batch size must be at least 1");
  if (max_step && !(*max_step > 0.0)) throw Error(ErrorCode::invalid_argument, "max_step must be positive");
  if (variance_mode == VarianceMode::recursive && batch_size < 2) {
    throw Error(ErrorCode::invalid_argument, "recursive variance mode needs batch size >= 2");
  }
  if (variance_mode == VarianceMode::asymptotic) (void)asymptotic_scale();
}

double VarioEtaConfig::asymptotic_scale() const {
  const double v = asymptotic_variance(batch_size);
  if (!(v > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "asymptotic variance at N = " + std::to_string(batch_size) +
                                                 " is not positive; asymptotic mode needs N >= 3");
  }
  return std::sqrt(v);
}

GradientBatch::GradientBatch(std::size_t rows, std::size_t dimension)
    : rows_(rows), dimension_(dimension), data_(rows * dimension, 0.0) {}

GradientBatch GradientBatch::from_samples(std::span<const GradientSample> samples) {
  const std::size_t dim = samples.empty() ? 0 : samples.front().values.size();
  GradientBatch batch(samples.size(), dim);
  for (std::size_t r = 0; r < samples.size(); ++r) {
    if (samples[r].values.size() != dim) throw Error(ErrorCode::dimension_mismatch, "batch mixes sample dimensions");
    std::copy(samples[r].values.begin(), samples[r].values.end(), batch.row(r).begin());
  }
  return batch;
}

std::vector<double> GradientBatch::mean() const {
  std::vector<double> m(dimension_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r) {
    const auto g = row(r);
    for (std::size_t i = 0; i < dimension_; ++i) m[i] += g[i];
  }
  for (double& v : m) v /= static_cast<double>(rows_);
  return m;
}

OptimizerState varioeta_step(OptimizerState state, const VarioEtaConfig& config, const GradientBatch& batch) {
  config.validate();
  check_batch(state, batch, config.batch_size);
  const std::size_t m = state.w.size();
  std::vector<double> update(m);

  if (config.variance_mode == VarianceMode::asymptotic) {
    // A single scalar denominator: the step is SGD with a rescaled rate.
    const double rate = config.eta / (config.asymptotic_scale() + config.phi);
    const std::vector<double> mean = batch.mean();
    for (std::size_t i = 0; i < m; ++i) update[i] = -rate * mean[i];
  } else {
    MomentAccumulator acc(m);
    for (std::size_t r = 0; r < batch.rows(); ++r) acc.absorb(batch.row(r));
    const auto mean = acc.mean();
    const auto variance = acc.sample_variance();
    for (std::size_t i = 0; i < m; ++i) {
      const double denominator = std::sqrt(variance[i]) + config.phi;
      if (denominator == 0.0) {
        throw Error(ErrorCode::domain, "gradient spread of coordinate " + std::to_string(i) +
                                           " is zero and phi = 0; the vario-eta step is undefined");
      }
      update[i] = -config.eta * mean[i] / denominator;
    }
  }
  apply_update(state, std::move(update), config.max_step);
  return state;
}

OptimizerState varioeta_step(OptimizerState state, const VarioEtaConfig& config,
                             std::span<const GradientSample> batch) {
  return varioeta_step(std::move(state), config, GradientBatch::from_samples(batch));
}

OptimizerState sgd_step(OptimizerState state, double eta, const GradientBatch& batch, std::optional<double> max_step) {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw Error(ErrorCode::invalid_argument, "eta must be positive");
  if (batch.rows() == 0) throw Error(ErrorCode::invalid_argument, "empty batch");
  check_batch(state, batch, batch.rows());
  const std::vector<double> mean = batch.mean();
  std::vector<double> update(mean.size());
  for (std::size_t i = 0; i < mean.size(); ++i) update[i] = -eta * mean[i];
  apply_update(state, std::move(update), max_step);
  return state;
}

OptimizerState sgd_step(OptimizerState state, double eta, std::span<const GradientSample> batch,
                        std::optional<double> max_step) {
  return sgd_step(std::move(state), eta, GradientBatch::from_samples(batch), max_step);
}

// -------------------------------------------------------------------- loop

BatchSampler::BatchSampler(std::size_t dataset_size, std::size_t batch_size, std::uint64_t seed)
    : rng_(seed, 0), batch_size_(batch_size), order_(dataset_size), cursor_(dataset_size) {
  if (batch_size == 0 || batch_size > dataset_size) {
    throw Error(ErrorCode::invalid_argument, "batch size must be in [1, dataset size]");
  }
  std::iota(order_.begin(), order_.end(), std::size_t{0});
}

void BatchSampler::reshuffle() {
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  rng_.shuffle(std::span<std::size_t>(order_));
  cursor_ = 0;
}

std::span<const std::size_t> BatchSampler::next() {
  if (order_.size() - cursor_ < batch_size_) reshuffle();
  std::span<const std::size_t> out(order_.data() + cursor_, batch_size_);
  cursor_ += batch_size_;
  return out;
}

RunResult run(const Objective& objective, const MethodConfig& method, std::span<const double> initial_w,
              std::size_t steps, std::uint64_t seed, std::size_t record_every) {
  const VarioEtaConfig& config = method.config;
  if (method.method == Method::varioeta) {
    config.validate();
  } else if (!(config.eta > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "eta must be positive");
  }
  if (initial_w.size() != objective.dimension()) {
    throw Error(ErrorCode::dimension_mismatch, "initial point has wrong dimension");
  }
  if (config.batch_size > objective.dataset_size()) {
    throw Error(ErrorCode::invalid_argument, "batch size exceeds dataset size");
  }
  if (record_every == 0) record_every = 1;

  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  const auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - start).count(); };

  RunResult result;
  OptimizerState state{std::vector<double>(initial_w.begin(), initial_w.end()), 0,
                       std::vector<double>(initial_w.size(), 0.0)};

  const auto record = [&]() -> bool {
    const double e = objective.total_error(state.w);
    if (!std::isfinite(e)) {
      result.divergence = Divergence{state.step_count, "total error is not finite"};
      return false;
    }
    result.records.push_back({state.step_count, e, l2_norm(state.w), l2_norm(state.last_update)});
    result.record_seconds.push_back(elapsed());
    return true;
  };

  if (record()) {
    BatchSampler sampler(objective.dataset_size(), config.batch_size, seed);
    GradientBatch batch(config.batch_size, objective.dimension());
    std::uint64_t fingerprint = 0;
    for (std::size_t step = 1; step <= steps; ++step) {
      const auto indices = sampler.next();
      for (std::size_t r = 0; r < indices.size(); ++r) {
        fingerprint = mix64(fingerprint ^ (indices[r] + kGoldenGamma));
      }
      try {
        for (std::size_t r = 0; r < indices.size(); ++r) objective.grad(state.w, indices[r], batch.row(r));
        state = method.method == Method::varioeta ? varioeta_step(std::move(state), config, batch)
                                                  : sgd_step(std::move(state), config.eta, batch, config.max_step);
      } catch (const Error& e) {
        result.divergence = Divergence{step, e.what()};
        break;
      }
      if ((step % record_every == 0 || step == steps) && !record()) break;
    }
    result.batch_fingerprint = fingerprint;
  }
  result.final_state = std::move(state);
  result.seconds = elapsed();
  return result;
}

// -------------------------------------------------- expected-error estimates

double expected_error_simple(const Objective& objective, std::span<const double> w, double eta,
                             std::span<const double> sigma2, double fd_step) {
  if (sigma2.size() != w.size()) throw Error(ErrorCode::dimension_mismatch, "sigma2 dimension");
  for (double s : sigma2) {
    if (!(s >= 0.0)) throw Error(ErrorCode::invalid_argument, "variances must be non-negative");
  }
  const double base = objective.total_error(w);
  if (!std::isfinite(base)) throw Error(ErrorCode::non_finite, "objective evaluation is not finite");
  if (std::all_of(sigma2.begin(), sigma2.end(), [](double s) { return s == 0.0; })) return base;
  const std::vector<double> curvature = fd_hessian_diag(objective, w, fd_step);
  double noise = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) noise += sigma2[i] * curvature[i];
  return base + 0.5 * eta * eta * noise;
}

double expected_error_full(const Objective& objective, std::span<const double> w,
                           std::span<const std::vector<double>> perturbations, double fd_step) {
  if (perturbations.size() < 2) throw Error(ErrorCode::invalid_argument, "need at least two perturbations");
  if (!(fd_step > 0.0)) throw Error(ErrorCode::invalid_argument, "finite-difference step must be positive");
  const std::size_t m = w.size();
  const auto count = static_cast<double>(perturbations.size());

  std::vector<double> first(m, 0.0);
  std::vector<double> second(m * m, 0.0);
  for (const auto& dw : perturbations) {
    if (dw.size() != m) throw Error(ErrorCode::dimension_mismatch, "perturbation dimension");
    for (std::size_t i = 0; i < m; ++i) {
      first[i] += dw[i];
      for (std::size_t j = i; j < m; ++j) second[i * m + j] += dw[i] * dw[j];
    }
  }
  for (double& v : first) v /= count;
  for (double& v : second) v /= count;

  std::vector<double> x(w.begin(), w.end());
  const auto eval = [&] {
    const double e = objective.total_error(x);
    if (!std::isfinite(e)) throw Error(ErrorCode::non_finite, "objective evaluation is not finite");
    return e;
  };
  std::vector<double> h(m);
  for (std::size_t i = 0; i < m; ++i) h[i] = fd_step * std::max(1.0, std::abs(w[i]));

  const double base = eval();
  double total = base;
  for (std::size_t i = 0; i < m; ++i) {
    x[i] = w[i] + h[i];
    const double up = eval();
    x[i] = w[i] - h[i];
    const double down = eval();
    x[i] = w[i];
    const double slope = (up - down) / (2.0 * h[i]);
    const double curvature = (up - 2.0 * base + down) / (h[i] * h[i]);
    total += first[i] * slope + 0.5 * second[i * m + i] * curvature;
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      if (second[i * m + j] == 0.0) continue;
      double corners[4];
      int k = 0;
      for (double si : {1.0, -1.0}) {
        for (double sj : {1.0, -1.0}) {
          x[i] = w[i] + si * h[i];
          x[j] = w[j] + sj * h[j];
          corners[k++] = eval();
        }
      }
      x[i] = w[i];
      x[j] = w[j];
      const double mixed = (corners[0] - corners[1] - corners[2] + corners[3]) / (4.0 * h[i] * h[j]);
      total += second[i * m + j] * mixed;
    }
  }
  return total;
}

}  // namespace varioeta
