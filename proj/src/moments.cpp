#include "varioeta/moments.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "varioeta/error.hpp"

namespace varioeta {

namespace {

void require_finite(std::span<const double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::non_finite, "gradient sample contains a non-finite entry");
  }
}

}  // namespace

MomentAccumulator::MomentAccumulator(std::size_t dimension)
    : mean_(dimension, 0.0), variance_(dimension, 0.0) {}

void MomentAccumulator::absorb(std::span<const double> g) {
  if (count_ == 0 && mean_.empty()) {
    mean_.assign(g.size(), 0.0);
    variance_.assign(g.size(), 0.0);
  }
  if (g.size() != mean_.size()) {
    throw Error(ErrorCode::dimension_mismatch,
                "gradient sample has dimension " + std::to_string(g.size()) + ", accumulator expects " +
                    std::to_string(mean_.size()));
  }
  require_finite(g);

  ++count_;
  const auto n = static_cast<double>(count_);
  const double b = 1.0 / n;
  if (count_ == 1) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      mean_[i] = g[i];
      variance_[i] = 0.0;
    }
    return;
  }
  const double a_prev = 1.0 - 1.0 / (n - 1.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double delta = g[i] - mean_[i];
    variance_[i] = a_prev * variance_[i] + b * delta * delta;
    mean_[i] = (1.0 - b) * mean_[i] + b * g[i];
  }
}

std::span<const double> MomentAccumulator::mean() const {
  if (count_ == 0) throw Error(ErrorCode::undefined, "mean of an empty accumulator");
  return mean_;
}

std::span<const double> MomentAccumulator::sample_variance() const {
  if (count_ < 2) throw Error(ErrorCode::undefined, "sample variance needs at least two samples");
  return variance_;
}

std::vector<double> MomentAccumulator::population_variance() const {
  const auto s = sample_variance();
  const auto n = static_cast<double>(count_);
  std::vector<double> out(s.begin(), s.end());
  for (double& v : out) v *= (n - 1.0) / n;
  return out;
}

void MomentAccumulator::reset() noexcept {
  count_ = 0;
  std::fill(mean_.begin(), mean_.end(), 0.0);
  std::fill(variance_.begin(), variance_.end(), 0.0);
}

DirectMoments direct_moments(std::span<const double> history) {
  if (history.empty()) throw Error(ErrorCode::undefined, "moments of an empty history");
  require_finite(history);
  const auto n = static_cast<double>(history.size());
  double sum = 0.0;
  for (double g : history) sum += g;
  DirectMoments out;
  out.mean = sum / n;
  double squares = 0.0;
  for (double g : history) squares += (g - out.mean) * (g - out.mean);
  out.population_variance = squares / n;
  if (history.size() >= 2) out.sample_variance = squares / (n - 1.0);
  return out;
}

DirectVectorMoments direct_moments(std::span<const GradientSample> history) {
  if (history.empty()) throw Error(ErrorCode::undefined, "moments of an empty history");
  const std::size_t dim = history.front().values.size();
  DirectVectorMoments out;
  out.mean.assign(dim, 0.0);
  out.population_variance.assign(dim, 0.0);
  for (const auto& s : history) {
    if (s.values.size() != dim) throw Error(ErrorCode::dimension_mismatch, "history mixes sample dimensions");
    require_finite(s.values);
    for (std::size_t i = 0; i < dim; ++i) out.mean[i] += s.values[i];
  }
  const auto n = static_cast<double>(history.size());
  for (double& m : out.mean) m /= n;
  for (const auto& s : history) {
    for (std::size_t i = 0; i < dim; ++i) {
      const double d = s.values[i] - out.mean[i];
      out.population_variance[i] += d * d;
    }
  }
  if (history.size() >= 2) {
    out.sample_variance = out.population_variance;
    for (double& v : out.sample_variance) v /= n - 1.0;
  }
  for (double& v : out.population_variance) v /= n;
  return out;
}

double f_ratio(std::span<const double> history) {
  if (history.empty()) throw Error(ErrorCode::undefined, "f ratio of an empty history");
  require_finite(history);
  double sum = 0.0;
  double squares = 0.0;
  for (double g : history) {
    sum += g;
    squares += g * g;
  }
  if (squares == 0.0) throw Error(ErrorCode::undefined, "f ratio of an all-zero history is 0/0");
  // Cauchy-Schwarz bounds the ratio by N; clamp away last-bit rounding.
  return std::min(sum * sum / squares, static_cast<double>(history.size()));
}

double expected_perturbation(std::span<const double> history, double eta) {
  if (!(eta > 0.0)) throw Error(ErrorCode::invalid_argument, "eta must be positive");
  if (history.size() < 2) throw Error(ErrorCode::undefined, "expected perturbation needs at least two gradients");
  const DirectMoments m = direct_moments(history);
  if (m.population_variance == 0.0) {
    throw Error(ErrorCode::undefined, "identical gradients: population variance is zero");
  }
  return -eta * m.mean / std::sqrt(m.population_variance);
}

double expected_perturbation_magnitude(double f, std::size_t length, double eta) {
  const auto n = static_cast<double>(length);
  if (!(f >= 0.0) || f >= n) throw Error(ErrorCode::undefined, "f ratio must lie in [0, N)");
  return eta / std::sqrt(n / f - 1.0);
}

}  // namespace varioeta
