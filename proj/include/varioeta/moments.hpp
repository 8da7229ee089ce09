#pragma once

// Per-coordinate running statistics of error gradients.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace varioeta {

/// Per-parameter partial derivatives of one pattern's error.
struct GradientSample {
  std::vector<double> values;
  std::size_t pattern_index = 0;
};

/// Running mean and sample variance of a vector-valued stream.
///
/// After n samples the mean is
///   mean_n = (1 - 1/n) mean_{n-1} + (1/n) g_n
/// and, for n >= 2, the sample variance (divisor n - 1) is
///   var_n = (1 - 1/(n-1)) var_{n-1} + (1/n) (g_n - mean_{n-1})^2.
/// The mean is undefined at n = 0 and the variance undefined for n < 2;
/// querying either raises ErrorCode::undefined.
class MomentAccumulator {
 public:
  MomentAccumulator() = default;
  explicit MomentAccumulator(std::size_t dimension);

  /// Folds one sample in. The first sample fixes the dimension of an
  /// accumulator constructed without one.
  void absorb(std::span<const double> g);
  void absorb(const GradientSample& g) { absorb(g.values); }

  std::size_t count() const noexcept { return count_; }
  std::size_t dimension() const noexcept { return mean_.size(); }

  std::span<const double> mean() const;
  std::span<const double> sample_variance() const;
  /// sample_variance * (n - 1) / n.
  std::vector<double> population_variance() const;

  void reset() noexcept;

 private:
  std::size_t count_ = 0;
  std::vector<double> mean_;
  std::vector<double> variance_;
};

struct DirectMoments {
  double mean = 0.0;
  std::optional<double> sample_variance;  // absent for a single sample
  double population_variance = 0.0;
};

/// Two-pass textbook moments of a scalar history.
DirectMoments direct_moments(std::span<const double> history);

struct DirectVectorMoments {
  std::vector<double> mean;
  std::vector<double> sample_variance;  // empty for a single sample
  std::vector<double> population_variance;
};

/// Coordinate-wise two-pass moments of a sample history.
DirectVectorMoments direct_moments(std::span<const GradientSample> history);

/// Concentration ratio (sum g)^2 / sum g^2 of one coordinate's history.
/// Lies in [0, N]; equals N exactly when all entries are equal and nonzero.
/// An all-zero history is an error (0/0).
double f_ratio(std::span<const double> history);

/// Expected parameter perturbation -eta <g> / sigma(g) using population
/// moments (divisor N). Errors when the population variance is zero.
double expected_perturbation(std::span<const double> history, double eta);

/// Magnitude of the expected perturbation written through the
/// concentration ratio: eta / sqrt(N / f - 1).
double expected_perturbation_magnitude(double f, std::size_t length, double eta);

}  // namespace varioeta
