#pragma once

// Pattern-indexed test objectives. The total error of an objective is the
// mean of its per-pattern errors, so the batch gradient is the mean of the
// per-pattern gradients. Objectives are immutable once built.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace varioeta {

struct Pattern {
  std::vector<double> features;
  double target = 0.0;
};

class Objective {
 public:
  virtual ~Objective() = default;

  virtual std::string name() const = 0;
  virtual std::size_t dimension() const noexcept = 0;
  virtual std::size_t dataset_size() const noexcept = 0;

  virtual double eval(std::span<const double> w, std::size_t pattern) const = 0;
  virtual void grad(std::span<const double> w, std::size_t pattern, std::span<double> out) const = 0;

  std::vector<double> grad(std::span<const double> w, std::size_t pattern) const;
  double total_error(std::span<const double> w) const;
  std::vector<double> total_gradient(std::span<const double> w) const;

 protected:
  void check_point(std::span<const double> w, std::size_t pattern) const;
};

/// Per-pattern error 1/2 sum_i lambda_i (w_i - c_i - eps_i^p)^2 with frozen,
/// exactly zero-mean offsets eps^p of standard deviation noise_scale.
class QuadraticObjective final : public Objective {
 public:
  QuadraticObjective(std::vector<double> lambdas, std::vector<double> center, double noise_scale,
                     std::size_t dataset_size, std::uint64_t seed);

  std::string name() const override { return "quadratic"; }
  std::size_t dimension() const noexcept override { return lambdas_.size(); }
  std::size_t dataset_size() const noexcept override { return size_; }
  double eval(std::span<const double> w, std::size_t pattern) const override;
  void grad(std::span<const double> w, std::size_t pattern, std::span<double> out) const override;
  using Objective::grad;

  std::span<const double> lambdas() const noexcept { return lambdas_; }
  std::span<const double> center() const noexcept { return center_; }
  std::span<const double> offsets(std::size_t pattern) const;

 private:
  std::vector<double> lambdas_;
  std::vector<double> center_;
  std::size_t size_;
  std::vector<double> offsets_;  // row-major, size_ x dimension
};

/// (1 - w1)^2 + 100 (w2 - w1^2)^2 on a single pattern.
class RosenbrockObjective final : public Objective {
 public:
  std::string name() const override { return "rosenbrock"; }
  std::size_t dimension() const noexcept override { return 2; }
  std::size_t dataset_size() const noexcept override { return 1; }
  double eval(std::span<const double> w, std::size_t pattern) const override;
  void grad(std::span<const double> w, std::size_t pattern, std::span<double> out) const override;
  using Objective::grad;
};

/// Per-pattern error 1/2 (x.w - y)^2.
class LeastSquaresObjective final : public Objective {
 public:
  LeastSquaresObjective(std::vector<Pattern> patterns, std::vector<double> hidden_weights = {});

  std::string name() const override { return "least-squares"; }
  std::size_t dimension() const noexcept override { return dimension_; }
  std::size_t dataset_size() const noexcept override { return patterns_.size(); }
  double eval(std::span<const double> w, std::size_t pattern) const override;
  void grad(std::span<const double> w, std::size_t pattern, std::span<double> out) const override;
  using Objective::grad;

  const Pattern& pattern(std::size_t index) const { return patterns_.at(index); }
  /// Weights the targets were generated from; empty for hand-built datasets.
  std::span<const double> hidden_weights() const noexcept { return hidden_; }

 private:
  std::size_t dimension_;
  std::vector<Pattern> patterns_;
  std::vector<double> hidden_;
};

std::shared_ptr<const QuadraticObjective> make_quadratic(std::vector<double> lambdas, std::vector<double> center,
                                                         double noise_scale, std::size_t dataset_size,
                                                         std::uint64_t seed);

std::shared_ptr<const RosenbrockObjective> make_rosenbrock();

/// Features uniform on [-1, 1]^dim, hidden weights uniform on [-1, 1], and
/// targets x.w* plus uniform noise on [-noise, noise].
std::shared_ptr<const LeastSquaresObjective> make_least_squares(std::size_t dim, std::size_t dataset_size,
                                                                std::uint64_t seed, double noise = 0.1);

/// Central differences of one pattern's error. The step for coordinate i is
/// h * max(1, |w_i|).
std::vector<double> fd_gradient(const Objective& objective, std::span<const double> w, std::size_t pattern,
                                double h = 1e-6);

/// Central second differences of the total error along each axis, with the
/// same relative step rule as fd_gradient.
std::vector<double> fd_hessian_diag(const Objective& objective, std::span<const double> w, double h = 1e-4);

}  // namespace varioeta
