#include "varioeta/objectives.hpp"

#include <algorithm>
#include <cmath>

#include "varioeta/error.hpp"
#include "varioeta/rng.hpp"

namespace varioeta {

namespace {

double relative_step(double h, double w) { return h * std::max(1.0, std::abs(w)); }

double checked(double value) {
  if (!std::isfinite(value)) throw Error(ErrorCode::non_finite, "objective evaluation is not finite");
  return value;
}

}  // namespace

void Objective::check_point(std::span<const double> w, std::size_t pattern) const {
  if (w.size() != dimension()) {
    throw Error(ErrorCode::dimension_mismatch, name() + ": parameter vector has wrong dimension");
  }
  if (pattern >= dataset_size()) throw Error(ErrorCode::invalid_argument, name() + ": pattern index out of range");
  for (double x : w) {
    if (!std::isfinite(x)) throw Error(ErrorCode::non_finite, name() + ": parameter vector is not finite");
  }
}

std::vector<double> Objective::grad(std::span<const double> w, std::size_t pattern) const {
  std::vector<double> out(dimension());
  grad(w, pattern, out);
  return out;
}

double Objective::total_error(std::span<const double> w) const {
  double sum = 0.0;
  for (std::size_t p = 0; p < dataset_size(); ++p) sum += eval(w, p);
  return sum / static_cast<double>(dataset_size());
}

std::vector<double> Objective::total_gradient(std::span<const double> w) const {
  std::vector<double> sum(dimension(), 0.0);
  std::vector<double> g(dimension());
  for (std::size_t p = 0; p < dataset_size(); ++p) {
    grad(w, p, g);
    for (std::size_t i = 0; i < g.size(); ++i) sum[i] += g[i];
  }
  for (double& v : sum) v /= static_cast<double>(dataset_size());
  return sum;
}

// ---------------------------------------------------------------- quadratic

QuadraticObjective::QuadraticObjective(std::vector<double> lambdas, std::vector<double> center, double noise_scale,
                                       std::size_t dataset_size, std::uint64_t seed)
    : lambdas_(std::move(lambdas)), center_(std::move(center)), size_(dataset_size) {
  if (lambdas_.empty()) throw Error(ErrorCode::invalid_argument, "quadratic: need at least one curvature");
  for (double l : lambdas_) {
    if (!(l > 0.0) || !std::isfinite(l)) throw Error(ErrorCode::invalid_argument, "quadratic: curvatures must be positive");
  }
  if (center_.empty()) center_.assign(lambdas_.size(), 0.0);
  if (center_.size() != lambdas_.size()) throw Error(ErrorCode::dimension_mismatch, "quadratic: center dimension");
  if (size_ < 2) throw Error(ErrorCode::invalid_argument, "quadratic: dataset needs at least two patterns");
  if (!(noise_scale >= 0.0)) throw Error(ErrorCode::invalid_argument, "quadratic: noise scale must be non-negative");

  const std::size_t m = lambdas_.size();
  offsets_.assign(size_ * m, 0.0);
  if (noise_scale == 0.0) return;

  // Uniform on [-sqrt(3), sqrt(3)) has unit variance; recentring makes the
  // offsets exactly zero-mean so the total error is minimized at the center.
  RngStream rng(seed, 0);
  const double scale = noise_scale * std::sqrt(3.0);
  for (double& e : offsets_) e = scale * rng.next_symmetric();
  for (std::size_t i = 0; i < m; ++i) {
    double mean = 0.0;
    for (std::size_t p = 0; p < size_; ++p) mean += offsets_[p * m + i];
    mean /= static_cast<double>(size_);
    for (std::size_t p = 0; p < size_; ++p) offsets_[p * m + i] -= mean;
  }
}

std::span<const double> QuadraticObjective::offsets(std::size_t pattern) const {
  if (pattern >= size_) throw Error(ErrorCode::invalid_argument, "quadratic: pattern index out of range");
  return std::span<const double>(offsets_).subspan(pattern * lambdas_.size(), lambdas_.size());
}

double QuadraticObjective::eval(std::span<const double> w, std::size_t pattern) const {
  check_point(w, pattern);
  const double* eps = offsets_.data() + pattern * lambdas_.size();
  double e = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double r = w[i] - center_[i] - eps[i];
    e += lambdas_[i] * r * r;
  }
  return 0.5 * e;
}

void QuadraticObjective::grad(std::span<const double> w, std::size_t pattern, std::span<double> out) const {
  check_point(w, pattern);
  const double* eps = offsets_.data() + pattern * lambdas_.size();
  for (std::size_t i = 0; i < w.size(); ++i) out[i] = lambdas_[i] * (w[i] - center_[i] - eps[i]);
}

// --------------------------------------------------------------- rosenbrock

double RosenbrockObjective::eval(std::span<const double> w, std::size_t pattern) const {
  check_point(w, pattern);
  const double a = 1.0 - w[0];
  const double b = w[1] - w[0] * w[0];
  return a * a + 100.0 * b * b;
}

void RosenbrockObjective::grad(std::span<const double> w, std::size_t pattern, std::span<double> out) const {
  check_point(w, pattern);
  const double b = w[1] - w[0] * w[0];
  out[0] = -2.0 * (1.0 - w[0]) - 400.0 * w[0] * b;
  out[1] = 200.0 * b;
}

// ------------------------------------------------------------ least squares

LeastSquaresObjective::LeastSquaresObjective(std::vector<Pattern> patterns, std::vector<double> hidden_weights)
    : dimension_(patterns.empty() ? 0 : patterns.front().features.size()),
      patterns_(std::move(patterns)),
      hidden_(std::move(hidden_weights)) {
  if (patterns_.empty() || dimension_ == 0) throw Error(ErrorCode::invalid_argument, "least squares: empty dataset");
  for (const auto& p : patterns_) {
    if (p.features.size() != dimension_) throw Error(ErrorCode::dimension_mismatch, "least squares: ragged features");
    if (!std::isfinite(p.target) || !std::all_of(p.features.begin(), p.features.end(), [](double x) { return std::isfinite(x); })) {
      throw Error(ErrorCode::non_finite, "least squares: pattern has a non-finite entry");
    }
  }
}

double LeastSquaresObjective::eval(std::span<const double> w, std::size_t pattern) const {
  check_point(w, pattern);
  const Pattern& p = patterns_[pattern];
  double r = -p.target;
  for (std::size_t i = 0; i < dimension_; ++i) r += p.features[i] * w[i];
  return 0.5 * r * r;
}

void LeastSquaresObjective::grad(std::span<const double> w, std::size_t pattern, std::span<double> out) const {
  check_point(w, pattern);
  const Pattern& p = patterns_[pattern];
  double r = -p.target;
  for (std::size_t i = 0; i < dimension_; ++i) r += p.features[i] * w[i];
  for (std::size_t i = 0; i < dimension_; ++i) out[i] = r * p.features[i];
}

// ---------------------------------------------------------------- factories

std::shared_ptr<const QuadraticObjective> make_quadratic(std::vector<double> lambdas, std::vector<double> center,
                                                         double noise_scale, std::size_t dataset_size,
                                                         std::uint64_t seed) {
  return std::make_shared<const QuadraticObjective>(std::move(lambdas), std::move(center), noise_scale, dataset_size,
                                                    seed);
}

std::shared_ptr<const RosenbrockObjective> make_rosenbrock() { return std::make_shared<const RosenbrockObjective>(); }

std::shared_ptr<const LeastSquaresObjective> make_least_squares(std::size_t dim, std::size_t dataset_size,
                                                                std::uint64_t seed, double noise) {
  if (dim == 0) throw Error(ErrorCode::invalid_argument, "least squares: dimension must be positive");
  if (dataset_size < dim) throw Error(ErrorCode::invalid_argument, "least squares: need at least dim patterns");
  if (!(noise >= 0.0)) throw Error(ErrorCode::invalid_argument, "least squares: noise must be non-negative");
  RngStream rng(seed, 1);
  std::vector<double> hidden(dim);
  for (double& h : hidden) h = rng.next_symmetric();
  std::vector<Pattern> patterns(dataset_size);
  for (auto& p : patterns) {
    p.features.resize(dim);
    for (double& x : p.features) x = rng.next_symmetric();
    double y = 0.0;
    for (std::size_t i = 0; i < dim; ++i) y += p.features[i] * hidden[i];
    p.target = y + noise * rng.next_symmetric();
  }
  return std::make_shared<const LeastSquaresObjective>(std::move(patterns), std::move(hidden));
}

// ------------------------------------------------------ finite differences

std::vector<double> fd_gradient(const Objective& objective, std::span<const double> w, std::size_t pattern, double h) {
  if (!(h > 0.0)) throw Error(ErrorCode::invalid_argument, "finite-difference step must be positive");
  std::vector<double> x(w.begin(), w.end());
  std::vector<double> out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double step = relative_step(h, w[i]);
    const double hi = w[i] + step;
    const double lo = w[i] - step;
    x[i] = hi;
    const double up = checked(objective.eval(x, pattern));
    x[i] = lo;
    const double down = checked(objective.eval(x, pattern));
    x[i] = w[i];
    out[i] = (up - down) / (hi - lo);
  }
  return out;
}

std::vector<double> fd_hessian_diag(const Objective& objective, std::span<const double> w, double h) {
  if (!(h > 0.0)) throw Error(ErrorCode::invalid_argument, "finite-difference step must be positive");
  std::vector<double> x(w.begin(), w.end());
  const double center = checked(objective.total_error(x));
  std::vector<double> out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double step = relative_step(h, w[i]);
    x[i] = w[i] + step;
    const double up = checked(objective.total_error(x));
    x[i] = w[i] - step;
    const double down = checked(objective.total_error(x));
    x[i] = w[i];
    out[i] = (up - 2.0 * center + down) / (step * step);
  }
  return out;
}

}  // namespace varioeta
